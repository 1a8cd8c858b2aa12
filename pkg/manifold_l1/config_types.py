class BaseConfigType(object):
    """The base class of ConfigType objects.

       ConfigType objects are used to define the parameters
       of option and norm config-strings.
    """
    name = NotImplemented
    description = None

    def __init__(self, nullable=False):
        self.nullable = nullable

    def get_param_value(self, paramstr):
        """Parse a parameter string.

           Inputs:
               paramstr: The parameter string to parse. Values that
                   are already python objects are normalised by
                   passing them through their string form.

           Output:
               val: The parameter value.
        """
        if paramstr is None:
            if self.nullable:
                return None
            raise ValueError("The parameter (type: %s) cannot be None." %
                             self.name)
        if not isinstance(paramstr, str):
            paramstr = self._value_to_string(paramstr)
        if self.nullable and paramstr.strip().lower() == 'none':
            return None
        else:
            return self._string_to_value(paramstr.strip())

    def _string_to_value(self, paramstr):
        """Parse a parameter string.

           Inputs:
               paramstr: The parameter string to parse.

           Output:
               val: The parameter value.
        """
        raise NotImplementedError('The method _string_to_value(...) of '
                                  'ConfigType objects must be implemented '
                                  'by its subclases.')

    def _value_to_string(self, val):
        raise NotImplementedError('The method _value_to_string(...) of '
                                  'ConfigType objects must be implemented '
                                  'by its subclases.')

    def normalize_param_string(self, paramstr):
        """Return a normalized version of the parameter string.

            Inputs:
                paramstr: The parameter string to parse.

            Output:
                normed: The normalized parameter string.
        """
        val = self.get_param_value(paramstr)
        if val is None:
            return 'None'
        else:
            return self._value_to_string(val)

    def get_help(self):
        helpstr = 'Type: %s' % self.name.strip()
        if self.description is not None:
            helpstr += ' - %s' % self.description.strip()
        return helpstr


class IntVal(BaseConfigType):
    """A configuration type for integer values.
    """
    name = 'int'

    def _string_to_value(self, paramstr):
        """Parse 'paramstr' as a normal integer value.
           Floating-point strings with an integral value
           (e.g. '1e3') are accepted.
        """
        try:
            return int(paramstr)
        except ValueError:
            fval = float(paramstr)
            if fval != int(fval):
                raise ValueError("The parameter string '%s' is not an "
                                 "integer." % paramstr)
            return int(fval)

    def _value_to_string(self, val):
        return str(int(val))


class FloatVal(BaseConfigType):
    """A configuration type for floating-point values.
    """
    name = 'float'

    def _string_to_value(self, paramstr):
        return float(paramstr)

    def _value_to_string(self, val):
        # repr keeps full precision so options echoed into
        # reports can be fed back unchanged
        return repr(float(val))


class NonNegativeFloatVal(FloatVal):
    """A configuration type for floating-point values >= 0.
    """
    name = 'non-negative float'

    def _string_to_value(self, paramstr):
        val = float(paramstr)
        if not val >= 0:
            raise ValueError("The value (%s) must be non-negative." % paramstr)
        return val


class PositiveFloatVal(FloatVal):
    """A configuration type for floating-point values > 0.
    """
    name = 'positive float'

    def _string_to_value(self, paramstr):
        val = float(paramstr)
        if not val > 0:
            raise ValueError("The value (%s) must be positive." % paramstr)
        return val


class PositiveIntVal(IntVal):
    """A configuration type for integer values >= 1.
    """
    name = 'positive int'

    def _string_to_value(self, paramstr):
        val = super(PositiveIntVal, self)._string_to_value(paramstr)
        if val < 1:
            raise ValueError("The value (%s) must be at least 1." % paramstr)
        return val


class BoolVal(BaseConfigType):
    """A configuration type for boolean values.
    """
    name = 'bool'
    description = 'The following values are recognised (case insensitive): true, 1, y, yes, false, 0, n, no'

    def _string_to_value(self, paramstr):
        """Parse 'paramstr' as a boolean value. The following values
           are recognised (case insensitive): true, 1, y, yes, false, 0, n, no
        """
        paramstr = paramstr.lower()
        if paramstr in ('true', '1', 'y', 'yes'):
            boolval = True
        elif paramstr in ('false', '0', 'n', 'no'):
            boolval = False
        else:
            raise ValueError('The parameter string "%s" is not recognized. '
                             'Only the following (case-insensitive) '
                             'values are allowed: true, 1, y, yes, '
                             'false, 0, n, no' % paramstr)
        return boolval

    def _value_to_string(self, val):
        return str(bool(val))


class StrVal(BaseConfigType):
    name = "string"
    description = "A string"

    def _string_to_value(self, paramstr):
        return str(paramstr)

    def _value_to_string(self, val):
        return str(val)


def ChoiceVal(*choices):
    """Build a configuration type that only accepts one of 'choices'
        (case insensitive, stored lower-case).

        Inputs:
            *choices: The permitted values.

        Output:
            cfgtype: A subclass of BaseConfigType.
    """
    allowed = tuple(choice.lower() for choice in choices)

    class _ChoiceVal(StrVal):
        name = 'choice'
        description = "One of: %s" % ", ".join(allowed)

        def _string_to_value(self, paramstr):
            val = paramstr.lower()
            if val not in allowed:
                raise ValueError('The value "%s" is not recognized. Only the '
                                 'following are allowed: %s' %
                                 (paramstr, ", ".join(allowed)))
            return val

    _ChoiceVal.choices = allowed
    return _ChoiceVal

