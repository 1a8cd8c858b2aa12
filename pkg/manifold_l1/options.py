"""
Typed, string-configurable parameter sets.

Option objects (IRLS, spectral, CMM) and norm plugins keep their
parameters in a Configurations dictionary. Parameters can be set
from a config-string of the form <param1>=<val1>[,<param2>=<val2>,...]
or by keyword, and every value is normalised through its type.
"""
import textwrap

from manifold_l1 import config
from manifold_l1 import config_types
from manifold_l1 import errors
from manifold_l1 import colour


class Configurations(dict):
    """An object for typed configurations.

        Contains methods for parsing configuration strings, and writing
        normalised configuration strings.
    """

    def __init__(self, *args, **kwargs):
        super(Configurations, self).__init__(*args, **kwargs)
        self.cfgstrs = {}
        self.types = {} # dictionary where keys are configuration names
                        # and values are ConfigType instances

        self.aliases = {} # dictionary where keys are aliases and
                          # values are the normalised names, which
                          # appear in 'types'
        self.helpstrs = {} # dictionary where keys are configuration names
                           # and values are help strings.

    def __str__(self):
        return self.to_string()

    def normalise_key(self, key):
        key = self.aliases.get(key, key)
        if key not in self.types:
            raise errors.ConfigurationError("Unknown parameter '%s'. "
                                            "Known parameters: %s" %
                                            (key, ", ".join(sorted(self.types))))
        return key

    def __setitem__(self, key, valstr):
        key = self.normalise_key(key)
        cfgtype = self.types[key]
        try:
            normed = cfgtype.normalize_param_string(valstr)
            castedval = cfgtype.get_param_value(valstr)
        except ValueError as exc:
            raise errors.ConfigurationError("Bad value for parameter "
                                            "'%s' (%r): %s" % (key, valstr, exc))
        self.cfgstrs[key] = normed
        super(Configurations, self).__setitem__(key, castedval)

    def __getitem__(self, key):
        key = self.aliases.get(key, key)
        return super(Configurations, self).__getitem__(key)

    def __getattr__(self, key):
        try:
            return self[key]
        except KeyError:
            raise AttributeError(key)

    def to_string(self):
        # Sort to normalise order
        return ','.join(sorted(['%s=%s' % ii for ii in self.cfgstrs.items()]))

    def to_dict(self):
        return dict((key, self[key]) for key in sorted(self.types))

    def set_from_string(self, cfgstr):
        """Set configurations from a string.

            Input:
                cfgstr: A formatted string of configurations.
                    Format is:
                        <param1>=<val1>[,<param2>=<val2>,...]

            Outputs:
                None
        """
        if not cfgstr or not cfgstr.strip():
            return
        for cfg in cfgstr.split(','):
            if '=' not in cfg:
                raise errors.ConfigurationError("Bad configuration entry "
                                                "'%s'. Format is <param>=<val>." % cfg)
            key, val = cfg.split('=', 1)
            self[key.strip()] = val

    def add_param(self, name, cfgtype, aliases=[], help='', nullable=False):
        """Add a single configuration parameter.

            Inputs:
                name: The normalised name of the parameter.
                cfgtype: The configuration type. This must be a
                    subclass of BaseConfigType.
                aliases: A list of alternative ways the user can specify
                    this parameter.
                    (Default: No aliases)
                help: Help text describing the parameter.
                    (Default: No help text)
                nullable: If value can be set as None.
                    (Default: not nullable).

            Outputs:
                None - The parameters are created and stored.
        """
        # Check that name and aliases are not already in use
        for key in [name]+aliases:
            if (key in self.types) or (key in self.aliases):
                raise ValueError('The name/alias (%s) is already in use. '
                                 'Duplicates are not allowed.' % key)

        if isinstance(cfgtype, type) and \
                issubclass(cfgtype, config_types.BaseConfigType):
            self.types[name] = cfgtype(nullable=nullable)
        else:
            raise ValueError('The provided "cfgtype" (%r) is not a subclass of '
                             'BaseConfigType.' % cfgtype)
        for alias in aliases:
            self.aliases[alias] = name
        self.helpstrs[name] = help


class Configurable(object):
    """The base class of objects carrying typed parameters.

        Defaults are read from the '<name>_default_params' entry of
        the default configurations, then the optional config-string,
        then keyword overrides are applied.
    """
    name = NotImplemented
    description = NotImplemented

    def __init__(self, cfgstr=None, **kwargs):
        self.configs = Configurations()
        self._set_config_params()
        defaults_key = '%s_default_params' % self.name
        self.configs.set_from_string(config.cfg[defaults_key])
        self.parse_config_string(cfgstr)
        for key, val in kwargs.items():
            self.configs[key] = val
        missing = [key for key in self.configs.types
                   if key not in self.configs.cfgstrs]
        if missing:
            raise errors.ConfigurationError("No value set for %s parameter(s): "
                                            "%s" % (self.name, ", ".join(sorted(missing))))
        self._check()

    def __repr__(self):
        return '<%s object -- params: %s>' % (self.__class__.__name__, self.configs)

    def __getattr__(self, key):
        if key.startswith('_') or key == 'configs':
            raise AttributeError(key)
        try:
            return self.configs[key]
        except KeyError:
            raise errors.ConfigurationError("%s has no parameter '%s'" %
                                            (self.__class__.__name__, key))

    def parse_config_string(self, cfgstr):
        """Parse a configuration string, setting the object's
            configurable parameters accordingly.

            Input:
                cfgstr: A formatted string of configurations.
                    Format is:
                        <param1>=<val1>[,<param2>=<val2>,...]

            Outputs:
                None
        """
        self.configs.set_from_string(cfgstr)

    def _set_config_params(self):
        """Set configuration parameters, aliases.
            NOTE: All permitted configurations must be set here.
        """
        pass

    def _check(self):
        """Validate relations between parameters. Raise
            ConfigurationError on failure.
        """
        pass

    def replace(self, **kwargs):
        """Return a copy with some parameters replaced.
        """
        return self.__class__(self.get_config_string(), **kwargs)

    def get_config_string(self):
        """Return a normalised, sorted string of configurations
            including default values.
        """
        return self.configs.to_string()

    def to_dict(self):
        return self.configs.to_dict()

    def get_help(self, full=False):
        helplines = []
        wrapper = textwrap.TextWrapper(subsequent_indent=' ' * (len(self.name) + 4))
        helplines.append('%s -- %s' % (colour.cstring(self.name, 'bold'),
                                       wrapper.fill(self.description)))
        wrapper = textwrap.TextWrapper(initial_indent=' ' * 8,
                                       subsequent_indent=' ' * 12)
        wrapper2 = textwrap.TextWrapper(initial_indent=' ' * 12,
                                        subsequent_indent=' ' * 16)
        if full:
            helplines.append('    Parameters:')
            for cfg in sorted(self.configs.types):
                cfgtype = self.configs.types[cfg]
                helplines.append(wrapper.fill('%s -- %s' %
                                              (cfg, self.configs.helpstrs[cfg])))
                helplines.append('')
                helplines.append(wrapper2.fill(cfgtype.get_help()))
                helplines.append(wrapper2.fill('Default: %s' %
                                               self.configs.cfgstrs[cfg]))
                helplines.append('')
        return '\n'.join(helplines)


class BaseOptions(Configurable):
    """Options controlling one of the solvers.
    """
    pass
