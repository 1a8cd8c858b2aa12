"""
Discrete L1 norm schemes.

Every scheme is a plugin module defining a 'Norm' class that
evaluates ||f|| and the weights w(f) with ||f|| = sum_i f_i w_i(f).
"""
from manifold_l1 import errors
from manifold_l1 import options
from manifold_l1 import utils

registered_norms = ['naive', 'zeroth', 'first', 'oracle']

__all__ = registered_norms


def load_norm(norm_name, cfgstr=None, **kwargs):
    """Import a norm class and return an instance.

        Inputs:
            norm_name: The name of the norm scheme.
            cfgstr: Optional config-string of parameters.
            **kwargs: Parameter overrides.

        Output:
            norm: A norm instance.
    """
    norm_name = str(norm_name).lower()
    if norm_name not in registered_norms:
        raise errors.UnrecognizedValueError("The norm scheme, %s, is not a "
                                            "registered scheme. The following "
                                            "are registered: '%s'" %
                                            (norm_name, "', '".join(registered_norms)))
    mod = __import__("manifold_l1.norms.{0}".format(norm_name), fromlist=["None"])
    return mod.Norm(cfgstr, **kwargs)


class BaseNorm(options.Configurable):
    """The base class of norm schemes.
    """
    name = NotImplemented
    description = NotImplemented
    # Whether 'weights' depends on the mesh geometry
    uses_mesh = True

    def evaluate(self, mesh, f):
        """Return the norm of the vertex function 'f' on 'mesh'.
        """
        raise NotImplementedError('The "evaluate" method of Norm '
                                  'classes must be defined.')

    def weights(self, mesh, f):
        """Return an L1Weights object for 'f' on 'mesh'.
        """
        raise NotImplementedError('The "weights" method of Norm '
                                  'classes must be defined.')

    def __call__(self, mesh, f):
        value = self.evaluate(mesh, f)
        utils.print_info("%s norm: %.17g" % (self.name, value), 4)
        return value
