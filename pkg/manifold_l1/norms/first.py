from manifold_l1 import norms
from manifold_l1 import l1_utils


class Norm(norms.BaseNorm):
    name = 'first'
    description = 'Exact norm of the piecewise-linear interpolant, ' \
                    'integrated by splitting faces along its zero line.'

    def evaluate(self, mesh, f):
        return l1_utils.norm_first(mesh, f)

    def weights(self, mesh, f):
        return l1_utils.first_order_weights(mesh, f)
