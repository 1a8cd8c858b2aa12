from manifold_l1 import norms
from manifold_l1 import l1_utils
from manifold_l1 import config
from manifold_l1 import config_types


class Norm(norms.BaseNorm):
    name = 'oracle'
    description = 'Brute-force barycentric quadrature of the ' \
                    'piecewise-linear interpolant (reference only).'

    def _set_config_params(self):
        self.configs.add_param('quad_points', config_types.PositiveIntVal,
                               aliases=['points', 'quad-points'],
                               help='Minimum number of quadrature points '
                                    'per triangle.')
        self.configs.add_param('seed', config_types.IntVal, nullable=True,
                               help='Scrambling seed of the quadrature '
                                    'points. None uses the '
                                    '"quadrature_seed" configuration.')

    def _get_seed(self):
        if self.configs.seed is None:
            return config.cfg.quadrature_seed
        return self.configs.seed

    def evaluate(self, mesh, f):
        return l1_utils.quadrature_oracle_norm(mesh, f, self.configs.quad_points,
                                               seed=self._get_seed())

    def weights(self, mesh, f):
        return l1_utils.quadrature_oracle_weights(mesh, f, self.configs.quad_points,
                                                  seed=self._get_seed())
