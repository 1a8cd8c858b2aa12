from manifold_l1 import norms
from manifold_l1 import l1_utils
from manifold_l1 import mesh as mesh_mod
from manifold_l1 import config_types


class Norm(norms.BaseNorm):
    name = 'zeroth'
    description = 'Area-weighted norm sum_i |f_i| a_i using vertex ' \
                    'cell areas.'

    def _set_config_params(self):
        self.configs.add_param('area_scheme', config_types.ChoiceVal(*mesh_mod.cell_area_schemes),
                               aliases=['areas'],
                               help='The vertex cell-area scheme.')

    def evaluate(self, mesh, f):
        return l1_utils.norm_zeroth(f, mesh.cell_areas(self.configs.area_scheme))

    def weights(self, mesh, f):
        return l1_utils.zeroth_weights(f, mesh.cell_areas(self.configs.area_scheme))
