from manifold_l1 import norms
from manifold_l1 import l1_utils


class Norm(norms.BaseNorm):
    name = 'naive'
    description = 'The plain vector norm sum_i |f_i|, ignoring the mesh.'
    uses_mesh = False

    def evaluate(self, mesh, f):
        if mesh is not None:
            f = l1_utils.as_vertex_function(f, mesh.n_vertices)
        return l1_utils.norm_naive(f)

    def weights(self, mesh, f):
        if mesh is not None:
            f = l1_utils.as_vertex_function(f, mesh.n_vertices)
        return l1_utils.naive_weights(f)
