"""
Numerical kernels for the discrete L1 norm of piecewise-linear
functions on triangle meshes.
"""
import numpy as np
import scipy.stats

from manifold_l1 import config
from manifold_l1 import errors


NAIVE = 'naive'
ZEROTH = 'zeroth'
FIRST = 'first'
ORACLE = 'oracle'

# Upper bound on (faces x points) handled per chunk by the oracle
ORACLE_CHUNK_SIZE = 4000000


def as_vertex_function(f, nverts=None):
    """Return 'f' as a 1D float array after checking its length
        and that all entries are finite.
    """
    f = np.asarray(f, dtype=float)
    if f.ndim != 1:
        raise errors.DimensionMismatch("A vertex function must be one "
                                       "dimensional (got shape %s)." % (f.shape,))
    if nverts is not None and len(f) != nverts:
        raise errors.DimensionMismatch("Function has %d values, expected %d." %
                                       (len(f), nverts))
    if not np.all(np.isfinite(f)):
        raise errors.InputError("Vertex function values must be finite.")
    return f


class L1Weights(object):
    """Per-vertex weights w_i(f) such that ||f|| = sum_i f_i w_i(f).
    """
    def __init__(self, weights, scheme):
        self.weights = np.asarray(weights, dtype=float)
        self.weights.setflags(write=False)
        self.scheme = scheme

    def __len__(self):
        return len(self.weights)

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.weights
        return self.weights.astype(dtype)

    def __neg__(self):
        return L1Weights(-self.weights, self.scheme)

    def __repr__(self):
        return "<L1Weights (%s): %d entries>" % (self.scheme, len(self.weights))


def norm_naive(f):
    """The plain vector norm sum_i |f_i|.
    """
    f = as_vertex_function(f)
    return float(np.sum(np.abs(f)))


def norm_zeroth(f, areas):
    """The area-weighted norm sum_i |f_i| a_i.

        Inputs:
            f: n function samples.
            areas: n vertex cell areas (array or CellAreaVector).

        Output:
            norm: The norm value.
    """
    areas = np.asarray(areas, dtype=float)
    f = as_vertex_function(f, len(areas))
    return float(np.dot(np.abs(f), areas))


def naive_weights(f):
    f = as_vertex_function(f)
    return L1Weights(np.sign(f), NAIVE)


def zeroth_weights(f, areas):
    """w_i = a_i sign(f_i).
    """
    areas = np.asarray(areas, dtype=float)
    f = as_vertex_function(f, len(areas))
    return L1Weights(areas*np.sign(f), ZEROTH)


def _subtriangle_integrals(b1, b2, b3):
    """Integrals of the three local hat functions over the
        sub-triangle with barycentric corners b1, b2, b3 (each
        (q, 3)), relative to the area of the parent face.
        Exact because the hat functions are linear.
    """
    det = np.linalg.det(np.stack([b1, b2, b3], axis=1))
    return np.abs(det)[:, None]*(b1+b2+b3)/3.0


def _split_contributions(fvals, gids, tarea):
    """Signed hat-function integrals over faces whose values have
        both strictly positive and strictly negative entries.

        Inputs:
            fvals: (q, 3) vertex values of the faces.
            gids: (q, 3) global vertex indices of the faces.
            tarea: (q,) face areas.

        Outputs:
            contrib: (q, 3) contributions, ordered like 'gids'.
    """
    nfaces = len(fvals)
    rows = np.arange(nfaces)
    pos = fvals > 0
    neg = fvals < 0
    # The lone vertex: the single strictly positive one, otherwise
    # the single strictly negative one
    lone = np.where(pos.sum(axis=1) == 1, np.argmax(pos, axis=1),
                    np.argmax(neg, axis=1))
    pidx = (lone+1) % 3
    ridx = (lone+2) % 3
    fl = fvals[rows, lone]
    fp = fvals[rows, pidx]
    fr = fvals[rows, ridx]
    # Zero crossings on edges L-P and L-R
    tau1 = fl/(fl-fp)
    tau2 = fl/(fl-fr)

    zeros = np.zeros(nfaces)
    ones = np.ones(nfaces)
    # Barycentric coordinates in the local (L, P, R) frame
    eL = np.column_stack([ones, zeros, zeros])
    eP = np.column_stack([zeros, ones, zeros])
    eR = np.column_stack([zeros, zeros, ones])
    z1 = np.column_stack([1-tau1, tau1, zeros])
    z2 = np.column_stack([1-tau2, zeros, tau2])

    small = _subtriangle_integrals(eL, z1, z2)
    # Quadrilateral (z1, P, R, z2) split at whichever of P and R
    # has the smaller global index
    split_at_p = gids[rows, pidx] < gids[rows, ridx]
    quad_p = _subtriangle_integrals(eP, eR, z2) + \
                _subtriangle_integrals(eP, z2, z1)
    quad_r = _subtriangle_integrals(eR, z2, z1) + \
                _subtriangle_integrals(eR, z1, eP)
    quad = np.where(split_at_p[:, None], quad_p, quad_r)

    sigma = np.sign(fl)
    local = (sigma*tarea)[:, None]*(small-quad)
    contrib = np.empty((nfaces, 3))
    contrib[rows, lone] = local[:, 0]
    contrib[rows, pidx] = local[:, 1]
    contrib[rows, ridx] = local[:, 2]
    return contrib


def first_order_weights(mesh, f):
    """Exact weights w_i = int b_i sign(f_hat) of the piecewise-linear
        interpolant f_hat of 'f'.

        Faces where f does not change sign contribute s*area/3 to
        each corner. Other faces are cut along the zero line of
        f_hat into a triangle and a quadrilateral (split into two
        triangles), each integrated exactly.

        Inputs:
            mesh: The TriangleMesh.
            f: n function samples.

        Output:
            weights: An L1Weights object (scheme 'first').
    """
    f = as_vertex_function(f, mesh.n_vertices)
    faces = mesh.faces
    fvals = f[faces]
    tarea = mesh.face_areas
    mixed = np.any(fvals > 0, axis=1) & np.any(fvals < 0, axis=1)

    contrib = np.empty(fvals.shape)
    uniform = ~mixed
    # All >= 0 or all <= 0; zero counts as either sign
    ssign = np.sign(np.sum(fvals[uniform], axis=1))
    contrib[uniform] = (ssign*tarea[uniform]/3.0)[:, None]
    if np.any(mixed):
        contrib[mixed] = _split_contributions(fvals[mixed], faces[mixed],
                                              tarea[mixed])
    weights = np.bincount(faces.ravel(), weights=contrib.ravel(),
                          minlength=mesh.n_vertices)
    return L1Weights(weights, FIRST)


def norm_first(mesh, f):
    """The exact L1 norm of the piecewise-linear interpolant,
        sum_i f_i w_i(f).
    """
    f = as_vertex_function(f, mesh.n_vertices)
    weights = first_order_weights(mesh, f).weights
    # Non-negative by construction, up to rounding
    return max(float(np.dot(f, weights)), 0.0)


def quadrature_points(points_per_triangle, seed=None):
    """A deterministic, permutation-symmetric barycentric point set.

        Scrambled Halton points in the unit square are folded into
        the reference triangle and symmetrised over all six vertex
        permutations, so the mean of every barycentric coordinate
        is exactly 1/3. Fewer than six points give the centroid.

        Inputs:
            points_per_triangle: Minimum number of points.
            seed: Scrambling seed.
                (Default: the 'quadrature_seed' configuration)

        Output:
            bary: (p, 3) barycentric coordinates.
    """
    if points_per_triangle < 1:
        raise errors.InputError("At least one quadrature point per triangle "
                                "is required (got %d)." % points_per_triangle)
    if points_per_triangle < 6:
        return np.full((1, 3), 1.0/3.0)
    if seed is None:
        seed = config.cfg.quadrature_seed
    nbase = int(np.ceil(points_per_triangle/6.0))
    sampler = scipy.stats.qmc.Halton(d=2, scramble=True, seed=seed)
    uv = sampler.random(nbase)
    fold = np.sum(uv, axis=1) > 1
    uv[fold] = 1.0 - uv[fold]
    base = np.column_stack([1.0-uv[:, 0]-uv[:, 1], uv[:, 0], uv[:, 1]])
    perms = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
    return np.concatenate([base[:, perm] for perm in perms])


def _iter_face_chunks(nfaces, npoints):
    chunk = max(1, ORACLE_CHUNK_SIZE // npoints)
    for start in range(0, nfaces, chunk):
        yield slice(start, min(start+chunk, nfaces))


def quadrature_oracle_norm(mesh, f, points_per_triangle, seed=None):
    """Brute-force quadrature of int |f_hat| over the mesh.

        Inputs:
            mesh: The TriangleMesh.
            f: n function samples.
            points_per_triangle: Minimum number of quadrature points
                per face (see quadrature_points).
            seed: Scrambling seed of the point set.

        Output:
            norm: The quadrature estimate.
    """
    f = as_vertex_function(f, mesh.n_vertices)
    bary = quadrature_points(points_per_triangle, seed)
    fvals = f[mesh.faces]
    total = 0.0
    for chunk in _iter_face_chunks(mesh.n_faces, len(bary)):
        fhat = fvals[chunk].dot(bary.T)
        total += float(np.dot(mesh.face_areas[chunk],
                              np.mean(np.abs(fhat), axis=1)))
    return total


def quadrature_oracle_weights(mesh, f, points_per_triangle, seed=None):
    """Brute-force quadrature of w_i = int b_i sign(f_hat).
    """
    f = as_vertex_function(f, mesh.n_vertices)
    bary = quadrature_points(points_per_triangle, seed)
    fvals = f[mesh.faces]
    contrib = np.empty(fvals.shape)
    for chunk in _iter_face_chunks(mesh.n_faces, len(bary)):
        signs = np.sign(fvals[chunk].dot(bary.T))
        contrib[chunk] = mesh.face_areas[chunk, None] * \
                            signs.dot(bary)/len(bary)
    weights = np.bincount(mesh.faces.ravel(), weights=contrib.ravel(),
                          minlength=mesh.n_vertices)
    return L1Weights(weights, ORACLE)
