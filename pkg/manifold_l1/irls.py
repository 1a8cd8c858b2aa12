"""
Iteratively reweighted L2 minimization of quadratic-plus-L1
objectives E(f) + mu*||f|| on a mesh.

Each outer iteration replaces the L1 term by the weighted L2
term f^T C f with c_i = w_i(f)/(2 f_i), whose gradient matches
mu*w(f) at the current iterate, and solves (Q + mu C) f = -q.
"""
import json

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from manifold_l1 import config
from manifold_l1 import config_types
from manifold_l1 import errors
from manifold_l1 import l1_utils
from manifold_l1 import linalg_utils
from manifold_l1 import mesh as mesh_mod
from manifold_l1 import options
from manifold_l1 import utils


GERSGORIN = 'gersgorin'
PSDPROJECT = 'psdproject'
NOREPAIR = 'none'
repair_methods = [GERSGORIN, PSDPROJECT, NOREPAIR]

schemes = [l1_utils.NAIVE, l1_utils.ZEROTH, l1_utils.FIRST]


class IRLSOptions(options.BaseOptions):
    name = 'irls'
    description = 'Iteratively reweighted L2 minimization of ' \
                    'E(f) + mu*||f||.'

    def _set_config_params(self):
        self.configs.add_param('scheme', config_types.ChoiceVal(*schemes),
                               help='The L1 discretization.')
        self.configs.add_param('mu', config_types.NonNegativeFloatVal,
                               help='Weight of the L1 term.')
        self.configs.add_param('epsilon_rel', config_types.PositiveFloatVal,
                               aliases=['eps', 'epsilon'],
                               help='Reweighting clamp relative to max|f|.')
        self.configs.add_param('repair', config_types.ChoiceVal(*repair_methods),
                               help='How to restore positive definiteness '
                                    'of Q + mu C when it is lost.')
        self.configs.add_param('max_outer_iters', config_types.PositiveIntVal,
                               aliases=['maxiter', 'max_iters'],
                               help='Maximum number of outer iterations.')
        self.configs.add_param('objective_rel_tol', config_types.PositiveFloatVal,
                               aliases=['tol'],
                               help='Stop when the relative change of the '
                                    'true objective is at most this.')
        self.configs.add_param('area_scheme', config_types.ChoiceVal(*mesh_mod.cell_area_schemes),
                               help='Vertex cell areas used by the zeroth '
                                    'scheme.')
        self.configs.add_param('max_damping', config_types.PositiveIntVal,
                               help='Proximal retries of a step that would '
                                    'increase the objective.')


class QuadraticObjective(object):
    """E(f) = f^T Q f + 2 q^T f + c.
    """
    def __init__(self, Q, q=None, c=0.0):
        self.Q = sp.csr_matrix(Q, dtype=float)
        n = self.Q.shape[0]
        if self.Q.shape != (n, n):
            raise errors.DimensionMismatch("Q must be square (got shape %s)." %
                                           (self.Q.shape,))
        if q is None:
            q = np.zeros(n)
        self.q = np.asarray(q, dtype=float).reshape(-1)
        if len(self.q) != n:
            raise errors.DimensionMismatch("q has %d entries but Q is %d x %d." %
                                           (len(self.q), n, n))
        self.c = float(c)

    @property
    def n(self):
        return self.Q.shape[0]

    def evaluate(self, f):
        f = np.asarray(f, dtype=float)
        return float(f.dot(self.Q.dot(f)) + 2*self.q.dot(f) + self.c)

    __call__ = evaluate


class IRLSHistory(object):
    """Per-iteration records of an IRLS run.
    """
    keys = ('iter', 'objective', 'surrogate', 'repaired', 'clamped',
            'damping', 'snapped')

    def __init__(self):
        self.records = []

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def append(self, iteration, objective, surrogate=None, repaired=0, clamped=0,
               damping=0, snapped=0):
        self.records.append({'iter': int(iteration),
                             'objective': float(objective),
                             'surrogate': None if surrogate is None else float(surrogate),
                             'repaired': int(repaired),
                             'clamped': int(clamped),
                             'damping': int(damping),
                             'snapped': int(snapped)})

    @property
    def objectives(self):
        return np.array([rec['objective'] for rec in self.records])

    @property
    def num_iterations(self):
        """Number of outer iterations (the initial record excluded).
        """
        return max(len(self.records)-1, 0)

    def is_monotone(self, slack=1e-10):
        """True if the true objective never increased by more than
            slack*max(1, |objective|).
        """
        objs = self.objectives
        if len(objs) < 2:
            return True
        allowed = slack*np.maximum(1.0, np.abs(objs[:-1]))
        return bool(np.all(np.diff(objs) <= allowed))

    def to_list(self):
        return [dict(rec) for rec in self.records]

    def to_jsonl(self, fn=None):
        """Return the history as JSON lines (and write them to 'fn'
            if given).
        """
        lines = [json.dumps(rec, sort_keys=True) for rec in self.records]
        text = "\n".join(lines) + ("\n" if lines else "")
        if fn is not None:
            with open(fn, 'w', encoding='utf-8') as ff:
                ff.write(text)
        return text


def reweight(w, f, epsilon_rel, return_clamped=False):
    """Build the diagonal reweighting C with c_i = w_i/(2 f_i).

        |f_i| is clamped below at eps = epsilon_rel*max|f| (or
        epsilon_rel if f is identically zero). sign(0) is taken as +1.

        Inputs:
            w: The L1 weights (L1Weights or array).
            f: The current iterate.
            epsilon_rel: The relative clamp.
            return_clamped: Also return the number of clamped entries.

        Outputs:
            C: (n, n) sparse diagonal matrix.
            clamped: Number of clamped entries (only if requested).
    """
    w = np.asarray(w, dtype=float)
    f = l1_utils.as_vertex_function(f, len(w))
    fmax = np.max(np.abs(f)) if len(f) else 0.0
    eps = epsilon_rel*fmax if fmax > 0 else epsilon_rel
    absf = np.abs(f)
    clamped = absf < eps
    signs = np.where(f < 0, -1.0, 1.0)
    c = w/(2.0*signs*np.maximum(absf, eps))
    C = sp.diags(c, format='csr')
    if return_clamped:
        return C, int(np.sum(clamped))
    return C


def gersgorin_repair(B):
    """Make B strictly diagonally dominant, and hence positive
        definite, by raising deficient diagonal entries.

        Rows with b_ii <= sum_{j!=i} |b_ij| get the diagonal
        sum_{j!=i} |b_ij| + delta, delta = 1e-12 * max_i sum_j |b_ij|.

        Input:
            B: Symmetric sparse matrix.

        Outputs:
            repaired: The repaired CSR matrix.
            count: The number of rows modified.
    """
    B = sp.csr_matrix(B, dtype=float)
    diag = B.diagonal()
    rowabs = np.asarray(abs(B).sum(axis=1)).ravel()
    offabs = rowabs - np.abs(diag)
    maxrow = np.max(rowabs) if len(rowabs) else 0.0
    delta = 1e-12*maxrow if maxrow > 0 else 1e-12
    rows = np.flatnonzero(diag <= offabs)
    if not len(rows):
        return B.copy(), 0
    diff = offabs[rows] + delta - diag[rows]
    shift = sp.csr_matrix((diff, (rows, rows)), shape=B.shape)
    repaired = (B + shift).tocsr()
    repaired.sort_indices()
    utils.print_info("Gersgorin repair modified %d of %d diagonal entries" %
                     (len(rows), B.shape[0]), 4)
    return repaired, len(rows)



def psd_project(B, dense_limit=None, return_count=False, margin_rel=0.0):
    """Raise every eigenvalue of B below margin_rel*max|lambda| to
        that value. With the default margin_rel=0 this is the
        projection onto the positive semidefinite cone,
        B - sum_{l<0} l phi phi^T.

        Inputs:
            B: Symmetric (sparse or dense) matrix.
            dense_limit: Maximum dimension for this dense computation.
                (Default: the 'dense_limit' configuration)
            return_count: Also return the number of eigenvalues raised.
            margin_rel: Smallest eigenvalue of the result relative to
                the largest eigenvalue magnitude of B.

        Outputs:
            projected: Dense symmetric array.
            count: Number of eigenvalues raised (only if requested).
    """
    if dense_limit is None:
        dense_limit = config.cfg.dense_limit
    n = B.shape[0]
    if n > dense_limit:
        raise errors.SizeLimitExceeded("PSD projection is a dense computation "
                                       "and is limited to %d unknowns (got %d). "
                                       "Use the Gersgorin repair or raise "
                                       "'dense_limit'." % (dense_limit, n))
    dense = B.toarray() if sp.issparse(B) else np.array(B, dtype=float)
    dense = linalg_utils.symmetric_part(dense)
    evals, evecs = scipy.linalg.eigh(dense)
    floor = margin_rel*np.max(np.abs(evals)) if n else 0.0
    low = evals < floor
    vlow = evecs[:, low]
    projected = dense + (vlow*(floor-evals[low])).dot(vlow.T)
    projected = linalg_utils.symmetric_part(projected)
    if return_count:
        return projected, int(np.sum(low))
    return projected


def _scheme_weights(mesh, f, scheme, areas):
    if scheme == l1_utils.NAIVE:
        return l1_utils.naive_weights(f)
    elif scheme == l1_utils.ZEROTH:
        return l1_utils.zeroth_weights(f, areas)
    else:
        return l1_utils.first_order_weights(mesh, f)


def scheme_norm(mesh, f, scheme, areas=None):
    """||f|| under 'scheme' (sum_i f_i w_i(f) for every scheme).
    """
    if scheme == l1_utils.NAIVE:
        return l1_utils.norm_naive(f)
    elif scheme == l1_utils.ZEROTH:
        return l1_utils.norm_zeroth(f, areas)
    elif scheme == l1_utils.FIRST:
        return l1_utils.norm_first(mesh, f)
    raise errors.UnrecognizedValueError("Unknown L1 scheme '%s'. Known: %s" %
                                        (scheme, ", ".join(schemes)))


def weight_bounds(mesh, scheme, n, areas=None):
    """Upper bounds s_i >= |w_i(f)| on the L1 weights, valid for
        every f: 1 (naive), the cell areas (zeroth) or the
        barycentric cell areas (first order).
    """
    if scheme == l1_utils.NAIVE:
        return np.ones(n)
    elif scheme == l1_utils.ZEROTH:
        return np.asarray(areas, dtype=float)
    return np.asarray(mesh.cell_areas(mesh_mod.BARYCENTRIC), dtype=float)


def snap_to_zero(objective, x, mu, bounds):
    """Zero the entries of x for which zero may minimize the
        objective along that coordinate, i.e. |g_i| <= mu*s_i with
        g_i the derivative of E at x with x_i = 0 and s_i the weight
        bound of the vertex.

        Outputs:
            snapped: A copy of x with those entries zeroed (x itself
                if there are none).
            count: The number of entries zeroed.
    """
    Q = objective.Q
    grad = 2.0*(Q.dot(x) + objective.q) - 2.0*Q.diagonal()*x
    zero = (x != 0) & (np.abs(grad) <= mu*bounds*(1.0+1e-10))
    count = int(np.sum(zero))
    if not count:
        return x, 0
    snapped = x.copy()
    snapped[zero] = 0.0
    return snapped, count


def repair_matrix(B, repair, dense_limit=None):
    """Apply the requested positive-definiteness repair to B.

        Outputs:
            repaired: Sparse CSR matrix.
            count: Number of repaired rows/eigenvalues.
    """
    if repair == GERSGORIN:
        return gersgorin_repair(B)
    elif repair == PSDPROJECT:
        projected, count = psd_project(B, dense_limit, return_count=True,
                                       margin_rel=config.cfg.psd_margin_rel)
        return sp.csr_matrix(projected), count
    raise errors.SolveFailure("The matrix is not positive definite and no "
                              "repair was requested.")


def _check_finite(value, what):
    if not np.all(np.isfinite(value)):
        raise errors.NonFiniteObjective("Non-finite %s encountered during "
                                        "IRLS." % what)


def initial_guess(objective):
    """The minimizer of E alone: solve Q f = -q, with the
        Gersgorin-repaired Q if Q is singular.
    """
    try:
        factor = linalg_utils.SpdFactor(objective.Q)
    except errors.NotPositiveDefinite:
        repaired, count = gersgorin_repair(objective.Q)
        utils.print_info("Q is not positive definite; initial guess uses "
                         "Gersgorin-repaired Q (%d rows)" % count, 2)
        try:
            factor = linalg_utils.SpdFactor(repaired, pivot_rtol=0.0)
        except errors.NotPositiveDefinite as exc:
            raise errors.SolveFailure("Cannot factorize repaired Q: %s" %
                                      exc.get_message())
    return factor.solve(-objective.q)


def _factorize_surrogate(B, repair, iteration):
    try:
        return B, linalg_utils.SpdFactor(B), 0
    except errors.NotPositiveDefinite:
        pass
    B, repaired = repair_matrix(B, repair)
    try:
        factor = linalg_utils.SpdFactor(B, pivot_rtol=0.0)
    except errors.NotPositiveDefinite as exc:
        raise errors.SolveFailure("Factorization failed after '%s' repair at "
                                  "iteration %d: %s" %
                                  (repair, iteration, exc.get_message()))
    return B, factor, repaired


def damped_step(B, factor, q, f, total, obj, max_damping):
    """Minimize the surrogate f^T B f + 2 q^T f, accepting the step
        only if the true objective does not increase. A rejected
        step is retried with the proximal term tau*(x-f)^T D (x-f),
        D = diag(B), doubling tau from 1.

        Inputs:
            B: The (repaired) positive definite surrogate matrix.
            factor: The SpdFactor of B.
            q: Linear term of the objective.
            f: The current iterate.
            total: Function returning the true objective.
            obj: total(f).
            max_damping: The number of proximal retries.

        Outputs:
            x: The accepted iterate (f itself if every retry failed).
            objx: total(x).
            damping: The number of proximal retries used.
    """
    allowed = obj + 1e-12*max(1.0, abs(obj))

    def evaluate(x):
        if not np.all(np.isfinite(x)):
            return np.inf
        return total(x)

    x = factor.solve(-q)
    objx = evaluate(x)
    if objx <= allowed:
        return x, objx, 0
    d = B.diagonal()
    D = sp.diags(d, format='csr')
    tau = 1.0
    for damping in range(1, max_damping+1):
        damped = linalg_utils.SpdFactor(B + tau*D, pivot_rtol=0.0)
        x = damped.solve(-q + tau*d*f)
        objx = evaluate(x)
        if objx <= allowed:
            utils.print_info("Step accepted with proximal weight %g" % tau, 4)
            return x, objx, damping
        tau *= 2
    utils.print_info("No descent after %d proximal retries; keeping the "
                     "current iterate" % max_damping, 3)
    return f, obj, max_damping


def irls_minimize(mesh, objective, opts=None, areas=None, f0=None):
    """Minimize E(f) + mu*||f|| by iteratively reweighted L2.

        Every accepted step keeps the true objective from increasing
        (see damped_step). Entries whose coordinate-wise minimizer
        is zero are snapped to zero when that lowers the objective.

        Inputs:
            mesh: The TriangleMesh (may be None for the naive scheme,
                or for the zeroth scheme when 'areas' is given).
            objective: The QuadraticObjective E.
            opts: IRLSOptions. (Default: configured defaults)
            areas: Vertex cell areas for the zeroth scheme.
                (Default: mesh.cell_areas(opts.area_scheme))
            f0: Initial iterate. (Default: the minimizer of E)

        Outputs:
            f: The final iterate.
            history: The IRLSHistory.
    """
    if opts is None:
        opts = IRLSOptions()
    scheme, mu = opts.scheme, opts.mu
    n = objective.n
    if mesh is not None and mesh.n_vertices != n:
        raise errors.DimensionMismatch("Objective has %d unknowns but the mesh "
                                       "has %d vertices." % (n, mesh.n_vertices))
    if scheme == l1_utils.ZEROTH:
        if areas is None:
            if mesh is None:
                raise errors.InputError("The zeroth scheme needs a mesh or "
                                        "cell areas.")
            areas = mesh.cell_areas(opts.area_scheme)
        areas = np.asarray(areas, dtype=float)
    elif scheme == l1_utils.FIRST and mesh is None:
        raise errors.InputError("The first-order scheme needs a mesh.")

    def total(x):
        return objective(x) + mu*scheme_norm(mesh, x, scheme, areas)

    if f0 is None:
        f = initial_guess(objective)
    else:
        f = l1_utils.as_vertex_function(f0, n).copy()
    obj = total(f)
    _check_finite(obj, 'objective')
    history = IRLSHistory()
    history.append(0, obj)
    utils.print_info("IRLS (%s, mu=%g) iteration 0: objective %.17g" %
                     (scheme, mu, obj), 2)

    bounds = weight_bounds(mesh, scheme, n, areas) if mu > 0 else None
    Q, q = objective.Q, objective.q
    for iteration in range(1, opts.max_outer_iters+1):
        weights = _scheme_weights(mesh, f, scheme, areas)
        C, clamped = reweight(weights, f, opts.epsilon_rel, return_clamped=True)
        B, factor, repaired = _factorize_surrogate(Q + mu*C, opts.repair,
                                                   iteration)
        fnew, objnew, damping = damped_step(B, factor, q, f, total, obj,
                                            opts.max_damping)
        stalled = fnew is f
        snapped = 0
        if bounds is not None and not stalled:
            candidate, count = snap_to_zero(objective, fnew, mu, bounds)
            if count:
                objsnap = total(candidate)
                if objsnap <= objnew:
                    fnew, objnew, snapped = candidate, objsnap, count
        _check_finite(fnew, 'iterate')
        _check_finite(objnew, 'objective')
        surrogate = objective(fnew) + mu*float(fnew.dot(C.dot(fnew)))
        history.append(iteration, objnew, surrogate, repaired, clamped,
                       damping, snapped)
        utils.print_info("IRLS iteration %d: objective %.17g (repaired: %d, "
                         "clamped: %d, damped: %d, snapped: %d)" %
                         (iteration, objnew, repaired, clamped, damping,
                          snapped), 3)
        if objnew > obj + 1e-10*max(1.0, abs(obj)):
            utils.check_failed("IRLS objective increased at iteration %d "
                               "(%.17g -> %.17g)" % (iteration, obj, objnew))
        converged = stalled or abs(objnew-obj) <= opts.objective_rel_tol * \
                        max(abs(objnew), np.finfo(float).tiny)
        f, obj = fnew, objnew
        if converged:
            break
    utils.print_info("IRLS finished after %d iterations: objective %.17g" %
                     (history.num_iterations, obj), 2)
    return f, history
