"""
Smallest generalized eigenpair of (Q + U U^T, A) for sparse Q,
low-rank U and diagonal A.

Solves with Q + U U^T go through the Woodbury identity: Q is
factorized once and the r x r core (I + U^T Q^-1 U) is Cholesky
factorized once, then reused for every solve of the iteration.
"""
import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from manifold_l1 import config
from manifold_l1 import config_types
from manifold_l1 import errors
from manifold_l1 import linalg_utils
from manifold_l1 import options
from manifold_l1 import utils


LANCZOS = 'lanczos'
INVERSE = 'inverse'
WOODBURY = 'woodbury'
REFACTOR = 'refactor'
DENSE = 'dense'
solvers = [WOODBURY, REFACTOR, DENSE]

# Below this size the inverse-iteration path is used regardless
# of the requested method
MIN_LANCZOS_SIZE = 20


class SpectralOptions(options.BaseOptions):
    name = 'spectral'
    description = 'Smallest generalized eigenpair by shift-inverted ' \
                    'iteration with Woodbury solves.'

    def _set_config_params(self):
        self.configs.add_param('method', config_types.ChoiceVal(LANCZOS, INVERSE),
                               help='Lanczos (ARPACK, shift-invert mode) or '
                                    'plain inverse iteration.')
        self.configs.add_param('solver', config_types.ChoiceVal(*solvers),
                               help='Sparse factorization of Q with Woodbury '
                                    'updates, sparse factorization of the '
                                    'explicit Q + U U^T, or a dense '
                                    'eigensolver.')
        self.configs.add_param('project', config_types.BoolVal,
                               help='Also project iterates away from the '
                                    'previous modes. If false, deflation '
                                    'relies on the U U^T penalty alone.')
        self.configs.add_param('tol', config_types.PositiveFloatVal,
                               help='Convergence tolerance on the A-norm '
                                    'change of successive iterates.')
        self.configs.add_param('max_iters', config_types.PositiveIntVal,
                               aliases=['maxiter'],
                               help='Maximum number of inner iterations.')
        self.configs.add_param('shift_budget', config_types.IntVal,
                               help='Number of shift doublings attempted '
                                    'when Q is not positive definite.')
        self.configs.add_param('seed', config_types.IntVal, nullable=True,
                               help='Seed of a random start vector. None '
                                    'starts from the all-ones vector.')


class EigenResult(object):
    def __init__(self, eigenvalue, eigenvector, residual, iterations,
                 shift=0.0):
        self.eigenvalue = float(eigenvalue)
        self.eigenvector = eigenvector
        self.residual = float(residual)
        self.iterations = int(iterations)
        self.shift = float(shift)

    def __repr__(self):
        return "<EigenResult: lambda=%.17g, residual=%g, iterations=%d>" % \
                    (self.eigenvalue, self.residual, self.iterations)


class WoodburySolver(object):
    """Solve (Q + U U^T) x = rhs from a factorization of Q.
    """
    def __init__(self, factor, U):
        """Inputs:
                factor: The SpdFactor of Q.
                U: (n, r) low-rank factor (r may be 0).
        """
        if not isinstance(factor, linalg_utils.SpdFactor):
            raise errors.FactorizationRequired("A Woodbury solve needs a "
                                               "factorized Q (SpdFactor), got "
                                               "%s." % type(factor).__name__)
        self.factor = factor
        self.U = as_low_rank(U, factor.n)
        self.rank = self.U.shape[1]
        if self.rank:
            self.QinvU = factor.solve(self.U)
            core = np.eye(self.rank) + self.U.T.dot(self.QinvU)
            core = linalg_utils.symmetric_part(core)
            if not np.all(np.isfinite(core)):
                raise errors.CoreSingular("The Woodbury core matrix is not "
                                          "finite.")
            try:
                self.core = scipy.linalg.cho_factor(core)
            except np.linalg.LinAlgError as exc:
                raise errors.CoreSingular("The Woodbury core matrix "
                                          "I + U^T Q^-1 U is numerically "
                                          "singular (%s). Check beta and the "
                                          "deflated modes." % exc)

    @property
    def n(self):
        return self.factor.n

    def solve(self, rhs):
        psi = self.factor.solve(rhs)
        if not self.rank:
            return psi
        return psi - self.QinvU.dot(scipy.linalg.cho_solve(self.core,
                                                           self.U.T.dot(psi)))

    __call__ = solve

    def matvec(self, x):
        """Apply the factorized Q + U U^T.
        """
        return apply_low_rank_sum(self.factor.matrix, self.U, x)


def as_low_rank(U, n):
    if U is None:
        return np.zeros((n, 0))
    U = np.asarray(U, dtype=float)
    if U.ndim == 1:
        U = U[:, None]
    if U.ndim != 2 or U.shape[0] != n:
        raise errors.DimensionMismatch("Low-rank factor must have %d rows "
                                       "(got shape %s)." % (n, U.shape))
    if not np.all(np.isfinite(U)):
        raise errors.InputError("Low-rank factor has non-finite entries.")
    return U


def apply_low_rank_sum(Q, U, x):
    out = Q.dot(x)
    if U.shape[1]:
        out = out + U.dot(U.T.dot(x))
    return out


def woodbury_solve(factor, U, rhs):
    """Return (Q + U U^T)^-1 rhs given the factorization of Q.

        Inputs:
            factor: SpdFactor of Q.
            U: (n, r) low-rank factor.
            rhs: n-vector (or (n, k) array).

        Output:
            x: The solution.
    """
    return WoodburySolver(factor, U).solve(rhs)


def deflation_factor(a, prev_modes, beta):
    """Low-rank factor U = sqrt(beta) A Phi, so that
        U U^T = beta A (sum_j phi_j phi_j^T) A.

        Inputs:
            a: Diagonal of A (vector, CellAreaVector or sparse diagonal).
            prev_modes: Previously computed modes (list of n-vectors
                or an (n, k) array).
            beta: The deflation weight (> 0).

        Output:
            U: (n, len(prev_modes)) array.
    """
    a = linalg_utils.as_diagonal(a)
    if not beta > 0:
        raise errors.InputError("The deflation weight beta must be positive "
                                "(got %s)." % beta)
    phi = _as_mode_matrix(prev_modes, len(a))
    return np.sqrt(beta)*(a[:, None]*phi)


def _as_mode_matrix(modes, n):
    if modes is None:
        return np.zeros((n, 0))
    if isinstance(modes, (list, tuple)):
        if not len(modes):
            return np.zeros((n, 0))
        modes = np.column_stack(modes)
    modes = np.asarray(modes, dtype=float)
    if modes.ndim == 1:
        modes = modes[:, None]
    if modes.shape[0] != n:
        raise errors.DimensionMismatch("Modes have %d entries, expected %d." %
                                       (modes.shape[0], n))
    return modes


def gersgorin_bound(Q, a):
    """Upper bound max_i sum_j |Q_ij| / a_i on the spectrum of (Q, A).
    """
    a = linalg_utils.as_diagonal(a)
    rowabs = np.asarray(abs(sp.csr_matrix(Q)).sum(axis=1)).ravel()
    return float(np.max(rowabs/a))


def default_beta(Q, a, beta_factor):
    return beta_factor*gersgorin_bound(Q, a)


def refactor_solver(Q, U, a, shift_budget=5, max_nnz=None):
    """Factorize the explicit sparse matrix Q + U U^T (shifted by
        sigma*A if needed). This is the solve path without the
        Woodbury identity.

        Outputs:
            factor: The SpdFactor of Q + U U^T (+ sigma A).
            sigma: The applied shift.
    """
    if max_nnz is None:
        max_nnz = config.cfg.refactor_max_nnz
    rows = np.flatnonzero(np.any(U != 0, axis=1))
    nnz = Q.nnz + len(rows)**2
    if nnz > max_nnz:
        raise errors.SizeLimitExceeded("Refactorizing Q + U U^T needs about %d "
                                       "nonzeros (limit %d). Use the Woodbury "
                                       "solver or raise 'refactor_max_nnz'." %
                                       (nnz, max_nnz))
    B = Q
    if len(rows):
        Ur = U[rows]
        block = Ur.dot(Ur.T)
        ii, jj = np.meshgrid(rows, rows, indexing='ij')
        B = (Q + sp.csr_matrix((block.ravel(), (ii.ravel(), jj.ravel())),
                               shape=Q.shape)).tocsr()
    return linalg_utils.factorize_with_shift(B, a, shift_budget)


def fix_sign(phi):
    """Flip 'phi' so that its largest-magnitude entry is positive.
    """
    idx = np.argmax(np.abs(phi))
    if phi[idx] < 0:
        return -phi
    return phi


def dense_generalized_eig(B, a, dense_limit=None):
    """All eigenpairs of B phi = lambda A phi, ascending, with
        A-orthonormal and sign-fixed eigenvectors.

        Inputs:
            B: Dense (or sparse) symmetric matrix.
            a: Diagonal of the positive diagonal matrix A.
            dense_limit: Maximum dimension. (Default: the
                'dense_limit' configuration)

        Outputs:
            evals: Ascending eigenvalues.
            evecs: (n, n) eigenvectors as columns.
    """
    if dense_limit is None:
        dense_limit = config.cfg.dense_limit
    a = linalg_utils.as_diagonal(a)
    n = len(a)
    if n > dense_limit:
        raise errors.SizeLimitExceeded("Dense generalized eigensolve limited "
                                       "to %d unknowns (got %d). Raise "
                                       "'dense_limit' (--dense-limit) or use "
                                       "the sparse solver." % (dense_limit, n))
    dense = B.toarray() if sp.issparse(B) else np.array(B, dtype=float)
    dense = linalg_utils.symmetric_part(dense)
    evals, evecs = scipy.linalg.eigh(dense, np.diag(a))
    order = np.argsort(evals, kind='stable')
    evals, evecs = evals[order], evecs[:, order]
    for ii in range(n):
        evecs[:, ii] = fix_sign(evecs[:, ii])
    return evals, evecs


class _Deflator(object):
    """A-orthogonal projection away from previously computed modes.
    """
    def __init__(self, a, modes):
        self.a = a
        self.modes = _as_mode_matrix(modes, len(a))
        self.amodes = a[:, None]*self.modes

    def project(self, x):
        """x - Phi Phi^T A x
        """
        if not self.modes.shape[1]:
            return x
        return x - self.modes.dot(self.amodes.T.dot(x))

    def project_transpose(self, b):
        """b - A Phi Phi^T b
        """
        if not self.modes.shape[1]:
            return b
        return b - self.amodes.dot(self.modes.T.dot(b))


def _anorm(x, a):
    return float(np.sqrt(np.dot(x, a*x)))


def start_vector(n, a, deflator, seed=None):
    """Deterministic start vector: the all-ones vector (or a seeded
        random one), projected away from the previous modes. Falls
        back to a seeded random vector if the projection vanishes.
    """
    if seed is None:
        x = np.ones(n)
    else:
        x = np.random.RandomState(seed).standard_normal(n)
    before = _anorm(x, a)
    x = deflator.project(x)
    if _anorm(x, a) <= 1e-8*before:
        x = deflator.project(np.random.RandomState(seed or 0).standard_normal(n))
    return x/_anorm(x, a)


def _inverse_iteration(op, a, x, tol, max_iters):
    for iteration in range(1, max_iters+1):
        y = op(a*x)
        y = y/_anorm(y, a)
        sign = 1.0 if np.dot(y, a*x) >= 0 else -1.0
        change = _anorm(y-sign*x, a)
        x = y
        if change < tol:
            return x, iteration, change
    raise errors.NoConvergence("Inverse iteration did not converge in %d "
                               "iterations (last change %g)." %
                               (max_iters, change),
                               iterations=max_iters, residual=change)


def _lanczos(op, Bmatvec, a, x, shift, tol, max_iters):
    n = len(a)
    counter = [0]

    def opinv(b):
        counter[0] += 1
        return op(np.asarray(b).reshape(-1))

    Bop = spla.LinearOperator((n, n), matvec=Bmatvec, dtype=float)
    OPinv = spla.LinearOperator((n, n), matvec=opinv, dtype=float)
    try:
        evals, evecs = spla.eigsh(Bop, k=1, M=sp.diags(a, format='csr'),
                                  sigma=-shift, which='LM', OPinv=OPinv,
                                  v0=x, tol=tol, maxiter=max_iters)
    except spla.ArpackNoConvergence as exc:
        raise errors.NoConvergence("Lanczos (ARPACK) did not converge in %d "
                                   "iterations: %s" % (max_iters, exc),
                                   iterations=counter[0])
    except spla.ArpackError as exc:
        raise errors.SolveFailure("ARPACK failed: %s" % exc)
    return evecs[:, 0], counter[0]


def smallest_generalized_eigpair(Q, U, A, opts=None, v0=None, prev_modes=None):
    """Compute the smallest eigenpair of (Q + U U^T) phi = lambda A phi.

        Inputs:
            Q: Sparse symmetric matrix. If it is not positive definite
                Q + sigma A is factorized instead (see
                linalg_utils.factorize_with_shift).
            U: (n, r) low-rank factor, or None.
            A: Positive diagonal mass (vector or sparse diagonal).
            opts: SpectralOptions. (Default: configured defaults)
            v0: Start vector (e.g. the previous iterate).
                (Default: see start_vector)
            prev_modes: Modes the result must be A-orthogonal to; the
                iteration is kept in their A-orthogonal complement.
                (Default: none)

        Output:
            result: An EigenResult with A-normalized, sign-fixed
                eigenvector.
    """
    if opts is None:
        opts = SpectralOptions()
    Q = sp.csr_matrix(Q, dtype=float)
    a = linalg_utils.as_diagonal(A)
    n = len(a)
    if Q.shape != (n, n):
        raise errors.DimensionMismatch("Q is %s but A has %d entries." %
                                       (Q.shape, n))
    if np.any(a <= 0):
        raise errors.InputError("The mass matrix must have a positive diagonal.")
    U = as_low_rank(U, n)
    deflator = _Deflator(a, prev_modes if opts.project else None)

    def Bmatvec(x):
        return apply_low_rank_sum(Q, U, np.asarray(x).reshape(-1))

    normB = float(np.max(np.asarray(abs(Q).sum(axis=1)).ravel()))
    if U.shape[1]:
        absU = np.abs(U)
        normB += float(np.max(absU.dot(absU.sum(axis=0))))
    limit = opts.tol*max(normB, 1.0)

    def rayleigh(phi):
        phi = fix_sign(phi/_anorm(phi, a))
        Bphi = Bmatvec(phi)
        eigenvalue = float(np.dot(phi, Bphi))
        residual = float(np.linalg.norm(Bphi - eigenvalue*a*phi)/np.linalg.norm(phi))
        return phi, eigenvalue, residual

    shift = 0.0
    op = None
    if opts.solver == DENSE:
        if n > config.cfg.dense_limit:
            raise errors.SizeLimitExceeded("The dense solver is limited to %d "
                                           "unknowns (got %d)." %
                                           (config.cfg.dense_limit, n))
        dense = Q.toarray()
        if U.shape[1]:
            dense += U.dot(U.T)
        evals, evecs = dense_generalized_eig(dense, a)
        phi = evecs[:, 0]
        iterations = 0
    else:
        if opts.solver == REFACTOR:
            solver, shift = refactor_solver(Q, U, a, opts.shift_budget)
        else:
            factor, shift = linalg_utils.factorize_with_shift(Q, a, opts.shift_budget)
            solver = WoodburySolver(factor, U)

        def op(b):
            return deflator.project(solver.solve(deflator.project_transpose(b)))

        if v0 is not None:
            x = deflator.project(np.asarray(v0, dtype=float))
            if _anorm(x, a) > 0:
                x = x/_anorm(x, a)
            else:
                x = start_vector(n, a, deflator, opts.seed)
        else:
            x = start_vector(n, a, deflator, opts.seed)
        free = n - deflator.modes.shape[1]
        if opts.method == LANCZOS and free >= MIN_LANCZOS_SIZE:
            phi, iterations = _lanczos(op, Bmatvec, a, x, shift, opts.tol,
                                       opts.max_iters)
        else:
            phi, iterations, change = _inverse_iteration(op, a, x, opts.tol,
                                                         opts.max_iters)
        phi = deflator.project(phi)

    phi, eigenvalue, residual = rayleigh(phi)
    if op is not None:
        # A few inverse-iteration sweeps polish a loosely converged vector
        for polish in range(3):
            if residual <= limit:
                break
            phi, eigenvalue, residual = rayleigh(op(a*phi))
            iterations += 1
    if residual > limit:
        utils.check_failed("Eigen-residual %g exceeds tol*||B|| (%g)" %
                           (residual, limit))
    utils.print_info("Smallest eigenpair: lambda=%.17g, residual=%g, "
                     "%d iterations (shift %g)" %
                     (eigenvalue, residual, iterations, shift), 4)
    return EigenResult(eigenvalue, phi, residual, iterations, shift)
