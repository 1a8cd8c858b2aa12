"""
Sparse factorizations with a positive-definiteness check.

A symmetric matrix is factorized with a symmetric fill-reducing
ordering and diagonal pivots only. It is positive definite iff no
off-diagonal pivot was needed and every pivot is positive (beyond
'pivot_rtol' times the largest one).
"""
import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from manifold_l1 import config
from manifold_l1 import errors
from manifold_l1 import utils


def as_diagonal(A):
    """Return the diagonal entries of a diagonal matrix given as a
        sparse matrix, a dense matrix, a CellAreaVector or a vector.
    """
    if sp.issparse(A):
        return np.asarray(A.diagonal(), dtype=float)
    arr = np.asarray(A, dtype=float)
    if arr.ndim == 2:
        return np.diag(arr).copy()
    return arr


def symmetric_part(M):
    return 0.5*(M + M.T)


class SpdFactor(object):
    """A sparse factorization of a symmetric positive definite matrix.
    """
    def __init__(self, matrix, pivot_rtol=None):
        """Factorize 'matrix'. Raise NotPositiveDefinite if it is not
            (numerically) positive definite.

            Inputs:
                matrix: The (n, n) symmetric sparse matrix.
                pivot_rtol: Pivots at or below pivot_rtol times the
                    largest pivot are rejected.
                    (Default: the 'pivot_rtol' configuration)
        """
        if pivot_rtol is None:
            pivot_rtol = config.cfg.pivot_rtol
        self.matrix = sp.csc_matrix(matrix, dtype=float)
        self.n = self.matrix.shape[0]
        if self.matrix.shape != (self.n, self.n):
            raise errors.DimensionMismatch("Cannot factorize a non-square "
                                           "matrix (shape %s)." %
                                           (self.matrix.shape,))
        try:
            self.lu = spla.splu(self.matrix, permc_spec='MMD_AT_PLUS_A',
                                diag_pivot_thresh=0.0,
                                options=dict(SymmetricMode=True))
        except RuntimeError as exc:
            raise errors.NotPositiveDefinite("Factorization failed: %s" % exc,
                                             logit=False)
        if not np.array_equal(self.lu.perm_r, self.lu.perm_c):
            raise errors.NotPositiveDefinite("Factorization needed off-diagonal "
                                             "pivots.", logit=False)
        pivots = self.lu.U.diagonal()
        maxpivot = np.max(np.abs(pivots)) if len(pivots) else 0.0
        if not np.all(np.isfinite(pivots)) or \
                np.any(pivots <= pivot_rtol*maxpivot) or maxpivot <= 0:
            raise errors.NotPositiveDefinite("Smallest pivot (%g) is not "
                                             "positive relative to the largest "
                                             "(%g)." % (np.min(pivots), maxpivot),
                                             logit=False)
        utils.print_info("Factorized %d x %d matrix (%d non-zeros in L+U), "
                         "pivot ratio %.3g" % (self.n, self.n,
                                                self.lu.L.nnz+self.lu.U.nnz,
                                                np.min(pivots)/maxpivot), 3)

    def solve(self, rhs):
        """Solve matrix * x = rhs for a vector or (n, k) array.
        """
        rhs = np.asarray(rhs, dtype=float)
        if rhs.shape[0] != self.n:
            raise errors.DimensionMismatch("Right-hand side has %d rows, the "
                                           "factorized matrix has %d." %
                                           (rhs.shape[0], self.n))
        if rhs.ndim == 2 and rhs.shape[1] == 0:
            return np.zeros(rhs.shape)
        return self.lu.solve(rhs)

    def __call__(self, rhs):
        return self.solve(rhs)


def is_positive_definite(matrix, pivot_rtol=None):
    try:
        SpdFactor(matrix, pivot_rtol)
    except errors.NotPositiveDefinite:
        return False
    return True


def factorize_with_shift(Q, a, shift_budget=5, pivot_rtol=None):
    """Factorize Q, or Q + sigma*diag(a) if Q is not positive
        definite. sigma starts at 1e-8*trace(Q)/n and is doubled
        at most 'shift_budget' times.

        Inputs:
            Q: The (n, n) symmetric sparse matrix.
            a: n positive diagonal mass entries.
            shift_budget: Number of shifts to attempt.
            pivot_rtol: See SpdFactor.

        Outputs:
            factor: The SpdFactor.
            sigma: The shift that was applied (0 if none).
    """
    try:
        return SpdFactor(Q, pivot_rtol), 0.0
    except errors.NotPositiveDefinite as exc:
        reason = exc.get_message()
    n = Q.shape[0]
    trace = float(np.sum(np.abs(Q.diagonal())))
    sigma = 1e-8*trace/n if trace > 0 else 1e-8
    Amat = sp.diags(a)
    for attempt in range(int(shift_budget)+1):
        try:
            factor = SpdFactor(Q + sigma*Amat, pivot_rtol)
        except errors.NotPositiveDefinite as exc:
            reason = exc.get_message()
            sigma *= 2
        else:
            utils.print_info("Factorized with shift sigma=%g (attempt %d)" %
                             (sigma, attempt+1), 3)
            return factor, sigma
    raise errors.ShiftFailure("No positive-definite shift found within %d "
                              "doublings (last sigma=%g). %s" %
                              (shift_budget, sigma/2, reason))
