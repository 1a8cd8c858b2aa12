"""
Compressed manifold modes.

Modes are computed one at a time. For mode i the L1 term is
handled by reweighting: the weights act as a potential V and
phi_i is the smallest eigenvector of
    (W + mu A V + beta A Phi_<i Phi_<i^T A) phi = lambda A phi,
alternating with updates of V until the discrete objective
phi^T W phi + mu ||phi|| settles.
"""
import os
import warnings

import numpy as np
import scipy.sparse as sp

from manifold_l1 import config
from manifold_l1 import config_types
from manifold_l1 import errors
from manifold_l1 import irls
from manifold_l1 import l1_utils
from manifold_l1 import linalg_utils
from manifold_l1 import mesh as mesh_mod
from manifold_l1 import mesh_io
from manifold_l1 import operators
from manifold_l1 import options
from manifold_l1 import spectral
from manifold_l1 import utils


class CMMOptions(options.BaseOptions):
    name = 'cmm'
    description = 'Compressed manifold modes by reweighted, deflated ' \
                    'eigenproblems.'

    def _set_config_params(self):
        self.configs.add_param('k', config_types.PositiveIntVal,
                               aliases=['nmodes'],
                               help='Number of modes.')
        self.configs.add_param('mu', config_types.NonNegativeFloatVal,
                               help='Sparsity weight (mesh-area units).')
        self.configs.add_param('scheme', config_types.ChoiceVal(*irls.schemes),
                               help='The L1 discretization.')
        self.configs.add_param('repair', config_types.ChoiceVal(*irls.repair_methods),
                               help='Repair applied to W + mu A V when the '
                                    'first-order potential makes it '
                                    'indefinite.')
        self.configs.add_param('beta_override', config_types.PositiveFloatVal,
                               aliases=['beta'], nullable=True,
                               help='Deflation weight. None uses beta_factor '
                                    'times the Gersgorin bound of (Q, A), '
                                    'recomputed for every eigensolve.')
        self.configs.add_param('beta_factor', config_types.PositiveFloatVal,
                               help='Multiple of the Gersgorin bound used '
                                    'as the default deflation weight.')
        self.configs.add_param('max_irls_iters', config_types.PositiveIntVal,
                               aliases=['maxiter'],
                               help='Maximum reweighting iterations per mode.')
        self.configs.add_param('irls_rel_tol', config_types.PositiveFloatVal,
                               aliases=['tol'],
                               help='Relative change of the discrete '
                                    'objective that stops a mode.')
        self.configs.add_param('epsilon_rel', config_types.PositiveFloatVal,
                               aliases=['eps'],
                               help='Potential clamp relative to max|phi|.')
        self.configs.add_param('seed', config_types.IntVal, nullable=True,
                               help='Seed of random start vectors. None '
                                    'starts from the all-ones vector.')
        self.configs.add_param('area_scheme', config_types.ChoiceVal(*mesh_mod.cell_area_schemes),
                               help='Vertex cell areas of the mass matrix.')
        self.configs.add_param('support_tau', config_types.PositiveFloatVal,
                               aliases=['tau'],
                               help='Relative threshold of support_fraction.')


def _clamped_magnitudes(phi, epsilon_rel):
    absphi = np.abs(phi)
    phimax = np.max(absphi) if len(absphi) else 0.0
    eps = epsilon_rel*phimax if phimax > 0 else epsilon_rel
    return np.maximum(absphi, eps), int(np.sum(absphi < eps))


def potential_from_mode(mesh, a, phi, scheme, epsilon_rel):
    """The potential V(phi) with mu*(A V)_ii*phi_i matching the
        reweighting c_i = w_i/(2 phi_i).

        Inputs:
            mesh: The TriangleMesh (used by the first-order scheme).
            a: Vertex cell areas of the mass matrix.
            phi: The current mode.
            scheme: 'naive', 'zeroth' or 'first'.
            epsilon_rel: Clamp of |phi| relative to max|phi|.

        Output:
            v: n-vector.
    """
    a = linalg_utils.as_diagonal(a)
    phi = l1_utils.as_vertex_function(phi, len(a))
    mags = _clamped_magnitudes(phi, epsilon_rel)[0]
    if scheme == l1_utils.ZEROTH:
        return 1.0/(2.0*mags)
    elif scheme == l1_utils.NAIVE:
        return 1.0/(2.0*a*mags)
    elif scheme == l1_utils.FIRST:
        weights = l1_utils.first_order_weights(mesh, phi).weights
        signs = np.where(phi < 0, -1.0, 1.0)
        return weights/(2.0*a*signs*mags)
    raise errors.UnrecognizedValueError("Unknown L1 scheme '%s'. Known: %s" %
                                        (scheme, ", ".join(irls.schemes)))


def support_fraction(phi, a, tau):
    """Area fraction of the vertices where |phi| > tau*max|phi|.
    """
    if not tau > 0:
        raise errors.InputError("tau must be positive (got %s)." % tau)
    a = linalg_utils.as_diagonal(a)
    phi = l1_utils.as_vertex_function(phi, len(a))
    absphi = np.abs(phi)
    phimax = np.max(absphi)
    if phimax == 0:
        return 0.0
    return float(np.sum(a[absphi > tau*phimax])/np.sum(a))


def discrete_objective(W, mesh, a, phi, mu, scheme):
    """phi^T W phi + mu ||phi|| under 'scheme'.
    """
    return float(phi.dot(W.dot(phi))) + \
                mu*irls.scheme_norm(mesh, phi, scheme, a)


def orthogonality_error(modes, a):
    """Return (max off-diagonal |Phi^T A Phi|, max |diag - 1|).
    """
    a = linalg_utils.as_diagonal(a)
    gram = modes.T.dot(a[:, None]*modes)
    k = gram.shape[0]
    if not k:
        return 0.0, 0.0
    offdiag = np.max(np.abs(gram - np.diag(np.diag(gram)))) if k > 1 else 0.0
    return float(offdiag), float(np.max(np.abs(np.diag(gram)-1.0)))


class ModeSet(object):
    """k modes (columns of 'modes') with ascending eigenvalues.
    """
    def __init__(self, modes, eigenvalues, histories, support_fractions,
                 options_echo, betas=None, areas=None):
        self.modes = np.asarray(modes, dtype=float)
        self.eigenvalues = np.asarray(eigenvalues, dtype=float)
        self.histories = list(histories)
        self.support_fractions = np.asarray(support_fractions, dtype=float)
        self.options = dict(options_echo)
        self.betas = None if betas is None else [float(beta) for beta in betas]
        self.areas = None if areas is None else linalg_utils.as_diagonal(areas)

    def __len__(self):
        return self.modes.shape[1]

    @property
    def k(self):
        return self.modes.shape[1]

    @property
    def iterations(self):
        return [len(hist) for hist in self.histories]

    def orthogonality_error(self):
        return orthogonality_error(self.modes, self.areas)

    def to_dict(self):
        summary = {'eigenvalues': self.eigenvalues,
                   'options': self.options,
                   'histories': [hist.to_list() for hist in self.histories],
                   'support_fractions': self.support_fractions,
                   'irls_iterations': self.iterations,
                   'betas': self.betas,
                   'format_version': config.cfg.format_version}
        if self.areas is not None:
            offdiag, diag = self.orthogonality_error()
            summary['orthogonality'] = {'max_offdiagonal': offdiag,
                                        'max_diagonal_error': diag}
        return summary

    def save(self, outdir, mesh=None, extra=None):
        """Write modes.txt, modes.json and (if 'mesh' is given)
            mode_###.ply files to 'outdir'.

            Inputs:
                outdir: Output directory (created if needed).
                mesh: The TriangleMesh for PLY export.
                extra: Additional entries for modes.json.

            Output:
                fns: List of files written.
        """
        if not os.path.isdir(outdir):
            os.makedirs(outdir)
        fns = []
        txtfn = os.path.join(outdir, 'modes.txt')
        np.savetxt(txtfn, self.modes, fmt='%.17g')
        fns.append(txtfn)
        summary = self.to_dict()
        if extra:
            summary.update(extra)
        jsonfn = os.path.join(outdir, 'modes.json')
        utils.write_json(summary, jsonfn)
        fns.append(jsonfn)
        if mesh is not None:
            for ii in range(self.k):
                plyfn = os.path.join(outdir, 'mode_%03d.ply' % (ii+1))
                mesh_io.write_ply(plyfn, mesh, self.modes[:, ii])
                fns.append(plyfn)
        utils.print_info("Wrote %d files to %s" % (len(fns), outdir), 1)
        return fns


def _potential_matrix(a, V, mu):
    return sp.diags(mu*a*V, format='csr')


def _deflation_weight(Q, a, opts):
    if opts.beta_override is not None:
        return opts.beta_override
    return spectral.default_beta(Q, a, opts.beta_factor)


def _compute_mode(imode, mesh, W, a, prev, opts, spec_opts):
    """Alternate eigensolves and potential updates for mode 'imode'.
        An eigenvector that would increase the discrete objective is
        discarded and the previous one is kept.

        Outputs:
            result: The EigenResult of the accepted mode.
            history: The IRLSHistory of accepted iterates.
            beta: The deflation weight of the accepted eigensolve.
    """
    n = len(a)
    mu, scheme = opts.mu, opts.scheme
    V = np.zeros(n)
    history = irls.IRLSHistory()
    result = beta = phi = obj = None
    converged = False
    for iteration in range(1, opts.max_irls_iters+1):
        Q = W + _potential_matrix(a, V, mu)
        repaired = 0
        if mu > 0 and np.any(V < 0) and opts.repair != irls.NOREPAIR and \
                not linalg_utils.is_positive_definite(Q):
            Q, repaired = irls.repair_matrix(Q, opts.repair)
        trial_beta = _deflation_weight(Q, a, opts)
        U = spectral.deflation_factor(a, prev, trial_beta)
        trial = spectral.smallest_generalized_eigpair(Q, U, a, spec_opts,
                                                      v0=phi, prev_modes=prev)
        objnew = discrete_objective(W, mesh, a, trial.eigenvector, mu, scheme)
        if obj is not None and objnew > obj + 1e-10*max(1.0, abs(obj)):
            utils.print_info("Mode %d, iteration %d: objective would increase "
                             "(%.17g -> %.17g); keeping the previous mode" %
                             (imode+1, iteration, obj, objnew), 2)
            converged = True
            break
        result, beta, phi = trial, trial_beta, trial.eigenvector
        clamped = _clamped_magnitudes(phi, opts.epsilon_rel)[1]
        history.append(iteration, objnew, result.eigenvalue, repaired, clamped)
        utils.print_info("Mode %d, iteration %d: objective %.17g, lambda %.17g" %
                         (imode+1, iteration, objnew, result.eigenvalue), 3)
        if mu == 0:
            # V does not enter Q
            converged = True
        elif obj is not None:
            converged = abs(objnew-obj) <= opts.irls_rel_tol * \
                            max(abs(objnew), np.finfo(float).tiny)
        obj = objnew
        if converged:
            break
        V = potential_from_mode(mesh, a, phi, scheme, opts.epsilon_rel)
    if not converged:
        warnings.warn("Mode %d did not converge within %d reweighting "
                      "iterations." % (imode+1, opts.max_irls_iters),
                      errors.LoggedManifoldL1Warning)
    if not history.is_monotone():
        utils.check_failed("Discrete objective of mode %d was not monotone." %
                           (imode+1))
    return result, history, beta


def compressed_modes(mesh, opts=None, spec_opts=None, W=None, A=None):
    """Compute compressed manifold modes of 'mesh'.

        Inputs:
            mesh: The TriangleMesh.
            opts: CMMOptions. (Default: configured defaults)
            spec_opts: SpectralOptions of the inner eigensolves.
                (Default: configured defaults, with the seed of 'opts')
            W: Precomputed stiffness matrix. (Default: cotangent
                stiffness of 'mesh')
            A: Precomputed mass matrix. (Default: lumped mass of
                'mesh' under opts.area_scheme)

        Output:
            modeset: A ModeSet with modes sorted by eigenvalue.
    """
    if opts is None:
        opts = CMMOptions()
    if spec_opts is None:
        spec_opts = spectral.SpectralOptions(seed=opts.seed)
    if W is None:
        W = operators.cotangent_stiffness(mesh)
    if A is None:
        A = operators.lumped_mass(mesh, opts.area_scheme)
    W = sp.csr_matrix(W)
    a = linalg_utils.as_diagonal(A)
    n = len(a)
    if opts.k > n:
        raise errors.InputError("Cannot compute %d modes on a mesh with %d "
                                "vertices." % (opts.k, n))
    utils.print_info("Computing %d modes (mu=%g, scheme=%s) on %d vertices" %
                     (opts.k, opts.mu, opts.scheme, n), 1)

    modes, evals, histories, betas = [], [], [], []
    for imode in utils.show_progress(range(opts.k)):
        result, history, beta = _compute_mode(imode, mesh, W, a, modes, opts,
                                              spec_opts)
        modes.append(result.eigenvector)
        evals.append(result.eigenvalue)
        histories.append(history)
        betas.append(beta)
        utils.print_info("Mode %d: lambda=%.17g after %d iterations (beta=%g)" %
                         (imode+1, result.eigenvalue, len(history), beta), 2)

    order = np.argsort(evals, kind='stable')
    modes = np.column_stack(modes)[:, order]
    evals = np.asarray(evals)[order]
    histories = [histories[ii] for ii in order]
    betas = [betas[ii] for ii in order]
    fractions = [support_fraction(modes[:, ii], a, opts.support_tau)
                 for ii in range(opts.k)]
    offdiag, diagerr = orthogonality_error(modes, a)
    if offdiag > config.cfg.orthogonality_tol:
        raise errors.OrthogonalityLoss("Modes lost A-orthogonality (max "
                                       "off-diagonal %g > %g). Increase beta." %
                                       (offdiag, config.cfg.orthogonality_tol))
    echo = opts.to_dict()
    echo['spectral'] = spec_opts.to_dict()
    return ModeSet(modes, evals, histories, fractions, echo, betas=betas,
                   areas=a)


def mode_correlations(modes, other, a):
    """|<phi_i, psi_j>_A| / (||phi_i||_A ||psi_j||_A) for all pairs of
        columns of 'modes' and 'other' (sampled on the same vertices).
    """
    a = linalg_utils.as_diagonal(a)
    modes = np.asarray(modes, dtype=float)
    other = np.asarray(other, dtype=float)
    inner = modes.T.dot(a[:, None]*other)
    norms1 = np.sqrt(np.sum(a[:, None]*modes**2, axis=0))
    norms2 = np.sqrt(np.sum(a[:, None]*other**2, axis=0))
    return np.abs(inner)/np.outer(norms1, norms2)


def match_modes(modes, eigenvalues, other, other_eigenvalues, a,
                cluster_rel=0.05):
    """Greedily match each mode of 'modes' to the most correlated
        unused mode of 'other' among those whose eigenvalue is
        within 'cluster_rel' (relative). Eigenvalue multiplicity
        makes comparison by index meaningless.

        Inputs:
            modes: (n, k) modes (e.g. transferred to a finer mesh).
            eigenvalues: Their k eigenvalues.
            other: (n, k2) modes to match against.
            other_eigenvalues: Their k2 eigenvalues.
            a: Vertex areas of the inner product.
            cluster_rel: Relative eigenvalue window. If no unused
                mode falls in the window all unused modes are
                candidates.

        Outputs:
            matches: List of (index into 'other', correlation), one
                per column of 'modes'.
    """
    corrs = mode_correlations(modes, other, a)
    other_eigenvalues = np.asarray(other_eigenvalues, dtype=float)
    unused = np.ones(len(other_eigenvalues), dtype=bool)
    matches = []
    for ii, lam in enumerate(eigenvalues):
        scale = np.maximum(abs(lam), np.abs(other_eigenvalues))
        window = np.abs(other_eigenvalues-lam) <= cluster_rel*scale
        candidates = np.flatnonzero(window & unused)
        if not len(candidates):
            candidates = np.flatnonzero(unused)
        if not len(candidates):
            matches.append((None, 0.0))
            continue
        best = candidates[np.argmax(corrs[ii, candidates])]
        unused[best] = False
        matches.append((int(best), float(corrs[ii, best])))
    return matches
