"""
Command-line front end.

    l1_modes.py norm         Evaluate the L1 norm of a vertex function.
    l1_modes.py modes        Compute compressed manifold modes.
    l1_modes.py convergence  Compare norm discretizations under refinement.
    l1_modes.py bench        Time the eigensolver configurations.
    l1_modes.py export-ply   Write a vertex function as a PLY quality field.
    l1_modes.py matrices     Write the stiffness and mass matrices.
"""
import argparse
import os
import sys
import time

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from threadpoolctl import threadpool_limits

from manifold_l1 import cmm
from manifold_l1 import config
from manifold_l1 import errors
from manifold_l1 import irls
from manifold_l1 import l1_utils
from manifold_l1 import log
from manifold_l1 import mesh as mesh_mod
from manifold_l1 import mesh_io
from manifold_l1 import norms
from manifold_l1 import operators
from manifold_l1 import spectral
from manifold_l1 import utils


CONVERGENCE_SCHEMES = [l1_utils.NAIVE, l1_utils.ZEROTH, l1_utils.FIRST]
SCHEME_COLOURS = {l1_utils.NAIVE: 'green',
                  l1_utils.ZEROTH: 'red',
                  l1_utils.FIRST: 'blue'}

# Argument destinations that only steer console output
_NOT_RESOLVED = ('func', 'level', 'loglevel', 'colour', 'excessive_verbosity',
                 'help_params')


def _resolved_config(args, **extra):
    resolved = dict((key, val) for key, val in vars(args).items()
                    if key not in _NOT_RESOLVED)
    resolved['dense_limit'] = config.cfg.dense_limit
    resolved['pivot_rtol'] = config.cfg.pivot_rtol
    resolved.update(extra)
    return resolved


def _emit(report, outfn=None):
    if outfn is None:
        sys.stdout.write(utils.to_json(report) + "\n")
    else:
        utils.write_json(report, outfn)
        utils.print_info("Wrote %s" % outfn, 1)


def _load_mesh(args):
    return mesh_io.load_mesh(args.mesh, fmt=args.format)


def cmd_norm(args):
    mesh = _load_mesh(args)
    f = mesh_io.load_function(args.function, mesh.n_vertices)
    kwargs = {}
    if args.scheme == l1_utils.ZEROTH and args.area_scheme is not None:
        kwargs['area_scheme'] = args.area_scheme
    if args.scheme == l1_utils.ORACLE:
        if args.quad_points is not None:
            kwargs['quad_points'] = args.quad_points
        if args.seed is not None:
            kwargs['seed'] = args.seed
    norm = norms.load_norm(args.scheme, **kwargs)
    value = norm(mesh, f)
    report = utils.report_header('norm', _resolved_config(args,
                                        norm=norm.to_dict()))
    report.update({'scheme': args.scheme,
                   'value': value,
                   'n_vertices': mesh.n_vertices})
    _emit(report, args.outfn)


def _cmm_options(args, mesh):
    kwargs = {}
    for key in ('k', 'mu', 'scheme', 'repair', 'beta_override', 'beta_factor',
                'max_irls_iters', 'irls_rel_tol', 'epsilon_rel', 'seed',
                'area_scheme', 'support_tau'):
        val = getattr(args, key, None)
        if val is not None:
            kwargs[key] = val
    opts = cmm.CMMOptions(**kwargs)
    if args.area_normalized_mu:
        opts = opts.replace(mu=opts.mu*mesh.total_area)
        utils.print_info("Area-normalized mu: %g" % opts.mu, 2)
    spec_opts = spectral.SpectralOptions(args.spectral, seed=opts.seed)
    return opts, spec_opts


def cmd_modes(args):
    mesh = _load_mesh(args)
    opts, spec_opts = _cmm_options(args, mesh)
    modeset = cmm.compressed_modes(mesh, opts, spec_opts)
    header = utils.report_header('modes', _resolved_config(args,
                                        cmm=opts.to_dict(),
                                        spectral=spec_opts.to_dict()))
    modeset.save(args.outdir, mesh=mesh, extra=header)
    for ii in range(modeset.k):
        utils.print_info("Mode %d: lambda=%.17g, support fraction=%.4f, "
                         "%d iterations" %
                         (ii+1, modeset.eigenvalues[ii],
                          modeset.support_fractions[ii],
                          modeset.iterations[ii]), 1)


def harmonic_basis(mesh, num_eigs, area_scheme=None):
    """The 'num_eigs' smallest eigenfunctions of W phi = lambda A phi.
        The dense solver is used up to the 'dense_limit'
        configuration, shift-inverted ARPACK beyond it.

        Inputs:
            mesh: The TriangleMesh.
            num_eigs: The number of eigenfunctions (capped at n-1 on
                the sparse path, n on the dense path).
            area_scheme: Vertex cell areas of the mass matrix.

        Outputs:
            evals: Ascending eigenvalues.
            evecs: (n, num) A-orthonormal eigenfunctions.
    """
    W, A = operators.assemble(mesh, area_scheme)
    a = A.diagonal()
    n = mesh.n_vertices
    if n <= config.cfg.dense_limit:
        evals, evecs = spectral.dense_generalized_eig(W, a)
        num = min(num_eigs, n)
        return evals[:num], evecs[:, :num]
    num = min(num_eigs, n-1)
    # W is singular (constants); shift just below zero
    sigma = -1e-8*float(np.mean(W.diagonal()/a))
    evals, evecs = spla.eigsh(sp.csc_matrix(W), k=num, M=sp.csc_matrix(A),
                              sigma=sigma, which='LM', v0=np.ones(n))
    order = np.argsort(evals, kind='stable')
    evals, evecs = evals[order], evecs[:, order]
    for ii in range(num):
        evecs[:, ii] = spectral.fix_sign(evecs[:, ii])
    return evals, evecs


def convergence_study(mesh, levels, num_eigs, function='eigen',
                      area_scheme=None, sphere=False, oversample=1,
                      basis='level'):
    """Mean relative error of each norm scheme on levels 0..levels
        of a midpoint-refinement hierarchy. The reference is the
        first-order norm on level levels+oversample. The hierarchy
        is scaled so that the reference surface has unit area.

        Inputs:
            mesh: The coarsest TriangleMesh (level 0).
            levels: The finest evaluated refinement level.
            num_eigs: Number of harmonic eigenfunctions.
            function: 'eigen' (harmonic eigenfunctions) or
                'constant' (the constant function 1).
            area_scheme: Vertex cell areas of the zeroth scheme and
                the mass matrix.
            sphere: Project refined vertices onto the origin-centred
                sphere of the mesh's mean vertex radius.
            oversample: Refinements of the reference level beyond
                the finest evaluated level.
            basis: 'level' computes eigenfunctions on every level and
                interpolates them to the reference level. 'reference'
                computes them once on the reference level and samples
                them at the vertices of each level (subdivision keeps
                the coarse vertices first).

        Output:
            rows: One dictionary per evaluated level.
    """
    if levels < 1:
        raise errors.InputError("At least one refinement level is "
                                "required (got %d)." % levels)
    if oversample < 1:
        raise errors.InputError("The reference level must be finer than the "
                                "evaluated levels (oversample=%d)." % oversample)
    radius = None
    if sphere:
        radius = float(np.mean(np.linalg.norm(mesh.vertices, axis=1)))
    hierarchy = [mesh]
    maps = []
    for level in range(levels+oversample):
        fine, interp = mesh_mod.midpoint_subdivide(hierarchy[-1], 1,
                                                   project_radius=radius)
        hierarchy.append(fine)
        maps.append(interp)
    scale = 1.0/np.sqrt(hierarchy[-1].total_area)
    hierarchy = [level_mesh.scaled(scale) for level_mesh in hierarchy]
    reference_mesh = hierarchy[-1]
    utils.print_info("Reference level %d: %d vertices" %
                     (levels+oversample, reference_mesh.n_vertices), 1)
    if function == 'constant':
        reference_funcs = np.ones((reference_mesh.n_vertices, 1))
    elif basis == 'reference':
        reference_funcs = harmonic_basis(reference_mesh, num_eigs, area_scheme)[1]
    rows = []
    for level in range(levels+1):
        current = hierarchy[level]
        if function == 'constant' or basis == 'reference':
            fine_funcs = reference_funcs
            funcs = reference_funcs[:current.n_vertices]
        else:
            toreference = maps[level]
            for interp in maps[level+1:]:
                toreference = toreference.compose(interp)
            funcs = harmonic_basis(current, num_eigs, area_scheme)[1]
            fine_funcs = toreference.transfer(funcs)
        areas = current.cell_areas(area_scheme)
        errs = dict((scheme, []) for scheme in CONVERGENCE_SCHEMES)
        for ii in range(funcs.shape[1]):
            f = funcs[:, ii]
            reference = l1_utils.norm_first(reference_mesh, fine_funcs[:, ii])
            values = {l1_utils.NAIVE: l1_utils.norm_naive(f),
                      l1_utils.ZEROTH: l1_utils.norm_zeroth(f, areas),
                      l1_utils.FIRST: l1_utils.norm_first(current, f)}
            for scheme in CONVERGENCE_SCHEMES:
                errs[scheme].append(abs(values[scheme]-reference)/reference)
        row = {'level': level,
               'n_vertices': current.n_vertices,
               'average_edge_length': current.average_edge_length,
               'num_functions': funcs.shape[1],
               'errors': dict((scheme, float(np.mean(errs[scheme])))
                              for scheme in CONVERGENCE_SCHEMES)}
        utils.print_info("Level %d (%d vertices, h=%g): %s" %
                         (level, current.n_vertices, row['average_edge_length'],
                          ", ".join("%s=%.3e" % (scheme, row['errors'][scheme])
                                    for scheme in CONVERGENCE_SCHEMES)), 1)
        rows.append(row)
    return rows


def _write_convergence_csv(rows, fn):
    with open(fn, 'w', encoding='utf-8') as ff:
        ff.write("level,n_vertices,average_edge_length,%s\n" %
                 ",".join(CONVERGENCE_SCHEMES))
        for row in rows:
            ff.write("%d,%d,%.17g,%s\n" %
                     (row['level'], row['n_vertices'], row['average_edge_length'],
                      ",".join("%.17g" % row['errors'][scheme]
                               for scheme in CONVERGENCE_SCHEMES)))


def plot_convergence(rows, fn):
    import matplotlib
    matplotlib.use('Agg')
    import matplotlib.pyplot as plt

    fig = plt.figure(figsize=(6, 4.5))
    ax = fig.add_subplot(1, 1, 1)
    edgelens = [row['average_edge_length'] for row in rows]
    for scheme in CONVERGENCE_SCHEMES:
        errs = [max(row['errors'][scheme], np.finfo(float).tiny) for row in rows]
        ax.loglog(edgelens, errs, marker='o', c=SCHEME_COLOURS[scheme],
                  label=scheme)
    ax.set_xlabel("Average edge length")
    ax.set_ylabel("Mean relative L1 error")
    ax.invert_xaxis()
    ax.legend(loc='best')
    fig.savefig(fn)
    plt.close(fig)


def cmd_convergence(args):
    mesh = _load_mesh(args)
    rows = convergence_study(mesh, args.levels, args.num_eigs,
                             function=args.function,
                             area_scheme=args.area_scheme, sphere=args.sphere,
                             oversample=args.oversample, basis=args.basis)
    if args.function == 'constant':
        described = "the constant function"
    elif args.basis == 'reference':
        described = "reference-level eigenfunctions sampled at each level"
    else:
        described = "each level's eigenfunctions interpolated to it"
    report = utils.report_header('convergence', _resolved_config(args))
    report.update({'reference': "first-order norm on refinement level %d "
                                "(unit area) of %s" %
                                (args.levels+args.oversample, described),
                   'levels': rows})
    _emit(report, args.outfn)
    if args.csvfn is not None:
        _write_convergence_csv(rows, args.csvfn)
    if args.plotfn is not None:
        plot_convergence(rows, args.plotfn)


def time_modes(mesh, k, mu, solver, repeats, cmmstr=None):
    """Time 'repeats' runs of compressed_modes with the given
        inner solver.

        Output:
            cell: Dictionary with 'mean', 'std' and 'samples' (seconds)
                or 'error' if the solver refused the problem.
    """
    opts = cmm.CMMOptions(cmmstr, k=k, mu=mu)
    spec_opts = spectral.SpectralOptions(solver=solver, seed=opts.seed)
    samples = []
    try:
        for rep in range(repeats):
            start = time.perf_counter()
            cmm.compressed_modes(mesh, opts, spec_opts)
            samples.append(time.perf_counter()-start)
    except errors.SizeLimitExceeded as exc:
        return {'error': exc.get_message()}
    return {'mean': float(np.mean(samples)),
            'std': float(np.std(samples)),
            'samples': samples}


def cmd_bench(args):
    cells = []
    for meshfn in args.meshes:
        mesh = mesh_io.load_mesh(meshfn, fmt=args.format)
        for k in args.ks:
            for solver in args.solvers:
                utils.print_info("Timing %s: n=%d, k=%d, solver=%s" %
                                 (meshfn, mesh.n_vertices, k, solver), 1)
                cell = time_modes(mesh, k, args.mu, solver, args.repeats,
                                  args.cmm)
                cell.update({'mesh': meshfn, 'n_vertices': mesh.n_vertices,
                             'k': k, 'solver': solver})
                cells.append(cell)
    report = utils.report_header('bench', _resolved_config(args))
    report['cells'] = cells
    _emit(report, args.outfn)


def cmd_export_ply(args):
    mesh = _load_mesh(args)
    f = mesh_io.load_function(args.function, mesh.n_vertices)
    mesh_io.write_ply(args.outfn, mesh, f)
    utils.print_info("Wrote %s" % args.outfn, 1)


def cmd_matrices(args):
    mesh = _load_mesh(args)
    W, A = operators.assemble(mesh, args.area_scheme)
    if not os.path.isdir(args.outdir):
        os.makedirs(args.outdir)
    for name, matrix in (('stiffness', W), ('mass', A)):
        fn = os.path.join(args.outdir, "%s.txt" % name)
        operators.write_triplets(fn, matrix)
        utils.print_info("Wrote %s" % fn, 1)


def _add_mesh_args(parser):
    parser.add_argument('mesh', help="The input mesh (OFF or OBJ).")
    parser.add_argument('--format', dest='format', default='auto',
                        choices=['auto']+mesh_io.mesh_formats,
                        help="The mesh format. (Default: from the file "
                             "extension)")


def _add_area_scheme(parser):
    parser.add_argument('--area-scheme', dest='area_scheme', default=None,
                        choices=mesh_mod.cell_area_schemes,
                        help="Vertex cell-area scheme. (Default: %s)" %
                             config.cfg.cell_area_scheme)


class ShowParamsAction(argparse.Action):
    """Print the parameters of the IRLS, CMM and spectral options,
        then exit.
    """
    def __call__(self, parser, namespace, values, option_string):
        for optcls in (irls.IRLSOptions, cmm.CMMOptions,
                       spectral.SpectralOptions):
            print(optcls().get_help(full=True))
        parser.exit()


def build_parser():
    parser = utils.DefaultArguments(prog='l1_modes.py',
                                    description="Discrete L1 norms and "
                                                "compressed manifold modes "
                                                "of triangle meshes.")
    parser.add_argument('--threads', dest='threads', type=int,
                        default=config.nthreads,
                        help="Maximum number of threads used by BLAS and "
                             "LAPACK. (Default: %d, or the "
                             "MANIFOLD_L1_THREADS environment variable)" %
                             config.nthreads)
    parser.add_argument('--dense-limit', dest='dense_limit', type=int,
                        action=utils.DefaultArguments.OverrideConfigAction,
                        help="Largest problem handed to the dense solvers. "
                             "(Default: %d)" % config.cfg.dense_limit)
    parser.add_argument('--log-file', dest='logfn', default=None,
                        help="Write log entries to this file.")
    parser.add_argument('--help-params', dest='help_params', nargs=0,
                        action=ShowParamsAction,
                        help="List the parameters of the IRLS, CMM and "
                             "spectral options, with their defaults, and exit.")
    parser.add_standard_group()
    subparsers = parser.add_subparsers(dest='command', metavar='COMMAND')
    subparsers.required = True

    normparser = subparsers.add_parser('norm', help="Evaluate the L1 norm "
                                                    "of a vertex function.")
    _add_mesh_args(normparser)
    normparser.add_argument('function', help="Column file of vertex values.")
    normparser.add_argument('--scheme', dest='scheme', default=l1_utils.FIRST,
                            choices=norms.registered_norms,
                            help="The norm discretization. (Default: first)")
    _add_area_scheme(normparser)
    normparser.add_argument('--quad-points', dest='quad_points', type=int,
                            default=None,
                            help="Quadrature points per triangle of the "
                                 "oracle scheme.")
    normparser.add_argument('--seed', dest='seed', type=int, default=None,
                            help="Scrambling seed of the oracle quadrature.")
    normparser.add_argument('-o', '--outfile', dest='outfn', default=None,
                            help="Write the JSON report here instead of "
                                 "stdout.")
    normparser.set_defaults(func=cmd_norm)

    modesparser = subparsers.add_parser('modes', help="Compute compressed "
                                                      "manifold modes.")
    _add_mesh_args(modesparser)
    modesparser.add_argument('-k', dest='k', type=int, default=None,
                             help="Number of modes.")
    modesparser.add_argument('--mu', dest='mu', type=float, default=None,
                             help="Sparsity weight.")
    modesparser.add_argument('--area-normalized-mu', dest='area_normalized_mu',
                             action='store_true', default=False,
                             help="Multiply --mu by the total mesh area.")
    modesparser.add_argument('--scheme', dest='scheme', default=None,
                             choices=irls.schemes,
                             help="The L1 discretization.")
    modesparser.add_argument('--repair', dest='repair', default=None,
                             choices=irls.repair_methods,
                             help="Positive-definiteness repair.")
    modesparser.add_argument('--seed', dest='seed', type=int, default=None,
                             help="Seed of random start vectors.")
    modesparser.add_argument('--beta', dest='beta_override', type=float,
                             default=None, help="Deflation weight.")
    modesparser.add_argument('--beta-factor', dest='beta_factor', type=float,
                             default=None,
                             help="Default deflation weight as a multiple "
                                  "of the Gersgorin bound.")
    modesparser.add_argument('--max-irls-iters', dest='max_irls_iters',
                             type=int, default=None,
                             help="Reweighting iterations per mode.")
    modesparser.add_argument('--irls-rel-tol', dest='irls_rel_tol',
                             type=float, default=None,
                             help="Relative objective change ending a mode.")
    modesparser.add_argument('--epsilon-rel', dest='epsilon_rel', type=float,
                             default=None, help="Relative clamp of |phi|.")
    modesparser.add_argument('--support-tau', dest='support_tau', type=float,
                             default=None,
                             help="Threshold of the reported support "
                                  "fractions.")
    _add_area_scheme(modesparser)
    modesparser.add_argument('--spectral', dest='spectral', default=None,
                             help="Eigensolver parameters "
                                  "(<param>=<val>[,<param>=<val>...]).")
    modesparser.add_argument('-o', '--outdir', dest='outdir', required=True,
                             help="Output directory.")
    modesparser.set_defaults(func=cmd_modes)

    convparser = subparsers.add_parser('convergence', help="Compare the norm "
                                                           "discretizations "
                                                           "under refinement.")
    _add_mesh_args(convparser)
    convparser.add_argument('--levels', dest='levels', type=int, default=3,
                            help="Finest evaluated refinement level. "
                                 "(Default: 3)")
    convparser.add_argument('--num-eigs', dest='num_eigs', type=int,
                            default=200,
                            help="Eigenfunctions per level. (Default: 200)")
    convparser.add_argument('--function', dest='function', default='eigen',
                            choices=['eigen', 'constant'],
                            help="Test functions. (Default: eigen)")
    convparser.add_argument('--sphere', dest='sphere', action='store_true',
                            default=False,
                            help="Project refined vertices onto the sphere "
                                 "through the mesh's vertices.")
    convparser.add_argument('--oversample', dest='oversample', type=int,
                            default=1,
                            help="Refinements of the reference level beyond "
                                 "the finest evaluated level. (Default: 1)")
    convparser.add_argument('--basis', dest='basis', default='level',
                            choices=['level', 'reference'],
                            help="Eigenfunctions of every level, or of the "
                                 "reference level sampled at coarser "
                                 "vertices. (Default: level)")
    _add_area_scheme(convparser)
    convparser.add_argument('-o', '--outfile', dest='outfn', default=None,
                            help="JSON report. (Default: stdout)")
    convparser.add_argument('--csv', dest='csvfn', default=None,
                            help="Also write the table as CSV.")
    convparser.add_argument('--plot', dest='plotfn', default=None,
                            help="Plot error against average edge length.")
    convparser.set_defaults(func=cmd_convergence)

    benchparser = subparsers.add_parser('bench', help="Time the eigensolver "
                                                      "configurations.")
    benchparser.add_argument('meshes', nargs='+', help="Input meshes.")
    benchparser.add_argument('--format', dest='format', default='auto',
                             choices=['auto']+mesh_io.mesh_formats,
                             help="The mesh format. (Default: auto)")
    benchparser.add_argument('-k', dest='ks', type=int, nargs='+', default=[8],
                             help="Numbers of modes. (Default: 8)")
    benchparser.add_argument('--mu', dest='mu', type=float, default=0.0,
                             help="Sparsity weight. (Default: 0)")
    benchparser.add_argument('--repeats', dest='repeats', type=int, default=10,
                             help="Timing samples per cell. (Default: 10)")
    benchparser.add_argument('--solvers', dest='solvers', nargs='+',
                             default=spectral.solvers,
                             choices=spectral.solvers,
                             help="Inner solvers to compare: Woodbury "
                                  "updates, refactorization of Q + U U^T "
                                  "(Woodbury off) and the dense solver. "
                                  "(Default: all)")
    benchparser.add_argument('--cmm', dest='cmm', default=None,
                             help="Further mode parameters "
                                  "(<param>=<val>[,<param>=<val>...]).")
    benchparser.add_argument('-o', '--outfile', dest='outfn', default=None,
                             help="JSON report. (Default: stdout)")
    benchparser.set_defaults(func=cmd_bench)

    plyparser = subparsers.add_parser('export-ply', help="Write a vertex "
                                                         "function to PLY.")
    _add_mesh_args(plyparser)
    plyparser.add_argument('function', help="Column file of vertex values.")
    plyparser.add_argument('-o', '--outfile', dest='outfn', required=True,
                           help="Output PLY file.")
    plyparser.set_defaults(func=cmd_export_ply)

    matparser = subparsers.add_parser('matrices', help="Write W and A as "
                                                       "triplet files.")
    _add_mesh_args(matparser)
    _add_area_scheme(matparser)
    matparser.add_argument('-o', '--outdir', dest='outdir', required=True,
                           help="Output directory.")
    matparser.set_defaults(func=cmd_matrices)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.logfn is not None:
        log.setup_logger(args.logfn, args.command)
        utils.log_message("Command line: %s" %
                          " ".join(sys.argv[1:] if argv is None else argv))
    utils.reset_failed_checks()
    try:
        with threadpool_limits(limits=args.threads):
            args.func(args)
    except errors.ManifoldL1Error as exc:
        sys.stderr.write("%s: error: %s\n" % (parser.prog, exc.get_message()))
        return 1
    except OSError as exc:
        log.log("I/O error: %s" % exc, 'error')
        sys.stderr.write("%s: error: %s\n" % (parser.prog, exc))
        return 1
    finally:
        if args.logfn is not None:
            log.disconnect_logger()
    if utils.failed_checks:
        sys.stderr.write("%s: error: %d internal check(s) failed; the first "
                         "was: %s\n" % (parser.prog, len(utils.failed_checks),
                                        utils.failed_checks[0]))
        return 1
    return 0
