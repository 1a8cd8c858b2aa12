import json

import numpy as np
import pytest
import scipy.linalg
import scipy.sparse as sp

from manifold_l1 import errors
from manifold_l1 import irls
from manifold_l1 import l1_utils
from manifold_l1 import linalg_utils
from manifold_l1 import mesh as mesh_mod
from manifold_l1 import operators
from manifold_l1 import utils

from conftest import make_grid


def _is_cholesky_pd(B):
    dense = B.toarray() if sp.issparse(B) else np.asarray(B)
    try:
        np.linalg.cholesky(dense)
    except np.linalg.LinAlgError:
        return False
    return True


def _soft_threshold(mu, scheme='zeroth'):
    # (f-1)^2 = f^2 - 2f + 1 on a single vertex of unit area
    objective = irls.QuadraticObjective([[1.0]], [-1.0], 1.0)
    opts = irls.IRLSOptions(scheme=scheme, mu=mu, max_outer_iters=10000,
                            objective_rel_tol=1e-15)
    return irls.irls_minimize(None, objective, opts, areas=[1.0])


@pytest.mark.parametrize('mu', [0.1, 0.5, 1.0, 1.9])
def test_soft_threshold(mu):
    f, history = _soft_threshold(mu)
    assert f[0] == pytest.approx(1 - mu/2.0, abs=1e-6)
    assert history.is_monotone()


@pytest.mark.parametrize('mu', [2.0, 2.5, 4.0])
def test_soft_threshold_to_zero(mu):
    f, history = _soft_threshold(mu)
    assert abs(f[0]) <= 1e-6
    assert history.is_monotone()
    assert sum(rec['snapped'] for rec in history) >= 1


def test_soft_threshold_naive_scheme():
    f, history = _soft_threshold(1.0, scheme='naive')
    assert f[0] == pytest.approx(0.5, abs=1e-6)


def test_mu_zero_single_iteration(rng):
    Q = sp.diags(rng.uniform(1, 2, 20))
    q = rng.standard_normal(20)
    objective = irls.QuadraticObjective(Q, q)
    opts = irls.IRLSOptions(scheme='naive', mu=0)
    f, history = irls.irls_minimize(None, objective, opts)
    np.testing.assert_allclose(f, -q/Q.diagonal(), rtol=1e-12)
    assert 1 <= len(history) <= 2


def _random_problem(mesh, rng):
    W, A = operators.assemble(mesh)
    Q = W + 0.5*A
    q = A.dot(rng.standard_normal(mesh.n_vertices))
    return irls.QuadraticObjective(Q, q)


def _assert_descent(history):
    objs = history.objectives
    assert np.all(np.isfinite(objs))
    steps = np.diff(objs)
    assert np.all(steps <= 1e-10*np.maximum(1.0, np.abs(objs[:-1])))


def test_zeroth_scheme_descent(rng):
    mesh = make_grid(10, 10, jitter=0.2, seed=11)
    for trial in range(20):
        objective = _random_problem(mesh, rng)
        opts = irls.IRLSOptions(scheme='zeroth', mu=0.05)
        f, history = irls.irls_minimize(mesh, objective, opts)
        _assert_descent(history)
        assert history.num_iterations >= 1
        # c_i >= 0 keeps Q + mu C positive definite
        assert sum(rec['repaired'] for rec in history) == 0
    assert not utils.failed_checks


@pytest.mark.parametrize('repair', ['gersgorin', 'psdproject'])
def test_first_scheme_descent(repair):
    mesh = make_grid(10, 10, jitter=0.2, seed=11)
    repairs = 0
    for seed in range(10):
        objective = _random_problem(mesh, np.random.RandomState(seed))
        opts = irls.IRLSOptions(scheme='first', mu=0.05, repair=repair,
                                max_outer_iters=50)
        f, history = irls.irls_minimize(mesh, objective, opts)
        _assert_descent(history)
        assert history.is_monotone()
        objs = history.objectives
        assert np.max(np.abs(objs)) < 1e3
        expected = objective(f) + 0.05*l1_utils.norm_first(mesh, f)
        assert objs[-1] == pytest.approx(expected, rel=1e-12)
        repairs += sum(rec['repaired'] for rec in history)
    assert repairs > 0
    assert not utils.failed_checks


def test_damped_step_accepts_shorter_step():
    B = sp.csr_matrix([[1.0]])
    factor = linalg_utils.SpdFactor(B)
    f = np.array([1.0])

    def total(x):
        return abs(x[0]-1.5)

    x, objx, damping = irls.damped_step(B, factor, np.array([-3.0]), f,
                                        total, total(f), 10)
    # tau = 1 gives (3 + 1)/2
    assert x[0] == pytest.approx(2.0)
    assert objx == pytest.approx(0.5)
    assert damping == 1


def test_damped_step_keeps_iterate_without_descent():
    B = sp.identity(3, format='csr')
    factor = linalg_utils.SpdFactor(B)
    f = np.zeros(3)

    def total(x):
        return float(np.dot(x, x))

    x, objx, damping = irls.damped_step(B, factor, np.ones(3), f, total,
                                        0.0, 5)
    assert x is f
    assert objx == 0.0
    assert damping == 5


def test_snap_to_zero():
    objective = irls.QuadraticObjective(np.eye(2), [-0.5, -3.0])
    snapped, count = irls.snap_to_zero(objective, np.array([0.5, 3.0]), 1.0,
                                       np.ones(2))
    np.testing.assert_array_equal(snapped, [0.0, 3.0])
    assert count == 1
    x = np.array([0.5, 3.0])
    unchanged, count = irls.snap_to_zero(objective, x, 0.5, np.ones(2))
    assert unchanged is x
    assert count == 0


def test_weight_bounds(small_grid, rng):
    bounds = irls.weight_bounds(small_grid, 'first', small_grid.n_vertices)
    for trial in range(5):
        f = rng.standard_normal(small_grid.n_vertices)
        weights = l1_utils.first_order_weights(small_grid, f).weights
        assert np.all(np.abs(weights) <= bounds*(1+1e-12))
    np.testing.assert_array_equal(irls.weight_bounds(None, 'naive', 3), 1.0)


def test_first_scheme_needs_mesh():
    objective = irls.QuadraticObjective(np.eye(3))
    with pytest.raises(errors.InputError):
        irls.irls_minimize(None, objective, irls.IRLSOptions(scheme='first'))


def test_dimension_mismatch(unit_triangle):
    objective = irls.QuadraticObjective(np.eye(4))
    with pytest.raises(errors.DimensionMismatch):
        irls.irls_minimize(unit_triangle, objective)


def test_reweight_zeroth():
    w = l1_utils.zeroth_weights([0.5, -0.25], [2.0, 2.0])
    C = irls.reweight(w, [0.5, -0.25], 1e-8)
    np.testing.assert_allclose(C.diagonal(), [2.0, 4.0])


def test_reweight_first_order():
    mesh = mesh_mod.TriangleMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]],
                                 [[0, 1, 2]])
    area = mesh.face_areas[0]
    f = [1.0, -1.0, 0.0]
    w = l1_utils.first_order_weights(mesh, f)
    C, clamped = irls.reweight(w, f, 1e-8, return_clamped=True)
    np.testing.assert_allclose(C.diagonal(), [area/12, area/12, 0.0], atol=1e-6)
    assert clamped == 1


def test_reweight_clamp():
    C = irls.reweight([1.0, 1.0], [1.0, 0.0], 1e-8)
    np.testing.assert_allclose(C.diagonal(), [0.5, 5e7])


def test_gersgorin_dominant_matrix_unchanged():
    B = sp.csr_matrix([[2.0, 1.0], [1.0, 2.0]])
    repaired, count = irls.gersgorin_repair(B)
    assert count == 0
    np.testing.assert_array_equal(repaired.toarray(), B.toarray())


def test_gersgorin_two_by_two():
    repaired, count = irls.gersgorin_repair(sp.csr_matrix([[1.0, 2.0], [2.0, 1.0]]))
    assert count == 2
    np.testing.assert_allclose(repaired.diagonal(), 2.0, rtol=1e-11)
    assert np.all(repaired.diagonal() > 2.0)
    assert _is_cholesky_pd(repaired)


def test_gersgorin_random_matrices(rng):
    for trial in range(100):
        n = rng.randint(5, 40)
        M = sp.random(n, n, density=0.2, random_state=rng)
        M.data -= 0.5
        B = (M + M.T + sp.diags(-rng.uniform(0, 1, n))).tocsr()
        B.sort_indices()
        repaired, count = irls.gersgorin_repair(B)
        assert _is_cholesky_pd(repaired)
        np.testing.assert_array_equal(repaired.indptr, B.indptr)
        np.testing.assert_array_equal(repaired.indices, B.indices)


def test_psd_project():
    P = np.array([[2.0, 1.0], [1.0, 2.0]])
    np.testing.assert_allclose(irls.psd_project(P), P, atol=1e-12)
    np.testing.assert_allclose(irls.psd_project(np.diag([1.0, -3.0])),
                               np.diag([1.0, 0.0]), atol=1e-15)


def test_psd_project_matches_oracle(rng):
    M = rng.standard_normal((50, 50))
    B = M + M.T
    projected, count = irls.psd_project(sp.csr_matrix(B), return_count=True)
    evals, evecs = scipy.linalg.eigh(B)
    oracle = (evecs*np.maximum(evals, 0)).dot(evecs.T)
    np.testing.assert_allclose(projected, oracle, atol=1e-10)
    assert count == np.sum(evals < 0)


def test_psd_project_margin():
    projected, count = irls.psd_project(np.diag([2.0, -1.0]), return_count=True,
                                        margin_rel=0.1)
    np.testing.assert_allclose(projected, np.diag([2.0, 0.2]), atol=1e-15)
    assert count == 1


def test_psd_repair_keeps_margin():
    B = sp.csr_matrix([[1.0, 2.0], [2.0, 1.0]])
    repaired, count = irls.repair_matrix(B, irls.PSDPROJECT)
    assert count == 1
    smallest = np.linalg.eigvalsh(repaired.toarray())[0]
    assert smallest == pytest.approx(3e-6, rel=1e-6)
    assert linalg_utils.is_positive_definite(repaired)


def test_psd_project_size_limit():
    with pytest.raises(errors.SizeLimitExceeded):
        irls.psd_project(sp.identity(20), dense_limit=10)


def test_repair_none_fails():
    with pytest.raises(errors.SolveFailure):
        irls.repair_matrix(sp.identity(2), irls.NOREPAIR)


def test_history(tmp_path):
    history = irls.IRLSHistory()
    history.append(0, 3.0)
    history.append(1, 2.0, 2.5, repaired=1, clamped=2)
    history.append(2, 2.0 + 1e-12, 2.0)
    assert history.num_iterations == 2
    assert history.is_monotone()
    assert not history.is_monotone(slack=0.0)
    fn = str(tmp_path/"history.jsonl")
    history.to_jsonl(fn)
    with open(fn) as ff:
        records = [json.loads(line) for line in ff]
    assert [rec['iter'] for rec in records] == [0, 1, 2]
    assert records[1]['repaired'] == 1
    assert records[0]['surrogate'] is None


def test_options():
    opts = irls.IRLSOptions('mu=2,eps=1e-6', scheme='first')
    assert opts.mu == 2.0
    assert opts.epsilon_rel == 1e-6
    assert opts.scheme == 'first'
    assert opts.max_outer_iters == 100
    with pytest.raises(errors.ConfigurationError):
        irls.IRLSOptions(scheme='second')
    with pytest.raises(errors.ConfigurationError):
        irls.IRLSOptions(mu=-1)
