import numpy as np
import pytest

from manifold_l1 import mesh as mesh_mod
from manifold_l1 import operators


def _fem_stiffness(mesh):
    """Dense int grad(b_i).grad(b_j) assembled from per-face gradients.
    """
    n = mesh.n_vertices
    K = np.zeros((n, n))
    for face, area in zip(mesh.faces, mesh.face_areas):
        pts = mesh.vertices[face]
        normal = np.cross(pts[1]-pts[0], pts[2]-pts[0])
        normal /= np.linalg.norm(normal)
        grads = []
        for c in range(3):
            opp = pts[(c+2) % 3] - pts[(c+1) % 3]
            grads.append(np.cross(normal, opp)/(2*area))
        for ii in range(3):
            for jj in range(3):
                K[face[ii], face[jj]] += area*np.dot(grads[ii], grads[jj])
    return K


def test_equilateral_triangle():
    mesh = mesh_mod.TriangleMesh([[0, 0, 0], [1, 0, 0], [0.5, np.sqrt(3)/2, 0]],
                                 [[0, 1, 2]])
    W = operators.cotangent_stiffness(mesh).toarray()
    off = -1/(2*np.sqrt(3))
    expected = np.full((3, 3), off)
    np.fill_diagonal(expected, 2/(2*np.sqrt(3)))
    np.testing.assert_allclose(W, expected, rtol=1e-13)


def test_matches_fem_assembly(small_grid, tetrahedron):
    for mesh in (small_grid, tetrahedron):
        W = operators.cotangent_stiffness(mesh).toarray()
        np.testing.assert_allclose(W, _fem_stiffness(mesh), atol=1e-10)


def test_rows_sum_to_zero(grid_mesh, icosphere3):
    for mesh in (grid_mesh, icosphere3):
        W = operators.cotangent_stiffness(mesh)
        norm = np.max(np.asarray(abs(W).sum(axis=1)))
        assert np.max(np.abs(W.dot(np.ones(mesh.n_vertices)))) <= 1e-12*norm


def test_symmetric_positive_semidefinite(small_grid):
    W = operators.cotangent_stiffness(small_grid)
    assert abs(W - W.T).max() == 0
    dense = W.toarray()
    norm = np.max(np.sum(np.abs(dense), axis=1))
    assert np.linalg.eigvalsh(dense).min() >= -1e-10*norm


def test_lumped_mass(unit_triangle, icosphere3):
    A = operators.lumped_mass(unit_triangle, mesh_mod.BARYCENTRIC)
    np.testing.assert_allclose(A.toarray(), np.eye(3)/6.0, rtol=1e-14)
    A = operators.lumped_mass(icosphere3, mesh_mod.BARYCENTRIC)
    assert A.diagonal().sum() == pytest.approx(icosphere3.total_area, rel=1e-13)
    assert abs(A.diagonal().sum() - 4*np.pi) < 0.01*4*np.pi


def test_write_triplets(tmp_path, unit_triangle):
    W = operators.cotangent_stiffness(unit_triangle)
    fn = str(tmp_path/"W.txt")
    operators.write_triplets(fn, W)
    data = np.loadtxt(fn)
    assert data.shape == (W.nnz, 3)
    rows, cols = data[:, 0].astype(int), data[:, 1].astype(int)
    np.testing.assert_allclose(data[:, 2], W.toarray()[rows, cols], rtol=1e-15)
    # Row-major order
    assert np.all(np.diff(rows*3 + cols) > 0)
