"""
Assembly of the cotangent stiffness matrix W and the
lumped (diagonal) mass matrix A of a triangle mesh.
"""
import numpy as np
import scipy.sparse as sp

from manifold_l1 import utils


def corner_cotangents(mesh):
    """Return the cotangent of the interior angle at every
        face corner as an (m, 3) array. Computed from edge
        vectors as (u.v)/|u x v|, no angles are extracted.
    """
    faces = mesh.faces
    cots = np.empty(faces.shape)
    for c in range(3):
        pi = mesh.vertices[faces[:, c]]
        u = mesh.vertices[faces[:, (c+1) % 3]] - pi
        v = mesh.vertices[faces[:, (c+2) % 3]] - pi
        cots[:, c] = np.sum(u*v, axis=1)/np.linalg.norm(np.cross(u, v), axis=1)
    return cots


def cotangent_stiffness(mesh):
    """Assemble the cotangent stiffness matrix.

        W_ij = -(cot a_ij + cot b_ij)/2 for every edge (i, j), summed
        over its incident faces, and W_ii = -sum_j W_ij. Negative
        weights are kept as is.

        Input:
            mesh: A TriangleMesh.

        Output:
            W: (n, n) symmetric positive semidefinite CSR matrix.
    """
    nverts = mesh.n_vertices
    faces = mesh.faces
    cots = corner_cotangents(mesh)
    # The angle at corner c is opposite the edge ((c+1), (c+2))
    ii = np.concatenate([faces[:, (c+1) % 3] for c in range(3)])
    jj = np.concatenate([faces[:, (c+2) % 3] for c in range(3)])
    vals = -0.5*np.concatenate([cots[:, c] for c in range(3)])
    half = sp.coo_matrix((vals, (ii, jj)), shape=(nverts, nverts)).tocsr()
    offdiag = half + half.T
    diag = -np.asarray(offdiag.sum(axis=1)).ravel()
    W = (offdiag + sp.diags(diag, format='csr')).tocsr()
    W.eliminate_zeros()
    W.sort_indices()
    utils.print_info("Assembled cotangent stiffness (%d x %d, %d non-zeros)" %
                     (nverts, nverts, W.nnz), 3)
    return W


def lumped_mass(mesh, scheme=None):
    """Return the lumped mass matrix diag(a) where 'a' are the
        vertex cell areas of 'mesh' under 'scheme'.
    """
    areas = mesh.cell_areas(scheme).areas
    return sp.diags(areas, format='csr')


def assemble(mesh, scheme=None):
    """Return (W, A) for 'mesh'.
    """
    return cotangent_stiffness(mesh), lumped_mass(mesh, scheme)


def write_triplets(fn, matrix):
    """Write a sparse matrix as ASCII coordinate triplets,
        one "i j value" line per stored entry (0-based indices,
        row-major order).

        Inputs:
            fn: The output file name.
            matrix: The sparse (or dense) matrix.

        Outputs:
            None
    """
    coo = sp.csr_matrix(matrix)
    coo.sort_indices()
    coo = coo.tocoo()
    with open(fn, 'w', encoding='utf-8') as ff:
        for row, col, val in zip(coo.row, coo.col, coo.data):
            ff.write("%d %d %.17g\n" % (row, col, val))
