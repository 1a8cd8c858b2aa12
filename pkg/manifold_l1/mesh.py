"""
Triangle meshes: geometry, adjacency, vertex cell areas
and midpoint subdivision.
"""
import numpy as np
import scipy.sparse as sp

from manifold_l1 import config
from manifold_l1 import errors
from manifold_l1 import utils


BARYCENTRIC = 'barycentric'
MIXEDVORONOI = 'mixedvoronoi'
cell_area_schemes = [BARYCENTRIC, MIXEDVORONOI]


def _readonly(arr):
    arr.setflags(write=False)
    return arr


class TriangleMesh(object):
    """An immutable triangle mesh.

        Face areas and 1-ring adjacency (faces incident to each
        vertex) are computed on construction. Non-manifold and
        open meshes are accepted.
    """
    def __init__(self, vertices, faces, degenerate_tol=None):
        """Constructor for TriangleMesh objects.

            Inputs:
                vertices: (n, 3) array of vertex positions.
                faces: (m, 3) array of vertex indices.
                degenerate_tol: Faces with area <= degenerate_tol times
                    the squared bounding-box diagonal are rejected.
                    (Default: the 'degenerate_tol' configuration.)

            Output:
                mesh: The TriangleMesh object.
        """
        vertices = np.array(vertices, dtype=float)
        faces = np.array(faces)
        if vertices.ndim != 2 or vertices.shape[1] != 3:
            raise errors.InputError("Vertices must be an (n, 3) array. "
                                    "Got shape %s." % (vertices.shape,))
        if faces.size == 0:
            faces = faces.reshape((0, 3))
        if faces.ndim != 2 or faces.shape[1] != 3:
            raise errors.InputError("Faces must be an (m, 3) array of "
                                    "vertex indices. Got shape %s." %
                                    (faces.shape,))
        if faces.size and not np.issubdtype(faces.dtype, np.integer):
            if not np.all(np.equal(np.mod(faces, 1), 0)):
                raise errors.InputError("Face entries must be integers.")
        faces = faces.astype(np.int64)
        if not np.all(np.isfinite(vertices)):
            raise errors.InputError("Vertex coordinates must be finite.")
        nverts = len(vertices)
        if faces.size and (faces.min() < 0 or faces.max() >= nverts):
            bad = np.flatnonzero(np.any((faces < 0) | (faces >= nverts), axis=1))
            raise errors.IndexOutOfRange("Face %d references a vertex index "
                                         "outside [0, %d). (%d bad faces)" %
                                         (bad[0], nverts, len(bad)))
        if degenerate_tol is None:
            degenerate_tol = config.cfg.degenerate_tol

        self.vertices = _readonly(vertices)
        self.faces = _readonly(faces)
        self.degenerate_tol = degenerate_tol

        cr = self._face_cross_products()
        self.face_areas = _readonly(0.5*np.sqrt(np.sum(cr**2, axis=1)))
        if len(vertices):
            bbox_diag = np.linalg.norm(vertices.max(axis=0)-vertices.min(axis=0))
        else:
            bbox_diag = 0.0
        self.bbox_diagonal = float(bbox_diag)
        degenerate = self.face_areas <= degenerate_tol*bbox_diag**2
        if np.any(degenerate):
            bad = np.flatnonzero(degenerate)
            raise errors.DegenerateFace("Face %d %s has area %g, below the "
                                        "degeneracy threshold %g. (%d "
                                        "degenerate faces)" %
                                        (bad[0], tuple(faces[bad[0]]),
                                         self.face_areas[bad[0]],
                                         degenerate_tol*bbox_diag**2, len(bad)))
        self.vertex_rings = self._build_rings()
        self._cell_areas = {}
        self._edges = None

    def __repr__(self):
        return "<TriangleMesh: %d vertices, %d faces>" % \
                    (self.n_vertices, self.n_faces)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_faces(self):
        return len(self.faces)

    @property
    def total_area(self):
        return float(np.sum(self.face_areas))

    def _face_cross_products(self):
        v0 = self.vertices[self.faces[:, 0]]
        v1 = self.vertices[self.faces[:, 1]]
        v2 = self.vertices[self.faces[:, 2]]
        return np.cross(v1-v0, v2-v0)

    def _build_rings(self):
        flat = self.faces.ravel()
        faceids = np.repeat(np.arange(self.n_faces), 3)
        order = np.argsort(flat, kind='stable')
        counts = np.bincount(flat, minlength=self.n_vertices)
        rings = np.split(faceids[order], np.cumsum(counts)[:-1])
        return tuple(_readonly(ring) for ring in rings)

    @property
    def edges(self):
        """Unique undirected edges as an (E, 2) array with
            the smaller index first, sorted lexicographically.
        """
        if self._edges is None:
            self._edges = _readonly(unique_edges(self.faces)[0])
        return self._edges

    @property
    def average_edge_length(self):
        edges = self.edges
        if not len(edges):
            return 0.0
        lengths = np.linalg.norm(self.vertices[edges[:, 1]] -
                                 self.vertices[edges[:, 0]], axis=1)
        return float(np.mean(lengths))

    def cell_areas(self, scheme=None):
        """Return (and cache) the vertex cell areas for 'scheme'.
        """
        if scheme is None:
            scheme = config.cfg.cell_area_scheme
        if scheme not in self._cell_areas:
            self._cell_areas[scheme] = vertex_cell_areas(self, scheme)
        return self._cell_areas[scheme]

    def scaled(self, scale):
        """Return a copy of the mesh uniformly scaled by 'scale'.
        """
        return TriangleMesh(self.vertices*scale, self.faces,
                            degenerate_tol=self.degenerate_tol)

    def get_hash(self):
        return utils.get_md5sum(self.vertices, self.faces)


class CellAreaVector(object):
    """Positive per-vertex cell areas together with the scheme
        that produced them.
    """
    def __init__(self, areas, scheme):
        self.areas = _readonly(np.asarray(areas, dtype=float))
        self.scheme = scheme

    def __len__(self):
        return len(self.areas)

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.areas
        return self.areas.astype(dtype)

    def __repr__(self):
        return "<CellAreaVector (%s): %d entries, total %g>" % \
                    (self.scheme, len(self.areas), np.sum(self.areas))

    @property
    def total(self):
        return float(np.sum(self.areas))


def _check_scheme(scheme):
    scheme = str(scheme).lower()
    if scheme not in cell_area_schemes:
        raise errors.UnrecognizedValueError("The cell-area scheme '%s' is not "
                                            "recognized. Known schemes: %s" %
                                            (scheme, ", ".join(cell_area_schemes)))
    return scheme


def vertex_cell_areas(mesh, scheme=BARYCENTRIC):
    """Compute the area of the cell associated with each vertex.

        Inputs:
            mesh: A TriangleMesh.
            scheme: 'barycentric' (one third of every incident face)
                or 'mixedvoronoi' (Voronoi area inside non-obtuse
                faces, a 1/2 vs 1/4 split of obtuse faces).

        Output:
            areas: A CellAreaVector.
    """
    scheme = _check_scheme(scheme)
    nverts = mesh.n_vertices
    faces = mesh.faces
    tarea = mesh.face_areas
    if scheme == BARYCENTRIC:
        contrib = np.repeat(tarea/3.0, 3).reshape(-1, 3)
    else:
        pts = [mesh.vertices[faces[:, c]] for c in range(3)]
        # cot of the interior angle at each corner
        cots = np.empty((len(faces), 3))
        dots = np.empty((len(faces), 3))
        sqlen = np.empty((len(faces), 3)) # squared length of edge opposite each corner
        for c in range(3):
            pi, pj, pk = pts[c], pts[(c+1) % 3], pts[(c+2) % 3]
            dots[:, c] = np.sum((pj-pi)*(pk-pi), axis=1)
            cots[:, c] = dots[:, c]/(2.0*tarea)
            sqlen[:, c] = np.sum((pk-pj)**2, axis=1)
        contrib = np.empty((len(faces), 3))
        for c in range(3):
            j, k = (c+1) % 3, (c+2) % 3
            # |p_i - p_j|^2 is the edge opposite k, and vice versa
            contrib[:, c] = (sqlen[:, k]*cots[:, k] + sqlen[:, j]*cots[:, j])/8.0
        obtuse = dots < 0
        anyobtuse = np.any(obtuse, axis=1)
        contrib[anyobtuse] = np.where(obtuse[anyobtuse],
                                      tarea[anyobtuse, None]/2.0,
                                      tarea[anyobtuse, None]/4.0)
    areas = np.bincount(faces.ravel(), weights=contrib.ravel(), minlength=nverts)
    isolated = np.flatnonzero(areas <= 0)
    if len(isolated):
        raise errors.InputError("Vertex %d has no incident faces, so its "
                                "cell area is zero. (%d such vertices)" %
                                (isolated[0], len(isolated)))
    return CellAreaVector(areas, scheme)


def unique_edges(faces):
    """Find the unique undirected edges of a set of faces.

        Inputs:
            faces: (m, 3) array of vertex indices.

        Outputs:
            edges: (E, 2) array of sorted vertex pairs.
            face_edges: (m, 3) array giving, for each face, the index
                of edge (f0, f1), (f1, f2) and (f2, f0) respectively.
    """
    faces = np.asarray(faces)
    alledges = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]],
                               faces[:, [2, 0]]])
    alledges = np.sort(alledges, axis=1)
    edges, inverse = np.unique(alledges, axis=0, return_inverse=True)
    face_edges = np.asarray(inverse).reshape(3, -1).T
    return edges, face_edges


class InterpolationMap(object):
    """Linear transfer of vertex functions from a coarse mesh to
        its midpoint subdivision.
    """
    def __init__(self, matrix):
        self.matrix = sp.csr_matrix(matrix)

    @property
    def shape(self):
        return self.matrix.shape

    def transfer(self, f):
        """Interpolate 'f' (coarse samples, or an (n_coarse, k) array
            of them) to the fine vertices.
        """
        f = np.asarray(f, dtype=float)
        if f.shape[0] != self.matrix.shape[1]:
            raise errors.DimensionMismatch("Function has %d samples but the "
                                           "coarse mesh has %d vertices." %
                                           (f.shape[0], self.matrix.shape[1]))
        return self.matrix.dot(f)

    def compose(self, other):
        """Return the map applying 'self' first and then 'other'.
        """
        return InterpolationMap(other.matrix.dot(self.matrix))


def _subdivide_once(vertices, faces):
    nverts = len(vertices)
    edges, face_edges = unique_edges(faces)
    mids = nverts + face_edges
    newverts = np.concatenate([vertices,
                               0.5*(vertices[edges[:, 0]]+vertices[edges[:, 1]])])
    a, b, c = faces[:, 0], faces[:, 1], faces[:, 2]
    mab, mbc, mca = mids[:, 0], mids[:, 1], mids[:, 2]
    # The four children of face t are stored consecutively
    newfaces = np.stack([np.stack([a, mab, mca], axis=1),
                         np.stack([mab, b, mbc], axis=1),
                         np.stack([mca, mbc, c], axis=1),
                         np.stack([mab, mbc, mca], axis=1)], axis=1).reshape(-1, 3)
    nedges = len(edges)
    rows = np.concatenate([np.arange(nverts),
                           np.repeat(nverts+np.arange(nedges), 2)])
    cols = np.concatenate([np.arange(nverts), edges.ravel()])
    vals = np.concatenate([np.ones(nverts), 0.5*np.ones(2*nedges)])
    interp = sp.csr_matrix((vals, (rows, cols)), shape=(nverts+nedges, nverts))
    return newverts, newfaces, interp


def midpoint_subdivide(mesh, levels=1, project_radius=None):
    """Split every face 1->4 at its edge midpoints 'levels' times.

        Inputs:
            mesh: The TriangleMesh to subdivide.
            levels: The number of subdivision levels (>= 1).
            project_radius: If given, new vertices are projected
                onto the origin-centred sphere of this radius after
                every level. The interpolation map is unaffected.
                (Default: no projection)

        Outputs:
            fine: The subdivided TriangleMesh.
            interp: An InterpolationMap from 'mesh' to 'fine'.
    """
    if int(levels) != levels or levels < 1:
        raise errors.InputError("The number of subdivision levels must be "
                                "a positive integer (got %s)." % levels)
    vertices = np.array(mesh.vertices)
    faces = np.array(mesh.faces)
    interp = sp.identity(mesh.n_vertices, format='csr')
    for level in range(int(levels)):
        vertices, faces, levinterp = _subdivide_once(vertices, faces)
        if project_radius is not None:
            norms = np.linalg.norm(vertices, axis=1)
            vertices = vertices*(project_radius/norms)[:, None]
        interp = levinterp.dot(interp)
        utils.print_info("Subdivision level %d: %d vertices, %d faces" %
                         (level+1, len(vertices), len(faces)), 3)
    fine = TriangleMesh(vertices, faces, degenerate_tol=mesh.degenerate_tol)
    return fine, InterpolationMap(interp)


def make_icosahedron(radius=1.0):
    """Return a regular icosahedron inscribed in the origin-centred
        sphere of the given radius (outward-oriented faces).
    """
    phi = (1.0+np.sqrt(5.0))/2.0
    verts = np.array([[-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
                      [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
                      [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1]],
                     dtype=float)
    verts *= radius/np.linalg.norm(verts[0])
    faces = np.array([[0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
                      [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
                      [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
                      [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1]])
    return TriangleMesh(verts, faces)


def make_icosphere(level=3, radius=1.0):
    """Return an icosahedron subdivided 'level' times with the
        vertices projected onto the sphere of the given radius.
        Level 0 is the icosahedron itself.
    """
    mesh = make_icosahedron(radius)
    if level > 0:
        mesh = midpoint_subdivide(mesh, level, project_radius=radius)[0]
    return mesh
