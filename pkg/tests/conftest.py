import numpy as np
import pytest

from manifold_l1 import config
from manifold_l1 import mesh as mesh_mod
from manifold_l1 import utils


@pytest.fixture(autouse=True)
def quiet_config():
    """Keep console output off and clear overrides and failed
        checks between tests.
    """
    verbosity = config.verbosity
    config.verbosity = -1
    utils.reset_failed_checks()
    yield
    config.verbosity = verbosity
    config.cfg.clear_overrides()
    utils.reset_failed_checks()


def make_grid(nx, ny, jitter=0.0, seed=0, bump=0.0):
    """A triangulated [0,1]^2 grid of nx x ny vertices. Interior
        vertices are jittered by up to 'jitter' times the spacing;
        'bump' lifts the grid into a smooth height field.
    """
    xs, ys = np.meshgrid(np.linspace(0, 1, nx), np.linspace(0, 1, ny))
    verts = np.column_stack([xs.ravel(), ys.ravel(), np.zeros(nx*ny)])
    if jitter:
        rng = np.random.RandomState(seed)
        h = 1.0/(max(nx, ny)-1)
        interior = (verts[:, 0] > 0) & (verts[:, 0] < 1) & \
                    (verts[:, 1] > 0) & (verts[:, 1] < 1)
        verts[interior, :2] += jitter*h*rng.uniform(-1, 1, (interior.sum(), 2))
    if bump:
        verts[:, 2] = bump*np.sin(np.pi*verts[:, 0])*np.sin(np.pi*verts[:, 1])
    faces = []
    for jj in range(ny-1):
        for ii in range(nx-1):
            v00 = jj*nx + ii
            v10, v01, v11 = v00+1, v00+nx, v00+nx+1
            if (ii+jj) % 2:
                faces.extend([(v00, v10, v11), (v00, v11, v01)])
            else:
                faces.extend([(v00, v10, v01), (v10, v11, v01)])
    return mesh_mod.TriangleMesh(verts, faces)


def write_off(fn, vertices, faces):
    with open(fn, 'w') as ff:
        ff.write("OFF\n%d %d 0\n" % (len(vertices), len(faces)))
        for vert in vertices:
            ff.write("%.17g %.17g %.17g\n" % tuple(vert))
        for face in faces:
            ff.write("3 %d %d %d\n" % tuple(face))
    return str(fn)


def read_ply(fn):
    """Parse a binary little-endian PLY file with x, y, z, quality
        vertices and triangle faces.

        Outputs:
            header: List of header lines.
            vdata: Structured vertex array.
            fdata: Structured face array.
    """
    with open(fn, 'rb') as ff:
        raw = ff.read()
    end = raw.index(b"end_header\n") + len(b"end_header\n")
    header = raw[:end].decode('ascii').splitlines()
    nverts = nfaces = None
    for line in header:
        if line.startswith("element vertex"):
            nverts = int(line.split()[-1])
        elif line.startswith("element face"):
            nfaces = int(line.split()[-1])
    vdtype = np.dtype([('x', '<f4'), ('y', '<f4'), ('z', '<f4'), ('quality', '<f4')])
    fdtype = np.dtype([('count', 'u1'), ('vertex_indices', '<i4', (3,))])
    vdata = np.frombuffer(raw, dtype=vdtype, count=nverts, offset=end)
    offset = end + nverts*vdtype.itemsize
    fdata = np.frombuffer(raw, dtype=fdtype, count=nfaces, offset=offset)
    assert offset + nfaces*fdtype.itemsize == len(raw)
    return header, vdata, fdata


@pytest.fixture
def unit_triangle():
    return mesh_mod.TriangleMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])


@pytest.fixture
def tetrahedron():
    verts = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]],
                     dtype=float)/(2*np.sqrt(2))
    faces = [[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]]
    return mesh_mod.TriangleMesh(verts, faces)


@pytest.fixture(scope='session')
def icosphere2():
    return mesh_mod.make_icosphere(2)


@pytest.fixture(scope='session')
def icosphere3():
    return mesh_mod.make_icosphere(3)


@pytest.fixture(scope='session')
def grid_mesh():
    """Jittered, slightly curved grid with 1024 vertices.
    """
    return make_grid(32, 32, jitter=0.3, seed=7, bump=0.2)


@pytest.fixture(scope='session')
def small_grid():
    """Jittered, slightly curved grid with 300 vertices.
    """
    return make_grid(20, 15, jitter=0.3, seed=3, bump=0.2)


@pytest.fixture
def rng():
    return np.random.RandomState(1234)
