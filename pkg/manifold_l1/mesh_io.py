"""
Reading and writing meshes and vertex functions.

    OFF (ASCII) and OBJ meshes are read; OFF and binary
    little-endian PLY (with a per-vertex 'quality' scalar)
    are written. Vertex functions are plain-text column files.
"""
import os

import numpy as np

from manifold_l1 import errors
from manifold_l1 import utils
from manifold_l1 import mesh as mesh_mod


mesh_formats = ['off', 'obj']


def _fan_triangulate(polygon):
    """Triangulate a polygon as a fan anchored at its first vertex.
    """
    return [(polygon[0], polygon[ii], polygon[ii+1])
            for ii in range(1, len(polygon)-1)]


def _strip_comment(line):
    return line.split('#', 1)[0].strip()


def _read_lines(fn, what):
    try:
        with open(fn, 'r', encoding='utf-8') as ff:
            return ff.readlines()
    except UnicodeDecodeError as exc:
        raise errors.ParseError("%s (%s) is not valid UTF-8 text: %s" %
                                (what, fn, exc))
    except OSError as exc:
        raise errors.InputError("Cannot read %s (%s): %s" % (what, fn, exc))


def read_off(fn):
    """Read an ASCII OFF file.

        Input:
            fn: The name of the OFF file.

        Outputs:
            vertices: (n, 3) float array.
            faces: (m, 3) int array (polygons are fan-triangulated).
    """
    lines = [_strip_comment(line) for line in _read_lines(fn, "OFF file")]
    lines = [line for line in lines if line]
    if not lines:
        raise errors.ParseError("OFF file (%s) is empty." % fn)
    header = lines[0].split()
    if header[0] not in ('OFF', 'COFF', 'NOFF', 'CNOFF'):
        raise errors.ParseError("OFF header missing from %s (found '%s')." %
                                (fn, lines[0]))
    # Counts may share the header line
    if len(header) > 1:
        countstrs = header[1:]
        body = lines[1:]
    elif len(lines) > 1:
        countstrs = lines[1].split()
        body = lines[2:]
    else:
        raise errors.ParseError("OFF file (%s) has no counts line." % fn)
    try:
        nverts, nfaces = int(countstrs[0]), int(countstrs[1])
    except (ValueError, IndexError):
        raise errors.ParseError("Bad counts line in OFF file (%s): '%s'" %
                                (fn, " ".join(countstrs)))
    if len(body) < nverts+nfaces:
        raise errors.ParseError("OFF file (%s) declares %d vertices and %d "
                                "faces but only has %d data lines." %
                                (fn, nverts, nfaces, len(body)))
    vertices = np.empty((nverts, 3))
    for ii in range(nverts):
        split = body[ii].split()
        try:
            vertices[ii] = [float(xx) for xx in split[:3]]
        except ValueError:
            raise errors.ParseError("Bad vertex line %d in OFF file (%s): '%s'" %
                                    (ii, fn, body[ii]))
        if len(split) < 3:
            raise errors.ParseError("Vertex line %d in OFF file (%s) has "
                                    "fewer than 3 coordinates." % (ii, fn))
    faces = []
    for ii in range(nverts, nverts+nfaces):
        try:
            split = [int(xx) for xx in body[ii].split()]
            count = split[0]
            polygon = split[1:count+1]
        except (ValueError, IndexError):
            raise errors.ParseError("Bad face line in OFF file (%s): '%s'" %
                                    (fn, body[ii]))
        if count < 3 or len(polygon) != count:
            raise errors.ParseError("Face line in OFF file (%s) does not list "
                                    "the %d vertices it declares: '%s'" %
                                    (fn, count, body[ii]))
        faces.extend(_fan_triangulate(polygon))
    return vertices, np.array(faces, dtype=np.int64).reshape(-1, 3)


def read_obj(fn):
    """Read the vertices and faces of a Wavefront OBJ file.
        Texture and normal indices on faces ("f 1/1/1 ...") are
        ignored. Negative (relative) indices are not supported.

        Input:
            fn: The name of the OBJ file.

        Outputs:
            vertices: (n, 3) float array.
            faces: (m, 3) int array (0-based, fan-triangulated).
    """
    vertices = []
    faces = []
    for lineno, line in enumerate(_read_lines(fn, "OBJ file"), 1):
        split = _strip_comment(line).split()
        if not split:
            continue
        if split[0] == 'v':
            try:
                vertices.append([float(xx) for xx in split[1:4]])
            except ValueError:
                raise errors.ParseError("Bad vertex on line %d of %s." %
                                        (lineno, fn))
            if len(vertices[-1]) != 3:
                raise errors.ParseError("Vertex on line %d of %s has fewer "
                                        "than 3 coordinates." % (lineno, fn))
        elif split[0] == 'f':
            polygon = []
            for entry in split[1:]:
                try:
                    idx = int(entry.split('/')[0])
                except ValueError:
                    raise errors.ParseError("Bad face entry '%s' on line "
                                            "%d of %s." % (entry, lineno, fn))
                if idx < 0:
                    raise errors.ParseError("Negative (relative) face "
                                            "indices are not supported "
                                            "(line %d of %s)." % (lineno, fn))
                if idx == 0:
                    raise errors.ParseError("OBJ indices are 1-based; found "
                                            "0 on line %d of %s." % (lineno, fn))
                polygon.append(idx-1)
            if len(polygon) < 3:
                raise errors.ParseError("Face on line %d of %s has fewer "
                                        "than 3 vertices." % (lineno, fn))
            faces.extend(_fan_triangulate(polygon))
    return np.array(vertices, dtype=float).reshape(-1, 3), \
            np.array(faces, dtype=np.int64).reshape(-1, 3)


def guess_format(fn):
    ext = os.path.splitext(fn)[1].lower().lstrip('.')
    if ext not in mesh_formats:
        raise errors.UnrecognizedValueError("Cannot determine the mesh format "
                                            "of %s from its extension. Known "
                                            "formats: %s" %
                                            (fn, ", ".join(mesh_formats)))
    return ext


def load_mesh(fn, fmt='auto'):
    """Load a triangle mesh from file.

        Inputs:
            fn: The name of the mesh file.
            fmt: 'off', 'obj' or 'auto' (from the file extension).
                (Default: auto)

        Output:
            mesh: A TriangleMesh.
    """
    fmt = fmt.lower()
    if fmt == 'auto':
        fmt = guess_format(fn)
    if not os.path.isfile(fn):
        raise errors.InputError("Mesh file (%s) does not exist." % fn)
    if fmt == 'off':
        vertices, faces = read_off(fn)
    elif fmt == 'obj':
        vertices, faces = read_obj(fn)
    else:
        raise errors.UnrecognizedValueError("Mesh format '%s' is not "
                                            "recognized. Known formats: %s" %
                                            (fmt, ", ".join(mesh_formats)))
    mesh = mesh_mod.TriangleMesh(vertices, faces)
    utils.print_info("Loaded %s: %d vertices, %d faces" %
                     (fn, mesh.n_vertices, mesh.n_faces), 2)
    return mesh


def save_off(fn, mesh):
    with open(fn, 'w', encoding='utf-8') as ff:
        ff.write("OFF\n%d %d 0\n" % (mesh.n_vertices, mesh.n_faces))
        np.savetxt(ff, mesh.vertices, fmt="%.17g")
        np.savetxt(ff, np.column_stack([np.full(mesh.n_faces, 3), mesh.faces]),
                   fmt="%d")


def write_ply(fn, mesh, quality):
    """Write a binary little-endian PLY file with the per-vertex
        scalar 'quality'.

        Inputs:
            fn: The output file name.
            mesh: The TriangleMesh.
            quality: n per-vertex values (stored as 32-bit floats).

        Outputs:
            None
    """
    quality = read_function_values(quality, mesh.n_vertices)
    header = "\n".join(["ply",
                        "format binary_little_endian 1.0",
                        "comment written by manifold_l1",
                        "element vertex %d" % mesh.n_vertices,
                        "property float x",
                        "property float y",
                        "property float z",
                        "property float quality",
                        "element face %d" % mesh.n_faces,
                        "property list uchar int vertex_indices",
                        "end_header"]) + "\n"
    vdata = np.empty(mesh.n_vertices, dtype=[('x', '<f4'), ('y', '<f4'),
                                              ('z', '<f4'), ('quality', '<f4')])
    vdata['x'] = mesh.vertices[:, 0]
    vdata['y'] = mesh.vertices[:, 1]
    vdata['z'] = mesh.vertices[:, 2]
    vdata['quality'] = quality
    fdata = np.empty(mesh.n_faces, dtype=[('count', 'u1'), ('vertex_indices', '<i4', (3,))])
    fdata['count'] = 3
    fdata['vertex_indices'] = mesh.faces
    with open(fn, 'wb') as ff:
        ff.write(header.encode('ascii'))
        ff.write(vdata.tobytes())
        ff.write(fdata.tobytes())


def read_function_values(values, nverts=None):
    """Validate a vertex function.

        Inputs:
            values: Sequence of function samples.
            nverts: Expected number of samples.
                (Default: don't check the length)

        Output:
            f: 1D float array.
    """
    f = np.asarray(values, dtype=float)
    if f.ndim == 2 and 1 in f.shape:
        f = f.reshape(-1)
    if f.ndim != 1:
        raise errors.DimensionMismatch("A vertex function must be one "
                                       "dimensional (got shape %s)." % (f.shape,))
    if nverts is not None and len(f) != nverts:
        raise errors.DimensionMismatch("Function has %d values but the mesh "
                                       "has %d vertices." % (len(f), nverts))
    if not np.all(np.isfinite(f)):
        raise errors.InputError("Vertex function values must be finite.")
    return f


def load_function(fn, nverts=None):
    """Read a vertex function from a column file (one value per line).
    """
    if not os.path.isfile(fn):
        raise errors.InputError("Function file (%s) does not exist." % fn)
    values = []
    for lineno, line in enumerate(_read_lines(fn, "Function file"), 1):
        line = _strip_comment(line)
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise errors.ParseError("Bad value '%s' on line %d of %s." %
                                    (line, lineno, fn))
    return read_function_values(values, nverts)


def save_function(fn, f):
    np.savetxt(fn, np.asarray(f, dtype=float).reshape(-1), fmt="%.17g")
