import numpy as np
import pytest

from manifold_l1 import errors
from manifold_l1 import mesh_io

from conftest import read_ply, write_off


def test_read_off_triangle(tmp_path):
    fn = write_off(tmp_path/"tri.off", [[0, 0, 0], [1, 0, 0], [0, 1, 0]],
                   [[0, 1, 2]])
    mesh = mesh_io.load_mesh(fn)
    assert mesh.n_faces == 1
    assert mesh.face_areas[0] == pytest.approx(0.5)


def test_read_off_counts_on_header_and_comments(tmp_path):
    fn = tmp_path/"quad.off"
    fn.write_text("OFF 4 1 0\n# a comment\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n"
                  "4 0 1 2 3\n")
    mesh = mesh_io.load_mesh(str(fn))
    # Quadrilateral is fan-triangulated
    assert mesh.n_faces == 2
    assert mesh.total_area == pytest.approx(1.0)


def test_read_off_too_few_vertices(tmp_path):
    fn = tmp_path/"short.off"
    fn.write_text("OFF\n4 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n")
    with pytest.raises(errors.ParseError):
        mesh_io.load_mesh(str(fn))


def test_read_off_bad_header(tmp_path):
    fn = tmp_path/"bad.off"
    fn.write_text("PLY\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n")
    with pytest.raises(errors.ParseError):
        mesh_io.load_mesh(str(fn))


def test_read_off_index_out_of_range(tmp_path):
    fn = write_off(tmp_path/"idx.off", [[0, 0, 0], [1, 0, 0], [0, 1, 0]],
                   [[0, 1, 3]])
    with pytest.raises(errors.IndexOutOfRange):
        mesh_io.load_mesh(fn)


def test_read_obj(tmp_path):
    fn = tmp_path/"tri.obj"
    fn.write_text("# triangle\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\n"
                  "f 1//1 2//1 3//1\n")
    mesh = mesh_io.load_mesh(str(fn))
    np.testing.assert_array_equal(mesh.faces, [[0, 1, 2]])
    assert mesh.face_areas[0] == pytest.approx(0.5)


def test_read_obj_zero_index(tmp_path):
    fn = tmp_path/"zero.obj"
    fn.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n")
    with pytest.raises(errors.ParseError):
        mesh_io.load_mesh(str(fn))


def test_unknown_extension(tmp_path):
    fn = tmp_path/"mesh.stl"
    fn.write_text("solid\n")
    with pytest.raises(errors.UnrecognizedValueError):
        mesh_io.load_mesh(str(fn))


def test_save_off_round_trip(tmp_path, grid_mesh):
    fn = str(tmp_path/"grid.off")
    mesh_io.save_off(fn, grid_mesh)
    loaded = mesh_io.load_mesh(fn)
    np.testing.assert_array_equal(loaded.vertices, grid_mesh.vertices)
    np.testing.assert_array_equal(loaded.faces, grid_mesh.faces)


def test_write_ply(tmp_path, tetrahedron):
    fn = str(tmp_path/"tet.ply")
    quality = np.array([0.1, -2.5, 3.0, 1e-3])
    mesh_io.write_ply(fn, tetrahedron, quality)
    header, vdata, fdata = read_ply(fn)
    assert header[0] == "ply"
    assert header[1] == "format binary_little_endian 1.0"
    assert "property float quality" in header
    assert "property list uchar int vertex_indices" in header
    assert len(vdata) == tetrahedron.n_vertices
    assert len(fdata) == tetrahedron.n_faces
    np.testing.assert_allclose(vdata['quality'], quality, rtol=1e-7)
    np.testing.assert_allclose(vdata['x'], tetrahedron.vertices[:, 0], rtol=1e-7)
    np.testing.assert_array_equal(fdata['count'], 3)
    np.testing.assert_array_equal(fdata['vertex_indices'], tetrahedron.faces)


def test_write_ply_length_mismatch(tmp_path, tetrahedron):
    with pytest.raises(errors.DimensionMismatch):
        mesh_io.write_ply(str(tmp_path/"bad.ply"), tetrahedron, np.ones(3))


def test_function_file_round_trip(tmp_path, rng):
    f = rng.standard_normal(50)
    fn = str(tmp_path/"f.txt")
    mesh_io.save_function(fn, f)
    np.testing.assert_array_equal(mesh_io.load_function(fn, 50), f)


def test_function_file_errors(tmp_path):
    fn = tmp_path/"f.txt"
    fn.write_text("1.0\n2.0\n")
    with pytest.raises(errors.DimensionMismatch):
        mesh_io.load_function(str(fn), 3)
    fn.write_text("1.0\nabc\n3.0\n")
    with pytest.raises(errors.ParseError):
        mesh_io.load_function(str(fn), 3)
    fn.write_text("1.0\nnan\n3.0\n")
    with pytest.raises(errors.InputError):
        mesh_io.load_function(str(fn), 3)


def test_invalid_utf8(tmp_path):
    for name in ("bad.off", "bad.obj", "bad.txt"):
        fn = tmp_path/name
        fn.write_bytes(b"OFF\n3 1 0\n\xff\xfe 0 0\n")
        with pytest.raises(errors.ParseError):
            if name.endswith(".txt"):
                mesh_io.load_function(str(fn))
            else:
                mesh_io.load_mesh(str(fn))


def test_unreadable_mesh(tmp_path):
    # A directory named like a mesh cannot be opened as a file
    dirname = tmp_path/"dir.off"
    dirname.mkdir()
    with pytest.raises(errors.InputError):
        mesh_io.read_off(str(dirname))
