"""OBJ export/import: golden bytes, round-trips, parser errors."""

import numpy as np
import pytest

from meshforge.errors import EmptyMesh, IndexOutOfRange, ParseError
from meshforge.meshops import IndexedMesh, compute_vertex_normals
from meshforge.objio import export_obj, import_obj, make_mtl_text

GOLDEN_TRIANGLE_OBJ = """mtllib tri.mtl
o tri
usemtl default
v 0.000000 0.000000 0.000000 1.000000 1.000000 1.000000
v 1.000000 0.000000 0.000000 1.000000 1.000000 1.000000
v 0.000000 1.000000 0.000000 1.000000 1.000000 1.000000
vn 0.000000 0.000000 1.000000
vn 0.000000 0.000000 1.000000
vn 0.000000 0.000000 1.000000
f 1//1 2//2 3//3
"""


def right_triangle_mesh():
    mesh = IndexedMesh(
        positions=np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]),
        triangles=np.array([[0, 1, 2]], dtype=np.int64),
        colors=np.ones((3, 3)),
    )
    return compute_vertex_normals(mesh)


def random_mesh(seed: int) -> IndexedMesh:
    rng = np.random.default_rng(seed)
    v = int(rng.integers(4, 40))
    mesh = IndexedMesh(
        positions=rng.uniform(-2, 2, (v, 3)),
        triangles=rng.integers(0, v, (int(rng.integers(2, 60)), 3)).astype(np.int64),
        colors=rng.uniform(0, 1, (v, 3)),
    )
    keep = ~((mesh.triangles[:, 0] == mesh.triangles[:, 1])
             | (mesh.triangles[:, 1] == mesh.triangles[:, 2])
             | (mesh.triangles[:, 0] == mesh.triangles[:, 2]))
    mesh = IndexedMesh(positions=mesh.positions, triangles=mesh.triangles[keep],
                       colors=mesh.colors)
    if mesh.triangle_count == 0:
        mesh = IndexedMesh(positions=mesh.positions,
                           triangles=np.array([[0, 1, 2]], dtype=np.int64),
                           colors=mesh.colors)
    return compute_vertex_normals(mesh)


def assert_round_trip(mesh: IndexedMesh):
    obj_text, _ = export_obj(mesh, name="fixture")
    back = import_obj(obj_text)
    assert np.array_equal(back.triangles, mesh.triangles)
    assert np.abs(back.positions - mesh.positions).max() <= 1e-6
    assert np.abs(back.colors - mesh.colors).max() <= 1e-6
    assert back.normals is not None
    assert np.abs(back.normals - mesh.normals).max() <= 1e-6


class TestExport:
    def test_golden_triangle_bytes(self):
        obj_text, mtl_text = export_obj(right_triangle_mesh(), name="tri")
        assert obj_text == GOLDEN_TRIANGLE_OBJ
        assert mtl_text == make_mtl_text()
        assert obj_text.isascii()

    def test_deterministic_bytes(self, sphere_mesh_48):
        mesh = compute_vertex_normals(sphere_mesh_48)
        a = export_obj(mesh, name="sphere")
        b = export_obj(mesh, name="sphere")
        assert a == b

    def test_empty_mesh_rejected(self):
        with pytest.raises(EmptyMesh):
            export_obj(IndexedMesh.empty(), name="x")

    def test_normals_required(self):
        mesh = IndexedMesh(positions=np.zeros((3, 3)),
                           triangles=np.array([[0, 1, 2]], dtype=np.int64),
                           colors=np.ones((3, 3)))
        with pytest.raises(ValueError):
            export_obj(mesh, name="x")


class TestRoundTrip:
    def test_ten_fixtures_including_sphere(self, sphere_mesh_48):
        assert_round_trip(compute_vertex_normals(sphere_mesh_48))
        for seed in range(9):
            assert_round_trip(random_mesh(seed))


class TestImport:
    def test_minimal_document(self):
        mesh = import_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n")
        assert mesh.vertex_count == 3
        assert mesh.triangle_count == 1
        assert np.array_equal(mesh.colors, np.ones((3, 3)))
        assert mesh.normals is None

    def test_quad_fan_triangulation(self):
        mesh = import_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
        assert np.array_equal(mesh.triangles, [[0, 1, 2], [0, 2, 3]])

    def test_vertex_index_out_of_range_with_line(self):
        with pytest.raises(IndexOutOfRange) as exc_info:
            import_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n")
        assert exc_info.value.line_no == 4

    def test_normal_index_out_of_range(self):
        doc = "v 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//2\n"
        with pytest.raises(IndexOutOfRange) as exc_info:
            import_obj(doc)
        assert exc_info.value.line_no == 5

    def test_slash_forms(self):
        doc = ("v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvn 0 0 1\n"
               "f 1/1/1 2/1/1 3/1/1\nf 1 2/1 3//1\n")
        mesh = import_obj(doc)
        assert mesh.triangle_count == 2
        assert np.allclose(mesh.normals[0], [0, 0, 1])

    def test_vertex_colors_parsed(self):
        mesh = import_obj("v 0 0 0 0.25 0.50 0.75\nv 1 0 0\nv 0 1 0\nf 1 2 3\n")
        assert mesh.colors[0] == pytest.approx([0.25, 0.5, 0.75])
        assert mesh.colors[1] == pytest.approx([1, 1, 1])

    def test_bad_float_reports_line(self):
        with pytest.raises(ParseError) as exc_info:
            import_obj("v 0 0 0\nv 1 nope 0\n")
        assert exc_info.value.line_no == 2

    def test_wrong_vertex_arity(self):
        with pytest.raises(ParseError):
            import_obj("v 0 0 0 1\n")

    def test_face_too_short(self):
        with pytest.raises(ParseError):
            import_obj("v 0 0 0\nv 1 0 0\nf 1 2\n")

    def test_unknown_keywords_ignored(self):
        doc = ("# header\nmtllib foo.mtl\no thing\ns off\ng grp\n"
               "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n")
        assert import_obj(doc).triangle_count == 1

    def test_bad_face_token(self):
        with pytest.raises(ParseError):
            import_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3/4/5/6\n")
