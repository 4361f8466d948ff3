"""Wavefront OBJ/MTL serialization with per-vertex colors, and parsing."""

from __future__ import annotations

import numpy as np

from .errors import EmptyMesh, IndexOutOfRange, ParseError
from .meshops import IndexedMesh

DEFAULT_MATERIAL = "default"


def make_mtl_text(material: str = DEFAULT_MATERIAL) -> str:
    return (
        f"newmtl {material}\n"
        "Ka 1.000000 1.000000 1.000000\n"
        "Kd 0.800000 0.800000 0.800000\n"
        "Ks 0.000000 0.000000 0.000000\n"
        "d 1.000000\n"
        "illum 1\n"
    )


def export_obj(mesh: IndexedMesh, name: str = "asset") -> tuple[str, str]:
    """Serialize to (obj_text, mtl_text); byte-deterministic for equal input.

    Vertex lines carry the 6-float color extension (`v x y z r g b`), faces
    reference per-vertex normals (`f i//i ...`, 1-based). Requires a
    non-empty mesh with normals computed.
    """
    if mesh.vertex_count == 0 or mesh.triangle_count == 0:
        raise EmptyMesh("cannot export a mesh without vertices and triangles")
    if mesh.normals is None:
        raise ValueError("normals must be computed before export")
    lines = [f"mtllib {name}.mtl", f"o {name}", f"usemtl {DEFAULT_MATERIAL}"]
    for p, c in zip(mesh.positions, mesh.colors):
        lines.append("v %.6f %.6f %.6f %.6f %.6f %.6f"
                     % (p[0], p[1], p[2], c[0], c[1], c[2]))
    for v in mesh.normals:
        lines.append("vn %.6f %.6f %.6f" % (v[0], v[1], v[2]))
    for a, b, c in np.asarray(mesh.triangles) + 1:
        lines.append(f"f {a}//{a} {b}//{b} {c}//{c}")
    return "\n".join(lines) + "\n", make_mtl_text()


def _parse_floats(parts: list[str], line_no: int) -> list[float]:
    try:
        return [float(x) for x in parts]
    except ValueError as exc:
        raise ParseError(line_no, f"bad float: {exc}") from exc


def _parse_face_token(token: str, line_no: int) -> tuple[int, int | None]:
    """One face reference: v, v/vt, v//vn, or v/vt/vn; returns (v, vn or None)."""
    fields = token.split("/")
    if len(fields) > 3 or not fields[0]:
        raise ParseError(line_no, f"bad face reference {token!r}")
    try:
        v = int(fields[0])
        vn = int(fields[2]) if len(fields) == 3 and fields[2] else None
    except ValueError as exc:
        raise ParseError(line_no, f"bad face reference {token!r}: {exc}") from exc
    return v, vn


def import_obj(obj_text: str) -> IndexedMesh:
    """Parse OBJ text into an IndexedMesh.

    Supports `v` with 3 or 6 floats (missing colors default to white), `vn`,
    and `f` in v / v/vt / v//vn / v/vt/vn forms. Faces with more than three
    vertices are fan-triangulated from their first vertex. Unknown keywords
    are ignored.
    """
    positions: list[list[float]] = []
    colors: list[list[float]] = []
    obj_normals: list[list[float]] = []
    faces: list[tuple[list[tuple[int, int | None]], int]] = []

    for line_no, raw in enumerate(obj_text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        keyword = parts[0]
        if keyword == "v":
            vals = _parse_floats(parts[1:], line_no)
            if len(vals) == 3:
                positions.append(vals)
                colors.append([1.0, 1.0, 1.0])
            elif len(vals) == 6:
                positions.append(vals[:3])
                colors.append(vals[3:])
            else:
                raise ParseError(line_no, f"vertex needs 3 or 6 floats, got {len(vals)}")
        elif keyword == "vn":
            vals = _parse_floats(parts[1:], line_no)
            if len(vals) != 3:
                raise ParseError(line_no, f"normal needs 3 floats, got {len(vals)}")
            obj_normals.append(vals)
        elif keyword == "f":
            refs = [_parse_face_token(tok, line_no) for tok in parts[1:]]
            if len(refs) < 3:
                raise ParseError(line_no, f"face needs >= 3 vertices, got {len(refs)}")
            faces.append((refs, line_no))
        # other keywords (mtllib, usemtl, o, g, s, vt, ...) are ignored

    v_count = len(positions)
    n_count = len(obj_normals)
    triangles: list[list[int]] = []
    normal_refs: list[tuple[int, int]] = []  # (vertex, normal), both 0-based
    any_normal_ref = False
    for refs, line_no in faces:
        resolved = []
        for v, vn in refs:
            if not (1 <= v <= v_count):
                raise IndexOutOfRange(line_no, f"vertex index {v} of {v_count}")
            if vn is not None:
                if not (1 <= vn <= n_count):
                    raise IndexOutOfRange(line_no, f"normal index {vn} of {n_count}")
                normal_refs.append((v - 1, vn - 1))
                any_normal_ref = True
            resolved.append(v - 1)
        for k in range(1, len(resolved) - 1):
            triangles.append([resolved[0], resolved[k], resolved[k + 1]])

    normals = None
    if any_normal_ref:
        normals_arr = np.tile(np.array([0.0, 0.0, 1.0]), (v_count, 1))
        src = np.asarray(obj_normals)
        for v_idx, n_idx in normal_refs:
            normals_arr[v_idx] = src[n_idx]
        normals = normals_arr

    return IndexedMesh(
        positions=np.asarray(positions, dtype=np.float64).reshape(v_count, 3),
        triangles=np.asarray(triangles, dtype=np.int64).reshape(len(triangles), 3),
        colors=np.asarray(colors, dtype=np.float64).reshape(v_count, 3),
        normals=normals,
    )
