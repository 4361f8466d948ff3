"""Shared fixtures: sketch documents, analytic fields, reference meshes."""

from __future__ import annotations

import json

import numpy as np
import pytest

from meshforge.extract import extract_mesh
from meshforge.fields import ReconstructionField, corner_coords
from meshforge.sketch import parse_sketch


def circle_sketch_doc(width_px: int = 512, height_px: int = 512,
                      radius: float = 0.3, width: float = 6.0) -> bytes:
    ts = np.linspace(0.0, 2.0 * np.pi, 64)
    pts = [[0.5 + radius * np.cos(t), 0.5 + radius * np.sin(t)] for t in ts]
    doc = {
        "version": 1,
        "width_px": width_px,
        "height_px": height_px,
        "strokes": [{"points": pts, "width": width, "color": [0.8, 0.1, 0.1]}],
    }
    return json.dumps(doc).encode("utf-8")


def sphere_sdf_grid(n: int, radius: float = 0.35, centers=((0.0, 0.0, 0.0),)) -> np.ndarray:
    c = corner_coords(n)
    x, y, z = np.meshgrid(c, c, c, indexing="ij")
    sdf = np.full(x.shape, np.inf)
    for cx, cy, cz in centers:
        d = np.sqrt((x - cx) ** 2 + (y - cy) ** 2 + (z - cz) ** 2) - radius
        sdf = np.minimum(sdf, d)
    return sdf


def sphere_field(n: int, radius: float = 0.35,
                 centers=((0.0, 0.0, 0.0),)) -> ReconstructionField:
    return ReconstructionField.with_unit_weights(sphere_sdf_grid(n, radius, centers))


@pytest.fixture(scope="session")
def sphere_mesh_48():
    """The reference extraction fixture: radius 0.35 sphere at N = 48."""
    return extract_mesh(sphere_field(48))


@pytest.fixture()
def circle_canvas():
    return parse_sketch(circle_sketch_doc())
