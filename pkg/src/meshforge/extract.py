"""Weighted dual marching cubes: field grids to a textured triangle mesh."""

from __future__ import annotations

import numpy as np

from .fields import ReconstructionField, corner_coords, trilinear_sample
from .meshops import IndexedMesh

# Sign perturbation applied to samples exactly at the iso level, so every
# corner is strictly positive or strictly negative.
_ISO_EPS = 1e-12

# For an edge along axis a, the perpendicular axes in the order that makes
# the 4 incident cells wind counterclockwise around +a.
_PERP = {0: (1, 2), 1: (2, 0), 2: (0, 1)}

# Incident-cell offsets along (b, c), in CCW order around +a.
_CELL_OFFSETS = ((-1, -1), (0, -1), (0, 0), (-1, 0))


def _crossing_parameter(s0, s1, a0, a1):
    """Weighted interpolation parameter t along an edge with a sign change.

    Equals s0*a0 / (s0*a0 - s1*a1), computed via ratios so that multiplying
    all corner weights by a common constant cannot change the result.
    """
    return 1.0 / (1.0 - (s1 / s0) * (a1 / a0))


def extract_mesh(field: ReconstructionField, iso: float = 0.0) -> IndexedMesh:
    """Extract the iso-surface as a triangle mesh with per-vertex colors.

    One dual vertex is placed per cell containing edge crossings, at the
    edge-weighted mean of the cell's crossing points; each sign-changing
    interior lattice edge emits the quad of its 4 incident cells' vertices,
    split along its shorter diagonal and wound so triangle normals point
    from negative toward positive field values. An empty mesh is a valid
    result when no edge changes sign.
    """
    field.validate()
    n = field.resolution
    coords = corner_coords(n)
    s = field.sdf - iso
    s = np.where(s == 0.0, _ISO_EPS, s)
    neg = s < 0.0
    betas = (field.beta_x, field.beta_y, field.beta_z)

    n_cells = n ** 3
    weighted_pos = np.zeros((n_cells, 3))
    weight_sum = np.zeros(n_cells)
    per_axis = []  # (axis, low-corner index arrays, low-end-negative flags)

    for axis in range(3):
        take0 = [slice(None)] * 3
        take1 = [slice(None)] * 3
        take0[axis] = slice(0, n)
        take1[axis] = slice(1, n + 1)
        active = neg[tuple(take0)] != neg[tuple(take1)]
        low = list(np.nonzero(active))
        if low[0].size == 0:
            per_axis.append(None)
            continue
        high = list(low)
        high[axis] = low[axis] + 1
        s0 = s[tuple(low)]
        s1 = s[tuple(high)]
        a0 = field.alpha[tuple(low)]
        a1 = field.alpha[tuple(high)]
        t = _crossing_parameter(s0, s1, a0, a1)
        pos = np.stack([coords[low[0]], coords[low[1]], coords[low[2]]], axis=1)
        pos[:, axis] += t * (coords[high[axis]] - coords[low[axis]])
        beta = betas[axis][tuple(low)]

        b_ax, c_ax = _PERP[axis]
        for db, dc in _CELL_OFFSETS:
            cell = [None, None, None]
            cell[axis] = low[axis]
            cell[b_ax] = low[b_ax] + db
            cell[c_ax] = low[c_ax] + dc
            valid = ((cell[b_ax] >= 0) & (cell[b_ax] < n)
                     & (cell[c_ax] >= 0) & (cell[c_ax] < n))
            flat = (cell[0] + n * cell[1] + n * n * cell[2])[valid]
            np.add.at(weight_sum, flat, beta[valid])
            np.add.at(weighted_pos, flat, beta[valid, None] * pos[valid])
        per_axis.append((axis, low, neg[tuple(low)]))

    active_cells = np.nonzero(weight_sum > 0)[0]  # ascending = x-fastest scan order
    if active_cells.size == 0:
        return IndexedMesh.empty()
    vertex_pos = weighted_pos[active_cells] / weight_sum[active_cells, None]
    cell_to_vertex = np.full(n_cells, -1, dtype=np.int64)
    cell_to_vertex[active_cells] = np.arange(active_cells.size)

    tri_blocks = []
    for entry in per_axis:
        if entry is None:
            continue
        axis, low, low_neg = entry
        b_ax, c_ax = _PERP[axis]
        ib, ic = low[b_ax], low[c_ax]
        interior = (ib >= 1) & (ib <= n - 1) & (ic >= 1) & (ic <= n - 1)
        if not interior.any():
            continue
        ia = low[axis][interior]
        ibm = ib[interior]
        icm = ic[interior]
        low_neg_m = low_neg[interior]

        flats = []
        for db, dc in _CELL_OFFSETS:
            cell = [None, None, None]
            cell[axis] = ia
            cell[b_ax] = ibm + db
            cell[c_ax] = icm + dc
            flats.append(cell[0] + n * cell[1] + n * n * cell[2])
        quad_cells = np.stack(flats, axis=1)
        # CCW around +axis points triangle normals along +axis; reverse when
        # the field increases the other way.
        quad_cells = np.where(low_neg_m[:, None], quad_cells, quad_cells[:, ::-1])
        quad = cell_to_vertex[quad_cells]

        p0, p1, p2, p3 = (vertex_pos[quad[:, k]] for k in range(4))
        d02 = ((p0 - p2) ** 2).sum(axis=1)
        d13 = ((p1 - p3) ** 2).sum(axis=1)
        min_pos = np.argmin(quad_cells, axis=1)
        tie = d02 == d13
        use02 = (d02 < d13) | (tie & ((min_pos == 0) | (min_pos == 2)))

        tri_a = np.where(use02[:, None], quad[:, [0, 1, 2]], quad[:, [0, 1, 3]])
        tri_b = np.where(use02[:, None], quad[:, [0, 2, 3]], quad[:, [1, 2, 3]])
        block = np.empty((quad.shape[0] * 2, 3), dtype=np.int64)
        block[0::2] = tri_a
        block[1::2] = tri_b
        tri_blocks.append(block)

    triangles = (np.concatenate(tri_blocks, axis=0) if tri_blocks
                 else np.zeros((0, 3), dtype=np.int64))
    colors = trilinear_sample(field.color, np.clip(vertex_pos, -1.0, 1.0))
    return IndexedMesh(positions=vertex_pos, triangles=triangles,
                       colors=np.clip(colors, 0.0, 1.0))
