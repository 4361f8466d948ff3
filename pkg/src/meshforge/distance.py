"""Exact Euclidean distance transforms for binary rasters."""

from __future__ import annotations

import numpy as np

_INF = float("inf")


def _envelope_1d(f: list[float]) -> list[float]:
    """1D squared distance transform d[j] = min_q f[q] + (j - q)^2.

    Lower envelope of parabolas rooted at the finite entries of f. Entries of
    +inf contribute no parabola; an all-inf input yields an all-inf output.
    Results are exact for integer-valued f (sums of integers in float64).
    """
    n = len(f)
    v = [0] * n                 # sites of envelope parabolas
    z = [0.0] * (n + 1)         # boundaries between parabolas
    k = -1
    for q in range(n):
        fq = f[q]
        if fq == _INF:
            continue
        if k >= 0:
            s = ((fq + q * q) - (f[v[k]] + v[k] * v[k])) / (2 * (q - v[k]))
            while s <= z[k]:
                k -= 1
                if k < 0:
                    break
                s = ((fq + q * q) - (f[v[k]] + v[k] * v[k])) / (2 * (q - v[k]))
        if k < 0:
            k = 0
            v[0] = q
            z[0] = -_INF
            z[1] = _INF
        else:
            k += 1
            v[k] = q
            z[k] = s
            z[k + 1] = _INF
    if k < 0:
        return [_INF] * n
    d = [0.0] * n
    k = 0
    for j in range(n):
        while z[k + 1] < j:
            k += 1
        dj = j - v[k]
        d[j] = f[v[k]] + dj * dj
    return d


def edt_2d_squared(mask: np.ndarray) -> np.ndarray:
    """Exact squared Euclidean distance to the nearest True pixel.

    Two passes: a vertical scan produces per-column distances to the nearest
    foreground row, then a per-row lower-envelope pass combines them. Values
    are exact integers (in float64); +inf where the mask has no foreground.
    """
    mask = np.asarray(mask).astype(bool)
    if mask.ndim != 2 or mask.size == 0:
        raise ValueError(f"mask must be a non-empty 2D raster, got shape {mask.shape}")
    h, w = mask.shape
    g = np.full((h, w), _INF)
    g[mask] = 0.0
    for i in range(1, h):
        np.minimum(g[i], g[i - 1] + 1.0, out=g[i])
    for i in range(h - 2, -1, -1):
        np.minimum(g[i], g[i + 1] + 1.0, out=g[i])
    gsq = g * g
    out = np.empty((h, w))
    for i in range(h):
        out[i] = _envelope_1d(gsq[i].tolist())
    return out


def edt_2d(mask: np.ndarray) -> np.ndarray:
    """Exact Euclidean distance to the nearest True pixel (+inf if none)."""
    return np.sqrt(edt_2d_squared(mask))
