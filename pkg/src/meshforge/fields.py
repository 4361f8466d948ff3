"""Reconstruction field grids: SDF, color, and extraction weights on [-1,1]^3."""

from __future__ import annotations

import base64
from dataclasses import dataclass

import numpy as np

from .errors import BackendProtocolError, InvalidResolution, OutOfDomain

MIN_RESOLUTION = 2
MAX_RESOLUTION = 256


def check_resolution(n: int):
    if not (MIN_RESOLUTION <= n <= MAX_RESOLUTION):
        raise InvalidResolution(f"resolution must be in [{MIN_RESOLUTION}, {MAX_RESOLUTION}], got {n}")


def corner_coords(n: int) -> np.ndarray:
    """The n+1 corner coordinates per axis of the [-1, 1] lattice."""
    return np.linspace(-1.0, 1.0, n + 1)


@dataclass
class ReconstructionField:
    """Grids bridging backend reconstruction and mesh extraction.

    Arrays are indexed [ix, iy, iz] over the corner lattice of a cubical grid
    with `resolution` cells per axis spanning [-1, 1]^3. `beta_x/y/z` hold
    per-edge weights for edges along each axis; `gamma` is per-cell.
    """

    resolution: int
    sdf: np.ndarray      # (N+1, N+1, N+1)
    color: np.ndarray    # (N+1, N+1, N+1, 3), values in [0, 1]
    alpha: np.ndarray    # (N+1, N+1, N+1), > 0
    beta_x: np.ndarray   # (N, N+1, N+1), > 0
    beta_y: np.ndarray   # (N+1, N, N+1), > 0
    beta_z: np.ndarray   # (N+1, N+1, N), > 0
    gamma: np.ndarray    # (N, N, N), in [0, 1]

    def validate(self) -> "ReconstructionField":
        n = self.resolution
        check_resolution(n)
        c = n + 1
        expected = {
            "sdf": (c, c, c), "color": (c, c, c, 3), "alpha": (c, c, c),
            "beta_x": (n, c, c), "beta_y": (c, n, c), "beta_z": (c, c, n),
            "gamma": (n, n, n),
        }
        for name, shape in expected.items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
            if not np.isfinite(arr).all():
                raise ValueError(f"{name} contains non-finite values")
        if not (self.alpha > 0).all():
            raise ValueError("alpha must be strictly positive")
        for name in ("beta_x", "beta_y", "beta_z"):
            if not (getattr(self, name) > 0).all():
                raise ValueError(f"{name} must be strictly positive")
        if self.color.min() < 0 or self.color.max() > 1:
            raise ValueError("color values must lie in [0, 1]")
        if self.gamma.min() < 0 or self.gamma.max() > 1:
            raise ValueError("gamma values must lie in [0, 1]")
        return self

    @classmethod
    def with_unit_weights(cls, sdf: np.ndarray,
                          color: np.ndarray | None = None) -> "ReconstructionField":
        """Field with alpha = beta = 1 and gamma = 0.5 (neutral extraction weights)."""
        n = sdf.shape[0] - 1
        c = n + 1
        if color is None:
            color = np.full((c, c, c, 3), 0.5)
        return cls(
            resolution=n,
            sdf=np.asarray(sdf, dtype=np.float64),
            color=np.asarray(color, dtype=np.float64),
            alpha=np.ones((c, c, c)),
            beta_x=np.ones((n, c, c)),
            beta_y=np.ones((c, n, c)),
            beta_z=np.ones((c, c, n)),
            gamma=np.full((n, n, n), 0.5),
        )


def trilinear_sample(grid: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Trilinear interpolation of a corner-lattice grid over [-1, 1]^3.

    `grid` is (M, M, M) or (M, M, M, C) indexed [ix, iy, iz]; `points` is
    (..., 3). Points outside the domain raise OutOfDomain.
    """
    pts = np.asarray(points, dtype=np.float64)
    if np.abs(pts).max(initial=0.0) > 1.0 + 1e-12:
        raise OutOfDomain("sample point outside [-1, 1]^3")
    m = grid.shape[0]
    u = np.clip((pts + 1.0) * 0.5 * (m - 1), 0.0, m - 1)
    i0 = np.minimum(u.astype(np.int64), m - 2)
    t = u - i0
    ix, iy, iz = i0[..., 0], i0[..., 1], i0[..., 2]
    tx, ty, tz = t[..., 0], t[..., 1], t[..., 2]
    if grid.ndim == 4:
        tx, ty, tz = tx[..., None], ty[..., None], tz[..., None]

    def g(dx, dy, dz):
        return grid[ix + dx, iy + dy, iz + dz]

    c00 = g(0, 0, 0) * (1 - tx) + g(1, 0, 0) * tx
    c10 = g(0, 1, 0) * (1 - tx) + g(1, 1, 0) * tx
    c01 = g(0, 0, 1) * (1 - tx) + g(1, 0, 1) * tx
    c11 = g(0, 1, 1) * (1 - tx) + g(1, 1, 1) * tx
    c0 = c00 * (1 - ty) + c10 * ty
    c1 = c01 * (1 - ty) + c11 * ty
    return c0 * (1 - tz) + c1 * tz


# --- wire codec ---
# Grids travel as base64 little-endian float32 with x the fastest-varying
# index; color is interleaved RGB per corner in the same corner order.

def _b64_f32(arr: np.ndarray, grid_order: str = "F") -> str:
    data = np.asarray(arr, dtype="<f4").ravel(order=grid_order).tobytes()
    return base64.b64encode(data).decode("ascii")


def _f32_b64(data: str, count: int, what: str) -> np.ndarray:
    try:
        raw = base64.b64decode(data, validate=True)
    except Exception as exc:
        raise BackendProtocolError(f"{what}: invalid base64: {exc}") from exc
    if len(raw) != count * 4:
        raise BackendProtocolError(f"{what}: expected {count * 4} bytes, got {len(raw)}")
    return np.frombuffer(raw, dtype="<f4").astype(np.float64)


def field_to_wire(field: ReconstructionField) -> dict:
    """Encode a field as the JSON-able `mode: fields` response body."""
    color_interleaved = np.stack(
        [field.color[..., i].ravel(order="F") for i in range(3)], axis=1)
    return {
        "mode": "fields",
        "n": field.resolution,
        "sdf": _b64_f32(field.sdf),
        "color": _b64_f32(color_interleaved, grid_order="C"),
        "alpha": _b64_f32(field.alpha),
        "beta_x": _b64_f32(field.beta_x),
        "beta_y": _b64_f32(field.beta_y),
        "beta_z": _b64_f32(field.beta_z),
        "gamma": _b64_f32(field.gamma),
    }


def field_from_wire(body: dict) -> ReconstructionField:
    """Decode a `mode: fields` response body; raises BackendProtocolError."""
    try:
        n = int(body["n"])
    except (KeyError, TypeError, ValueError) as exc:
        raise BackendProtocolError(f"missing or invalid field resolution: {exc}") from exc
    try:
        check_resolution(n)
    except InvalidResolution as exc:
        raise BackendProtocolError(str(exc)) from exc
    c = n + 1

    def grid(key: str, shape: tuple[int, ...]) -> np.ndarray:
        if key not in body:
            raise BackendProtocolError(f"missing field payload: {key!r}")
        flat = _f32_b64(body[key], int(np.prod(shape)), key)
        return flat.reshape(shape, order="F")

    sdf = grid("sdf", (c, c, c))
    alpha = grid("alpha", (c, c, c))
    beta_x = grid("beta_x", (n, c, c))
    beta_y = grid("beta_y", (c, n, c))
    beta_z = grid("beta_z", (c, c, n))
    gamma = grid("gamma", (n, n, n))
    if "color" not in body:
        raise BackendProtocolError("missing field payload: 'color'")
    color_flat = _f32_b64(body["color"], c * c * c * 3, "color").reshape(-1, 3)
    color = np.empty((c, c, c, 3))
    for i in range(3):
        color[..., i] = color_flat[:, i].reshape((c, c, c), order="F")

    field = ReconstructionField(resolution=n, sdf=sdf, color=color, alpha=alpha,
                                beta_x=beta_x, beta_y=beta_y, beta_z=beta_z, gamma=gamma)
    try:
        return field.validate()
    except ValueError as exc:
        raise BackendProtocolError(f"field payload invalid: {exc}") from exc
