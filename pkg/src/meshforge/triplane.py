"""Triplane features, per-head decoders, and field baking onto the lattice."""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_RESOLUTION
from .errors import OutOfDomain
from .fields import ReconstructionField, check_resolution, corner_coords

WEIGHTS_MAGIC = b"MFWT"
WEIGHTS_VERSION = 1

# Axis pairs each plane projects onto: XY <- (x, y), XZ <- (x, z), YZ <- (y, z).
_PLANE_AXES = ((0, 1), (0, 2), (1, 2))

FLEX_ALPHA_CHANNELS = 4   # corner-weight offsets, positive-mapped
FLEX_BETA_CHANNELS = 3    # per-axis edge-weight offsets, positive-mapped
FLEX_OUTPUTS = FLEX_ALPHA_CHANNELS + FLEX_BETA_CHANNELS + 1  # + gamma in [0,1]

_POSITIVE_FLOOR = 1e-6


@dataclass(frozen=True)
class Triplane:
    """Three feature planes (XY, XZ, YZ), each R x R x C over [-1, 1]^2."""

    planes: np.ndarray  # (3, R, R, C)

    def __post_init__(self):
        if self.planes.ndim != 4 or self.planes.shape[0] != 3:
            raise ValueError(f"planes must be (3, R, R, C), got {self.planes.shape}")
        if self.planes.shape[1] != self.planes.shape[2]:
            raise ValueError("plane grids must be square")
        if self.planes.shape[1] < 2:
            raise ValueError("plane resolution must be >= 2")
        if not np.isfinite(self.planes).all():
            raise ValueError("plane features must be finite")

    @property
    def resolution(self) -> int:
        return self.planes.shape[1]

    @property
    def channels(self) -> int:
        return self.planes.shape[3]


@dataclass(frozen=True)
class HeadWeights:
    """One two-layer decoder: affine, elementwise max(0, .), affine."""

    w1: np.ndarray  # (C, hidden)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (hidden, out)
    b2: np.ndarray  # (out,)

    def forward(self, features: np.ndarray) -> np.ndarray:
        h = np.maximum(features @ self.w1 + self.b1, 0.0)
        return h @ self.w2 + self.b2


@dataclass(frozen=True)
class DecoderHeads:
    """The three field decoders: sdf (1 out), color (3 out), flex (8 out)."""

    sdf: HeadWeights
    color: HeadWeights
    flex: HeadWeights

    def __post_init__(self):
        for name, out in (("sdf", 1), ("color", 3), ("flex", FLEX_OUTPUTS)):
            head = getattr(self, name)
            if head.w2.shape[1] != out or head.b2.shape[0] != out:
                raise ValueError(f"{name} head must have {out} outputs")


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _softplus(x: np.ndarray) -> np.ndarray:
    # log(1 + e^x) computed stably; floored so the map is strictly positive
    # even where the exact value underflows.
    return np.logaddexp(0.0, x) + _POSITIVE_FLOOR


def _check_domain(points: np.ndarray) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.shape[-1] != 3:
        raise ValueError(f"points must have a trailing dimension of 3, got {pts.shape}")
    if pts.size and np.abs(pts).max() > 1.0 + 1e-12:
        raise OutOfDomain("point outside [-1, 1]^3")
    return pts


def _bilinear(plane: np.ndarray, u: np.ndarray, v: np.ndarray,
              want_grad: bool) -> tuple[np.ndarray, np.ndarray | None, np.ndarray | None]:
    """Bilinear sample of an (R, R, C) plane at domain coords (u, v) in [-1, 1]."""
    r = plane.shape[0]
    scale = (r - 1) / 2.0
    a = np.clip((u + 1.0) * scale, 0.0, r - 1)
    b = np.clip((v + 1.0) * scale, 0.0, r - 1)
    i0 = np.minimum(a.astype(np.int64), r - 2)
    j0 = np.minimum(b.astype(np.int64), r - 2)
    s = (a - i0)[..., None]
    t = (b - j0)[..., None]
    f00 = plane[i0, j0]
    f10 = plane[i0 + 1, j0]
    f01 = plane[i0, j0 + 1]
    f11 = plane[i0 + 1, j0 + 1]
    value = (f00 * (1 - s) * (1 - t) + f10 * s * (1 - t)
             + f01 * (1 - s) * t + f11 * s * t)
    if not want_grad:
        return value, None, None
    du = ((f10 - f00) * (1 - t) + (f11 - f01) * t) * scale
    dv = ((f01 - f00) * (1 - s) + (f11 - f10) * s) * scale
    return value, du, dv


def sample_triplane(tp: Triplane, points: np.ndarray) -> np.ndarray:
    """Sum of the three planes' bilinear samples at the projected coordinates.

    Accepts a single point (3,) or a batch (..., 3); returns (..., C).
    """
    pts = _check_domain(points)
    total = None
    for plane, (au, av) in zip(tp.planes, _PLANE_AXES):
        value, _, _ = _bilinear(plane, pts[..., au], pts[..., av], want_grad=False)
        total = value if total is None else total + value
    return total


def sample_triplane_grad(tp: Triplane, points: np.ndarray) -> np.ndarray:
    """Analytic Jacobian of sample_triplane: shape (..., C, 3).

    Piecewise-bilinear, so valid away from plane cell boundaries.
    """
    pts = _check_domain(points)
    c = tp.channels
    jac = np.zeros(pts.shape[:-1] + (c, 3))
    for plane, (au, av) in zip(tp.planes, _PLANE_AXES):
        _, du, dv = _bilinear(plane, pts[..., au], pts[..., av], want_grad=True)
        jac[..., au] += du
        jac[..., av] += dv
    return jac


def map_flex_outputs(raw: np.ndarray) -> np.ndarray:
    """Apply range maps to raw flex head outputs: 4 + 3 positive, 1 in [0, 1]."""
    mapped = np.empty_like(raw)
    k = FLEX_ALPHA_CHANNELS + FLEX_BETA_CHANNELS
    mapped[..., :k] = _softplus(raw[..., :k])
    mapped[..., k] = _sigmoid(raw[..., k])
    return mapped


def decode_point(tp: Triplane, heads: DecoderHeads,
                 points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Decode (sdf, rgb, flex) at one point or a batch of points.

    Returns sdf (...,), rgb (..., 3) in [0, 1], flex (..., 8) with positive
    alpha/beta channels and gamma in [0, 1].
    """
    features = sample_triplane(tp, points)
    sdf = heads.sdf.forward(features)[..., 0]
    rgb = _sigmoid(heads.color.forward(features))
    flex = map_flex_outputs(heads.flex.forward(features))
    return sdf, rgb, flex


def bake_field(tp: Triplane, heads: DecoderHeads,
               n: int = DEFAULT_RESOLUTION) -> ReconstructionField:
    """Evaluate the decoders on the (n+1)^3 corner lattice of [-1, 1]^3.

    Per-corner alpha averages the 4 alpha channels; per-edge beta averages
    the matching axis channel over edge endpoints; per-cell gamma averages
    the 8 cell corners.
    """
    check_resolution(n)
    coords = corner_coords(n)
    c = n + 1
    sdf = np.empty((c, c, c))
    color = np.empty((c, c, c, 3))
    flex = np.empty((c, c, c, FLEX_OUTPUTS))
    # decode one x-slab at a time to bound the feature batch size
    yy, zz = np.meshgrid(coords, coords, indexing="ij")
    for i, x in enumerate(coords):
        pts = np.stack([np.full_like(yy, x), yy, zz], axis=-1)
        s, rgb, fl = decode_point(tp, heads, pts)
        sdf[i] = s
        color[i] = rgb
        flex[i] = fl

    alpha = flex[..., :FLEX_ALPHA_CHANNELS].mean(axis=-1)
    bx = flex[..., FLEX_ALPHA_CHANNELS + 0]
    by = flex[..., FLEX_ALPHA_CHANNELS + 1]
    bz = flex[..., FLEX_ALPHA_CHANNELS + 2]
    beta_x = 0.5 * (bx[:-1, :, :] + bx[1:, :, :])
    beta_y = 0.5 * (by[:, :-1, :] + by[:, 1:, :])
    beta_z = 0.5 * (bz[:, :, :-1] + bz[:, :, 1:])
    g = flex[..., -1]
    gamma = (g[:-1, :-1, :-1] + g[1:, :-1, :-1] + g[:-1, 1:, :-1] + g[:-1, :-1, 1:]
             + g[1:, 1:, :-1] + g[1:, :-1, 1:] + g[:-1, 1:, 1:] + g[1:, 1:, 1:]) / 8.0
    return ReconstructionField(resolution=n, sdf=sdf, color=color, alpha=alpha,
                               beta_x=beta_x, beta_y=beta_y, beta_z=beta_z,
                               gamma=gamma).validate()


def random_triplane(seed: int, resolution: int = 64, channels: int = 16) -> Triplane:
    """Seeded random feature planes (toy stand-in for trained features)."""
    rng = np.random.default_rng(seed)
    planes = rng.normal(0.0, 0.5, size=(3, resolution, resolution, channels))
    return Triplane(planes=planes)


def random_heads(seed: int, channels: int = 16, hidden: int = 32) -> DecoderHeads:
    """Seeded random decoder heads with He-scaled first layers."""
    rng = np.random.default_rng(seed)

    def head(out: int) -> HeadWeights:
        return HeadWeights(
            w1=rng.normal(0.0, np.sqrt(2.0 / channels), size=(channels, hidden)),
            b1=np.zeros(hidden),
            w2=rng.normal(0.0, np.sqrt(1.0 / hidden), size=(hidden, out)),
            b2=np.zeros(out),
        )

    return DecoderHeads(sdf=head(1), color=head(3), flex=head(FLEX_OUTPUTS))


# --- weights container: magic, dims, then float32 LE payloads ---

def save_weights(tp: Triplane, heads: DecoderHeads) -> bytes:
    """Pack a triplane and its decoder heads into the versioned container."""
    out = [WEIGHTS_MAGIC, struct.pack("<III", WEIGHTS_VERSION, tp.resolution, tp.channels)]
    out.append(np.asarray(tp.planes, dtype="<f4").tobytes())
    for head in (heads.sdf, heads.color, heads.flex):
        n_in, hidden = head.w1.shape
        n_out = head.w2.shape[1]
        out.append(struct.pack("<III", n_in, hidden, n_out))
        for arr in (head.w1, head.b1, head.w2, head.b2):
            out.append(np.asarray(arr, dtype="<f4").tobytes())
    return b"".join(out)


def load_weights(data: bytes) -> tuple[Triplane, DecoderHeads]:
    """Parse the container written by save_weights."""
    if data[:4] != WEIGHTS_MAGIC:
        raise ValueError("not a weights container (bad magic)")
    version, r, c = struct.unpack_from("<III", data, 4)
    if version != WEIGHTS_VERSION:
        raise ValueError(f"unsupported weights version {version}")
    offset = 16

    def take(count: int) -> np.ndarray:
        nonlocal offset
        arr = np.frombuffer(data, dtype="<f4", count=count, offset=offset)
        offset += count * 4
        return arr.astype(np.float64)

    planes = take(3 * r * r * c).reshape(3, r, r, c)
    heads = []
    for _ in range(3):
        n_in, hidden, n_out = struct.unpack_from("<III", data, offset)
        offset += 12
        heads.append(HeadWeights(
            w1=take(n_in * hidden).reshape(n_in, hidden),
            b1=take(hidden),
            w2=take(hidden * n_out).reshape(hidden, n_out),
            b2=take(n_out),
        ))
    if offset != len(data):
        raise ValueError(f"trailing bytes in weights container: {len(data) - offset}")
    return Triplane(planes=planes), DecoderHeads(sdf=heads[0], color=heads[1], flex=heads[2])
