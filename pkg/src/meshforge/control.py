"""Control-image preparation: canny edges, request assembly, background removal."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.ndimage as ndi

from .config import DEFAULT_WEIGHTS, GenerationConfig
from .errors import (
    InvalidSigma,
    InvalidThresholds,
    InvalidWeight,
    NoForeground,
)
from .sketch import SketchCanvas, rasterize_scribble

WEIGHT_KEYS = frozenset(DEFAULT_WEIGHTS)


@dataclass(frozen=True)
class ControlRequest:
    """Composed image-inference input: control images, prompt, weights, seed."""

    prompt: str
    negative_prompt: str | None
    scribble: np.ndarray
    canny: np.ndarray
    weights: dict[str, float]
    seed: int
    candidate_count: int
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.scribble.shape != self.canny.shape:
            raise ValueError(
                f"scribble {self.scribble.shape} and canny {self.canny.shape} dims differ")
        _validate_weights(self.weights)
        if self.candidate_count < 1:
            raise ValueError(f"candidate_count must be >= 1, got {self.candidate_count}")
        if self.seed < 0:
            raise ValueError(f"seed must be unsigned, got {self.seed}")


@dataclass(frozen=True)
class CandidateImage:
    """One matted inference result: RGBA pixels plus provenance and tight bbox."""

    pixels: np.ndarray  # (H, W, 4) uint8
    seed: int
    backend_id: str
    foreground_bbox: tuple[int, int, int, int]  # (x0, y0, x1, y1), half-open

    def __post_init__(self):
        if self.pixels.ndim != 3 or self.pixels.shape[2] != 4:
            raise ValueError(f"pixels must be (H, W, 4) RGBA, got {self.pixels.shape}")
        if not (self.pixels[..., 3] > 0).any():
            raise ValueError("candidate has no pixel with alpha > 0")
        if self.foreground_bbox != alpha_bbox(self.pixels[..., 3]):
            raise ValueError("foreground_bbox is not the tight alpha > 0 bounding box")

    @classmethod
    def from_pixels(cls, pixels: np.ndarray, seed: int, backend_id: str) -> "CandidateImage":
        return cls(pixels=pixels, seed=seed, backend_id=backend_id,
                   foreground_bbox=alpha_bbox(pixels[..., 3]))

    @property
    def rgb(self) -> np.ndarray:
        return self.pixels[..., :3]

    @property
    def alpha(self) -> np.ndarray:
        return self.pixels[..., 3]


def alpha_bbox(alpha: np.ndarray) -> tuple[int, int, int, int]:
    """Tight (x0, y0, x1, y1) half-open bounding box of alpha > 0 pixels."""
    ys, xs = np.nonzero(alpha > 0)
    if xs.size == 0:
        raise ValueError("no pixel with alpha > 0")
    return (int(xs.min()), int(ys.min()), int(xs.max()) + 1, int(ys.max()) + 1)


def canny_edges(image: np.ndarray, sigma: float = 1.4,
                low: float = 50.0, high: float = 150.0) -> np.ndarray:
    """Classic Canny on a grayscale raster; returns uint8 values in {0, 255}.

    Gaussian blur, Sobel gradients, non-maximum suppression along the
    quantized gradient direction (ties kept on both sides), then hysteresis
    on gradient magnitude normalized so its maximum is 255.
    """
    if not sigma > 0:
        raise InvalidSigma(f"sigma must be > 0, got {sigma}")
    if not (0 < low < high):
        raise InvalidThresholds(f"need 0 < low < high, got low={low} high={high}")
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"expected grayscale raster, got shape {img.shape}")

    blurred = ndi.gaussian_filter(img, sigma, mode="nearest")
    gx = ndi.sobel(blurred, axis=1, mode="nearest")
    gy = ndi.sobel(blurred, axis=0, mode="nearest")
    mag = np.hypot(gx, gy)
    peak = mag.max()
    if peak == 0.0:
        return np.zeros_like(img, dtype=np.uint8)
    mag *= 255.0 / peak

    nms = _nonmax_suppress(mag, gx, gy)
    strong = nms >= high
    weak = nms >= low
    edges = ndi.binary_propagation(strong, mask=weak, structure=np.ones((3, 3), bool))
    return np.where(edges, 255, 0).astype(np.uint8)


def quantize_direction(gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Quantize gradient direction to 4 bins: 0=E/W, 1=NE/SW, 2=N/S, 3=NW/SE."""
    angle = np.mod(np.arctan2(gy, gx), np.pi)
    return np.round(angle / (np.pi / 4)).astype(int) % 4


def _shift(a: np.ndarray, dy: int, dx: int) -> np.ndarray:
    """Array shifted so out[r, c] = a[r + dy, c + dx], zero beyond the border."""
    out = np.zeros_like(a)
    h, w = a.shape
    ys = slice(max(dy, 0), min(h + dy, h))
    xs = slice(max(dx, 0), min(w + dx, w))
    yd = slice(max(-dy, 0), min(h - dy, h))
    xd = slice(max(-dx, 0), min(w - dx, w))
    out[yd, xd] = a[ys, xs]
    return out


# Neighbor offsets (dy, dx) checked for each quantized direction bin.
_NMS_NEIGHBORS = {0: (0, 1), 1: (1, 1), 2: (1, 0), 3: (1, -1)}


def _nonmax_suppress(mag: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Zero pixels not locally maximal along their quantized gradient direction."""
    bins = quantize_direction(gx, gy)
    keep = np.zeros(mag.shape, dtype=bool)
    for b, (dy, dx) in _NMS_NEIGHBORS.items():
        fwd = _shift(mag, dy, dx)
        bwd = _shift(mag, -dy, -dx)
        keep |= (bins == b) & (mag >= fwd) & (mag >= bwd)
    return np.where(keep & (mag > 0), mag, 0.0)


def _validate_weights(weights: dict[str, float]):
    if set(weights) != WEIGHT_KEYS:
        raise InvalidWeight(
            f"weight keys must be exactly {sorted(WEIGHT_KEYS)}, got {sorted(weights)}")
    for key, value in weights.items():
        if not (0.0 <= value <= 1.0):
            raise InvalidWeight(f"weight {key}={value} outside [0, 1]")


def build_control_request(canvas: SketchCanvas, prompt: str,
                          cfg: GenerationConfig | None = None,
                          negative_prompt: str | None = None) -> ControlRequest:
    """Assemble the deterministic multi-condition inference request.

    The canny control image is computed from the rasterized scribble, the
    only image available before inference. An empty prompt is permitted and
    flagged in the request metadata.
    """
    cfg = cfg or GenerationConfig()
    weights = dict(DEFAULT_WEIGHTS)
    weights.update(cfg.weights)
    _validate_weights(weights)
    scribble = rasterize_scribble(canvas, cfg.control_width, cfg.control_height)
    canny = canny_edges(scribble, cfg.canny_sigma, cfg.canny_low, cfg.canny_high)
    metadata = {
        "empty_prompt": prompt == "",
        "stroke_colors": [list(s.color) for s in canvas.strokes],
    }
    return ControlRequest(
        prompt=prompt,
        negative_prompt=negative_prompt,
        scribble=scribble,
        canny=canny,
        weights=weights,
        seed=cfg.seed,
        candidate_count=cfg.candidate_count,
        metadata=metadata,
    )


def flood_background_mask(image: np.ndarray, tolerance: float) -> np.ndarray:
    """Background mask: border-connected flood over pixels near the border color.

    A pixel is floodable when its Chebyshev color distance to the per-channel
    median of the border pixels is <= tolerance; the flood (4-connected)
    starts from all floodable border pixels.
    """
    rgb = np.asarray(image, dtype=np.int32)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) RGB raster, got {rgb.shape}")
    border = np.concatenate([rgb[0], rgb[-1], rgb[:, 0], rgb[:, -1]])
    ref = np.median(border, axis=0)
    dist = np.abs(rgb - ref).max(axis=2)
    floodable = dist <= tolerance
    seeds = np.zeros(floodable.shape, dtype=bool)
    for sl in ((0, slice(None)), (-1, slice(None)), (slice(None), 0), (slice(None), -1)):
        seeds[sl] = floodable[sl]
    return ndi.binary_propagation(seeds, mask=floodable)


def remove_background(image: np.ndarray, tolerance: float = 12.0,
                      matting=None, fallback: bool = True) -> np.ndarray:
    """Matte an RGB raster to RGBA with binary alpha (foreground = 255).

    Built-in method: border flood fill (flood_background_mask). If `matting`
    is a configured external endpoint it is asked first and its alpha is
    binarized at 128; on failure the flood fallback applies unless disabled.
    """
    if matting is not None:
        from . import gateway  # late import; gateway depends on this module
        from .errors import BackendError, MattingBackendUnavailable
        try:
            rgba = gateway.request_matting(np.asarray(image, dtype=np.uint8), matting)
            alpha = np.where(rgba[..., 3] >= 128, 255, 0).astype(np.uint8)
            rgba = np.dstack([rgba[..., :3], alpha])
            if alpha.max() == 0:
                raise NoForeground("external matting returned an empty foreground")
            return rgba
        except BackendError as exc:
            if not fallback:
                raise MattingBackendUnavailable(str(exc)) from exc

    background = flood_background_mask(image, tolerance)
    alpha = np.where(background, 0, 255).astype(np.uint8)
    if alpha.max() == 0:
        raise NoForeground("every pixel is border-connected background")
    return np.dstack([np.asarray(image, dtype=np.uint8), alpha])
