"""Backend clients (image inference, reconstruction, matting) and their mocks."""

from __future__ import annotations

import base64
import colorsys
import hashlib
import threading
import time
from dataclasses import dataclass

import numpy as np
import requests

from .control import CandidateImage, ControlRequest
from .distance import edt_2d
from .errors import (
    BackendProtocolError,
    BackendRejected,
    BackendTimeout,
    EmptyForeground,
)
from .fields import ReconstructionField, check_resolution, corner_coords, field_from_wire
from .pngio import png_decode, png_encode

MOCK_URL = "mock"
RETRY_BACKOFF_S = 0.25
ENDPOINT_KINDS = ("image", "reconstruct", "matting")
TOKEN_HEADER = "X-Meshforge-Token"

DEFAULT_EXTRUDE_THICKNESS = 0.35


@dataclass(frozen=True)
class BackendEndpoint:
    """Addressing for one backend: kind, base URL (or "mock"), timeout, retries."""

    kind: str
    url: str
    timeout: float = 30.0
    retry_limit: int = 2
    token: str = ""

    def __post_init__(self):
        if self.kind not in ENDPOINT_KINDS:
            raise ValueError(f"kind must be one of {ENDPOINT_KINDS}, got {self.kind!r}")
        if not self.timeout > 0:
            raise ValueError(f"timeout must be > 0, got {self.timeout}")
        if not (0 <= self.retry_limit <= 5):
            raise ValueError(f"retry_limit must be in [0, 5], got {self.retry_limit}")

    @property
    def is_mock(self) -> bool:
        return self.url == MOCK_URL


@dataclass(frozen=True)
class MeshPassthrough:
    """Backend-native mesh response: OBJ bytes delivered as-is downstream."""

    obj_text: str


def _post_json(ep: BackendEndpoint, path: str, payload: dict) -> dict:
    """POST with fixed-backoff retries on transport errors; JSON in, JSON out."""
    url = ep.url.rstrip("/") + path
    headers = {TOKEN_HEADER: ep.token} if ep.token else {}
    attempts = ep.retry_limit + 1
    last_exc: Exception | None = None
    for attempt in range(attempts):
        try:
            resp = requests.post(url, json=payload, timeout=ep.timeout, headers=headers)
        except (requests.Timeout, requests.ConnectionError) as exc:
            last_exc = exc
            if attempt + 1 < attempts:
                time.sleep(RETRY_BACKOFF_S)
            continue
        if not (200 <= resp.status_code < 300):
            try:
                message = resp.json().get("error", resp.text)
            except ValueError:
                message = resp.text
            raise BackendRejected(f"{url} returned {resp.status_code}: {message}")
        try:
            body = resp.json()
        except ValueError as exc:
            raise BackendProtocolError(f"{url} returned non-JSON body") from exc
        if not isinstance(body, dict):
            raise BackendProtocolError(f"{url} returned a non-object body")
        return body
    raise BackendTimeout(f"{url} unreachable after {attempts} attempts") from last_exc


def _b64_png(pixels: np.ndarray) -> str:
    return base64.b64encode(png_encode(pixels)).decode("ascii")


def _png_b64(data: str, mode: str, what: str) -> np.ndarray:
    try:
        return png_decode(base64.b64decode(data, validate=True), mode=mode)
    except Exception as exc:
        raise BackendProtocolError(f"{what}: undecodable PNG payload: {exc}") from exc


def stable_hash64(prompt: str, n: int) -> int:
    """Platform-stable 64-bit hash of (prompt, n)."""
    payload = prompt.encode("utf-8") + b"\x00" + (n & (2 ** 64 - 1)).to_bytes(8, "little")
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


def _mock_candidates(req: ControlRequest) -> list[CandidateImage]:
    """Deterministic composite: sketch strokes over a hue-shaded radial blob.

    The hue comes from a stable hash of (prompt, seed + i), so candidates are
    pairwise distinct and byte-identical across runs for equal inputs.
    """
    h, w = req.scribble.shape
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    r = np.hypot(xx - (w - 1) / 2, yy - (h - 1) / 2) / (0.42 * min(w, h))
    blob = r <= 1.0
    shade = np.clip(1.0 - 0.55 * r * r, 0.0, 1.0)
    strokes = req.scribble == 0
    out = []
    for i in range(req.candidate_count):
        hue = stable_hash64(req.prompt, req.seed + i) / 2.0 ** 64
        base = colorsys.hsv_to_rgb(hue, 0.65, 0.9)
        img = np.full((h, w, 3), 245, dtype=np.uint8)
        for ch in range(3):
            channel = img[..., ch]
            channel[blob] = np.round(255.0 * base[ch] * shade[blob]).astype(np.uint8)
            channel[strokes] = np.uint8(round(255.0 * base[ch] * 0.25))
        pixels = np.dstack([img, np.full((h, w), 255, dtype=np.uint8)])
        out.append(CandidateImage.from_pixels(pixels, seed=req.seed + i, backend_id=MOCK_URL))
    return out


def infer_candidates(req: ControlRequest, ep: BackendEndpoint) -> list[CandidateImage]:
    """Run image inference; returns exactly req.candidate_count candidates."""
    if ep.kind != "image":
        raise ValueError(f"endpoint kind must be 'image', got {ep.kind!r}")
    if ep.is_mock:
        return _mock_candidates(req)
    payload = {
        "prompt": req.prompt,
        "negative_prompt": req.negative_prompt,
        "weights": dict(req.weights),
        "seed": req.seed,
        "count": req.candidate_count,
        "scribble_png": _b64_png(req.scribble),
        "canny_png": _b64_png(req.canny),
    }
    body = _post_json(ep, "/v1/images", payload)
    images = body.get("images")
    if not isinstance(images, list) or len(images) != req.candidate_count:
        got = len(images) if isinstance(images, list) else images
        raise BackendProtocolError(
            f"expected {req.candidate_count} images, got {got!r}")
    candidates = []
    for i, data in enumerate(images):
        pixels = _png_b64(data, mode="RGBA", what=f"images[{i}]")
        try:
            candidates.append(CandidateImage.from_pixels(
                pixels, seed=req.seed + i, backend_id=ep.url))
        except ValueError as exc:
            raise BackendProtocolError(f"images[{i}]: {exc}") from exc
    return candidates


def _sample_grid(img: np.ndarray, u: np.ndarray, v: np.ndarray,
                 outside_penalty: bool) -> np.ndarray:
    """Bilinear sample img at (row=v, col=u) grids, clamped at the frame.

    With outside_penalty, the Euclidean pixel distance from the clamp point
    is added (used to extend distance fields beyond the frame).
    """
    h, w = img.shape[:2]
    uu = np.clip(u, 0.0, w - 1.0)
    vv = np.clip(v, 0.0, h - 1.0)
    grid_u, grid_v = np.meshgrid(uu, vv, indexing="ij")
    j0 = np.minimum(grid_u.astype(np.int64), w - 2) if w > 1 else np.zeros_like(grid_u, np.int64)
    i0 = np.minimum(grid_v.astype(np.int64), h - 2) if h > 1 else np.zeros_like(grid_v, np.int64)
    s = np.clip(grid_u - j0, 0.0, 1.0)
    t = np.clip(grid_v - i0, 0.0, 1.0)
    if img.ndim == 3:
        s, t = s[..., None], t[..., None]
    j1 = np.minimum(j0 + 1, w - 1)
    i1 = np.minimum(i0 + 1, h - 1)
    val = (img[i0, j0] * (1 - s) * (1 - t) + img[i0, j1] * s * (1 - t)
           + img[i1, j0] * (1 - s) * t + img[i1, j1] * s * t)
    if outside_penalty:
        du = np.abs(u - uu)
        dv = np.abs(v - vv)
        pen_u, pen_v = np.meshgrid(du, dv, indexing="ij")
        val = val + np.hypot(pen_u, pen_v)
    return val


def silhouette_extrude(alpha_mask: np.ndarray, n: int,
                       thickness: float = DEFAULT_EXTRUDE_THICKNESS,
                       image: np.ndarray | None = None) -> ReconstructionField:
    """Deterministic reconstruction stand-in: extrude the silhouette into a slab.

    The signed 2D distance field (outside minus inside distance, from two
    exact distance transforms) is rescaled so the longer frame axis spans
    [-1, 1]; sdf(x, y, z) = max(d(x, y), |z| - thickness). Interior corners
    take their albedo from the candidate image; everything else is mid-gray.
    Extraction weights are neutral (alpha = beta = 1, gamma = 0.5).
    """
    check_resolution(n)
    if not (0.0 < thickness <= 1.0):
        raise ValueError(f"thickness must be in (0, 1], got {thickness}")
    mask = np.asarray(alpha_mask) > 0
    if mask.ndim != 2:
        raise ValueError(f"alpha mask must be 2D, got shape {mask.shape}")
    if not mask.any():
        raise EmptyForeground("alpha mask has no foreground pixel")

    hpx, wpx = mask.shape
    cap = float(hpx + wpx)  # distances beyond the frame scale never matter
    d_out = np.minimum(edt_2d(mask), cap)
    d_in = np.minimum(edt_2d(~mask), cap) if (~mask).any() else np.full(mask.shape, cap)
    d_pix = d_out - d_in

    scale = 2.0 / max(wpx, hpx)
    coords = corner_coords(n)
    u = coords / scale + (wpx - 1) / 2.0   # x -> column
    v = (hpx - 1) / 2.0 - coords / scale   # y -> row (y points up)
    d2d = _sample_grid(d_pix, u, v, outside_penalty=True) * scale  # [ix, iy]
    z_term = np.abs(coords) - thickness
    sdf = np.maximum(d2d[:, :, None], z_term[None, None, :])

    if image is None:
        albedo = np.full((n + 1, n + 1, 3), 0.5)
    else:
        rgb = np.asarray(image, dtype=np.float64)
        albedo = np.clip(_sample_grid(rgb, u, v, outside_penalty=False) / 255.0, 0.0, 1.0)
    color = np.where((sdf < 0)[..., None], albedo[:, :, None, :], 0.5)
    return ReconstructionField.with_unit_weights(sdf, color).validate()


def reconstruct(image: CandidateImage, ep: BackendEndpoint, n: int,
                thickness: float = DEFAULT_EXTRUDE_THICKNESS,
                ) -> ReconstructionField | MeshPassthrough:
    """Run mesh reconstruction on a matted candidate.

    Mock endpoints extrude the alpha silhouette; remote endpoints return
    either field grids or a pass-through mesh per their declared mode.
    """
    if ep.kind != "reconstruct":
        raise ValueError(f"endpoint kind must be 'reconstruct', got {ep.kind!r}")
    check_resolution(n)
    if not (image.alpha > 0).any():
        raise EmptyForeground("candidate image has no foreground")
    if ep.is_mock:
        return silhouette_extrude(image.alpha, n, thickness=thickness, image=image.rgb)
    body = _post_json(ep, "/v1/reconstruct",
                      {"image_png": _b64_png(image.pixels), "resolution": n})
    mode = body.get("mode")
    if mode == "fields":
        return field_from_wire(body)
    if mode == "mesh":
        try:
            return MeshPassthrough(base64.b64decode(body["obj"], validate=True).decode("utf-8"))
        except KeyError as exc:
            raise BackendProtocolError("mesh mode response missing 'obj'") from exc
        except Exception as exc:
            raise BackendProtocolError(f"undecodable OBJ payload: {exc}") from exc
    raise BackendProtocolError(f"unknown response mode: {mode!r}")


def request_matting(image_rgb: np.ndarray, ep: BackendEndpoint) -> np.ndarray:
    """Ask an external matting backend for RGBA; mock echoes opaque alpha."""
    if ep.kind != "matting":
        raise ValueError(f"endpoint kind must be 'matting', got {ep.kind!r}")
    if ep.is_mock:
        rgb = np.asarray(image_rgb, dtype=np.uint8)
        alpha = np.full(rgb.shape[:2], 255, dtype=np.uint8)
        return np.dstack([rgb, alpha])
    body = _post_json(ep, "/v1/matting", {"image_png": _b64_png(np.asarray(image_rgb, np.uint8))})
    if "image_png" not in body:
        raise BackendProtocolError("matting response missing 'image_png'")
    return _png_b64(body["image_png"], mode="RGBA", what="matting image")


class Gateway:
    """Shared client over the configured endpoints with an in-flight cap."""

    def __init__(self, image: BackendEndpoint, recon: BackendEndpoint,
                 matting: BackendEndpoint | None = None, max_inflight: int = 4):
        self.image = image
        self.recon = recon
        self.matting = matting
        self._semaphores = {
            kind: threading.BoundedSemaphore(max_inflight)
            for kind in ENDPOINT_KINDS
        }

    @classmethod
    def mock(cls) -> "Gateway":
        return cls(image=BackendEndpoint("image", MOCK_URL),
                   recon=BackendEndpoint("reconstruct", MOCK_URL))

    def infer_candidates(self, req: ControlRequest) -> list[CandidateImage]:
        with self._semaphores["image"]:
            return infer_candidates(req, self.image)

    def reconstruct(self, image: CandidateImage, n: int,
                    thickness: float = DEFAULT_EXTRUDE_THICKNESS):
        with self._semaphores["reconstruct"]:
            return reconstruct(image, self.recon, n, thickness=thickness)

    def backend_ids(self) -> dict[str, str]:
        ids = {"image": self.image.url, "reconstruct": self.recon.url}
        if self.matting is not None:
            ids["matting"] = self.matting.url
        return ids
