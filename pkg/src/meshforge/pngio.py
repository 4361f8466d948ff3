"""Thin PNG encode/decode helpers over Pillow for wire and asset payloads."""

from __future__ import annotations

import io

import numpy as np
from PIL import Image

_MODES = {1: "L", 3: "RGB", 4: "RGBA"}


def png_encode(pixels: np.ndarray) -> bytes:
    """Encode a uint8 array of shape (H,W), (H,W,3) or (H,W,4) as PNG bytes."""
    arr = np.ascontiguousarray(pixels)
    if arr.dtype != np.uint8:
        raise ValueError(f"expected uint8 pixels, got {arr.dtype}")
    channels = 1 if arr.ndim == 2 else arr.shape[2]
    mode = _MODES.get(channels)
    if mode is None or arr.ndim not in (2, 3):
        raise ValueError(f"unsupported pixel shape {arr.shape}")
    buf = io.BytesIO()
    Image.fromarray(arr, mode=mode).save(buf, format="PNG")
    return buf.getvalue()


def png_decode(data: bytes, mode: str | None = None) -> np.ndarray:
    """Decode PNG bytes to a uint8 array; optionally convert to L/RGB/RGBA."""
    img = Image.open(io.BytesIO(data))
    if mode is not None:
        img = img.convert(mode)
    return np.asarray(img)
