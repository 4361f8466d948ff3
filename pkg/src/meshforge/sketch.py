"""Sketch data model, interchange serialization, and scribble rasterization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDimensions, InvalidStroke, MalformedDocument, UnsupportedVersion

SKETCH_FORMAT_VERSION = 1
MIN_CANVAS_PX = 64

# Strokes thinner than one output pixel still mark the pixels they pass
# through; this is the minimum swept radius in output pixels.
HAIRLINE_RADIUS_PX = 0.5


@dataclass(frozen=True)
class Stroke:
    """One freehand stroke: >= 2 points in [0,1]^2, brush width, RGB color."""

    points: tuple[tuple[float, float], ...]
    width: float
    color: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if len(self.points) < 2:
            raise InvalidStroke(f"stroke needs >= 2 points, got {len(self.points)}")
        for x, y in self.points:
            if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
                raise InvalidStroke(f"point ({x}, {y}) outside [0,1]^2")
        if not self.width > 0:
            raise InvalidStroke(f"width must be > 0, got {self.width}")
        for c in self.color:
            if not (0.0 <= c <= 1.0):
                raise InvalidStroke(f"color component {c} outside [0,1]")


@dataclass(frozen=True)
class SketchCanvas:
    """Ordered strokes over a white reference raster of width_px x height_px."""

    width_px: int
    height_px: int
    strokes: tuple[Stroke, ...] = field(default_factory=tuple)

    def __post_init__(self):
        for name, value in (("width_px", self.width_px), ("height_px", self.height_px)):
            if not isinstance(value, int) or value < MIN_CANVAS_PX:
                raise MalformedDocument(f"{name} must be an integer >= {MIN_CANVAS_PX}, got {value!r}")


def parse_sketch(document: bytes | str) -> SketchCanvas:
    """Parse the versioned sketch interchange document into a validated canvas.

    Unknown top-level fields are ignored; unknown versions are rejected.
    """
    if isinstance(document, bytes):
        try:
            document = document.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedDocument(f"document is not valid UTF-8: {exc}") from exc
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedDocument("top-level value must be an object")

    version = doc.get("version")
    if version != SKETCH_FORMAT_VERSION:
        raise UnsupportedVersion(f"unsupported sketch format version: {version!r}")

    for key in ("width_px", "height_px", "strokes"):
        if key not in doc:
            raise MalformedDocument(f"missing required field {key!r}")
    width_px, height_px = doc["width_px"], doc["height_px"]
    if isinstance(width_px, bool) or isinstance(height_px, bool) or \
            not isinstance(width_px, int) or not isinstance(height_px, int):
        raise MalformedDocument("width_px and height_px must be integers")
    if not isinstance(doc["strokes"], list):
        raise MalformedDocument("strokes must be an array")

    strokes = []
    for i, raw in enumerate(doc["strokes"]):
        if not isinstance(raw, dict):
            raise MalformedDocument(f"stroke {i} must be an object")
        try:
            points = tuple((float(p[0]), float(p[1])) for p in raw["points"])
            width = float(raw["width"])
            color = tuple(float(c) for c in raw.get("color", (0.0, 0.0, 0.0)))
        except (KeyError, TypeError, IndexError, ValueError) as exc:
            raise MalformedDocument(f"stroke {i} malformed: {exc}") from exc
        if len(color) != 3:
            raise InvalidStroke(f"stroke {i} color must have 3 components")
        if any(len(p) != 2 for p in raw["points"]):
            raise InvalidStroke(f"stroke {i} has a point that is not a 2-vector")
        strokes.append(Stroke(points=points, width=width, color=color))  # validates

    return SketchCanvas(width_px=width_px, height_px=height_px, strokes=tuple(strokes))


def serialize_sketch(canvas: SketchCanvas) -> bytes:
    """Serialize a canvas; parse_sketch(serialize_sketch(c)) == c field-exactly."""
    doc = {
        "version": SKETCH_FORMAT_VERSION,
        "width_px": canvas.width_px,
        "height_px": canvas.height_px,
        "strokes": [
            {
                "points": [[x, y] for x, y in s.points],
                "width": s.width,
                "color": list(s.color),
            }
            for s in canvas.strokes
        ],
    }
    return json.dumps(doc, separators=(",", ":")).encode("utf-8")


def _paint_segment(black: np.ndarray, p0: np.ndarray, p1: np.ndarray, radius: float):
    """Mark pixels whose center lies within radius of segment p0-p1 (pixel coords)."""
    h, w = black.shape
    lo = np.floor(np.minimum(p0, p1) - radius - 1).astype(int)
    hi = np.ceil(np.maximum(p0, p1) + radius + 1).astype(int)
    x0, y0 = max(lo[0], 0), max(lo[1], 0)
    x1, y1 = min(hi[0], w), min(hi[1], h)
    if x0 >= x1 or y0 >= y1:
        return
    xs = np.arange(x0, x1) + 0.5
    ys = np.arange(y0, y1) + 0.5
    px, py = np.meshgrid(xs, ys)
    d = p1 - p0
    seg_len_sq = float(d @ d)
    if seg_len_sq == 0.0:
        dist_sq = (px - p0[0]) ** 2 + (py - p0[1]) ** 2
    else:
        t = ((px - p0[0]) * d[0] + (py - p0[1]) * d[1]) / seg_len_sq
        t = np.clip(t, 0.0, 1.0)
        dist_sq = (px - (p0[0] + t * d[0])) ** 2 + (py - (p0[1] + t * d[1])) ** 2
    black[y0:y1, x0:x1] |= dist_sq <= radius * radius


def rasterize_scribble(canvas: SketchCanvas, out_w: int, out_h: int) -> np.ndarray:
    """Render strokes as black swept disks on white; returns uint8 {0, 255}.

    Normalized coordinates scale to (out_w, out_h) pixel space with pixel
    centers at (col + 0.5, row + 0.5). Brush width scales by out_w / width_px.
    Stroke color is ignored here; scribble control images are binary.
    """
    if out_w < MIN_CANVAS_PX or out_h < MIN_CANVAS_PX:
        raise InvalidDimensions(f"output dims must be >= {MIN_CANVAS_PX}, got {out_w}x{out_h}")
    black = np.zeros((out_h, out_w), dtype=bool)
    scale = np.array([out_w, out_h], dtype=float)
    for stroke in canvas.strokes:
        radius = max(stroke.width * out_w / canvas.width_px / 2.0, HAIRLINE_RADIUS_PX)
        pts = [np.asarray(p, dtype=float) * scale for p in stroke.points]
        for p0, p1 in zip(pts[:-1], pts[1:]):
            _paint_segment(black, p0, p1, radius)
    img = np.full((out_h, out_w), 255, dtype=np.uint8)
    img[black] = 0
    return img
