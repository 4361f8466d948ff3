"""Sketch model, interchange round-trips, and scribble rasterization."""

import json

import numpy as np
import pytest

from meshforge.errors import (
    InvalidDimensions,
    InvalidStroke,
    MalformedDocument,
    UnsupportedVersion,
)
from meshforge.sketch import (
    SketchCanvas,
    Stroke,
    parse_sketch,
    rasterize_scribble,
    serialize_sketch,
)


def make_doc(**overrides) -> bytes:
    doc = {
        "version": 1,
        "width_px": 256,
        "height_px": 256,
        "strokes": [{"points": [[0.1, 0.1], [0.9, 0.9]], "width": 4.0,
                     "color": [0.0, 0.0, 0.0]}],
    }
    doc.update(overrides)
    return json.dumps(doc).encode("utf-8")


class TestParse:
    def test_minimal_two_point_stroke(self):
        canvas = parse_sketch(make_doc())
        assert len(canvas.strokes) == 1
        assert canvas.strokes[0].points == ((0.1, 0.1), (0.9, 0.9))

    def test_empty_strokes_is_blank_canvas(self):
        canvas = parse_sketch(make_doc(strokes=[]))
        assert canvas.strokes == ()
        assert canvas.width_px == 256

    def test_coordinate_out_of_unit_square(self):
        bad = [{"points": [[1.2, 0.5], [0.5, 0.5]], "width": 1.0, "color": [0, 0, 0]}]
        with pytest.raises(InvalidStroke):
            parse_sketch(make_doc(strokes=bad))

    def test_nonpositive_width(self):
        bad = [{"points": [[0.1, 0.1], [0.2, 0.2]], "width": 0.0, "color": [0, 0, 0]}]
        with pytest.raises(InvalidStroke):
            parse_sketch(make_doc(strokes=bad))

    def test_single_point_stroke(self):
        bad = [{"points": [[0.1, 0.1]], "width": 1.0, "color": [0, 0, 0]}]
        with pytest.raises(InvalidStroke):
            parse_sketch(make_doc(strokes=bad))

    def test_color_out_of_range(self):
        bad = [{"points": [[0.1, 0.1], [0.2, 0.2]], "width": 1.0, "color": [0, 2, 0]}]
        with pytest.raises(InvalidStroke):
            parse_sketch(make_doc(strokes=bad))

    def test_unknown_version_rejected(self):
        with pytest.raises(UnsupportedVersion):
            parse_sketch(make_doc(version=2))

    def test_unknown_top_level_field_ignored(self):
        canvas = parse_sketch(make_doc(extra_field="ignored"))
        assert len(canvas.strokes) == 1

    def test_syntax_error(self):
        with pytest.raises(MalformedDocument):
            parse_sketch(b"{not json")

    def test_non_object_document(self):
        with pytest.raises(MalformedDocument):
            parse_sketch(b"[1, 2, 3]")

    def test_missing_field(self):
        doc = {"version": 1, "width_px": 256, "strokes": []}
        with pytest.raises(MalformedDocument):
            parse_sketch(json.dumps(doc).encode())

    def test_canvas_below_minimum(self):
        with pytest.raises(MalformedDocument):
            parse_sketch(make_doc(width_px=63, height_px=64))


class TestRoundTrip:
    def test_blank_canvas(self):
        canvas = SketchCanvas(width_px=128, height_px=96)
        assert parse_sketch(serialize_sketch(canvas)) == canvas

    def test_three_distinct_colors_field_exact(self):
        strokes = tuple(
            Stroke(points=((0.1 * (i + 1), 0.2), (0.3, 0.4 + 0.1 * i)),
                   width=1.5 + i, color=(0.1 * i, 0.5, 1.0 - 0.25 * i))
            for i in range(3)
        )
        canvas = SketchCanvas(width_px=1024, height_px=1024, strokes=strokes)
        assert parse_sketch(serialize_sketch(canvas)) == canvas

    def test_minimum_size_round_trips(self):
        canvas = SketchCanvas(width_px=64, height_px=64)
        assert parse_sketch(serialize_sketch(canvas)) == canvas

    def test_below_minimum_refused_on_reparse(self):
        canvas = SketchCanvas(width_px=64, height_px=64)
        doc = json.loads(serialize_sketch(canvas))
        doc["width_px"] = 63
        with pytest.raises(MalformedDocument):
            parse_sketch(json.dumps(doc).encode())

    def test_irrational_coordinates_exact(self):
        p = (1 / 3, 2 / 7)
        canvas = SketchCanvas(width_px=100, height_px=100, strokes=(
            Stroke(points=(p, (0.9999999, 1.0)), width=0.125),))
        assert parse_sketch(serialize_sketch(canvas)) == canvas


def hstroke_canvas(width=3.0, canvas_px=100):
    stroke = Stroke(points=((0.25, 0.5), (0.75, 0.5)), width=width)
    return SketchCanvas(width_px=canvas_px, height_px=canvas_px, strokes=(stroke,))


def black_bbox(img):
    """(x0, y0, x1, y1) half-open bbox of black pixels via direct pixel scan."""
    ys, xs = np.nonzero(img == 0)
    assert xs.size > 0, "expected black pixels"
    return int(xs.min()), int(ys.min()), int(xs.max()) + 1, int(ys.max()) + 1


class TestRasterize:
    def test_blank_canvas_all_white(self):
        img = rasterize_scribble(SketchCanvas(width_px=100, height_px=100), 100, 100)
        assert img.shape == (100, 100)
        assert (img == 255).all()

    def test_horizontal_band_oracle(self):
        # Pixel-count oracle over the output: the swept disk of a width-3
        # stroke across half a 100 px canvas.
        img = rasterize_scribble(hstroke_canvas(), 100, 100)
        assert set(np.unique(img)) <= {0, 255}
        x0, y0, x1, y1 = black_bbox(img)
        assert abs((x1 - x0) - 50) <= 2
        for col in range(x0, x1):
            rows = np.nonzero(img[:, col] == 0)[0]
            assert rows.size > 0
            assert rows.max() - rows.min() + 1 == rows.size  # contiguous run
            center = (rows.min() + rows.max() + 1) / 2
            assert abs(center - 50) <= 1.0

    def test_determinism(self):
        canvas = hstroke_canvas()
        a = rasterize_scribble(canvas, 128, 128)
        b = rasterize_scribble(canvas, 128, 128)
        assert a.tobytes() == b.tobytes()

    def test_monotonicity_adding_strokes(self):
        rng = np.random.default_rng(11)
        strokes = []
        prev_black = np.zeros((96, 96), dtype=bool)
        for _ in range(6):
            pts = tuple((float(x), float(y)) for x, y in rng.uniform(0.05, 0.95, (3, 2)))
            strokes.append(Stroke(points=pts, width=float(rng.uniform(1, 8))))
            canvas = SketchCanvas(width_px=96, height_px=96, strokes=tuple(strokes))
            black = rasterize_scribble(canvas, 96, 96) == 0
            assert (black | ~prev_black).all()  # no black pixel turned white
            prev_black = black

    def test_scale_covariance(self):
        rng = np.random.default_rng(23)
        for _ in range(5):
            pts = tuple((float(x), float(y)) for x, y in rng.uniform(0.15, 0.85, (4, 2)))
            canvas = SketchCanvas(width_px=128, height_px=128,
                                  strokes=(Stroke(points=pts, width=5.0),))
            b1 = np.array(black_bbox(rasterize_scribble(canvas, 128, 128)))
            b2 = np.array(black_bbox(rasterize_scribble(canvas, 256, 256)))
            assert np.abs(b2 - 2 * b1).max() <= 2  # 1 px in 1x units, per edge

    def test_hairline_stroke_visible(self):
        canvas = SketchCanvas(width_px=1024, height_px=1024, strokes=(
            Stroke(points=((0.2, 0.5), (0.8, 0.5)), width=1.0),))
        img = rasterize_scribble(canvas, 100, 100)
        assert (img == 0).any()

    def test_invalid_dimensions(self):
        with pytest.raises(InvalidDimensions):
            rasterize_scribble(SketchCanvas(width_px=100, height_px=100), 63, 100)
