"""Cross-cutting infrastructure: PNG codec, in-flight caps, session eviction."""

import threading
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from fastapi import HTTPException

from meshforge.gateway import BackendEndpoint, Gateway
from meshforge.pngio import png_decode, png_encode
from meshforge.service import SessionStore


class TestPngCodec:
    @pytest.mark.parametrize("shape", [(16, 20), (16, 20, 3), (16, 20, 4)])
    def test_round_trip(self, shape):
        rng = np.random.default_rng(1)
        pixels = rng.integers(0, 256, size=shape, dtype=np.uint8)
        assert np.array_equal(png_decode(png_encode(pixels)), pixels)

    def test_mode_conversion(self):
        gray = np.full((8, 8), 100, dtype=np.uint8)
        rgba = png_decode(png_encode(gray), mode="RGBA")
        assert rgba.shape == (8, 8, 4)
        assert (rgba[..., 3] == 255).all()

    def test_rejects_non_uint8(self):
        with pytest.raises(ValueError):
            png_encode(np.zeros((4, 4), dtype=np.float64))

    def test_deterministic_bytes(self):
        rng = np.random.default_rng(2)
        pixels = rng.integers(0, 256, size=(32, 32, 3), dtype=np.uint8)
        assert png_encode(pixels) == png_encode(pixels)


class TestInflightCap:
    def test_gateway_limits_concurrent_calls(self, monkeypatch):
        import meshforge.gateway as gateway_mod

        active = 0
        peak = 0
        lock = threading.Lock()

        def slow_infer(req, ep):
            nonlocal active, peak
            with lock:
                active += 1
                peak = max(peak, active)
            time.sleep(0.05)
            with lock:
                active -= 1
            return []

        monkeypatch.setattr(gateway_mod, "infer_candidates", slow_infer)
        gw = Gateway(image=BackendEndpoint("image", "mock"),
                     recon=BackendEndpoint("reconstruct", "mock"), max_inflight=2)
        with ThreadPoolExecutor(max_workers=6) as pool:
            list(pool.map(lambda _: gw.infer_candidates(object()), range(6)))
        assert peak <= 2


class TestSessionEviction:
    def test_idle_sessions_evicted(self):
        store = SessionStore(ttl_s=0.05)
        stale = store.create()
        stale.updated_at = time.time() - 1.0
        store.evict_idle()
        with pytest.raises(HTTPException) as exc_info:
            store.get(stale.id)
        assert exc_info.value.status_code == 404

    def test_inflight_sessions_survive_eviction(self):
        from meshforge.pipeline import SessionState
        store = SessionStore(ttl_s=0.05)
        busy = store.create()
        busy.state = SessionState.RECONSTRUCTING
        busy.updated_at = time.time() - 1.0
        store.evict_idle()
        assert store.get(busy.id) is busy

    def test_fresh_sessions_survive(self):
        store = SessionStore(ttl_s=60.0)
        fresh = store.create()
        store.evict_idle()
        assert store.get(fresh.id) is fresh
