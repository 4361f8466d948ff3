"""Generation and service configuration with file + environment overrides."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from pathlib import Path

ENV_PREFIX = "MESHFORGE_"

# Conditioning weights of the three control models driving image inference.
DEFAULT_WEIGHTS = {"scribble": 0.55, "canny": 0.05, "ip2p": 0.5}

# Field grid resolution (cells per axis) used for mesh extraction.
DEFAULT_RESOLUTION = 80

# Reference per-stage timings (ms) measured on the GPU-backed deployment the
# mock backends stand in for. Informational only; never asserted.
REFERENCE_IMAGE_INFER_MS = 3830
REFERENCE_MESH_RECON_MS = 12390

# Wall-clock budget for one full generation. Exceeding it flags the manifest
# with budget_exceeded; it is a monitoring threshold, not a failure.
DEFAULT_BUDGET_MS = 20000


@dataclass(frozen=True)
class GenerationConfig:
    """Tunable parameters for a single sketch-to-mesh run."""

    control_width: int = 512
    control_height: int = 512
    canny_sigma: float = 1.4
    canny_low: float = 50.0
    canny_high: float = 150.0
    weights: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))
    seed: int = 0
    candidate_count: int = 4
    flood_tolerance: int = 12
    resolution: int = DEFAULT_RESOLUTION
    iso: float = 0.0
    extrude_thickness: float = 0.35
    weld_eps: float = 1e-9
    target_extent: float = 1.0
    budget_ms: int = DEFAULT_BUDGET_MS

    def with_overrides(self, **kwargs) -> "GenerationConfig":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class ServiceConfig:
    """HTTP service settings: ports, backend endpoints, persistence."""

    host: str = "127.0.0.1"
    port: int = 8765
    image_backend: str = "mock"
    recon_backend: str = "mock"
    matting_backend: str = ""
    backend_timeout_s: float = 30.0
    retry_limit: int = 2
    max_inflight: int = 4
    persist_dir: str = ""
    shared_token: str = ""
    session_ttl_s: float = 3600.0
    generation: GenerationConfig = field(default_factory=GenerationConfig)


_GEN_FIELDS = {
    "control_width": int,
    "control_height": int,
    "canny_sigma": float,
    "canny_low": float,
    "canny_high": float,
    "seed": int,
    "candidate_count": int,
    "flood_tolerance": int,
    "resolution": int,
    "iso": float,
    "extrude_thickness": float,
    "weld_eps": float,
    "target_extent": float,
    "budget_ms": int,
}

_SERVICE_FIELDS = {
    "host": str,
    "port": int,
    "image_backend": str,
    "recon_backend": str,
    "matting_backend": str,
    "backend_timeout_s": float,
    "retry_limit": int,
    "max_inflight": int,
    "persist_dir": str,
    "shared_token": str,
    "session_ttl_s": float,
}


def parse_config_text(text: str) -> dict[str, str]:
    """Parse `key = value` lines; '#' starts a comment, blank lines ignored."""
    out: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line (expected key = value): {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def load_service_config(path: str | Path | None = None,
                        env: dict[str, str] | None = None) -> ServiceConfig:
    """Build a ServiceConfig from an optional key-value file plus env overrides.

    Environment variables use the MESHFORGE_ prefix with upper-cased keys,
    e.g. MESHFORGE_PORT=9000 or MESHFORGE_RESOLUTION=64.
    """
    env = os.environ if env is None else env
    values: dict[str, str] = {}
    if path is not None:
        values.update(parse_config_text(Path(path).read_text(encoding="utf-8")))
    for key in list(_SERVICE_FIELDS) + list(_GEN_FIELDS):
        env_key = ENV_PREFIX + key.upper()
        if env_key in env:
            values[key] = env[env_key]

    svc_kwargs = {}
    gen_kwargs = {}
    for key, value in values.items():
        if key in _SERVICE_FIELDS:
            svc_kwargs[key] = _SERVICE_FIELDS[key](value)
        elif key in _GEN_FIELDS:
            gen_kwargs[key] = _GEN_FIELDS[key](value)
        else:
            raise ValueError(f"unknown config key: {key}")
    return ServiceConfig(generation=GenerationConfig(**gen_kwargs), **svc_kwargs)
