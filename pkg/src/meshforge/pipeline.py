"""Session state machine and the staged sketch-to-asset pipeline."""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field
from enum import Enum

from .assets import AssetBundle, build_asset_bundle, bundle_from_obj_text
from .config import GenerationConfig
from .control import CandidateImage, build_control_request, remove_background
from .errors import MeshforgeError
from .extract import extract_mesh
from .fields import ReconstructionField
from .gateway import Gateway, MeshPassthrough
from .meshops import compute_vertex_normals, normalize_bounds, weld_vertices
from .objio import make_mtl_text
from .pngio import png_encode
from .sketch import SketchCanvas


class SessionState(str, Enum):
    CREATED = "Created"
    SKETCHED = "Sketched"
    INFERRING_IMAGES = "InferringImages"
    AWAITING_SELECTION = "AwaitingSelection"
    RECONSTRUCTING = "Reconstructing"
    DONE = "Done"
    FAILED = "Failed"


class IllegalTransition(MeshforgeError):
    """Requested operation is not legal in the session's current state."""


@dataclass
class SessionRecord:
    """One pipeline run: sketch, prompt, candidates, asset, stage timings."""

    id: str = field(default_factory=lambda: uuid.uuid4().hex)
    state: SessionState = SessionState.CREATED
    sketch: SketchCanvas | None = None
    prompt: str | None = None
    seed: int = 0
    candidate_count: int = 4
    candidates: list[CandidateImage] = field(default_factory=list)
    candidate_pngs: list[bytes] = field(default_factory=list)
    selected: int | None = None
    asset: AssetBundle | None = None
    timings_ms: dict[str, float] = field(default_factory=dict)
    error: dict | None = None
    created_at: float = field(default_factory=time.time)
    updated_at: float = field(default_factory=time.time)
    lock: threading.RLock = field(default_factory=threading.RLock, repr=False, compare=False)

    def touch(self):
        self.updated_at = time.time()

    def status_dict(self) -> dict:
        return {
            "session_id": self.id,
            "state": self.state.value,
            "prompt": self.prompt,
            "seed": self.seed,
            "candidate_count": len(self.candidates),
            "selected": self.selected,
            "timings_ms": dict(self.timings_ms),
            "error": self.error,
            "has_asset": self.asset is not None,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
        }


def attach_sketch(session: SessionRecord, canvas: SketchCanvas):
    """Set or replace the sketch; legal from Created, Sketched, AwaitingSelection."""
    with session.lock:
        allowed = (SessionState.CREATED, SessionState.SKETCHED,
                   SessionState.AWAITING_SELECTION)
        if session.state not in allowed:
            raise IllegalTransition(f"cannot attach sketch in state {session.state.value}")
        session.sketch = canvas
        session.candidates = []
        session.candidate_pngs = []
        session.selected = None
        session.asset = None
        session.error = None
        session.state = SessionState.SKETCHED
        session.touch()


def begin_generation(session: SessionRecord, prompt: str, seed: int | None = None,
                     candidate_count: int | None = None):
    """Claim the session for image generation; legal only from Sketched."""
    with session.lock:
        if session.state != SessionState.SKETCHED or session.sketch is None:
            raise IllegalTransition(f"cannot generate in state {session.state.value}")
        if candidate_count is not None and candidate_count < 1:
            raise ValueError(f"candidate count must be >= 1, got {candidate_count}")
        session.prompt = prompt
        if seed is not None:
            session.seed = seed
        if candidate_count is not None:
            session.candidate_count = candidate_count
        session.candidates = []
        session.candidate_pngs = []
        session.selected = None
        session.asset = None
        session.error = None
        session.timings_ms = {}
        session.state = SessionState.INFERRING_IMAGES
        session.touch()


def _fail(session: SessionRecord, stage: str, exc: Exception):
    with session.lock:
        session.state = SessionState.FAILED
        session.error = {"stage": stage, "message": str(exc)}
        session.touch()


def run_generation(session: SessionRecord, gateway: Gateway, cfg: GenerationConfig):
    """Sketched inputs to reviewed candidates: control prep, inference, matting.

    Must be entered through begin_generation. On stage failure the session
    moves to Failed with {stage, message}; earlier results are preserved.
    """
    assert session.state == SessionState.INFERRING_IMAGES
    run_cfg = cfg.with_overrides(seed=session.seed,
                                 candidate_count=session.candidate_count)
    stage = "image_infer"
    try:
        start = time.perf_counter()
        request = build_control_request(session.sketch, session.prompt, run_cfg)
        raw = gateway.infer_candidates(request)
        infer_ms = (time.perf_counter() - start) * 1000.0

        stage = "background_removal"
        start = time.perf_counter()
        matted = []
        pngs = []
        for cand in raw:
            rgba = remove_background(cand.rgb, tolerance=run_cfg.flood_tolerance,
                                     matting=gateway.matting)
            matted.append(CandidateImage.from_pixels(rgba, seed=cand.seed,
                                                     backend_id=cand.backend_id))
            pngs.append(png_encode(rgba))
        removal_ms = (time.perf_counter() - start) * 1000.0
    except Exception as exc:  # stage failures park the session in Failed
        _fail(session, stage, exc)
        return

    with session.lock:
        session.timings_ms["image_infer"] = infer_ms
        session.timings_ms["background_removal"] = removal_ms
        session.candidates = matted
        session.candidate_pngs = pngs
        session.state = SessionState.AWAITING_SELECTION
        session.touch()


def begin_selection(session: SessionRecord, index: int):
    """Claim the session for reconstruction of candidate `index`."""
    with session.lock:
        if session.state != SessionState.AWAITING_SELECTION:
            raise IllegalTransition(f"cannot select in state {session.state.value}")
        if not (0 <= index < len(session.candidates)):
            raise IndexError(f"candidate index {index} out of range "
                             f"(have {len(session.candidates)})")
        session.selected = index
        session.state = SessionState.RECONSTRUCTING
        session.touch()


def run_reconstruction(session: SessionRecord, gateway: Gateway, cfg: GenerationConfig):
    """Selected candidate to packaged asset: reconstruct, extract, export.

    Must be entered through begin_selection. A failure moves the session to
    Failed but keeps the candidate gallery intact for re-selection review.
    """
    assert session.state == SessionState.RECONSTRUCTING
    candidate = session.candidates[session.selected]
    stage = "reconstruct"
    try:
        start = time.perf_counter()
        result = gateway.reconstruct(candidate, cfg.resolution,
                                     thickness=cfg.extrude_thickness)
        reconstruct_ms = (time.perf_counter() - start) * 1000.0

        stage = "extract"
        start = time.perf_counter()
        passthrough_obj = None
        if isinstance(result, MeshPassthrough):
            passthrough_obj = result.obj_text
        else:
            assert isinstance(result, ReconstructionField)
            mesh = extract_mesh(result, iso=cfg.iso)
            mesh = weld_vertices(mesh, cfg.weld_eps)
            mesh = compute_vertex_normals(mesh)
            mesh = normalize_bounds(mesh, cfg.target_extent)
        extract_ms = (time.perf_counter() - start) * 1000.0

        stage = "package"
        start = time.perf_counter()
        with session.lock:
            timings = dict(session.timings_ms)
        timings["reconstruct"] = reconstruct_ms
        timings["extract"] = extract_ms
        timings["package"] = 0.0
        stage_keys = ("image_infer", "background_removal", "reconstruct", "extract", "package")
        common = dict(
            session_id=session.id,
            prompt=session.prompt or "",
            seed=session.seed,
            backend_ids=gateway.backend_ids(),
        )
        # package time covers export + hashing; measured, then folded in
        if passthrough_obj is not None:
            probe = bundle_from_obj_text(passthrough_obj, make_mtl_text(),
                                         timings_ms={**timings, "total": 0.0}, **common)
        else:
            probe = build_asset_bundle(mesh, name="mesh", timings_ms={**timings, "total": 0.0},
                                       **common)
        timings["package"] = (time.perf_counter() - start) * 1000.0
        timings["total"] = sum(timings[k] for k in stage_keys)
        budget_exceeded = timings["total"] > cfg.budget_ms
        manifest = dict(probe.manifest)
        manifest["timings_ms"] = {k: timings[k] for k in stage_keys + ("total",)}
        if budget_exceeded:
            manifest["budget_exceeded"] = True
        bundle = AssetBundle(obj_text=probe.obj_text, mtl_text=probe.mtl_text,
                             manifest=manifest, preview_png=probe.preview_png)
    except Exception as exc:
        _fail(session, stage, exc)
        return

    with session.lock:
        session.timings_ms = dict(manifest["timings_ms"])
        session.asset = bundle
        session.state = SessionState.DONE
        session.touch()


def run_pipeline(session: SessionRecord, gateway: Gateway, cfg: GenerationConfig,
                 select: int | str = "auto") -> SessionRecord:
    """Drive the full pipeline synchronously (headless / CLI path).

    The session must be Sketched with a prompt set (empty text allowed).
    `select` picks the reviewed candidate; "auto" takes candidate 0.
    """
    if session.prompt is None:
        raise IllegalTransition("prompt must be set before running the pipeline")
    begin_generation(session, session.prompt, session.seed, session.candidate_count)
    run_generation(session, gateway, cfg)
    if session.state != SessionState.AWAITING_SELECTION:
        return session
    index = 0 if select == "auto" else int(select)
    try:
        begin_selection(session, index)
    except IndexError as exc:
        _fail(session, "reconstruct", exc)
        return session
    run_reconstruction(session, gateway, cfg)
    return session
