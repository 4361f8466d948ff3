"""Asset bundling: OBJ/MTL payloads plus the verifiable session manifest."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from .meshops import IndexedMesh
from .objio import export_obj, import_obj

MANIFEST_VERSION = 1
TIMING_KEYS = ("image_infer", "background_removal", "reconstruct", "extract",
               "package", "total")


@dataclass(frozen=True)
class AssetBundle:
    """Finished asset: OBJ/MTL text, manifest metadata, optional preview."""

    obj_text: str
    mtl_text: str
    manifest: dict
    preview_png: bytes | None = None


def sha256_hex(payload: str | bytes) -> str:
    data = payload.encode("utf-8") if isinstance(payload, str) else payload
    return hashlib.sha256(data).hexdigest()


def write_manifest(*, session_id: str, prompt: str, seed: int,
                   backend_ids: dict[str, str], counts: dict[str, int],
                   timings_ms: dict[str, float], sha256: dict[str, str],
                   budget_exceeded: bool = False) -> dict:
    """Assemble the versioned manifest document; every field re-derivable."""
    missing = [k for k in TIMING_KEYS if k not in timings_ms]
    if missing:
        raise ValueError(f"timings_ms missing stages: {missing}")
    manifest = {
        "version": MANIFEST_VERSION,
        "session_id": session_id,
        "prompt": prompt,
        "seed": seed,
        "backend_ids": dict(backend_ids),
        "counts": {"vertices": int(counts["vertices"]), "triangles": int(counts["triangles"])},
        "timings_ms": {k: float(timings_ms[k]) for k in TIMING_KEYS},
        "sha256": {"obj": sha256["obj"], "mtl": sha256["mtl"]},
    }
    if budget_exceeded:
        manifest["budget_exceeded"] = True
    return manifest


def manifest_json(manifest: dict) -> bytes:
    return (json.dumps(manifest, sort_keys=True, indent=2) + "\n").encode("utf-8")


def parse_manifest(data: bytes | str) -> dict:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return json.loads(data)


def build_asset_bundle(mesh: IndexedMesh, *, name: str, session_id: str, prompt: str,
                       seed: int, backend_ids: dict[str, str],
                       timings_ms: dict[str, float],
                       budget_exceeded: bool = False) -> AssetBundle:
    """Export a processed mesh and wrap it with its manifest."""
    obj_text, mtl_text = export_obj(mesh, name=name)
    manifest = write_manifest(
        session_id=session_id, prompt=prompt, seed=seed, backend_ids=backend_ids,
        counts={"vertices": mesh.vertex_count, "triangles": mesh.triangle_count},
        timings_ms=timings_ms,
        sha256={"obj": sha256_hex(obj_text), "mtl": sha256_hex(mtl_text)},
        budget_exceeded=budget_exceeded,
    )
    return AssetBundle(obj_text=obj_text, mtl_text=mtl_text, manifest=manifest)


def bundle_from_obj_text(obj_text: str, mtl_text: str, *, session_id: str, prompt: str,
                         seed: int, backend_ids: dict[str, str],
                         timings_ms: dict[str, float],
                         budget_exceeded: bool = False) -> AssetBundle:
    """Wrap backend-provided OBJ bytes unmodified (mesh pass-through mode)."""
    parsed = import_obj(obj_text)
    manifest = write_manifest(
        session_id=session_id, prompt=prompt, seed=seed, backend_ids=backend_ids,
        counts={"vertices": parsed.vertex_count, "triangles": parsed.triangle_count},
        timings_ms=timings_ms,
        sha256={"obj": sha256_hex(obj_text), "mtl": sha256_hex(mtl_text)},
        budget_exceeded=budget_exceeded,
    )
    return AssetBundle(obj_text=obj_text, mtl_text=mtl_text, manifest=manifest)


def verify_bundle(bundle: AssetBundle) -> bool:
    """Recompute hashes and counts from the payloads; True when all match."""
    m = bundle.manifest
    if m["sha256"]["obj"] != sha256_hex(bundle.obj_text):
        return False
    if m["sha256"]["mtl"] != sha256_hex(bundle.mtl_text):
        return False
    parsed = import_obj(bundle.obj_text)
    return (m["counts"]["vertices"] == parsed.vertex_count
            and m["counts"]["triangles"] == parsed.triangle_count)
