"""Command-line entry points: headless pipeline runs and the HTTP service."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .assets import manifest_json
from .config import GenerationConfig, load_service_config
from .errors import MeshforgeError
from .gateway import BackendEndpoint, Gateway, MOCK_URL
from .pipeline import SessionRecord, SessionState, attach_sketch, run_pipeline
from .sketch import parse_sketch

USAGE_EXIT = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="meshforge",
        description="Turn a sketch document plus a text prompt into a textured OBJ asset.")
    parser.add_argument("--sketch", required=True, help="sketch interchange JSON file")
    parser.add_argument("--prompt", required=True, help="text prompt (may be empty)")
    parser.add_argument("--seed", type=int, default=0, help="generation seed (unsigned)")
    parser.add_argument("--backend", default=MOCK_URL,
                        help="image backend: 'mock' or an HTTP base URL")
    parser.add_argument("--recon", default=MOCK_URL,
                        help="reconstruction backend: 'mock' or an HTTP base URL")
    parser.add_argument("--resolution", type=int, default=80,
                        help="field grid cells per axis")
    parser.add_argument("--candidates", type=int, default=4,
                        help="number of candidate images to request")
    parser.add_argument("--select", default="auto",
                        help="candidate to reconstruct: 'auto' (first) or an index")
    parser.add_argument("--out", default="meshforge_out", help="output directory")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)

    if args.seed < 0:
        parser.exit(USAGE_EXIT, "meshforge: error: --seed must be unsigned\n")
    if args.candidates < 1:
        parser.exit(USAGE_EXIT, "meshforge: error: --candidates must be >= 1\n")
    if args.select != "auto":
        try:
            select = int(args.select)
        except ValueError:
            parser.exit(USAGE_EXIT, "meshforge: error: --select must be 'auto' or an index\n")
        if not (0 <= select < args.candidates):
            parser.exit(USAGE_EXIT,
                        f"meshforge: error: --select {select} out of range for "
                        f"{args.candidates} candidates\n")
    else:
        select = "auto"

    try:
        document = Path(args.sketch).read_bytes()
    except OSError as exc:
        parser.exit(USAGE_EXIT, f"meshforge: error: cannot read sketch: {exc}\n")
    try:
        canvas = parse_sketch(document)
    except MeshforgeError as exc:
        parser.exit(USAGE_EXIT, f"meshforge: error: bad sketch document: {exc}\n")

    gateway = Gateway(image=BackendEndpoint("image", args.backend),
                      recon=BackendEndpoint("reconstruct", args.recon))
    cfg = GenerationConfig(seed=args.seed, candidate_count=args.candidates,
                           resolution=args.resolution)

    session = SessionRecord()
    attach_sketch(session, canvas)
    session.prompt = args.prompt
    session.seed = args.seed
    session.candidate_count = args.candidates
    run_pipeline(session, gateway, cfg, select=select)

    out_dir = Path(args.out)
    candidates_dir = out_dir / "candidates"
    candidates_dir.mkdir(parents=True, exist_ok=True)
    for i, png in enumerate(session.candidate_pngs):
        (candidates_dir / f"candidate_{i}.png").write_bytes(png)

    if session.state != SessionState.DONE:
        error = session.error or {"stage": "unknown", "message": "pipeline did not finish"}
        print(f"meshforge: failed at {error['stage']}: {error['message']}", file=sys.stderr)
        return 1

    asset = session.asset
    (out_dir / "mesh.obj").write_text(asset.obj_text, encoding="utf-8")
    (out_dir / "material.mtl").write_text(asset.mtl_text, encoding="utf-8")
    (out_dir / "manifest.json").write_bytes(manifest_json(asset.manifest))

    t = session.timings_ms
    counts = asset.manifest["counts"]
    budget = "yes" if asset.manifest.get("budget_exceeded") else "no"
    print("state=Done "
          f"vertices={counts['vertices']} triangles={counts['triangles']} "
          f"image_infer={t['image_infer']:.1f}ms background_removal={t['background_removal']:.1f}ms "
          f"reconstruct={t['reconstruct']:.1f}ms extract={t['extract']:.1f}ms "
          f"package={t['package']:.1f}ms total={t['total']:.1f}ms budget_exceeded={budget}")
    return 0


def serve_main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="meshforge-serve", description="Run the meshforge HTTP service.")
    parser.add_argument("--config", default=None, help="key-value config file")
    parser.add_argument("--host", default=None, help="bind host (overrides config)")
    parser.add_argument("--port", type=int, default=None, help="bind port (overrides config)")
    args = parser.parse_args(argv)

    try:
        config = load_service_config(args.config)
    except (OSError, ValueError) as exc:
        parser.exit(USAGE_EXIT, f"meshforge-serve: error: {exc}\n")
    host = args.host if args.host is not None else config.host
    port = args.port if args.port is not None else config.port

    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(config), host=host, port=port, log_level="info")
    return 0


if __name__ == "__main__":
    sys.exit(main())
