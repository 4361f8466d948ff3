"""meshforge: sketch + prompt to textured 3D mesh, with deterministic mocks."""

from .assets import AssetBundle, build_asset_bundle, parse_manifest, verify_bundle, write_manifest
from .config import GenerationConfig, ServiceConfig, load_service_config
from .control import (
    CandidateImage,
    ControlRequest,
    build_control_request,
    canny_edges,
    remove_background,
)
from .distance import edt_2d, edt_2d_squared
from .extract import extract_mesh
from .fields import ReconstructionField, trilinear_sample
from .gateway import (
    BackendEndpoint,
    Gateway,
    MeshPassthrough,
    infer_candidates,
    reconstruct,
    silhouette_extrude,
)
from .meshops import (
    IndexedMesh,
    TopologyReport,
    analyze_topology,
    compute_vertex_normals,
    normalize_bounds,
    weld_vertices,
)
from .objio import export_obj, import_obj
from .pipeline import SessionRecord, SessionState, attach_sketch, run_pipeline
from .sketch import SketchCanvas, Stroke, parse_sketch, rasterize_scribble, serialize_sketch
from .triplane import (
    DecoderHeads,
    Triplane,
    bake_field,
    decode_point,
    load_weights,
    random_heads,
    random_triplane,
    sample_triplane,
    sample_triplane_grad,
    save_weights,
)

__version__ = "0.1.0"

__all__ = [
    "AssetBundle", "BackendEndpoint", "CandidateImage", "ControlRequest",
    "DecoderHeads", "Gateway", "GenerationConfig", "IndexedMesh",
    "MeshPassthrough", "ReconstructionField", "ServiceConfig", "SessionRecord",
    "SessionState", "SketchCanvas", "Stroke", "TopologyReport", "Triplane",
    "analyze_topology", "attach_sketch", "bake_field", "build_asset_bundle",
    "build_control_request", "canny_edges", "compute_vertex_normals",
    "decode_point", "edt_2d", "edt_2d_squared", "export_obj", "extract_mesh",
    "import_obj", "infer_candidates", "load_service_config", "load_weights",
    "normalize_bounds", "parse_manifest", "parse_sketch", "random_heads",
    "random_triplane", "rasterize_scribble", "reconstruct", "remove_background",
    "run_pipeline", "sample_triplane", "sample_triplane_grad", "save_weights",
    "serialize_sketch", "silhouette_extrude", "trilinear_sample", "verify_bundle",
    "weld_vertices", "write_manifest",
]
