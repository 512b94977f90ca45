"""Iterative panoramic texture baking for urban meshes."""

from .atlas import (
    BLEND_MODES,
    Contributions,
    TextureAtlas,
    bilinear_sample,
    compute_weights,
    gather_contributions,
    update_atlas,
)
from .bridge import (
    CycleTranslator,
    ExecTranslator,
    IdentityTranslator,
    ProtocolError,
    TintStubTranslator,
    Translator,
    TranslatorError,
    make_translator,
    read_frame,
    serve_protocol,
    write_frame,
)
from .demo_scene import demo_scene_text, write_demo_scene
from .metrics import (
    CropSpec,
    FeatureSet,
    crop_facades,
    extract_features,
    frechet_distance,
    interframe_consistency,
    seam_metric,
)
from .panorama import PanoFrame, project, render_partial, unproject_dir
from .pipeline import PipelineConfig, run_ablation, run_pipeline
from .raycast import RayScene, cast_rays, set_worker_threads
from .scene import (
    Mesh,
    MeshParseError,
    StreetGraph,
    StreetParseError,
    TexelMap,
    build_texel_map,
    load_mesh,
    load_streets,
)
from .viewpath import Viewpoint, sample_viewpoints

__all__ = [
    "BLEND_MODES",
    "Contributions",
    "CropSpec",
    "CycleTranslator",
    "ExecTranslator",
    "FeatureSet",
    "IdentityTranslator",
    "Mesh",
    "MeshParseError",
    "PanoFrame",
    "PipelineConfig",
    "ProtocolError",
    "RayScene",
    "StreetGraph",
    "StreetParseError",
    "TexelMap",
    "TextureAtlas",
    "TintStubTranslator",
    "Translator",
    "TranslatorError",
    "Viewpoint",
    "bilinear_sample",
    "build_texel_map",
    "cast_rays",
    "compute_weights",
    "crop_facades",
    "demo_scene_text",
    "extract_features",
    "frechet_distance",
    "gather_contributions",
    "interframe_consistency",
    "load_mesh",
    "load_streets",
    "make_translator",
    "project",
    "read_frame",
    "render_partial",
    "run_ablation",
    "run_pipeline",
    "sample_viewpoints",
    "seam_metric",
    "serve_protocol",
    "set_worker_threads",
    "unproject_dir",
    "update_atlas",
    "write_demo_scene",
    "write_frame",
]
