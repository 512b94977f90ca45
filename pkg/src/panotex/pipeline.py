"""The iterative texturing loop: render, translate, propagate, evaluate."""

from __future__ import annotations

import dataclasses
import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import pngio
from .atlas import BLEND_MODES, TextureAtlas, gather_contributions, update_atlas
from .bridge import Translator, TranslatorError, make_translator
from .metrics import (
    CropSpec,
    FeatureSet,
    crop_facades,
    extract_features,
    frechet_distance,
    interframe_consistency,
    load_feature_file,
    seam_metric,
)
from .panorama import render_partial
from .raycast import RayScene, set_worker_threads
from .scene import Mesh, StreetGraph, build_texel_map
from .viewpath import sample_viewpoints


@dataclass
class PipelineConfig:
    pano_width: int = 512
    pano_height: int = 256
    spacing_m: float = 5.0
    height_m: float = 2.5
    atlas_size: int = 2048
    texels_per_m: float = 32.0
    blend_mode: str = "weighted"
    clamp_lo: float = 0.3
    clamp_hi: float = 0.7
    eps_vis_m: float = 0.05
    translator: str = "identity"
    channels: int = 3
    sun_dir: tuple = (1.0, 2.0, 1.0)
    ambient: float = 0.3
    output_dir: str = "out"
    seed: int = 0
    threads: int | None = None
    save_frames: bool = True
    start_iteration: int = 0

    def __post_init__(self):
        if self.blend_mode not in BLEND_MODES:
            raise ValueError(f"unknown blend mode {self.blend_mode!r}")
        if not (0.0 <= self.clamp_lo < self.clamp_hi <= 1.0):
            raise ValueError("need 0 <= clamp_lo < clamp_hi <= 1")
        for name in ("pano_width", "pano_height", "atlas_size"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.spacing_m <= 0 or self.texels_per_m <= 0 or self.eps_vis_m <= 0:
            raise ValueError("spacing_m, texels_per_m, eps_vis_m must be positive")
        if self.channels not in (3, 4):
            raise ValueError("channels must be 3 or 4")

    @classmethod
    def from_file(cls, path, **overrides) -> "PipelineConfig":
        data = json.loads(Path(path).read_text())
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        if "sun_dir" in data:
            data["sun_dir"] = tuple(data["sun_dir"])
        return cls(**data)

    def replace(self, **kwargs) -> "PipelineConfig":
        return dataclasses.replace(self, **kwargs)


def _atlas_state_path(out_dir: Path) -> Path:
    return out_dir / "atlas_state.npz"


def run_pipeline(
    mesh: Mesh,
    streets: StreetGraph,
    config: PipelineConfig,
    translator: Translator | None = None,
    real_features: FeatureSet | None = None,
    extractor: str = "builtin",
):
    """Run the full iterative loop; returns (atlas, report dict).

    Renders each viewpoint from the atlas state left by the previous
    iteration, translates it, and pools the result back into the atlas. On a
    translator transport error the partial atlas is saved, the failing
    iteration is recorded in the report, and the error re-raised.
    """
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    set_worker_threads(config.threads)

    own_translator = translator is None
    if translator is None:
        translator = make_translator(config.translator, config.channels)

    texel_map = build_texel_map(mesh, config.atlas_size, config.atlas_size)
    scene = RayScene.from_mesh(mesh)
    views = sample_viewpoints(streets, config.spacing_m, config.height_m)

    if config.start_iteration > 0:
        atlas = TextureAtlas.load_state(_atlas_state_path(out_dir))
        atlas.set_mode(config.blend_mode)
    else:
        atlas = TextureAtlas(
            config.atlas_size,
            config.atlas_size,
            mode=config.blend_mode,
            clamp_lo=config.clamp_lo,
            clamp_hi=config.clamp_hi,
        )

    report = {
        "consistency_per_iteration": [],
        "fid": None,
        "crop_fid": None,
        "seam": None,
        "iteration_times_s": [],
        "iterations": [],
        "mode": config.blend_mode,
        "failed_iteration": None,
    }
    generated_images: list[np.ndarray] = []

    try:
        for vp in views[config.start_iteration :]:
            t_start = time.perf_counter()
            frame = render_partial(
                scene,
                texel_map,
                atlas,
                vp,
                width=config.pano_width,
                height=config.pano_height,
                sun_dir=config.sun_dir,
                ambient=config.ambient,
                uv_corners=mesh.uv_corners,
            )
            request_pixels = translator.request_pixels(frame)
            try:
                out = translator.translate_pixels(request_pixels, frame.mask)
            except TranslatorError as exc:
                exc.iteration = vp.iteration
                report["failed_iteration"] = vp.iteration
                raise
            consistency = interframe_consistency(
                out, request_pixels[:, :, -3:], frame.mask
            )
            contributions = gather_contributions(out, frame, texel_map, config.eps_vis_m)
            update_atlas(atlas, contributions, vp.iteration)

            if config.save_frames:
                pngio.save_frame(out_dir, vp.iteration, frame, out)
            generated_images.append(out)
            report["consistency_per_iteration"].append(consistency)
            report["iterations"].append(vp.iteration)
            report["iteration_times_s"].append(time.perf_counter() - t_start)
    finally:
        pngio.save_atlas(out_dir / "atlas.png", atlas)
        atlas.save_state(_atlas_state_path(out_dir))
        if (atlas.contribution_count > 0).sum() >= 2:
            report["seam"] = seam_metric(atlas)
        if real_features is not None and generated_images:
            gen_feats = extract_features(generated_images, extractor)
            report["fid"] = frechet_distance(real_features, gen_feats)
            crops = [crop_facades(img, CropSpec()) for img in generated_images]
            crop_feats = extract_features(crops, extractor)
            report["crop_fid"] = frechet_distance(real_features, crop_feats)
        (out_dir / "report.json").write_text(json.dumps(report, indent=2) + "\n")
        if own_translator:
            translator.close()

    return atlas, report


def run_ablation(
    mesh: Mesh,
    streets: StreetGraph,
    config: PipelineConfig,
    translator_factory=None,
    real_features: FeatureSet | None = None,
    extractor: str = "builtin",
):
    """Bake under all three blend modes and compare.

    translator_factory() must yield a fresh translator per run so stateful
    translators (cycling stubs, external processes) restart identically.
    """
    if translator_factory is None:
        translator_factory = lambda: make_translator(config.translator, config.channels)

    out_root = Path(config.output_dir)
    results = {}
    for mode in BLEND_MODES:
        sub = config.replace(
            blend_mode=mode,
            output_dir=str(out_root / mode),
            start_iteration=0,
        )
        translator = translator_factory()
        try:
            _, report = run_pipeline(
                mesh, streets, sub, translator, real_features, extractor
            )
        finally:
            translator.close()
        results[mode] = {
            "seam": report["seam"],
            "fid": report["fid"],
            "crop_fid": report["crop_fid"],
            "consistency_per_iteration": report["consistency_per_iteration"],
        }

    seams = {m: results[m]["seam"] for m in BLEND_MODES}
    ordering_ok = None
    if all(s is not None for s in seams.values()):
        ordering_ok = bool(
            seams["weighted"] <= seams["average"] + 1e-12
            and seams["average"] <= seams["no_blend"] + 1e-12
        )
    report = {"modes": results, "seam_ordering_ok": ordering_ok}
    out_root.mkdir(parents=True, exist_ok=True)
    (out_root / "ablation_report.json").write_text(json.dumps(report, indent=2) + "\n")
    return report


def eval_feature_files(
    real_path,
    gen_path,
    real_crop_path=None,
    gen_crop_path=None,
) -> dict:
    """Frechet distances between externally produced feature files."""
    out = {
        "fid": frechet_distance(load_feature_file(real_path), load_feature_file(gen_path))
    }
    if real_crop_path and gen_crop_path:
        out["crop_fid"] = frechet_distance(
            load_feature_file(real_crop_path), load_feature_file(gen_crop_path)
        )
    else:
        out["crop_fid"] = None
    return out
