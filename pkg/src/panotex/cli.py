"""Command-line entry points: bake, ablate, eval, bake-demo."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .bridge import TranslatorError, make_translator
from .demo_scene import write_demo_scene
from .metrics import load_feature_file
from .pipeline import PipelineConfig, eval_feature_files, run_ablation, run_pipeline
from .scene import load_mesh, load_streets


def _load_config(config_path, **overrides) -> PipelineConfig:
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if config_path:
        return PipelineConfig.from_file(config_path, **overrides)
    return PipelineConfig(**overrides)


_common_options = [
    click.option("--mesh", "mesh_path", required=True, type=click.Path(exists=True)),
    click.option("--streets", "streets_path", required=True, type=click.Path(exists=True)),
    click.option("--config", "config_path", type=click.Path(exists=True)),
    click.option("--translator", "translator_spec", default=None, help="identity | stub | cycle:RRGGBB,.. | exec:<command>"),
    click.option("--out", "output_dir", default=None),
    click.option("--blend-mode", default=None, type=click.Choice(["no_blend", "average", "weighted"])),
    click.option("--atlas-size", default=None, type=int),
    click.option("--pano-width", default=None, type=int),
    click.option("--pano-height", default=None, type=int),
    click.option("--spacing", "spacing_m", default=None, type=float),
    click.option("--camera-height", "height_m", default=None, type=float),
    click.option("--eps-vis", "eps_vis_m", default=None, type=float),
    click.option("--channels", default=None, type=click.Choice(["3", "4"])),
    click.option("--threads", default=None, type=int),
    click.option("--no-frames", is_flag=True, default=False, help="skip per-iteration PNG export"),
    click.option("--real-feats", "real_feats", default=None, type=click.Path(exists=True), help="feature file of real panoramas for FID"),
    click.option("--extractor", default="builtin", help="builtin | file:<path> feature extractor for generated frames"),
]


def _with_common(fn):
    for opt in reversed(_common_options):
        fn = opt(fn)
    return fn


@click.group()
def main():
    """Iterative panoramic texture baking for urban meshes."""


@main.command()
@_with_common
@click.option("--start-iteration", default=0, type=int, help="resume a bake from this iteration")
def bake(mesh_path, streets_path, config_path, translator_spec, output_dir,
         blend_mode, atlas_size, pano_width, pano_height, spacing_m, height_m,
         eps_vis_m, channels, threads, no_frames, real_feats, extractor,
         start_iteration):
    """Texture a mesh by iterating over street viewpoints."""
    config = _load_config(
        config_path,
        translator=translator_spec,
        output_dir=output_dir,
        blend_mode=blend_mode,
        atlas_size=atlas_size,
        pano_width=pano_width,
        pano_height=pano_height,
        spacing_m=spacing_m,
        height_m=height_m,
        eps_vis_m=eps_vis_m,
        channels=int(channels) if channels else None,
        threads=threads,
        start_iteration=start_iteration or None,
    )
    if no_frames:
        config = config.replace(save_frames=False)
    mesh = load_mesh(Path(mesh_path).read_text())
    streets = load_streets(Path(streets_path).read_text())
    real = load_feature_file(real_feats) if real_feats else None
    try:
        _, report = run_pipeline(mesh, streets, config, real_features=real, extractor=extractor)
    except TranslatorError as exc:
        click.echo(f"translator failed at iteration {exc.iteration}: {exc}", err=True)
        click.echo(f"partial atlas saved under {config.output_dir}", err=True)
        sys.exit(2)
    click.echo(json.dumps(report, indent=2))


@main.command()
@_with_common
def ablate(mesh_path, streets_path, config_path, translator_spec, output_dir,
           blend_mode, atlas_size, pano_width, pano_height, spacing_m, height_m,
           eps_vis_m, channels, threads, no_frames, real_feats, extractor):
    """Bake under no_blend, average, and weighted and compare."""
    config = _load_config(
        config_path,
        translator=translator_spec,
        output_dir=output_dir,
        blend_mode=blend_mode,
        atlas_size=atlas_size,
        pano_width=pano_width,
        pano_height=pano_height,
        spacing_m=spacing_m,
        height_m=height_m,
        eps_vis_m=eps_vis_m,
        channels=int(channels) if channels else None,
        threads=threads,
    )
    if no_frames:
        config = config.replace(save_frames=False)
    mesh = load_mesh(Path(mesh_path).read_text())
    streets = load_streets(Path(streets_path).read_text())
    real = load_feature_file(real_feats) if real_feats else None

    def factory():
        return make_translator(config.translator, config.channels)

    report = run_ablation(mesh, streets, config, factory, real_features=real, extractor=extractor)
    click.echo(json.dumps(report, indent=2))


@main.command("eval")
@click.option("--real-feats", required=True, type=click.Path(exists=True))
@click.option("--gen-feats", required=True, type=click.Path(exists=True))
@click.option("--real-crop-feats", default=None, type=click.Path(exists=True))
@click.option("--gen-crop-feats", default=None, type=click.Path(exists=True))
def eval_cmd(real_feats, gen_feats, real_crop_feats, gen_crop_feats):
    """Frechet distance between two feature files."""
    out = eval_feature_files(real_feats, gen_feats, real_crop_feats, gen_crop_feats)
    click.echo(json.dumps(out, indent=2))


@main.command("bake-demo")
@click.option("--out", "output_dir", default="demo_scene")
@click.option("--seed", default=0, type=int)
@click.option("--texels-per-m", default=32.0, type=float)
@click.option("--atlas-size", default=2048, type=int)
def bake_demo(output_dir, seed, texels_per_m, atlas_size):
    """Generate the synthetic two-street demo scene (OBJ + streets JSON)."""
    mesh_path, street_path = write_demo_scene(
        output_dir, seed=seed, texels_per_m=texels_per_m, atlas_size=atlas_size
    )
    click.echo(json.dumps({"mesh": str(mesh_path), "streets": str(street_path)}))


if __name__ == "__main__":
    main()
