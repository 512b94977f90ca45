"""Command-line entry points: train, serve, features."""

from __future__ import annotations

import json
import sys

import click

from .features import export_features
from .serve import serve
from .training import VARIANTS, TrainConfig, load_checkpoint, train


@click.group()
def main():
    """Image-translation network for the panoramic texture baker."""


@main.command("train")
@click.option("--partial", "partial_dir", required=True, type=click.Path(exists=True), help="bake output dir with frame_*.png/mask_*.png")
@click.option("--real", "real_dir", required=True, type=click.Path(exists=True), help="directory of real panoramas")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--variant", default="full", type=click.Choice(sorted(VARIANTS)))
@click.option("--epochs", default=50, type=int)
@click.option("--decay-epochs", default=12, type=int)
@click.option("--lr", default=2e-4, type=float)
@click.option("--ngf", default=64, type=int)
@click.option("--crop-w", default=128, type=int)
@click.option("--crop-h", default=64, type=int)
@click.option("--n-locations", default=256, type=int)
@click.option("--gan-mode", default="vanilla", type=click.Choice(["vanilla", "lsgan"]))
@click.option("--seed", default=0, type=int)
def train_cmd(partial_dir, real_dir, out_path, variant, epochs, decay_epochs, lr,
              ngf, crop_w, crop_h, n_locations, gan_mode, seed):
    """Train the translator on unpaired partial renders and real panoramas."""
    config = TrainConfig.for_variant(
        variant,
        epochs=epochs,
        decay_epochs=decay_epochs,
        lr=lr,
        ngf=ngf,
        crop_w=crop_w,
        crop_h=crop_h,
        n_locations=n_locations,
        gan_mode=gan_mode,
        seed=seed,
    )
    trainer = train(partial_dir, real_dir, config, out_path)
    first = trainer.history[0]["total"]
    last = trainer.history[-1]["total"]
    click.echo(json.dumps({
        "checkpoint": str(out_path),
        "variant": variant,
        "epochs": trainer.epoch,
        "steps": len(trainer.history),
        "first_total": first,
        "last_total": last,
    }, indent=2))


@main.command("serve")
@click.argument("checkpoint", type=click.Path(exists=True))
def serve_cmd(checkpoint):
    """Answer translation requests on stdin/stdout (wire protocol)."""
    generator, _ = load_checkpoint(checkpoint)
    serve(generator, sys.stdin.buffer, sys.stdout.buffer)


@main.command("features")
@click.option("--images", "image_dir", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--backbone", default="random", type=click.Choice(["random", "inception"]))
@click.option("--crop", default=None, help="facade band as top,bottom fractions, e.g. 0.25,0.625")
@click.option("--pattern", default=None, help="filename glob, e.g. generated_*.png")
def features_cmd(image_dir, out_path, backbone, crop, pattern):
    """Export per-image feature rows for the baker's FID evaluation."""
    band = None
    if crop:
        top, bottom = (float(tok) for tok in crop.split(","))
        band = (top, bottom)
    n = export_features(image_dir, out_path, backbone, band, pattern)
    click.echo(json.dumps({"images": n, "out": str(out_path), "backbone": backbone}))


if __name__ == "__main__":
    main()
