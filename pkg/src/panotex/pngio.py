"""PNG export of panorama frames, masks, depth buffers, and the atlas.

Depth is stored as 16-bit fixed point at 1/256 m per unit (range 0..256 m);
background/infinite depth saturates to 65535. The atlas PNG is RGBA with
alpha=255 on texels that received at least one contribution, and is written
with row 0 at v=1 so standard OBJ viewers display it upright.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

DEPTH_SCALE = 256.0


def save_rgb(path, rgb: np.ndarray) -> None:
    """rgb: float in [0,1] or uint8, (H,W,3)."""
    if rgb.dtype != np.uint8:
        rgb = np.clip(np.rint(np.asarray(rgb, dtype=np.float64) * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(rgb, mode="RGB").save(path)


def load_rgb(path) -> np.ndarray:
    return np.asarray(Image.open(path).convert("RGB"))


def save_mask(path, mask: np.ndarray) -> None:
    Image.fromarray((np.asarray(mask) > 0).astype(np.uint8) * 255, mode="L").save(path)


def load_mask(path) -> np.ndarray:
    return (np.asarray(Image.open(path).convert("L")) > 127).astype(np.uint8)


def save_depth(path, depth: np.ndarray) -> None:
    q = np.asarray(depth, dtype=np.float64) * DEPTH_SCALE
    q = np.where(np.isfinite(q), q, 65535.0)
    img = np.clip(q, 0, 65535).astype(np.uint16)
    Image.fromarray(img, mode="I;16").save(path)


def load_depth(path) -> np.ndarray:
    raw = np.asarray(Image.open(path), dtype=np.float64)
    depth = raw / DEPTH_SCALE
    depth[raw >= 65535] = np.inf
    return depth


def frame_paths(out_dir, iteration: int) -> dict[str, Path]:
    out = Path(out_dir)
    return {
        "frame": out / f"frame_{iteration:05}.png",
        "mask": out / f"mask_{iteration:05}.png",
        "depth": out / f"depth_{iteration:05}.png",
        "generated": out / f"generated_{iteration:05}.png",
    }


def save_frame(out_dir, iteration: int, frame, generated: np.ndarray | None = None) -> None:
    paths = frame_paths(out_dir, iteration)
    save_rgb(paths["frame"], frame.rgb)
    save_mask(paths["mask"], frame.mask)
    save_depth(paths["depth"], frame.depth)
    if generated is not None:
        save_rgb(paths["generated"], generated)


def save_atlas(path, atlas, sidecar: dict | None = None) -> None:
    """Write the atlas as RGBA PNG plus a JSON sidecar next to it."""
    rgb = np.clip(np.rint(atlas.blended.astype(np.float64) * 255.0), 0, 255).astype(np.uint8)
    alpha = (atlas.contribution_count > 0).astype(np.uint8) * 255
    rgba = np.concatenate([rgb, alpha[:, :, None]], axis=2)
    Image.fromarray(rgba[::-1], mode="RGBA").save(path)

    meta = {
        "mode": atlas.mode,
        "clamp": [atlas.clamp_lo, atlas.clamp_hi],
        "iterations": atlas.iteration_count,
    }
    if sidecar:
        meta.update(sidecar)
    Path(path).with_suffix(".json").write_text(json.dumps(meta, indent=2) + "\n")
