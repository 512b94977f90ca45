"""Dataset plumbing: panorama/mask folders in, cropped [-1,1] tensors out.

Partial-texture inputs come from a primary-pipeline bake (frame_*.png with
matching mask_*.png). When masks are absent they are synthesized with a
configurable coverage fraction.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch
from PIL import Image


def load_rgb(path) -> torch.Tensor:
    """(3,H,W) float tensor in [0,1]."""
    arr = np.asarray(Image.open(path).convert("RGB"), dtype=np.float32) / 255.0
    return torch.from_numpy(arr).permute(2, 0, 1)


def load_mask(path) -> torch.Tensor:
    """(1,H,W) binary float tensor."""
    arr = (np.asarray(Image.open(path).convert("L")) > 127).astype(np.float32)
    return torch.from_numpy(arr)[None]


def load_partial_dir(path) -> tuple[list[torch.Tensor], list[torch.Tensor | None]]:
    """frame_*.png images with mask_*.png partners where present."""
    root = Path(path)
    frames = sorted(root.glob("frame_*.png"))
    if not frames:
        frames = sorted(p for p in root.glob("*.png") if not p.name.startswith("mask_"))
    if not frames:
        raise ValueError(f"no panoramas under {root}")
    images, masks = [], []
    for frame in frames:
        images.append(load_rgb(frame))
        mask_path = frame.with_name(frame.name.replace("frame_", "mask_"))
        masks.append(load_mask(mask_path) if mask_path.exists() else None)
    return images, masks


def load_real_dir(path) -> list[torch.Tensor]:
    root = Path(path)
    files = sorted(root.glob("*.png")) + sorted(root.glob("*.jpg"))
    if not files:
        raise ValueError(f"no images under {root}")
    return [load_rgb(p) for p in files]


def synthesize_mask(h: int, w: int, coverage: tuple[float, float], rng: np.random.Generator) -> torch.Tensor:
    """Random already-textured region: a horizontal band plus a few boxes."""
    target = rng.uniform(*coverage)
    mask = np.zeros((h, w), dtype=np.float32)
    band = max(1, int(h * target * 0.7))
    top = int(rng.integers(0, max(1, h - band)))
    mask[top : top + band] = 1.0
    for _ in range(3):
        bh = int(rng.integers(1, max(2, h // 3)))
        bw = int(rng.integers(1, max(2, w // 3)))
        y0 = int(rng.integers(0, max(1, h - bh)))
        x0 = int(rng.integers(0, max(1, w - bw)))
        mask[y0 : y0 + bh, x0 : x0 + bw] = 1.0
    return torch.from_numpy(mask)[None]


def to_signed(img: torch.Tensor) -> torch.Tensor:
    return img * 2.0 - 1.0


def to_unsigned(img: torch.Tensor) -> torch.Tensor:
    return (img + 1.0) * 0.5


def luminance(rgb: torch.Tensor) -> torch.Tensor:
    """(...,3,H,W) -> (...,1,H,W) grayscale plane."""
    r, g, b = rgb.unbind(-3)
    return (0.299 * r + 0.587 * g + 0.114 * b).unsqueeze(-3)


class PairSampler:
    """Seeded sampler of (partial, mask, real) crops for unpaired training."""

    def __init__(
        self,
        partials: list[torch.Tensor],
        masks: list[torch.Tensor | None],
        reals: list[torch.Tensor],
        crop_h: int,
        crop_w: int,
        mask_coverage: tuple[float, float] = (0.2, 0.6),
        seed: int = 0,
    ):
        if not partials or not reals:
            raise ValueError("both datasets must be nonempty")
        self.partials = partials
        self.masks = masks
        self.reals = reals
        self.crop_h = crop_h
        self.crop_w = crop_w
        self.mask_coverage = mask_coverage
        self.rng = np.random.default_rng(seed)

    def _crop(self, img: torch.Tensor, mask: torch.Tensor, y0: int, x0: int, roll: int):
        # Panoramas wrap horizontally, so roll before cropping.
        img = torch.roll(img, shifts=roll, dims=-1)
        mask = torch.roll(mask, shifts=roll, dims=-1)
        return (
            img[..., y0 : y0 + self.crop_h, x0 : x0 + self.crop_w],
            mask[..., y0 : y0 + self.crop_h, x0 : x0 + self.crop_w],
        )

    def sample(self) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        """One (partial, mask, real) triple, batch dim included, in [-1,1]."""
        pi = int(self.rng.integers(len(self.partials)))
        ri = int(self.rng.integers(len(self.reals)))
        partial = self.partials[pi]
        mask = self.masks[pi]
        if mask is None:
            mask = synthesize_mask(partial.shape[-2], partial.shape[-1], self.mask_coverage, self.rng)
        real = self.reals[ri]

        h, w = partial.shape[-2:]
        if h < self.crop_h or w < self.crop_w:
            raise ValueError(f"image {h}x{w} smaller than crop {self.crop_h}x{self.crop_w}")
        y0 = int(self.rng.integers(0, h - self.crop_h + 1))
        x0 = int(self.rng.integers(0, w - self.crop_w + 1))
        roll = int(self.rng.integers(0, w))
        partial, mask = self._crop(partial, mask, y0, x0, roll)

        rh, rw = real.shape[-2:]
        ry = int(self.rng.integers(0, rh - self.crop_h + 1))
        rx = int(self.rng.integers(0, rw - self.crop_w + 1))
        real = real[..., ry : ry + self.crop_h, rx : rx + self.crop_w]

        return (
            to_signed(partial)[None],
            mask[None],
            to_signed(real)[None],
        )
