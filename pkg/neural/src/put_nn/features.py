"""Per-image feature export for the baker's Frechet-distance harness.

Output format: one image per line, space-separated decimal floats. The
default backbone is a fixed-seed random convolutional net (deterministic and
dependency-free); an Inception backbone is available where torchvision
weights can be loaded.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch
import torch.nn as nn

from .data import load_rgb

FEATURE_DIM = 64


def random_backbone(seed: int = 1234) -> nn.Module:
    """Fixed random projection CNN: 3 strided convs + pooled 64-dim output."""
    torch.manual_seed(seed)
    net = nn.Sequential(
        nn.Conv2d(3, 16, 4, stride=4),
        nn.ReLU(inplace=True),
        nn.Conv2d(16, 32, 4, stride=4),
        nn.ReLU(inplace=True),
        nn.Conv2d(32, 32, 3, stride=2, padding=1),
        nn.ReLU(inplace=True),
        nn.AdaptiveAvgPool2d((1, 2)),
        nn.Flatten(),
    )
    net.eval()
    return net


def inception_backbone() -> nn.Module:
    try:
        from torchvision.models import Inception_V3_Weights, inception_v3
    except ImportError as exc:
        raise RuntimeError("torchvision is required for the inception backbone") from exc
    try:
        net = inception_v3(weights=Inception_V3_Weights.IMAGENET1K_V1)
    except Exception as exc:
        raise RuntimeError(
            "inception weights unavailable (offline?); use --backbone random"
        ) from exc
    net.fc = nn.Identity()
    net.eval()
    return net


@torch.no_grad()
def image_features(net: nn.Module, image: torch.Tensor, crop=None) -> np.ndarray:
    """image: (3,H,W) in [0,1]; crop: optional (top_frac, bottom_frac) rows."""
    if crop is not None:
        h = image.shape[-2]
        top = int(np.floor(h * crop[0]))
        bottom = int(np.floor(h * crop[1]))
        if bottom <= top:
            raise ValueError("empty crop")
        image = image[..., top:bottom, :]
    return net(image[None])[0].numpy()


def export_features(image_dir, out_path, backbone: str = "random", crop=None, pattern: str | None = None) -> int:
    """Write one feature row per matching image under image_dir.

    Default pattern is '*.png' plus '*.jpg'; pass e.g. 'generated_*.png' to
    pick only the translated panoramas out of a bake directory.
    """
    root = Path(image_dir)
    if pattern:
        files = sorted(root.glob(pattern))
    else:
        files = sorted(root.glob("*.png")) + sorted(root.glob("*.jpg"))
    if not files:
        raise ValueError(f"no images under {root}")
    net = random_backbone() if backbone == "random" else inception_backbone()
    torch.set_num_threads(1)
    rows = []
    for path in files:
        vec = image_features(net, load_rgb(path), crop)
        rows.append(" ".join(f"{v:.8g}" for v in vec))
    Path(out_path).write_text("\n".join(rows) + "\n")
    return len(files)
