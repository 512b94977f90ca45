"""Shared helpers: finite-difference gradients and toy datasets."""

from __future__ import annotations

import numpy as np
import torch


def numeric_grad(fn, tensor: torch.Tensor, eps: float = 1e-6) -> torch.Tensor:
    """Central finite differences of a scalar fn w.r.t. one float64 tensor."""
    grad = torch.zeros_like(tensor)
    flat = tensor.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.numel()):
        orig = flat[i].item()
        flat[i] = orig + eps
        hi = float(fn())
        flat[i] = orig - eps
        lo = float(fn())
        flat[i] = orig
        gflat[i] = (hi - lo) / (2 * eps)
    return grad


def max_rel_err(analytic: torch.Tensor, numeric: torch.Tensor) -> float:
    scale = float(numeric.abs().max()) + 1e-12
    return float((analytic - numeric).abs().max()) / scale


def toy_dataset(n: int = 8, h: int = 32, w: int = 32, seed: int = 0):
    """Tiny unpaired dataset: partial renders with masks plus real images."""
    rng = np.random.default_rng(seed)
    partials, masks, reals = [], [], []
    for _ in range(n):
        img = rng.random((3, h, w)).astype(np.float32)
        mask = (rng.random((1, h, w)) < 0.4).astype(np.float32)
        partials.append(torch.from_numpy(img))
        masks.append(torch.from_numpy(mask))
        reals.append(torch.from_numpy(rng.random((3, h, w)).astype(np.float32)))
    return partials, masks, reals


def tiny_config(**overrides):
    from put_nn import TrainConfig

    base = dict(
        epochs=2,
        decay_epochs=1,
        ngf=4,
        ndf=4,
        proj_dim=8,
        n_locations=16,
        crop_h=32,
        crop_w=32,
        seed=0,
    )
    base.update(overrides)
    return TrainConfig(**base)
