"""Training losses: masked inter-frame consistency, temperature-scaled patch
contrastive loss, and the adversarial pair."""

from __future__ import annotations

import torch
import torch.nn.functional as F


def consistency_loss(generated, partial, mask, masked: bool = True):
    """Mean L1 between generated and partial over the masked region.

    mask broadcasts over channels; masked=False replaces it with all-ones
    (the unmasked ablation). An empty mask yields 0.
    """
    if generated.shape != partial.shape:
        raise ValueError("generated/partial shapes disagree")
    if not masked:
        mask = torch.ones_like(mask)
    m = mask.to(generated.dtype)
    if m.dim() == generated.dim() - 1:
        m = m.unsqueeze(-3)  # (B,H,W) -> (B,1,H,W)
    if m.shape[-2:] != generated.shape[-2:]:
        raise ValueError("mask spatial dims disagree")
    weight = m.expand_as(generated)
    denom = weight.sum()
    if denom == 0:
        return generated.sum() * 0.0
    return (generated - partial).abs().mul(weight).sum() / denom


def contrastive_loss(anchor, positive, negatives, tau: float = 0.07):
    """Temperature-scaled cross-entropy over [positive, negatives].

    anchor/positive: (N, C); negatives: (N, M, C). Features are L2-normalized
    so similarities are cosine. Returns the sum over the N locations.
    """
    if anchor.dim() == 1:
        anchor = anchor.unsqueeze(0)
        positive = positive.unsqueeze(0)
    if negatives.dim() == 2:
        negatives = negatives.unsqueeze(0)
    if anchor.shape != positive.shape or negatives.shape[-1] != anchor.shape[-1]:
        raise ValueError("feature dimensions disagree")

    a = F.normalize(anchor, dim=-1, eps=1e-10)
    p = F.normalize(positive, dim=-1, eps=1e-10)
    n = F.normalize(negatives, dim=-1, eps=1e-10)

    l_pos = (a * p).sum(dim=-1, keepdim=True)
    l_neg = torch.einsum("nc,nmc->nm", a, n)
    logits = torch.cat([l_pos, l_neg], dim=1) / tau
    target = torch.zeros(len(logits), dtype=torch.long, device=logits.device)
    return F.cross_entropy(logits, target, reduction="sum")


def patch_nce_loss(query_feats, key_feats, tau: float = 0.07):
    """Contrastive loss over projected patch stacks.

    query/key: lists of (B, N, C) normalized features, one entry per tapped
    layer; the positive for each query location is the same location in the
    key stack and the negatives are every other location of the same image.
    Per convention the per-location cross-entropy is averaged over locations,
    then over layers and the batch.
    """
    total = 0.0
    for q, k in zip(query_feats, key_feats):
        b, n, _ = q.shape
        k = k.detach()
        logits = torch.bmm(q, k.transpose(1, 2)) / tau  # (B,N,N)
        target = torch.arange(n, device=q.device).repeat(b)
        total = total + F.cross_entropy(logits.reshape(b * n, n), target)
    return total / len(query_feats)


def adversarial_loss(d_real, d_fake, mode: str = "vanilla"):
    """(generator term, discriminator term) from discriminator logit maps.

    vanilla: the log form via binary cross-entropy on logits (non-saturating
    generator). lsgan: least-squares with targets 1/0.
    """
    if mode == "vanilla":
        ones_r = torch.ones_like(d_real)
        ones_f = torch.ones_like(d_fake)
        disc = 0.5 * (
            F.binary_cross_entropy_with_logits(d_real, ones_r)
            + F.binary_cross_entropy_with_logits(d_fake, torch.zeros_like(d_fake))
        )
        gen = F.binary_cross_entropy_with_logits(d_fake, ones_f)
    elif mode == "lsgan":
        disc = 0.5 * (((d_real - 1.0) ** 2).mean() + (d_fake**2).mean())
        gen = ((d_fake - 1.0) ** 2).mean()
    else:
        raise ValueError(f"unknown gan mode {mode!r}")
    return gen, disc
