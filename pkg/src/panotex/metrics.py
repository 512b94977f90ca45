"""Quantitative evaluation: inter-frame consistency, Frechet distance with
pluggable feature extractors, the facade crop, and the atlas seam diagnostic."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage


@dataclass(frozen=True)
class FeatureSet:
    """n x dim matrix of per-image feature vectors."""

    vectors: np.ndarray

    def __post_init__(self):
        v = self.vectors
        if v.ndim != 2:
            raise ValueError("feature matrix must be 2-D")
        if not np.isfinite(v).all():
            raise ValueError("non-finite feature value")

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True)
class CropSpec:
    """Latitude band of panorama rows retained by the facade crop."""

    row_top_frac: float = 0.25
    row_bottom_frac: float = 0.625

    def __post_init__(self):
        if not (0.0 <= self.row_top_frac < self.row_bottom_frac <= 1.0):
            raise ValueError("need 0 <= top < bottom <= 1")


def _as_float(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.dtype == np.uint8:
        return img.astype(np.float64) / 255.0
    return img.astype(np.float64)


def interframe_consistency(generated, partial, mask) -> float:
    """Mean masked L1 between a generated panorama and its partial input.

    Operates in [0,1] float space; an all-zero mask yields 0 (empty mean).
    """
    gen = _as_float(generated)
    par = _as_float(partial)
    m = np.asarray(mask).astype(bool)
    if gen.shape != par.shape or gen.shape[:2] != m.shape:
        raise ValueError("generated/partial/mask dimensions disagree")
    if not m.any():
        return 0.0
    diff = np.abs(gen - par)[m]
    return float(diff.mean())


def _psd_sqrt_eigvals(mat: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    """Eigenvalues' square roots for a symmetric PSD matrix, with the
    negative-eigenvalue policy: below -tol errors, within [-tol, 0] clamps."""
    sym = (mat + mat.T) / 2.0
    eigvals = np.linalg.eigvalsh(sym)
    if np.any(eigvals < -tol):
        raise ValueError(f"matrix indefinite beyond tolerance (min eig {eigvals.min():.3g})")
    return np.sqrt(np.clip(eigvals, 0.0, None))


def _psd_sqrt(mat: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    sym = (mat + mat.T) / 2.0
    eigvals, vecs = np.linalg.eigh(sym)
    if np.any(eigvals < -tol):
        raise ValueError(f"matrix indefinite beyond tolerance (min eig {eigvals.min():.3g})")
    root = np.sqrt(np.clip(eigvals, 0.0, None))
    return (vecs * root) @ vecs.T


def frechet_distance(a: FeatureSet, b: FeatureSet) -> float:
    """Frechet distance between Gaussian fits of two feature sets.

    ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a S_b)^{1/2}), with the matrix
    square root taken through the symmetric product S_a^{1/2} S_b S_a^{1/2}.
    """
    if a.dim != b.dim:
        raise ValueError("feature dimensions disagree")
    if a.n < 2 or b.n < 2:
        raise ValueError("need n >= 2 samples for a covariance")

    mu_a = a.vectors.mean(axis=0)
    mu_b = b.vectors.mean(axis=0)
    cov_a = np.cov(a.vectors, rowvar=False).reshape(a.dim, a.dim)
    cov_b = np.cov(b.vectors, rowvar=False).reshape(b.dim, b.dim)

    a_half = _psd_sqrt(cov_a)
    cross = a_half @ cov_b @ a_half
    trace_sqrt = _psd_sqrt_eigvals(cross).sum()

    mean_term = float(np.sum((mu_a - mu_b) ** 2))
    value = mean_term + float(np.trace(cov_a) + np.trace(cov_b)) - 2.0 * float(trace_sqrt)
    return max(value, 0.0)


def builtin_features(image: np.ndarray, grid_w: int = 8, grid_h: int = 4) -> np.ndarray:
    """Average-pool an image to a grid_w x grid_h grayscale grid and flatten.

    The test-scale stand-in for learned features (dim grid_w*grid_h = 32).
    """
    img = _as_float(image)
    if img.ndim == 3:
        img = img.mean(axis=2)
    h, w = img.shape
    if h % grid_h or w % grid_w:
        ys = (np.arange(grid_h + 1) * h) // grid_h
        xs = (np.arange(grid_w + 1) * w) // grid_w
        out = np.empty(grid_h * grid_w)
        k = 0
        for gy in range(grid_h):
            for gx in range(grid_w):
                out[k] = img[ys[gy] : ys[gy + 1], xs[gx] : xs[gx + 1]].mean()
                k += 1
        return out
    blocks = img.reshape(grid_h, h // grid_h, grid_w, w // grid_w)
    return blocks.mean(axis=(1, 3)).ravel()


def load_feature_file(path) -> FeatureSet:
    """Feature file format: one image per line, space-separated floats."""
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line:
            rows.append([float(tok) for tok in line.split()])
    if not rows:
        raise ValueError(f"feature file {path} is empty")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError(f"feature file {path} has ragged rows")
    return FeatureSet(np.asarray(rows, dtype=np.float64))


def extract_features(images, extractor: str = "builtin") -> FeatureSet:
    """One deterministic feature vector per image.

    extractor is 'builtin' (8x4 grayscale average-pool) or 'file:<path>'
    pointing at an externally produced feature file whose row count must
    match the image count.
    """
    images = list(images)
    if extractor == "builtin":
        return FeatureSet(np.stack([builtin_features(img) for img in images]))
    if extractor.startswith("file:"):
        feats = load_feature_file(extractor[len("file:") :])
        if feats.n != len(images):
            raise ValueError(
                f"feature file has {feats.n} rows for {len(images)} images"
            )
        return feats
    raise ValueError(f"unknown extractor {extractor!r}")


def crop_facades(pano: np.ndarray, spec: CropSpec = CropSpec()) -> np.ndarray:
    """Retain the facade latitude band: rows [floor(H*top), floor(H*bottom))."""
    h = pano.shape[0]
    top = int(np.floor(h * spec.row_top_frac))
    bottom = int(np.floor(h * spec.row_bottom_frac))
    if bottom <= top:
        raise ValueError("empty crop")
    return pano[top:bottom]


def seam_metric(atlas) -> float:
    """Max color jump between 4-adjacent contributing texels on one UV island.

    Islands are 4-connected components of the contributing-texel mask; the
    jump is the L-inf color difference.
    """
    mapped = atlas.contribution_count > 0
    if mapped.sum() < 2:
        raise ValueError("atlas needs >= 2 mapped texels")
    labels, _ = ndimage.label(mapped, structure=np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]]))
    color = atlas.blended.astype(np.float64)

    worst = 0.0
    for axis in (0, 1):
        a = (slice(None, -1), slice(None)) if axis == 0 else (slice(None), slice(None, -1))
        b = (slice(1, None), slice(None)) if axis == 0 else (slice(None), slice(1, None))
        pair = mapped[a] & mapped[b] & (labels[a] == labels[b])
        if pair.any():
            diff = np.abs(color[a] - color[b]).max(axis=2)
            worst = max(worst, float(diff[pair].max()))
    return worst
