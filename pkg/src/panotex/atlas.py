"""Texture atlas propagation: pooled, distance-weighted color blending.

Every panorama iteration appends per-texel contributions (iteration index,
sampled color, horizontal camera distance); the blended atlas color is
recomputed from the full contribution ledger under the active blend mode, so
weights always reflect the complete visible-iteration set of each texel.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .panorama import PanoFrame, project
from .scene import TexelMap

BLEND_MODES = ("no_blend", "average", "weighted")
CLAMP_LO = 0.3
CLAMP_HI = 0.7
DEFAULT_EPS_VIS = 0.05
_MIN_DISTANCE = 1e-6  # keeps weights defined for texels on the camera axis


def compute_weights(distances, clamp_lo: float = CLAMP_LO, clamp_hi: float = CLAMP_HI):
    """Blend weights for one texel's contribution distances.

    A single contribution gets weight 1. Otherwise raw weights are
    1 - d_i/sum(d), clamped to [clamp_lo, clamp_hi], then divided by their sum
    so the result is a convex combination.
    """
    d = np.asarray(distances, dtype=np.float64)
    if d.ndim != 1 or len(d) == 0:
        raise ValueError("distances must be a nonempty 1-D sequence")
    if np.any(d <= 0.0):
        raise ValueError("distances must be positive")
    if len(d) == 1:
        return np.array([1.0])
    raw = 1.0 - d / d.sum()
    clamped = np.clip(raw, clamp_lo, clamp_hi)
    return clamped / clamped.sum()


@dataclass
class Contributions:
    """Columnar batch of (texel, color, distance) for one iteration."""

    texels: np.ndarray  # (N,) flat atlas indices
    colors: np.ndarray  # (N,3) float64 in [0,1]
    distances: np.ndarray  # (N,) meters, > 0

    def __len__(self) -> int:
        return len(self.texels)


class TextureAtlas:
    """Per-texel blended color plus the contribution ledger behind it."""

    def __init__(
        self,
        width: int,
        height: int,
        mode: str = "weighted",
        clamp_lo: float = CLAMP_LO,
        clamp_hi: float = CLAMP_HI,
    ):
        if mode not in BLEND_MODES:
            raise ValueError(f"unknown blend mode {mode!r}")
        if not (0.0 <= clamp_lo < clamp_hi <= 1.0):
            raise ValueError("need 0 <= clamp_lo < clamp_hi <= 1")
        self.width = width
        self.height = height
        self.mode = mode
        self.clamp_lo = clamp_lo
        self.clamp_hi = clamp_hi
        self.blended = np.zeros((height, width, 3), dtype=np.float32)
        self.contribution_count = np.zeros((height, width), dtype=np.int32)
        self._last_iter = np.full(width * height, -1, dtype=np.int64)
        self._texel = np.zeros(0, dtype=np.int64)
        self._iter = np.zeros(0, dtype=np.int64)
        self._color = np.zeros((0, 3), dtype=np.float64)
        self._dist = np.zeros(0, dtype=np.float64)
        self.iterations: list[int] = []

    @property
    def iteration_count(self) -> int:
        return len(self.iterations)

    def contributions_for(self, texel) -> list[tuple[int, np.ndarray, float]]:
        """Ledger rows for one texel, ordered by iteration."""
        flat = self._flatten_texel(texel)
        rows = np.flatnonzero(self._texel == flat)
        rows = rows[np.argsort(self._iter[rows], kind="stable")]
        return [(int(self._iter[r]), self._color[r].copy(), float(self._dist[r])) for r in rows]

    def _flatten_texel(self, texel) -> int:
        if np.isscalar(texel) or isinstance(texel, (int, np.integer)):
            return int(texel)
        ix, iy = texel
        return int(iy) * self.width + int(ix)

    def add(self, contributions, iteration: int) -> None:
        """Append one iteration's contributions and re-blend affected texels."""
        texels, colors, dists = _normalize_contributions(contributions, self.width)
        if len(texels) == 0:
            if iteration not in self.iterations:
                self.iterations.append(iteration)
            return
        if np.any(dists <= 0.0):
            raise ValueError("contribution distances must be positive")
        if len(np.unique(texels)) != len(texels):
            raise ValueError("duplicate texels within one iteration")
        if np.any(self._last_iter[texels] >= iteration):
            raise ValueError("iteration must exceed all prior contributions")

        self._last_iter[texels] = iteration
        self._texel = np.concatenate([self._texel, texels])
        self._iter = np.concatenate([self._iter, np.full(len(texels), iteration, dtype=np.int64)])
        self._color = np.concatenate([self._color, colors])
        self._dist = np.concatenate([self._dist, dists])
        if iteration not in self.iterations:
            self.iterations.append(iteration)
        self._reblend()

    def set_mode(self, mode: str) -> None:
        if mode not in BLEND_MODES:
            raise ValueError(f"unknown blend mode {mode!r}")
        self.mode = mode
        self._reblend()

    def _reblend(self) -> None:
        """Recompute blended from the full ledger (vectorized group-by)."""
        self.blended.fill(0.0)
        self.contribution_count.fill(0)
        if len(self._texel) == 0:
            return
        order = np.lexsort((self._iter, self._texel))
        tex = self._texel[order]
        col = self._color[order]
        dst = self._dist[order]

        starts = np.flatnonzero(np.concatenate([[True], tex[1:] != tex[:-1]]))
        counts = np.diff(np.concatenate([starts, [len(tex)]]))
        group_of = np.repeat(np.arange(len(starts)), counts)
        uniq_tex = tex[starts]

        if self.mode == "no_blend":
            last = starts + counts - 1  # max iteration = last in sorted order
            blended = col[last]
        elif self.mode == "average":
            sums = np.add.reduceat(col, starts, axis=0)
            blended = sums / counts[:, None]
        else:
            d_sum = np.add.reduceat(dst, starts)
            raw = 1.0 - dst / d_sum[group_of]
            w = np.clip(raw, self.clamp_lo, self.clamp_hi)
            w[counts[group_of] == 1] = 1.0
            w_sum = np.add.reduceat(w, starts)
            w /= w_sum[group_of]
            blended = np.add.reduceat(w[:, None] * col, starts, axis=0)

        iy, ix = np.divmod(uniq_tex, self.width)
        self.blended[iy, ix] = blended.astype(np.float32)
        self.contribution_count[iy, ix] = counts.astype(np.int32)

    def save_state(self, path) -> None:
        """Persist the ledger (resume artifact, .npz)."""
        np.savez_compressed(
            path,
            width=self.width,
            height=self.height,
            mode=self.mode,
            clamp_lo=self.clamp_lo,
            clamp_hi=self.clamp_hi,
            texel=self._texel,
            iteration=self._iter,
            color=self._color,
            dist=self._dist,
            iterations=np.asarray(self.iterations, dtype=np.int64),
        )

    @classmethod
    def load_state(cls, path) -> "TextureAtlas":
        with np.load(path, allow_pickle=False) as data:
            atlas = cls(
                int(data["width"]),
                int(data["height"]),
                str(data["mode"]),
                float(data["clamp_lo"]),
                float(data["clamp_hi"]),
            )
            atlas._texel = data["texel"]
            atlas._iter = data["iteration"]
            atlas._color = data["color"]
            atlas._dist = data["dist"]
            atlas.iterations = [int(i) for i in data["iterations"]]
        if len(atlas._texel):
            np.maximum.at(atlas._last_iter, atlas._texel, atlas._iter)
        atlas._reblend()
        return atlas


def _normalize_contributions(contributions, atlas_width: int):
    if isinstance(contributions, Contributions):
        return (
            np.asarray(contributions.texels, dtype=np.int64),
            np.asarray(contributions.colors, dtype=np.float64).reshape(-1, 3),
            np.asarray(contributions.distances, dtype=np.float64),
        )
    texels, colors, dists = [], [], []
    for texel, color, dist in contributions:
        if np.isscalar(texel) or isinstance(texel, (int, np.integer)):
            flat = int(texel)
        else:
            ix, iy = texel
            flat = int(iy) * atlas_width + int(ix)
        texels.append(flat)
        colors.append(np.asarray(color, dtype=np.float64))
        dists.append(float(dist))
    return (
        np.asarray(texels, dtype=np.int64),
        np.asarray(colors, dtype=np.float64).reshape(-1, 3),
        np.asarray(dists, dtype=np.float64),
    )


def update_atlas(atlas: TextureAtlas, contributions, iteration: int, mode: str | None = None) -> None:
    """Append contributions for one iteration under the given blend mode."""
    if mode is not None and mode != atlas.mode:
        atlas.set_mode(mode)
    atlas.add(contributions, iteration)


def bilinear_sample(image: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Bilinear sample at continuous pixel coords; wraps horizontally, clamps
    vertically (panorama convention). Returns float64 (N,3)."""
    img = np.asarray(image, dtype=np.float64)
    if img.dtype != np.float64:
        img = img.astype(np.float64)
    h, w = img.shape[:2]
    x0 = np.floor(x).astype(np.int64)
    y0 = np.floor(y).astype(np.int64)
    fx = x - x0
    fy = y - y0
    x0w = np.mod(x0, w)
    x1w = np.mod(x0 + 1, w)
    y0c = np.clip(y0, 0, h - 1)
    y1c = np.clip(y0 + 1, 0, h - 1)
    c00 = img[y0c, x0w]
    c10 = img[y0c, x1w]
    c01 = img[y1c, x0w]
    c11 = img[y1c, x1w]
    wx = fx[:, None]
    wy = fy[:, None]
    return (
        c00 * (1 - wx) * (1 - wy)
        + c10 * wx * (1 - wy)
        + c01 * (1 - wx) * wy
        + c11 * wx * wy
    )


def gather_contributions(
    generated: np.ndarray,
    frame: PanoFrame,
    texel_map: TexelMap,
    eps_vis: float = DEFAULT_EPS_VIS,
) -> Contributions:
    """Back-project a generated panorama onto the texel map.

    A texel contributes iff its surface point projects in bounds and the
    projected depth matches the frame's depth buffer within eps_vis (the
    visibility test). Colors are bilinear samples of the generated image;
    distances are horizontal camera-to-point distances.
    """
    gen = np.asarray(generated)
    if gen.shape[:2] != (frame.height, frame.width):
        raise ValueError("generated image dims must match the frame")
    if gen.dtype == np.uint8:
        gen = gen.astype(np.float64) / 255.0

    if len(texel_map) == 0:
        return Contributions(
            texels=np.zeros(0, dtype=np.int64),
            colors=np.zeros((0, 3)),
            distances=np.zeros(0),
        )

    x, y, depth = project(frame.viewpoint, texel_map.points, frame.width, frame.height)
    px = np.clip(np.floor(x + 0.5).astype(np.int64), 0, frame.width - 1)
    py = np.clip(np.floor(y + 0.5).astype(np.int64), 0, frame.height - 1)
    in_bounds = (x >= -0.5) & (x < frame.width - 0.5) & (y >= -0.5) & (y <= frame.height - 0.5)
    visible = in_bounds & (np.abs(depth - frame.depth[py, px]) < eps_vis)

    sel = np.flatnonzero(visible)
    colors = bilinear_sample(gen, x[sel], y[sel])
    delta = texel_map.points[sel, :2] - frame.viewpoint.position[:2]
    dist = np.maximum(np.hypot(delta[:, 0], delta[:, 1]), _MIN_DISTANCE)
    return Contributions(
        texels=texel_map.texels[sel].astype(np.int64),
        colors=np.clip(colors, 0.0, 1.0),
        distances=dist,
    )
