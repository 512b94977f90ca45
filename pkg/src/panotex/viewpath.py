"""Viewpoint sampling along street centerlines."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scene import WORLD_UP, StreetGraph


@dataclass(frozen=True)
class Viewpoint:
    """Panoramic camera pose on a street path.

    forward is the horizontal street tangent, up is the world upright axis,
    and iteration is the global propagation order index.
    """

    position: np.ndarray
    forward: np.ndarray
    up: np.ndarray
    iteration: int

    def rotation(self) -> np.ndarray:
        """Camera-to-world rotation with columns (right, up, forward)."""
        right = np.cross(self.up, self.forward)
        return np.stack([right, self.up, self.forward], axis=1)


def _horizontal_tangent(seg: np.ndarray) -> np.ndarray | None:
    flat = np.array([seg[0], seg[1], 0.0])
    n = np.linalg.norm(flat)
    if n == 0.0:
        return None
    return flat / n


def sample_viewpoints(
    streets: StreetGraph, spacing: float = 5.0, height: float = 2.5
) -> list[Viewpoint]:
    """Place viewpoints at fixed horizontal arc-length intervals along streets.

    Each polyline yields samples at 0, s, 2s, ... of horizontal arc length; the
    endpoint is appended when it sits at least s/2 past the last regular
    sample. Iteration indices run in traversal order across all polylines.
    """
    if spacing <= 0.0:
        raise ValueError("spacing must be positive")
    if height < 0.0:
        raise ValueError("height must be non-negative")

    up = WORLD_UP.copy()
    views: list[Viewpoint] = []
    iteration = 0

    for poly in streets.polylines:
        if len(poly) > 1:
            deltas = np.diff(poly, axis=0)
            seg_len = np.hypot(deltas[:, 0], deltas[:, 1])  # horizontal arc length
            cum = np.concatenate([[0.0], np.cumsum(seg_len)])
            total = cum[-1]
        else:
            total = 0.0

        if total == 0.0:
            # Single points and zero-horizontal-extent polylines get one
            # viewpoint with the +x forward convention.
            views.append(
                Viewpoint(
                    position=poly[0] + up * height,
                    forward=np.array([1.0, 0.0, 0.0]),
                    up=up,
                    iteration=iteration,
                )
            )
            iteration += 1
            continue

        targets = list(np.arange(0.0, total + spacing * 1e-9, spacing))
        last = targets[-1] if targets else 0.0
        if total - last >= spacing / 2.0:
            targets.append(total)

        seg_idx = 0
        for s in targets:
            while seg_idx < len(seg_len) - 1 and s > cum[seg_idx + 1]:
                seg_idx += 1
            # Skip zero-horizontal-length segments when locating the sample.
            j = seg_idx
            while seg_len[j] == 0.0 and j < len(seg_len) - 1:
                j += 1
            if seg_len[j] == 0.0:
                continue
            t = (s - cum[j]) / seg_len[j]
            t = min(max(t, 0.0), 1.0)
            pos = poly[j] + deltas[j] * t
            fwd = _horizontal_tangent(deltas[j])
            if fwd is None:
                continue
            views.append(
                Viewpoint(
                    position=pos + up * height,
                    forward=fwd,
                    up=up,
                    iteration=iteration,
                )
            )
            iteration += 1

    return views
