"""Synthetic test scene: box buildings along a straight and an L-shaped street.

Produces an unwrapped OBJ (every quad gets its own shelf-packed UV island at a
uniform texel density) plus the street centerline JSON. Deterministic for a
fixed seed.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

GUTTER_TEXELS = 2.0


class _ShelfPacker:
    """Left-to-right shelf packing of UV rectangles in [0,1]^2."""

    def __init__(self, gutter: float):
        self.gutter = gutter
        self.x = gutter
        self.y = gutter
        self.shelf_h = 0.0

    def place(self, w: float, h: float):
        if w > 1.0 - 2 * self.gutter or h > 1.0 - 2 * self.gutter:
            return None
        if self.x + w + self.gutter > 1.0:
            self.y += self.shelf_h + self.gutter
            self.x = self.gutter
            self.shelf_h = 0.0
        if self.y + h + self.gutter > 1.0:
            return None
        rect = (self.x, self.y, self.x + w, self.y + h)
        self.x += w + self.gutter
        self.shelf_h = max(self.shelf_h, h)
        return rect


def _pack_rects(sizes: list[tuple[float, float]], gutter: float):
    """Pack all rects, shrinking uniformly until they fit. Returns (rects, scale)."""
    scale = 1.0
    for _ in range(64):
        packer = _ShelfPacker(gutter)
        rects = []
        ok = True
        for w, h in sizes:
            rect = packer.place(w * scale, h * scale)
            if rect is None:
                ok = False
                break
            rects.append(rect)
        if ok:
            return rects, scale
        scale *= 0.85
    raise RuntimeError("UV packing failed to converge")


class _SceneBuilder:
    def __init__(self):
        self.vertices: list[tuple[float, float, float]] = []
        self.quads: list[tuple[int, int, int, int]] = []
        self.quad_sizes: list[tuple[float, float]] = []

    def add_quad(self, p0, e1, e2) -> None:
        """Quad with origin p0 and edge vectors e1 (u axis), e2 (v axis)."""
        p0 = np.asarray(p0, dtype=np.float64)
        e1 = np.asarray(e1, dtype=np.float64)
        e2 = np.asarray(e2, dtype=np.float64)
        base = len(self.vertices)
        for p in (p0, p0 + e1, p0 + e1 + e2, p0 + e2):
            self.vertices.append(tuple(p))
        self.quads.append((base, base + 1, base + 2, base + 3))
        self.quad_sizes.append((float(np.linalg.norm(e1)), float(np.linalg.norm(e2))))

    def add_box(self, cx: float, cy: float, sx: float, sy: float, height: float) -> None:
        x0, x1 = cx - sx / 2, cx + sx / 2
        y0, y1 = cy - sy / 2, cy + sy / 2
        # Four outward-facing walls plus the top; no floor.
        self.add_quad((x0, y0, 0), (x1 - x0, 0, 0), (0, 0, height))  # south
        self.add_quad((x1, y0, 0), (0, y1 - y0, 0), (0, 0, height))  # east
        self.add_quad((x1, y1, 0), (x0 - x1, 0, 0), (0, 0, height))  # north
        self.add_quad((x0, y1, 0), (0, y0 - y1, 0), (0, 0, height))  # west
        self.add_quad((x0, y0, height), (x1 - x0, 0, 0), (0, y1 - y0, 0))  # roof

    def to_obj(self, texels_per_m: float, atlas_size: int) -> str:
        uv_sizes = [
            (w * texels_per_m / atlas_size, h * texels_per_m / atlas_size)
            for w, h in self.quad_sizes
        ]
        rects, _ = _pack_rects(uv_sizes, GUTTER_TEXELS / atlas_size)

        lines = ["# synthetic demo scene"]
        for v in self.vertices:
            lines.append(f"v {v[0]:.6f} {v[1]:.6f} {v[2]:.6f}")
        uv_lines = []
        face_lines = []
        vt_count = 0
        for quad, (u0, v0, u1, v1) in zip(self.quads, rects):
            for u, v in ((u0, v0), (u1, v0), (u1, v1), (u0, v1)):
                uv_lines.append(f"vt {u:.8f} {v:.8f}")
            a, b, c, d = (i + 1 for i in quad)
            ta, tb, tc, td = (vt_count + k for k in (1, 2, 3, 4))
            face_lines.append(f"f {a}/{ta} {b}/{tb} {c}/{tc} {d}/{td}")
            vt_count += 4
        return "\n".join(lines + uv_lines + face_lines) + "\n"


def demo_scene_text(
    seed: int = 0,
    texels_per_m: float = 32.0,
    atlas_size: int = 2048,
    box_offset: float = 4.0,
) -> tuple[str, str]:
    """Build the demo scene; returns (obj_text, streets_json_text).

    Street 1 runs 20 m along +x; street 2 is an L of two 10 m legs. With 5 m
    spacing that yields 10 viewpoints total.
    """
    rng = np.random.default_rng(seed)
    builder = _SceneBuilder()

    streets = [
        [[-10.0, 0.0, 0.0], [10.0, 0.0, 0.0]],
        [[-10.0, 12.0, 0.0], [0.0, 12.0, 0.0], [0.0, 22.0, 0.0]],
    ]

    def lots_along(p0, p1, side_offset):
        p0 = np.asarray(p0[:2])
        p1 = np.asarray(p1[:2])
        length = np.linalg.norm(p1 - p0)
        tangent = (p1 - p0) / length
        normal = np.array([-tangent[1], tangent[0]])
        n_lots = int(length // 5.0)
        for k in range(n_lots):
            center = p0 + tangent * (2.5 + 5.0 * k)
            for s in (-1.0, 1.0):
                yield center + normal * side_offset * s

    for street in streets:
        for a, b in zip(street[:-1], street[1:]):
            for cx, cy in lots_along(a, b, box_offset):
                size = float(rng.uniform(3.0, 4.0))
                height = float(rng.uniform(5.0, 9.0))
                builder.add_box(cx, cy, size, size, height)

    builder.add_quad((-16.0, -8.0, 0.0), (34.0, 0.0, 0.0), (0.0, 38.0, 0.0))  # ground

    obj_text = builder.to_obj(texels_per_m, atlas_size)
    return obj_text, json.dumps(streets)


def write_demo_scene(out_dir, **kwargs) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    obj_text, streets_text = demo_scene_text(**kwargs)
    mesh_path = out / "demo.obj"
    street_path = out / "streets.json"
    mesh_path.write_text(obj_text)
    street_path.write_text(streets_text)
    return mesh_path, street_path
