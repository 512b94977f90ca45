"""Shared scene builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

import panotex as pt

UNIT_QUAD_OBJ = """\
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
vt 0 0
vt 1 0
vt 1 1
vt 0 1
f 1/1 2/2 3/3 4/4
"""


# Two parallel walls facing the +y camera direction; the near wall shadows
# the center of the far wall. UVs are laid out on a 64x64 atlas so texel
# centers keep a safe margin from every visibility boundary.
#   near wall: y=2, x in [-3,3], z in [0,4]   -> 24x16 texel island
#   far wall:  y=6, x in [-12,12], z in [0,4] -> 48x8 texel island
OCCLUDER_OBJ = """\
v -3 2 0
v 3 2 0
v 3 2 4
v -3 2 4
v -12 6 0
v 12 6 0
v 12 6 4
v -12 6 4
vt 0.0 0.0
vt 0.375 0.0
vt 0.375 0.25
vt 0.0 0.25
vt 0.0 0.5
vt 0.75 0.5
vt 0.75 0.625
vt 0.0 0.625
f 1/1 2/2 3/3 4/4
f 5/5 6/6 7/7 8/8
"""

OCCLUDER_ATLAS = 64


# One long wall plus an occluder sitting between two street viewpoints at
# (-5,0) and (5,0). From (5,0) the occluder shadows the wall for x > -1, so
# the wall splits into a both-views band x<[-1], a view-1-only band [-1,9),
# and an unseen band [9,10). Texels are 0.5 m so centers keep a 0.25 m margin
# from both shadow boundaries.
#   wall:     y=6, x in [-10,10], z in [0,4] -> 40x8 texel island
#   occluder: y=3, x in [2,8],    z in [0,5] -> 12x10 texel island
SEAM_OBJ = """\
v -10 6 0
v 10 6 0
v 10 6 4
v -10 6 4
v 2 3 0
v 8 3 0
v 8 3 5
v 2 3 5
vt 0.0 0.0
vt 0.625 0.0
vt 0.625 0.125
vt 0.0 0.125
vt 0.0 0.25
vt 0.1875 0.25
vt 0.1875 0.40625
vt 0.0 0.40625
f 1/1 2/2 3/3 4/4
f 5/5 6/6 7/7 8/8
"""

SEAM_STREETS = "[[[-5,0,0],[5,0,0]]]"
SEAM_WALL_FACES = (0, 1)


@pytest.fixture(scope="session")
def unit_quad_mesh():
    return pt.load_mesh(UNIT_QUAD_OBJ)


@pytest.fixture(scope="session")
def occluder_mesh():
    return pt.load_mesh(OCCLUDER_OBJ)


@pytest.fixture(scope="session")
def occluder_camera():
    return pt.Viewpoint(
        position=np.array([0.0, 0.0, 2.0]),
        forward=np.array([0.0, 1.0, 0.0]),
        up=np.array([0.0, 0.0, 1.0]),
        iteration=0,
    )


@pytest.fixture(scope="session")
def demo_scene_small():
    """Demo scene prebuilt at a small atlas size shared across tests."""
    obj_text, streets_text = pt.demo_scene_text(seed=0, texels_per_m=8.0, atlas_size=256)
    mesh = pt.load_mesh(obj_text)
    streets = pt.load_streets(streets_text)
    return mesh, streets


def brute_force_visible(mesh: pt.Mesh, origin: np.ndarray, points: np.ndarray, tol: float = 1e-6):
    """Reference visibility oracle: pure-numpy nearest-hit against all faces.

    points (N,3) are on-surface targets; a point is visible iff no triangle
    intersects the ray strictly before it. Independent of the BVH caster.
    """
    tri = mesh.vertices[mesh.faces]  # (F,3,3)
    v0, v1, v2 = tri[:, 0], tri[:, 1], tri[:, 2]
    e1 = v1 - v0
    e2 = v2 - v0

    dirs = points - origin
    dist = np.linalg.norm(dirs, axis=1)
    dirs = dirs / dist[:, None]

    visible = np.empty(len(points), dtype=bool)
    for i in range(len(points)):
        d = dirs[i]
        p = np.cross(d, e2)
        det = np.einsum("ij,ij->i", e1, p)
        ok = np.abs(det) > 1e-14
        inv = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
        s = origin - v0
        u = np.einsum("ij,ij->i", s, p) * inv
        q = np.cross(s, e1)
        v = np.einsum("j,ij->i", d, q) * inv
        t = np.einsum("ij,ij->i", e2, q) * inv
        hit = ok & (u >= -1e-9) & (v >= -1e-9) & (u + v <= 1 + 1e-9) & (t > 1e-9)
        nearest = t[hit].min() if hit.any() else np.inf
        visible[i] = nearest >= dist[i] - tol
    return visible
