"""Software ray casting against triangle meshes via an axis-aligned BVH.

Hit results are deterministic at any thread count: the nearest hit wins and
exact-distance ties resolve to the lowest face id. fastmath stays off so the
per-ray float sequence is identical regardless of scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .scene import Mesh

_LEAF_SIZE = 4
_STACK_DEPTH = 64
_T_MIN = 1e-9


@dataclass(frozen=True)
class RayScene:
    """Immutable BVH-accelerated triangle soup, shareable across threads."""

    v0: np.ndarray  # (F,3)
    v1: np.ndarray
    v2: np.ndarray
    face_normals: np.ndarray  # (F,3) unit, zero for degenerate
    nodes_min: np.ndarray  # (M,3)
    nodes_max: np.ndarray
    node_left: np.ndarray  # (M,) child index or -1 for leaf
    node_right: np.ndarray
    node_start: np.ndarray  # (M,) leaf offset into tri_order
    node_count: np.ndarray
    tri_order: np.ndarray  # (F,) face ids grouped by leaf

    @property
    def n_faces(self) -> int:
        return len(self.v0)

    @classmethod
    def from_mesh(cls, mesh: Mesh) -> "RayScene":
        tri = mesh.vertices[mesh.faces]
        return cls.from_triangles(tri, mesh.face_normals)

    @classmethod
    def from_triangles(cls, tri: np.ndarray, face_normals: np.ndarray | None = None) -> "RayScene":
        """Build from (F,3,3) float triangles; F may be zero."""
        tri = np.asarray(tri, dtype=np.float64).reshape(-1, 3, 3)
        if face_normals is None:
            n = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
            ln = np.linalg.norm(n, axis=1, keepdims=True)
            face_normals = np.divide(n, ln, out=np.zeros_like(n), where=ln > 0)
        nodes = _build_bvh(tri)
        return cls(
            v0=np.ascontiguousarray(tri[:, 0]),
            v1=np.ascontiguousarray(tri[:, 1]),
            v2=np.ascontiguousarray(tri[:, 2]),
            face_normals=np.ascontiguousarray(face_normals, dtype=np.float64),
            **nodes,
        )


def _build_bvh(tri: np.ndarray) -> dict:
    """Median-split BVH over face centroids; deterministic via stable sorts."""
    n_faces = len(tri)
    if n_faces == 0:
        return dict(
            nodes_min=np.zeros((1, 3)),
            nodes_max=np.zeros((1, 3)),
            node_left=np.full(1, -1, np.int32),
            node_right=np.full(1, -1, np.int32),
            node_start=np.zeros(1, np.int32),
            node_count=np.zeros(1, np.int32),
            tri_order=np.zeros(0, np.int32),
        )

    lo = tri.min(axis=1)  # (F,3) per-face bounds
    hi = tri.max(axis=1)
    centroids = (lo + hi) * 0.5

    nodes_min: list[np.ndarray] = []
    nodes_max: list[np.ndarray] = []
    node_left: list[int] = []
    node_right: list[int] = []
    node_start: list[int] = []
    node_count: list[int] = []
    order: list[np.ndarray] = []
    cursor = 0

    def build(ids: np.ndarray) -> int:
        nonlocal cursor
        idx = len(nodes_min)
        nodes_min.append(lo[ids].min(axis=0))
        nodes_max.append(hi[ids].max(axis=0))
        node_left.append(-1)
        node_right.append(-1)
        node_start.append(0)
        node_count.append(0)

        if len(ids) <= _LEAF_SIZE:
            node_start[idx] = cursor
            node_count[idx] = len(ids)
            order.append(ids)
            cursor += len(ids)
            return idx

        extent = centroids[ids].max(axis=0) - centroids[ids].min(axis=0)
        axis = int(np.argmax(extent))
        ranked = ids[np.argsort(centroids[ids, axis], kind="stable")]
        mid = len(ranked) // 2
        node_left[idx] = build(ranked[:mid])
        node_right[idx] = build(ranked[mid:])
        return idx

    import sys

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 2 * n_faces + 1000))
    try:
        build(np.arange(n_faces, dtype=np.int32))
    finally:
        sys.setrecursionlimit(limit)

    return dict(
        nodes_min=np.asarray(nodes_min),
        nodes_max=np.asarray(nodes_max),
        node_left=np.asarray(node_left, np.int32),
        node_right=np.asarray(node_right, np.int32),
        node_start=np.asarray(node_start, np.int32),
        node_count=np.asarray(node_count, np.int32),
        tri_order=np.concatenate(order).astype(np.int32),
    )


@numba.njit(inline="always")
def _hit_triangle(ox, oy, oz, dx, dy, dz, a, b, c):
    """Moller-Trumbore, two-sided. Returns (t, u, v) with t<0 on miss."""
    e1x, e1y, e1z = b[0] - a[0], b[1] - a[1], b[2] - a[2]
    e2x, e2y, e2z = c[0] - a[0], c[1] - a[1], c[2] - a[2]
    px = dy * e2z - dz * e2y
    py = dz * e2x - dx * e2z
    pz = dx * e2y - dy * e2x
    det = e1x * px + e1y * py + e1z * pz
    if abs(det) < 1e-14:
        return -1.0, 0.0, 0.0
    inv = 1.0 / det
    sx, sy, sz = ox - a[0], oy - a[1], oz - a[2]
    u = (sx * px + sy * py + sz * pz) * inv
    if u < -1e-9 or u > 1.0 + 1e-9:
        return -1.0, 0.0, 0.0
    qx = sy * e1z - sz * e1y
    qy = sz * e1x - sx * e1z
    qz = sx * e1y - sy * e1x
    v = (dx * qx + dy * qy + dz * qz) * inv
    if v < -1e-9 or u + v > 1.0 + 1e-9:
        return -1.0, 0.0, 0.0
    t = (e2x * qx + e2y * qy + e2z * qz) * inv
    if t < _T_MIN:
        return -1.0, 0.0, 0.0
    return t, u, v


@numba.njit(inline="always")
def _hit_aabb(ox, oy, oz, dx, dy, dz, bmin, bmax, t_best):
    # Zero direction components are handled by a containment test instead of
    # slab division to keep 0*inf NaNs out of the min/max chain.
    tmin = 0.0
    tmax = t_best
    for axis in range(3):
        if axis == 0:
            o, d = ox, dx
        elif axis == 1:
            o, d = oy, dy
        else:
            o, d = oz, dz
        if d == 0.0:
            if o < bmin[axis] or o > bmax[axis]:
                return False
        else:
            inv = 1.0 / d
            t0 = (bmin[axis] - o) * inv
            t1 = (bmax[axis] - o) * inv
            if t0 > t1:
                t0, t1 = t1, t0
            if t0 > tmin:
                tmin = t0
            if t1 < tmax:
                tmax = t1
            if tmin > tmax:
                return False
    return True


@numba.njit(parallel=True, cache=True)
def _cast_kernel(
    origins,
    dirs,
    v0,
    v1,
    v2,
    nodes_min,
    nodes_max,
    node_left,
    node_right,
    node_start,
    node_count,
    tri_order,
    out_t,
    out_fid,
    out_u,
    out_v,
):
    n_rays = origins.shape[0]
    has_tris = tri_order.shape[0] > 0
    for r in numba.prange(n_rays):
        ox, oy, oz = origins[r, 0], origins[r, 1], origins[r, 2]
        dx, dy, dz = dirs[r, 0], dirs[r, 1], dirs[r, 2]

        best_t = np.inf
        best_fid = -1
        best_u = 0.0
        best_v = 0.0

        if has_tris:
            stack = np.empty(_STACK_DEPTH, dtype=np.int32)
            top = 0
            stack[top] = 0
            top += 1
            while top > 0:
                top -= 1
                node = stack[top]
                if not _hit_aabb(
                    ox, oy, oz, dx, dy, dz, nodes_min[node], nodes_max[node], best_t
                ):
                    continue
                left = node_left[node]
                if left < 0:
                    start = node_start[node]
                    for k in range(node_count[node]):
                        fid = tri_order[start + k]
                        t, u, v = _hit_triangle(
                            ox, oy, oz, dx, dy, dz, v0[fid], v1[fid], v2[fid]
                        )
                        if t > 0.0 and (
                            t < best_t or (t == best_t and fid < best_fid)
                        ):
                            best_t = t
                            best_fid = fid
                            best_u = u
                            best_v = v
                else:
                    stack[top] = left
                    top += 1
                    stack[top] = node_right[node]
                    top += 1

        out_t[r] = best_t
        out_fid[r] = best_fid
        out_u[r] = best_u
        out_v[r] = best_v


def cast_rays(
    scene: RayScene, origins: np.ndarray, dirs: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Nearest-hit query for a batch of rays.

    Returns (t, face_id, bary_u, bary_v); t is +inf and face_id -1 on miss.
    bary_u/bary_v weight v1/v2 (v0 weight is 1-u-v).
    """
    origins = np.ascontiguousarray(origins, dtype=np.float64).reshape(-1, 3)
    dirs = np.ascontiguousarray(dirs, dtype=np.float64).reshape(-1, 3)
    n = len(origins)
    out_t = np.empty(n, dtype=np.float64)
    out_fid = np.empty(n, dtype=np.int32)
    out_u = np.empty(n, dtype=np.float64)
    out_v = np.empty(n, dtype=np.float64)
    _cast_kernel(
        origins,
        dirs,
        scene.v0,
        scene.v1,
        scene.v2,
        scene.nodes_min,
        scene.nodes_max,
        scene.node_left,
        scene.node_right,
        scene.node_start,
        scene.node_count,
        scene.tri_order,
        out_t,
        out_fid,
        out_u,
        out_v,
    )
    return out_t, out_fid, out_u, out_v


def set_worker_threads(n: int | None) -> None:
    """Pin the ray-cast thread pool size; results are identical at any value.

    Requests beyond the machine's pool are clamped.
    """
    if n is not None and n >= 1:
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
