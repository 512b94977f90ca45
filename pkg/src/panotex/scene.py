"""Scene inputs: triangle meshes with UV atlases and street centerlines.

Coordinate conventions
----------------------
The world is z-up: streets live near the z=0 plane and cameras are raised
along +z. Atlas texel (col ix, row iy) covers the UV rectangle
[ix/W,(ix+1)/W) x [iy/H,(iy+1)/H); texels are sampled at their centers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

WORLD_UP = np.array([0.0, 0.0, 1.0])


class MeshParseError(ValueError):
    """Raised when an OBJ payload cannot be turned into a valid mesh."""


class StreetParseError(ValueError):
    """Raised when a street centerline payload is malformed."""


@dataclass(frozen=True)
class Mesh:
    """Triangle mesh with a per-face-corner UV parameterization.

    vertices: (V,3) float64 positions in meters.
    faces: (F,3) int32 vertex indices.
    uv_corners: (F,3,2) float64 UVs in [0,1]^2, one per face corner.
    normals: optional (V,3) per-vertex unit normals (parsed, not required).
    """

    vertices: np.ndarray
    faces: np.ndarray
    uv_corners: np.ndarray
    normals: np.ndarray | None = None

    def __post_init__(self):
        v, f, uv = self.vertices, self.faces, self.uv_corners
        if len(f) < 1:
            raise MeshParseError("mesh has no triangles")
        if not np.isfinite(v).all() or not np.isfinite(uv).all():
            raise MeshParseError("non-finite coordinate in mesh")
        if f.min() < 0 or f.max() >= len(v):
            raise MeshParseError("face index out of range")
        if uv.min() < 0.0 or uv.max() > 1.0:
            raise MeshParseError("UV outside [0,1] after wrapping")

    @property
    def face_normals(self) -> np.ndarray:
        """(F,3) unit geometric normals; zero vector for degenerate faces."""
        tri = self.vertices[self.faces]
        n = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
        length = np.linalg.norm(n, axis=1, keepdims=True)
        return np.divide(n, length, out=np.zeros_like(n), where=length > 0)


@dataclass(frozen=True)
class StreetGraph:
    """Ordered ground-level polylines along which viewpoints are sampled."""

    polylines: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        for poly in self.polylines:
            if len(poly) < 1:
                raise StreetParseError("empty polyline")
            if not np.isfinite(poly).all():
                raise StreetParseError("non-finite street coordinate")


@dataclass
class TexelMap:
    """Partial map from atlas texels to surface points.

    Parallel arrays over mapped texels:
    texels: (N,) flat indices iy*atlas_width+ix, strictly increasing.
    points: (N,3) surface points p_t in meters.
    normals: (N,3) unit face normals at p_t.
    face_ids: (N,) source triangle per texel.
    """

    atlas_width: int
    atlas_height: int
    texels: np.ndarray
    points: np.ndarray
    normals: np.ndarray
    face_ids: np.ndarray

    def __len__(self) -> int:
        return len(self.texels)

    def texel_coords(self) -> tuple[np.ndarray, np.ndarray]:
        """(ix, iy) integer atlas coordinates of the mapped texels."""
        return self.texels % self.atlas_width, self.texels // self.atlas_width

    def uv_centers(self) -> np.ndarray:
        """(N,2) UV coordinates of the mapped texel centers."""
        ix, iy = self.texel_coords()
        return np.stack(
            [(ix + 0.5) / self.atlas_width, (iy + 0.5) / self.atlas_height], axis=1
        )


def _wrap_uv(uv: np.ndarray) -> np.ndarray:
    # Only values strictly outside [0,1] wrap; 1.0 stays 1.0 so full-square
    # unwraps survive.
    outside = (uv < 0.0) | (uv > 1.0)
    return np.where(outside, uv - np.floor(uv), uv)


def load_mesh(text: str | bytes) -> Mesh:
    """Parse Wavefront OBJ text into a Mesh.

    Supports v/vt/vn/f records; n-gon faces are fan-triangulated. Faces must
    carry vt indices on every corner (the mesh must be unwrapped).
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")

    positions: list[list[float]] = []
    texcoords: list[list[float]] = []
    vnormals: list[list[float]] = []
    faces: list[tuple[int, int, int]] = []
    face_uvs: list[tuple[int, int, int]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        tag, args = parts[0], parts[1:]
        try:
            if tag == "v":
                positions.append([float(args[0]), float(args[1]), float(args[2])])
            elif tag == "vt":
                texcoords.append([float(args[0]), float(args[1])])
            elif tag == "vn":
                vnormals.append([float(args[0]), float(args[1]), float(args[2])])
            elif tag == "f":
                corners = []
                for ref in args:
                    fields = ref.split("/")
                    vi = int(fields[0])
                    if len(fields) < 2 or fields[1] == "":
                        raise MeshParseError(
                            f"line {lineno}: face corner '{ref}' has no vt index; "
                            "mesh not unwrapped"
                        )
                    ti = int(fields[1])
                    if vi < 1 or ti < 1:
                        raise MeshParseError(
                            f"line {lineno}: non-positive index in '{ref}'"
                        )
                    corners.append((vi - 1, ti - 1))
                if len(corners) < 3:
                    raise MeshParseError(f"line {lineno}: face with <3 corners")
                for k in range(1, len(corners) - 1):  # fan triangulation
                    tri = (corners[0], corners[k], corners[k + 1])
                    faces.append(tuple(c[0] for c in tri))
                    face_uvs.append(tuple(c[1] for c in tri))
        except MeshParseError:
            raise
        except (ValueError, IndexError) as exc:
            raise MeshParseError(f"line {lineno}: malformed '{tag}' record") from exc

    if not faces:
        raise MeshParseError("OBJ contains no faces")
    verts = np.asarray(positions, dtype=np.float64)
    uvs = np.asarray(texcoords, dtype=np.float64)
    face_arr = np.asarray(faces, dtype=np.int32)
    uv_idx = np.asarray(face_uvs, dtype=np.int32)
    if uv_idx.max() >= len(uvs):
        raise MeshParseError("face references missing vt; mesh not unwrapped")
    if face_arr.max() >= len(verts):
        raise MeshParseError("face references missing vertex")
    uv_corners = _wrap_uv(uvs[uv_idx])
    normals = np.asarray(vnormals, dtype=np.float64) if vnormals else None
    if normals is not None and len(normals) != len(verts):
        normals = None  # per-vertex normals require one vn per v
    return Mesh(vertices=verts, faces=face_arr, uv_corners=uv_corners, normals=normals)


def load_streets(payload: str | bytes) -> StreetGraph:
    """Parse a JSON array of polylines of [x,y,z] into a StreetGraph.

    Consecutive duplicate points are collapsed.
    """
    if isinstance(payload, bytes):
        payload = payload.decode("utf-8")
    try:
        data = json.loads(payload)
    except json.JSONDecodeError as exc:
        raise StreetParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise StreetParseError("top level must be an array of polylines")

    polylines = []
    for pi, poly in enumerate(data):
        if not isinstance(poly, list) or len(poly) < 1:
            raise StreetParseError(f"polyline {pi} empty or not an array")
        pts = []
        for pt in poly:
            if (
                not isinstance(pt, list)
                or len(pt) != 3
                or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in pt)
            ):
                raise StreetParseError(f"polyline {pi}: point {pt!r} is not [x,y,z]")
            p = np.asarray(pt, dtype=np.float64)
            if not pts or not np.array_equal(pts[-1], p):
                pts.append(p)
        polylines.append(np.asarray(pts))
    return StreetGraph(polylines=polylines)


def build_texel_map(mesh: Mesh, atlas_width: int, atlas_height: int) -> TexelMap:
    """Map every texel whose center falls inside a UV triangle to a surface point.

    Overlapping UV triangles are resolved in favor of the lowest face id;
    degenerate UV triangles contribute nothing. Deterministic for fixed input.
    """
    if atlas_width < 1 or atlas_height < 1:
        raise ValueError("atlas dimensions must be >= 1")

    W, H = atlas_width, atlas_height
    owner = np.full(W * H, -1, dtype=np.int64)  # face id claiming each texel
    bary = np.zeros((W * H, 3), dtype=np.float64)

    for fid in range(len(mesh.faces)):
        uv = mesh.uv_corners[fid]  # (3,2)
        a, b, c = uv[0], uv[1], uv[2]
        # 2D signed area; zero-area UV triangles cover no texel center.
        det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
        if det == 0.0:
            continue

        lo = uv.min(axis=0)
        hi = uv.max(axis=0)
        ix0 = max(int(np.floor(lo[0] * W - 0.5)), 0)
        ix1 = min(int(np.ceil(hi[0] * W - 0.5)), W - 1)
        iy0 = max(int(np.floor(lo[1] * H - 0.5)), 0)
        iy1 = min(int(np.ceil(hi[1] * H - 0.5)), H - 1)
        if ix1 < ix0 or iy1 < iy0:
            continue

        ixs = np.arange(ix0, ix1 + 1)
        iys = np.arange(iy0, iy1 + 1)
        u = (ixs + 0.5) / W
        v = (iys + 0.5) / H
        uu, vv = np.meshgrid(u, v)

        du, dv = uu - a[0], vv - a[1]
        wb = ((c[1] - a[1]) * du - (c[0] - a[0]) * dv) / det
        wc = (-(b[1] - a[1]) * du + (b[0] - a[0]) * dv) / det
        wa = 1.0 - wb - wc
        inside = (wa >= 0.0) & (wb >= 0.0) & (wc >= 0.0)
        if not inside.any():
            continue

        gy, gx = np.nonzero(inside)
        flat = (iys[gy] * W + ixs[gx]).astype(np.int64)
        unclaimed = owner[flat] == -1  # lowest face id wins; faces scan in order
        flat = flat[unclaimed]
        if len(flat) == 0:
            continue
        owner[flat] = fid
        bary[flat, 0] = wa[inside][unclaimed]
        bary[flat, 1] = wb[inside][unclaimed]
        bary[flat, 2] = wc[inside][unclaimed]

    texels = np.flatnonzero(owner >= 0)
    fids = owner[texels].astype(np.int32)
    w = bary[texels]  # (N,3)
    tri = mesh.vertices[mesh.faces[fids]]  # (N,3,3)
    points = np.einsum("nk,nkj->nj", w, tri)
    normals = mesh.face_normals[fids]
    return TexelMap(
        atlas_width=W,
        atlas_height=H,
        texels=texels,
        points=points,
        normals=normals,
        face_ids=fids,
    )
