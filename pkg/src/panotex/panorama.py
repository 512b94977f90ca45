"""Equirectangular panorama rendering of partially textured scenes.

Projection convention: pixel (x, y) maps to longitude
lambda = ((x+0.5)/W)*2*pi - pi and latitude phi = pi/2 - ((y+0.5)/H)*pi, and a
camera-frame direction (cos(phi)*sin(lambda), sin(phi), cos(phi)*cos(lambda))
with forward=+z, up=+y, right=+x. The inverse wraps longitude so that
lambda=pi lands on the x=-0.5 seam.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raycast import RayScene, cast_rays
from .scene import Mesh
from .viewpath import Viewpoint

DEFAULT_WIDTH = 512
DEFAULT_HEIGHT = 256
DEFAULT_AMBIENT = 0.3
DEFAULT_SUN_DIR = (1.0, 2.0, 1.0)


class ProjectionError(ValueError):
    """Raised when a point cannot be projected (coincides with the camera)."""


@dataclass(frozen=True)
class PanoFrame:
    """One iteration's panorama bundle.

    rgb is float32 in [0,1]; mask is 1 where the hit texel already carries
    texture; depth is the Euclidean hit distance in meters (+inf background);
    shade is the textureless grayscale shading term for every hit pixel.
    """

    width: int
    height: int
    rgb: np.ndarray  # (H,W,3) float32
    mask: np.ndarray  # (H,W) uint8
    depth: np.ndarray  # (H,W) float64
    shade: np.ndarray  # (H,W) float32
    viewpoint: Viewpoint


def unproject_dir(x, y, width: int = DEFAULT_WIDTH, height: int = DEFAULT_HEIGHT):
    """Camera-frame unit direction through pixel (x, y); accepts arrays."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    lon = (x + 0.5) / width * (2.0 * np.pi) - np.pi
    lat = np.pi / 2.0 - (y + 0.5) / height * np.pi
    cos_lat = np.cos(lat)
    d = np.stack(
        [cos_lat * np.sin(lon), np.sin(lat), cos_lat * np.cos(lon)], axis=-1
    )
    return d


def project(
    viewpoint: Viewpoint,
    points: np.ndarray,
    width: int = DEFAULT_WIDTH,
    height: int = DEFAULT_HEIGHT,
):
    """Project world points into the panorama of a viewpoint.

    Returns (x, y, depth) with x in [-0.5, W-0.5), y in [-0.5, H-0.5],
    depth = Euclidean distance in meters. Scalar in, scalar out.
    """
    pts = np.asarray(points, dtype=np.float64)
    scalar = pts.ndim == 1
    pts = np.atleast_2d(pts)

    rel = pts - viewpoint.position
    depth = np.linalg.norm(rel, axis=1)
    if np.any(depth == 0.0):
        raise ProjectionError("point coincides with the camera center")

    cam = rel @ viewpoint.rotation()  # R^T applied row-wise
    v = cam / depth[:, None]
    lat = np.arcsin(np.clip(v[:, 1], -1.0, 1.0))
    lon = np.arctan2(v[:, 0], v[:, 2])

    fx = (lon + np.pi) / (2.0 * np.pi)
    fx -= np.floor(fx)  # lambda=pi wraps onto the x=-0.5 seam
    x = fx * width - 0.5
    y = (np.pi / 2.0 - lat) / np.pi * height - 0.5
    if scalar:
        return float(x[0]), float(y[0]), float(depth[0])
    return x, y, depth


def pixel_grid_dirs(width: int, height: int) -> np.ndarray:
    """(H,W,3) camera-frame directions through every pixel center."""
    xs = np.arange(width, dtype=np.float64)
    ys = np.arange(height, dtype=np.float64)
    xx, yy = np.meshgrid(xs, ys)
    return unproject_dir(xx, yy, width, height)


def render_partial(
    scene: Mesh | RayScene,
    texel_map,
    atlas,
    viewpoint: Viewpoint,
    width: int = DEFAULT_WIDTH,
    height: int = DEFAULT_HEIGHT,
    sun_dir=DEFAULT_SUN_DIR,
    ambient: float = DEFAULT_AMBIENT,
    uv_corners: np.ndarray | None = None,
) -> PanoFrame:
    """Ray-cast one partially textured panorama.

    Hit pixels show atlas color when their texel already has a contribution
    (mask=1) and white material otherwise (mask=0), both under a fixed
    Lambertian+ambient headlight. Misses are black with infinite depth.
    """
    if isinstance(scene, Mesh):
        uv_corners = scene.uv_corners
        scene = RayScene.from_mesh(scene)
    if uv_corners is None:
        uv_corners = np.zeros((scene.n_faces, 3, 2))
    if scene.n_faces and len(uv_corners) != scene.n_faces:
        raise ValueError("uv_corners inconsistent with scene")

    dirs_cam = pixel_grid_dirs(width, height).reshape(-1, 3)
    rot = viewpoint.rotation()
    dirs_world = dirs_cam @ rot.T
    origins = np.broadcast_to(viewpoint.position, dirs_world.shape)

    t, fid, bu, bv = cast_rays(scene, origins, dirs_world)
    hit = fid >= 0

    rgb = np.zeros((height * width, 3), dtype=np.float32)
    mask = np.zeros(height * width, dtype=np.uint8)
    depth = np.full(height * width, np.inf, dtype=np.float64)
    shade_img = np.zeros(height * width, dtype=np.float32)

    if hit.any():
        hfid = fid[hit]
        depth[hit] = t[hit]

        # Two-sided shading: orient the face normal against the ray.
        n = scene.face_normals[hfid]
        facing = np.einsum("ij,ij->i", n, dirs_world[hit]) > 0.0
        n = np.where(facing[:, None], -n, n)
        sun = np.asarray(sun_dir, dtype=np.float64)
        sun = sun / np.linalg.norm(sun)
        lambert = np.maximum(n @ sun, 0.0)
        shade = (ambient + (1.0 - ambient) * lambert).astype(np.float32)
        shade_img[hit] = shade

        w1 = bu[hit]
        w2 = bv[hit]
        w0 = 1.0 - w1 - w2
        uvc = uv_corners[hfid]  # (n,3,2)
        u = w0 * uvc[:, 0, 0] + w1 * uvc[:, 1, 0] + w2 * uvc[:, 2, 0]
        v = w0 * uvc[:, 0, 1] + w1 * uvc[:, 1, 1] + w2 * uvc[:, 2, 1]
        aw, ah = atlas.width, atlas.height
        ix = np.clip(np.floor(u * aw).astype(np.int64), 0, aw - 1)
        iy = np.clip(np.floor(v * ah).astype(np.int64), 0, ah - 1)

        textured = atlas.contribution_count[iy, ix] > 0
        albedo = np.ones((len(hfid), 3), dtype=np.float32)
        albedo[textured] = atlas.blended[iy[textured], ix[textured]]

        rgb[hit] = np.clip(albedo * shade[:, None], 0.0, 1.0)
        mask[hit] = textured.astype(np.uint8)

    return PanoFrame(
        width=width,
        height=height,
        rgb=rgb.reshape(height, width, 3),
        mask=mask.reshape(height, width),
        depth=depth.reshape(height, width),
        shade=shade_img.reshape(height, width),
        viewpoint=viewpoint,
    )
