#!/usr/bin/env python3
"""Dissect one partially textured panorama.

Renders a single viewpoint twice: once against an empty atlas (everything
grayscale, mask empty) and once after a first propagation pass (textured
regions in color, mask set). Shows the projection conventions along the way.
"""

from pathlib import Path

import numpy as np

import panotex as pt
from panotex import pngio

out = Path("demo_out/anatomy")
out.mkdir(parents=True, exist_ok=True)

obj_text, streets_text = pt.demo_scene_text(seed=1, atlas_size=512)
mesh = pt.load_mesh(obj_text)
streets = pt.load_streets(streets_text)
texel_map = pt.build_texel_map(mesh, 512, 512)
views = pt.sample_viewpoints(streets)
cam = views[0]

# The equirectangular convention: image center row/column is the forward
# axis, the horizontal wrap seam sits directly behind the camera.
ahead = cam.position + 10.0 * cam.forward
x, y, depth = pt.project(cam, ahead)
print(f"point 10 m ahead -> pixel ({x:.1f}, {y:.1f}), depth {depth:.1f} m")
print("pixel (255.5,127.5) direction:", pt.unproject_dir(255.5, 127.5).round(6))

atlas = pt.TextureAtlas(512, 512)
frame0 = pt.render_partial(mesh, texel_map, atlas, cam)
print(f"pass 1: mask covers {frame0.mask.mean():.1%} of pixels (nothing textured yet)")

# Propagate a tinted translation and render the same view again: previously
# textured surfaces now come back in color with mask=1.
generated = pt.TintStubTranslator().translate(frame0)
pt.update_atlas(atlas, pt.gather_contributions(generated, frame0, texel_map), 0)
frame1 = pt.render_partial(mesh, texel_map, atlas, cam)
print(f"pass 2: mask covers {frame1.mask.mean():.1%} of pixels")

pngio.save_frame(out, 0, frame0, generated)
pngio.save_frame(out, 1, frame1)
print(f"frames, masks, and 16-bit depth maps written to {out}/")
