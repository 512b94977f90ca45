#!/usr/bin/env python3
"""Bake a synthetic city block end to end.

Generates the two-street demo scene, walks all ten viewpoints with the tint
stub standing in for a learned translator, and leaves the atlas plus
per-iteration panoramas under demo_out/bake/. Equivalent CLI:

    put bake-demo --out demo_out/scene
    put bake --mesh demo_out/scene/demo.obj --streets demo_out/scene/streets.json \
        --translator stub --out demo_out/bake
"""

from pathlib import Path

import panotex as pt

out = Path("demo_out")

# A procedural stand-in scene: box buildings along a straight street and an
# L-shaped street, unwrapped into one shelf-packed atlas.
mesh_path, streets_path = pt.write_demo_scene(out / "scene", seed=0, atlas_size=1024)
mesh = pt.load_mesh(mesh_path.read_text())
streets = pt.load_streets(streets_path.read_text())
print(f"scene: {len(mesh.faces)} triangles, {len(streets.polylines)} streets")

config = pt.PipelineConfig(
    atlas_size=1024,
    translator="stub",  # colorizes untextured regions so propagation is visible
    output_dir=str(out / "bake"),
)
atlas, report = pt.run_pipeline(mesh, streets, config)

covered = int((atlas.contribution_count > 0).sum())
print(f"baked {atlas.iteration_count} iterations, {covered} texels covered")
print("per-iteration consistency:", [round(c, 5) for c in report["consistency_per_iteration"]])
print("seam metric:", round(report["seam"], 4))
print(f"atlas: {out / 'bake' / 'atlas.png'}")
