"""Decoded image frames along a geodesic of a learned two-chart model.

The model bundled with the tests maps a 2-d latent space per chart to
28x28 images. Frames are written as PGM files to ./frames_demo/.

Run: python demos/neural_frames.py
"""
from pathlib import Path

import numpy as np

import atlasgeo as ag

here = Path(__file__).resolve().parent
fixtures = here.parent / "tests" / "fixtures"

atlas = ag.load_neural_atlas(fixtures / "neural_mnistlike.json")
images = ag.load_dataset(fixtures / "mnistlike-images.idx", "idx")
print(f"{images.rows} images of dimension {images.dim}; model dims (m, d, D) = {atlas.dims}")

graph = ag.build_graph(atlas, images.data, ag.BuildConfig(N=300, k=8))
stats = ag.graph_stats(graph)
print(stats.table_row(), " charts:", stats.chart_counts)

# learned charts only approximately agree, so cross-chart jumps cost something
cross = np.array([e.weight for e in graph.edges if e.kind == "cross_chart"])
if cross.size:
    print(f"cross-chart jump: median {np.median(cross):.3f}, max {cross.max():.3f}")

path = ag.geodesic_between(graph, atlas, images.data[0], images.data[1])
samples = ag.resample_equidistant(path, atlas, 8)
out = Path("frames_demo")
out.mkdir(exist_ok=True)
for j, (coord, x) in enumerate(samples):
    ag.write_pgm(x, 28, 28, out / f"frame_{j:03d}.pgm")
print(f"wrote {len(samples)} frames to {out}/ ; charts", " ".join(f"y{c.chart}" for c, _ in samples))
for j, a, b in ag.chart_transitions(samples):
    print(f"  y{a}/y{b} between frames {j - 1} and {j}")
