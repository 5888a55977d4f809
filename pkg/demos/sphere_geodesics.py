"""Graph geodesics on the unit sphere, compared with great circles.

Run: python demos/sphere_geodesics.py
"""
import numpy as np

import atlasgeo as ag

# The sphere needs two stereographic charts. Each data point is encoded in
# every chart whose partition weight exceeds eps, so points near the equator
# show up twice and the copies are linked by (free) cross-chart edges.
sphere = ag.make_atlas("sphere")
data = ag.sample_manifold("sphere", 2000, seed=0)
graph = ag.build_graph(sphere, data, ag.BuildConfig(N=2000, k=20))
stats = ag.graph_stats(graph)
print(stats.table_row())
print("nodes per chart:", stats.chart_counts, " cross-chart edges:", stats.cross_edges)

# 20 random pairs: graph length against the great-circle distance
pts = ag.sample_manifold("sphere", 40, seed=1)
ratios = []
for x0, x1 in zip(pts[::2], pts[1::2]):
    path = ag.geodesic_between(graph, sphere, x0, x1)
    ratios.append(path.total_length / ag.oracle_distance("sphere", x0, x1))
ratios = np.array(ratios)
print(f"length / great circle: mean {ratios.mean():.4f}  max {ratios.max():.4f}")

# pole to pole must change chart: the north-pole query lives in chart 2,
# the south-pole query in chart 1
path = ag.geodesic_between(graph, sphere, [0, 0, 1], [0, 0, -1])
print(f"pole to pole: {path.total_length:.4f} (pi = {np.pi:.4f}), "
      f"{path.hops} hops, {path.cross_chart_segments} cross-chart")

# evenly spaced samples along the path, with the chart each one sits in.
# Cross-chart edges cost nothing on the exact atlas, so the path is free to
# switch charts wherever the overlap allows; it may switch more than once.
samples = ag.resample_equidistant(path, sphere, 9)
for coord, x in samples:
    print(f"  y{coord.chart}  x = {np.round(x, 3)}")
for j, a, b in ag.chart_transitions(samples):
    print(f"chart change between samples {j - 1} and {j}: y{a}/y{b}")
