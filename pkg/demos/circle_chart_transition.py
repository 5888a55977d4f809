"""Why one chart is not enough: the circle.

No single chart can map the whole circle to an interval, so the antipodal
query (1, 0) -> (-1, 0) has to hop between the two angle charts.

Run: python demos/circle_chart_transition.py
"""
import numpy as np

import atlasgeo as ag

circle = ag.make_atlas("circle")

# partition of unity along the circle: chart 1 owns theta ~ 0, chart 2 theta ~ pi
theta = np.linspace(-np.pi, np.pi, 9)
x = np.stack([np.cos(theta), np.sin(theta)], axis=1)
for t, w in zip(theta, circle.partition_batch(x)):
    print(f"theta {t:+.2f}  psi = ({w[0]:.2f}, {w[1]:.2f})")

graph = ag.build_graph(circle, ag.sample_manifold("circle", 500, 0), ag.BuildConfig(N=500, k=10))
print(ag.graph_stats(graph).table_row())

path = ag.geodesic_between(graph, circle, [1.0, 0.0], [-1.0, 0.0])
print(f"(1,0) -> (-1,0): length {path.total_length:.5f}, pi = {np.pi:.5f}")
print("charts along the path:", "".join(str(c.chart) for c in path.nodes))

# the same endpoints with eps = 0.5 cannot overlap the charts, so the
# two chart subgraphs never meet
sparse = ag.build_graph(circle, ag.sample_manifold("circle", 500, 0), ag.BuildConfig(N=500, k=10, eps=0.5))
try:
    ag.geodesic_between(sparse, circle, [1.0, 0.0], [-1.0, 0.0])
except ag.NoPathError as exc:
    print("without overlap:", exc)
