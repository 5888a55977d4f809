"""Chart assignment confidence max_y psi_y(x).

For uniform points on the sphere the stereographic partition gives
max((1 - x3)/2, (1 + x3)/2), which is uniform on [0.5, 1]. A learned
partition is usually far more decisive.

Run: python demos/chart_confidence.py
"""
from pathlib import Path

import numpy as np

import atlasgeo as ag

fixtures = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
x = ag.sample_manifold("sphere", 5000, seed=0)


def histogram(conf, bins=10):
    counts, edges = np.histogram(conf, bins=bins, range=(0.5, 1.0))
    for c, lo in zip(counts, edges):
        print(f"  {lo:.2f}  {'#' * int(60 * c / counts.max())}")


for label, atlas in (("analytic sphere", ag.make_atlas("sphere")),
                     ("learned sphere", ag.load_neural_atlas(fixtures / "neural_sphere.json"))):
    conf = atlas.partition_batch(x).max(axis=1)
    print(f"{label}: mean confidence {conf.mean():.3f}")
    histogram(conf)
