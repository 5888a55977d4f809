"""Graph-based geodesics across the charts of multi-chart generative models.

An atlas is a set of charts (encoder/decoder pairs) plus a partition of
unity. This package builds k-nearest-neighbour graphs in every chart's latent
space, glues the charts together where their domains overlap and answers
shortest-path (geodesic) queries across charts.
"""
from .analytic import CircleAtlas, FlatAtlas, SphereAtlas, make_atlas, oracle_distance, sample_manifold
from .atlas import (
    Atlas,
    LatentCoord,
    SimplexWeights,
    argmax_chart,
    chart_membership,
    decode,
    encode,
    partition,
)
from .cli import resolve_atlas
from .errors import (
    AtlasGeoError,
    DomainError,
    FingerprintError,
    FormatError,
    NoConnectionError,
    NoPathError,
    UsageError,
)
from .graph import (
    BuildConfig,
    GraphEdge,
    GraphNode,
    GraphStats,
    LatentGraph,
    add_query_node,
    build_graph,
    graph_stats,
    knn,
)
from .io import DatasetMatrix, load_dataset, load_graph, save_graph, save_path, write_pgm
from .metric import (
    SegmentSpec,
    curve_length_discrete,
    curve_lengths,
    jacobian_fd,
    pullback_metric,
    riemannian_inner,
)
from .neural import DenseLayer, NeuralAtlas, load_neural_atlas, mlp_forward, save_neural_atlas
from .search import (
    GeodesicPath,
    astar,
    chart_transitions,
    dijkstra_oracle,
    geodesic_between,
    heuristic,
    resample_equidistant,
)

__version__ = "0.1.0"
