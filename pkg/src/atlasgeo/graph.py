"""Latent-space graphs over an atlas.

Every chart gets a k-nearest-neighbour graph of the encodings of the data
points it is responsible for (``psi_y(x) > eps``), with edges weighted by the
ambient length of the straight latent segment. A data point held by several
charts links its encodings with cross-chart edges weighted by how far their
decodings lie apart in ambient space.
"""
from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path
from scipy.spatial import cKDTree

from .atlas import Atlas, LatentCoord
from .errors import FingerprintError, NoConnectionError, UsageError
from .metric import DEFAULT_FD_STEP, DEFAULT_STEPS, curve_lengths

log = logging.getLogger(__name__)

INTRA = "intra_chart"
CROSS = "cross_chart"
EDGE_KINDS = (INTRA, CROSS)

THREADS_ENV = "ATLAS_GEO_THREADS"
_CHUNK = 2048  # edges per weighting task; fixed so results do not depend on thread count


@dataclass(frozen=True)
class BuildConfig:
    N: int = 2000
    k: int = 20
    n: int = DEFAULT_STEPS
    eps: float = 0.05
    seed: int = 0
    h: float = DEFAULT_FD_STEP

    def __post_init__(self):
        if self.k < 1:
            raise UsageError("k must be >= 1")
        if self.N < self.k + 1:
            raise UsageError(f"N must be at least k + 1 = {self.k + 1}")
        if self.n < 1:
            raise UsageError("curve-length steps n must be >= 1")
        if self.eps < 0:
            raise UsageError("eps must be non-negative")
        if not self.h > 0:
            raise UsageError("finite-difference step h must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class GraphNode:
    id: int
    coord: LatentCoord
    decoded: np.ndarray = field(repr=False)
    source_index: Optional[int] = None
    query: bool = False

    @property
    def chart(self) -> int:
        return self.coord.chart


@dataclass(frozen=True)
class GraphEdge:
    a: int
    b: int
    weight: float
    kind: str


@dataclass(frozen=True)
class GraphStats:
    nodes: int
    edges: int
    diameter: int
    components: int
    chart_counts: dict
    intra_edges: int
    cross_edges: int

    def table_row(self) -> str:
        """Nodes / edges / diameter, as in a model-summary table."""
        return f"nodes {self.nodes} / edges {self.edges} / diameter {self.diameter}"


class LatentGraph:
    """Undirected weighted graph whose nodes are latent coordinates.

    Node ids are dense ``0..len-1``. ``adjacency[i]`` lists
    ``(neighbour, weight, kind)``; each edge appears once in ``edges`` with
    ``a < b`` and in both adjacency lists.
    """

    def __init__(self, config: BuildConfig, atlas_spec: str, fingerprint: dict):
        self.config = config
        self.atlas_spec = atlas_spec
        self.fingerprint = dict(fingerprint)
        self.nodes: list[GraphNode] = []
        self.adjacency: list[list[tuple[int, float, str]]] = []
        self.edges: list[GraphEdge] = []
        self.warnings: list[str] = []
        self._owned: Optional[set[int]] = None  # copy-on-write bookkeeping for overlays
        self._cache: dict = {}

    def __len__(self):
        return len(self.nodes)

    def __repr__(self):
        return f"LatentGraph(nodes={len(self.nodes)}, edges={len(self.edges)}, atlas={self.atlas_spec!r})"

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.fingerprint["m"], self.fingerprint["d"], self.fingerprint["D"])

    def add_node(self, coord: LatentCoord, decoded, source_index=None, query=False) -> int:
        node_id = len(self.nodes)
        decoded = np.array(decoded, dtype=np.float64)
        decoded.setflags(write=False)
        self.nodes.append(GraphNode(node_id, coord, decoded, source_index, query))
        self.adjacency.append([])
        if self._owned is not None:
            self._owned.add(node_id)
        self._cache.clear()
        return node_id

    def _own(self, i: int) -> list:
        if self._owned is not None and i not in self._owned:
            self.adjacency[i] = list(self.adjacency[i])
            self._owned.add(i)
        return self.adjacency[i]

    def add_edge(self, a: int, b: int, weight: float, kind: str) -> None:
        if a == b:
            raise UsageError("self-loops are not allowed")
        if weight < 0:
            raise UsageError("edge weights must be non-negative")
        if kind not in EDGE_KINDS:
            raise UsageError(f"unknown edge kind {kind!r}")
        a, b = min(a, b), max(a, b)
        weight = float(weight)
        self.edges.append(GraphEdge(a, b, weight, kind))
        self._own(a).append((b, weight, kind))
        self._own(b).append((a, weight, kind))

    def overlay(self) -> "LatentGraph":
        """Cheap copy for query sessions; adding nodes to it leaves ``self`` unchanged."""
        view = LatentGraph.__new__(LatentGraph)
        view.config = self.config
        view.atlas_spec = self.atlas_spec
        view.fingerprint = dict(self.fingerprint)
        view.nodes = list(self.nodes)
        view.adjacency = list(self.adjacency)
        view.edges = list(self.edges)
        view.warnings = list(self.warnings)
        view._owned = set()
        view._cache = dict(self._cache)
        return view

    def chart_index(self, chart: int) -> tuple[np.ndarray, np.ndarray]:
        """Ids and latent coordinates of all nodes in ``chart``."""
        key = ("chart", chart)
        if key not in self._cache:
            ids = np.array([n.id for n in self.nodes if n.coord.chart == chart], dtype=np.int64)
            z = np.array([self.nodes[i].coord.z for i in ids], dtype=np.float64).reshape(len(ids), self.dims[1])
            self._cache[key] = (ids, z)
        return self._cache[key]

    def decoded_matrix(self) -> np.ndarray:
        if "decoded" not in self._cache:
            self._cache["decoded"] = np.array([n.decoded for n in self.nodes], dtype=np.float64).reshape(
                len(self.nodes), self.dims[2]
            )
        return self._cache["decoded"]

    def check_atlas(self, atlas: Atlas) -> None:
        """Raise ``FingerprintError`` unless ``atlas`` is the one the graph was built with."""
        if atlas.fingerprint != self.fingerprint:
            raise FingerprintError(
                f"graph was built for atlas {self.atlas_spec!r} {self.fingerprint}, "
                f"got {atlas.spec!r} {atlas.fingerprint}"
            )


def knn(points, k: int) -> np.ndarray:
    """Exact k nearest neighbours of every point among the others.

    Returns an ``(P, k)`` index array ordered by distance; equal distances are
    resolved in favour of the lower index.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    n_pts = len(pts)
    if k < 1:
        raise UsageError("k must be >= 1")
    if n_pts < k + 1:
        raise UsageError(f"knn needs at least k + 1 = {k + 1} points, got {n_pts}")
    tree = cKDTree(pts)
    # distance to the k-th other point is the (k+1)-th smallest including self
    dk, _ = tree.query(pts, k=k + 1)
    radius = dk[:, -1] * (1.0 + 1e-9) + 1e-300
    # every point within that radius is a candidate, so ties at the boundary are seen
    candidates = tree.query_ball_point(pts, radius)
    out = np.empty((n_pts, k), dtype=np.int64)
    for i, cand in enumerate(candidates):
        cand = np.array([c for c in cand if c != i], dtype=np.int64)
        dist = np.sqrt(np.sum((pts[cand] - pts[i]) ** 2, axis=1))
        order = np.lexsort((cand, dist))
        out[i] = cand[order[:k]]
    return out


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise UsageError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return os.cpu_count() or 1


def _weigh_segments(atlas: Atlas, chart: int, z_a, z_b, n: int, threads: int) -> np.ndarray:
    if len(z_a) == 0:
        return np.zeros(0)
    starts = range(0, len(z_a), _CHUNK)
    job = lambda s: curve_lengths(atlas, chart, z_a[s:s + _CHUNK], z_b[s:s + _CHUNK], n)
    if threads <= 1 or len(z_a) <= _CHUNK:
        parts = [job(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(job, starts))
    return np.concatenate(parts)


def _warn(graph: LatentGraph, msg: str) -> None:
    graph.warnings.append(msg)
    log.warning(msg)


def build_graph(atlas: Atlas, data, cfg: BuildConfig = BuildConfig(), threads: Optional[int] = None) -> LatentGraph:
    """Build the multi-chart latent graph from ``cfg.N`` points of ``data``.

    Points are drawn without replacement with ``cfg.seed``. For chart ``i``
    the points with ``psi_i > eps`` are encoded, joined to their ``k`` nearest
    latent neighbours (union-symmetrised) and each edge weighted by the
    ``n``-step discretised curve length. Every point shared by charts
    ``j < i`` gets a cross-chart edge between its two encodings.
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[1] != atlas.D:
        raise UsageError(f"data must be an (rows, {atlas.D}) array, got shape {data.shape}")
    if len(data) < cfg.N:
        raise UsageError(f"data has {len(data)} rows, fewer than N = {cfg.N}")
    threads = _thread_count() if threads is None else max(1, threads)

    rng = np.random.default_rng(cfg.seed)
    sample = rng.choice(len(data), size=cfg.N, replace=False)
    x = data[sample]
    psi = atlas.partition_batch(x)

    graph = LatentGraph(cfg, atlas.spec, atlas.fingerprint)
    # node_of[chart][position in sample] -> node id, -1 when not a member
    node_of = np.full((atlas.m + 1, cfg.N), -1, dtype=np.int64)
    decoded_of: dict[int, np.ndarray] = {}

    for i in range(1, atlas.m + 1):
        members = np.flatnonzero(psi[:, i - 1] > cfg.eps)
        if len(members) == 0:
            _warn(graph, f"chart {i}: no points with psi > {cfg.eps}; chart skipped")
            continue
        z = atlas.encode_batch(i, x[members])
        dec = atlas.decode_batch(i, z)
        decoded_of[i] = np.empty((cfg.N, atlas.D))
        decoded_of[i][members] = dec
        for pos, zi, xi in zip(members, z, dec):
            node_of[i, pos] = graph.add_node(LatentCoord(i, zi), xi, source_index=int(sample[pos]))

        k_eff = min(cfg.k, len(members) - 1)
        if k_eff < cfg.k:
            _warn(graph, f"chart {i}: only {len(members)} points, using k = {k_eff}")
        if k_eff >= 1:
            nbrs = knn(z, k_eff)
            src = np.repeat(np.arange(len(members)), k_eff)
            dst = nbrs.ravel()
            lo, hi = np.minimum(src, dst), np.maximum(src, dst)
            pairs = np.unique(lo * len(members) + hi)
            pa, pb = pairs // len(members), pairs % len(members)
            weights = _weigh_segments(atlas, i, z[pa], z[pb], cfg.n, threads)
            ids = node_of[i, members]
            for a, b, w in zip(ids[pa], ids[pb], weights):
                graph.add_edge(int(a), int(b), w, INTRA)

        for j in range(1, i):
            if j not in decoded_of:
                continue
            shared = np.flatnonzero((node_of[i] >= 0) & (node_of[j] >= 0))
            jumps = np.sqrt(np.sum((decoded_of[i][shared] - decoded_of[j][shared]) ** 2, axis=1))
            for pos, w in zip(shared, jumps):
                graph.add_edge(int(node_of[j, pos]), int(node_of[i, pos]), w, CROSS)

    return graph


def add_query_node(graph: LatentGraph, atlas: Atlas, p: LatentCoord, k: int) -> int:
    """Insert ``p`` into ``graph`` and link it to its ``k`` nearest nodes in chart ``p.chart``.

    Mutates ``graph``; pass ``graph.overlay()`` to keep the original intact.
    """
    graph.check_atlas(atlas)
    if k < 1:
        raise UsageError("k must be >= 1")
    ids, z = graph.chart_index(p.chart)
    if len(ids) == 0:
        raise NoConnectionError(f"chart {p.chart} has no nodes to connect a query point to")
    dist = np.sqrt(np.sum((z - p.z) ** 2, axis=1))
    order = np.lexsort((ids, dist))[:k]
    nbr_ids, nbr_z = ids[order], z[order]
    weights = curve_lengths(atlas, p.chart, np.repeat(p.z[None], len(order), axis=0), nbr_z, graph.config.n)
    decoded = atlas.decode_batch(p.chart, p.z)
    new = graph.add_node(p, decoded, source_index=None, query=True)
    for b, w in zip(nbr_ids, weights):
        graph.add_edge(int(b), new, w, INTRA)
    return new


def _csr(graph: LatentGraph) -> csr_matrix:
    n = len(graph.nodes)
    if not graph.edges:
        return csr_matrix((n, n))
    a = np.array([e.a for e in graph.edges])
    b = np.array([e.b for e in graph.edges])
    ones = np.ones(2 * len(a))
    return csr_matrix((ones, (np.concatenate([a, b]), np.concatenate([b, a]))), shape=(n, n))


def graph_stats(graph: LatentGraph) -> GraphStats:
    """Node/edge counts, component count and hop diameter of the largest component."""
    n = len(graph.nodes)
    counts: dict[int, int] = {}
    for node in graph.nodes:
        counts[node.chart] = counts.get(node.chart, 0) + 1
    n_cross = sum(1 for e in graph.edges if e.kind == CROSS)
    if n == 0:
        return GraphStats(0, 0, 0, 0, {}, 0, 0)
    adj = _csr(graph)
    n_comp, labels = connected_components(adj, directed=False)
    sizes = np.bincount(labels)
    # largest component; ties go to the one containing the lowest node id
    biggest = labels[np.flatnonzero(sizes[labels] == sizes.max())[0]]
    members = np.flatnonzero(labels == biggest)
    sub = adj[members][:, members]
    diameter = 0
    for s in range(0, len(members), 512):
        hops = shortest_path(sub, unweighted=True, directed=False, indices=np.arange(s, min(s + 512, len(members))))
        diameter = max(diameter, int(hops.max()))
    return GraphStats(
        nodes=n,
        edges=len(graph.edges),
        diameter=diameter,
        components=int(n_comp),
        chart_counts=dict(sorted(counts.items())),
        intra_edges=len(graph.edges) - n_cross,
        cross_edges=n_cross,
    )
