"""Shortest-path geodesics on a latent graph."""
from __future__ import annotations

import heapq
from bisect import bisect_right
from collections import deque
from dataclasses import dataclass

import numpy as np

from .atlas import Atlas, LatentCoord, argmax_chart, encode
from .errors import NoPathError, UsageError
from .graph import CROSS, LatentGraph, add_query_node
from .metric import DEFAULT_STEPS


@dataclass(frozen=True)
class GeodesicPath:
    """A graph path: the latent nodes visited and the weight of each hop."""

    node_ids: tuple
    nodes: tuple
    segment_lengths: tuple
    segment_kinds: tuple
    total_length: float

    @property
    def hops(self) -> int:
        return len(self.segment_lengths)

    @property
    def cross_chart_segments(self) -> int:
        return sum(1 for kind in self.segment_kinds if kind == CROSS)


def heuristic(u, g) -> float:
    """Ambient chord between two graph nodes' decodings.

    Never overestimates: every edge weighs at least the chord of its
    endpoints, so by the triangle inequality ``w(u, v) >= |h(u) - h(v)|``.
    """
    return float(np.linalg.norm(np.asarray(u.decoded) - np.asarray(g.decoded)))


def _component_size(graph: LatentGraph, start: int) -> int:
    seen = {start}
    todo = deque([start])
    while todo:
        u = todo.popleft()
        for v, _, _ in graph.adjacency[u]:
            if v not in seen:
                seen.add(v)
                todo.append(v)
    return len(seen)


def _check_ids(graph: LatentGraph, *ids) -> None:
    for i in ids:
        if not 0 <= i < len(graph.nodes):
            raise UsageError(f"node id {i} not in graph")


def _best_first(graph: LatentGraph, start: int, goal: int, h) -> GeodesicPath:
    # Entries are (priority, node id, cost) so equal priorities pop in id order.
    # Nodes are re-expanded whenever a cheaper cost turns up, which keeps the
    # search exact even if roundoff makes the heuristic marginally inconsistent.
    best = {start: 0.0}
    parent: dict[int, tuple] = {start: None}
    heap = [(h[start], start, 0.0)]
    while heap:
        _, u, cost = heapq.heappop(heap)
        if cost > best[u]:
            continue
        if u == goal:
            break
        for v, w, kind in graph.adjacency[u]:
            new = cost + w
            if v not in best or new < best[v]:
                best[v] = new
                parent[v] = (u, w, kind)
                heapq.heappush(heap, (new + h[v], v, new))
    else:
        raise NoPathError(
            f"no path between node {start} (component of {_component_size(graph, start)} nodes) "
            f"and node {goal} (component of {_component_size(graph, goal)} nodes)"
        )
    ids, lengths, kinds = [goal], [], []
    link = parent[goal]
    while link is not None:
        u, w, kind = link
        ids.append(u)
        lengths.append(w)
        kinds.append(kind)
        link = parent[u]
    ids.reverse()
    lengths.reverse()
    kinds.reverse()
    total = 0.0
    for w in lengths:
        total += w
    return GeodesicPath(
        node_ids=tuple(ids),
        nodes=tuple(graph.nodes[i].coord for i in ids),
        segment_lengths=tuple(lengths),
        segment_kinds=tuple(kinds),
        total_length=total,
    )


class _ZeroHeuristic:
    def __getitem__(self, i):
        return 0.0


def astar(graph: LatentGraph, start: int, goal: int) -> GeodesicPath:
    """Minimum-weight path from ``start`` to ``goal`` guided by the ambient chord to the goal."""
    _check_ids(graph, start, goal)
    dec = graph.decoded_matrix()
    h = np.sqrt(np.sum((dec - dec[goal]) ** 2, axis=1)).tolist()
    return _best_first(graph, start, goal, h)


def dijkstra_oracle(graph: LatentGraph, start: int, goal: int) -> GeodesicPath:
    """Plain Dijkstra; reference answer for ``astar``."""
    _check_ids(graph, start, goal)
    return _best_first(graph, start, goal, _ZeroHeuristic())


def geodesic_between(graph: LatentGraph, atlas: Atlas, x0, x1, k: int | None = None) -> GeodesicPath:
    """Graph geodesic between two ambient points.

    Each endpoint is encoded in its most confident chart and attached to its
    ``k`` nearest nodes there (default: the graph's build ``k``). The query
    nodes live in a private overlay, so ``graph`` is not modified.
    """
    graph.check_atlas(atlas)
    k = graph.config.k if k is None else k
    session = graph.overlay()
    ends = []
    for x in (x0, x1):
        chart = argmax_chart(atlas, x)
        ends.append(add_query_node(session, atlas, LatentCoord(chart, encode(atlas, chart, x)), k))
    return astar(session, ends[0], ends[1])


def _locate_on_segment(atlas: Atlas, a: LatentCoord, b: LatentCoord, fraction: float, steps: int) -> np.ndarray:
    """Latent point at ``fraction`` of the segment's discretised arc length."""
    t = np.arange(steps + 1) / steps
    pts = a.z[None, :] + t[:, None] * (b.z - a.z)[None, :]
    pts[-1] = b.z
    x = atlas.decode_batch(a.chart, pts)
    cum = np.concatenate([[0.0], np.cumsum(np.sqrt(np.sum(np.diff(x, axis=0) ** 2, axis=1)))])
    if cum[-1] == 0.0:
        return a.z + fraction * (b.z - a.z)
    target = fraction * cum[-1]
    i = min(int(np.searchsorted(cum, target, side="right")) - 1, steps - 1)
    piece = cum[i + 1] - cum[i]
    local = (target - cum[i]) / piece if piece > 0 else 0.0
    return a.z + ((i + local) / steps) * (b.z - a.z)


def resample_equidistant(
    path: GeodesicPath, atlas: Atlas, count: int, steps: int = DEFAULT_STEPS
) -> list[tuple[LatentCoord, np.ndarray]]:
    """``count`` samples spaced evenly in arc length along ``path``.

    Within an intra-chart segment the sample is placed on the straight latent
    line so that the ``steps``-step discretised length up to it is the right
    share of the segment. There is no latent interpolant across charts, so a
    sample that falls inside a cross-chart segment snaps to the nearer
    endpoint.
    """
    if count < 2:
        raise UsageError("count must be >= 2")
    nodes = path.nodes
    cum = [0.0]
    for w in path.segment_lengths:
        cum.append(cum[-1] + w)
    total = cum[-1]
    out = []
    for j in range(count):
        if j == 0 or j == count - 1 or total == 0.0:
            coord = nodes[-1] if j == count - 1 else nodes[0]
            out.append((coord, atlas.decode_batch(coord.chart, coord.z)))
            continue
        t = j * total / (count - 1)
        # first segment whose span contains t; zero-length segments are skipped
        s = min(bisect_right(cum, t) - 1, len(path.segment_lengths) - 1)
        a, b = nodes[s], nodes[s + 1]
        length = path.segment_lengths[s]
        frac = min((t - cum[s]) / length, 1.0) if length > 0 else 0.0
        if frac <= 0.0:
            coord = a
        elif path.segment_kinds[s] == CROSS:
            coord = a if frac <= 0.5 else b
        else:
            coord = LatentCoord(a.chart, _locate_on_segment(atlas, a, b, frac, steps))
        out.append((coord, atlas.decode_batch(coord.chart, coord.z)))
    return out


def chart_transitions(samples) -> list[tuple[int, int, int]]:
    """``(sample index, chart before, chart after)`` wherever consecutive samples change chart."""
    return [
        (j, samples[j - 1][0].chart, samples[j][0].chart)
        for j in range(1, len(samples))
        if samples[j][0].chart != samples[j - 1][0].chart
    ]
