"""Command-line interface: ``atlasgeo <command> ...``.

Exit codes: 0 success, 2 usage, 3 no path, 4 format/IO, 5 internal.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import analytic
from .atlas import Atlas, LatentCoord
from .errors import (
    DomainError,
    FingerprintError,
    FormatError,
    NoConnectionError,
    NoPathError,
    UsageError,
)
from .graph import BuildConfig, build_graph, graph_stats
from .io import guess_format, load_dataset, load_graph, save_graph, save_path, write_pgm
from .metric import DEFAULT_FD_STEP, pullback_metric
from .neural import load_neural_atlas
from .search import astar, chart_transitions, geodesic_between, resample_equidistant

EXIT_OK, EXIT_USAGE, EXIT_NO_PATH, EXIT_FORMAT, EXIT_INTERNAL = 0, 2, 3, 4, 5


def resolve_atlas(spec: str) -> Atlas:
    """``flat`` / ``circle`` / ``sphere`` or ``neural:<weights.json>``."""
    if spec.startswith("neural:"):
        path = spec[len("neural:"):]
        if not path:
            raise UsageError("neural atlas spec needs a path: neural:<weights.json>")
        return load_neural_atlas(path)
    return analytic.make_atlas(spec)


def _is_analytic(spec: str) -> bool:
    return spec in analytic.ATLAS_NAMES


def _load_points(args, atlas: Atlas, n_default: int | None = None) -> np.ndarray:
    if args.data is None:
        if not _is_analytic(args.atlas):
            raise UsageError("--data is required for neural atlases")
        return analytic.sample_manifold(args.atlas, args.n if n_default is None else n_default, args.seed)
    fmt = guess_format(args.data) if args.format == "auto" else args.format
    data = load_dataset(args.data, fmt).data
    if data.size and data.shape[1] != atlas.D:
        raise UsageError(f"dataset dimension {data.shape[1]} does not match atlas dimension {atlas.D}")
    return data.reshape(-1, atlas.D)


def _fmt(v: float) -> str:
    return repr(float(v))


def cmd_build_graph(args) -> int:
    atlas = resolve_atlas(args.atlas)
    cfg = BuildConfig(N=args.n, k=args.k, n=args.steps, eps=args.eps, seed=args.seed)
    data = _load_points(args, atlas)
    graph = build_graph(atlas, data, cfg)
    save_graph(graph, args.out)
    stats = graph_stats(graph)
    for msg in graph.warnings:
        print(f"warning: {msg}", file=sys.stderr)
    print(stats.table_row())
    print(f"charts {len(stats.chart_counts)} {stats.chart_counts}")
    print(f"intra-chart edges {stats.intra_edges}, cross-chart edges {stats.cross_edges}, components {stats.components}")
    return EXIT_OK


def _parse_shape(text: str) -> tuple[int, int]:
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"--frame-shape must look like 28x28, got {text!r}") from None
    return w, h


def cmd_interpolate(args) -> int:
    atlas = resolve_atlas(args.atlas)
    graph = load_graph(args.graph)
    graph.check_atlas(atlas)
    if args.from_index is not None or args.to_index is not None:
        if args.from_index is None or args.to_index is None:
            raise UsageError("--from-index and --to-index go together")
        path = astar(graph, args.from_index, args.to_index)
    elif args.from_coords is not None and args.to_coords is not None:
        path = geodesic_between(graph, atlas, _vec(args.from_coords, atlas.D), _vec(args.to_coords, atlas.D), args.k)
    else:
        raise UsageError("give either --from-index/--to-index or --from-coords/--to-coords")
    samples = resample_equidistant(path, atlas, args.samples)
    save_path(path, args.out, samples)
    if args.frames:
        if args.frame_shape is None:
            raise UsageError("--frames needs --frame-shape WxH")
        w, h = _parse_shape(args.frame_shape)
        out_dir = Path(args.frames)
        out_dir.mkdir(parents=True, exist_ok=True)
        for j, (_, x) in enumerate(samples):
            write_pgm(x, w, h, out_dir / f"frame_{j:03d}.pgm")
    print(f"total length {path.total_length:.6f} over {path.hops} hops ({path.cross_chart_segments} cross-chart)")
    print("charts " + " ".join(f"y{c.chart}" for c, _ in samples))
    for j, before, after in chart_transitions(samples):
        print(f"samples {j - 1}->{j}: y{before}/y{after}")
    return EXIT_OK


def _vec(values, length: int) -> np.ndarray:
    if len(values) != length:
        raise UsageError(f"expected {length} coordinates, got {len(values)}")
    return np.array(values, dtype=np.float64)


def cmd_eval(args) -> int:
    atlas = resolve_atlas(args.atlas)
    graph = load_graph(args.graph)
    graph.check_atlas(atlas)
    rng = np.random.default_rng(args.seed)
    if args.data is not None:
        pool = _load_points(args, atlas)
    elif _is_analytic(args.atlas):
        pool = analytic.sample_manifold(args.atlas, 2 * args.pairs, args.seed)
    else:
        pool = np.array([n.decoded for n in graph.nodes if not n.query])
    if len(pool) < 2:
        raise UsageError("need at least two points to form pairs")
    lines = ["pair_id,oracle_distance,graph_length,hops,cross_chart_segments"]
    ratios = []
    for pair in range(args.pairs):
        if args.data is None and _is_analytic(args.atlas):
            x0, x1 = pool[2 * pair], pool[2 * pair + 1]
        else:
            i, j = rng.choice(len(pool), size=2, replace=False)
            x0, x1 = pool[i], pool[j]
        path = geodesic_between(graph, atlas, x0, x1, args.k)
        oracle = ""
        if _is_analytic(args.atlas):
            dist = analytic.oracle_distance(args.atlas, x0, x1)
            oracle = _fmt(dist)
            if dist > 0:
                ratios.append(path.total_length / dist)
        lines.append(f"{pair},{oracle},{_fmt(path.total_length)},{path.hops},{path.cross_chart_segments}")
    Path(args.out).write_text("\n".join(lines) + "\n")
    if ratios:
        print(f"{args.pairs} pairs: mean length/oracle {np.mean(ratios):.4f}, max {np.max(ratios):.4f}")
    else:
        print(f"{args.pairs} pairs evaluated")
    return EXIT_OK


def cmd_confidence(args) -> int:
    atlas = resolve_atlas(args.atlas)
    data = _load_points(args, atlas)
    lines = ["index,confidence,chart"]
    if len(data):
        psi = atlas.partition_batch(data)
        for i, w in enumerate(psi):
            lines.append(f"{i},{_fmt(w.max())},{int(np.argmax(w)) + 1}")
    Path(args.out).write_text("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_metric(args) -> int:
    atlas = resolve_atlas(args.atlas)
    z = _vec(args.point, atlas.d)
    g = pullback_metric(atlas, LatentCoord(args.chart, z), args.h)
    for row in g:
        print(" ".join(f"{v: .10g}" for v in row))
    return EXIT_OK


def _add_data_args(p, n_default: int = 2000) -> None:
    p.add_argument("--data", help="dataset file; analytic atlases sample their manifold when omitted")
    p.add_argument("--format", default="auto", choices=("auto", "csv", "raw_f32", "idx"))
    p.add_argument("--n", type=int, default=n_default, help="points to sample (N)")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="atlasgeo", description="Graph geodesics across the charts of multi-chart generative models.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-graph", help="build a latent graph and print its statistics")
    p.add_argument("--atlas", required=True, help="flat | circle | sphere | neural:<weights.json>")
    _add_data_args(p)
    p.add_argument("--k", type=int, default=20, help="nearest neighbours per node")
    p.add_argument("--steps", type=int, default=15, help="curve-length steps per edge")
    p.add_argument("--eps", type=float, default=0.05, help="partition-of-unity cutoff")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_graph)

    p = sub.add_parser("interpolate", help="geodesic interpolation between two points")
    p.add_argument("--graph", required=True)
    p.add_argument("--atlas", required=True)
    p.add_argument("--from-index", type=int)
    p.add_argument("--to-index", type=int)
    p.add_argument("--from-coords", type=float, nargs="+", metavar="X")
    p.add_argument("--to-coords", type=float, nargs="+", metavar="X")
    p.add_argument("--k", type=int, default=None, help="query connections (default: graph's k)")
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--out", required=True)
    p.add_argument("--frames", help="directory for one PGM frame per sample")
    p.add_argument("--frame-shape", help="frame size WxH, e.g. 28x28")
    p.set_defaults(func=cmd_interpolate)

    p = sub.add_parser("eval", help="geodesic lengths for random pairs, as CSV")
    p.add_argument("--graph", required=True)
    p.add_argument("--atlas", required=True)
    p.add_argument("--pairs", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--data")
    p.add_argument("--format", default="auto", choices=("auto", "csv", "raw_f32", "idx"))
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("confidence", help="chart assignment confidence max_y psi_y(x), as CSV")
    p.add_argument("--atlas", required=True)
    _add_data_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_confidence)

    p = sub.add_parser("metric", help="print the pullback metric at a latent point")
    p.add_argument("--atlas", required=True)
    p.add_argument("--chart", type=int, required=True)
    p.add_argument("--point", type=float, nargs="+", required=True, metavar="Z")
    p.add_argument("--h", type=float, default=DEFAULT_FD_STEP)
    p.set_defaults(func=cmd_metric)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NoPathError, NoConnectionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_PATH
    except (FormatError, FingerprintError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
