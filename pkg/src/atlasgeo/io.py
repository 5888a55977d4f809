"""Dataset loaders, graph and path persistence, PGM frames.

Dataset formats
---------------
``csv``      one point per line, comma-separated decimals.
``raw_f32``  16-byte header: ``b"AGMD"``, u32 rows, u32 dim, u32 reserved (0),
             all little-endian, then ``rows * dim`` little-endian float32.
``idx``      the MNIST container: big-endian magic ``0x000008NN`` (unsigned
             bytes, ``NN`` dimensions), ``NN`` big-endian u32 sizes, then the
             payload. Pixels are scaled by 1/255 and each item is flattened.

JSON floats are written with Python's shortest round-trip repr, so reading
a file back gives bit-identical doubles and re-saving gives identical bytes.
"""
from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .atlas import LatentCoord
from .errors import FormatError, UsageError
from .graph import EDGE_KINDS, BuildConfig, LatentGraph

DATASET_FORMATS = ("csv", "raw_f32", "idx")
RAW_MAGIC = b"AGMD"
_RAW_HEADER = struct.Struct("<4sIII")
IDX_UBYTE = 0x08


@dataclass(frozen=True, eq=False)
class DatasetMatrix:
    data: np.ndarray
    source: str
    format: str

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]


def guess_format(path) -> str:
    name = Path(path).name.lower()
    if name.endswith(".csv") or name.endswith(".txt"):
        return "csv"
    if name.endswith((".agmd", ".f32", ".bin")):
        return "raw_f32"
    if name.endswith(".idx") or "-idx" in name or "ubyte" in name:
        return "idx"
    raise UsageError(f"cannot infer dataset format of {path}; pass one of {', '.join(DATASET_FORMATS)}")


def _parse_csv(text: str) -> np.ndarray:
    rows = []
    width = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        row = []
        for col, cell in enumerate(line.split(","), start=1):
            try:
                value = float(cell)
            except ValueError:
                raise FormatError(f"line {lineno}, column {col}: not a number: {cell.strip()!r}") from None
            if not math.isfinite(value):
                raise FormatError(f"line {lineno}, column {col}: non-finite value")
            row.append(value)
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise FormatError(f"line {lineno}: expected {width} values, got {len(row)}")
        rows.append(row)
    if not rows:
        return np.zeros((0, 0))
    return np.array(rows, dtype=np.float64)


def _parse_raw(buf: bytes) -> np.ndarray:
    if len(buf) < _RAW_HEADER.size:
        raise FormatError(f"byte {len(buf)}: truncated header, need {_RAW_HEADER.size} bytes")
    magic, rows, dim, reserved = _RAW_HEADER.unpack_from(buf)
    if magic != RAW_MAGIC:
        raise FormatError(f"byte 0: bad magic {magic!r}, expected {RAW_MAGIC!r}")
    if reserved != 0:
        raise FormatError("byte 12: reserved header field must be zero")
    expected = _RAW_HEADER.size + 4 * rows * dim
    if len(buf) < expected:
        raise FormatError(f"byte {len(buf)}: truncated payload, header declares {rows}x{dim} floats ({expected} bytes)")
    if len(buf) > expected:
        raise FormatError(f"byte {expected}: {len(buf) - expected} trailing bytes after payload")
    data = np.frombuffer(buf, dtype="<f4", count=rows * dim, offset=_RAW_HEADER.size)
    data = data.astype(np.float64).reshape(rows, dim)
    if not np.all(np.isfinite(data)):
        bad = int(np.flatnonzero(~np.isfinite(data.ravel()))[0])
        raise FormatError(f"byte {_RAW_HEADER.size + 4 * bad}: non-finite value")
    return data


def _parse_idx(buf: bytes) -> np.ndarray:
    if len(buf) < 4:
        raise FormatError(f"byte {len(buf)}: truncated magic number")
    zero, dtype, ndim = struct.unpack_from(">HBB", buf)
    if zero != 0:
        raise FormatError("byte 0: bad IDX magic, first two bytes must be zero")
    if dtype != IDX_UBYTE:
        raise FormatError(f"byte 2: unsupported IDX element type 0x{dtype:02x}; only unsigned bytes (0x08)")
    if ndim < 1:
        raise FormatError("byte 3: IDX tensor needs at least one dimension")
    header = 4 + 4 * ndim
    if len(buf) < header:
        raise FormatError(f"byte {len(buf)}: truncated dimension table, need {header} bytes")
    dims = struct.unpack_from(f">{ndim}I", buf, 4)
    rows = dims[0]
    dim = int(np.prod(dims[1:], dtype=np.int64)) if ndim > 1 else 1
    expected = header + rows * dim
    if len(buf) < expected:
        raise FormatError(f"byte {len(buf)}: truncated payload, dimensions {dims} need {expected} bytes")
    if len(buf) > expected:
        raise FormatError(f"byte {expected}: {len(buf) - expected} trailing bytes after payload")
    pixels = np.frombuffer(buf, dtype=np.uint8, count=rows * dim, offset=header)
    return pixels.reshape(rows, dim).astype(np.float64) / 255.0


def load_dataset(path, format: str = "csv") -> DatasetMatrix:
    """Read a point cloud as a ``(rows, dim)`` float64 matrix."""
    path = Path(path)
    if format == "csv":
        data = _parse_csv(path.read_text())
    elif format == "raw_f32":
        data = _parse_raw(path.read_bytes())
    elif format == "idx":
        data = _parse_idx(path.read_bytes())
    else:
        raise UsageError(f"unknown dataset format {format!r}; expected one of {', '.join(DATASET_FORMATS)}")
    return DatasetMatrix(data, str(path), format)


def write_raw_f32(data, path) -> None:
    data = np.asarray(data, dtype="<f4")
    if data.ndim != 2:
        raise UsageError("raw_f32 data must be 2-D")
    rows, dim = data.shape
    Path(path).write_bytes(_RAW_HEADER.pack(RAW_MAGIC, rows, dim, 0) + data.tobytes())


def write_idx(pixels, path) -> None:
    """Write an unsigned-byte IDX tensor, e.g. ``(items, rows, cols)`` images."""
    pixels = np.asarray(pixels)
    if pixels.dtype != np.uint8:
        raise UsageError("IDX writer expects uint8 data")
    head = struct.pack(">HBB", 0, IDX_UBYTE, pixels.ndim) + struct.pack(f">{pixels.ndim}I", *pixels.shape)
    Path(path).write_bytes(head + pixels.tobytes())


def write_csv(data, path) -> None:
    data = np.asarray(data, dtype=np.float64)
    Path(path).write_text("".join(",".join(repr(float(v)) for v in row) + "\n" for row in data))


# -- graphs -----------------------------------------------------------------

def graph_to_dict(graph: LatentGraph, include_queries: bool = False) -> dict:
    keep = [n for n in graph.nodes if include_queries or not n.query]
    kept = {n.id for n in keep}
    return {
        "atlas": graph.atlas_spec,
        "fingerprint": graph.fingerprint,
        "config": graph.config.to_dict(),
        "warnings": list(graph.warnings),
        "nodes": [
            {
                "id": n.id,
                "chart": n.chart,
                "z": n.coord.z.tolist(),
                "decoded": n.decoded.tolist(),
                "src": n.source_index,
            }
            for n in keep
        ],
        "edges": [
            {"a": e.a, "b": e.b, "w": e.weight, "kind": e.kind}
            for e in graph.edges
            if e.a in kept and e.b in kept
        ],
    }


def _dumps(doc) -> str:
    return json.dumps(doc, separators=(",", ":"), allow_nan=False) + "\n"


def save_graph(graph: LatentGraph, path, include_queries: bool = False) -> None:
    Path(path).write_text(_dumps(graph_to_dict(graph, include_queries)))


def _need(obj, key, where):
    if not isinstance(obj, dict):
        raise FormatError(f"{where or '$'}: expected an object")
    if key not in obj:
        raise FormatError(f"{where + '.' if where else ''}{key}: missing")
    return obj[key]


def _int(value, where) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise FormatError(f"{where}: expected an integer")
    return value


def _vector(value, length, where) -> np.ndarray:
    if not isinstance(value, list) or len(value) != length:
        raise FormatError(f"{where}: expected a list of {length} numbers")
    try:
        arr = np.array(value, dtype=np.float64)
    except (TypeError, ValueError):
        raise FormatError(f"{where}: expected numbers") from None
    if arr.shape != (length,) or not np.all(np.isfinite(arr)):
        raise FormatError(f"{where}: expected {length} finite numbers")
    return arr


def graph_from_dict(doc) -> LatentGraph:
    spec = _need(doc, "atlas", "")
    fp = _need(doc, "fingerprint", "")
    dims = [_int(_need(fp, key, "fingerprint"), f"fingerprint.{key}") for key in ("m", "d", "D")]
    _need(fp, "digest", "fingerprint")
    m, d, D = dims
    cfg_doc = _need(doc, "config", "")
    try:
        config = BuildConfig(**{key: _need(cfg_doc, key, "config") for key in ("N", "k", "n", "eps", "seed", "h")})
    except UsageError as exc:
        raise FormatError(f"config: {exc}") from None
    nodes = _need(doc, "nodes", "")
    edges = _need(doc, "edges", "")
    if not isinstance(nodes, list):
        raise FormatError("nodes: expected a list")
    if not isinstance(edges, list):
        raise FormatError("edges: expected a list")

    graph = LatentGraph(config, spec, fp)
    graph.warnings = list(doc.get("warnings", []))
    for i, node in enumerate(nodes):
        where = f"nodes[{i}]"
        if _int(_need(node, "id", where), f"{where}.id") != i:
            raise FormatError(f"{where}.id: node ids must be dense and ordered, expected {i}")
        chart = _int(_need(node, "chart", where), f"{where}.chart")
        if not 1 <= chart <= m:
            raise FormatError(f"{where}.chart: must be in 1..{m}")
        z = _vector(_need(node, "z", where), d, f"{where}.z")
        decoded = _vector(_need(node, "decoded", where), D, f"{where}.decoded")
        src = _need(node, "src", where)
        if src is not None:
            src = _int(src, f"{where}.src")
        graph.add_node(LatentCoord(chart, z), decoded, source_index=src, query=src is None)
    for i, edge in enumerate(edges):
        where = f"edges[{i}]"
        a = _int(_need(edge, "a", where), f"{where}.a")
        b = _int(_need(edge, "b", where), f"{where}.b")
        w = _need(edge, "w", where)
        kind = _need(edge, "kind", where)
        if not (0 <= a < b < len(nodes)):
            raise FormatError(f"{where}: endpoints must satisfy 0 <= a < b < {len(nodes)}")
        if isinstance(w, bool) or not isinstance(w, (int, float)) or not math.isfinite(w) or w < 0:
            raise FormatError(f"{where}.w: expected a finite non-negative number")
        if kind not in EDGE_KINDS:
            raise FormatError(f"{where}.kind: expected one of {', '.join(EDGE_KINDS)}")
        graph.add_edge(a, b, float(w), kind)
    return graph


def load_graph(path) -> LatentGraph:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None
    return graph_from_dict(doc)


# -- paths ------------------------------------------------------------------

def path_to_dict(path, samples=()) -> dict:
    return {
        "total_length": path.total_length,
        "nodes": [{"chart": c.chart, "z": c.z.tolist()} for c in path.nodes],
        "segments": [{"len": w, "kind": k} for w, k in zip(path.segment_lengths, path.segment_kinds)],
        "samples": [{"chart": c.chart, "z": c.z.tolist(), "x": np.asarray(x).tolist()} for c, x in samples],
    }


def save_path(path, out, samples=()) -> None:
    Path(out).write_text(_dumps(path_to_dict(path, samples)))


# -- frames -----------------------------------------------------------------

def write_pgm(x, width: int, height: int, path) -> None:
    """Write ``x`` as a binary (P5) greyscale image, values clamped to [0, 1]."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if width * height != x.size:
        raise UsageError(f"frame shape {width}x{height} does not match {x.size} values")
    # round half up
    pixels = np.floor(np.clip(x, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    Path(path).write_bytes(f"P5\n{width} {height}\n255\n".encode("ascii") + pixels.tobytes())
