import json
import re
import struct

import numpy as np
import pytest

from atlasgeo import (
    BuildConfig,
    FingerprintError,
    FormatError,
    LatentCoord,
    UsageError,
    add_query_node,
    build_graph,
    geodesic_between,
    graph_stats,
    load_dataset,
    load_graph,
    make_atlas,
    resample_equidistant,
    sample_manifold,
    save_graph,
    write_pgm,
)
from atlasgeo.io import (
    graph_from_dict,
    graph_to_dict,
    guess_format,
    path_to_dict,
    write_csv,
    write_idx,
    write_raw_f32,
)


# -- csv --------------------------------------------------------------------

def test_csv_example(tmp_path):
    p = tmp_path / "pts.csv"
    p.write_text("1.0,2.0\n3.0,4.0")
    ds = load_dataset(p, "csv")
    assert (ds.rows, ds.dim) == (2, 2)
    assert ds.data.tolist() == [[1.0, 2.0], [3.0, 4.0]]


def test_csv_roundtrip_is_exact(tmp_path, rng):
    data = rng.normal(size=(40, 3))
    write_csv(data, tmp_path / "d.csv")
    assert np.array_equal(load_dataset(tmp_path / "d.csv").data, data)


@pytest.mark.parametrize(
    "text, match",
    [
        ("1,2\n3,x\n", "line 2, column 2"),
        ("1,2\n3\n", "line 2: expected 2 values"),
        ("1,2\nnan,1\n", "line 2, column 1: non-finite"),
    ],
)
def test_csv_errors_name_the_line(tmp_path, text, match):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    with pytest.raises(FormatError, match=match):
        load_dataset(p, "csv")


def test_guess_format():
    assert guess_format("a.csv") == "csv"
    assert guess_format("x.agmd") == "raw_f32"
    assert guess_format("train-images-idx3-ubyte") == "idx"
    with pytest.raises(UsageError):
        guess_format("mystery.dat")


def test_unknown_format(tmp_path):
    with pytest.raises(UsageError):
        load_dataset(tmp_path / "x", "hdf5")


# -- raw_f32 ------------------------------------------------------------------

def test_raw_roundtrip(tmp_path, rng):
    data = rng.normal(size=(7, 3)).astype(np.float32)
    write_raw_f32(data, tmp_path / "d.agmd")
    ds = load_dataset(tmp_path / "d.agmd", "raw_f32")
    assert (ds.rows, ds.dim) == (7, 3)
    assert np.array_equal(ds.data, data.astype(np.float64))


def test_raw_header_layout(tmp_path):
    write_raw_f32(np.ones((2, 3)), tmp_path / "d.agmd")
    buf = (tmp_path / "d.agmd").read_bytes()
    assert buf[:4] == b"AGMD"
    assert struct.unpack("<III", buf[4:16]) == (2, 3, 0)
    assert len(buf) == 16 + 4 * 6


def test_raw_declared_size_exceeds_file(tmp_path):
    p = tmp_path / "d.agmd"
    p.write_bytes(b"AGMD" + struct.pack("<III", 100, 4, 0) + b"\0" * 40)
    with pytest.raises(FormatError, match="truncated payload"):
        load_dataset(p, "raw_f32")


def test_raw_bad_magic(tmp_path):
    p = tmp_path / "d.agmd"
    p.write_bytes(b"NOPE" + struct.pack("<III", 0, 0, 0))
    with pytest.raises(FormatError, match="byte 0"):
        load_dataset(p, "raw_f32")


# -- idx --------------------------------------------------------------------

def test_idx_ten_images(tmp_path, rng):
    pixels = rng.integers(0, 256, size=(10, 28, 28), dtype=np.uint8)
    write_idx(pixels, tmp_path / "imgs.idx")
    buf = (tmp_path / "imgs.idx").read_bytes()
    assert buf[:4] == bytes([0, 0, 8, 3])
    ds = load_dataset(tmp_path / "imgs.idx", "idx")
    assert (ds.rows, ds.dim) == (10, 784)
    assert ds.data.min() >= 0.0 and ds.data.max() <= 1.0
    np.testing.assert_array_equal(ds.data, pixels.reshape(10, 784) / 255.0)


def test_idx_fixture(fixtures):
    ds = load_dataset(fixtures / "mnistlike-images.idx", "idx")
    assert (ds.rows, ds.dim) == (300, 784)


def test_idx_big_endian_dims(tmp_path):
    # hand-built: 2 items of 1x3
    head = bytes([0, 0, 8, 3]) + struct.pack(">III", 2, 1, 3)
    (tmp_path / "t.idx").write_bytes(head + bytes([0, 255, 51, 102, 153, 204]))
    ds = load_dataset(tmp_path / "t.idx", "idx")
    np.testing.assert_allclose(ds.data, [[0, 1, 0.2], [0.4, 0.6, 0.8]], rtol=0, atol=1e-15)


def test_idx_rejects_non_ubyte(tmp_path):
    (tmp_path / "t.idx").write_bytes(bytes([0, 0, 0x0D, 1]) + struct.pack(">I", 1) + b"\0" * 4)
    with pytest.raises(FormatError, match="byte 2"):
        load_dataset(tmp_path / "t.idx", "idx")


# -- truncation fuzzing -------------------------------------------------------

def _every_truncation(tmp_path, buf, fmt):
    p = tmp_path / "cut"
    for cut in range(len(buf)):
        p.write_bytes(buf[:cut])
        with pytest.raises(FormatError):
            load_dataset(p, fmt)


def test_raw_truncations_never_parse(tmp_path, rng):
    write_raw_f32(rng.normal(size=(5, 3)), tmp_path / "d.agmd")
    _every_truncation(tmp_path, (tmp_path / "d.agmd").read_bytes(), "raw_f32")


def test_idx_truncations_never_parse(tmp_path, rng):
    write_idx(rng.integers(0, 256, size=(3, 4, 4), dtype=np.uint8), tmp_path / "d.idx")
    _every_truncation(tmp_path, (tmp_path / "d.idx").read_bytes(), "idx")


def test_idx_fixture_truncations_never_parse(tmp_path, fixtures):
    buf = (fixtures / "mnistlike-images.idx").read_bytes()
    p = tmp_path / "cut"
    # header region exhaustively, payload at a stride
    for cut in list(range(20)) + list(range(20, len(buf), 997)) + [len(buf) - 1]:
        p.write_bytes(buf[:cut])
        with pytest.raises(FormatError):
            load_dataset(p, "idx")


def test_trailing_bytes_rejected(tmp_path):
    write_raw_f32(np.ones((1, 2)), tmp_path / "d.agmd")
    p = tmp_path / "d.agmd"
    p.write_bytes(p.read_bytes() + b"\0")
    with pytest.raises(FormatError, match="trailing"):
        load_dataset(p, "raw_f32")


# -- graph persistence --------------------------------------------------------

@pytest.mark.parametrize("name", ("flat", "circle", "sphere"))
def test_graph_roundtrip(name, small_graphs, tmp_path):
    atlas, _, g = small_graphs[name]
    save_graph(g, tmp_path / "g.json")
    again = load_graph(tmp_path / "g.json")
    assert graph_stats(again) == graph_stats(g)
    assert [(e.a, e.b, e.weight, e.kind) for e in again.edges] == [(e.a, e.b, e.weight, e.kind) for e in g.edges]
    for a, b in zip(g.nodes, again.nodes):
        assert a.coord == b.coord and np.array_equal(a.decoded, b.decoded)
        assert a.source_index == b.source_index
    save_graph(again, tmp_path / "g2.json")
    assert (tmp_path / "g.json").read_bytes() == (tmp_path / "g2.json").read_bytes()


def test_loaded_graph_answers_queries_identically(small_graphs, tmp_path):
    atlas, _, g = small_graphs["sphere"]
    save_graph(g, tmp_path / "g.json")
    again = load_graph(tmp_path / "g.json")
    x0, x1 = [1.0, 0, 0], [0, -0.6, 0.8]
    assert geodesic_between(g, atlas, x0, x1).total_length == geodesic_between(again, atlas, x0, x1).total_length


def test_query_nodes_excluded_unless_requested(small_graphs, tmp_path):
    atlas, _, g = small_graphs["flat"]
    session = g.overlay()
    add_query_node(session, atlas, LatentCoord(1, [1.0, 1.0]), 4)
    assert len(graph_to_dict(session)["nodes"]) == len(g.nodes)
    assert len(graph_to_dict(session)["edges"]) == len(g.edges)
    doc = graph_to_dict(session, include_queries=True)
    assert len(doc["nodes"]) == len(g.nodes) + 1 and doc["nodes"][-1]["src"] is None
    back = graph_from_dict(json.loads(json.dumps(doc)))
    assert back.nodes[-1].query


def _small_doc():
    flat = make_atlas("flat")
    g = build_graph(flat, sample_manifold("flat", 30, 0), BuildConfig(N=30, k=3))
    return json.loads(json.dumps(graph_to_dict(g)))


@pytest.mark.parametrize(
    "mutate, where",
    [
        (lambda d: d.pop("edges"), "edges"),
        (lambda d: d.pop("nodes"), "nodes"),
        (lambda d: d["nodes"][3].update(chart=7), "nodes[3].chart"),
        (lambda d: d["nodes"][2].update(z=[1.0]), "nodes[2].z"),
        (lambda d: d["edges"][0].update(w=-1.0), "edges[0].w"),
        (lambda d: d["edges"][1].update(kind="teleport"), "edges[1].kind"),
        (lambda d: d["edges"][2].update(a=10_000), "edges[2]"),
    ],
)
def test_schema_errors_name_the_path(mutate, where):
    doc = _small_doc()
    mutate(doc)
    with pytest.raises(FormatError, match="^" + re.escape(where)):
        graph_from_dict(doc)


def test_invalid_json(tmp_path):
    (tmp_path / "g.json").write_text("{")
    with pytest.raises(FormatError):
        load_graph(tmp_path / "g.json")


def test_fingerprint_mismatch_at_query_time(small_graphs, tmp_path):
    _, _, g = small_graphs["flat"]
    save_graph(g, tmp_path / "g.json")
    again = load_graph(tmp_path / "g.json")
    with pytest.raises(FingerprintError):
        geodesic_between(again, make_atlas("sphere"), [0, 0, 1], [1, 0, 0])


# -- paths ------------------------------------------------------------------

def test_path_json_shape(small_graphs):
    atlas, _, g = small_graphs["sphere"]
    p = geodesic_between(g, atlas, [1.0, 0, 0], [0, 0, -1.0])
    doc = path_to_dict(p, resample_equidistant(p, atlas, 4))
    assert set(doc) == {"total_length", "nodes", "segments", "samples"}
    assert len(doc["segments"]) == len(doc["nodes"]) - 1
    assert len(doc["samples"]) == 4 and len(doc["samples"][0]["x"]) == 3
    assert doc["total_length"] == pytest.approx(sum(s["len"] for s in doc["segments"]), abs=1e-9)


# -- pgm --------------------------------------------------------------------

def _pgm_payload(path):
    buf = path.read_bytes()
    head = b"P5\n2 2\n255\n"
    assert buf.startswith(head)
    return buf[len(head):]


def test_pgm_zeros(tmp_path):
    write_pgm(np.zeros(4), 2, 2, tmp_path / "f.pgm")
    assert _pgm_payload(tmp_path / "f.pgm") == b"\0\0\0\0"


def test_pgm_values_and_clamp(tmp_path):
    write_pgm([1.0, 0.5, -3.0, 7.0], 2, 2, tmp_path / "f.pgm")
    assert list(_pgm_payload(tmp_path / "f.pgm")) == [255, 128, 0, 255]


def test_pgm_row_major(tmp_path):
    write_pgm(np.arange(6) / 255.0, 3, 2, tmp_path / "f.pgm")
    buf = (tmp_path / "f.pgm").read_bytes()
    assert buf.startswith(b"P5\n3 2\n255\n") and list(buf[-6:]) == [0, 1, 2, 3, 4, 5]


def test_pgm_shape_mismatch(tmp_path):
    with pytest.raises(UsageError):
        write_pgm(np.zeros(5), 2, 2, tmp_path / "f.pgm")
