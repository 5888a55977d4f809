import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from atlasgeo import (
    DomainError,
    LatentCoord,
    SimplexWeights,
    UsageError,
    argmax_chart,
    chart_membership,
    decode,
    encode,
    make_atlas,
    oracle_distance,
    partition,
    sample_manifold,
)

NAMES = ("flat", "circle", "sphere")


# -- decode / encode / partition examples -----------------------------------

def test_decode_examples(flat, sphere, circle):
    assert decode(flat, LatentCoord(1, [0, 0])).tolist() == [0.0, 0.0, 0.0]
    # stereographic inverse (2z, |z|^2 - 1) / (1 + |z|^2) at z = 0
    assert decode(sphere, LatentCoord(1, [0, 0])).tolist() == [0.0, 0.0, -1.0]
    np.testing.assert_allclose(decode(circle, LatentCoord(1, [math.pi / 2])), [0.0, 1.0], atol=1e-15)


def test_encode_examples(flat, sphere):
    assert encode(flat, 1, [3, 4, 0]).tolist() == [3.0, 4.0]
    # (x1, x2) / (1 - x3) at the equator
    assert encode(sphere, 1, [1, 0, 0]).tolist() == [1.0, 0.0]
    with pytest.raises(DomainError):
        encode(sphere, 1, [0, 0, 1])
    with pytest.raises(DomainError):
        encode(sphere, 2, [0, 0, -1])


def test_circle_excluded_points(circle):
    with pytest.raises(DomainError):
        encode(circle, 1, [-1.0, 0.0])
    with pytest.raises(DomainError):
        encode(circle, 1, [-1.0, -0.0])
    with pytest.raises(DomainError):
        encode(circle, 2, [1.0, 0.0])
    # chart 2 latent range is (-pi, pi)
    z = encode(circle, 2, [math.cos(0.1), math.sin(0.1)])[0]
    assert z == pytest.approx(0.1 - math.pi)
    z = encode(circle, 2, [math.cos(-0.1), math.sin(-0.1)])[0]
    assert z == pytest.approx(math.pi - 0.1)


def test_dimension_mismatch(flat, sphere):
    with pytest.raises(UsageError):
        decode(flat, LatentCoord(1, [0, 0, 0]))
    with pytest.raises(UsageError):
        encode(sphere, 1, [1, 0])
    with pytest.raises(UsageError):
        partition(sphere, [1, 0])
    with pytest.raises(UsageError):
        decode(sphere, LatentCoord(3, [0, 0]))


def test_partition_examples(flat, sphere):
    assert partition(flat, [7, -2, 3]).weights.tolist() == [1.0]
    w = partition(sphere, [0, 0, 1])
    assert w[1] == 0.0 and w[2] == 1.0
    assert partition(sphere, [1, 0, 0]).weights.tolist() == [0.5, 0.5]


def test_chart_membership_examples(sphere, circle):
    assert chart_membership(sphere, [1, 0, 0], 0.05) == {1, 2}
    assert chart_membership(sphere, [0, 0, 1], 0.05) == {2}
    x = [math.cos(1.0), math.sin(1.0)]
    assert chart_membership(circle, x, 0.0) == {1, 2}
    with pytest.raises(UsageError):
        chart_membership(sphere, [1, 0, 0], -0.1)


def test_argmax_examples(flat, sphere):
    # psi_N = (1 - (-0.9)) / 2 = 0.95
    assert argmax_chart(sphere, [0, 0, -0.9]) == 1
    assert argmax_chart(flat, [1, 2, 3]) == 1
    assert argmax_chart(sphere, [0, 1, 0]) == 1  # 0.5 / 0.5 tie


def test_simplex_weights_validation():
    with pytest.raises(ValueError):
        SimplexWeights([0.5, 0.6])
    with pytest.raises(ValueError):
        SimplexWeights([1.5, -0.5])
    assert SimplexWeights([0.25, 0.75])[2] == 0.75


# -- invariants over many points ----------------------------------------------

@pytest.mark.parametrize("name", NAMES)
def test_simplex_invariants_random_points(name, rng):
    atlas = make_atlas(name)
    x = rng.normal(scale=1.5, size=(1000, atlas.D))
    psi = atlas.partition_batch(x)
    assert np.all(psi >= 0)
    assert np.max(np.abs(psi.sum(axis=1) - 1.0)) <= 1e-9
    for xi in x[:50]:
        partition(atlas, xi)  # constructor re-validates


@pytest.mark.parametrize("name", NAMES)
def test_cover_guarantee(name, rng):
    atlas = make_atlas(name)
    eps = 1.0 / atlas.m - 1e-3
    for xi in rng.normal(scale=1.5, size=(1000, atlas.D)):
        assert chart_membership(atlas, xi, eps)


@pytest.mark.parametrize("name", NAMES)
def test_encode_decode_roundtrip_on_manifold(name):
    atlas = make_atlas(name)
    x = sample_manifold(name, 1000, 5)
    psi = atlas.partition_batch(x)
    for y in range(1, atlas.m + 1):
        inside = psi[:, y - 1] > 0
        back = atlas.decode_batch(y, atlas.encode_batch(y, x[inside]))
        assert np.max(np.linalg.norm(back - x[inside], axis=1)) <= 1e-9


@pytest.mark.parametrize("name", NAMES)
def test_maps_are_pure(name, rng):
    atlas = make_atlas(name)
    x = sample_manifold(name, 20, 1)
    z = rng.normal(size=(20, atlas.d))
    for y in range(1, atlas.m + 1):
        assert np.array_equal(atlas.decode_batch(y, z), atlas.decode_batch(y, z))
        ok = atlas.partition_batch(x)[:, y - 1] > 0
        assert np.array_equal(atlas.encode_batch(y, x[ok]), atlas.encode_batch(y, x[ok]))
    assert np.array_equal(atlas.partition_batch(x), atlas.partition_batch(x))


@settings(max_examples=200, deadline=None)
@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))
def test_sphere_partition_always_simplex(a, b, c):
    w = partition(make_atlas("sphere"), [a, b, c]).weights
    assert np.all(w >= 0) and abs(w.sum() - 1) <= 1e-9


# -- analytic atlas specifics ------------------------------------------------

def test_make_atlas_dims():
    assert make_atlas("flat").dims == (1, 2, 3)
    assert make_atlas("circle").dims == (2, 1, 2)
    assert make_atlas("sphere").dims == (2, 2, 3)
    with pytest.raises(UsageError):
        make_atlas("torus")


@pytest.mark.parametrize("name", ("circle", "sphere"))
def test_decodes_have_unit_norm(name, rng):
    atlas = make_atlas(name)
    z = rng.normal(scale=3.0, size=(1000, atlas.d))
    for y in (1, 2):
        norms = np.linalg.norm(atlas.decode_batch(y, z), axis=1)
        assert np.max(np.abs(norms - 1.0)) <= 1e-12


def test_sphere_chart_transition_consistency(sphere):
    x = sample_manifold("sphere", 3000, 11)
    psi = sphere.partition_batch(x)
    both = x[(psi[:, 0] > 0.05) & (psi[:, 1] > 0.05)][:1000]
    assert len(both) == 1000
    g_n = sphere.decode_batch(1, sphere.encode_batch(1, both))
    g_s = sphere.decode_batch(2, sphere.encode_batch(2, both))
    assert np.max(np.abs(g_n - g_s)) <= 1e-9


def test_sphere_stereographic_transition(sphere, rng):
    r = rng.uniform(0.1, 10.0, size=1000)
    phi = rng.uniform(0, 2 * math.pi, size=1000)
    z = np.stack([r * np.cos(phi), r * np.sin(phi)], axis=1)
    z_s = sphere.encode_batch(2, sphere.decode_batch(1, z))
    expected = z / (r ** 2)[:, None]
    assert np.max(np.abs(z_s - expected)) <= 1e-9


def test_oracle_distance_examples():
    assert oracle_distance("flat", [0, 0, 0], [3, 4, 0]) == 5.0
    assert oracle_distance("circle", [1, 0], [-1, 0]) == pytest.approx(math.pi, abs=1e-15)
    assert oracle_distance("sphere", [1, 0, 0], [0, 1, 0]) == pytest.approx(math.pi / 2, abs=1e-15)
    with pytest.raises(DomainError):
        oracle_distance("sphere", [1, 0, 0], [0, 2, 0])
    with pytest.raises(DomainError):
        oracle_distance("flat", [0, 0, 1], [0, 0, 0])


def test_oracle_circle_matches_angle_difference(rng):
    a, b = rng.uniform(-math.pi, math.pi, size=(2, 500))
    for ta, tb in zip(a, b):
        d = abs(ta - tb)
        expected = min(d, 2 * math.pi - d)
        got = oracle_distance("circle", [math.cos(ta), math.sin(ta)], [math.cos(tb), math.sin(tb)])
        assert got == pytest.approx(expected, abs=1e-12)


def test_oracle_sphere_matches_arccos(rng):
    x = sample_manifold("sphere", 200, 2)
    for a, b in zip(x[::2], x[1::2]):
        assert oracle_distance("sphere", a, b) == pytest.approx(math.acos(np.clip(a @ b, -1, 1)), abs=1e-7)


def test_sample_manifold():
    x = sample_manifold("sphere", 1000, 0)
    assert np.max(np.abs(np.linalg.norm(x, axis=1) - 1.0)) <= 1e-12
    assert np.array_equal(sample_manifold("circle", 4, 9), sample_manifold("circle", 4, 9))
    # uniform surface measure: x3 has mean 0 and sd 1/sqrt(3); 3 sigma of the mean is ~0.017
    assert abs(sample_manifold("sphere", 10000, 1)[:, 2].mean()) <= 0.05
    f = sample_manifold("flat", 500, 0)
    assert np.all((f[:, :2] >= 0) & (f[:, :2] <= 5)) and np.all(f[:, 2] == 0)
    with pytest.raises(UsageError):
        sample_manifold("sphere", 0, 0)
