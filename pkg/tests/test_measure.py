import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from measure_spectra.measure import (
    RNG_NAME,
    CircleMeasure,
    CurveMeasure,
    ExplicitMeasure,
    IntervalDensity,
    PointMeasure,
    curve_mass,
    discretize,
    discretize_circle,
    sample_random,
    weak_distance,
)


def test_validation():
    with pytest.raises(ValueError, match="nonzero"):
        PointMeasure(1, [[0.0], [1.0]], [1.0, 0.0])
    with pytest.raises(ValueError, match="sep_tol"):
        PointMeasure(2, [[0.0, 0.0], [0.0, 1e-12]], [1.0, 1.0])
    with pytest.raises(ValueError, match="shape"):
        PointMeasure(3, [[0.0, 0.0]], [1.0])


def test_circle_discretization():
    mu = discretize_circle(10.0, 1.0, 64)
    assert mu.n == 64
    assert mu.mass == pytest.approx(-20 * math.pi)
    assert np.allclose(np.linalg.norm(mu.sites, axis=1), 10.0)
    assert mu.min_separation() == pytest.approx(2 * 10 * math.sin(math.pi / 64))


def test_interval_midpoints_drop_zero_density():
    spec = IntervalDensity(-1.0, 1.0, lambda x: np.where(x > 0, -1.0, 0.0))
    mu = discretize(spec, 10)
    assert mu.n == 5
    assert np.all(mu.sites[:, 0] > 0)
    assert mu.mass == pytest.approx(-1.0)


def test_curve_discretization_and_mass():
    spec = CurveMeasure(
        dim=3,
        path=lambda s: np.column_stack([np.cos(s), np.sin(s), 0.1 * s]),
        density=lambda s: -1.0 - 0.0 * s,
        length=2.0,
        label="helix",
    )
    mu = discretize(spec, 40)
    assert mu.mass == pytest.approx(-2.0)
    assert curve_mass(spec) == pytest.approx(-2.0)


def test_discrete_measures_converge_weakly():
    spec = CircleMeasure(1.0, 1.0)
    p = np.column_stack([np.linspace(-5, 5, 41), np.zeros(41)])
    fine = discretize(spec, 2048)
    d64 = weak_distance(discretize(spec, 64), fine, p)
    d16 = weak_distance(discretize(spec, 16), fine, p)
    assert d64 < d16


def test_random_sampling_is_reproducible():
    spec = CircleMeasure(2.0, 1.0)
    a = sample_random(spec, 50, -3.0, seed=7)
    b = sample_random(spec, 50, -3.0, seed=7)
    c = sample_random(spec, 50, -3.0, seed=8)
    assert np.array_equal(a.sites, b.sites)
    assert not np.array_equal(a.sites, c.sites)
    assert a.mass == pytest.approx(-3.0)
    assert a.metadata["generator"] == RNG_NAME and a.metadata["seed"] == 7


def test_random_atoms_are_merged():
    base = PointMeasure(1, [[0.0], [1.0]], [-1.0, -3.0])
    mu = sample_random(ExplicitMeasure(base), 200, -2.0, seed=1)
    assert mu.n == 2
    assert mu.mass == pytest.approx(-2.0)
    # the heavier atom is drawn about three times as often
    assert mu.couplings[1] / mu.couplings[0] == pytest.approx(3.0, rel=0.4)


@settings(max_examples=50, deadline=None)
@given(
    n=st.integers(1, 12),
    dim=st.sampled_from([1, 2, 3]),
    seed=st.integers(0, 2**32),
)
def test_json_roundtrip(n, dim, seed):
    rng = np.random.default_rng(seed)
    sites = rng.normal(size=(n, dim))
    couplings = rng.choice([-1.0, 1.0], n) * rng.uniform(0.1, 2.0, n)
    mu = PointMeasure(dim, sites, couplings, metadata={"seed": seed})
    back = PointMeasure.from_json(mu.to_json())
    assert np.array_equal(back.sites, mu.sites)
    assert np.array_equal(back.couplings, mu.couplings)
    assert back.metadata == mu.metadata
    assert mu.total_variation == pytest.approx(np.abs(couplings).sum())
