import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from obslab import realset
from obslab.realset import (Bounded, DyadicGap, GapWitness, HalfLine, HorizonError,
                            PeriodicPattern, PolynomialGap, RealSet, ThickWitness,
                            classify, from_spec, measure_in, parity_fold, reflect,
                            symmetric_density, union)


def intervals_strategy(lo=-20.0, hi=20.0, max_n=6):
    pair = st.tuples(st.floats(lo, hi), st.floats(0.01, 5.0)).map(
        lambda ab: (ab[0], ab[0] + ab[1]))
    return st.lists(pair, min_size=1, max_size=max_n).map(RealSet.from_intervals)


def test_measure_in_disjoint_lengths_sum():
    E = RealSet.from_intervals([(0, 1), (2, 3)])
    assert measure_in(E, (0, 3)) == pytest.approx(2.0, abs=0)


def test_measure_in_dyadic_window():
    # pieces inside [0,32]: [2,3], [4,6], [8,13], [16,28] -> 1+2+5+12 = 20
    E = from_spec({"family": "dyadic_gap", "params": {"rule": "linear", "coeff": 1}}, 64)
    assert measure_in(E, (0, 32)) == pytest.approx(20.0, abs=1e-12)


def test_measure_in_polynomial_gap():
    # [1, 1+1/2] and [2, 2+1/3] meet [1,3]
    E = from_spec({"family": "polynomial_gap", "params": {"eps": 1.0}}, 64)
    assert measure_in(E, (1, 3)) == pytest.approx(0.5 + 1.0 / 3.0, rel=1e-14)


def test_symmetric_density_halfline_and_bounded():
    half = from_spec({"family": "halfline", "params": {"a": 0}}, 64)
    assert symmetric_density(half, 10.0) == pytest.approx(1.0)
    ball = from_spec({"family": "bounded", "params": {"R": 1}}, 256)
    assert symmetric_density(ball, 100.0) == pytest.approx(0.02)


def test_symmetric_density_dyadic():
    E = from_spec({"family": "dyadic_gap", "params": {"rule": "linear", "coeff": 1}}, 64)
    assert symmetric_density(E, 32.0) == pytest.approx(40.0 / 32.0, rel=1e-14)


def test_horizon_guard():
    E = from_spec({"family": "dyadic_gap", "params": {"rule": "linear", "coeff": 1}}, 32)
    with pytest.raises(HorizonError):
        measure_in(E, (0, 64))


def test_expansion_stability_inside_old_horizon():
    spec = {"family": "dyadic_gap", "params": {"rule": "linear", "coeff": 1}}
    small = from_spec(spec, 64)
    big = from_spec(spec, 1024)
    for w in [(0, 32), (-50, 50), (3, 17)]:
        assert measure_in(small, w) == measure_in(big, w)


def test_dyadic_validity_constraint():
    with pytest.raises(ValueError):
        from_spec({"family": "dyadic_gap", "params": {"rule": "linear", "coeff": 3}}, 64)


def test_parity_fold_examples():
    assert parity_fold(RealSet.from_intervals([(-2, -1)])).intervals == ((1.0, 2.0),)
    assert parity_fold(RealSet.from_intervals([(-1, 1)])).intervals == ((0.0, 1.0),)
    got = parity_fold(RealSet.from_intervals([(-3, -2), (1, 2)]))
    assert got.intervals == ((1.0, 3.0),)


@given(intervals_strategy(), st.floats(0.1, 30.0))
def test_parity_fold_measure_inequality(E, x):
    folded = parity_fold(E)
    assert 2.0 * measure_in(folded, (0, x)) >= measure_in(E, (-x, x)) - 1e-12


@given(intervals_strategy())
def test_parity_fold_lands_in_halfline(E):
    folded = parity_fold(E)
    assert all(a >= 0 for a, _ in folded.intervals)


@given(intervals_strategy(), st.floats(-10, 10), st.floats(0.1, 10), st.floats(0.1, 10))
def test_window_monotonicity(E, lo, w1, w2):
    inner = (lo, lo + min(w1, w2))
    outer = (lo, lo + max(w1, w2))
    assert measure_in(E, inner) <= measure_in(E, outer) + 1e-12


@given(intervals_strategy(), st.floats(-15, 15), st.floats(0.1, 10))
def test_reflection_invariance(E, a, w):
    b = a + w
    assert measure_in(reflect(E), (-b, -a)) == pytest.approx(
        measure_in(E, (a, b)), abs=1e-12)


@given(intervals_strategy(), intervals_strategy(), st.floats(-10, 10), st.floats(0.1, 10))
def test_union_upper_bound(E1, E2, a, w):
    u = union(E1, E2)
    m = measure_in(u, (a, a + w))
    assert m <= measure_in(E1, (a, a + w)) + measure_in(E2, (a, a + w)) + 1e-12
    assert m >= max(measure_in(E1, (a, a + w)), measure_in(E2, (a, a + w))) - 1e-12


# classifier conformance: the named families carry closed-form verdicts

def test_classify_halfline():
    E = from_spec({"family": "halfline", "params": {"a": 0}}, 2048)
    v = classify(E, 2048.0)
    assert not v.thick and v.weakly_thick and v.weak_gamma == pytest.approx(1.0)
    assert v.method == "analytic"


def test_classify_bounded():
    E = from_spec({"family": "bounded", "params": {"R": 2}}, 2048)
    v = classify(E, 2048.0)
    assert not v.thick and v.weakly_thick is False
    assert len(v.weak_witness_x) > 0


def test_classify_periodic():
    E = from_spec({"family": "periodic", "params": {"x0": 1.0}}, 2048)
    v = classify(E, 2048.0)
    assert v.thick and isinstance(v.thick_witness, ThickWitness)
    assert v.thick_witness.gamma == pytest.approx(0.5)
    assert v.weakly_thick


def test_classify_dyadic_linear_vs_constant():
    lin = from_spec({"family": "dyadic_gap", "params": {"rule": "linear", "coeff": 1}},
                    2048)
    v = classify(lin, 2048.0)
    assert not v.thick and isinstance(v.thick_witness, GapWitness)
    assert v.weakly_thick
    const = from_spec({"family": "dyadic_gap",
                       "params": {"rule": "constant", "coeff": 1}}, 2048)
    vc = classify(const, 2048.0)
    assert vc.thick and vc.weakly_thick
    assert vc.thick_witness.gamma > 0


def test_classify_polynomial_gap():
    E = from_spec({"family": "polynomial_gap", "params": {"eps": 1.0}}, 2048)
    v = classify(E, 2048.0)
    assert not v.thick and v.weakly_thick is False


def test_classify_verdict_json_round_trip():
    E = from_spec({"family": "periodic", "params": {"x0": 1.0}}, 2048)
    d = classify(E, 2048.0).to_json()
    assert d["thick"] and d["thick_witness"]["L"] == 1.0


def test_thick_witness_satisfies_window_density():
    """A success witness (gamma, L) must hold at every probed x."""
    for spec in ({"family": "periodic", "params": {"x0": 1.0}},
                 {"family": "dyadic_gap", "params": {"rule": "constant", "coeff": 1}}):
        E = from_spec(spec, 2048)
        v = classify(E, 2048.0)
        gamma, L = v.thick_witness.gamma, v.thick_witness.L
        for x in np.linspace(-1000, 1000 - L, 173):
            assert measure_in(E, (x, x + L)) >= gamma * L - 1e-9


def test_thick_implies_weak_density_bound():
    """thick with (gamma, L) forces symmetric density >= gamma/2 at x >= 2L."""
    E = from_spec({"family": "periodic", "params": {"x0": 1.0}}, 4096)
    v = classify(E, 4096.0)
    gamma, L = v.thick_witness.gamma, v.thick_witness.L
    for x in np.linspace(2 * L, 4000.0, 57):
        assert symmetric_density(E, float(x)) >= gamma / 2 - 1e-9


@pytest.mark.parametrize("spec,weak", [
    ({"family": "halfline", "params": {"a": 0}}, True),
    ({"family": "periodic", "params": {"x0": 1.0}}, True),
    ({"family": "dyadic_gap", "params": {"rule": "linear", "coeff": 1}}, True),
    ({"family": "bounded", "params": {"R": 2}}, False),
    ({"family": "polynomial_gap", "params": {"eps": 1.0}}, False),
])
def test_liminf_positivity_agrees_along_sequences(spec, weak):
    """Sampled liminf along x real, x integer, and x = a*k^l all agree in
    positivity for the analytic families."""
    E = from_spec(spec, 4096)
    hi = 4000.0

    def min_density(xs):
        xs = [x for x in xs if 1.0 <= x <= hi]
        return min(symmetric_density(E, x) for x in xs)

    seqs = [
        np.linspace(hi / 4, hi, 200),
        np.arange(int(hi / 4), int(hi), 16, dtype=float),
        [1.0 * k for k in range(250, 1000, 16)],
        [2.0 * math.sqrt(k) for k in range(60000, 64000, 200)],
        [0.5 * k * k for k in range(45, 89, 2)],
    ]
    verdicts = [min_density(xs) > 0.02 for xs in seqs]
    assert all(v == weak for v in verdicts)


def test_classify_numeric_probe_explicit():
    E = RealSet.from_intervals([(-40 + i, -39.5 + i) for i in range(80)])
    v = classify(E, 38.0, grid_step=0.25)
    assert v.method == "numeric-probe"
    assert v.thick and isinstance(v.thick_witness, ThickWitness)
    lump = RealSet.from_intervals([(-1, 1)])
    v2 = classify(lump, 512.0, grid_step=2.0)
    assert not v2.thick
    assert v2.weakly_thick is False
    # at a short horizon the same set reads as inconclusive: the probe is
    # falsifiable evidence, not proof, so the verdict carries its horizon
    v3 = classify(lump, 150.0, grid_step=0.5)
    assert v3.weakly_thick is None
    assert v3.horizon_used == 150.0


def test_classify_requires_minimum_horizon():
    E = from_spec({"family": "dyadic_gap", "params": {"rule": "linear", "coeff": 1}}, 64)
    with pytest.raises(ValueError):
        classify(E, 16.0)
    P = from_spec({"family": "periodic", "params": {"x0": 1.0}}, 1100)
    with pytest.raises(ValueError):
        classify(P, 500.0)


def test_spec_round_trip():
    spec = {"family": "dyadic_gap", "params": {"rule": "linear", "coeff": 1.0}}
    E = from_spec(spec, 64)
    assert E.to_spec() == spec
    ivs = {"intervals": [[0.0, 1.0], [2.0, 3.0]]}
    assert from_spec(ivs).to_spec() == ivs
