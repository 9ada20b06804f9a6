import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inhibnet import _kernels
from inhibnet.network import NetworkSpec, check_assumptions, epsilon0
from inhibnet.poincare import (Box, BranchError, Inside, Metric, OnSeparation,
                               PreconditionError, SectionPoint, Straddles, apply_spike,
                               box_diameter, classify_piece, dist, in_bplus, map_box,
                               piece_of_box, poincare_map, sample_bplus, separation_alpha,
                               spike_time)

from oracles import path_metric, rk4_spike

T125 = 2 * math.log(1.25)


# ------------------------------------------------------------ spike times


def test_spike_time_examples(R):
    tbar, J = spike_time(R, [0, 0.5, 0.5])
    assert J == (1, 2)
    assert tbar == pytest.approx(T125, abs=1e-15)
    assert spike_time(R, [1, 0, 0]) == (0.0, (0,))
    tbar, J = spike_time(R, [0.9, 0.1, 0.2])
    assert J == (0,)
    assert tbar == pytest.approx(2 * math.log((1.5 - 0.45) / 1.0))


def test_apply_spike_examples(R):
    assert np.allclose(apply_spike(R, [1, 0, 0], 0), [0, -0.1, -0.1], atol=1e-15)
    out = apply_spike(R, [1, -0.95, 0], 0)
    assert out[1] == -1.0
    with pytest.raises(BranchError):
        apply_spike(R, [0, 0.9, 0.1], 2)
    # tie: both branches allowed, oracle agrees with the chosen one
    y = apply_spike(R, [0, 0.5, 0.5], 1)
    _, _, ref = rk4_spike(R.alpha, R.beta, R.H, np.array([0.0, 0.5, 0.5]))
    assert y[1] == 0.0
    assert np.allclose(y[[0, 2]], ref[[0, 2]], atol=1e-8)


def test_poincare_map_example_and_oracle(R):
    y = poincare_map(R, [0, 0.5, 0.25])
    assert y.face == 1
    r = 3.0
    want = [r - r * math.exp(-0.5 * T125) - 0.1, 0.0,
            r - (r - 0.25) * math.exp(-0.5 * T125) - 0.1]
    assert np.allclose(y.v, want, atol=1e-14)
    tbar, i, ref = rk4_spike(R.alpha, R.beta, R.H, np.array([0.0, 0.5, 0.25]))
    assert i == 1 and tbar == pytest.approx(T125, abs=1e-9)
    assert np.allclose(y.v, ref, atol=1e-8)


def test_poincare_map_matches_oracle_heterogeneous(rng):
    spec = NetworkSpec.from_arrays([0.5, 0.55, 0.6], [1.5, 1.6, 1.62],
                                   0.1 + 0.002 * rng.random((3, 3)))
    for v in sample_bplus(spec, 5, rng):
        y = poincare_map(spec, v)
        _, i, ref = rk4_spike(spec.alpha, spec.beta, spec.H, v)
        assert y.face == i
        assert np.allclose(y.v, ref, atol=1e-8)


def test_tie_branches_are_swaps(R):
    a, b = poincare_map(R, [0, 0.5, 0.5], policy="all")
    assert (a.face, b.face) == (1, 2)
    assert np.array_equal(a.v[[0, 2, 1]], b.v)
    assert poincare_map(R, [0, 0.5, 0.5]) == a


def test_classify_piece_examples(R):
    assert classify_piece(R, [0, 0.9, 0.1]) == Inside(1)
    assert classify_piece(R, [0, 0.5, 0.5]) == OnSeparation((1, 2))
    het = NetworkSpec.from_arrays([0.5] * 3, [1.5, 1.5, 1.6], np.full((3, 3), 0.1))
    assert classify_piece(het, [0, 0.6, 0.6]) == Inside(2)


def test_section_point_validation(R):
    SectionPoint.from_state(R, [0, 0.2, 0.9])
    with pytest.raises(ValueError):
        SectionPoint.from_state(R, [0, 0.2, 0.95])
    with pytest.raises(ValueError):
        SectionPoint.from_state(R, [0.1, 0.2, 0.3])


# --------------------------------------------------------- forward invariance


def test_invariance_10k(R, rng):
    V = sample_bplus(R, 10_000, rng)
    top = 1 - epsilon0(R)
    for v in V:
        for y in poincare_map(R, v, policy="all"):
            assert y.v[y.face] == 0.0
            assert np.all(np.delete(y.v, y.face) > 0)
            assert np.all(y.v <= top)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2), st.floats(0, 0.9), st.floats(0, 0.9))
def test_invariance_property(face, a, b):
    R = NetworkSpec.homogeneous(3, 0.5, 1.5, 0.1)
    v = np.insert(np.array([a, b]), face, 0.0)
    for y in poincare_map(R, v, policy="all"):
        assert in_bplus(R, y.v)
        assert np.all(np.delete(y.v, y.face) > 0)


def test_branch_consistency(R, rng):
    for v in sample_bplus(R, 200, rng):
        a = poincare_map(R, v)
        b = poincare_map(R, v.copy())
        assert a.face == b.face and a.v.tobytes() == b.v.tobytes()


def test_batch_map_agrees_with_pointwise(R, rng):
    V = sample_bplus(R, 500, rng)
    out, spiker, _ = _kernels.return_map_batch(V, R.alpha, R.beta, R.H)
    for v, o, s in zip(V, out, spiker):
        y = poincare_map(R, v)
        assert y.face == s
        assert np.allclose(y.v, o, atol=1e-15)


# ---------------------------------------------------------------- boxes


def test_piece_of_box_examples(R):
    assert piece_of_box(R, Box(0, [0, 0.8, 0.1], [0, 0.9, 0.2])) == Inside(1)
    assert piece_of_box(R, Box(0, [0, 0.4, 0.4], [0, 0.6, 0.6])) == Straddles((1, 2))
    full = piece_of_box(R, Box(0, [0, 0, 0], [0, 0.9, 0.9]))
    assert isinstance(full, Straddles)
    # the face neuron only ties at the corner (0, 0, 0)
    assert {1, 2} <= set(full.indices)


def test_map_box_point_box(R, rng):
    for v in sample_bplus(R, 50, rng):
        if not isinstance(classify_piece(R, v), Inside):
            continue
        x = SectionPoint.from_state(R, v)
        y = poincare_map(R, x)
        mb = map_box(R, Box.point(x), y.face)
        assert np.allclose(mb.lo, y.v, atol=1e-15) and np.allclose(mb.hi, y.v, atol=1e-15)


def test_map_box_requires_inside(R):
    with pytest.raises(PreconditionError):
        map_box(R, Box(0, [0, 0.4, 0.4], [0, 0.6, 0.6]), 1)


def random_inside_box(spec, rng, max_width=0.2):
    top = 1 - epsilon0(spec)
    while True:
        face = int(rng.integers(spec.n))
        c = rng.uniform(0, top, spec.n)
        w = rng.uniform(0, max_width, spec.n)
        lo = np.clip(c - w, 0, top)
        hi = np.clip(c + w, 0, top)
        lo[face] = hi[face] = 0.0
        b = Box(face, lo, hi)
        p = piece_of_box(spec, b)
        if isinstance(p, Inside):
            return b, p.index


def test_map_box_soundness(Rg, rng):
    for _ in range(100):
        b, i = random_inside_box(Rg, rng)
        mb = map_box(Rg, b, i)
        out, spiker, _ = _kernels.return_map_batch(b.sample(1000, rng), Rg.alpha, Rg.beta, Rg.H)
        assert np.all(spiker == i)
        assert np.all(out >= mb.lo) and np.all(out <= mb.hi)


def test_map_box_slack_vanishes_with_box_size(R):
    metric = Metric.for_spec(R)
    lam = check_assumptions(R).lam
    c = np.array([0.0, 0.6, 0.3])
    slack = []
    for w in (1e-1, 1e-2, 1e-3, 1e-4):
        b = Box(0, c - [0, w, w], c + [0, w, w])
        mb = map_box(R, b, piece_of_box(R, b).index)
        slack.append(max(0.0, box_diameter(metric, mb) - lam * box_diameter(metric, b)))
    assert all(s1 < s0 for s0, s1 in zip(slack, slack[1:]))
    assert slack[-1] < 1e-3 * slack[0] * 10


# ---------------------------------------------------------------- metric


def test_dist_examples(R):
    m = Metric.for_spec(R)
    x = SectionPoint.from_state(R, [0, 0.3, 0.6])
    assert dist(m, x, x) == 0.0
    # a point and its own free flow are at distance 0
    from inhibnet.model import flow, NeuronParams
    p = NeuronParams(0.5, 1.5)
    assert dist(m, [0, 0.3, 0.6], flow(p, np.array([0, 0.3, 0.6]), 0.1)) < 1e-15


def test_projection_is_idempotent_and_kills_diagonal():
    x = np.array([0.3, -1.2, 2.0, 0.1])
    p = Metric.project(x)
    assert np.allclose(Metric.project(p), p)
    assert np.allclose(Metric.project(np.ones(4)), 0.0)
    assert abs(p.sum()) < 1e-15


def test_chord_matches_path_metric(R, rng):
    m = Metric.for_spec(R)
    for _ in range(50):
        x = np.array([0.0, *rng.uniform(0, 0.9, 2)])
        y = x + np.array([0.0, *rng.uniform(-0.03, 0.03, 2)])
        y = np.clip(y, 0, 0.9)
        chord = dist(m, x, y)
        path = path_metric(R.alpha, R.beta, x, y)
        assert abs(chord - path) < 1e-3
        assert chord <= path + 1e-12


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 0.9), min_size=6, max_size=6))
def test_dist_symmetric_and_definite_on_a_face(vals):
    R = NetworkSpec.homogeneous(3, 0.5, 1.5, 0.1)
    m = Metric.for_spec(R)
    x = np.array([0.0, vals[0], vals[1]])
    y = np.array([0.0, vals[2], vals[3]])
    assert dist(m, x, y) == pytest.approx(dist(m, y, x), abs=1e-15)
    if not np.allclose(x, y, atol=1e-9):
        assert dist(m, x, y) > 0


# ------------------------------------------------------------ separation


def test_separation_alpha_positive(R, rng):
    res = separation_alpha(R, Metric.for_spec(R), 2000, rng)
    assert res.alpha > 0
    assert res.structural_ok and res.violations == 0
