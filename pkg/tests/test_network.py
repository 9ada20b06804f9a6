import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inhibnet.network import (InvalidSpecError, NetworkSpec, check_assumptions,
                              contraction_bounds, entry_bound, epsilon0, epsilon1,
                              max_interspike_T, min_interspike_T)
from inhibnet.poincare import sample_bplus

from oracles import rk4_spike


def spec_with(alpha, beta, h):
    n = len(alpha)
    H = np.full((n, n), h) if np.isscalar(h) else np.asarray(h)
    return NetworkSpec.from_arrays(alpha, beta, H)


def test_validation():
    with pytest.raises(InvalidSpecError, match="at least 3"):
        NetworkSpec.homogeneous(2, 0.5, 1.5, 0.1)
    H = np.full((3, 3), 0.1)
    H[0, 1] = 0.0
    with pytest.raises(InvalidSpecError) as exc:
        spec_with([0.5] * 3, [1.5] * 3, H)
    assert any("H[0][1]" in p for p in exc.value.problems)


def test_diagonal_forced_to_one():
    H = np.full((3, 3), 0.1)
    s = spec_with([0.5] * 3, [1.5] * 3, H)
    assert np.all(np.diag(s.H) == 1.0)


def test_epsilon0_examples(R):
    assert epsilon0(R) == 0.1
    H = np.array([[1, 0.10, 0.12], [0.09, 1, 0.11], [0.10, 0.10, 1]])
    assert epsilon0(spec_with([0.5] * 3, [1.5] * 3, H)) == 0.09


def test_check_assumptions_examples(R):
    rep = check_assumptions(R)
    assert rep.cond9 and rep.cond10 and rep.cond11
    assert rep.slack9 == pytest.approx(0.15)
    assert rep.slack10 == pytest.approx(0.125)
    assert rep.slack11 == pytest.approx(0.5 / 4.5)
    assert not check_assumptions(NetworkSpec.homogeneous(3, 0.5, 1.5, 0.3)).cond9
    het = check_assumptions(spec_with([0.5] * 3, [1.5, 1.5, 1.8], 0.1))
    assert not het.cond10
    assert het.slack10 == pytest.approx(0.125 - 0.3)


def test_min_interspike_T_examples(R):
    assert min_interspike_T(R) == pytest.approx(0.1 / 1.125, abs=1e-15)
    assert min_interspike_T(NetworkSpec.homogeneous(3, 0.5, 1.5, 0.2)) == pytest.approx(0.2 / 1.125)
    assert min_interspike_T(NetworkSpec.homogeneous(3, 0.5, 1.5, 1e-9)) < 1e-8


def test_epsilon1_and_entry_bound(R):
    assert epsilon1(R) == pytest.approx(0.2 / 9, abs=1e-15)
    assert epsilon1(NetworkSpec.homogeneous(3, 0.5, 1.5, 0.05)) == pytest.approx(0.1 / 9, abs=1e-15)
    assert check_assumptions(R).entry_bound_p == 46
    assert entry_bound(0.25) == 5
    assert entry_bound(0.0) is None


def test_contraction_bounds(R):
    sigma, lam, T, Tstar = contraction_bounds(R)
    assert Tstar == pytest.approx(2 * math.log(1.5), abs=1e-15)
    assert lam == pytest.approx(math.exp(-0.5 * 0.1 / 1.125), abs=1e-15)
    assert sigma == pytest.approx(2 / 3, abs=1e-12)
    assert 0 < sigma < lam < 1
    assert T < Tstar == max_interspike_T(R)


def test_single_pair_ratio_is_liouville_factor(R):
    # two states in one piece differing only in a non-spiking coordinate
    x = np.array([0.0, 0.8, 0.3])
    y = np.array([0.0, 0.8, 0.3001])
    t_bar, i, fx = rk4_spike(R.alpha, R.beta, R.H, x)
    _, _, fy = rk4_spike(R.alpha, R.beta, R.H, y)
    sigma, lam, *_ = contraction_bounds(R)
    ratio = (fy[2] - fx[2]) / 1e-4
    assert ratio == pytest.approx(math.exp(-0.5 * t_bar), abs=1e-5)
    assert sigma <= ratio <= lam


def inside_region():
    """Random specs drawn inside the assumption region."""
    return st.integers(3, 6).flatmap(lambda n: st.tuples(
        st.just(n),
        st.floats(0.2, 2.0),
        st.floats(0.3, 3.0),
        st.floats(0.02, 0.2),
        st.lists(st.floats(0.0, 1.0), min_size=n * n, max_size=n * n),
    ))


def _build(args):
    n, a, extra, h, noise = args
    H = h * (1.0 + 0.01 * np.array(noise).reshape(n, n))
    return NetworkSpec.from_arrays([a] * n, [a + extra] * n, H)


@settings(max_examples=300, deadline=None)
@given(inside_region())
def test_eps1_positive_and_rates_ordered_inside_region(args):
    spec = _build(args)
    rep = check_assumptions(spec)
    if rep.ok:
        assert rep.eps1 > 0
        assert 0 < rep.T <= rep.Tstar
        assert 0 < rep.sigma <= rep.lam < 1


def test_eps1_positive_on_1000_random_specs(rng):
    hits = 0
    while hits < 1000:
        n = int(rng.integers(3, 7))
        a = rng.uniform(0.3, 1.5, n)
        a[:] = a[0] + rng.uniform(0, 0.05, n)
        b = a + rng.uniform(0.5, 2.0)
        H = rng.uniform(0.05, 0.2) * (1 + rng.uniform(0, 0.02, (n, n)))
        spec = NetworkSpec.from_arrays(a, b, H)
        rep = check_assumptions(spec)
        if rep.ok:
            hits += 1
            assert rep.eps1 > 0 and 0 < rep.sigma <= rep.lam < 1


def test_permutation_symmetry(R):
    base = check_assumptions(R).to_dict()
    for perm in ([1, 2, 0], [2, 1, 0]):
        assert check_assumptions(R.permuted(perm)).to_dict() == base


def test_perturbed_is_reproducible(R):
    a = R.perturbed(1e-3, np.random.default_rng(7))
    b = R.perturbed(1e-3, np.random.default_rng(7))
    assert np.array_equal(a.H, b.H)
    assert np.all(np.abs(a.off_diagonal() - 0.1) <= 1e-3)
    draws = [R.perturbed(0.5, np.random.default_rng(k)) for k in range(20)]
    assert any(d is None for d in draws)


def test_interspike_gaps_respect_T(R, rng):
    from inhibnet import _kernels
    V = sample_bplus(R, 1000, rng)
    T = min_interspike_T(R)
    low = np.inf
    for _ in range(1000):
        V, _, tbar = _kernels.return_map_batch(V, R.alpha, R.beta, R.H)
        low = min(low, tbar.min())
    assert low >= T
