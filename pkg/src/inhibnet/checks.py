"""Sampled property suites for the return map on B+.

Each suite returns a :class:`SuiteResult`; a suite passes when it records no
failures.  All sampling goes through the generator passed in.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .network import NetworkSpec, check_assumptions, epsilon0
from .poincare import (TIE_TOL, Metric, poincare_map, sample_bplus, sample_bplus_boundary,
                       sample_section, separation_alpha, spike_times)

CONTRACTION_SLACK = 0.02


@dataclass(frozen=True)
class SuiteResult:
    name: str
    samples: int
    failures: int
    detail: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def to_dict(self) -> dict:
        return {"samples": self.samples, "failures": self.failures, "passed": self.ok,
                **self.detail}


def _images(spec, V, tie_tol=TIE_TOL):
    out, spiker, _ = _kernels.return_map_batch(V, spec.alpha, spec.beta, spec.H, tie_tol)
    return out, spiker


def _unique_piece(spec, V, tie_tol=TIE_TOL):
    """Index of the strict first spiker of each row, or -1 on a tie."""
    t = spike_times(spec, V)
    order = np.sort(t, axis=1)
    piece = np.argmin(t, axis=1)
    piece[order[:, 1] - order[:, 0] <= tie_tol] = -1
    return piece


def invariance_suite(spec: NetworkSpec, samples: int, rng: np.random.Generator) -> SuiteResult:
    """Every branch image of a B+ point lies in B+ on the spiker's face, with
    the other coordinates strictly positive."""
    top = 1.0 - epsilon0(spec)
    quarter = samples // 4
    V = np.vstack([sample_bplus(spec, samples - quarter, rng),
                   sample_bplus_boundary(spec, quarter, rng)])
    out, spiker = _images(spec, V)
    failures = 0
    rows = np.arange(len(V))
    on_face = out[rows, spiker] == 0.0
    masked = out.copy()
    masked[rows, spiker] = 1.0
    ok = on_face & np.all(masked > 0.0, axis=1) & np.all(out <= top, axis=1)
    failures += int(np.sum(~ok))
    # ties: every branch, not only the default one
    ties = np.flatnonzero(_unique_piece(spec, V) < 0)
    for r in ties:
        for y in poincare_map(spec, V[r], policy="all"):
            others = np.delete(y.v, y.face)
            if not (np.all(others > 0.0) and np.all(y.v <= top)):
                failures += 1
    return SuiteResult("invariance", len(V), failures, {"tie_points": int(ties.size)})


def entry_suite(spec: NetworkSpec, samples: int, rng: np.random.Generator) -> SuiteResult:
    """Points of the full section reach B+ within the entry bound."""
    p = check_assumptions(spec).entry_bound_p
    if p is None:
        return SuiteResult("entry", samples, samples, {"reason": "eps1 is not positive"})
    top = 1.0 - epsilon0(spec)
    V = sample_section(spec, samples, rng)
    steps = np.full(samples, -1)
    inside = np.all((V >= 0) & (V <= top), axis=1)
    steps[inside] = 0
    for k in range(1, p + 1):
        V, _ = _images(spec, V)
        inside = np.all((V >= 0) & (V <= top), axis=1)
        steps[(steps < 0) & inside] = k
    failures = int(np.sum(steps < 0))
    worst = int(steps.max()) if failures == 0 else None
    return SuiteResult("entry", samples, failures, {"bound": p, "max_steps": worst})


def _same_piece_pairs(spec, m, rng, close_frac=0.5, min_sep=0.0):
    """Pairs of B+ points strictly inside one common piece, more than
    ``min_sep`` apart in the phase metric.

    Half are independent draws, half are small perturbations of each other
    along the face.
    """
    metric = Metric.for_spec(spec)
    X, Y = [], []
    need = m
    while need > 0:
        k = max(4 * need, 256)
        A = sample_bplus(spec, k, rng)
        B = sample_bplus(spec, k, rng)
        close = rng.random(k) < close_frac
        scale = 10.0 ** rng.uniform(-5, -2, size=(k, 1))
        near = A + scale * rng.normal(size=A.shape)
        faces = np.argmax(A == 0.0, axis=1)
        near[np.arange(k), faces] = 0.0
        B[close] = np.clip(near[close], 0.0, 1.0 - epsilon0(spec))
        pa = _unique_piece(spec, A)
        pb = _unique_piece(spec, B)
        keep = (pa >= 0) & (pa == pb) & np.any(A != B, axis=1)
        if min_sep > 0:
            keep &= metric.rowwise(A, B) > min_sep
        X.append(A[keep])
        Y.append(B[keep])
        need -= int(keep.sum())
    return np.vstack(X)[:m], np.vstack(Y)[:m]


def injectivity_suite(spec: NetworkSpec, samples: int, rng: np.random.Generator,
                      min_sep: float = 1e-6) -> SuiteResult:
    """Distinct same-piece points have distinct images; points of different
    pieces land on different faces."""
    metric = Metric.for_spec(spec)
    X, Y = _same_piece_pairs(spec, samples, rng, min_sep=min_sep)
    FX, _ = _images(spec, X)
    FY, _ = _images(spec, Y)
    same = np.all(FX == FY, axis=1) | (metric.rowwise(FX, FY) == 0.0)
    failures = int(np.sum(same))
    # cross-piece pairs
    A = sample_bplus(spec, samples, rng)
    B = sample_bplus(spec, samples, rng)
    pa, pb = _unique_piece(spec, A), _unique_piece(spec, B)
    cross = (pa >= 0) & (pb >= 0) & (pa != pb)
    FA, sa = _images(spec, A[cross])
    FB, sb = _images(spec, B[cross])
    failures += int(np.sum(sa == sb))
    failures += int(np.sum(np.all(FA == FB, axis=1)))
    return SuiteResult("injectivity", len(X) + int(cross.sum()), failures,
                       {"same_piece_pairs": len(X), "cross_piece_pairs": int(cross.sum())})


def contraction_ratios(spec: NetworkSpec, samples: int, rng: np.random.Generator) -> np.ndarray:
    metric = Metric.for_spec(spec)
    X, Y = _same_piece_pairs(spec, samples, rng)
    d0 = metric.rowwise(X, Y)
    keep = d0 > 1e-9
    FX, _ = _images(spec, X[keep])
    FY, _ = _images(spec, Y[keep])
    return metric.rowwise(FX, FY) / d0[keep]


def contraction_suite(spec: NetworkSpec, samples: int, rng: np.random.Generator,
                      slack: float = CONTRACTION_SLACK) -> SuiteResult:
    """Same-piece distance ratios fall in ``[sigma - slack, lambda + slack]``."""
    rep = check_assumptions(spec)
    r = contraction_ratios(spec, samples, rng)
    bad = (r < rep.sigma - slack) | (r > rep.lam + slack)
    return SuiteResult("contraction", int(r.size), int(bad.sum()), {
        "sigma": rep.sigma, "lambda": rep.lam, "slack": slack,
        "min_ratio": float(r.min()), "max_ratio": float(r.max()),
    })


def separation_suite(spec: NetworkSpec, samples: int, rng: np.random.Generator) -> SuiteResult:
    res = separation_alpha(spec, Metric.for_spec(spec), samples, rng)
    failures = res.violations + (0 if res.alpha > 0 else 1)
    return SuiteResult("separation", res.samples, failures,
                       {"alpha": res.alpha, "structural_ok": res.structural_ok})


SUITES = {
    "invariance": invariance_suite,
    "entry": entry_suite,
    "injectivity": injectivity_suite,
    "separation": separation_suite,
    "contraction": contraction_suite,
}


def run_all(spec: NetworkSpec, samples: dict, rng: np.random.Generator) -> dict:
    """Run every suite in a fixed order with the given per-suite sample counts."""
    return {name: fn(spec, int(samples[name]), rng) for name, fn in SUITES.items()}
