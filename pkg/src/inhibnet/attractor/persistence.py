"""Hausdorff distance and perturbation experiments."""

from __future__ import annotations

import logging

import numpy as np

from ..network import NetworkSpec, check_assumptions
from ..poincare import Metric, SectionPoint
from .pipeline import AnalysisOptions, analyze
from .types import PerturbationResult, TrialRecord

log = logging.getLogger(__name__)


class EmptySetError(ValueError):
    pass


def _points(A) -> np.ndarray:
    rows = [a.v if isinstance(a, SectionPoint) else np.asarray(a, dtype=float) for a in A]
    return np.atleast_2d(np.array(rows, dtype=float))


def hausdorff(A, B, metric: Metric) -> float:
    """Hausdorff distance between two finite point sets under ``metric``."""
    if len(A) == 0 or len(B) == 0:
        raise EmptySetError("Hausdorff distance of an empty set")
    D = metric.pairwise(_points(A), _points(B))
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


def match_cycles(base, other, metric: Metric):
    """Greedy matching on the Hausdorff distance matrix.

    Returns ``[(i_base, j_other, distance), ...]`` in order of increasing
    distance; unmatched cycles are left out.
    """
    pairs = sorted(
        (hausdorff(a.points, b.points, metric), i, j)
        for i, a in enumerate(base)
        for j, b in enumerate(other)
    )
    used_i, used_j, out = set(), set(), []
    for d, i, j in pairs:
        if i in used_i or j in used_j:
            continue
        used_i.add(i)
        used_j.add(j)
        out.append((i, j, d))
    return sorted(out)


def persistence_bound(delta: float, lam: float) -> float:
    """Geometric-series bound on how far a cycle moves under a ``delta`` shift."""
    if lam + delta >= 1.0:
        return np.inf
    return 2.0 * delta / (1.0 - lam - delta)


def perturb_and_compare(spec: NetworkSpec, delta: float, trials: int, seed: int,
                        params: bool = False,
                        options: AnalysisOptions | None = None) -> PerturbationResult:
    """Re-run the pipeline on ``trials`` random perturbations of ``spec`` and
    compare each cycle set with the unperturbed one."""
    opts = options or AnalysisOptions(basin_samples=0)
    base = analyze(spec, seed, opts)
    if not base.certified:
        raise ValueError("the base network does not certify; persistence is undefined")
    lam = base.assumptions.lam
    bound = persistence_bound(delta, lam)
    metric = Metric.for_spec(spec)
    rng = np.random.default_rng(seed)
    records = []
    for k in range(trials):
        pert = spec.perturbed(delta, rng, params=params)
        if pert is None:
            records.append(TrialRecord(k, None, "skipped", notice="perturbed spec is invalid"))
            continue
        rep = check_assumptions(pert)
        if not rep.ok:
            msg = "assumptions fail: " + ", ".join(rep.failed())
            log.warning("trial %d skipped: %s", k, msg)
            records.append(TrialRecord(k, pert.to_dict(), "skipped", notice=msg))
            continue
        res = analyze(pert, seed, opts)
        if not res.certified:
            records.append(TrialRecord(k, pert.to_dict(), "undecided"))
            continue
        matches = match_cycles(base.cycles, res.cycles, metric)
        periods = tuple(c.period for c in res.cycles)
        same = (
            len(res.cycles) == len(base.cycles)
            and len(matches) == len(base.cycles)
            and all(base.cycles[i].period == res.cycles[j].period for i, j, _ in matches)
        )
        records.append(TrialRecord(
            k, pert.to_dict(), "matched" if same else "mismatch", len(res.cycles), periods,
            tuple(d for _, _, d in matches),
        ))
    return PerturbationResult(delta, lam, bound, base.periods, tuple(records))
