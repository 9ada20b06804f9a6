"""Locating limit cycles inside atom cycles and sampling their basins."""

from __future__ import annotations

import logging

import numpy as np

from .. import _kernels
from ..network import NetworkSpec, contraction_bounds
from ..poincare import (TIE_TOL, Inside, Metric, SectionPoint, classify_piece, dist,
                        piece_map, sample_bplus)
from ..zones import PhaseSystem
from .types import BasinStats, GraphCycle, InternalInconsistency, LimitCycle, TransitionGraph

log = logging.getLogger(__name__)

BASIN_FACTOR = 100.0
MINIMALITY_FACTOR = 10.0


class SpuriousCycle(InternalInconsistency):
    """The fixed point of an atom cycle does not follow that cycle."""


def _divisors(p: int) -> list[int]:
    return [d for d in range(1, p) if p % d == 0]


def cycle_letters(graph: TransitionGraph, cycle: GraphCycle) -> tuple:
    return tuple(graph.piece(w) for w in cycle.nodes)


def _compose(spec, x, letters):
    for i in letters:
        x = piece_map(spec, x, i)
    return x


def locate_periodic_orbit(spec: NetworkSpec, graph: TransitionGraph, cycle: GraphCycle,
                          tol: float = 1e-12, max_rounds: int | None = None,
                          start=None) -> LimitCycle:
    """Banach iteration of the p-fold composition along the cycle's itinerary.

    Starts from the centre of the first atom's enclosure (or ``start``).  With
    ``q = lambda**p`` the a-posteriori bound ``q / (1 - q) * step`` caps the
    distance to the fixed point; iteration stops once it is below ``tol`` and
    that bound is reported as the residual.
    """
    ps = PhaseSystem(spec)
    metric = Metric.for_spec(spec)
    letters = cycle_letters(graph, cycle)
    p = len(letters)
    first = graph.atoms[cycle.nodes[0]]
    if start is None:
        x = ps.to_state(first.zone.center())
        x[first.face] = 0.0
        x = np.maximum(x, 0.0)
    else:
        x = np.asarray(start, dtype=float)
    if max_rounds is None:
        max_rounds = max(100, int(200_000 // p))

    q = contraction_bounds(spec)[1] ** p
    factor = q / (1.0 - q)
    residual = np.inf
    rounds = 0
    while rounds < max_rounds:
        y = _compose(spec, x, letters)
        residual = factor * dist(metric, x, y)
        x = y
        rounds += 1
        if residual < tol:
            break
    else:
        raise InternalInconsistency(
            f"no convergence after {rounds} rounds (residual {residual:.3g})")

    pts = [x]
    for i in letters[:-1]:
        pts.append(piece_map(spec, pts[-1], i))
    # the orbit must follow its itinerary under the actual return map
    for m, (v, i) in enumerate(zip(pts, letters)):
        if classify_piece(spec, v) != Inside(i):
            raise SpuriousCycle(f"point {m} of {cycle.nodes} is {classify_piece(spec, v)}, "
                                f"expected Inside({i})")
    closure = dist(metric, _compose(spec, pts[0], letters), pts[0])
    for d in _divisors(p):
        if dist(metric, _compose(spec, pts[0], letters[:d]), pts[0]) < MINIMALITY_FACTOR * tol:
            raise SpuriousCycle(f"orbit of {cycle.nodes} closes after {d} < {p} steps")
    faces = [letters[-1]] + list(letters[:-1])
    points = tuple(SectionPoint(v, f) for v, f in zip(pts, faces))
    return LimitCycle(p, points, letters, max(residual, factor * closure), rounds * p,
                      cycle.nodes)


def locate_all(spec: NetworkSpec, graph: TransitionGraph, cycles: list[GraphCycle],
               tol: float = 1e-12):
    """Locate every graph cycle; returns ``(limit_cycles, dropped_notes)``."""
    metric = Metric.for_spec(spec)
    found = []
    notes = []
    for c in cycles:
        try:
            lc = locate_periodic_orbit(spec, graph, c, tol)
        except SpuriousCycle as exc:
            notes.append(str(exc))
            log.warning("dropping spurious atom cycle: %s", exc)
            continue
        dup = any(
            lc.period == o.period
            and min(dist(metric, lc.points[0], q) for q in o.points) < MINIMALITY_FACTOR * tol
            for o in found
        )
        if dup:
            notes.append(f"atom cycle {c.nodes} repeats an orbit already found")
            continue
        found.append(lc)
    return found, notes


def basin_of(spec: NetworkSpec, cycles: list[LimitCycle], samples: int,
             rng: np.random.Generator, tol: float = 1e-12, max_iter: int = 20000,
             tie_tol: float = TIE_TOL) -> BasinStats:
    """Share of random B+ starts whose orbit reaches each cycle (lowest-index
    policy), matched within ``100 * tol`` of a cycle point."""
    match_tol = BASIN_FACTOR * tol
    if samples == 0 or not cycles:
        return BasinStats(samples, tuple(0 for _ in cycles), samples, match_tol, max_iter)
    V = sample_bplus(spec, samples, rng)
    targets = np.vstack([c.point_array() for c in cycles])
    faces = np.concatenate([[p.face for p in c.points] for c in cycles])
    ids = np.concatenate([[k] * c.period for k, c in enumerate(cycles)])
    assigned, _ = _kernels.assign_batch(V, spec.alpha, spec.beta, spec.H, targets, faces,
                                        ids, match_tol, max_iter, tie_tol)
    counts = tuple(int(np.sum(assigned == k)) for k in range(len(cycles)))
    return BasinStats(samples, counts, int(np.sum(assigned < 0)), match_tol, max_iter)
