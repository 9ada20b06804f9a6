"""Full analysis: assumptions, refinement, graph, cycles, basins."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..network import AssumptionReport, NetworkSpec, check_assumptions
from ..poincare import TIE_TOL
from .cycles import basin_of, locate_all
from .graph import build_transition_graph, find_cycles
from .refine import refine
from .types import BasinStats, Certified, TransitionGraph, Undecided


class AssumptionFailure(RuntimeError):
    def __init__(self, report: AssumptionReport):
        self.report = report
        super().__init__("dissipativity assumptions fail: " + ", ".join(report.failed()))


@dataclass(frozen=True)
class AnalysisOptions:
    tol: float = 1e-12
    max_generation: int = 60
    max_splits: int = 64
    max_atoms: int = 20000
    basin_samples: int = 1000
    basin_max_iter: int = 20000
    tie_tol: float = TIE_TOL

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True, eq=False)
class AnalysisResult:
    spec: NetworkSpec
    assumptions: AssumptionReport
    options: AnalysisOptions
    refinement: Certified | Undecided
    graph: TransitionGraph | None = None
    graph_cycles: tuple = ()
    cycles: tuple = ()
    basin: BasinStats | None = None
    notes: tuple = field(default_factory=tuple)

    @property
    def certified(self) -> bool:
        return isinstance(self.refinement, Certified)

    @property
    def periods(self) -> tuple:
        return tuple(c.period for c in self.cycles)


def analyze(spec: NetworkSpec, seed: int = 0, options: AnalysisOptions | None = None,
            require_assumptions: bool = True) -> AnalysisResult:
    opts = options or AnalysisOptions()
    report = check_assumptions(spec)
    if require_assumptions and not report.ok:
        raise AssumptionFailure(report)
    ref = refine(spec, opts.max_generation, opts.max_splits, opts.max_atoms, opts.tie_tol)
    if isinstance(ref, Undecided):
        return AnalysisResult(spec, report, opts, ref)
    graph = build_transition_graph(spec, ref, opts.tie_tol)
    gcycles = find_cycles(graph)
    cycles, notes = locate_all(spec, graph, gcycles, opts.tol)
    rng = np.random.default_rng(seed)
    basin = basin_of(spec, cycles, opts.basin_samples, rng, opts.tol, opts.basin_max_iter,
                     opts.tie_tol)
    if opts.basin_samples:
        cycles = [c.with_basin(m) for c, m in zip(cycles, basin.masses)]
    notes = list(notes)
    dropped = ref.dropped_empty
    if dropped:
        notes.append(f"{dropped} empty enclosures dropped during refinement")
    if graph.pruned:
        notes.append(f"{len(graph.pruned)} atoms pruned as enclosing empty sets")
    return AnalysisResult(spec, report, opts, ref, graph, tuple(gcycles), tuple(cycles),
                          basin, tuple(notes))
