"""Result types shared by the attractor pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..poincare import Box, SectionPoint
from ..zones import Zone


class ContainmentAmbiguity(RuntimeError):
    """The transition graph could not be made consistent."""


class InternalInconsistency(RuntimeError):
    """A step that the contraction argument guarantees did not happen."""


@dataclass(frozen=True, eq=False)
class Atom:
    """Enclosure of the image set reached along ``itinerary``.

    ``itinerary[-1]`` is the face the atom lives on.  ``split_lineage`` lists
    the generations at which an ancestor enclosure met the separation set and
    was cut along it.
    """

    generation: int
    itinerary: tuple
    enclosure: Box
    zone: Zone
    split_lineage: tuple = ()

    @property
    def face(self) -> int:
        return self.zone.face

    def to_dict(self, base: int = 0) -> dict:
        return {
            "generation": self.generation,
            "itinerary": [i + base for i in self.itinerary],
            "enclosure": self.enclosure.to_dict(),
            "split_lineage": list(self.split_lineage),
        }


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    atoms: int
    straddlers: int
    dropped_empty: int
    max_diameter: float

    def to_dict(self) -> dict:
        return {
            "generation": self.generation,
            "atoms": self.atoms,
            "straddlers": self.straddlers,
            "dropped_empty": self.dropped_empty,
            "max_diameter": self.max_diameter,
        }


@dataclass(frozen=True)
class Certified:
    generation: int
    atoms: tuple
    history: tuple

    status = "certified"

    @property
    def dropped_empty(self) -> int:
        return sum(h.dropped_empty for h in self.history)


@dataclass(frozen=True)
class Undecided:
    """Refinement stopped with enclosures still meeting the separation set."""

    reason: str
    generation: int
    straddlers: tuple
    history: tuple

    status = "undecided"

    def to_dict(self, limit: int = 50, base: int = 0) -> dict:
        """Summary with the first ``limit`` straddlers; neuron indices are
        shifted by ``base`` (1 for the CLI's neuron labels)."""
        return {
            "reason": self.reason,
            "generation": self.generation,
            "straddler_count": len(self.straddlers),
            "straddlers": [
                {"itinerary": [i + base for i in a.itinerary],
                 "face": a.face + base,
                 "lo": a.enclosure.lo.tolist(), "hi": a.enclosure.hi.tolist(),
                 "contenders": [i + base for i in c]}
                for a, c in self.straddlers[:limit]
            ],
        }


@dataclass(frozen=True)
class TransitionGraph:
    """Functional graph on itinerary words: ``successor[w]`` is the atom
    containing the image of atom ``w``."""

    nodes: tuple
    successor: dict
    atoms: dict
    pruned: tuple = ()
    max_containment_excess: float = 0.0

    def out_degree(self, w) -> int:
        return 1 if w in self.successor else 0

    def piece(self, w) -> int:
        """The piece atom ``w`` lies in (last letter of its successor)."""
        return self.successor[w][-1]


@dataclass(frozen=True)
class GraphCycle:
    nodes: tuple
    tail: tuple
    entry_depth: int

    @property
    def period(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True, eq=False)
class LimitCycle:
    period: int
    points: tuple
    itinerary: tuple
    residual: float
    iterations: int
    atom_words: tuple = ()
    basin_mass: float | None = None

    def with_basin(self, mass: float) -> "LimitCycle":
        return LimitCycle(self.period, self.points, self.itinerary, self.residual,
                          self.iterations, self.atom_words, mass)

    def point_array(self) -> np.ndarray:
        return np.array([p.v for p in self.points])

    def to_dict(self, base: int = 0) -> dict:
        return {
            "period": self.period,
            "itinerary": [i + base for i in self.itinerary],
            "points": [{"face": p.face + base, "v": p.v.tolist()} for p in self.points],
            "residual": self.residual,
            "iterations": self.iterations,
            "basin_mass": self.basin_mass,
        }


@dataclass(frozen=True)
class BasinStats:
    samples: int
    counts: tuple
    unresolved: int
    match_tol: float
    max_iter: int

    @property
    def masses(self) -> tuple:
        return tuple(c / self.samples for c in self.counts) if self.samples else ()

    @property
    def unresolved_fraction(self) -> float:
        return self.unresolved / self.samples if self.samples else 0.0

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "masses": list(self.masses),
            "unresolved": self.unresolved,
            "unresolved_fraction": self.unresolved_fraction,
            "match_tol": self.match_tol,
            "max_iter": self.max_iter,
        }


@dataclass(frozen=True)
class SpikeEvent:
    t: float
    spikers: tuple
    state: np.ndarray


@dataclass(frozen=True)
class SpikeTrain:
    events: tuple
    x0: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return np.array([e.t for e in self.events])

    @property
    def spikers(self) -> list:
        return [e.spikers[0] for e in self.events]

    @property
    def states(self) -> np.ndarray:
        return np.array([e.state for e in self.events])

    def gaps(self) -> np.ndarray:
        return np.diff(np.concatenate([[0.0], self.times]))

    def first_in_bplus(self, eps0: float) -> int | None:
        """Index of the first event whose post-state is in B+."""
        top = 1.0 - eps0
        for k, e in enumerate(self.events):
            if np.all(e.state >= 0.0) and np.all(e.state <= top):
                return k
        return None


@dataclass(frozen=True)
class TrialRecord:
    index: int
    spec: dict | None
    status: str
    cycle_count: int | None = None
    periods: tuple = ()
    distances: tuple = ()
    notice: str = ""

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "status": self.status,
            "cycle_count": self.cycle_count,
            "periods": list(self.periods),
            "distances": list(self.distances),
            "notice": self.notice,
            "spec": self.spec,
        }


@dataclass(frozen=True)
class PerturbationResult:
    delta: float
    lam: float
    bound: float
    base_periods: tuple
    trials: tuple = field(default_factory=tuple)

    @property
    def passing(self) -> list:
        return [t for t in self.trials if t.status != "skipped"]

    @property
    def all_match(self) -> bool:
        return all(t.status == "matched" for t in self.passing)

    @property
    def max_distance(self) -> float:
        d = [x for t in self.passing for x in t.distances]
        return max(d) if d else 0.0

    def first_failure(self):
        for t in self.passing:
            if t.status != "matched":
                return t
        return None

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "lambda": self.lam,
            "distance_bound": self.bound,
            "base_periods": list(self.base_periods),
            "all_match": self.all_match,
            "max_distance": self.max_distance,
            "within_bound": self.max_distance <= self.bound,
            "skipped": sum(t.status == "skipped" for t in self.trials),
            "trials": [t.to_dict() for t in self.trials],
        }
