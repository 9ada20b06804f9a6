"""Atom refinement: push enclosures of B+ forward until none meets the
separation set.

Generation 0 is the n faces of B+.  An enclosure that lies strictly inside one
piece is mapped by that piece; an enclosure meeting the separation set is cut
exactly along it (the pieces are half-spaces of difference constraints in
phase coordinates) and every nonempty part is mapped by its own piece.  Each
image is also intersected with the enclosure of the same word with its first
letter dropped, which holds the true set one generation earlier.
"""

from __future__ import annotations

import logging

import numpy as np

from ..network import NetworkSpec
from ..poincare import TIE_TOL, Box
from ..zones import PhaseSystem, Zone
from .types import Atom, Certified, GenerationStats, Undecided

log = logging.getLogger(__name__)


def initial_boxes(spec: NetworkSpec) -> list[Box]:
    """The n faces of B+ as boxes ``[0, 1 - eps0]^(n-1) x {0}``."""
    ps = PhaseSystem(spec)
    return [ps.to_box(ps.face_zone(k)) for k in range(spec.n)]


def _atom(ps: PhaseSystem, gen: int, word: tuple, zone: Zone, lineage: tuple) -> Atom:
    return Atom(gen, word, ps.to_box(zone), zone, lineage)


def refine(spec: NetworkSpec, max_generation: int = 60, max_splits: int = 64,
           max_atoms: int = 20000, tie_tol: float = TIE_TOL,
           initial: list[Zone] | None = None, min_generation: int = 1):
    """Return :class:`Certified` (generation ``k`` and its atoms, all strictly
    inside one piece) or :class:`Undecided` with the surviving straddlers.

    ``initial`` replaces the faces of B+ as generation 0 (used for targeted
    runs on sub-regions).  ``min_generation`` keeps refining past the first
    certified generation, which is useful to watch diameters decay.
    """
    ps = PhaseSystem(spec, tie_tol)
    zones = initial if initial is not None else [ps.face_zone(k) for k in range(spec.n)]
    level = [_atom(ps, 0, (), z, ()) for z in zones]
    history = []
    dropped = 0

    for gen in range(max_generation + 1):
        analysed = [(a, *ps.pieces(a.zone)) for a in level]
        straddlers = [(a, tuple(i for i, _ in parts)) for a, ins, parts in analysed if ins is None]
        diam = max((a.zone.diameter_bound() for a in level), default=0.0)
        history.append(GenerationStats(gen, len(level), len(straddlers), dropped, diam))
        log.info("generation %d: %d atoms, %d straddlers, max diameter %.3g",
                 gen, len(level), len(straddlers), diam)
        if not level:
            # every enclosure vanished, which the invariance of B+ rules out
            return Undecided("empty", gen, (), tuple(history))
        if gen >= max(1, min_generation) and not straddlers:
            return Certified(gen, tuple(level), tuple(history))
        if gen == max_generation:
            return Undecided("max_generation", gen, tuple(straddlers), tuple(history))

        by_word = {a.itinerary: a.zone for a in level} if gen >= 1 else {}
        images: dict[tuple, tuple] = {}
        dropped = 0
        for atom, ins, parts in analysed:
            lineage = atom.split_lineage + ((gen,) if ins is None else ())
            if len(lineage) > max_splits:
                return Undecided("max_splits", gen, tuple(straddlers), tuple(history))
            for i, part in parts:
                word = atom.itinerary + (i,)
                img = ps.map_zone(part, i)
                if gen >= 1:
                    ref = by_word.get(word[1:])
                    if ref is None:
                        dropped += 1
                        continue
                    img = img.intersect(ref)
                if img.is_empty():
                    dropped += 1
                    continue
                if word in images:
                    prev, prev_lineage = images[word]
                    img = prev.join(img)
                    lineage = tuple(sorted(set(prev_lineage) | set(lineage)))
                images[word] = (img, lineage)
        if dropped:
            log.info("generation %d: %d empty enclosures dropped", gen + 1, dropped)
        level = [_atom(ps, gen + 1, w, z, lin) for w, (z, lin) in sorted(images.items())]
        if len(level) > max_atoms:
            return Undecided("max_atoms", gen + 1, tuple(straddlers), tuple(history))
    raise AssertionError("unreachable")  # pragma: no cover


def max_atom_diameter(result) -> list[float]:
    return [h.max_diameter for h in result.history]


def face_diameter(spec: NetworkSpec) -> float:
    ps = PhaseSystem(spec)
    return max(ps.face_zone(k).diameter_bound() for k in range(spec.n))


def sample_atom(spec: NetworkSpec, atom: Atom, m: int, rng: np.random.Generator,
                max_tries: int = 50) -> np.ndarray:
    """Points of the atom's zone (rejection from its bounding box), as states."""
    ps = PhaseSystem(spec)
    lo, hi = atom.zone.lower(), atom.zone.upper()
    out = []
    for _ in range(max_tries):
        U = rng.uniform(lo, hi, size=(4 * m, spec.n))
        U[:, atom.face] = 0.0
        keep = [u for u in U if atom.zone.contains_point(u, 1e-12)]
        out.extend(keep)
        if len(out) >= m:
            break
    if not out:
        out = [atom.zone.center()]
    U = np.array(out[:m])
    V = ps.to_state(U)
    V[:, atom.face] = 0.0
    return np.maximum(V, 0.0)
