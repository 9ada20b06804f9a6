"""Transition graph on certified atoms and its cycles.

A certified atom ``w`` lies inside a single piece ``i``, and its image is the
atom ``w[1:] + (i,)`` of the same generation (the image set is the true set
of the longer word, which sits inside the set of the word with its first
letter dropped).  So the successor is read off the itinerary rather than
searched for by overlap.  Zones of words whose successor was never produced,
or whose mapped zone misses the successor's zone, enclose empty sets and are
pruned.
"""

from __future__ import annotations

import logging

from ..network import NetworkSpec
from ..poincare import TIE_TOL
from ..zones import PhaseSystem
from .types import Certified, ContainmentAmbiguity, GraphCycle, TransitionGraph

log = logging.getLogger(__name__)


def build_transition_graph(spec: NetworkSpec, certified: Certified,
                           tie_tol: float = TIE_TOL) -> TransitionGraph:
    ps = PhaseSystem(spec, tie_tol)
    atoms = {a.itinerary: a for a in certified.atoms}
    piece = {}
    for w, a in atoms.items():
        ins, _ = ps.pieces(a.zone)
        if ins is None:
            raise ContainmentAmbiguity(f"atom {w} is not inside a single piece")
        piece[w] = ins

    images = {w: ps.map_zone(a.zone, piece[w]) for w, a in atoms.items()}
    alive = set(atoms)
    pruned = []
    changed = True
    while changed:
        changed = False
        for w in sorted(alive):
            succ = w[1:] + (piece[w],)
            if succ not in alive or images[w].intersect(atoms[succ].zone).is_empty():
                alive.discard(w)
                pruned.append(w)
                changed = True
    if not alive:
        raise ContainmentAmbiguity("no atom survived the consistency pruning")
    if pruned:
        log.info("pruned %d atoms enclosing empty sets: %s", len(pruned), pruned)

    nodes = tuple(sorted(alive))
    successor = {w: w[1:] + (piece[w],) for w in nodes}
    excess = max(images[w].excess_over(atoms[successor[w]].zone) for w in nodes)
    return TransitionGraph(
        nodes=nodes,
        successor=successor,
        atoms={w: atoms[w] for w in nodes},
        pruned=tuple(pruned),
        max_containment_excess=excess,
    )


def find_cycles(graph: TransitionGraph) -> list[GraphCycle]:
    """All cycles of the functional graph, each with the nodes draining into it.

    Cycles are rotated to start at their smallest word and listed in order of
    that word, so the output is independent of dictionary ordering.
    """
    succ = graph.successor
    cycle_of = {}
    depth = {}
    cycles = []
    for start in graph.nodes:
        if start in cycle_of:
            continue
        path = []
        pos = {}
        w = start
        while w not in cycle_of and w not in pos:
            pos[w] = len(path)
            path.append(w)
            w = succ[w]
        if w in pos:
            loop = path[pos[w]:]
            k = loop.index(min(loop))
            loop = tuple(loop[k:] + loop[:k])
            cid = len(cycles)
            cycles.append(loop)
            for x in loop:
                cycle_of[x] = cid
                depth[x] = 0
            path = path[:pos[w]]
            w = loop[0]
        # unwind the tail
        for x in reversed(path):
            nxt = succ[x]
            cycle_of[x] = cycle_of[nxt]
            depth[x] = depth[nxt] + 1

    order = sorted(range(len(cycles)), key=lambda c: cycles[c][0])
    out = []
    for c in order:
        tail = tuple(w for w in graph.nodes if cycle_of[w] == c and depth[w] > 0)
        h = max((depth[w] for w in tail), default=0)
        out.append(GraphCycle(cycles[c], tail, h))
    return out
