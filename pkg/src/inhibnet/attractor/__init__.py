"""Atom refinement, limit-cycle certification, basins, simulation, persistence."""

from .cycles import SpuriousCycle, basin_of, locate_all, locate_periodic_orbit
from .graph import build_transition_graph, find_cycles
from .persistence import EmptySetError, hausdorff, match_cycles, perturb_and_compare
from .pipeline import AnalysisOptions, AnalysisResult, AssumptionFailure, analyze
from .refine import initial_boxes, refine
from .simulate import projection_xy, simulate
from .types import (Atom, BasinStats, Certified, ContainmentAmbiguity, GraphCycle,
                    InternalInconsistency, LimitCycle, PerturbationResult, SpikeTrain,
                    TransitionGraph, Undecided)

__all__ = [
    "AnalysisOptions", "AnalysisResult", "AssumptionFailure", "Atom", "BasinStats",
    "Certified", "ContainmentAmbiguity", "EmptySetError", "GraphCycle",
    "InternalInconsistency", "LimitCycle", "PerturbationResult", "SpikeTrain",
    "SpuriousCycle", "TransitionGraph", "Undecided", "analyze", "basin_of",
    "build_transition_graph", "find_cycles", "hausdorff", "initial_boxes",
    "locate_all", "locate_periodic_orbit", "match_cycles", "perturb_and_compare",
    "projection_xy", "refine", "simulate",
]
