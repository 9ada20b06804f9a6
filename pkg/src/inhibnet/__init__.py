"""Return maps, limit-cycle certification and persistence tests for networks
of mutually inhibitory pacemaker neurons."""

from .model import NeuronParams
from .network import AssumptionReport, NetworkSpec, check_assumptions, contraction_bounds
from .poincare import Box, Metric, SectionPoint, dist, poincare_map

__version__ = "0.1.0"

__all__ = [
    "AssumptionReport", "Box", "Metric", "NetworkSpec", "NeuronParams", "SectionPoint",
    "check_assumptions", "contraction_bounds", "dist", "poincare_map", "__version__",
]
