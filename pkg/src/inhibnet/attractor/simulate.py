"""Event-driven simulation in absolute time."""

from __future__ import annotations

import numpy as np

from ..model import DOMAIN_TOL, _phase
from ..network import NetworkSpec
from ..poincare import TIE_TOL, apply_spike, spike_time
from .types import SpikeEvent, SpikeTrain


def simulate(spec: NetworkSpec, x0, n_spikes: int, policy: str = "lowest",
             tie_tol: float = TIE_TOL) -> SpikeTrain:
    """Run ``n_spikes`` network spikes from ``x0`` (any state of the cube).

    Between spikes the flow is exact.  When several neurons reach threshold
    together the event records the whole tied set and resets the lowest index;
    the inhibition it sends pushes the others back below threshold, so no
    second spike happens at that instant.  The clipped synaptic rule is always
    used; it is the identity on B+.
    """
    if policy != "lowest":
        raise ValueError(f"simulation supports only the 'lowest' tie policy, got {policy!r}")
    x = np.asarray(x0, dtype=float)
    if x.shape != (spec.n,):
        raise ValueError(f"initial state must have {spec.n} components")
    if np.any(np.abs(x) > 1.0 + DOMAIN_TOL):
        raise ValueError(f"initial state outside [-1, 1]^n: {x}")
    x = np.clip(x, -1.0, 1.0)
    t = 0.0
    events = []
    for _ in range(n_spikes):
        tbar, J = spike_time(spec, x, tie_tol)
        x = apply_spike(spec, x, J[0], tie_tol)
        t += tbar
        x.setflags(write=False)
        events.append(SpikeEvent(t, J, x))
    return SpikeTrain(tuple(events), np.asarray(x0, dtype=float))


def eventual_itinerary(train: SpikeTrain, period: int) -> tuple:
    """Last ``period`` spikers of a train."""
    return tuple(train.spikers[-period:])


def projection_xy(spec: NetworkSpec, states) -> np.ndarray:
    """Orthonormal 2-D coordinates of the phase vectors of ``states`` on the
    plane orthogonal to ``(1, 1, 1)`` (n = 3 only).

    In these coordinates B+ appears as a hexagon.
    """
    if spec.n != 3:
        raise ValueError("the planar projection is defined for n = 3 only")
    U = _phase(spec.alpha, spec.beta, np.atleast_2d(states))
    e1 = np.array([1.0, -1.0, 0.0]) / np.sqrt(2.0)
    e2 = np.array([1.0, 1.0, -2.0]) / np.sqrt(6.0)
    return np.column_stack([U @ e1, U @ e2])
