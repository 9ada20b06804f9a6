"""Closed-form dynamics of a single relaxation-oscillator pacemaker.

Between spikes each potential obeys ``dV/dt = beta - alpha * V`` on the
normalized range [-1, 1] (threshold 1, reset 0).  Every quantity below has an
explicit formula, so nothing in this module integrates an ODE.

All functions broadcast: ``p.alpha`` / ``p.beta`` may be arrays of per-neuron
coefficients, which is how :mod:`inhibnet.network` evaluates whole states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

THRESHOLD_TOL = 1e-10
DOMAIN_TOL = 1e-12


class DomainError(ValueError):
    """A potential lies outside the phase space [-1, 1]."""


@dataclass(frozen=True)
class NeuronParams:
    """Coefficients of ``gamma(V) = beta - alpha * V``.

    Requires ``alpha > 0`` and ``beta > alpha`` so the neuron is a pacemaker
    (``gamma > 0`` on [-1, 1]) and dissipative (``gamma' = -alpha < 0``).
    """

    alpha: float
    beta: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.beta > self.alpha:
            raise ValueError(f"beta must exceed alpha, got beta={self.beta}, alpha={self.alpha}")


def _check_domain(v):
    v = np.asarray(v, dtype=float)
    if np.any(v < -1.0 - DOMAIN_TOL) or np.any(v > 1.0 + DOMAIN_TOL):
        raise DomainError(f"potential outside [-1, 1]: {v}")
    return v


def gamma(p: NeuronParams, v):
    """Drift ``beta - alpha * v``; positive and strictly decreasing on [-1, 1]."""
    v = _check_domain(v)
    return p.beta - p.alpha * v


def flow(p: NeuronParams, v, t):
    """Potential reached after free evolution for time ``t`` from ``v``.

    The result is not clamped; values above 1 mean the threshold was crossed.
    """
    r = np.asarray(p.beta, dtype=float) / p.alpha
    return r - (r - np.asarray(v, dtype=float)) * np.exp(-p.alpha * np.asarray(t, dtype=float))


def time_to_threshold(p: NeuronParams, v):
    """Time for the free flow from ``v`` to reach the threshold 1."""
    v = _check_domain(v)
    return np.log((p.beta - p.alpha * v) / (p.beta - p.alpha)) / p.alpha


def flow_derivative_dv(p: NeuronParams, v, t):
    # Liouville: exp of the integral of gamma' = -alpha along the orbit.
    return np.exp(-p.alpha * np.asarray(t, dtype=float)) + 0.0 * np.asarray(v, dtype=float)


def phase(p: NeuronParams, v):
    """Time needed to reach ``v`` from the reset value 0 (negative below 0).

    In this coordinate the free flow is a unit-speed translation:
    ``phase(flow(v, t)) == phase(v) + t``.
    """
    v = _check_domain(v)
    return _phase(p.alpha, p.beta, v)


def phase_inverse(p: NeuronParams, s):
    """Potential whose phase is ``s``."""
    return _phase_inv(p.alpha, p.beta, np.asarray(s, dtype=float))


def threshold_phase(p: NeuronParams):
    """Phase of the threshold, i.e. the free period from reset to spike."""
    return _phase(p.alpha, p.beta, 1.0)


# Unchecked kernels shared with the network-level code.  The log1p/expm1
# forms keep full relative precision near the reset value.

def _phase(alpha, beta, v):
    return -np.log1p(-alpha * v / beta) / alpha


def _phase_inv(alpha, beta, s):
    return -(beta / alpha) * np.expm1(-alpha * s)


def _ttt(alpha, beta, v):
    return np.log((beta - alpha * v) / (beta - alpha)) / alpha
