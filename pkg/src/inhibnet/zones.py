"""Difference-bound zones in phase coordinates: the certification workhorse.

A zone is a convex set of phase vectors ``u`` described by bounds on every
pairwise difference ``u_a - u_b <= M[a, b]`` plus bounds on each ``u_a``
(through an auxiliary variable pinned to 0, stored last).  Two facts make
this domain fit the return map:

* the free flow translates every phase by the same amount, so difference
  bounds survive the flow with no loss;
* after the flow, each coordinate passes through a monotone scalar map, and
  the pairwise difference of two such maps can be bounded tightly from the
  range of their derivatives.

Axis-aligned boxes lose a constant factor per iterate here (the spike time
depends on the spiking coordinate, which couples every other coordinate to
it), so composed box images never shrink; zones do.

Rounding is not directed.  Every computed bound is widened by ``PAD``, which
is orders of magnitude above the floating-point error of the formulas.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import _phase, _phase_inv
from .network import NetworkSpec, epsilon0
from .poincare import Box

PAD = 1e-12
EMPTY_TOL = 1e-13


def close(M: np.ndarray) -> np.ndarray:
    """Shortest-path closure (Floyd-Warshall) of a difference-bound matrix."""
    M = M.copy()
    for k in range(M.shape[0]):
        M = np.minimum(M, M[:, k, None] + M[None, k, :])
    return M


@dataclass(frozen=True, eq=False)
class Zone:
    """Closed difference-bound zone on face ``face`` (where ``u_face = 0``)."""

    face: int
    M: np.ndarray

    @property
    def n(self) -> int:
        return self.M.shape[0] - 1

    def is_empty(self) -> bool:
        return bool(np.any(np.diag(self.M) < -EMPTY_TOL))

    def lower(self) -> np.ndarray:
        return -self.M[-1, :-1]

    def upper(self) -> np.ndarray:
        return self.M[:-1, -1]

    def diff_width(self) -> np.ndarray:
        """``W[a, b]``: width of the range of ``u_a - u_b``."""
        D = self.M[:-1, :-1]
        return D + D.T

    def constrain(self, a: int, b: int, c: float) -> "Zone":
        """Intersect with ``u_a - u_b <= c`` (``b = n`` means the constant 0)."""
        M = self.M.copy()
        M[a, b] = min(M[a, b], c)
        return Zone(self.face, close(M))

    def intersect(self, other: "Zone") -> "Zone":
        return Zone(self.face, close(np.minimum(self.M, other.M)))

    def join(self, other: "Zone") -> "Zone":
        """Smallest zone containing both (exact for closed inputs)."""
        if self.face != other.face:
            raise ValueError("cannot join zones on different faces")
        return Zone(self.face, np.maximum(self.M, other.M))

    def contains(self, other: "Zone", tol: float = 0.0) -> bool:
        return bool(np.all(other.M <= self.M + tol))

    def excess_over(self, other: "Zone") -> float:
        """Largest amount by which a bound of ``self`` exceeds ``other``'s."""
        d = self.M - other.M
        return float(max(0.0, np.max(d[np.isfinite(d)], initial=0.0)))

    def contains_point(self, u, tol: float = 0.0) -> bool:
        x = np.append(np.asarray(u, dtype=float), 0.0)
        return bool(np.all(x[:, None] - x[None, :] <= self.M + tol))

    def center(self) -> np.ndarray:
        """A point of the zone, built by pinning coordinates to mid-range."""
        M = self.M
        n = self.n
        for a in range(n):
            lo, hi = -M[n, a], M[a, n]
            mid = 0.5 * (lo + hi)
            M = M.copy()
            M[a, n] = mid
            M[n, a] = -mid
            M = close(M)
        return M[:n, n].copy()

    def diameter_bound(self) -> float:
        """Upper bound on the projected-phase diameter.

        For ``d = u - u'`` with both points in the zone,
        ``||pi d||^2 = (1/n) sum_{a<b} (d_a - d_b)^2`` and each ``|d_a - d_b|``
        is at most the width of the range of ``u_a - u_b``.
        """
        W = self.diff_width()
        iu = np.triu_indices(self.n, 1)
        return float(np.sqrt((W[iu] ** 2).sum() / self.n))

    def bounds_dict(self) -> dict:
        return {"face": self.face, "lo": self.lower().tolist(), "hi": self.upper().tolist()}


class PhaseSystem:
    """Piece maps of a network written in phase coordinates.

    With ``u`` the phase vector and ``tau`` the threshold phases, neuron ``i``
    fires first iff ``u_j - u_i <= tau_j - tau_i`` for all ``j``.  When it
    does, ``u_j`` becomes ``psi_ij(u_j - u_i + tau_i)`` where
    ``psi_ij(s) = xi_j(xi_j^{-1}(s) - H_ij)`` is increasing with derivative
    ``gamma_j(x) / gamma_j(x - H_ij)`` in ``(0, 1)``, decreasing in ``s``.
    """

    def __init__(self, spec: NetworkSpec, tie_tol: float = 1e-9):
        self.spec = spec
        self.n = spec.n
        self.alpha = np.asarray(spec.alpha, dtype=float)
        self.beta = np.asarray(spec.beta, dtype=float)
        self.H = np.asarray(spec.H, dtype=float)
        self.tau = _phase(self.alpha, self.beta, 1.0)
        self.top = _phase(self.alpha, self.beta, 1.0 - epsilon0(spec))
        self.tie_tol = tie_tol

    # -- coordinate changes
    def to_phase(self, V) -> np.ndarray:
        return _phase(self.alpha, self.beta, np.asarray(V, dtype=float))

    def to_state(self, U) -> np.ndarray:
        return _phase_inv(self.alpha, self.beta, np.asarray(U, dtype=float))

    def psi(self, i, j, s):
        a, b = self.alpha[j], self.beta[j]
        x = _phase_inv(a, b, s)
        return _phase(a, b, x - self.H[i, j])

    def dpsi(self, i, j, s):
        a, b = self.alpha[j], self.beta[j]
        x = _phase_inv(a, b, s)
        return (b - a * x) / (b - a * (x - self.H[i, j]))

    # -- zones
    def face_zone(self, k: int) -> Zone:
        """Face ``k`` of B+ as a zone: ``u_k = 0``, ``0 <= u_j <= xi_j(1 - eps0)``."""
        n = self.n
        M = np.full((n + 1, n + 1), np.inf)
        np.fill_diagonal(M, 0.0)
        hi = self.top.copy()
        hi[k] = 0.0
        M[:n, n] = hi
        M[n, :n] = 0.0
        return Zone(k, close(M))

    def zone_of_box(self, b: Box) -> Zone:
        n = self.n
        M = np.full((n + 1, n + 1), np.inf)
        np.fill_diagonal(M, 0.0)
        M[:n, n] = self.to_phase(b.hi)
        M[n, :n] = -self.to_phase(b.lo)
        return Zone(b.face, close(M))

    def to_box(self, z: Zone) -> Box:
        lo = np.maximum(self.to_state(z.lower()), 0.0)
        hi = self.to_state(z.upper())
        lo[z.face] = hi[z.face] = 0.0
        return Box(z.face, lo, np.maximum(hi, lo))

    def inside(self, z: Zone, i: int) -> bool:
        """Every point of ``z`` fires neuron ``i`` strictly first (beyond the tie band)."""
        n = self.n
        return all(
            z.M[j, i] < self.tau[j] - self.tau[i] - self.tie_tol for j in range(n) if j != i
        )

    def part(self, z: Zone, i: int) -> Zone:
        """Intersection of ``z`` with the closed piece of neuron ``i``."""
        M = z.M.copy()
        for j in range(self.n):
            if j != i:
                M[j, i] = min(M[j, i], self.tau[j] - self.tau[i] + PAD)
        return Zone(z.face, close(M))

    def pieces(self, z: Zone):
        """``(inside_index or None, [(i, part_i), ...] for nonempty parts)``."""
        for i in range(self.n):
            if self.inside(z, i):
                return i, [(i, z)]
        parts = []
        for i in range(self.n):
            p = self.part(z, i)
            if not p.is_empty():
                parts.append((i, p))
        return None, parts

    def map_zone(self, z: Zone, i: int) -> Zone:
        """Zone enclosing ``f_i`` of ``z``; ``z`` must lie in the closed piece ``i``."""
        n = self.n
        M = z.M
        tau_i = self.tau[i]
        others = [j for j in range(n) if j != i]
        # post-flow phases w_j = u_j - u_i + tau_i
        wlo = {j: tau_i - M[i, j] for j in others}
        whi = {j: tau_i + M[j, i] for j in others}
        out = np.full((n + 1, n + 1), np.inf)
        np.fill_diagonal(out, 0.0)
        out[i, n] = out[n, i] = 0.0
        for j in others:
            lo = float(self.psi(i, j, wlo[j])) - PAD
            hi = float(self.psi(i, j, whi[j])) + PAD
            out[j, n] = out[j, i] = hi
            out[n, j] = out[i, j] = -lo
        for j in others:
            for l in others:
                if l == j:
                    continue
                # u'_j - u'_l = psi_ij(a) - psi_il(b) with a - b = u_j - u_l
                ub = self._max_diff(i, j, l, wlo[j], whi[j], wlo[l], whi[l], M[j, l])
                out[j, l] = min(out[j, l], ub + PAD)
        return Zone(i, close(out))

    def _max_diff(self, i, j, l, a0, a1, b0, b1, d1):
        """Upper bound of ``psi_ij(a) - psi_il(b)`` over ``a in [a0, a1]``,
        ``b in [b0, b1]``, ``a - b <= d1``."""
        if a1 - b0 <= d1:
            return float(self.psi(i, j, a1) - self.psi(i, l, b0))
        # optimum sits on the segment a - b = d1
        s0 = max(a0, b0 + d1)
        s1 = min(a1, b1 + d1)
        if s1 < s0:
            s0 = s1 = 0.5 * (s0 + s1)
        h0 = float(self.psi(i, j, s0) - self.psi(i, l, s0 - d1))
        h1 = float(self.psi(i, j, s1) - self.psi(i, l, s1 - d1))
        L = s1 - s0
        if L <= 0:
            return max(h0, h1)
        # psi' is decreasing, so these bound h' = psi_ij'(a) - psi_il'(a - d1)
        gmax = float(self.dpsi(i, j, s0) - self.dpsi(i, l, s1 - d1))
        gmin = float(self.dpsi(i, j, s1) - self.dpsi(i, l, s0 - d1))
        if gmax <= 0:
            return h0
        if gmin >= 0:
            return h1
        # h <= min(h0 + gmax (a - s0), h1 - gmin (s1 - a)); maximize over a
        x = (h1 - h0 - gmin * L) / (gmax - gmin)
        x = min(max(x, 0.0), L)
        return max(h0, h1, h0 + gmax * x)

    def apply_piece(self, u, i: int) -> np.ndarray:
        """Exact ``f_i`` in phase coordinates (no piece check)."""
        u = np.asarray(u, dtype=float)
        w = u - u[i] + self.tau[i]
        out = np.array([0.0 if j == i else float(self.psi(i, j, w[j])) for j in range(self.n)])
        return out
