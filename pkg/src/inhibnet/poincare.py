"""The positive section B+, its continuity pieces, and the return map on it.

A post-spike state lies on a face ``{v_k = 0}``.  The piece of a state is the
neuron that reaches threshold first; ties (within ``TIE_TOL`` time units) form
the separation set where the map is multi-valued.

Distances use phase coordinates (see :func:`inhibnet.model.phase`), in which
the free flow is the translation along ``(1, ..., 1)``; projecting that
direction away gives a metric in which each piece map contracts.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .model import _phase, _phase_inv, _ttt
from .network import NetworkSpec, epsilon0

log = logging.getLogger(__name__)

TIE_TOL = 1e-9


class BranchError(ValueError):
    """A spike was requested for a neuron that is not among the first to fire."""


class PreconditionError(ValueError):
    pass


# ------------------------------------------------------------------- types


@dataclass(frozen=True)
class SectionPoint:
    """A point of B+ together with the index of its zero coordinate."""

    v: np.ndarray
    face: int

    def __post_init__(self):
        v = np.array(self.v, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "face", int(self.face))
        if v[self.face] != 0.0:
            raise ValueError(f"coordinate {self.face} must be exactly 0, got {v[self.face]}")

    @classmethod
    def from_state(cls, spec: NetworkSpec, v, face: int | None = None) -> "SectionPoint":
        """Validate ``v`` as a point of B+ and tag its face."""
        v = np.asarray(v, dtype=float)
        if v.shape != (spec.n,):
            raise ValueError(f"state must have {spec.n} components")
        if face is None:
            zeros = np.flatnonzero(v == 0.0)
            if zeros.size == 0:
                raise ValueError(f"state {v} has no zero coordinate")
            face = int(zeros[0])
        if not in_bplus(spec, v):
            raise ValueError(f"state {v} is not in B+")
        return cls(v, face)

    def __eq__(self, other):
        return (
            isinstance(other, SectionPoint)
            and self.face == other.face
            and np.array_equal(self.v, other.v)
        )

    def __hash__(self):
        return hash((self.face, self.v.tobytes()))


@dataclass(frozen=True)
class Box:
    """Axis-aligned sub-box of face ``face`` of B+ (``lo[face] = hi[face] = 0``)."""

    face: int
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lo, dtype=float)
        hi = np.array(self.hi, dtype=float)
        if lo.shape != hi.shape:
            raise ValueError("lo and hi differ in shape")
        if lo[self.face] != 0.0 or hi[self.face] != 0.0:
            raise ValueError("a face box must be pinned to 0 on its face coordinate")
        if np.any(lo > hi):
            raise ValueError(f"empty box: lo={lo}, hi={hi}")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x: SectionPoint) -> "Box":
        return cls(x.face, x.v, x.v)

    def within_bplus(self, spec: NetworkSpec) -> bool:
        return bool(np.all(self.lo >= 0) and np.all(self.hi <= 1.0 - epsilon0(spec)))

    def contains(self, v, tol: float = 0.0) -> bool:
        v = np.asarray(v)
        return bool(np.all(v >= self.lo - tol) and np.all(v <= self.hi + tol))

    def sample(self, m: int, rng: np.random.Generator) -> np.ndarray:
        pts = rng.uniform(self.lo, self.hi, size=(m, self.lo.size))
        pts[:, self.face] = 0.0
        return pts

    @property
    def widths(self) -> np.ndarray:
        return self.hi - self.lo

    def to_dict(self) -> dict:
        return {"face": self.face, "lo": self.lo.tolist(), "hi": self.hi.tolist()}


@dataclass(frozen=True)
class Inside:
    index: int


@dataclass(frozen=True)
class OnSeparation:
    indices: tuple


@dataclass(frozen=True)
class Straddles:
    indices: tuple


# ------------------------------------------------------------------ metric


@dataclass(frozen=True)
class Metric:
    """Per-neuron phase maps plus the projection onto ``sum(x) = 0``."""

    alpha: np.ndarray
    beta: np.ndarray

    @classmethod
    def for_spec(cls, spec: NetworkSpec) -> "Metric":
        return cls(spec.alpha, spec.beta)

    def phase(self, v) -> np.ndarray:
        return _phase(self.alpha, self.beta, np.asarray(v, dtype=float))

    def phase_inverse(self, s) -> np.ndarray:
        return _phase_inv(self.alpha, self.beta, np.asarray(s, dtype=float))

    @staticmethod
    def project(x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return x - x.mean(axis=-1, keepdims=True)

    def pairwise(self, A, B) -> np.ndarray:
        """Distance matrix between the rows of ``A`` and ``B`` (states)."""
        pa = self.project(self.phase(np.atleast_2d(A)))
        pb = self.project(self.phase(np.atleast_2d(B)))
        d = pa[:, None, :] - pb[None, :, :]
        return np.sqrt((d * d).sum(axis=-1))

    def rowwise(self, A, B) -> np.ndarray:
        d = self.project(self.phase(A) - self.phase(B))
        return np.sqrt((d * d).sum(axis=-1))


def _as_v(x) -> np.ndarray:
    return x.v if isinstance(x, SectionPoint) else np.asarray(x, dtype=float)


def dist(metric: Metric, x, y) -> float:
    """Projected phase distance ``||pi(xi(y) - xi(x))||``."""
    return float(metric.rowwise(_as_v(x), _as_v(y)))


# ------------------------------------------------------- pointwise dynamics


def in_bplus(spec: NetworkSpec, v, tol: float = 0.0) -> bool:
    v = np.asarray(v, dtype=float)
    return bool(
        np.any(v == 0.0)
        and np.all(v >= -tol)
        and np.all(v <= 1.0 - epsilon0(spec) + tol)
    )


def spike_times(spec: NetworkSpec, v) -> np.ndarray:
    return _ttt(spec.alpha, spec.beta, np.asarray(v, dtype=float))


def spike_time(spec: NetworkSpec, x, tie_tol: float = TIE_TOL) -> tuple[float, tuple]:
    """First spiking instant and the (sorted) set of neurons firing then."""
    v = _as_v(x)
    if np.any(v < -1.0 - 1e-12) or np.any(v > 1.0 + 1e-12):
        raise ValueError(f"state outside the cube: {v}")
    t = spike_times(spec, v)
    tbar = float(t.min())
    J = tuple(int(i) for i in np.flatnonzero(t <= tbar + tie_tol))
    return tbar, J


def apply_spike(spec: NetworkSpec, x, i: int, tie_tol: float = TIE_TOL) -> np.ndarray:
    """Flow to the first spike, then reset neuron ``i`` and inhibit the rest."""
    v = _as_v(x)
    tbar, J = spike_time(spec, v, tie_tol)
    if i not in J:
        raise BranchError(f"neuron {i} is not among the first spikers {J}")
    r = spec.beta / spec.alpha
    # nobody is past threshold at the first spike; the cap removes round-off
    flowed = np.minimum(r - (r - v) * np.exp(-spec.alpha * tbar), 1.0)
    out = np.maximum(flowed - spec.H[i], -1.0)
    out[i] = 0.0
    return out


def classify_piece(spec: NetworkSpec, x, tie_tol: float = TIE_TOL):
    """``Inside(i)`` when neuron ``i`` fires strictly first, else
    ``OnSeparation(J)`` with the tied set."""
    tbar, J = spike_time(spec, x, tie_tol)
    if len(J) == 1:
        return Inside(J[0])
    return OnSeparation(J)


def poincare_map(spec: NetworkSpec, x, policy: str = "lowest", tie_tol: float = TIE_TOL):
    """Return map on B+.

    ``policy="lowest"`` resolves ties to the smallest spiking index and returns
    one :class:`SectionPoint`; ``policy="all"`` returns the list of all branch
    images (one per tied neuron).
    """
    v = _as_v(x)
    _, J = spike_time(spec, v, tie_tol)
    if len(J) > 1:
        log.debug("tie at separation: %s at %s", J, v)
    if policy == "lowest":
        return SectionPoint(apply_spike(spec, v, J[0], tie_tol), J[0])
    if policy == "all":
        return [SectionPoint(apply_spike(spec, v, i, tie_tol), i) for i in J]
    raise ValueError(f"unknown branch policy {policy!r}")


def piece_map(spec: NetworkSpec, v, i: int) -> np.ndarray:
    """Formula of the piece map ``f_i`` evaluated at ``v`` (no piece check).

    Used for forced itineraries; on B_i it coincides with the return map.
    """
    v = np.asarray(v, dtype=float)
    t = _ttt(spec.alpha[i], spec.beta[i], v[..., i])
    r = spec.beta / spec.alpha
    flowed = np.minimum(r - (r - v) * np.exp(-spec.alpha * np.asarray(t)[..., None]), 1.0)
    out = np.maximum(flowed - spec.H[i], -1.0)
    out[..., i] = 0.0
    return out


def return_map_batch(spec: NetworkSpec, V, tie_tol: float = TIE_TOL):
    """Vectorized return map (lowest-index ties).  Returns ``(images, spikers)``."""
    out, spiker, _ = _kernels.return_map_batch(V, spec.alpha, spec.beta, spec.H, tie_tol)
    return out, spiker


# -------------------------------------------------------------- boxes


def piece_of_box(spec: NetworkSpec, b: Box, tie_tol: float = TIE_TOL):
    """Exact piece test for a box from the monotonicity of spike times.

    Each ``t_j`` is decreasing in ``v_j`` so over the box it ranges over
    ``[t_j(hi_j), t_j(lo_j)]``.  Neuron ``i`` fires first on the whole box iff
    its slowest time beats every other neuron's fastest time.
    """
    t_fast = spike_times(spec, b.hi)
    t_slow = spike_times(spec, b.lo)
    n = spec.n
    for i in range(n):
        others = np.delete(np.arange(n), i)
        if np.all(t_slow[i] < t_fast[others] - tie_tol):
            return Inside(i)
    bound = t_slow.min()
    J = tuple(int(j) for j in np.flatnonzero(t_fast <= bound + tie_tol))
    return Straddles(J)


def map_box(spec: NetworkSpec, b: Box, i: int, tie_tol: float = TIE_TOL) -> Box:
    """Per-coordinate range of ``f_i`` over a box lying inside piece ``i``.

    ``f_i``'s coordinate ``j`` is increasing in ``v_j`` and decreasing in
    ``v_i``, so its range over the box is attained at two corners.
    """
    piece = piece_of_box(spec, b, tie_tol)
    if piece != Inside(i):
        raise PreconditionError(f"box is {piece}, not Inside({i})")
    lo_corner = b.lo.copy()
    lo_corner[i] = b.hi[i]
    hi_corner = b.hi.copy()
    hi_corner[i] = b.lo[i]
    new_lo = piece_map(spec, lo_corner, i)
    new_hi = piece_map(spec, hi_corner, i)
    return Box(i, new_lo, new_hi)


def box_diameter(metric: Metric, b: Box) -> float:
    """Largest distance between two corners of ``b``.

    The squared distance is convex in the pair of points, so the maximum over
    the box is attained at corners.
    """
    free = [j for j in range(b.lo.size) if b.hi[j] > b.lo[j]]
    if not free:
        return 0.0
    lo_p = metric.phase(b.lo)
    hi_p = metric.phase(b.hi)
    w = hi_p - lo_p
    best = 0.0
    # differences between corners are +-w_j on any subset of free axes
    for mask in range(1 << len(free)):
        d = np.zeros_like(w)
        for bit, j in enumerate(free):
            d[j] = w[j] if (mask >> bit) & 1 else -w[j]
        d = d - d.mean()
        best = max(best, float(np.sqrt((d * d).sum())))
    return best


# ------------------------------------------------------------- sampling


def sample_bplus(spec: NetworkSpec, m: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform faces, uniform free coordinates in ``[0, 1 - eps0]``."""
    top = 1.0 - epsilon0(spec)
    V = rng.uniform(0.0, top, size=(m, spec.n))
    faces = rng.integers(0, spec.n, size=m)
    V[np.arange(m), faces] = 0.0
    return V


def sample_section(spec: NetworkSpec, m: int, rng: np.random.Generator) -> np.ndarray:
    """Points of the full section B (free coordinates anywhere in [-1, 1])."""
    V = rng.uniform(-1.0, 1.0, size=(m, spec.n))
    faces = rng.integers(0, spec.n, size=m)
    V[np.arange(m), faces] = 0.0
    return V


def sample_bplus_boundary(spec: NetworkSpec, m: int, rng: np.random.Generator) -> np.ndarray:
    """B+ points concentrated on edges, the outer wall and near ties."""
    V = sample_bplus(spec, m, rng)
    top = 1.0 - epsilon0(spec)
    kind = rng.integers(0, 3, size=m)
    for r in range(m):
        face = int(np.flatnonzero(V[r] == 0.0)[0])
        free = [j for j in range(spec.n) if j != face]
        j = free[rng.integers(len(free))]
        if kind[r] == 0:
            V[r, j] = 0.0
        elif kind[r] == 1:
            V[r, j] = top
        else:
            # move j onto a tie with another free neuron, then jitter
            others = [q for q in free if q != j]
            q = others[rng.integers(len(others))]
            tq = _ttt(spec.alpha[q], spec.beta[q], V[r, q])
            s = _phase(spec.alpha[j], spec.beta[j], 1.0) - tq
            vj = float(_phase_inv(spec.alpha[j], spec.beta[j], s))
            vj += rng.uniform(-1e-6, 1e-6)
            V[r, j] = min(max(vj, 0.0), top)
    return V


def faces_of(V) -> np.ndarray:
    """Face index (first exactly-zero coordinate) of each row."""
    V = np.atleast_2d(V)
    return np.argmax(V == 0.0, axis=1)


# ------------------------------------------------------------ separation


@dataclass(frozen=True)
class SeparationResult:
    alpha: float
    structural_ok: bool
    samples: int
    violations: int

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "structural_ok": self.structural_ok,
            "samples": self.samples,
            "violations": self.violations,
        }


def separation_alpha(spec: NetworkSpec, metric: Metric, samples: int,
                     rng: np.random.Generator | None = None) -> SeparationResult:
    """Sampled lower-level estimate of the gap between images of distinct pieces.

    Also checks the structural certificate behind the gap: the image of piece
    ``i`` sits on face ``i`` with every other coordinate strictly positive.
    """
    rng = rng or np.random.default_rng(0)
    half = samples // 2
    V = np.vstack([sample_bplus(spec, samples - half, rng),
                   sample_bplus_boundary(spec, half, rng)])
    images = []
    pieces = []
    for v in V:
        for y in poincare_map(spec, v, policy="all"):
            images.append(y.v)
            pieces.append(y.face)
    images = np.array(images)
    pieces = np.array(pieces)

    on_face = images[np.arange(len(images)), pieces] == 0.0
    masked = images.copy()
    masked[np.arange(len(images)), pieces] = 1.0
    positive = np.all(masked > 0.0, axis=1)
    violations = int(np.sum(~(on_face & positive)))

    gap = np.inf
    present = np.unique(pieces)
    for a in present:
        for b in present:
            if b <= a:
                continue
            A = images[pieces == a]
            B = images[pieces == b]
            for start in range(0, len(A), 512):
                gap = min(gap, float(metric.pairwise(A[start:start + 512], B).min()))
    return SeparationResult(float(gap), violations == 0, len(images), violations)
