"""Network instances, the standing dissipativity assumptions, derived constants."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import NeuronParams, _ttt


class InvalidSpecError(ValueError):
    """Raised when a network violates a structural requirement."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class NetworkSpec:
    """``n`` relaxation oscillators coupled by inhibitory jumps ``H[i, j]``.

    ``H[i, j]`` is the drop in potential of neuron ``j`` when neuron ``i``
    spikes.  The diagonal is always stored as +1 (the reset written as a jump).
    Indices are 0-based throughout the library.
    """

    neurons: tuple
    H: np.ndarray = field(repr=False)

    def __post_init__(self):
        neurons = tuple(
            p if isinstance(p, NeuronParams) else NeuronParams(*p) for p in self.neurons
        )
        H = np.array(self.H, dtype=float)
        n = len(neurons)
        problems = []
        if n < 3:
            problems.append(f"network needs at least 3 neurons, got n={n}")
        if H.shape != (n, n):
            problems.append(f"H must be {n}x{n}, got shape {H.shape}")
        else:
            off = ~np.eye(n, dtype=bool)
            if not np.all(np.isfinite(H[off])):
                problems.append("H has non-finite entries")
            bad = np.argwhere(off & ~(H > 0))
            for i, j in bad:
                problems.append(
                    f"H[{i}][{j}] = {H[i, j]} must be > 0 (complete inhibitory graph)"
                )
        if problems:
            raise InvalidSpecError(problems)
        np.fill_diagonal(H, 1.0)
        H.setflags(write=False)
        object.__setattr__(self, "neurons", neurons)
        object.__setattr__(self, "H", H)
        alpha = np.array([p.alpha for p in neurons])
        beta = np.array([p.beta for p in neurons])
        alpha.setflags(write=False)
        beta.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @property
    def n(self) -> int:
        return len(self.neurons)

    @classmethod
    def homogeneous(cls, n: int, alpha: float, beta: float, h: float) -> "NetworkSpec":
        return cls(tuple(NeuronParams(alpha, beta) for _ in range(n)), np.full((n, n), h))

    @classmethod
    def from_arrays(cls, alpha, beta, H) -> "NetworkSpec":
        alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
        beta = np.atleast_1d(np.asarray(beta, dtype=float))
        if alpha.shape != beta.shape:
            raise InvalidSpecError("alpha and beta must have the same length")
        try:
            neurons = tuple(NeuronParams(float(a), float(b)) for a, b in zip(alpha, beta))
        except ValueError as exc:
            raise InvalidSpecError(str(exc)) from None
        return cls(neurons, np.asarray(H, dtype=float))

    def off_diagonal(self) -> np.ndarray:
        return self.H[~np.eye(self.n, dtype=bool)]

    def gamma_at(self, v) -> np.ndarray:
        """Per-neuron drift evaluated at the same potential ``v``."""
        return self.beta - self.alpha * v

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "alpha": [float(a) for a in self.alpha],
            "beta": [float(b) for b in self.beta],
            "H": [[float(x) for x in row] for row in self.H],
        }

    def permuted(self, perm) -> "NetworkSpec":
        perm = list(perm)
        return NetworkSpec.from_arrays(
            self.alpha[perm], self.beta[perm], self.H[np.ix_(perm, perm)]
        )

    def perturbed(self, delta: float, rng: np.random.Generator, params: bool = False):
        """Copy with each off-diagonal ``H`` (and optionally alpha, beta) shifted
        by independent uniform noise in ``[-delta, delta]``.

        Draw order is fixed (H row-major, then alpha, then beta) so a seeded
        generator gives a reproducible spec.  Returns ``None`` when the draw
        leaves the admissible parameter set.
        """
        H = self.H + rng.uniform(-delta, delta, size=(self.n, self.n))
        alpha, beta = self.alpha.copy(), self.beta.copy()
        if params:
            alpha = alpha + rng.uniform(-delta, delta, size=self.n)
            beta = beta + rng.uniform(-delta, delta, size=self.n)
        try:
            return NetworkSpec.from_arrays(alpha, beta, H)
        except InvalidSpecError:
            return None


@dataclass(frozen=True)
class AssumptionReport:
    eps0: float
    eps1: float
    T: float
    Tstar: float
    lam: float
    sigma: float
    cond9: bool
    cond10: bool
    cond11: bool
    slack9: float
    slack10: float
    slack11: float
    entry_bound_p: int | None

    @property
    def ok(self) -> bool:
        return self.cond9 and self.cond10 and self.cond11

    def failed(self) -> list[str]:
        return [name for name in ("cond9", "cond10", "cond11") if not getattr(self, name)]

    def to_dict(self) -> dict:
        return {
            "eps0": self.eps0,
            "eps1": self.eps1,
            "T": self.T,
            "Tstar": self.Tstar,
            "lambda": self.lam,
            "sigma": self.sigma,
            "cond9": {"holds": self.cond9, "slack": self.slack9},
            "cond10": {"holds": self.cond10, "slack": self.slack10},
            "cond11": {"holds": self.cond11, "slack": self.slack11},
            "entry_bound_p": self.entry_bound_p,
            "all_hold": self.ok,
        }


def epsilon0(spec: NetworkSpec) -> float:
    """Smallest synaptic jump between distinct neurons."""
    off = spec.off_diagonal()
    if np.any(off <= 0):
        raise InvalidSpecError("every off-diagonal H entry must be positive")
    return float(off.min())


def min_dissipation(spec: NetworkSpec) -> float:
    # min over neurons of min |gamma'| on [1/4, 3/4]; gamma' is constant here.
    return float(spec.alpha.min())


def min_interspike_T(spec: NetworkSpec) -> float:
    """Lower bound on every interspike interval from a state in B+."""
    return epsilon0(spec) / float(spec.gamma_at(0.75).max())


def max_interspike_T(spec: NetworkSpec) -> float:
    # Every point of B+ has a zero coordinate, so the next spike comes no
    # later than the slowest neuron's free period from reset.
    return float(_ttt(spec.alpha, spec.beta, 0.0).max())


def epsilon1(spec: NetworkSpec) -> float:
    """Guaranteed increase of a non-positive coordinate per iterate.

    Non-positive when the dissipativity assumptions fail; callers decide.
    """
    e0 = epsilon0(spec)
    ratio = float(spec.gamma_at(0.25).min() / spec.gamma_at(0.75).max())
    return e0 * ratio - float(spec.off_diagonal().max())


def entry_bound(eps1: float) -> int | None:
    """Iterates needed to enter B+ from anywhere in B: ``1 + floor(1/eps1)``."""
    if not eps1 > 0:
        return None
    # Round-off can put 1/eps1 one ulp under an exact integer; rounding up
    # keeps this a valid upper bound.
    return 1 + int(math.floor(1.0 / eps1 + 1e-9))


def contraction_bounds(spec: NetworkSpec) -> tuple[float, float, float, float]:
    """Return ``(sigma, lambda, T, Tstar)`` bounding the piecewise contraction."""
    T = min_interspike_T(spec)
    Tstar = max_interspike_T(spec)
    lam = math.exp(-float(spec.alpha.min()) * T)
    sigma = math.exp(-float(spec.alpha.max()) * Tstar)
    return sigma, lam, T, Tstar


def check_assumptions(spec: NetworkSpec) -> AssumptionReport:
    """Evaluate the three dissipativity inequalities and all derived constants.

    Failures are reported through the booleans and slacks (rhs - lhs), never
    raised.
    """
    e0 = epsilon0(spec)
    off = spec.off_diagonal()
    hmax = float(off.max())
    g34 = spec.gamma_at(0.75)
    dmin = min_dissipation(spec)

    slack9 = 0.25 - hmax
    spread = float(g34.max() - g34.min())
    slack10 = dmin / 4.0 - spread
    slack11 = dmin / (4.0 * float(g34.max())) - (hmax / e0 - 1.0)

    e1 = epsilon1(spec)
    sigma, lam, T, Tstar = contraction_bounds(spec)
    return AssumptionReport(
        eps0=e0,
        eps1=e1,
        T=T,
        Tstar=Tstar,
        lam=lam,
        sigma=sigma,
        cond9=bool(slack9 > 0),
        cond10=bool(slack10 > 0),
        cond11=bool(slack11 > 0),
        slack9=slack9,
        slack10=slack10,
        slack11=slack11,
        entry_bound_p=entry_bound(e1),
    )
