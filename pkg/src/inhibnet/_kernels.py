"""Batch kernels for the return map: numba-compiled with a pure numpy twin.

The numba path is used unless ``INHIBNET_DISABLE_NUMBA`` is set to a truthy
value (or numba fails to import).  Both paths implement the same arithmetic;
``benchmarks/bench_kernels.py`` compares them.

Conventions shared by every kernel:

* ``V`` is an ``(m, n)`` float array of states, ``H`` has diagonal +1.
* Ties inside ``tie_tol`` (time units) go to the lowest index.
* The synaptic rule clips at -1, which is a no-op on B+.
* Flowed potentials are capped at 1 before inhibition: nobody is past
  threshold at the first spike, so this only removes round-off.
"""

from __future__ import annotations

import os

import numpy as np

_FLAG = "INHIBNET_DISABLE_NUMBA"


def _numba_requested() -> bool:
    return os.environ.get(_FLAG, "").strip().lower() not in ("1", "true", "yes", "on")


try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

BACKEND = "numba" if (HAVE_NUMBA and _numba_requested()) else "numpy"


# ---------------------------------------------------------------- numpy path


def _np_return_map(V, alpha, beta, H, tie_tol):
    V = np.asarray(V, dtype=float)
    t = np.log((beta - alpha * V) / (beta - alpha)) / alpha
    tbar = t.min(axis=1)
    # argmax on a boolean mask returns the first True -> lowest tied index
    spiker = np.argmax(t <= (tbar + tie_tol)[:, None], axis=1)
    r = beta / alpha
    flowed = np.minimum(r - (r - V) * np.exp(-alpha * tbar[:, None]), 1.0)
    out = np.maximum(flowed - H[spiker], -1.0)
    out[np.arange(V.shape[0]), spiker] = 0.0
    return out, spiker, tbar


def _np_iterate(V, alpha, beta, H, tie_tol, n_iter):
    V = np.array(V, dtype=float)
    word = np.empty((V.shape[0], n_iter), dtype=np.int64)
    for k in range(n_iter):
        V, word[:, k], _ = _np_return_map(V, alpha, beta, H, tie_tol)
    return V, word


def _np_phase(V, alpha, beta):
    return -np.log1p(-alpha * V / beta) / alpha


def _np_assign(V, alpha, beta, H, tie_tol, targets, target_face, target_id, match_tol, max_iter):
    """Iterate each row until it is within ``match_tol`` (projected phase
    distance) of a target point on the same face; return the target's id or
    -1, and the number of iterates used."""
    V = np.array(V, dtype=float)
    m, n = V.shape
    tphase = _np_phase(targets, alpha, beta)
    assigned = np.full(m, -1, dtype=np.int64)
    used = np.full(m, max_iter, dtype=np.int64)
    active = np.arange(m)
    for k in range(max_iter + 1):
        if active.size == 0:
            break
        x = V[active]
        face = np.argmin(np.abs(x), axis=1)
        diff = _np_phase(x, alpha, beta)[:, None, :] - tphase[None, :, :]
        diff -= diff.mean(axis=2, keepdims=True)
        d = np.sqrt((diff * diff).sum(axis=2))
        d[face[:, None] != target_face[None, :]] = np.inf
        best = d.argmin(axis=1)
        hit = d[np.arange(active.size), best] < match_tol
        assigned[active[hit]] = target_id[best[hit]]
        used[active[hit]] = k
        active = active[~hit]
        if k < max_iter and active.size:
            V[active], _, _ = _np_return_map(V[active], alpha, beta, H, tie_tol)
    return assigned, used


# ---------------------------------------------------------------- numba path

if HAVE_NUMBA:

    @numba.njit(cache=True)
    def _nb_step(x, out, alpha, beta, H, tie_tol):
        n = x.shape[0]
        tbar = np.inf
        for j in range(n):
            tj = np.log((beta[j] - alpha[j] * x[j]) / (beta[j] - alpha[j])) / alpha[j]
            if tj < tbar:
                tbar = tj
        spiker = -1
        for j in range(n):
            tj = np.log((beta[j] - alpha[j] * x[j]) / (beta[j] - alpha[j])) / alpha[j]
            if tj <= tbar + tie_tol:
                spiker = j
                break
        for j in range(n):
            r = beta[j] / alpha[j]
            y = r - (r - x[j]) * np.exp(-alpha[j] * tbar)
            if y > 1.0:
                y = 1.0
            y -= H[spiker, j]
            out[j] = y if y > -1.0 else -1.0
        out[spiker] = 0.0
        return spiker, tbar

    @numba.njit(cache=True)
    def _nb_return_map(V, alpha, beta, H, tie_tol):
        m, n = V.shape
        out = np.empty((m, n))
        spiker = np.empty(m, dtype=np.int64)
        tbar = np.empty(m)
        for r in range(m):
            s, tb = _nb_step(V[r], out[r], alpha, beta, H, tie_tol)
            spiker[r] = s
            tbar[r] = tb
        return out, spiker, tbar

    @numba.njit(cache=True)
    def _nb_iterate(V, alpha, beta, H, tie_tol, n_iter):
        m, n = V.shape
        cur = V.copy()
        nxt = np.empty(n)
        word = np.empty((m, n_iter), dtype=np.int64)
        for r in range(m):
            for k in range(n_iter):
                s, _ = _nb_step(cur[r], nxt, alpha, beta, H, tie_tol)
                word[r, k] = s
                for j in range(n):
                    cur[r, j] = nxt[j]
        return cur, word

    @numba.njit(cache=True)
    def _nb_phase_row(x, alpha, beta, out):
        for j in range(x.shape[0]):
            out[j] = -np.log1p(-alpha[j] * x[j] / beta[j]) / alpha[j]

    @numba.njit(cache=True)
    def _nb_assign(V, alpha, beta, H, tie_tol, targets, target_face, target_id, match_tol, max_iter):
        m, n = V.shape
        nt = targets.shape[0]
        tphase = np.empty((nt, n))
        for q in range(nt):
            _nb_phase_row(targets[q], alpha, beta, tphase[q])
        assigned = np.full(m, -1, dtype=np.int64)
        used = np.full(m, max_iter, dtype=np.int64)
        x = np.empty(n)
        nxt = np.empty(n)
        ph = np.empty(n)
        for r in range(m):
            for j in range(n):
                x[j] = V[r, j]
            for k in range(max_iter + 1):
                face = 0
                for j in range(1, n):
                    if abs(x[j]) < abs(x[face]):
                        face = j
                _nb_phase_row(x, alpha, beta, ph)
                best = np.inf
                best_q = -1
                for q in range(nt):
                    if target_face[q] != face:
                        continue
                    mean = 0.0
                    for j in range(n):
                        mean += ph[j] - tphase[q, j]
                    mean /= n
                    acc = 0.0
                    for j in range(n):
                        dj = ph[j] - tphase[q, j] - mean
                        acc += dj * dj
                    d = np.sqrt(acc)
                    if d < best:
                        best = d
                        best_q = q
                if best < match_tol:
                    assigned[r] = target_id[best_q]
                    used[r] = k
                    break
                if k < max_iter:
                    _nb_step(x, nxt, alpha, beta, H, tie_tol)
                    for j in range(n):
                        x[j] = nxt[j]
        return assigned, used


# ------------------------------------------------------------ dispatch layer


def _prep(V, alpha, beta, H):
    return (
        np.ascontiguousarray(np.atleast_2d(V), dtype=float),
        np.ascontiguousarray(alpha, dtype=float),
        np.ascontiguousarray(beta, dtype=float),
        np.ascontiguousarray(H, dtype=float),
    )


def return_map_batch(V, alpha, beta, H, tie_tol=1e-9, backend=None):
    """Apply the return map once to every row.  Returns ``(out, spiker, tbar)``."""
    V, alpha, beta, H = _prep(V, alpha, beta, H)
    if (backend or BACKEND) == "numba":
        return _nb_return_map(V, alpha, beta, H, float(tie_tol))
    return _np_return_map(V, alpha, beta, H, tie_tol)


def iterate_batch(V, alpha, beta, H, n_iter, tie_tol=1e-9, backend=None):
    """Iterate ``n_iter`` times.  Returns final states and the ``(m, n_iter)``
    itinerary of spiking indices."""
    V, alpha, beta, H = _prep(V, alpha, beta, H)
    if (backend or BACKEND) == "numba":
        return _nb_iterate(V, alpha, beta, H, float(tie_tol), int(n_iter))
    return _np_iterate(V, alpha, beta, H, tie_tol, int(n_iter))


def assign_batch(V, alpha, beta, H, targets, target_face, target_id, match_tol,
                 max_iter, tie_tol=1e-9, backend=None):
    V, alpha, beta, H = _prep(V, alpha, beta, H)
    targets = np.ascontiguousarray(np.atleast_2d(targets), dtype=float)
    target_face = np.ascontiguousarray(target_face, dtype=np.int64)
    target_id = np.ascontiguousarray(target_id, dtype=np.int64)
    if (backend or BACKEND) == "numba":
        return _nb_assign(V, alpha, beta, H, float(tie_tol), targets, target_face,
                          target_id, float(match_tol), int(max_iter))
    return _np_assign(V, alpha, beta, H, tie_tol, targets, target_face, target_id,
                      match_tol, int(max_iter))


def available_backends() -> list[str]:
    return ["numpy", "numba"] if HAVE_NUMBA else ["numpy"]
