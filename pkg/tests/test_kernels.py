import os
import subprocess
import sys

import numpy as np
import pytest

from inhibnet import _kernels
from inhibnet.poincare import sample_bplus, sample_section

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


@needs_numba
def test_return_map_parity(Rg, rng):
    V = np.vstack([sample_bplus(Rg, 2000, rng), sample_section(Rg, 2000, rng)])
    a = _kernels.return_map_batch(V, Rg.alpha, Rg.beta, Rg.H, backend="numba")
    b = _kernels.return_map_batch(V, Rg.alpha, Rg.beta, Rg.H, backend="numpy")
    assert np.array_equal(a[1], b[1])
    assert np.allclose(a[0], b[0], atol=1e-14, rtol=0)
    assert np.allclose(a[2], b[2], atol=1e-14, rtol=0)


@needs_numba
def test_iterate_parity(Rg, rng):
    V = sample_bplus(Rg, 300, rng)
    a = _kernels.iterate_batch(V, Rg.alpha, Rg.beta, Rg.H, 200, backend="numba")
    b = _kernels.iterate_batch(V, Rg.alpha, Rg.beta, Rg.H, 200, backend="numpy")
    assert np.array_equal(a[1], b[1])
    assert np.allclose(a[0], b[0], atol=1e-12, rtol=0)


@needs_numba
def test_assign_parity(Rg, rng):
    from inhibnet.attractor import analyze, AnalysisOptions
    res = analyze(Rg, seed=0, options=AnalysisOptions(basin_samples=0))
    targets = np.vstack([c.point_array() for c in res.cycles])
    faces = np.concatenate([[p.face for p in c.points] for c in res.cycles])
    ids = np.concatenate([[k] * c.period for k, c in enumerate(res.cycles)])
    V = sample_bplus(Rg, 300, rng)
    out = [_kernels.assign_batch(V, Rg.alpha, Rg.beta, Rg.H, targets, faces, ids, 1e-10, 5000,
                                 backend=bk) for bk in ("numba", "numpy")]
    assert np.array_equal(out[0][0], out[1][0])
    assert np.all(out[0][0] >= 0)


def test_env_flag_selects_numpy():
    env = dict(os.environ, INHIBNET_DISABLE_NUMBA="1")
    code = "from inhibnet import _kernels; print(_kernels.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True)
    assert out.stdout.strip() == "numpy"


def test_available_backends():
    assert "numpy" in _kernels.available_backends()
