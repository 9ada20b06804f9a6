"""Compare the numba kernels with their numpy twins.

Usage: python3 benchmarks/bench_kernels.py [--points 20000] [--steps 200] [--repeat 3]

Both backends are checked for agreement before timing.
"""

from __future__ import annotations

import argparse
import json
import time

import numpy as np

from inhibnet import _kernels
from inhibnet.network import NetworkSpec
from inhibnet.poincare import sample_bplus


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=20000)
    ap.add_argument("--steps", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    spec = NetworkSpec.homogeneous(3, 0.5, 1.5, 0.1)
    spec = spec.perturbed(1e-3, np.random.default_rng(args.seed))
    V = sample_bplus(spec, args.points, np.random.default_rng(args.seed + 1))
    a, b, H = spec.alpha, spec.beta, spec.H
    backends = _kernels.available_backends()

    # warm-up also triggers numba compilation
    ref = {bk: _kernels.iterate_batch(V[:10], a, b, H, 5, backend=bk) for bk in backends}
    if "numba" in backends:
        same_word = np.array_equal(ref["numba"][1], ref["numpy"][1])
        gap = float(np.abs(ref["numba"][0] - ref["numpy"][0]).max())
        print(f"parity: itineraries equal={same_word}, max state difference {gap:.2e}")

    results = {}
    for bk in backends:
        results[bk] = {
            "return_map_s": _best(lambda: _kernels.return_map_batch(V, a, b, H, backend=bk),
                                  args.repeat),
            "iterate_s": _best(lambda: _kernels.iterate_batch(V, a, b, H, args.steps, backend=bk),
                               args.repeat),
        }
    if "numba" in results:
        for key in ("return_map_s", "iterate_s"):
            results["speedup_" + key[:-2]] = results["numpy"][key] / results["numba"][key]
    print(json.dumps({"points": args.points, "steps": args.steps, **results}, indent=2))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
