"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the summary lines.
"""

import json
import math
import time

import numpy as np
import pytest

from inhibnet import _kernels, checks
from inhibnet.attractor import perturb_and_compare, simulate
from inhibnet.cli import load_config, main
from inhibnet.model import NeuronParams, flow, flow_derivative_dv
from inhibnet.network import NetworkSpec, check_assumptions, epsilon0
from inhibnet.poincare import Box, Inside, map_box, piece_of_box

from conftest import CONFIGS

SEED = 20240611


def verdict(number, ok, detail):
    print(f"\ncriterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def R3(h=0.1, beta=(1.5, 1.5, 1.5)):
    H = np.full((3, 3), h)
    np.fill_diagonal(H, 1.0)
    return NetworkSpec.from_arrays([0.5] * 3, list(beta), H)


def test_criterion_01_constants(R):
    t0 = time.perf_counter()
    rep = check_assumptions(R)
    elapsed = time.perf_counter() - t0
    T = 0.1 / 1.125
    lam = math.exp(-0.5 * T)
    checks_ = {
        "eps0": rep.eps0 == 0.1,
        "T": abs(rep.T - 0.0888888888888889) < 1e-12,
        "eps1": abs(rep.eps1 - 0.0222222222222222) < 1e-12,
        "p": rep.entry_bound_p == 46,
        "lambda": abs(rep.lam - lam) < 1e-6,
        "sigma": abs(rep.sigma - 2 / 3) < 1e-6,
        "time": elapsed < 1.0,
    }
    detail = (f"eps0={rep.eps0} T={rep.T:.15f} eps1={rep.eps1:.15f} p={rep.entry_bound_p} "
              f"lambda={rep.lam:.9f} (exp(-alpha*T)={lam:.9f}, listed 0.956547) "
              f"sigma={rep.sigma:.9f} {elapsed * 1e3:.1f} ms; failing: "
              f"{[k for k, v in checks_.items() if not v]}")
    verdict(1, all(checks_.values()), detail)


def test_criterion_02_assumption_gate():
    base = check_assumptions(R3())
    h3 = check_assumptions(R3(h=0.3))
    b18 = check_assumptions(R3(beta=(1.5, 1.5, 1.8)))
    ok = base.ok and not h3.cond9 and not b18.cond10
    verdict(2, ok, f"R ok={base.ok}; H=0.3 failed={h3.failed()}; beta3=1.8 failed={b18.failed()}")


def test_criterion_03_invariance(R):
    t0 = time.perf_counter()
    res = checks.invariance_suite(R, 10_000, np.random.default_rng(SEED))
    elapsed = time.perf_counter() - t0
    verdict(3, res.ok and res.samples == 10_000 and elapsed < 5.0,
            f"{res.samples} points, {res.failures} failures, {elapsed:.2f} s")


def test_criterion_04_entry(R):
    res = checks.entry_suite(R, 1000, np.random.default_rng(SEED))
    verdict(4, res.ok and res.samples == 1000,
            f"{res.samples} points, {res.failures} failures, detail {res.detail}")


def test_criterion_05_injectivity_separation(R):
    rng = np.random.default_rng(SEED)
    inj = checks.injectivity_suite(R, 10_000, rng)
    sep = checks.separation_suite(R, 4000, rng)
    ok = (inj.ok and inj.detail["same_piece_pairs"] >= 10_000 and sep.ok
          and sep.detail["alpha"] > 0 and sep.detail["structural_ok"])
    verdict(5, ok, f"injectivity {inj.detail} failures={inj.failures}; "
                   f"separation alpha={sep.detail['alpha']:.4g} "
                   f"structural={sep.detail['structural_ok']} failures={sep.failures}")


def test_criterion_06_contraction(R):
    res = checks.contraction_suite(R, 10_000, np.random.default_rng(SEED))
    d = res.detail
    verdict(6, res.ok and res.samples >= 10_000,
            f"{res.samples} pairs, {res.failures} failures, ratios in "
            f"[{d['min_ratio']:.4f}, {d['max_ratio']:.4f}] vs "
            f"[{d['sigma'] - 0.02:.4f}, {d['lambda'] + 0.02:.4f}]")


def test_criterion_07_liouville():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    h = 1e-6
    for _ in range(1000):
        a = rng.uniform(0.1, 2.0)
        p = NeuronParams(a, a * rng.uniform(1.05, 4.0))
        v = rng.uniform(-1 + 2 * h, 1 - 2 * h)
        t = rng.uniform(0, 3.0)
        fd = (flow(p, v + h, t) - flow(p, v - h, t)) / (2 * h)
        worst = max(worst, abs(flow_derivative_dv(p, v, t) - fd))
    verdict(7, worst < 1e-6, f"max |analytic - FD| = {worst:.2e} over 1000 samples")


@pytest.fixture(scope="module")
def generic_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("generic")
    t0 = time.perf_counter()
    code = main(["analyze", "--config", str(CONFIGS / "generic.json"), "--out", str(out)])
    return code, time.perf_counter() - t0, out


def test_criterion_08_certification(generic_run):
    code, elapsed, out = generic_run
    report = json.loads((out / "report.json").read_text())
    spec = load_config(CONFIGS / "generic.json").spec
    T = check_assumptions(spec).T
    problems = []
    if code != 0 or report.get("status") != "certified":
        problems.append(f"exit {code}, status {report.get('status')}")
    cycles = report.get("cycles", [])
    if not cycles:
        problems.append("no cycles")
    basin = report.get("basin", {})
    if basin.get("samples") != 1000 or basin.get("unresolved") != 0:
        problems.append(f"basin {basin}")
    for c in cycles:
        itin = tuple(i - 1 for i in c["itinerary"])
        for k, pt in enumerate(c["points"]):
            train = simulate(spec, pt["v"], 4 * c["period"])
            want = (itin[k:] + itin[:k]) * 4
            if tuple(train.spikers) != want:
                problems.append(f"cycle {c['itinerary']} point {k}: spikers {train.spikers}")
            if np.min(train.gaps()) < T:
                problems.append(f"gap {np.min(train.gaps())} < T")
    if elapsed >= 60:
        problems.append(f"runtime {elapsed:.1f} s")
    verdict(8, not problems,
            f"status={report.get('status')} periods={[c['period'] for c in cycles]} "
            f"basin masses={basin.get('masses')} unresolved={basin.get('unresolved')} "
            f"{elapsed:.2f} s; problems={problems}")


def random_inside_box(spec, rng, max_width=0.2):
    top = 1 - epsilon0(spec)
    while True:
        face = int(rng.integers(spec.n))
        c = rng.uniform(0, top, spec.n)
        w = rng.uniform(0, max_width, spec.n)
        lo = np.clip(c - w, 0, top)
        hi = np.clip(c + w, 0, top)
        lo[face] = hi[face] = 0.0
        b = Box(face, lo, hi)
        p = piece_of_box(spec, b)
        if isinstance(p, Inside):
            return b, p.index


def test_criterion_09_box_soundness(Rg):
    rng = np.random.default_rng(SEED)
    failures = 0
    for _ in range(1000):
        b, i = random_inside_box(Rg, rng)
        mb = map_box(Rg, b, i)
        out, spiker, _ = _kernels.return_map_batch(b.sample(1000, rng), Rg.alpha, Rg.beta, Rg.H)
        inside = (spiker == i) & np.all(out >= mb.lo, axis=1) & np.all(out <= mb.hi, axis=1)
        failures += int(np.sum(~inside))
    verdict(9, failures == 0, f"1000 boxes x 1000 samples, {failures} outside their enclosure")


def test_criterion_10_persistence(Rg):
    res = perturb_and_compare(Rg, 1e-4, 20, SEED)
    n_pass = len(res.passing)
    ok = n_pass > 0 and res.all_match and res.max_distance <= res.bound
    verdict(10, ok, f"{n_pass}/20 trials ran, all_match={res.all_match}, "
                    f"max Hausdorff {res.max_distance:.3e} vs bound {res.bound:.3e}")


def test_criterion_11_bifurcating_reference(tmp_path):
    code = main(["analyze", "--config", str(CONFIGS / "reference.json"), "--out", str(tmp_path)])
    report = json.loads((tmp_path / "report.json").read_text())
    und = report.get("undecided") or {}
    diagonal = [s for s in und.get("straddlers", []) if len(s["contenders"]) > 1]
    ok = code == 2 and report.get("status") == "undecided" and bool(diagonal)
    verdict(11, ok, f"exit {code}, status {report.get('status')}, "
                    f"generation {report.get('certification_generation', und.get('generation'))}, "
                    f"cycles {[c['itinerary'] for c in report.get('cycles', [])]}")


def test_criterion_12_determinism(tmp_path, generic_run):
    _, _, first = generic_run
    assert main(["analyze", "--config", str(CONFIGS / "generic.json"), "--out", str(tmp_path)]) == 0
    same = (first / "report.json").read_bytes() == (tmp_path / "report.json").read_bytes()
    verdict(12, same, "report.json byte-identical across two runs" if same
            else "report.json differs between runs")
