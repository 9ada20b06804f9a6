"""Command-line front end: ``inhibnet verify|simulate|analyze|perturb``.

Exit codes: 0 ok / certified, 1 usage or I/O error, 2 undecided,
3 assumption failure, 4 property failure.

Every output file labels neurons 1..n (matching the ``v_1..v_n`` columns);
the library itself indexes from 0.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, checks
from .attractor import (AnalysisOptions, AssumptionFailure, Certified, perturb_and_compare,
                        projection_xy, simulate)
from .attractor.pipeline import AnalysisResult, analyze
from .network import InvalidSpecError, NetworkSpec, check_assumptions, epsilon0
from .poincare import sample_bplus

log = logging.getLogger("inhibnet")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_UNDECIDED = 2
EXIT_ASSUMPTIONS = 3
EXIT_PROPERTY = 4

DEFAULT_SAMPLES = {
    "invariance": 10000,
    "entry": 1000,
    "injectivity": 10000,
    "separation": 4000,
    "contraction": 10000,
}


class ConfigError(ValueError):
    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class SimulateParams:
    n_spikes: int = 8
    x0: tuple | None = None


@dataclass(frozen=True)
class PerturbParams:
    delta: float = 1e-4
    trials: int = 20
    params: bool = False


@dataclass(frozen=True)
class RunConfig:
    spec: NetworkSpec
    seed: int | None = None
    out_dir: str = "out"
    samples: dict = field(default_factory=lambda: dict(DEFAULT_SAMPLES))
    simulate: SimulateParams = SimulateParams()
    analyze: AnalysisOptions = AnalysisOptions()
    perturb: PerturbParams = PerturbParams()
    warnings: tuple = ()


# ------------------------------------------------------------------ config


def _positive(problems, where, value, integer=False):
    ok = isinstance(value, (int, float)) and not isinstance(value, bool) and value > 0
    if integer:
        ok = ok and float(value).is_integer()
    if not ok:
        kind = "positive integer" if integer else "positive number"
        problems.append(f"{where} must be a {kind}, got {value!r}")


def _network(raw, problems, warnings):
    if not isinstance(raw, dict):
        problems.append("'network' must be an object")
        return None
    n = raw.get("n")
    if not isinstance(n, int) or isinstance(n, bool):
        problems.append(f"network.n must be an integer, got {n!r}")
        return None
    if n < 3:
        problems.append(f"network.n = {n}: the model needs at least 3 neurons")
    coef = {}
    for key in ("alpha", "beta"):
        v = raw.get(key)
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            v = [v] * n
        if not isinstance(v, list) or len(v) != n:
            problems.append(f"network.{key} must be a number or a list of {n} numbers")
            continue
        coef[key] = v
    H = raw.get("H")
    if isinstance(H, (int, float)) and not isinstance(H, bool):
        H = [[1.0 if i == j else H for j in range(n)] for i in range(n)]
    if not (isinstance(H, list) and len(H) == n and all(isinstance(r, list) and len(r) == n for r in H)):
        problems.append(f"network.H must be a number or an {n}x{n} list of lists")
        H = None
    if problems:
        return None
    H = np.array(H, dtype=float)
    off = ~np.eye(n, dtype=bool)
    for i, j in np.argwhere(off & ~(H > 0)):
        problems.append(f"network.H[{i}][{j}] = {H[i, j]}: off-diagonal jumps must be > 0")
    for i in range(n):
        a, b = coef["alpha"][i], coef["beta"][i]
        if not a > 0:
            problems.append(f"network.alpha[{i}] = {a} must be > 0")
        if not b > a:
            problems.append(f"network.beta[{i}] = {b} must exceed alpha[{i}] = {a}")
    if problems:
        return None
    if not np.all(np.diag(H) == 1.0):
        warnings.append(f"H diagonal {np.diag(H).tolist()} replaced by the reset convention +1")
    try:
        return NetworkSpec.from_arrays(coef["alpha"], coef["beta"], H)
    except InvalidSpecError as exc:
        problems.extend(exc.problems)
        return None


def parse_config(raw: dict) -> RunConfig:
    problems, warnings = [], []
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a JSON object")
    unknown = set(raw) - {"network", "command", "seed", "out_dir"}
    if unknown:
        problems.append(f"unknown top-level keys: {sorted(unknown)}")
    if "network" not in raw:
        problems.append("missing 'network'")
    spec = _network(raw.get("network"), problems, warnings) if "network" in raw else None

    seed = raw.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool) or seed < 0):
        problems.append(f"seed must be a non-negative integer, got {seed!r}")
    out_dir = raw.get("out_dir", "out")
    if not isinstance(out_dir, str):
        problems.append("out_dir must be a string")

    cmd = raw.get("command", {})
    if not isinstance(cmd, dict):
        problems.append("'command' must be an object")
        cmd = {}

    samples = dict(DEFAULT_SAMPLES)
    for k, v in cmd.get("verify", {}).get("samples", {}).items():
        if k not in samples:
            problems.append(f"command.verify.samples: unknown suite {k!r}")
            continue
        _positive(problems, f"command.verify.samples.{k}", v, integer=True)
        samples[k] = v

    sim = cmd.get("simulate", {})
    n_spikes = sim.get("n_spikes", 8)
    _positive(problems, "command.simulate.n_spikes", n_spikes, integer=True)
    x0 = sim.get("x0")
    if x0 is not None:
        if spec is not None and (not isinstance(x0, list) or len(x0) != spec.n):
            problems.append(f"command.simulate.x0 must be a list of {spec.n} numbers")
        elif any(abs(float(v)) > 1.0 for v in x0):
            problems.append("command.simulate.x0 components must lie in [-1, 1]")
        else:
            x0 = tuple(float(v) for v in x0)

    an = dict(cmd.get("analyze", {}))
    defaults = AnalysisOptions()
    for key in an:
        if key not in defaults.to_dict():
            problems.append(f"command.analyze: unknown option {key!r}")
    for key in ("tol", "tie_tol"):
        if key in an:
            _positive(problems, f"command.analyze.{key}", an[key])
    for key in ("max_generation", "max_splits", "max_atoms", "basin_max_iter"):
        if key in an:
            _positive(problems, f"command.analyze.{key}", an[key], integer=True)
    if "basin_samples" in an and not (isinstance(an["basin_samples"], int) and an["basin_samples"] >= 0):
        problems.append("command.analyze.basin_samples must be a non-negative integer")

    pt = cmd.get("perturb", {})
    delta = pt.get("delta", 1e-4)
    if not (isinstance(delta, (int, float)) and delta >= 0):
        problems.append(f"command.perturb.delta must be >= 0, got {delta!r}")
    trials = pt.get("trials", 20)
    _positive(problems, "command.perturb.trials", trials, integer=True)

    if problems:
        raise ConfigError(problems)
    for w in warnings:
        log.warning(w)
    return RunConfig(
        spec=spec,
        seed=seed,
        out_dir=out_dir,
        samples={k: int(v) for k, v in samples.items()},
        simulate=SimulateParams(int(n_spikes), x0),
        analyze=AnalysisOptions(**{**defaults.to_dict(), **an}),
        perturb=PerturbParams(float(delta), int(trials), bool(pt.get("params", False))),
        warnings=tuple(warnings),
    )


def load_config(path) -> RunConfig:
    """Read and validate a JSON run configuration."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_config(raw)


# ------------------------------------------------------------------ output


def _dump_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _fmt(x: float) -> str:
    return repr(float(x))


def _state_header(n):
    return [f"v_{j + 1}" for j in range(n)]


def _require_seed(cfg: RunConfig, command: str) -> int:
    if cfg.seed is None:
        raise ConfigError(f"'{command}' is randomized and needs a seed (config 'seed' or --seed)")
    return cfg.seed


def _base_report(cfg: RunConfig, command: str) -> dict:
    return {
        "command": command,
        "version": __version__,
        "seed": cfg.seed,
        "network": cfg.spec.to_dict(),
        "config_warnings": list(cfg.warnings),
    }


# ---------------------------------------------------------------- commands


def cmd_verify(cfg: RunConfig, out: Path) -> int:
    seed = _require_seed(cfg, "verify")
    report = _base_report(cfg, "verify")
    rep = check_assumptions(cfg.spec)
    report["assumptions"] = rep.to_dict()
    if not rep.ok:
        report["suites"] = None
        report["passed"] = False
        report["failed"] = rep.failed()
        _dump_json(out / "report.json", report)
        log.error("assumption check failed: %s", ", ".join(rep.failed()))
        return EXIT_ASSUMPTIONS
    rng = np.random.default_rng(seed)
    results = checks.run_all(cfg.spec, cfg.samples, rng)
    report["suites"] = {k: r.to_dict() for k, r in results.items()}
    failed = [k for k, r in results.items() if not r.ok]
    report["passed"] = not failed
    report["failed"] = failed
    _dump_json(out / "report.json", report)
    if failed:
        log.error("property suite failed: %s", ", ".join(failed))
        return EXIT_PROPERTY
    print(f"verify: assumptions hold; suites passed: {', '.join(results)}")
    return EXIT_OK


def cmd_simulate(cfg: RunConfig, out: Path) -> int:
    spec = cfg.spec
    x0 = cfg.simulate.x0
    if x0 is None:
        seed = _require_seed(cfg, "simulate without an initial state")
        x0 = sample_bplus(spec, 1, np.random.default_rng(seed))[0]
    rep = check_assumptions(spec)
    if not rep.ok:
        log.warning("assumptions fail (%s); simulating anyway", ", ".join(rep.failed()))
    train = simulate(spec, np.asarray(x0), cfg.simulate.n_spikes)
    rows = [[_fmt(e.t), ";".join(str(i + 1) for i in e.spikers)] + [_fmt(v) for v in e.state]
            for e in train.events]
    _write_csv(out / "spikes.csv", ["t", "spikers"] + _state_header(spec.n), rows)
    if spec.n == 3:
        xy = projection_xy(spec, train.states)
        _write_csv(out / "projection.csv", ["t", "x", "y"],
                   [[_fmt(e.t), _fmt(p[0]), _fmt(p[1])] for e, p in zip(train.events, xy)])
    else:
        print(f"projection.csv omitted: the planar view needs n = 3 (n = {spec.n})")
    gaps = train.gaps()
    entry = train.first_in_bplus(epsilon0(spec))
    after = gaps[entry + 1:] if entry is not None else np.array([])
    report = _base_report(cfg, "simulate")
    report.update({
        "x0": [float(v) for v in x0],
        "n_spikes": len(train.events),
        "spikers": [[i + 1 for i in e.spikers] for e in train.events],
        "first_event_in_bplus": entry,
        "min_gap_after_entry": float(after.min()) if after.size else None,
        "T": rep.T,
    })
    _dump_json(out / "report.json", report)
    print(f"simulate: {len(train.events)} spikes written to {out / 'spikes.csv'}")
    return EXIT_OK


def analysis_report(cfg: RunConfig, res: AnalysisResult) -> dict:
    report = _base_report(cfg, "analyze")
    report["assumptions"] = res.assumptions.to_dict()
    report["options"] = res.options.to_dict()
    ref = res.refinement
    report["history"] = [h.to_dict() for h in ref.history]
    if isinstance(ref, Certified):
        report["status"] = "certified"
        report["certification_generation"] = ref.generation
        report["atom_count"] = len(ref.atoms)
        report["graph"] = {
            "nodes": len(res.graph.nodes),
            "pruned": [[i + 1 for i in w] for w in res.graph.pruned],
            "max_containment_excess": res.graph.max_containment_excess,
            "cycles": [{"period": c.period, "entry_depth": c.entry_depth,
                        "tail_size": len(c.tail)} for c in res.graph_cycles],
        }
        report["cycles"] = [c.to_dict(base=1) for c in res.cycles]
        report["basin"] = res.basin.to_dict()
        report["notes"] = list(res.notes)
    else:
        report["status"] = "undecided"
        report["undecided"] = ref.to_dict(base=1)
    return report


def cmd_analyze(cfg: RunConfig, out: Path) -> int:
    seed = _require_seed(cfg, "analyze")
    try:
        res = analyze(cfg.spec, seed, cfg.analyze)
    except AssumptionFailure as exc:
        report = _base_report(cfg, "analyze")
        report["assumptions"] = exc.report.to_dict()
        report["status"] = "refused"
        _dump_json(out / "report.json", report)
        log.error("refusing to analyze: %s", exc)
        return EXIT_ASSUMPTIONS
    _dump_json(out / "report.json", analysis_report(cfg, res))
    if not res.certified:
        u = res.refinement
        print(f"analyze: UNDECIDED ({u.reason}) at generation {u.generation}, "
              f"{len(u.straddlers)} enclosures still meet the separation set")
        return EXIT_UNDECIDED
    rows = []
    for cid, c in enumerate(res.cycles):
        for step, p in enumerate(c.points):
            rows.append([cid, step, p.face + 1] + [_fmt(v) for v in p.v])
    _write_csv(out / "cycle_points.csv", ["cycle_id", "step", "face"] + _state_header(cfg.spec.n), rows)
    print(f"analyze: CERTIFIED at generation {res.refinement.generation}; "
          f"{len(res.cycles)} limit cycle(s), periods {list(res.periods)}")
    return EXIT_OK


def cmd_perturb(cfg: RunConfig, out: Path) -> int:
    seed = _require_seed(cfg, "perturb")
    rep = check_assumptions(cfg.spec)
    report = _base_report(cfg, "perturb")
    report["assumptions"] = rep.to_dict()
    if not rep.ok:
        _dump_json(out / "report.json", report)
        log.error("base network fails assumptions: %s", ", ".join(rep.failed()))
        return EXIT_ASSUMPTIONS
    opts = AnalysisOptions(**{**cfg.analyze.to_dict(), "basin_samples": 0})
    try:
        res = perturb_and_compare(cfg.spec, cfg.perturb.delta, cfg.perturb.trials, seed,
                                  cfg.perturb.params, opts)
    except ValueError as exc:
        report["error"] = str(exc)
        _dump_json(out / "report.json", report)
        log.error("%s", exc)
        return EXIT_UNDECIDED
    report["perturbation"] = res.to_dict()
    _dump_json(out / "report.json", report)
    for t in res.trials:
        if t.status == "skipped":
            print(f"trial {t.index}: skipped ({t.notice})")
    print(f"perturb: {len(res.passing)} trials run, max Hausdorff distance "
          f"{res.max_distance:.3e} (bound {res.bound:.3e})")
    bad = res.first_failure()
    if bad is not None:
        log.error("trial %d is not persistent: %s, periods %s", bad.index, bad.status,
                  list(bad.periods))
        return EXIT_PROPERTY
    return EXIT_OK


COMMANDS = {
    "verify": cmd_verify,
    "simulate": cmd_simulate,
    "analyze": cmd_analyze,
    "perturb": cmd_perturb,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="inhibnet", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--out", help="output directory (overrides out_dir)")
    ap.add_argument("--seed", type=int, help="random seed (overrides the config)")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.seed is not None and not 0 <= args.seed < 2 ** 64:
        log.error("--seed must be an unsigned 64-bit integer")
        return EXIT_USAGE
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = RunConfig(**{**cfg.__dict__, "seed": args.seed})
        out = Path(args.out or cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        t0 = time.perf_counter()
        code = COMMANDS[args.command](cfg, out)
        # wall time lives outside report.json so reports stay byte-stable
        _dump_json(out / "timing.json", {"command": args.command,
                                         "seconds": time.perf_counter() - t0})
        return code
    except ConfigError as exc:
        for p in exc.problems:
            log.error("config: %s", p)
        return EXIT_USAGE
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
