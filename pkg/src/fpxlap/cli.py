"""Configuration-driven entry point: validate / poisson / semilinear / decompose / verify.

Configs are strict JSON documents; unknown keys are rejected so typos fail
loudly.  Every run is deterministic for a fixed config and seed.  Exit codes:
0 converged and all checks passed, 1 check failure, 2 solver non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import catalog
from .exponents import ExponentField, ScalarExponent, validate_exponent_field, validate_growth_pair
from .lebesgue import GridFunction
from .mesh_kernel import Mesh, assemble_weights, build_mesh
from .poisson import PoissonProblem, Tolerances, solve_poisson
from .semilinear import fixed_point_solve, growth_screen, solve_by_decomposition
from .suites import run_suites

MODES = ("validate", "poisson", "semilinear", "decompose", "verify")

_SCHEMA = {
    "mode": None,
    "seed": None,
    "output": {"dir": None},
    "mesh": {"R": None, "n_cells": None, "dump_weights": None},
    "omega": {"intervals": None},
    "dimension": {"N": None},
    "order": {"s": None},
    "exponent": {"kind": None, "params": None},
    "growth": {"r": {"kind": None, "params": None}},
    "data": {"h": {"kind": None, "params": None}, "g": {"kind": None, "params": None}},
    "nonlinearity": {"kind": None, "params": None},
    "fixedpoint": {"theta": None, "max_iter": None},
    "decompose": {"shells": None},
    "tolerances": {"el_residual": None, "step": None, "max_iter": None},
    "checks": {"norm_modular": None, "holder": None, "cara": None, "edm": None},
}

_MODE_REQUIRES = {
    "validate": ("mesh", "omega", "order", "exponent"),
    "poisson": ("mesh", "omega", "order", "exponent", "growth", "data"),
    "semilinear": ("mesh", "omega", "order", "exponent", "growth", "data", "nonlinearity"),
    "decompose": ("mesh", "omega", "order", "exponent", "growth", "data", "nonlinearity",
                  "decompose"),
    "verify": ("mesh", "omega", "checks"),
}


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid config:\n" + "\n".join(f"  - {e}" for e in self.errors))


@dataclass
class RunConfig:
    mode: str
    seed: int
    raw: dict
    out_dir: Path = field(default=Path("."))

    def section(self, name, default=None):
        return self.raw.get(name, default)


def _check_keys(doc, schema, prefix, errors):
    if not isinstance(doc, dict):
        errors.append(f"{prefix or 'config'}: expected an object")
        return
    for key, val in doc.items():
        if key not in schema:
            errors.append(f"unknown key {prefix + key!r}")
            continue
        sub = schema[key]
        if isinstance(sub, dict) and isinstance(val, dict):
            _check_keys(val, sub, prefix + key + ".", errors)


def parse_config(text: str, mode: str | None = None) -> RunConfig:
    """Validate a JSON config document; collects all field errors at once."""
    errors = []
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"not valid JSON: {exc}"]) from exc
    _check_keys(doc, _SCHEMA, "", errors)

    cfg_mode = doc.get("mode", mode)
    if cfg_mode is None:
        errors.append("mode missing (set it in the config or on the command line)")
    elif cfg_mode not in MODES:
        errors.append(f"mode {cfg_mode!r} not one of {MODES}")
    elif mode is not None and cfg_mode != mode:
        errors.append(f"config mode {cfg_mode!r} conflicts with requested mode {mode!r}")

    if cfg_mode in _MODE_REQUIRES:
        for sec in _MODE_REQUIRES[cfg_mode]:
            if sec not in doc:
                errors.append(f"mode {cfg_mode!r} requires section {sec!r}")

    mesh_sec = doc.get("mesh", {})
    if "mesh" in doc:
        for k in ("R", "n_cells"):
            if k not in mesh_sec:
                errors.append(f"mesh.{k} missing")
    if "omega" in doc and "intervals" not in doc["omega"]:
        errors.append("omega.intervals missing")
    if cfg_mode not in ("validate", "verify", None):
        if "order" in doc and "s" not in doc["order"]:
            errors.append("order.s missing")
    tol_sec = doc.get("tolerances", {})
    for k, v in tol_sec.items():
        if not (isinstance(v, (int, float)) and v > 0):
            errors.append(f"tolerances.{k} must be positive")
    seed = doc.get("seed", 0)
    if not isinstance(seed, int):
        errors.append("seed must be an integer")

    if errors:
        raise ConfigError(errors)
    out_dir = Path(doc.get("output", {}).get("dir", "."))
    return RunConfig(mode=cfg_mode, seed=seed, raw=doc, out_dir=out_dir)


def _build_mesh(cfg: RunConfig) -> Mesh:
    mesh_sec = cfg.section("mesh")
    omega = cfg.section("omega")["intervals"]
    return build_mesh(float(mesh_sec["R"]), int(mesh_sec["n_cells"]), omega)


def _build_exponent(cfg: RunConfig, mesh: Mesh) -> ExponentField:
    sec = cfg.section("exponent")
    s = float(cfg.section("order")["s"])
    dim = int(cfg.section("dimension", {"N": 1}).get("N", 1))
    return catalog.pair_exponent(sec["kind"], sec.get("params", {}), s=s, R=mesh.R, dim=dim)


def _build_r(cfg: RunConfig, mesh: Mesh) -> ScalarExponent:
    sec = cfg.section("growth")["r"]
    return catalog.scalar_exponent(sec["kind"], sec.get("params", {}), R=mesh.R)


def _build_data(cfg: RunConfig, mesh: Mesh, name: str) -> GridFunction:
    sec = cfg.section("data", {}).get(name)
    if sec is None:
        return GridFunction(mesh, np.zeros(mesh.n_cells))
    return catalog.data_function(sec["kind"], sec.get("params", {}), mesh)


def _tolerances(cfg: RunConfig) -> Tolerances:
    sec = cfg.section("tolerances", {})
    return Tolerances(
        el_residual=float(sec.get("el_residual", 1e-8)),
        step=float(sec.get("step", 1e-20)),
        max_iter=int(sec.get("max_iter", 50_000)),
    )


def format_float(v: float) -> str:
    return f"{v:.17g}"


def write_solution_csv(path: Path, mesh: Mesh, values: np.ndarray) -> None:
    lines = ["x,u,interior_flag"]
    for x, u, m in zip(mesh.cell_centers, values, mesh.interior_mask):
        lines.append(f"{format_float(x)},{format_float(u)},{int(m)}")
    path.write_text("\n".join(lines) + "\n")


def write_trace_csv(path: Path, rows) -> None:
    lines = ["k,increment,residual"]
    for k, (_, inc, res) in enumerate(rows):
        lines.append(f"{k},{format_float(inc)},{format_float(res)}")
    path.write_text("\n".join(lines) + "\n")


def write_weights_csv(path: Path, w: np.ndarray) -> None:
    lines = [",".join(format_float(v) for v in row) for row in w]
    path.write_text("\n".join(lines) + "\n")


class Report:
    """Ordered key: value lines, one per reported quantity."""

    def __init__(self):
        self.entries: list[tuple[str, str]] = []

    def add(self, key: str, value) -> None:
        if isinstance(value, float):
            value = format_float(value)
        self.entries.append((key, str(value)))

    def extend(self, lines) -> None:
        for line in lines:
            key, _, value = line.partition(": ")
            self.entries.append((key, value))

    def write(self, path: Path) -> None:
        path.write_text("\n".join(f"{k}: {v}" for k, v in self.entries) + "\n")


def _echo_config(report: Report, cfg: RunConfig) -> None:
    report.add("config.mode", cfg.mode)
    report.add("config.seed", cfg.seed)
    report.add("config.json", json.dumps(cfg.raw, sort_keys=True))


def run(cfg: RunConfig) -> int:
    """Execute the configured mode; returns the process exit status."""
    t_start = time.perf_counter()
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    report = Report()
    _echo_config(report, cfg)
    rng = np.random.default_rng(cfg.seed)
    status = 0

    mesh = _build_mesh(cfg)
    report.add("mesh.n_cells", mesh.n_cells)
    report.add("mesh.cell_width", mesh.cell_width)
    report.add("mesh.omega_measure", mesh.omega_measure)

    if cfg.mode == "verify":
        counts = cfg.section("checks")
        results = run_suites(mesh, rng, counts)
        for res in results:
            report.extend(res.lines())
        if any(not res.passed for res in results):
            status = 1
        report.add("wallclock_seconds", time.perf_counter() - t_start)
        report.write(out / "report")
        return status

    p = _build_exponent(cfg, mesh)
    validation = validate_exponent_field(p, mesh)
    report.extend(validation.lines())
    if not validation.passed:
        report.add("wallclock_seconds", time.perf_counter() - t_start)
        report.write(out / "report")
        return 1

    weights = assemble_weights(mesh, p)
    if cfg.section("mesh").get("dump_weights"):
        write_weights_csv(out / "weights.csv", weights.w)

    if cfg.mode == "validate":
        report.add("wallclock_seconds", time.perf_counter() - t_start)
        report.write(out / "report")
        return 0

    r = _build_r(cfg, mesh)
    g = _build_data(cfg, mesh, "g")
    h = _build_data(cfg, mesh, "h")
    report.add("growth_pair_ok", validate_growth_pair(r, p, mesh))
    if not validate_growth_pair(r, p, mesh):
        report.add("wallclock_seconds", time.perf_counter() - t_start)
        report.write(out / "report")
        return 1
    prob = PoissonProblem(mesh=mesh, weights=weights, p=p, r=r, h=h, g=g,
                          tolerances=_tolerances(cfg))

    if cfg.mode == "poisson":
        sol = solve_poisson(prob)
        write_solution_csv(out / "solution.csv", mesh, sol.u.u.values)
        report.add("solver.converged", sol.converged)
        report.add("solver.iterations", sol.iterations)
        report.add("solver.energy", sol.energy)
        report.add("solver.el_residual", sol.el_residual)
        status = 0 if sol.converged else 2
    else:
        nl_sec = cfg.section("nonlinearity")
        f = catalog.nonlinearity(nl_sec["kind"], nl_sec.get("params", {}), mesh, p)
        screen = growth_screen(f, mesh, p)
        report.add("check.growth_screen.passed", screen.passed)
        report.add("check.growth_screen.defect", screen.value)
        if not screen.passed:
            report.add("wallclock_seconds", time.perf_counter() - t_start)
            report.write(out / "report")
            return 1
        fp_sec = cfg.section("fixedpoint", {})
        theta = float(fp_sec.get("theta", 0.5))
        max_iter = int(fp_sec.get("max_iter", 200))
        if cfg.mode == "semilinear":
            sol, trace = fixed_point_solve(f, prob, theta=theta, max_iter=max_iter)
            write_solution_csv(out / "solution.csv", mesh, sol.u.u.values)
            write_trace_csv(out / "trace.csv", trace.iterates)
            report.add("solver.converged", trace.converged)
            report.add("solver.fixed_point_iterations", len(trace.iterates))
            report.add("solver.final_increment", trace.final_increment)
            report.add("solver.semilinear_residual", trace.residual)
            report.add("solver.theta_final", trace.theta)
            status = 0 if trace.converged else 2
        else:
            shells = int(cfg.section("decompose")["shells"])
            sol, rep = solve_by_decomposition(f, g, shells, prob, theta=theta,
                                              max_iter=max_iter)
            write_solution_csv(out / "solution.csv", mesh, sol.u.u.values)
            rows = []
            for traces in rep.shell_traces:
                for trace in traces:
                    rows.extend(trace.iterates)
            write_trace_csv(out / "trace.csv", rows)
            report.add("solver.converged", rep.converged)
            report.add("solver.sweeps", rep.sweeps)
            report.add("solver.residual", rep.residual)
            for j, measure in enumerate(rep.shell_measures):
                report.add(f"solver.shell_{j}_measure", measure)
            status = 0 if rep.converged else 2

    report.add("wallclock_seconds", time.perf_counter() - t_start)
    report.write(out / "report")
    return status


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fpxlap",
        description="Nonlocal variable-exponent Dirichlet solver and inequality checker",
    )
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("--config", required=True, help="path to a JSON config")
    parser.add_argument("--out", default=None, help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, default=None, help="seed override")
    args = parser.parse_args(argv)

    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"error: cannot read config {args.config}: {exc}", file=sys.stderr)
        return 1
    try:
        cfg = parse_config(text, mode=args.mode)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out_dir = Path(args.out)
    try:
        return run(cfg)
    except OSError as exc:
        print(f"error: i/o failure at {getattr(exc, 'filename', '?')}: {exc}", file=sys.stderr)
        return 1
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
