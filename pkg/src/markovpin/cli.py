"""``markovpin`` command line: config-driven runs that emit CSV.

Usage::

    markovpin <command> <config.yaml> [--seed N] [--out PATH]

Exit status is 0 on success, 1 when a computation or a validation check
fails and 2 for configuration errors. ``MARKOVPIN_WORKERS`` sets the
number of worker threads for Monte Carlo sampling.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import csvio, validation
from .config import ConfigError, RunConfig, load_config
from .exceptions import ConvergenceError, ModelError
from .homogeneous import homogeneous_free_energy
from .modelb import finite_N_experiment, limit_free_energy, phase_diagram, scaled_matrix, thresholds
from .quenched import mc_quenched_free_energy
from .spectral import annealed_lambdas, solve_free_energy


def _meta(cfg: RunConfig, command: str, seed: int, extra=None) -> dict:
    meta = {"command": command, "config_sha256": cfg.digest(), "seed": seed}
    meta.update(extra or {})
    return meta


def _sizes(cfg: RunConfig, default) -> list[int]:
    Ns = cfg.grid("N", default)
    if np.any(Ns < 1) or np.any(Ns != np.round(Ns)):
        raise cfg.error(("grid", "N"), "system sizes must be positive integers")
    return [int(n) for n in Ns]


def _nonneg_betas(cfg: RunConfig, default):
    betas = cfg.grid("beta", default)
    if np.any(betas < 0.0):
        raise cfg.error(("grid", "beta"), "beta must be nonnegative")
    return betas


def cmd_critical_curve(cfg: RunConfig, seed: int) -> str:
    kernel, chain = cfg.kernel(), cfg.chain()
    betas = _nonneg_betas(cfg, None)
    lams = annealed_lambdas(kernel, chain, betas)
    rows = [(b, -np.log(lam), lam) for b, lam in zip(betas, lams)]
    return csvio.render(["beta", "h_c_a", "lambda0"], rows, _meta(cfg, "critical-curve", seed))


def cmd_free_energy(cfg: RunConfig, seed: int) -> str:
    kernel, chain = cfg.kernel(), cfg.chain()
    betas, hs = _nonneg_betas(cfg, None), cfg.grid("h")
    samples = cfg.samples
    columns = ["beta", "h", "F_a", "lambda0", "regime"]
    Ns = []
    if samples > 0:
        Ns = _sizes(cfg, [1000])
        columns += ["N", "meanF", "stderr"]
    rows = []
    for beta in betas:
        for h in hs:
            sol = solve_free_energy(kernel, chain, beta, h)
            head = (beta, h, sol.F_a, sol.lambda0, sol.regime)
            if not Ns:
                rows.append(head)
            for N in Ns:
                est = mc_quenched_free_energy(kernel, chain, beta, h, N, samples, seed)
                rows.append(head + (N, est.mean, est.stderr))
    return csvio.render(columns, rows, _meta(cfg, "free-energy", seed))


def cmd_modelb(cfg: RunConfig, seed: int) -> str:
    kernel, family = cfg.kernel(), cfg.family()
    betas, hs = _nonneg_betas(cfg, 1.0), cfg.grid("h", 0.0)
    Ns = _sizes(cfg, [1000, 4000, 16000])
    samples = cfg.number(("samples",), 20, integer=True)
    if samples < 1:
        raise cfg.error(("samples",), "Model B runs need samples >= 1")
    for N in Ns:
        try:
            scaled_matrix(family, N)
        except ModelError as exc:
            raise cfg.error(("family", "gamma"), str(exc)) from None
        except ValueError as exc:
            raise cfg.error(("grid", "N"), str(exc)) from None
    rows = []
    for beta in betas:
        for h in hs:
            lim = limit_free_energy(family, kernel, beta, h)
            for N in Ns:
                est = finite_N_experiment(family, kernel, beta, h, N, samples, seed)
                rows.append((N, family.gamma, beta, h, est.mean, est.stderr, est.mean_strips,
                             lim.F_limit, est.mean - lim.F_limit, lim.branch))
    columns = ["N", "gamma", "beta", "h", "meanF", "stderr", "meanB", "F_limit", "gap", "branch"]
    return csvio.render(columns, rows, _meta(cfg, "modelb", seed))


def cmd_phase_diagram(cfg: RunConfig, seed: int) -> str:
    kernel, family = cfg.kernel(), cfg.family()
    betas = _nonneg_betas(cfg, 1.0)
    hs = np.sort(cfg.grid("h", {"start": -1.5, "stop": 1.5, "num": 301}))
    rows, extra = [], {}
    for beta in betas:
        extra[f"thresholds[beta={csvio.fmt(beta)}]"] = " ".join(csvio.fmt(t) for t in thresholds(family, beta))
        for h, F, br in phase_diagram(family, kernel, beta, hs).rows():
            rows.append((beta, h, F, br))
    return csvio.render(["beta", "h", "F_limit", "branch"], rows, _meta(cfg, "phase-diagram", seed, extra))


def cmd_homogeneous(cfg: RunConfig, seed: int) -> str:
    kernel = cfg.kernel()
    rows = []
    for h in cfg.grid("h"):
        sol = homogeneous_free_energy(kernel, h)
        rows.append((h, sol.F, sol.implicit_residual))
    return csvio.render(["h", "F", "residual"], rows, _meta(cfg, "homogeneous", seed))


def cmd_quenched(cfg: RunConfig, seed: int) -> str:
    kernel, chain = cfg.kernel(), cfg.chain()
    betas, hs = _nonneg_betas(cfg, None), cfg.grid("h")
    Ns = _sizes(cfg, None)
    samples = cfg.number(("samples",), 20, integer=True)
    if samples < 1:
        raise cfg.error(("samples",), "quenched runs need samples >= 1")
    rows = []
    for beta in betas:
        for h in hs:
            for N in Ns:
                est = mc_quenched_free_energy(kernel, chain, beta, h, N, samples, seed)
                rows.append((N, beta, h, samples, est.mean, est.stderr))
    return csvio.render(["N", "beta", "h", "samples", "meanF", "stderr"], rows, _meta(cfg, "quenched", seed))


def cmd_validate(cfg: RunConfig, seed: int) -> tuple[str, bool]:
    kernel = cfg.kernel() if cfg.get(("kernel",)) is not None else None
    chain = cfg.chain() if cfg.get(("chain",)) is not None else None
    instances = cfg.number(("validate", "instances"), 50, integer=True)
    checks = validation.run_all(kernel, chain, instances=instances, seed=seed)
    lines = [c.line() for c in checks]
    ok = all(c.passed for c in checks)
    lines.append(f"{sum(c.passed for c in checks)}/{len(checks)} checks passed")
    return "\n".join(lines) + "\n", ok


COMMANDS = {
    "critical-curve": cmd_critical_curve,
    "free-energy": cmd_free_energy,
    "modelb": cmd_modelb,
    "phase-diagram": cmd_phase_diagram,
    "homogeneous": cmd_homogeneous,
    "quenched": cmd_quenched,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="markovpin", description="Renewal pinning models with Markov disorder.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("config", help="YAML run configuration")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--out", default=None, help="write output here instead of stdout")
    return parser


def run(command: str, cfg: RunConfig, seed: int | None = None) -> tuple[str, bool]:
    """Execute ``command``; returns the output text and whether it succeeded."""
    seed = cfg.seed if seed is None else int(seed)
    result = COMMANDS[command](cfg, seed)
    return result if isinstance(result, tuple) else (result, True)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        text, ok = run(args.command, cfg, args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ModelError, ConvergenceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.out:
        Path(args.out).write_text(text, newline="")
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
