"""Command-line interface: simulate, verify, sample, sweep.

Every command reads one JSON config (strictly validated), writes its outputs
under a directory, and exits with: 0 success, 1 verification failure,
2 config error, 3 numeric error, 4 measurement attempted before decoherence.

Parallelism: per-snapshot and per-sweep-point work runs on a thread pool
capped by --threads (fallback: the PRECS_THREADS environment variable, then
all cores). Outputs are assembled in deterministic order regardless of the
thread count.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import _io
from .config import ALLOWED_FORMATS, ExperimentConfig, build_grid, load_config
from .errors import (
    ConfigError,
    NotDecoheredError,
    PrecsError,
)
from .dynamics import default_horizon, integrate_eom
from .outcome import born_statistics
from .precs import chi_squared, decoherence_intervals, interval_report, resolution_ratio
from .verify import run_verification

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_NOT_DECOHERED = 4


def _gamma_slug(gamma: str) -> str:
    return {"+": "plus", "-": "minus"}.get(gamma, gamma)


def _resolve_threads(value: int | None) -> int:
    if value is None:
        env = os.environ.get("PRECS_THREADS", "").strip()
        if env:
            try:
                value = int(env)
            except ValueError as exc:
                raise ConfigError(f"PRECS_THREADS must be an integer, got {env!r}") from exc
    if value is None:
        value = os.cpu_count() or 1
    if value < 1:
        raise ConfigError(f"thread count must be positive, got {value}")
    return value


def _prepare_out_dir(cfg: ExperimentConfig, override: str | None) -> Path:
    out = Path(override) if override else Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _parallel_map(fn, items, threads: int):
    if threads == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def run_simulate(cfg: ExperimentConfig, out_dir: Path, threads: int) -> int:
    grid = build_grid(cfg)
    ts = np.linspace(0.0, cfg.t_max, cfg.n_steps + 1)
    density = grid.metric_density()

    if "csv" in cfg.formats:
        for b in cfg.branches:
            traj = integrate_eom(cfg.model, b.gamma, ts)
            traj.to_csv(out_dir / f"trajectory_{_gamma_slug(b.gamma)}.csv")

    def snapshot(item):
        idx, t = item
        dist = chi_squared(cfg.model, cfg.branches, t, grid)
        scaled = density * dist.values
        if "csv" in cfg.formats:
            _io.write_distribution_csv(dist, out_dir / f"chi2bar_{idx:03d}.csv", values=scaled)
        if "ppm" in cfg.formats:
            _io.write_ppm_heatmap(scaled, grid.resolution, out_dir / f"chi2bar_{idx:03d}.ppm")
        return {"index": idx, "t": t, "chi2_integral": dist.integral()}

    snap_meta = _parallel_map(snapshot, list(enumerate(cfg.snapshots)), threads)

    horizon = default_horizon(cfg.model)
    scan_end = max(cfg.t_max, horizon)
    scan = np.linspace(0.0, scan_end, cfg.n_steps + 1)
    intervals = decoherence_intervals(cfg.model, cfg.branches, scan, grid, cfg.epsilon)
    if "json" in cfg.formats:
        _io.write_json(
            interval_report(intervals, cfg.epsilon, float(scan[-1])),
            out_dir / "intervals.json",
        )
        _io.write_json({"snapshots": snap_meta}, out_dir / "snapshots.json")
    print(f"simulate: wrote {len(cfg.snapshots)} snapshot(s) to {out_dir}")
    return EXIT_OK


def run_verify(cfg: ExperimentConfig, out_dir: Path, threads: int) -> int:
    grid = build_grid(cfg)
    report = run_verification(
        cfg.model,
        cfg.branches,
        grid,
        cfg.epsilon,
        n_times=cfg.verify_n_times,
        n_max_override=cfg.n_max_override,
    )
    _io.write_json(report, out_dir / "verify_report.json")
    for check in report["checks"]:
        status = "pass" if check["pass"] else "FAIL"
        print(f"verify: {check['name']}: {status} (measured {check['measured']:.3e}, tol {check['tolerance']:.3e})")
    if not report["all_pass"]:
        failed = [c["name"] for c in report["checks"] if not c["pass"]]
        print(f"verify: FAILED checks: {', '.join(failed)}", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    print(f"verify: all {len(report['checks'])} checks passed; report in {out_dir}")
    return EXIT_OK


def run_sample(cfg: ExperimentConfig, out_dir: Path, threads: int) -> int:
    grid = build_grid(cfg)
    t_measure = cfg.sample_t if cfg.sample_t is not None else cfg.t_max
    records, summary = born_statistics(
        cfg.model, cfg.branches, t_measure, grid, cfg.epsilon, cfg.n_runs, cfg.seed
    )
    _io.write_records_jsonl(records, out_dir / "records.jsonl")
    if "json" in cfg.formats:
        _io.write_json(summary, out_dir / "statistics.json")
    freqs = ", ".join(
        f"{b['gamma']}: {b['frequency']:.4f} (Born {b['born_weight']:.4f})"
        for b in summary["branches"]
    )
    print(f"sample: {cfg.n_runs} runs at T={t_measure:g}; {freqs}; p={summary['p_value']:.3f}")
    return EXIT_OK


def _sweep_model(cfg: ExperimentConfig, value: float):
    from .dynamics import QubitBoson, QubitSpinJ

    if cfg.sweep_parameter == "g":
        return QubitBoson(cfg.model.nu, value)
    return QubitSpinJ(cfg.model.h, cfg.model.mu, value)


def run_sweep(cfg: ExperimentConfig, out_dir: Path, threads: int) -> int:
    if cfg.sweep_parameter is None:
        raise ConfigError("sweep: config must contain a 'sweep' block")
    horizon = default_horizon(cfg.model)
    t_eval = cfg.sweep_t_eval if cfg.sweep_t_eval is not None else 0.5 * horizon

    def one_point(item):
        idx, value = item
        model = _sweep_model(cfg, value)
        sub = ExperimentConfig(
            model=model, branches=cfg.branches, grid_resolution=cfg.grid_resolution,
            plane_half_width=cfg.plane_half_width, t_max=cfg.t_max, n_steps=cfg.n_steps,
            epsilon=cfg.epsilon, seed=cfg.seed, out_dir=cfg.out_dir, formats=cfg.formats,
        )
        grid = build_grid(sub)
        scan = np.linspace(0.0, max(default_horizon(model), cfg.t_max), cfg.n_steps + 1)
        intervals = decoherence_intervals(model, cfg.branches, scan, grid, cfg.epsilon)
        tau_d = intervals[0][0] if intervals else math.inf
        ratio = resolution_ratio(model, cfg.branches, t_eval, cfg.epsilon)

        from .outcome import branch_mass
        from .precs import branch_supports

        chi2 = chi_squared(model, cfg.branches, t_eval, grid)
        masses = branch_mass(chi2, branch_supports(model, cfg.branches, t_eval, grid, cfg.epsilon))
        born = {b.gamma: abs(b.c) ** 2 for b in cfg.branches}
        max_err = max(abs(m.mass - born[m.gamma]) for m in masses)
        if "ppm" in cfg.formats:
            scaled = grid.metric_density() * chi2.values
            _io.write_ppm_heatmap(scaled, grid.resolution, out_dir / f"chi2bar_sweep_{idx:02d}.ppm")
        return value, tau_d, ratio, max_err

    rows = _parallel_map(one_point, list(enumerate(cfg.sweep_values)), threads)
    lines = ["parameter,tau_d,resolution_ratio,max_born_error"]
    for value, tau_d, ratio, max_err in rows:
        lines.append(f"{_io.fmt(value)},{_io.fmt(tau_d)},{_io.fmt(ratio)},{_io.fmt(max_err)}")
    (out_dir / "sweep.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"sweep: {len(rows)} point(s) over {cfg.sweep_parameter}; results in {out_dir / 'sweep.csv'}")
    return EXIT_OK


_COMMANDS = {
    "simulate": run_simulate,
    "verify": run_verify,
    "sample": run_sample,
    "sweep": run_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="precs",
        description="Coherent-state pre-measurement laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("simulate", "emit chi2-bar snapshots, trajectories, and decoherence intervals"),
        ("verify", "run the exact-oracle verification suite"),
        ("sample", "draw seeded measurement outcomes and Born statistics"),
        ("sweep", "sweep g or J and report tau_d, resolution ratio, Born error"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the JSON experiment config")
        p.add_argument("--out", default=None, help="output directory (overrides config)")
        p.add_argument("--seed", type=int, default=None, help="seed override (unsigned 64-bit)")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: PRECS_THREADS or all cores)")
        p.add_argument("--format", default=None,
                       help=f"comma-separated subset of {','.join(ALLOWED_FORMATS)}")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2 ** 64:
                raise ConfigError("--seed must fit in an unsigned 64-bit integer")
            cfg.seed = args.seed
        if args.format is not None:
            fmts = tuple(dict.fromkeys(f.strip() for f in args.format.split(",") if f.strip()))
            bad = [f for f in fmts if f not in ALLOWED_FORMATS]
            if bad or not fmts:
                raise ConfigError(f"--format: invalid entries {bad or args.format!r}")
            cfg.formats = fmts
        threads = _resolve_threads(args.threads)
        out_dir = _prepare_out_dir(cfg, args.out)
        return _COMMANDS[args.command](cfg, out_dir, threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NotDecoheredError as exc:
        print(f"not decohered: {exc}", file=sys.stderr)
        return EXIT_NOT_DECOHERED
    except (PrecsError, ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
