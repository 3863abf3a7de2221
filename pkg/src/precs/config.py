"""Experiment configuration: strict JSON schema, fail-closed validation.

Unknown keys are rejected everywhere; a bad config names the offending field
(and the JSON line for syntax errors) so runs stay reproducible rather than
silently tolerant.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .dynamics import BranchSpec, ModelSpec, QubitBoson, QubitSpinJ

ALLOWED_FORMATS = ("csv", "json", "ppm")

_TOP_KEYS = {
    "model", "branches", "grid", "time", "epsilon", "seed", "outputs",
    "simulate", "sample", "sweep", "verify",
}


def _require_keys(block: dict, allowed: set, required: set, where: str) -> None:
    if not isinstance(block, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = set(block) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {sorted(unknown)}")
    missing = required - set(block)
    if missing:
        raise ConfigError(f"{where}: missing required key(s) {sorted(missing)}")


def _number(block: dict, key: str, where: str, *, integer=False) -> float:
    v = block[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number, got {v!r}")
    if integer and not float(v).is_integer():
        raise ConfigError(f"{where}.{key}: expected an integer, got {v!r}")
    if not math.isfinite(v):
        raise ConfigError(f"{where}.{key}: must be finite")
    return int(v) if integer else float(v)


@dataclass
class ExperimentConfig:
    model: ModelSpec
    branches: tuple[BranchSpec, ...]
    grid_resolution: tuple[int, int]
    plane_half_width: float | None
    t_max: float
    n_steps: int
    epsilon: float
    seed: int
    out_dir: str
    formats: tuple[str, ...]
    snapshots: list[float] = field(default_factory=list)
    n_runs: int = 10000
    sample_t: float | None = None
    sweep_parameter: str | None = None
    sweep_values: list[float] = field(default_factory=list)
    sweep_t_eval: float | None = None
    verify_n_times: int = 50
    n_max_override: int | None = None


def _parse_model(block) -> ModelSpec:
    _require_keys(block, {"kind", "nu", "g", "h", "mu", "J"}, {"kind"}, "model")
    kind = block.get("kind")
    try:
        if kind == "qubit_boson":
            _require_keys(block, {"kind", "nu", "g"}, {"kind", "nu", "g"}, "model")
            return QubitBoson(_number(block, "nu", "model"), _number(block, "g", "model"))
        if kind == "qubit_spin":
            _require_keys(block, {"kind", "h", "mu", "J"}, {"kind", "h", "mu", "J"}, "model")
            return QubitSpinJ(
                _number(block, "h", "model"),
                _number(block, "mu", "model"),
                _number(block, "J", "model"),
            )
    except ValueError as exc:
        raise ConfigError(f"model: {exc}") from exc
    raise ConfigError(f"model.kind: expected 'qubit_boson' or 'qubit_spin', got {kind!r}")


def _parse_branches(block) -> tuple[BranchSpec, ...]:
    if not isinstance(block, list) or not block:
        raise ConfigError("branches: expected a non-empty list")
    out = []
    for i, entry in enumerate(block):
        where = f"branches[{i}]"
        _require_keys(
            entry, {"gamma", "omega", "c_re", "c_im"}, {"gamma", "omega", "c_re", "c_im"}, where
        )
        gamma = entry["gamma"]
        if gamma not in ("+", "-"):
            raise ConfigError(f"{where}.gamma: expected '+' or '-', got {gamma!r}")
        omega = _number(entry, "omega", where)
        expected = 1.0 if gamma == "+" else -1.0
        if omega != expected:
            raise ConfigError(f"{where}.omega: branch '{gamma}' requires omega {expected:+g}")
        c = complex(_number(entry, "c_re", where), _number(entry, "c_im", where))
        try:
            out.append(BranchSpec(gamma, omega, c))
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from exc
    labels = [b.gamma for b in out]
    if len(set(labels)) != len(labels):
        raise ConfigError("branches: labels must be unique")
    total = sum(abs(b.c) ** 2 for b in out)
    if abs(total - 1.0) > 1e-9:
        raise ConfigError(f"branches: sum |c|^2 must be 1 within 1e-9, got {total!r}")
    return tuple(out)


def load_config(path) -> ExperimentConfig:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON (line {exc.lineno}, col {exc.colno}): {exc.msg}")
    return parse_config(data)


def parse_config(data: dict) -> ExperimentConfig:
    _require_keys(data, _TOP_KEYS, {"model", "branches"}, "config")
    model = _parse_model(data["model"])
    branches = _parse_branches(data["branches"])

    is_plane = isinstance(model, QubitBoson)
    default_res = (256, 256) if is_plane else (128, 128)
    plane_half_width = None
    resolution = default_res
    if "grid" in data:
        g = data["grid"]
        _require_keys(g, {"n1", "n2", "plane_half_width"}, set(), "grid")
        n1 = int(_number(g, "n1", "grid", integer=True)) if "n1" in g else default_res[0]
        n2 = int(_number(g, "n2", "grid", integer=True)) if "n2" in g else default_res[1]
        if n1 < 8 or n2 < 8:
            raise ConfigError("grid: resolution must be at least 8 x 8")
        resolution = (n1, n2)
        if "plane_half_width" in g:
            if not is_plane:
                raise ConfigError("grid.plane_half_width: only valid for the boson model")
            plane_half_width = _number(g, "plane_half_width", "grid")
            if plane_half_width <= 0:
                raise ConfigError("grid.plane_half_width: must be positive")

    from .dynamics import default_horizon

    t_max = default_horizon(model)
    n_steps = 1000
    if "time" in data:
        tb = data["time"]
        _require_keys(tb, {"t_max", "n_steps"}, set(), "time")
        if "t_max" in tb:
            t_max = _number(tb, "t_max", "time")
            if t_max <= 0:
                raise ConfigError("time.t_max: must be positive")
        if "n_steps" in tb:
            n_steps = int(_number(tb, "n_steps", "time", integer=True))
            if n_steps < 1:
                raise ConfigError("time.n_steps: must be at least 1")

    epsilon = 1e-3
    if "epsilon" in data:
        epsilon = _number({"epsilon": data["epsilon"]}, "epsilon", "config")
        if not 0.0 < epsilon < 1.0:
            raise ConfigError(f"epsilon: must be in (0, 1), got {epsilon!r}")

    seed = 0
    if "seed" in data:
        seed = int(_number({"seed": data["seed"]}, "seed", "config", integer=True))
        if not 0 <= seed < 2 ** 64:
            raise ConfigError("seed: must fit in an unsigned 64-bit integer")

    out_dir = "out"
    formats = ("csv", "json")
    if "outputs" in data:
        ob = data["outputs"]
        _require_keys(ob, {"directory", "formats"}, set(), "outputs")
        if "directory" in ob:
            if not isinstance(ob["directory"], str) or not ob["directory"]:
                raise ConfigError("outputs.directory: expected a non-empty string")
            out_dir = ob["directory"]
        if "formats" in ob:
            fl = ob["formats"]
            if not isinstance(fl, list) or not fl:
                raise ConfigError("outputs.formats: expected a non-empty list")
            for f in fl:
                if f not in ALLOWED_FORMATS:
                    raise ConfigError(
                        f"outputs.formats: {f!r} not in {list(ALLOWED_FORMATS)}"
                    )
            formats = tuple(dict.fromkeys(fl))

    cfg = ExperimentConfig(
        model=model, branches=branches, grid_resolution=resolution,
        plane_half_width=plane_half_width, t_max=t_max, n_steps=n_steps,
        epsilon=epsilon, seed=seed, out_dir=out_dir, formats=formats,
    )

    if "simulate" in data:
        sb = data["simulate"]
        _require_keys(sb, {"snapshots"}, set(), "simulate")
        snaps = sb.get("snapshots", 5)
        if isinstance(snaps, list):
            times = []
            for i, v in enumerate(snaps):
                t = _number({"t": v}, "t", f"simulate.snapshots[{i}]")
                if t < 0:
                    raise ConfigError("simulate.snapshots: times must be non-negative")
                times.append(t)
            if sorted(times) != times:
                raise ConfigError("simulate.snapshots: times must be sorted")
            cfg.snapshots = times
        else:
            count = int(_number({"snapshots": snaps}, "snapshots", "simulate", integer=True))
            if count < 1:
                raise ConfigError("simulate.snapshots: must be at least 1")
            cfg.snapshots = [
                cfg.t_max * i / (count - 1) if count > 1 else 0.0 for i in range(count)
            ]
    else:
        cfg.snapshots = [cfg.t_max * i / 4 for i in range(5)]

    if "sample" in data:
        mb = data["sample"]
        _require_keys(mb, {"n_runs", "T"}, set(), "sample")
        if "n_runs" in mb:
            cfg.n_runs = int(_number(mb, "n_runs", "sample", integer=True))
            if cfg.n_runs < 1:
                raise ConfigError("sample.n_runs: must be at least 1")
        if "T" in mb:
            cfg.sample_t = _number(mb, "T", "sample")
            if cfg.sample_t < 0:
                raise ConfigError("sample.T: must be non-negative")

    if "sweep" in data:
        wb = data["sweep"]
        _require_keys(wb, {"parameter", "values", "t_eval"}, {"parameter", "values"}, "sweep")
        param = wb["parameter"]
        if param not in ("g", "J"):
            raise ConfigError(f"sweep.parameter: expected 'g' or 'J', got {param!r}")
        if param == "g" and not is_plane:
            raise ConfigError("sweep.parameter 'g' requires the boson model")
        if param == "J" and is_plane:
            raise ConfigError("sweep.parameter 'J' requires the spin model")
        values = wb["values"]
        if not isinstance(values, list) or not values:
            raise ConfigError("sweep.values: expected a non-empty list")
        parsed = [
            _number({"v": v}, "v", f"sweep.values[{i}]") for i, v in enumerate(values)
        ]
        if any(b <= a for a, b in zip(parsed, parsed[1:])):
            raise ConfigError("sweep.values: must be strictly increasing")
        cfg.sweep_parameter = param
        cfg.sweep_values = parsed
        if "t_eval" in wb:
            cfg.sweep_t_eval = _number(wb, "t_eval", "sweep")
            if cfg.sweep_t_eval < 0:
                raise ConfigError("sweep.t_eval: must be non-negative")

    if "verify" in data:
        vb = data["verify"]
        _require_keys(vb, {"n_times", "n_max_override"}, set(), "verify")
        if "n_times" in vb:
            cfg.verify_n_times = int(_number(vb, "n_times", "verify", integer=True))
            if cfg.verify_n_times < 2:
                raise ConfigError("verify.n_times: must be at least 2")
        if "n_max_override" in vb:
            cfg.n_max_override = int(_number(vb, "n_max_override", "verify", integer=True))
            if cfg.n_max_override < 1:
                raise ConfigError("verify.n_max_override: must be at least 1")
            if not is_plane:
                raise ConfigError("verify.n_max_override: only valid for the boson model")

    return cfg


def build_grid(cfg: ExperimentConfig):
    from .dynamics import manifold_of
    from .manifold import build_plane_grid, build_sphere_grid

    if isinstance(cfg.model, QubitBoson):
        spec = manifold_of(cfg.model, cfg.plane_half_width)
        if cfg.grid_resolution[0] != cfg.grid_resolution[1]:
            raise ConfigError("grid: the plane grid must be square (n1 == n2)")
        return build_plane_grid(spec.half_width, cfg.grid_resolution[0])
    return build_sphere_grid(cfg.grid_resolution[0], cfg.grid_resolution[1], cfg.model.spin)
