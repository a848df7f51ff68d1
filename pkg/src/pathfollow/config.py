"""Flat key = value config files with optional [problem.<name>] sections.

Precedence everywhere: command-line flags override config-file values, which
override built-in defaults. Unknown keys are fatal.
"""

import math
from dataclasses import dataclass, field

from .problems import PROBLEMS
from .solvers import RunConfig


class UsageError(Exception):
    """Bad invocation or config input; maps to exit code 2."""


_RUN_KEYS = {
    "algorithm": str,
    "steps": int,
    "hmax": float,
    "a": float,
    "imax": int,
    "refine_tol": float,
    "refine_max": int,
    "kappa": float,
    "ell": float,
    "tol_zero": float,
    "drift": str,
    "ell_hat_factor": float,
}

_PROBLEM_KEYS = {
    "lambda": float,
    "T": float,
    "kappa_subreg": float,
    "ell_path": float,
    "c_mono": float,
    "g_matrix": str,
}


@dataclass
class FileConfig:
    run: dict = field(default_factory=dict)
    problems: dict = field(default_factory=dict)  # name -> {key: value}


def _parse_value(key, raw, types, where):
    typ = types[key]
    if typ is str:
        return raw
    try:
        if typ is int:
            return int(raw)
        return float(raw)
    except ValueError:
        raise UsageError(f"{where}: key {key!r} needs a {typ.__name__}, got {raw!r}") from None


def parse_config_file(path):
    """Parse `key = value` lines with # comments and [problem.<name>] sections."""
    cfg = FileConfig()
    section = None  # None = run section, else problem name
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{path}:{lineno}"
        if line.startswith("["):
            if not (line.endswith("]") and line[1:-1].startswith("problem.")):
                raise UsageError(f"{where}: bad section header {line!r}")
            name = line[1:-1][len("problem."):]
            if name not in PROBLEMS:
                raise UsageError(f"{where}: unknown problem section {name!r}")
            section = name
            cfg.problems.setdefault(name, {})
            continue
        if "=" not in line:
            raise UsageError(f"{where}: expected key = value, got {line!r}")
        key, raw_value = (part.strip() for part in line.split("=", 1))
        if section is None:
            if key not in _RUN_KEYS:
                raise UsageError(f"{where}: unknown key {key!r}")
            cfg.run[key] = _parse_value(key, raw_value, _RUN_KEYS, where)
        else:
            if key not in _PROBLEM_KEYS:
                raise UsageError(f"{where}: unknown problem key {key!r}")
            cfg.problems[section][key] = _parse_value(key, raw_value, _PROBLEM_KEYS, where)
    return cfg


def parse_drift(raw, where="drift"):
    if raw in ("on", "off"):
        return raw == "on"
    raise UsageError(f"{where} must be 'on' or 'off', got {raw!r}")


def parse_g_matrix(raw, where="g_matrix"):
    parts = [part.strip() for part in raw.split(",")]
    if len(parts) != 4:
        raise UsageError(f"{where} needs 4 comma-separated entries (row major), got {raw!r}")
    try:
        vals = [float(part) for part in parts]
    except ValueError:
        raise UsageError(f"{where}: non-numeric entry in {raw!r}") from None
    return [vals[:2], vals[2:]]


def build_problem(name, file_cfg, flag_overrides):
    """Instantiate a problem with config-file and flag overrides applied."""
    if name not in PROBLEMS:
        raise UsageError(f"unknown problem {name!r}; choose from {', '.join(sorted(PROBLEMS))}")
    section = dict(file_cfg.problems.get(name, {}))
    section.update({k: v for k, v in flag_overrides.items() if v is not None})
    factory_kwargs = {}
    if "g_matrix" in section:
        if name != "transistor":
            raise UsageError("g_matrix only applies to the transistor problem")
        raw = section.pop("g_matrix")
        factory_kwargs["g_matrix"] = raw if not isinstance(raw, str) else parse_g_matrix(raw)
    problem = PROBLEMS[name](**factory_kwargs)
    renames = {"lambda": "lam"}
    overrides = {renames.get(k, k): v for k, v in section.items()}
    if overrides:
        problem = problem.with_overrides(**overrides)
    return problem


def build_run_config(file_cfg, flag_overrides):
    """Merge RunConfig defaults, config-file run keys, then flag overrides."""
    merged = dict(file_cfg.run)
    merged.update({k: v for k, v in flag_overrides.items() if v is not None})
    cfg = RunConfig()
    renames = {"hmax": "h_max", "imax": "i_max"}
    for key, value in merged.items():
        if key == "drift" and isinstance(value, str):
            value = parse_drift(value)
        setattr(cfg, renames.get(key, key), value)
    if cfg.algorithm not in ("uniform", "adaptive"):
        raise UsageError(f"algorithm must be 'uniform' or 'adaptive', got {cfg.algorithm!r}")
    return cfg


def echo_pairs(problem, cfg):
    """The resolved settings echoed into CSV headers, in a fixed order."""
    resolved = cfg.resolved(problem)
    pairs = [
        ("problem", problem.name),
        ("algorithm", resolved.algorithm),
        ("n", problem.n),
        ("T", problem.T),
        ("lambda", problem.lam),
        ("kappa", resolved.kappa),
        ("ell", resolved.ell),
        ("tol_zero", resolved.tol_zero),
        ("drift", "on" if resolved.drift else "off"),
    ]
    if resolved.algorithm == "uniform":
        pairs.append(("steps", resolved.steps))
    else:
        pairs.extend(
            [
                ("hmax", resolved.h_max),
                ("a", resolved.a),
                ("imax", resolved.i_max),
                ("refine_tol", resolved.refine_tol),
                ("refine_max", resolved.refine_max),
                ("ell_hat_factor", resolved.ell_hat_factor),
            ]
        )
    return pairs
