"""Experiment configs, parameter sweeps, and CSV output.

Configs are a line-oriented ``key = value`` format: integer ranges spell
``lo..hi``, lists spell ``{a,b,c}``, ``#`` starts a comment. Grid keys
(n, k, lambda, mu, D, wait_scale) expand to a cartesian product executed in
a fixed deterministic order, one result row per grid point. Rows whose
parameters violate a model precondition are emitted with ``valid=false``
rather than aborting the sweep.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, TextIO

from .analytic import (
    FountainParams,
    GeneralServiceParams,
    InstabilityError,
    SystemParams,
    fj_bounds,
    fj_upper_bound_general,
    fountain_mean_response,
)
from .sim import SimConfig, SimSummary, simulate_forkjoin, simulate_fountain
from .sim.config import CANCEL_PREEMPT, CANCEL_QUEUED_ONLY

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ResultRow",
    "parse_config",
    "config_from_items",
    "run_sweep",
    "write_csv",
    "emit_cdf",
    "CSV_COLUMNS",
]

MODES = (
    "bounds",
    "fountain-analytic",
    "fountain-sim",
    "forkjoin-sim",
    "sweep-k",
    "sweep-n-fixed-rate",
    "cdf",
)
_FORKJOIN_MODES = {"bounds", "forkjoin-sim", "sweep-k", "sweep-n-fixed-rate", "cdf"}
_FOUNTAIN_MODES = {"fountain-analytic", "fountain-sim"}
_SIM_MODES = {"fountain-sim", "forkjoin-sim", "sweep-k", "sweep-n-fixed-rate", "cdf"}

CSV_COLUMNS = (
    "n",
    "k",
    "lambda",
    "mu",
    "D",
    "wait_scale",
    "analytic",
    "lower",
    "upper",
    "sim_mean",
    "ci95",
    "in_sandwich",
    "valid",
)

# Keys that expand into sweep grids; everything else is scalar.
_GRID_KEYS = ("n", "k", "lambda", "mu", "D", "wait_scale")
_INT_GRID_KEYS = {"n", "k"}
_SCALAR_KEYS = {
    "name": str,
    "mode": str,
    "requests": int,
    "warmup": int,
    "seed": int,
    "replications": int,
    "ecdf_points": int,
    "cancel": str,
    "expansion": int,
    "sigma": float,
    "c_nk": float,
    "output": str,
}


class ConfigError(ValueError):
    """Invalid experiment configuration (parse or range failure)."""


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully validated experiment: mode, parameter grid, sim settings."""

    mode: str
    name: str = "experiment"
    n: Optional[tuple[int, ...]] = None
    k: Optional[tuple[int, ...]] = None
    lam: Optional[tuple[float, ...]] = None
    mu: Optional[tuple[float, ...]] = None
    delivery: Optional[tuple[float, ...]] = None
    wait_scale: Optional[tuple[float, ...]] = None
    expansion: int = 2
    requests: int = 1_000_000
    warmup: int = 10_000
    seed: int = 1
    replications: int = 10
    ecdf_points: int = 512
    cancel: str = CANCEL_PREEMPT
    sigma: Optional[float] = None
    c_nk: Optional[float] = None
    output: Optional[str] = None


@dataclass
class ResultRow:
    """One grid point with whatever quantities its mode produces.

    Missing quantities stay None and are emitted as empty CSV fields.
    ``summary`` carries the full simulation result for CDF emission and is
    never serialized.
    """

    n: Optional[int] = None
    k: Optional[int] = None
    lam: Optional[float] = None
    mu: Optional[float] = None
    delivery: Optional[float] = None
    wait_scale: Optional[float] = None
    analytic: Optional[float] = None
    lower: Optional[float] = None
    upper: Optional[float] = None
    sim_mean: Optional[float] = None
    ci95: Optional[float] = None
    in_sandwich: Optional[bool] = None
    valid: bool = True
    summary: Optional[SimSummary] = field(default=None, repr=False)


def _at_line(line_no: int) -> str:
    # line 0 marks values that came from CLI flags, not a document
    return f"line {line_no}: " if line_no else ""


def _parse_scalar_number(text: str, key: str, line_no: int):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        raise ConfigError(
            f"{_at_line(line_no)}value {text!r} for key '{key}' is not a number"
        ) from None


def _parse_grid_value(text: str, key: str, line_no: int) -> tuple:
    """A grid value: scalar number, 'lo..hi' integer range, or '{a,b,c}'."""
    text = text.strip()
    if text.startswith("{") and text.endswith("}"):
        items = [part.strip() for part in text[1:-1].split(",")]
        if not items or any(not part for part in items):
            raise ConfigError(f"{_at_line(line_no)}malformed list for key '{key}'")
        return tuple(_parse_scalar_number(part, key, line_no) for part in items)
    if ".." in text:
        lo_text, _, hi_text = text.partition("..")
        try:
            lo, hi = int(lo_text), int(hi_text)
        except ValueError:
            raise ConfigError(
                f"{_at_line(line_no)}range bounds for key '{key}' must be integers"
            ) from None
        if lo > hi:
            raise ConfigError(
                f"{_at_line(line_no)}empty range {lo}..{hi} for key '{key}'"
            )
        return tuple(range(lo, hi + 1))
    return (_parse_scalar_number(text, key, line_no),)


def _coerce_grid(values: tuple, key: str) -> tuple:
    if key in _INT_GRID_KEYS:
        coerced = []
        for v in values:
            if isinstance(v, float) and not v.is_integer():
                raise ConfigError(f"key '{key}' requires integers, got {v}")
            coerced.append(int(v))
        return tuple(coerced)
    return tuple(float(v) for v in values)


def _positive(name: str, value, strict: bool = True) -> None:
    bad = value <= 0 if strict else value < 0
    if bad:
        bound = ">" if strict else ">="
        raise ConfigError(f"key '{name}' must be {bound} 0, got {value}")


def config_from_items(items: dict[str, object]) -> ExperimentConfig:
    """Validate a flat key/value mapping into an ExperimentConfig.

    Values may be raw strings (as read from a config document or CLI
    flags) or already-typed scalars/tuples.
    """
    known = set(_GRID_KEYS) | set(_SCALAR_KEYS)
    for key in items:
        if key not in known:
            raise ConfigError(f"unknown key '{key}'")
    if "mode" not in items:
        raise ConfigError("missing required key 'mode'")

    def grid(key: str) -> Optional[tuple]:
        if key not in items:
            return None
        value = items[key]
        if isinstance(value, str):
            value = _parse_grid_value(value, key, 0)
        elif not isinstance(value, tuple):
            value = (value,)
        return _coerce_grid(value, key)

    def scalar(key: str, default):
        if key not in items:
            return default
        value = items[key]
        target = _SCALAR_KEYS[key]
        if isinstance(value, str) and target is not str:
            value = _parse_scalar_number(value, key, 0)
        if target is int and isinstance(value, float):
            if not value.is_integer():
                raise ConfigError(f"key '{key}' requires an integer, got {value}")
            value = int(value)
        if not isinstance(value, target):
            raise ConfigError(f"key '{key}' has wrong type {type(value).__name__}")
        return value

    mode = str(items["mode"])
    if mode not in MODES:
        raise ConfigError(f"unknown mode '{mode}' (choose from {', '.join(MODES)})")

    cfg = ExperimentConfig(
        mode=mode,
        name=scalar("name", "experiment"),
        n=grid("n"),
        k=grid("k"),
        lam=grid("lambda"),
        mu=grid("mu"),
        delivery=grid("D"),
        wait_scale=grid("wait_scale"),
        expansion=scalar("expansion", 2),
        requests=scalar("requests", 1_000_000),
        warmup=scalar("warmup", 10_000),
        seed=scalar("seed", 1),
        replications=scalar("replications", 10),
        ecdf_points=scalar("ecdf_points", 512),
        cancel=scalar("cancel", CANCEL_PREEMPT),
        sigma=scalar("sigma", None),
        c_nk=scalar("c_nk", None),
        output=scalar("output", None),
    )
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    for key, values in (("n", cfg.n), ("k", cfg.k)):
        if values is not None:
            for v in values:
                if v < 1:
                    raise ConfigError(f"key '{key}' must be >= 1, got {v}")
    if cfg.lam is not None:
        for v in cfg.lam:
            _positive("lambda", v)
    if cfg.mu is not None:
        for v in cfg.mu:
            _positive("mu", v)
    if cfg.delivery is not None:
        for v in cfg.delivery:
            _positive("D", v, strict=False)
    if cfg.wait_scale is not None:
        for v in cfg.wait_scale:
            _positive("wait_scale", v, strict=False)
    _positive("requests", cfg.requests)
    _positive("warmup", cfg.warmup, strict=False)
    _positive("replications", cfg.replications)
    _positive("ecdf_points", cfg.ecdf_points)
    _positive("expansion", cfg.expansion)
    if cfg.sigma is not None:
        _positive("sigma", cfg.sigma, strict=False)
    if cfg.c_nk is not None:
        _positive("c_nk", cfg.c_nk)
    if cfg.cancel not in (CANCEL_PREEMPT, CANCEL_QUEUED_ONLY):
        raise ConfigError(f"key 'cancel' must be preempt or queued-only, got {cfg.cancel!r}")
    if (cfg.sigma is None) != (cfg.c_nk is None):
        raise ConfigError("keys 'sigma' and 'c_nk' must be given together")
    if cfg.mode in _SIM_MODES and cfg.requests // cfg.replications <= cfg.warmup:
        raise ConfigError(
            f"key 'requests': per-replication count "
            f"{cfg.requests // cfg.replications} must exceed warmup {cfg.warmup}"
        )

    def require(key: str, value) -> None:
        if value is None:
            raise ConfigError(f"mode '{cfg.mode}' requires key '{key}'")

    def forbid(key: str, value) -> None:
        if value is not None:
            raise ConfigError(f"mode '{cfg.mode}' does not accept key '{key}'")

    if cfg.mode in _FOUNTAIN_MODES:
        require("n", cfg.n)
        require("k", cfg.k)
        require("D", cfg.delivery)
        require("wait_scale", cfg.wait_scale)
        forbid("lambda", cfg.lam)
        forbid("mu", cfg.mu)
    else:
        require("lambda", cfg.lam)
        require("mu", cfg.mu)
        forbid("D", cfg.delivery)
        forbid("wait_scale", cfg.wait_scale)
        if cfg.mode == "sweep-n-fixed-rate":
            require("k", cfg.k)
            forbid("n", cfg.n)
        elif cfg.mode == "sweep-k":
            require("n", cfg.n)
            if cfg.k is None and len(cfg.n) != 1:
                raise ConfigError("mode 'sweep-k' needs a single n to default k to 1..n")
        else:
            require("n", cfg.n)
            require("k", cfg.k)
    if cfg.sigma is not None and cfg.mode != "bounds":
        raise ConfigError("keys 'sigma'/'c_nk' apply to mode 'bounds' only")


def parse_config(text: str) -> ExperimentConfig:
    """Parse a config document; unknown keys and bad values are errors."""
    items: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {raw!r}")
        if key not in set(_GRID_KEYS) | set(_SCALAR_KEYS):
            raise ConfigError(f"line {line_no}: unknown key '{key}'")
        if key in items:
            raise ConfigError(f"line {line_no}: duplicate key '{key}'")
        if key in _GRID_KEYS:
            # Validate grid syntax here so the error carries the line number.
            _parse_grid_value(value, key, line_no)
        items[key] = value
    return config_from_items(items)


def _grid_points(cfg: ExperimentConfig):
    """Cartesian product over the grid keys, in fixed key order."""
    k_values = cfg.k
    if cfg.mode == "sweep-k" and k_values is None:
        k_values = tuple(range(1, cfg.n[0] + 1))
    axes = [
        cfg.n if cfg.n is not None else (None,),
        k_values if k_values is not None else (None,),
        cfg.lam if cfg.lam is not None else (None,),
        cfg.mu if cfg.mu is not None else (None,),
        cfg.delivery if cfg.delivery is not None else (None,),
        cfg.wait_scale if cfg.wait_scale is not None else (None,),
    ]
    for n, k, lam, mu, delivery, wait in itertools.product(*axes):
        if cfg.mode == "sweep-n-fixed-rate":
            n = cfg.expansion * k
        yield ResultRow(n=n, k=k, lam=lam, mu=mu, delivery=delivery, wait_scale=wait)


def _fill_forkjoin_row(row: ResultRow, cfg: ExperimentConfig, with_sim: bool) -> None:
    try:
        params = SystemParams(n=row.n, k=row.k, lam=row.lam, mu=row.mu)
    except (ValueError, InstabilityError):
        row.valid = False
        return
    pair = fj_bounds(params)
    row.lower = pair.lower if pair.lower_valid else None
    row.upper = pair.upper if pair.upper_valid else None
    row.valid = pair.lower_valid and pair.upper_valid
    if cfg.sigma is not None and cfg.mode == "bounds":
        general = GeneralServiceParams(
            mean_service=1.0 / params.mu_prime, sigma=cfg.sigma, c_nk=cfg.c_nk
        )
        try:
            row.analytic = fj_upper_bound_general(params, general)
        except InstabilityError:
            row.valid = False
    if with_sim:
        sim_cfg = SimConfig(
            params=params,
            num_requests=cfg.requests,
            warmup=cfg.warmup,
            seed=cfg.seed,
            replications=cfg.replications,
            cancel=cfg.cancel,
            ecdf_points=cfg.ecdf_points,
        )
        summary = simulate_forkjoin(sim_cfg)
        row.summary = summary
        row.sim_mean = summary.mean
        row.ci95 = summary.ci95_halfwidth
        if pair.lower_valid and pair.upper_valid:
            row.in_sandwich = (
                pair.lower - summary.ci95_halfwidth
                <= summary.mean
                <= pair.upper + summary.ci95_halfwidth
            )


def _fill_fountain_row(row: ResultRow, cfg: ExperimentConfig, with_sim: bool) -> None:
    try:
        params = FountainParams(
            n=row.n, k=row.k, wait_scale=row.wait_scale, delivery=row.delivery
        )
    except ValueError:
        row.valid = False
        return
    row.analytic = fountain_mean_response(params)
    if with_sim:
        sim_cfg = SimConfig(
            params=params,
            num_requests=cfg.requests,
            warmup=cfg.warmup,
            seed=cfg.seed,
            replications=cfg.replications,
            ecdf_points=cfg.ecdf_points,
        )
        summary = simulate_fountain(sim_cfg)
        row.summary = summary
        row.sim_mean = summary.mean
        row.ci95 = summary.ci95_halfwidth
        # Deterministic runs (zero variance) get an exact-match verdict.
        slack = 3.0 * summary.ci95_halfwidth
        row.in_sandwich = abs(summary.mean - row.analytic) <= max(slack, 1e-12)


def run_sweep(cfg: ExperimentConfig) -> list[ResultRow]:
    """Execute every grid point in deterministic order.

    Simulation modes attach bounds (fork-join) or the closed form
    (fountain) plus a sandwich verdict; per-row parameter problems mark the
    row invalid instead of aborting.
    """
    rows = list(_grid_points(cfg))
    with_sim = cfg.mode in _SIM_MODES
    for row in rows:
        if cfg.mode in _FOUNTAIN_MODES:
            _fill_fountain_row(row, cfg, with_sim)
        else:
            _fill_forkjoin_row(row, cfg, with_sim)
    return rows


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return f"{value:.9g}"
    return str(value)


def _row_cells(row: ResultRow) -> list[str]:
    return [
        _format_cell(row.n),
        _format_cell(row.k),
        _format_cell(row.lam),
        _format_cell(row.mu),
        _format_cell(row.delivery),
        _format_cell(row.wait_scale),
        _format_cell(row.analytic),
        _format_cell(row.lower),
        _format_cell(row.upper),
        _format_cell(row.sim_mean),
        _format_cell(row.ci95),
        _format_cell(row.in_sandwich),
        _format_cell(row.valid),
    ]


def write_rows(rows: Sequence[ResultRow], stream: TextIO) -> None:
    stream.write(",".join(CSV_COLUMNS) + "\n")
    for row in rows:
        stream.write(",".join(_row_cells(row)) + "\n")


def write_csv(rows: Sequence[ResultRow], path: str) -> None:
    """Write rows with the fixed column order and 9-significant-digit
    decimals; a single newline terminates each line."""
    if not rows:
        raise ValueError("no rows to write")
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        write_rows(rows, handle)


def emit_cdf(summary: SimSummary, path: str) -> None:
    """Two-column CSV (t, fraction) of the downsampled ECDF."""
    if summary.sample_count < 1:
        raise ValueError("summary has no samples")
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("t,fraction\n")
        for t, frac in summary.ecdf:
            handle.write(f"{t:.9g},{frac:.9g}\n")
