"""Command-line front end.

Subcommands: ``bounds``, ``fountain``, ``simulate``, ``sweep``, ``cdf``,
``codec encode``, ``codec decode``. Flags mirror config-file keys and may
be combined with ``--config FILE``; flags win. Exit status is 0 on
success, 1 on a configuration error, 2 on a runtime error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import mds
from .experiments import (
    ConfigError,
    ExperimentConfig,
    config_from_items,
    emit_cdf,
    run_sweep,
    write_csv,
    write_rows,
)

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    """argparse variant whose usage errors map to exit code 1."""

    def error(self, message):
        raise ConfigError(message)


def _add_grid_flags(parser: argparse.ArgumentParser, fountain: bool) -> None:
    parser.add_argument("--n", help="disk/server count; supports lo..hi and {a,b,c}")
    parser.add_argument("--k", help="blocks needed; supports lo..hi and {a,b,c}")
    if fountain:
        parser.add_argument("--wait-scale", dest="wait_scale",
                            help="mean waiting time per server (seconds)")
        parser.add_argument("--D", "--delivery", dest="D",
                            help="full-content delivery time (seconds)")
    else:
        parser.add_argument("--lambda", dest="lam", help="arrival rate (1/s)")
        parser.add_argument("--mu", help="per-unit read rate (units/s)")


def _add_sim_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--requests", help="total requests across replications")
    parser.add_argument("--warmup", help="requests discarded per replication")
    parser.add_argument("--seed", help="base RNG seed")
    parser.add_argument("--replications", help="independent replications")
    parser.add_argument("--cancel", help="preempt or queued-only")
    parser.add_argument("--ecdf-points", dest="ecdf_points",
                        help="ECDF downsampling resolution")


def _build_parser() -> _Parser:
    parser = _Parser(prog="kofn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_bounds = sub.add_parser("bounds", help="fork-join response-time bounds")
    _add_grid_flags(p_bounds, fountain=False)
    p_bounds.add_argument("--sigma", help="service std dev for the general-service bound")
    p_bounds.add_argument("--c-nk", dest="c_nk",
                          help="order-statistic variance constant (table value)")
    p_bounds.add_argument("--config", help="config file to combine with flags")
    p_bounds.add_argument("--output", help="CSV path (default: stdout)")

    p_fountain = sub.add_parser("fountain", help="fountain model, closed form")
    _add_grid_flags(p_fountain, fountain=True)
    p_fountain.add_argument("--sim", action="store_true",
                            help="also simulate and attach a verdict")
    _add_sim_flags(p_fountain)
    p_fountain.add_argument("--config", help="config file to combine with flags")
    p_fountain.add_argument("--output", help="CSV path (default: stdout)")

    p_sim = sub.add_parser("simulate", help="simulate one model over a grid")
    p_sim.add_argument("--model", choices=["forkjoin", "fountain"], default="forkjoin")
    p_sim.add_argument("--n", help="disk/server count")
    p_sim.add_argument("--k", help="blocks needed")
    p_sim.add_argument("--lambda", dest="lam", help="arrival rate (fork-join)")
    p_sim.add_argument("--mu", help="per-unit read rate (fork-join)")
    p_sim.add_argument("--wait-scale", dest="wait_scale", help="fountain wait scale")
    p_sim.add_argument("--D", "--delivery", dest="D", help="fountain delivery time")
    _add_sim_flags(p_sim)
    p_sim.add_argument("--config", help="config file to combine with flags")
    p_sim.add_argument("--output", help="CSV path (default: stdout)")

    p_sweep = sub.add_parser("sweep", help="run a config-file experiment")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--mode", help="override the config's mode")
    p_sweep.add_argument("--n", help="override grid")
    p_sweep.add_argument("--k", help="override grid")
    p_sweep.add_argument("--lambda", dest="lam", help="override grid")
    p_sweep.add_argument("--mu", help="override grid")
    p_sweep.add_argument("--wait-scale", dest="wait_scale", help="override grid")
    p_sweep.add_argument("--D", "--delivery", dest="D", help="override grid")
    p_sweep.add_argument("--expansion", help="n/k ratio for sweep-n-fixed-rate")
    _add_sim_flags(p_sweep)
    p_sweep.add_argument("--output", help="CSV path (default: stdout)")

    p_cdf = sub.add_parser("cdf", help="simulate fork-join and emit ECDF files")
    _add_grid_flags(p_cdf, fountain=False)
    _add_sim_flags(p_cdf)
    p_cdf.add_argument("--config", help="config file to combine with flags")
    p_cdf.add_argument("--output", required=True,
                       help="ECDF CSV path; grids get _n<j>_k<j> suffixes")

    p_codec = sub.add_parser("codec", help="MDS shard encode/decode")
    codec_sub = p_codec.add_subparsers(dest="codec_command", required=True)
    p_enc = codec_sub.add_parser("encode", help="encode a file into n shards")
    p_enc.add_argument("--n", required=True, type=int)
    p_enc.add_argument("--k", required=True, type=int)
    p_enc.add_argument("--output-dir", dest="output_dir", default=".")
    p_enc.add_argument("input")
    p_dec = codec_sub.add_parser("decode", help="rebuild a file from >= k shards")
    p_dec.add_argument("--output", required=True)
    p_dec.add_argument("shards", nargs="+")
    return parser


# CLI flag name -> config key (only where they differ).
_FLAG_TO_KEY = {"lam": "lambda"}
_CONFIG_FLAGS = (
    "n", "k", "lam", "mu", "wait_scale", "D", "requests", "warmup", "seed",
    "replications", "cancel", "ecdf_points", "expansion", "sigma", "c_nk",
    "output", "mode",
)


def _collect_items(args: argparse.Namespace, mode: str | None) -> ExperimentConfig:
    items: dict[str, object] = {}
    config_path = getattr(args, "config", None)
    if config_path:
        from .experiments import parse_config

        try:
            cfg_text = Path(config_path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        parsed = parse_config(cfg_text)  # full validation with line numbers
        items = _config_to_items(parsed)
    for flag in _CONFIG_FLAGS:
        value = getattr(args, flag, None)
        if value is not None:
            items[_FLAG_TO_KEY.get(flag, flag)] = value
    if mode is not None:
        items["mode"] = mode
    return config_from_items(items)


def _config_to_items(cfg: ExperimentConfig) -> dict[str, object]:
    items: dict[str, object] = {"mode": cfg.mode, "name": cfg.name}
    for key, value in (
        ("n", cfg.n), ("k", cfg.k), ("lambda", cfg.lam), ("mu", cfg.mu),
        ("D", cfg.delivery), ("wait_scale", cfg.wait_scale),
    ):
        if value is not None:
            items[key] = value
    items.update(
        expansion=cfg.expansion, requests=cfg.requests, warmup=cfg.warmup,
        seed=cfg.seed, replications=cfg.replications,
        ecdf_points=cfg.ecdf_points, cancel=cfg.cancel,
    )
    if cfg.sigma is not None:
        items["sigma"] = cfg.sigma
        items["c_nk"] = cfg.c_nk
    if cfg.output is not None:
        items["output"] = cfg.output
    return items


def _emit(rows, cfg: ExperimentConfig) -> None:
    if cfg.output:
        write_csv(rows, cfg.output)
        print(f"wrote {len(rows)} rows to {cfg.output}", file=sys.stderr)
    else:
        write_rows(rows, sys.stdout)


def _cdf_path(base: str, row, multi: bool) -> str:
    if not multi:
        return base
    path = Path(base)
    return str(path.with_name(f"{path.stem}_n{row.n}_k{row.k}{path.suffix or '.csv'}"))


def _run_experiment(args: argparse.Namespace, mode: str | None) -> int:
    cfg = _collect_items(args, mode)
    rows = run_sweep(cfg)
    if cfg.mode == "cdf":
        emitted = [row for row in rows if row.summary is not None]
        if not emitted:
            raise RuntimeError("no grid point produced samples (all rows invalid?)")
        multi = len(rows) > 1
        for row in emitted:
            emit_cdf(row.summary, _cdf_path(cfg.output, row, multi))
            print(f"wrote ECDF for (n={row.n}, k={row.k})", file=sys.stderr)
        write_rows(rows, sys.stdout)
    else:
        _emit(rows, cfg)
    return 0


def _run_codec(args: argparse.Namespace) -> int:
    if args.codec_command == "encode":
        spec = mds.CodeSpec(n=args.n, k=args.k)
        data = Path(args.input).read_bytes()
        shards = mds.encode(spec, data)
        out_dir = Path(args.output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        stem = Path(args.input).name
        for shard in shards:
            path = out_dir / f"{stem}.shard{shard.index:03d}"
            path.write_bytes(mds.serialize_shard(spec, shard))
            print(path)
    else:
        parsed = [mds.parse_shard(Path(p).read_bytes()) for p in args.shards]
        specs = {spec for spec, _ in parsed}
        if len(specs) != 1:
            raise RuntimeError("shards come from different codes")
        spec = specs.pop()
        content = mds.decode(spec, [shard for _, shard in parsed])
        Path(args.output).write_bytes(content.data)
        print(f"wrote {content.original_len} bytes to {args.output}", file=sys.stderr)
    return 0


_SUBCOMMAND_MODE = {
    "bounds": "bounds",
    "sweep": None,  # comes from the config file / --mode
    "cdf": "cdf",
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "codec":
            return _run_codec(args)
        if args.command == "fountain":
            mode = "fountain-sim" if args.sim else "fountain-analytic"
        elif args.command == "simulate":
            mode = "forkjoin-sim" if args.model == "forkjoin" else "fountain-sim"
        else:
            mode = _SUBCOMMAND_MODE[args.command]
        return _run_experiment(args, mode)
    except ConfigError as exc:
        print(f"kofn: config error: {exc}", file=sys.stderr)
        return 1
    except (OSError, RuntimeError, ValueError) as exc:
        print(f"kofn: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
