"""Command-line front end: simulate | threshold | ratios | overhead.

Configuration comes from an optional JSON file (``--config``) with flat
key overrides (``--seed``, ``--trials``, ``--out``, ``--workers``,
``--set key=value``).  Unknown keys are rejected.  Every run writes its CSV
artifacts plus a ``manifest.json`` echoing the resolved configuration;
passing a manifest back through ``--config`` reproduces the run exactly.

Progress goes to stderr; stdout carries a single machine-readable summary
line.  Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__, backend_name
from .decoders import DecoderConfig
from .experiments import (
    NoCrossingError,
    RateEstimate,
    default_p_grid,
    overhead_csv_rows,
    pe_ratio_experiment,
    ratios_csv_rows,
    rates_csv_rows,
    run_rate_grid,
    threshold_csv_rows,
    threshold_from_grid,
)
from .params import CodeParams

EXIT_CONFIG = 2
EXIT_RUNTIME = 3


class ConfigError(ValueError):
    pass


COMMON_KEYS = {"seed", "out", "workers", "trials", "decoder", "s", "L", "p", "q",
               "rounds", "horizon"}
KEYS_BY_COMMAND = {
    "simulate": COMMON_KEYS,
    "threshold": COMMON_KEYS | {"p_grid", "bootstrap"},
    "ratios": COMMON_KEYS | {"e_max", "graphs"},
    "overhead": {"seed", "out", "workers", "s_grid", "s_target"},
}

DEFAULTS = {
    "seed": 0,
    "out": "results",
    "workers": None,
    "trials": 1000,
    "decoder": "CG",
    "s": 1.0,
    "L": 6,
    "p": 0.02,
    "q": None,
    "rounds": None,
    "horizon": None,
    "p_grid": None,
    "bootstrap": 200,
    "e_max": 10,
    "graphs": 1000,
    "s_grid": [round(0.05 * k, 2) for k in range(1, 20)],
    "s_target": 0.99,
}


def log(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def _as_list(value) -> list:
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


def load_config(path: str | None, command: str, overrides: dict) -> dict:
    cfg = {}
    if path:
        with open(path) as fh:
            data = json.load(fh)
        if isinstance(data, dict) and "config" in data and "command" in data:
            data = data["config"]  # manifest round-trip
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        cfg.update(data)
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    allowed = KEYS_BY_COMMAND[command]
    unknown = set(cfg) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: {sorted(unknown)}")
    out = {k: DEFAULTS[k] for k in allowed}
    out.update(cfg)
    if out.get("workers") in (None, 0):
        out["workers"] = os.cpu_count() or 1
    return out


def _decoder_configs(value) -> list[DecoderConfig]:
    try:
        return [DecoderConfig.from_dict(v) for v in _as_list(value)]
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad decoder spec: {exc}") from exc


def _validate_point(L, s, p, q, rounds, horizon, seed) -> CodeParams:
    try:
        return CodeParams(
            L=int(L), s=float(s), p=float(p),
            q=None if q is None else float(q),
            rounds=None if rounds is None else int(rounds),
            horizon=None if horizon is None else float(horizon),
            seed=int(seed),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def write_manifest(outdir: Path, command: str, cfg: dict) -> None:
    manifest = {
        "command": command,
        "config": cfg,
        "version": __version__,
        "backend": backend_name(),
    }
    (outdir / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def _write_rows(path: Path, rows: list[str]) -> None:
    path.write_text("\n".join(rows) + "\n")


def cmd_simulate(cfg: dict) -> dict:
    configs = _decoder_configs(cfg["decoder"])
    outdir = Path(cfg["out"])
    outdir.mkdir(parents=True, exist_ok=True)
    estimates: list[RateEstimate] = []
    for s in _as_list(cfg["s"]):
        for L in _as_list(cfg["L"]):
            for p in _as_list(cfg["p"]):
                _validate_point(L, s, p, cfg["q"], cfg["rounds"], cfg["horizon"], cfg["seed"])
        grid = run_rate_grid(
            float(s),
            tuple(int(L) for L in _as_list(cfg["L"])),
            tuple(float(p) for p in _as_list(cfg["p"])),
            tuple(configs),
            int(cfg["trials"]),
            int(cfg["seed"]),
            int(cfg["workers"]),
            progress=log,
        )
        estimates.extend(grid.rate_estimates(tuple(configs)))
    _write_rows(outdir / "rates.csv", rates_csv_rows(estimates))
    write_manifest(outdir, "simulate", cfg)
    return {"rows": len(estimates), "out": str(outdir / "rates.csv")}


def cmd_threshold(cfg: dict) -> dict:
    configs = _decoder_configs(cfg["decoder"])
    outdir = Path(cfg["out"])
    outdir.mkdir(parents=True, exist_ok=True)
    L_set = tuple(int(L) for L in sorted(_as_list(cfg["L"])))
    if len(L_set) < 2:
        raise ConfigError("threshold needs at least two lattice sizes")
    estimates: list[RateEstimate] = []
    entries = []
    for s in _as_list(cfg["s"]):
        s = float(s)
        # group decoders sharing the same grid so they share trial histories
        groups: dict[tuple, list[DecoderConfig]] = {}
        for config in configs:
            if cfg["p_grid"] is not None:
                grid_p = tuple(float(p) for p in cfg["p_grid"])
            else:
                grid_p = tuple(default_p_grid(config.kind.value, s))
            groups.setdefault(grid_p, []).append(config)
        for grid_p, group in groups.items():
            for L in L_set:
                for p in grid_p:
                    _validate_point(L, s, p, cfg["q"], cfg["rounds"], cfg["horizon"], cfg["seed"])
            grid = run_rate_grid(
                s, L_set, grid_p, tuple(group), int(cfg["trials"]),
                int(cfg["seed"]), int(cfg["workers"]), progress=log,
            )
            estimates.extend(grid.rate_estimates(tuple(group)))
            for d, config in enumerate(group):
                try:
                    est = threshold_from_grid(grid, d)
                except NoCrossingError as exc:
                    raise NoCrossingError(
                        f"{config.label()} at s={s}: {exc}"
                    ) from exc
                entries.append((config.label(), s, est))
                log(f"threshold {config.label()} s={s}: "
                    f"{est.p_th:.5f} +- {est.p_th_err:.5f}")
    _write_rows(outdir / "rates.csv", rates_csv_rows(estimates))
    _write_rows(outdir / "threshold.csv", threshold_csv_rows(entries))
    write_manifest(outdir, "threshold", cfg)
    return {
        "thresholds": {f"{d}@s={s}": est.p_th for d, s, est in entries},
        "out": str(outdir / "threshold.csv"),
    }


def cmd_ratios(cfg: dict) -> dict:
    configs = _decoder_configs(cfg["decoder"])
    if len(configs) != 1:
        raise ConfigError("ratios runs one decoder at a time")
    config = configs[0]
    outdir = Path(cfg["out"])
    outdir.mkdir(parents=True, exist_ok=True)
    s = float(_as_list(cfg["s"])[0])
    L = int(_as_list(cfg["L"])[0])
    p = cfg["p"]
    if p is None:
        p = default_p_grid(config.kind.value, s, n_points=1, span=0.0)[0]
    p = float(_as_list(p)[0])
    params = _validate_point(L, s, p, cfg["q"], cfg["rounds"], cfg["horizon"], cfg["seed"])
    means, pair_counts, graphs_used = pe_ratio_experiment(
        params, config, int(cfg["e_max"]), int(cfg["graphs"]),
        workers=int(cfg["workers"]), progress=log,
    )
    rows = ratios_csv_rows(config.label(), s, L, p, means, pair_counts, graphs_used)
    _write_rows(outdir / "ratios.csv", rows)
    write_manifest(outdir, "ratios", cfg)
    return {"graphs": graphs_used, "out": str(outdir / "ratios.csv")}


def cmd_overhead(cfg: dict) -> dict:
    outdir = Path(cfg["out"])
    outdir.mkdir(parents=True, exist_ok=True)
    s_values = [float(s) for s in _as_list(cfg["s_grid"])]
    s_target = float(cfg["s_target"])
    for s in s_values:
        if not 0.0 < s <= 1.0:
            raise ConfigError(f"s_grid entry {s} outside (0, 1]")
    if not 0.0 < s_target < 1.0:
        raise ConfigError(f"s_target {s_target} outside (0, 1)")
    _write_rows(outdir / "overhead.csv", overhead_csv_rows(s_values, s_target))
    write_manifest(outdir, "overhead", cfg)
    return {"rows": len(s_values), "out": str(outdir / "overhead.csv")}


COMMANDS = {
    "simulate": cmd_simulate,
    "threshold": cmd_threshold,
    "ratios": cmd_ratios,
    "overhead": cmd_overhead,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="toricsim",
        description="Toric code Monte Carlo under probabilistic stabiliser measurement",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config file (or a previous manifest)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--trials", type=int)
        sp.add_argument("--out")
        sp.add_argument("--workers", type=int)
        sp.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override any config key (VALUE parsed as JSON when possible)",
        )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        "seed": args.seed,
        "trials": args.trials,
        "out": args.out,
        "workers": args.workers,
    }
    try:
        for item in args.set:
            if "=" not in item:
                raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
            key, raw = item.split("=", 1)
            try:
                overrides[key] = json.loads(raw)
            except json.JSONDecodeError:
                overrides[key] = raw
        cfg = load_config(args.config, args.command, overrides)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        log(f"config error: {exc}")
        return EXIT_CONFIG
    try:
        summary = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        log(f"config error: {exc}")
        return EXIT_CONFIG
    except Exception as exc:  # runtime failures map to exit code 3
        log(f"error: {type(exc).__name__}: {exc}")
        return EXIT_RUNTIME
    print(json.dumps(summary, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
