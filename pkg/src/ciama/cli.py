"""Command-line front end.

Subcommands: ``simulate`` (Monte Carlo BER sweep -> CSV), ``bound``
(analytical BER bound -> CSV), ``rates`` (scheme rate table),
``dump-codebook`` and ``dump-schedule`` (debug dumps).  A JSON config file
can pre-set any ``simulate`` option; explicit flags win over the file.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from . import analysis, bia
from .channel import draw_channels, dump_channels_csv, stream_rng
from .harness import ConfigError, SimConfig, format_csv, run_sweep
from .scma import build_default_codebooks, load_codebook, save_codebook


def parse_ebn0(text: str) -> tuple:
    """``start:stop:step`` (inclusive stop) or a single dB value."""
    try:
        parts = [float(p) for p in text.split(":")]
    except ValueError as exc:
        raise ConfigError(f"bad --ebn0 value {text!r}") from exc
    if len(parts) == 1:
        return (parts[0],)
    if len(parts) != 3:
        raise ConfigError("--ebn0 expects start:stop:step or a single value")
    start, stop, step = parts
    if step <= 0 or stop < start:
        raise ConfigError("--ebn0 needs step > 0 and stop >= start")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return tuple(start + i * step for i in range(n))


def _add_simulate_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with option defaults")
    p.add_argument("--scheme", choices=("ciama", "stbc-scma", "bia", "p2p-alamouti"))
    p.add_argument("--decoder", choices=("two-stage", "joint-mpa", "zf", "mmse", "ml"))
    p.add_argument("--ebn0", help="grid as start:stop:step in dB, or one value")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--iters", type=int)
    p.add_argument("--faithful", action="store_true", default=None,
                   help="two-stage MPA ignores equalization noise enhancement")
    p.add_argument("--noiseless", action="store_true", default=None)
    p.add_argument("--max-log", action="store_true", default=None, dest="max_log")
    p.add_argument("--all-users", action="store_true", default=None, dest="all_users")
    p.add_argument("--workers", type=int)
    p.add_argument("--stop-after-errors", type=int, dest="stop_after_errors")
    p.add_argument("--codebook", dest="codebook_file", help="plain-text codebook file")
    p.add_argument("--dump-channels", dest="dump_channels",
                   help="also dump the first trial's channel realization to this CSV")
    p.add_argument("--out", help="output CSV path (default: stdout)")


def build_sim_config(args: argparse.Namespace) -> SimConfig:
    cfg_fields = {f.name for f in dataclasses.fields(SimConfig)}
    merged = {}
    if args.config:
        try:
            with open(args.config) as fh:
                file_opts = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        unknown = set(file_opts) - cfg_fields
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        merged.update(file_opts)
    for name in cfg_fields:
        value = getattr(args, name, None)
        if value is not None:
            merged[name] = value
    if args.ebn0 is not None:
        merged["ebn0_db"] = parse_ebn0(args.ebn0)
    if "ebn0_db" in merged:
        merged["ebn0_db"] = tuple(float(x) for x in merged["ebn0_db"])
    if "distances" in merged and merged["distances"] is not None:
        merged["distances"] = tuple(float(x) for x in merged["distances"])
    cfg = SimConfig(**merged)
    cfg.validate()
    return cfg


def _cmd_simulate(args) -> int:
    cfg = build_sim_config(args)
    if args.dump_channels:
        real = draw_channels(stream_rng(cfg.seed, 0, 0), cfg.n_users, cfg.n_tones,
                             cfg.n_tx, cfg.distances, cfg.path_loss_params())
        dump_channels_csv(real, args.dump_channels)
    records = run_sweep(cfg)
    if any(not np.isfinite(r.ber) for r in records):
        print("numerical failure: non-finite BER", file=sys.stderr)
        return 3
    text = format_csv(records)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_bound(args) -> int:
    grid = parse_ebn0(args.ebn0)
    cb = load_codebook(args.codebook_file) if args.codebook_file else build_default_codebooks()
    budget = "all" if args.pairs == "all" else int(args.pairs)
    lines = ["ebn0_db,bound_value,stderr,pairs_evaluated"]
    for db in grid:
        res = analysis.ber_union_bound(cb, 10.0 ** (db / 10.0), pair_budget=budget,
                                       seed=args.seed, bit_weighted=args.bit_weighted)
        if not np.isfinite(res.value):
            print("numerical failure: non-finite bound", file=sys.stderr)
            return 3
        lines.append(f"{float(db)!r},{float(res.value)!r},{float(res.stderr)!r},{res.pairs_evaluated}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_rates(args) -> int:
    table = analysis.scheme_rates()
    ratio = table.pop("ciama_over_stbc_scma")
    print(f"{'scheme':<14}{'users':>6}{'bits/user':>11}{'slots':>7}{'tones':>7}"
          f"{'per-user rate':>16}{'sum rate':>12}")
    for name, r in table.items():
        print(f"{name:<14}{r['users']:>6}{r['bits_per_user']:>11}{r['slots']:>7}"
              f"{r['tones']:>7}{str(r['per_user']):>16}{str(r['sum']):>12}")
    print(f"ciama / stbc-scma sum-rate ratio: {ratio} = {float(ratio):.4f}")
    return 0


def _cmd_dump_codebook(args) -> int:
    cb = load_codebook(args.codebook_file) if args.codebook_file else build_default_codebooks()
    if args.out:
        save_codebook(cb, args.out)
    else:
        for i in range(cb.n_layers):
            for b in range(cb.n_points):
                print(" ".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in cb.codewords[i, b]))
    return 0


def _cmd_dump_schedule(args) -> int:
    sched = bia.supersymbol_schedule(args.users)
    print("user," + ",".join(f"slot{t + 1}" for t in range(sched.shape[1])))
    for k in range(sched.shape[0]):
        print(f"{k + 1}," + ",".join(str(m) for m in sched[k]))
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ciama",
                                     description="Multiple-access link simulator and bound toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="Monte Carlo BER sweep")
    _add_simulate_args(p_sim)
    p_sim.set_defaults(func=_cmd_simulate)

    p_bound = sub.add_parser("bound", help="analytical BER bound sweep")
    p_bound.add_argument("--ebn0", required=True)
    p_bound.add_argument("--pairs", default="100000",
                         help="sampled ordered pairs, or 'all' for the full sum")
    p_bound.add_argument("--seed", type=int, default=1)
    p_bound.add_argument("--bit-weighted", action="store_true", dest="bit_weighted")
    p_bound.add_argument("--codebook", dest="codebook_file")
    p_bound.add_argument("--out")
    p_bound.set_defaults(func=_cmd_bound)

    p_rates = sub.add_parser("rates", help="scheme rate accounting")
    p_rates.set_defaults(func=_cmd_rates)

    p_cb = sub.add_parser("dump-codebook", help="write the codebook file format")
    p_cb.add_argument("--codebook", dest="codebook_file")
    p_cb.add_argument("--out")
    p_cb.set_defaults(func=_cmd_dump_codebook)

    p_sched = sub.add_parser("dump-schedule", help="print the antenna-mode table")
    p_sched.add_argument("--users", type=int, default=6)
    p_sched.set_defaults(func=_cmd_dump_schedule)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
