"""Command-line front end: analyze | design | simulate.

Every file-producing run also writes a manifest (config echo, seed, version,
timestamp, output paths).  Result files themselves carry no timestamps, so
identical invocations produce byte-identical results.

Exit codes: 0 success, 1 usage error, 2 invalid configuration, 3 resource
cap (subspace enumeration too large).  FOUNTAIN_THREADS caps simulation
worker processes.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .distributions import (
    PdsSpec,
    erasure_transform,
    pds_from_json,
    uniform_distribution,
)
from .fountain_matrix import (
    TIE_RULES,
    alpha,
    fountain_matrix,
    gamma_profile,
    greedy_design,
    identity_product,
)
from .gf2 import mask_to_bits
from .lattice import LatticeCapError, enumerate_subspaces
from .simulator import CODES, DECODERS, SimConfig, run_experiment

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_CAP = 3


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dump_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _sibling(path: Path, suffix: str) -> Path:
    name = path.name
    if name.endswith(".json"):
        name = name[: -len(".json")]
    return path.with_name(name + suffix)


def _write_manifest(command: str, config: dict, seed, base: Path, outputs: list[Path]) -> None:
    manifest = {
        "command": command,
        "config": config,
        "seed": seed,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "outputs": [str(p) for p in outputs],
    }
    _write_text(_sibling(base, ".manifest.json"), _dump_json(manifest))


def _resolve_pds_arg(k: int, spec: str) -> PdsSpec:
    if spec == "uniform":
        return PdsSpec(k, (uniform_distribution(k, include_zero=True),), period=1)
    if spec == "uniform_nonzero":
        return PdsSpec(k, (uniform_distribution(k, include_zero=False),), period=1)
    path = Path(spec)
    if path.exists():
        pds = pds_from_json(json.loads(path.read_text()))
        if pds.k != k:
            raise ValueError(f"sequence file has k={pds.k}, command asked for k={k}")
        return pds
    raise ValueError(f"--pds {spec!r} is neither a builtin name nor an existing file")


def cmd_analyze(args) -> int:
    lattice = enumerate_subspaces(args.k)
    pds = _resolve_pds_arg(args.k, args.pds)
    if args.n < 1:
        raise ValueError("--n must be >= 1")
    if not 0 <= args.epsilon < 1:
        raise ValueError("--epsilon must be in [0, 1)")

    f = identity_product(lattice)
    row_err = 0.0
    for t in range(1, args.n + 1):
        dist = erasure_transform(pds.at(t), args.epsilon).to_explicit()
        step = fountain_matrix(lattice, dist)
        row_err = max(row_err, float(abs(step.entries.sum(axis=1) - 1.0).max()))
        f = f.extend(step)
    row_err = max(row_err, f.max_row_sum_error())

    alphas = [alpha(f, r) for r in range(args.k + 1)]
    gamma_min = []
    gamma_argmin = []
    for r in range(args.k + 1):
        prof = gamma_profile(f, r)
        gamma_min.append(prof.min_value)
        gamma_argmin.append(sorted(mask_to_bits(m, args.k) for m in prof.argmin))

    doc = {
        "k": args.k,
        "n": args.n,
        "epsilon": args.epsilon,
        "pds": args.pds,
        "alpha": alphas,
        "gamma_min": gamma_min,
        "gamma_argmin": gamma_argmin,
        "row_sum_max_error": row_err,
    }
    text = _dump_json(doc)
    if args.out:
        out = Path(args.out)
        _write_text(out, text)
        config_echo = {"k": args.k, "n": args.n, "epsilon": args.epsilon, "pds": args.pds}
        _write_manifest("analyze", config_echo, None, out, [out])
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_design(args) -> int:
    lattice = enumerate_subspaces(args.k)
    result = greedy_design(args.k, args.r, args.steps, args.tie_rule, lattice=lattice)
    doc = {
        "k": args.k,
        "r_target": args.r,
        "steps": args.steps,
        "tie_rule": args.tie_rule,
        "pds": result.spec.to_json(),
        "provenance": list(result.steps),
    }
    text = _dump_json(doc)
    if args.out:
        out = Path(args.out)
        _write_text(out, text)
        _write_manifest("design", {"k": args.k, "r": args.r, "steps": args.steps,
                                   "tie_rule": args.tie_rule}, None, out, [out])
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_simulate(args) -> int:
    pds = None
    if args.code == "custom":
        if not args.pds:
            raise ValueError("--code custom requires --pds FILE")
        pds = pds_from_json(json.loads(Path(args.pds).read_text()))
    cfg = SimConfig(
        code=args.code,
        k=args.k,
        c=args.c,
        delta=args.delta,
        eps=args.epsilon,
        trials=args.trials,
        seed=args.seed,
        decoder=args.decoder,
        max_symbols=args.max_symbols,
        pds=pds,
    )
    stats = run_experiment(cfg)

    config_echo = {
        "code": cfg.code,
        "k": cfg.k,
        "c": cfg.c,
        "delta": cfg.delta,
        "epsilon": cfg.eps,
        "trials": cfg.trials,
        "seed": cfg.seed,
        "decoder": cfg.decoder,
        "max_symbols": cfg.resolved_max_symbols,
    }
    prefix = Path(args.out)
    stats_path = _sibling(prefix, ".stats.json")
    csv_path = _sibling(prefix, ".hist.csv")
    _write_text(stats_path, _dump_json({"config": config_echo, "stats": stats.to_json_dict()}))
    csv_lines = ["overhead_symbols,count"]
    csv_lines += [f"{o},{c}" for o, c in stats.histogram_rows()]
    _write_text(csv_path, "\n".join(csv_lines) + "\n")
    _write_manifest("simulate", config_echo, cfg.seed, prefix, [stats_path, csv_path])
    return EXIT_OK


def _build_parser() -> _Parser:
    parser = _Parser(prog="fountainkit", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="exact rank-evolution analysis at small k")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--pds", default="uniform",
                   help="builtin (uniform, uniform_nonzero) or a sequence JSON file")
    p.add_argument("--n", type=int, required=True, help="number of transmissions")
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--out", default=None, help="output JSON path (stdout if omitted)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("design", help="greedy optimal-sequence designer")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--r", type=int, required=True, help="target rank")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--tie-rule", choices=TIE_RULES, default="uniform_over_argmin")
    p.add_argument("--out", default=None, help="output JSON path (stdout if omitted)")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("simulate", help="erasure-channel overhead experiment")
    p.add_argument("--code", choices=CODES, required=True)
    p.add_argument("--pds", default=None, help="sequence JSON file (for --code custom)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--c", type=float, default=0.03)
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--decoder", choices=DECODERS, default="bp")
    p.add_argument("--max-symbols", type=int, default=None)
    p.add_argument("--out", required=True, help="output path prefix")
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except LatticeCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main_entry() -> None:
    raise SystemExit(main())
