"""Command-line entry point: ``bangbang <subcommand> ...``.

Exit codes: 0 success, 2 configuration error, 3 failed oracle check.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .. import quantum
from ..oracle import run_oracle_suite
from .config import ConfigError, parse_config, read_toml
from .fitting import MODELS, fit_scaling
from .io import read_csv, rows_to_text, save_rows, write_tsv
from .report import format_report, table1_report
from .runner import run

EXIT_OK, EXIT_CONFIG, EXIT_ORACLE = 0, 2, 3


def _parse_angles(text: str):
    text = text.strip()
    if text.startswith("[") or text.startswith("{"):
        return json.loads(text)
    return [float(x) for x in text.split(",") if x.strip()]


def _apply_overrides(data: dict, args) -> dict:
    """CLI flags win over file keys."""
    if getattr(args, "n", None):
        data["sizes"] = list(args.n)
    if getattr(args, "seed", None) is not None:
        data["seeds"] = [args.seed]
    if getattr(args, "format", None):
        data["format"] = args.format
    for inst in data.get("instances", []):
        if not isinstance(inst, dict):
            continue
        if inst.get("kind") == "spike":
            if args.a is not None:
                inst["a"] = args.a
            if args.b is not None:
                inst["b"] = args.b
        if inst.get("kind") == "bush" and args.lam is not None:
            inst["lambda"] = args.lam
    for alg in data.get("algorithms", []):
        if not isinstance(alg, dict):
            continue
        if args.angles is not None and alg.get("kind") == "QAOA":
            alg["angles"] = _parse_angles(args.angles)
            alg["protocol"] = "angles"
        if args.schedule is not None and alg.get("kind") in ("SA", "LUSA", "BBSA", "QAO"):
            alg["schedule"] = json.loads(args.schedule)
            if alg.get("kind") == "BBSA":
                alg["protocol"] = "schedule"
    return data


def _emit(rows, config, args) -> None:
    fmt = config.format
    out = args.out or config.out
    if out:
        save_rows(rows, out, fmt, config.include_timing)
        print(f"wrote {len(rows)} rows to {out}", file=sys.stderr)
    else:
        sys.stdout.write(rows_to_text(rows, fmt, config.include_timing))


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "jsonl"), default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--n", type=int, nargs="*", default=None, help="problem sizes")
    p.add_argument("--a", type=float, default=None, help="spike width exponent")
    p.add_argument("--b", type=float, default=None, help="spike height exponent")
    p.add_argument("--lambda", dest="lam", type=float, default=None, help="Bush mixer weight")
    p.add_argument("--angles", default=None, help="QAOA angles: 'b1,g1,b2,g2' or JSON")
    p.add_argument("--schedule", default=None, help='schedule as JSON, e.g. \'{"path": [[0, 5]]}\'')


def cmd_run(args) -> int:
    data = _apply_overrides(read_toml(args.config), args)
    config = parse_config(data)
    rows = run(config, args.threads)
    _emit(rows, config, args)
    return EXIT_OK


def _inline_config(args, algorithm: dict) -> dict:
    inst = {"kind": args.instance}
    data = {"name": args.command, "sizes": list(args.n or []), "seeds": [args.seed or 0],
            "instances": [inst], "algorithms": [algorithm]}
    return data


def cmd_sweep(args) -> int:
    alg = {"kind": args.algorithm}
    for key in ("protocol", "mode", "measure", "walkers", "w_star", "T", "steps"):
        val = getattr(args, key)
        if val is not None:
            alg[key] = val
    data = _apply_overrides(_inline_config(args, alg), args)
    config = parse_config(data)
    rows = run(config, args.threads)
    _emit(rows, config, args)
    return EXIT_OK


def cmd_gap_scan(args) -> int:
    data = _apply_overrides(_inline_config(args, {"kind": "QAO", "measure": "gap"}), args)
    config = parse_config(data)
    inst = config.instances[0]
    rows = run(config, args.threads)
    if args.plot_dir:
        for n in config.sizes:
            cost = inst.build(n)
            mixer = quantum.mixer_lambda(n, inst.mixer_lambda(n)) if inst.kind == "bush" else None
            scan = quantum.spectral_gap_scan(cost, mixer)
            write_tsv(Path(args.plot_dir) / f"gap_{inst.label}_n{n}.tsv", scan.grid, scan.gaps, ("u", "gap"))
    _emit(rows, config, args)
    return EXIT_OK


def cmd_fit(args) -> int:
    rows = read_csv(args.results)
    if args.algorithm:
        rows = [r for r in rows if r["algorithm"] == args.algorithm]
    if args.instance:
        rows = [r for r in rows if r["instance"] == args.instance]
    for model in args.model:
        try:
            res = fit_scaling(rows, args.x, args.y, model)
        except ValueError as err:
            print(f"{model}: {err}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"{model}\tslope={res.slope!r}\tintercept={res.intercept!r}\tr2={res.r2!r}\tsse={res.sse!r}")
    return EXIT_OK


def cmd_report(args) -> int:
    config = parse_config(_apply_overrides(read_toml(args.config), args))
    rows = run(config, args.threads)
    lines = table1_report(config, rows)
    print(format_report(lines))
    if args.out:
        save_rows(rows, args.out, config.format, config.include_timing)
    return EXIT_OK


def cmd_oracle(args) -> int:
    checks = run_oracle_suite(seed=args.seed or 0, n_random=args.costs, max_n=args.max_n)
    failed = [c for c in checks if not c.passed]
    for c in checks if args.verbose else failed:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  err={c.error:.3g}  tol={c.tol:g}")
    worst = max(checks, key=lambda c: c.error / c.tol)
    print(f"oracle-check: {len(checks) - len(failed)}/{len(checks)} passed; "
          f"worst {worst.name} err={worst.error:.3g}")
    return EXIT_ORACLE if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bangbang", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run every cell of a TOML config")
    p.add_argument("config")
    _common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="sweep one algorithm on one instance family over --n")
    p.add_argument("--instance", required=True, choices=("ramp", "spike", "bush"))
    p.add_argument("--algorithm", required=True, choices=("SA", "LUSA", "BBSA", "QAO", "QAOA"))
    p.add_argument("--protocol", default=None)
    p.add_argument("--mode", default=None)
    p.add_argument("--measure", default=None)
    p.add_argument("--walkers", type=int, default=None)
    p.add_argument("--w-star", dest="w_star", type=int, default=None)
    p.add_argument("--T", type=float, default=None)
    p.add_argument("--steps", type=int, default=None)
    _common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gap-scan", help="minimum spectral gap of u B + (1-u) C over --n")
    p.add_argument("--instance", required=True, choices=("ramp", "spike", "bush"))
    p.add_argument("--plot-dir", default=None, help="write u-vs-gap TSV files here")
    _common(p)
    p.set_defaults(func=cmd_gap_scan)

    p = sub.add_parser("fit", help="fit a scaling model to a results CSV")
    p.add_argument("results")
    p.add_argument("--x", default="n")
    p.add_argument("--y", default="success")
    p.add_argument("--model", nargs="+", choices=MODELS, default=["power", "exp"])
    p.add_argument("--algorithm", default=None)
    p.add_argument("--instance", default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("report", help="run a config and print trend verdicts")
    p.add_argument("config")
    _common(p)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("oracle-check", help="brute-force equivalence suites on n <= 12")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--costs", type=int, default=20, help="number of random symmetric costs")
    p.add_argument("--max-n", type=int, default=12)
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except json.JSONDecodeError as err:
        print(f"config error: bad JSON in flag: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
