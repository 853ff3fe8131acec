"""``pessimlab`` command line: sweep, run, verify, plot.

Exit status: 0 on success, 1 when an invariant suite fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import harness
from .svg import emit_svg
from .validation import ValidationError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SEED_ENV = "PESSIMLAB_SEED"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pessimlab", description="Offline RL pessimism laboratory.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sw = sub.add_parser("sweep", help="run a config-driven grid")
    sw.add_argument("--config", required=True)
    sw.add_argument("--out-dir", required=True)
    sw.add_argument("--threads", type=int, default=None)

    rn = sub.add_parser("run", help="one instance, one algorithm, one N")
    rn.add_argument("--instance", required=True)
    rn.add_argument("--params", default="{}", help="instance parameters as JSON")
    rn.add_argument("--alg", required=True)
    rn.add_argument("--alg-params", default="{}", help="algorithm parameters as JSON")
    rn.add_argument("--n", type=int, required=True)
    rn.add_argument("--reps", type=int, default=1)
    rn.add_argument("--seed", type=int, default=0)
    rn.add_argument("--threads", type=int, default=None)

    vf = sub.add_parser("verify", help="run an invariant suite")
    vf.add_argument("--suite", required=True)
    vf.add_argument("--seed", type=int, default=0)

    pl = sub.add_parser("plot", help="SVG curves from a summary CSV")
    pl.add_argument("--summary", required=True)
    pl.add_argument("--x", default="n")
    pl.add_argument("--y", default="mean")
    pl.add_argument("--group", default="algorithm")
    pl.add_argument("--logx", action="store_true")
    pl.add_argument("--logy", action="store_true")
    pl.add_argument("--out", required=True)
    return p


def _json_arg(text: str, what: str) -> dict:
    try:
        val = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{what} is not valid JSON: {exc}") from exc
    if not isinstance(val, dict):
        raise ValidationError(f"{what} must be a JSON object")
    return val


def _seed_override(cfg: harness.ExperimentConfig) -> harness.ExperimentConfig:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return cfg
    try:
        seed = int(raw, 0)
    except ValueError as exc:
        raise ValidationError(f"{SEED_ENV} must be an integer, got {raw!r}") from exc
    d = cfg.to_dict()
    d["root_seed"] = seed
    return harness.ExperimentConfig.from_dict(d)


def _write_outputs(cfg, records, out_dir: Path) -> dict:
    names = {"records": "records.csv", "summary": "summary.csv", **cfg.outputs}
    rows = harness.summarize(records)
    harness.write_atomic(out_dir / names["records"], harness.records_csv(records))
    harness.write_atomic(out_dir / names["summary"], harness.summary_csv(rows))
    bad = harness.failures(records)
    if bad:
        lines = ["instance,algorithm,n,rep,reason"] + [f"{r.instance},{r.algorithm},{r.n},{r.rep},{json.dumps(r.error)}" for r in bad]
        harness.write_atomic(out_dir / "failures.csv", "\n".join(lines) + "\n")
    return {"records": str(out_dir / names["records"]), "summary": str(out_dir / names["summary"]), "failed": len(bad), "rows": rows}


def _print_fits(rows) -> None:
    keys = sorted({(r.instance, r.algorithm, r.c_star) for r in rows})
    for key in keys:
        grp = [r for r in rows if (r.instance, r.algorithm, r.c_star) == key]
        try:
            fit = harness.fit_rate(grp)
        except ValidationError:
            continue
        print(f"slope {key[0]} {key[1]} C*={key[2]:g}: {fit.slope:.3f} +- {fit.slope_stderr:.3f} (dropped {fit.dropped})")


def cmd_sweep(args) -> int:
    cfg = harness.ExperimentConfig.from_json(Path(args.config).read_text())
    cfg = _seed_override(cfg)
    records = harness.run_sweep(cfg, threads=args.threads)
    info = _write_outputs(cfg, records, Path(args.out_dir))
    print(f"wrote {info['records']} and {info['summary']} ({len(records)} records, {info['failed']} failed)")
    _print_fits(info["rows"])
    return EXIT_OK


def cmd_run(args) -> int:
    d = {
        "instance": {"id": args.instance, "params": _json_arg(args.params, "--params")},
        "algorithms": [{"id": args.alg, "params": _json_arg(args.alg_params, "--alg-params")}],
        "n_grid": [args.n],
        "reps": args.reps,
        "root_seed": args.seed,
    }
    cfg = _seed_override(harness.ExperimentConfig.from_dict(d))
    records = harness.run_sweep(cfg, threads=args.threads)
    sys.stdout.write(harness.summary_csv(harness.summarize(records)))
    for r in harness.failures(records):
        print(f"failed rep {r.rep}: {r.error}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    report = harness.verify_suite(args.suite, seed=args.seed)
    for c in report["checks"]:
        extra = {k: v for k, v in c.items() if k not in ("check", "passed")}
        print(f"{'PASS' if c['passed'] else 'FAIL'} {c['check']} {json.dumps(extra, default=float, sort_keys=True)}")
    print(f"suite {report['suite']}: {'PASS' if report['passed'] else 'FAIL'}")
    return EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_plot(args) -> int:
    rows = harness.read_summary(Path(args.summary).read_text())
    for name in (args.x, args.y, args.group):
        if name not in harness.SUMMARY_HEADER:
            raise ValidationError(f"unknown column {name!r}; valid: {', '.join(harness.SUMMARY_HEADER)}")
    svg = emit_svg(rows, x=args.x, y=args.y, group=args.group, logx=args.logx, logy=args.logy)
    harness.write_atomic(args.out, svg)
    print(f"wrote {args.out}")
    return EXIT_OK


COMMANDS = {"sweep": cmd_sweep, "run": cmd_run, "verify": cmd_verify, "plot": cmd_plot}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except (ValidationError, FileNotFoundError) as exc:
        print(f"pessimlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
