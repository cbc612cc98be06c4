"""Command-line front end.

Each stage writes plain files the next stage reads::

    countcusum ingest records.jsonl --out counts/          # date,count CSVs
    countcusum detect counts/CY.csv counts/ON.csv --out results.json
    countcusum acf counts/total.csv --max-lag 30 --out acf/
    countcusum report results.json
    countcusum simulate --length 159 --tau 90 --delta 2 --trials 200 --out eval.json

Exit codes: 0 success, 1 usage or configuration error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import asdict
from datetime import date
from pathlib import Path

from . import __version__
from .changepoint import SignificanceConfig, detect_amoc
from .diagnostics import acf
from .errors import ConfigError, ParseError, SeriesTooShortError, ZeroVarianceError
from .ingest import (
    FORMATS,
    REFERENCE_END,
    REFERENCE_START,
    DateRange,
    aggregate_any,
    aggregate_daily,
    dedup_records,
    load_groups,
    read_records,
    read_series_csv,
    reference_groups,
    write_series_csv,
)
from .report import render_report, report_from_records
from .synth import SyntheticSpec, evaluate

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def slug(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name.strip()).strip("_") or "series"


def _date(text: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an ISO date: {text!r}") from None


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _significance(args) -> SignificanceConfig:
    try:
        return SignificanceConfig(
            alpha=args.alpha,
            method=args.method,
            permutations=args.permutations,
            seed=args.seed,
            penalty_value=args.penalty,
        )
    except ConfigError as exc:
        raise UsageError(str(exc)) from None


def _check_inputs(paths):
    for p in paths:
        if not Path(p).is_file():
            raise UsageError(f"cannot read {p}")


def cmd_ingest(args) -> int:
    _check_inputs(args.inputs)
    try:
        groups = load_groups(args.groups) if args.groups else reference_groups()
        span = DateRange(args.start, args.end)
    except (ConfigError, OSError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    records = []
    for path in args.inputs:
        try:
            records.extend(read_records(path, args.format))
        except ParseError as exc:
            raise DataError(f"{path}: {exc}") from None
        except ConfigError as exc:
            raise UsageError(str(exc)) from None
    records = dedup_records(records)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    series = [aggregate_daily(records, g, span) for g in groups]
    series.append(aggregate_any(records, groups, span, label=args.total_label))
    manifest = []
    for s in series:
        path = out / f"{slug(s.label)}.csv"
        write_series_csv(s, path)
        manifest.append({"label": s.label, "file": path.name, "matched": s.total, "days": len(s)})
        print(f"{s.label}\t{s.total}")
    _write_json(out / "manifest.json", {"records": len(records), "series": manifest})
    return EXIT_OK


def cmd_detect(args) -> int:
    _check_inputs(args.inputs)
    config = _significance(args)
    records, triples, failures = [], [], 0
    for path in args.inputs:
        label = Path(path).stem
        try:
            series = read_series_csv(path)
            res = detect_amoc(series, config)
        except (ValueError, SeriesTooShortError) as exc:
            failures += 1
            records.append({"label": label, "error": str(exc)})
            print(f"{label}: error: {exc}", file=sys.stderr)
            continue
        rec = res.to_dict()
        records.append(rec)
        triples.append((res.label, rec["total"], res))

    report = render_report(triples)
    payload = {"config": asdict(config), "results": records, "table": report.rows}
    if args.out:
        _write_json(Path(args.out), payload)
    if args.table:
        Path(args.table).write_text(report.text, encoding="utf-8")
    sys.stdout.write(report.text)
    return EXIT_DATA if failures == len(args.inputs) else EXIT_OK


def cmd_acf(args) -> int:
    _check_inputs(args.inputs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    failures = 0
    for path in args.inputs:
        try:
            series = read_series_csv(path)
        except ValueError as exc:
            failures += 1
            print(f"{Path(path).stem}: error: {exc}", file=sys.stderr)
            continue
        if args.max_lag >= len(series):
            raise UsageError(f"--max-lag {args.max_lag} must be below the series length {len(series)}")
        try:
            res = acf(series, args.max_lag)
        except ZeroVarianceError as exc:
            failures += 1
            _write_json(out / f"{slug(series.label)}_acf.json", {"label": series.label, "error": str(exc)})
            print(f"{series.label}: error: {exc}", file=sys.stderr)
            continue
        res.write_csv(out / f"{slug(series.label)}_acf.csv")
        _write_json(out / f"{slug(series.label)}_acf.json", res.to_dict())
        print(
            f"{series.label}\tband={res.band_halfwidth:.4f}\t"
            f"outside={len(res.outside_band())}/{res.max_lag}"
        )
    return EXIT_DATA if failures == len(args.inputs) else EXIT_OK


_SPEC_KEYS = ("length", "tau", "mu", "delta", "noise", "sigma", "seed", "trials")
_SIG_KEYS = ("alpha", "method", "permutations", "penalty")


def cmd_simulate(args) -> int:
    if args.config:
        import yaml

        try:
            cfg = yaml.safe_load(Path(args.config).read_text(encoding="utf-8")) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise UsageError(f"cannot read {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError(f"{args.config}: expected a mapping")
        unknown = set(cfg) - set(_SPEC_KEYS) - set(_SIG_KEYS) - {"detect_seed"}
        if unknown:
            raise UsageError(f"{args.config}: unknown keys {sorted(unknown)}")
        for key, value in cfg.items():
            if key not in args.explicit:
                setattr(args, key, value)
    try:
        spec = SyntheticSpec(
            length=args.length,
            tau=args.tau,
            mu=float(args.mu),
            delta=float(args.delta),
            noise=args.noise,
            sigma=None if args.noise == "poisson" else float(args.sigma),
            seed=args.seed,
        )
        config = SignificanceConfig(
            alpha=args.alpha,
            method=args.method,
            permutations=args.permutations,
            seed=args.detect_seed,
            penalty_value=args.penalty,
        )
        summary = evaluate(spec, args.trials, config)
    except (ConfigError, TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(summary.to_json(), encoding="utf-8")
    if args.trials_csv:
        summary.write_trials_csv(args.trials_csv)
    print(f"trials\t{summary.trials}")
    print(f"detection_rate\t{summary.detection_rate:.4f}")
    if summary.false_positive_rate is not None:
        print(f"false_positive_rate\t{summary.false_positive_rate:.4f}")
    if summary.median_abs_localization_error is not None:
        print(f"median_abs_localization_error\t{summary.median_abs_localization_error:g}")
    return EXIT_OK


def cmd_report(args) -> int:
    _check_inputs(args.inputs)
    records = []
    for path in args.inputs:
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
            records.extend(payload["results"])
        except (ValueError, KeyError, TypeError) as exc:
            raise DataError(f"{path}: not a results file ({exc})") from None
    try:
        report = report_from_records(records)
    except (KeyError, ValueError) as exc:
        raise DataError(f"malformed result record: {exc}") from None
    if args.out:
        Path(args.out).write_text(report.text, encoding="utf-8")
    sys.stdout.write(report.text)
    return EXIT_OK


def _add_significance(p):
    g = p.add_argument_group("significance")
    g.add_argument("--alpha", type=float, default=0.05)
    g.add_argument("--method", choices=("permutation", "penalty"), default="permutation")
    g.add_argument("--permutations", "-B", type=int, default=999)
    g.add_argument("--penalty", type=float, default=None, help="default: 3 ln T")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="countcusum", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="records -> daily count CSVs")
    p.add_argument("inputs", nargs="+", help="json-lines or csv record files")
    p.add_argument("--format", choices=FORMATS, help="default: from file extension")
    p.add_argument("--groups", help="YAML/JSON list of {name, phrases}; default CY/ON/TW")
    p.add_argument("--start", type=_date, default=REFERENCE_START)
    p.add_argument("--end", type=_date, default=REFERENCE_END)
    p.add_argument("--total-label", default="total")
    p.add_argument("--out", "-o", required=True, help="output directory")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("detect", help="daily count CSVs -> changepoint results")
    p.add_argument("inputs", nargs="+")
    _add_significance(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", "-o", help="results JSON path")
    p.add_argument("--table", help="also write the text table here")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("acf", help="daily count CSVs -> autocorrelation CSVs")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--max-lag", type=int, default=30)
    p.add_argument("--out", "-o", required=True, help="output directory")
    p.set_defaults(func=cmd_acf)

    p = sub.add_parser("simulate", help="Monte Carlo calibration/power run")
    p.add_argument("--config", help="YAML/JSON mapping of the options below")
    p.add_argument("--length", type=int, default=159)
    p.add_argument("--tau", type=int, default=None)
    p.add_argument("--mu", type=float, default=10.0)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--noise", choices=("gaussian", "poisson"), default="gaussian")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0, help="data seed")
    p.add_argument("--detect-seed", type=int, default=0, help="permutation seed")
    p.add_argument("--trials", type=int, default=200)
    _add_significance(p)
    p.add_argument("--out", "-o", help="summary JSON path")
    p.add_argument("--trials-csv", help="per-trial CSV path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="results JSON -> text table")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--out", "-o")
    p.set_defaults(func=cmd_report)
    return parser


def _explicit_options(argv) -> set[str]:
    return {a[2:].split("=")[0].replace("-", "_") for a in argv if a.startswith("--")}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.explicit = _explicit_options(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"countcusum {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"countcusum {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
