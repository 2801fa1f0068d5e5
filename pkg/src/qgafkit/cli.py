"""Command-line entry point: ``qgafkit {ingest,encode,train,compare,report,synth}``.

Exit codes: 0 success, 1 internal failure, 2 user or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import jsonschema

from . import pipeline
from .config import ENCODERS, check_config, from_dict, load_schema
from .errors import QgafError
from .report import build_report
from .synthetic import write_price_csv

log = logging.getLogger("qgafkit")

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read_raw(path: str | None) -> tuple[dict, Path | None]:
    if path is None:
        return {}, None
    p = Path(path)
    try:
        return json.loads(p.read_text(encoding="utf-8")), p.parent
    except OSError as exc:
        raise UsageError(f"cannot read config {p}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{p}: not valid JSON ({exc})") from None


def resolve_config(args):
    raw, base = _read_raw(args.config)
    if getattr(args, "data", None):
        raw["data"] = {"path": str(Path(args.data).resolve())}
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.out is not None:
        raw["out"] = args.out
    if getattr(args, "encoder", None):
        raw.setdefault("encoder", {})["kind"] = args.encoder
    if getattr(args, "exact", False):
        raw.setdefault("encoder", {})["exact"] = True
    if getattr(args, "epochs", None) is not None:
        raw.setdefault("train", {})["epochs"] = args.epochs
    return from_dict(raw, base)


def cmd_ingest(args) -> int:
    cfg = resolve_config(args)
    if not cfg.sources:
        raise UsageError("no data source: pass --data or set 'data' in the config")
    for src in cfg.sources:
        returns, summary = pipeline.ingest(cfg, src)
        print(f"{src.name}: {summary['rows_out']} returns, {summary['gaps_filled']} gaps filled "
              f"-> {pipeline.stock_dir(cfg, src) / 'returns.csv'}")
    return EXIT_OK


def cmd_encode(args) -> int:
    cfg = resolve_config(args)
    if not cfg.sources:
        raise UsageError("no data source: pass --data or set 'data' in the config")
    for src in cfg.sources:
        m = pipeline.encode(cfg, src)
        print(f"{src.name}/{m['encoder']}: {m['count']} archives, {len(m['skipped'])} skipped "
              f"-> {pipeline.encoder_dir(cfg, src) / 'archives'}")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = resolve_config(args)
    dirs = []
    if args.archives:
        dirs = [(Path(args.archives), Path(args.archives).parent / "train")]
    else:
        if not cfg.sources:
            raise UsageError("pass --archives DIR or a config with data sources")
        dirs = [(pipeline.encoder_dir(cfg, s) / "archives", pipeline.encoder_dir(cfg, s) / "train")
                for s in cfg.sources]
    for arch, out in dirs:
        m = pipeline.train_archives(cfg, arch, out)
        agg = m["aggregate"]
        print(f"{arch}: {m['n_samples']} samples, {len(m['folds'])} folds, "
              f"MAE {agg['mae']:.5f}, MSE {agg['mse']:.6f} -> {out}")
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = resolve_config(args)
    report = pipeline.compare(cfg)
    sys.stdout.write(report.to_markdown())
    print(f"-> {Path(cfg.out) / 'comparison'}")
    return EXIT_OK


def cmd_report(args) -> int:
    if args.check_config:
        raw, _ = _read_raw(args.check_config)
        problems = check_config(raw)
        if problems:
            for p in problems:
                print(f"invalid: {p}", file=sys.stderr)
            return EXIT_USAGE
        from_dict(raw)
        print(f"{args.check_config}: ok")
        return EXIT_OK
    if args.schema:
        print(json.dumps(load_schema(), indent=2))
        return EXIT_OK
    if not args.runs:
        raise UsageError("report needs --check-config PATH, --schema, or --runs DIR DIR")
    arms: dict[str, dict[str, dict]] = {}
    encoders, provs = [], []
    for d in args.runs:
        path = Path(d) / "metrics.json" if Path(d).is_dir() else Path(d)
        try:
            m = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None
        stock = args.stock or "series"
        if m["encoder"] in encoders:
            raise UsageError(f"both runs are {m['encoder']}; compare two different encoders")
        arms.setdefault(stock, {})[m["encoder"]] = m
        encoders.append(m["encoder"])
        provs.append(m["provenance"])
    report = build_report(arms, encoders)
    prov = {"config_hash": ",".join(p["config_hash"] for p in provs),
            "seed": ",".join(str(p["seed"]) for p in provs)}
    report.provenance = {"runs": provs, "stocks": report.provenance}
    out = Path(args.out or "comparison")
    pipeline.write_comparison(report, arms, out, prov)
    sys.stdout.write(report.to_markdown())
    return EXIT_OK


def cmd_synth(args) -> int:
    path = write_price_csv(args.path, args.n, args.seed or 0)
    print(f"{args.n + 1} synthetic closes -> {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="pipeline JSON config")
    common.add_argument("--seed", type=int, help="global seed (shots, splits, init)")
    common.add_argument("--out", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="qgafkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="prices CSV -> returns CSV")
    p.add_argument("--data", help="price CSV (overrides config data)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("encode", parents=[common], help="returns -> field archives")
    p.add_argument("--data", help="price CSV (overrides config data)")
    p.add_argument("--encoder", choices=ENCODERS)
    p.add_argument("--exact", action="store_true", help="use analytic probabilities (no shot noise)")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("train", parents=[common], help="k-fold CNN training on archives")
    p.add_argument("--archives", help="archive directory (default: from config)")
    p.add_argument("--data", help="price CSV (overrides config data)")
    p.add_argument("--encoder", choices=ENCODERS)
    p.add_argument("--epochs", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("compare", parents=[common], help="encode + train both encoders, write report")
    p.add_argument("--data", help="price CSV (overrides config data)")
    p.add_argument("--exact", action="store_true")
    p.add_argument("--epochs", type=int)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("report", parents=[common], help="validate configs or tabulate finished runs")
    p.add_argument("--check-config", metavar="PATH")
    p.add_argument("--schema", action="store_true", help="print the config JSON schema")
    p.add_argument("--runs", nargs=2, metavar="DIR", help="two train directories (baseline first)")
    p.add_argument("--stock", help="column label for --runs")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("synth", parents=[common], help="write a seeded synthetic price CSV")
    p.add_argument("path", help="CSV to write")
    p.add_argument("-n", type=int, default=2000, help="number of daily returns")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, QgafError, FileNotFoundError, PermissionError, IsADirectoryError,
            jsonschema.SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        log.exception("internal failure")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
