"""Ingest -> encode -> train -> compare, writing every artifact under ``cfg.out``.

Directory layout::

    <out>/<stock>/returns.csv, ingest_summary.json
    <out>/<stock>/<encoder>/archives/win_<start>.qgaf, manifest.json
    <out>/<stock>/<encoder>/images/win_<start>.pgm (+ .json sidecar, .png)
    <out>/<stock>/<encoder>/train/fold_<k>.csv, fold_<k>.qcnn, metrics.json
    <out>/comparison/...
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import gaf, imaging, qgaf
from .cnn import kernels
from .cnn.checkpoint import save_checkpoint
from .cnn.training import cross_validate, prepare_inputs, write_fold_csv
from .config import DataSource, EncoderConfig, PipelineConfig
from .errors import DegenerateWindowError, DomainError, ValidationError
from .marketdata import (
    ReturnSeries,
    clean,
    count_missing,
    daily_returns,
    fetch_csv_url,
    load_csv,
)
from .report import ComparisonReport, build_report, svg_line_plot, write_curves_csv, write_json
from .windowing import LabeledWindow, make_windows, windows_digest

log = logging.getLogger(__name__)


def provenance(cfg: PipelineConfig) -> dict:
    return {"config_hash": cfg.config_hash(), "seed": cfg.seed}


def stock_dir(cfg: PipelineConfig, src: DataSource) -> Path:
    return Path(cfg.out) / src.name


def load_source(src: DataSource):
    if src.url:
        return fetch_csv_url(src.url, src.schema)
    return load_csv(src.path, src.schema)


def write_returns_csv(series: ReturnSeries, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", "return"])
        for d, r in zip(series.dates, series.returns):
            w.writerow([d, repr(float(r))])


def read_returns_csv(path) -> ReturnSeries:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    return ReturnSeries(tuple(r["date"] for r in rows), np.array([float(r["return"]) for r in rows]))


def ingest(cfg: PipelineConfig, src: DataSource) -> tuple[ReturnSeries, dict]:
    prices = load_source(src)
    leading, interior = count_missing(prices)
    cleaned = clean(prices, cfg.cleaning)
    returns = daily_returns(cleaned)
    out = stock_dir(cfg, src)
    out.mkdir(parents=True, exist_ok=True)
    write_returns_csv(returns, out / "returns.csv")
    summary = {
        "stock": src.name,
        "rows_in": len(prices),
        "rows_cleaned": len(cleaned),
        "rows_out": len(returns),
        "leading_missing_dropped": leading,
        "gaps_filled": interior,
        "cleaning_policy": cfg.cleaning,
        "provenance": provenance(cfg),
    }
    write_json(summary, out / "ingest_summary.json")
    log.info("%s: %d prices -> %d returns (%d gaps filled)", src.name, len(prices), len(returns), interior)
    return returns, summary


def returns_for(cfg: PipelineConfig, src: DataSource) -> ReturnSeries:
    path = stock_dir(cfg, src) / "returns.csv"
    if path.exists():
        return read_returns_csv(path)
    return ingest(cfg, src)[0]


def window_issue(values: np.ndarray, enc: EncoderConfig) -> str | None:
    """Why ``values`` cannot be encoded with ``enc``, or None."""
    if not enc.quantum:
        if float(np.max(values)) <= float(np.min(values)):
            return "degenerate window (max == min)"
        return None
    if enc.sign_mode != "analytic":
        return None
    if enc.kind == "qgasf":
        worst = 2.0 * float(np.max(np.abs(values)))
        if not worst < math.pi / 2:
            return f"|x_i + x_j| reaches {worst:.4g} >= pi/2"
    else:
        worst = float(np.max(values) - np.min(values))
        if not worst < math.pi / 2:
            return f"|x_i - x_j| reaches {worst:.4g} >= pi/2"
    return None


def encode_window(values, enc: EncoderConfig, seed: int, window_id: int) -> gaf.AngularField:
    if enc.kind == "gasf":
        return gaf.encode_classical(values, "GASF", enc.normalization, window_id)
    if enc.kind == "gadf":
        return gaf.encode_classical(values, "GADF", enc.normalization, window_id)
    qcfg = enc.qgaf(seed)
    if enc.kind == "qgasf":
        return qgaf.qgasf_image(values, qcfg, window_id)
    return qgaf.qgadf_image(values, qcfg, window_id)


def encoder_dir(cfg: PipelineConfig, src: DataSource, kind: str | None = None) -> Path:
    return stock_dir(cfg, src) / (kind or cfg.encoder.kind)


def encode(cfg: PipelineConfig, src: DataSource, windows: list[LabeledWindow] | None = None) -> dict:
    """Encode every labeled window to an archive; failures are skipped and recorded."""
    enc = cfg.encoder
    if windows is None:
        windows = make_windows(returns_for(cfg, src), cfg.window)
    base = encoder_dir(cfg, src)
    arch_dir = base / "archives"
    arch_dir.mkdir(parents=True, exist_ok=True)
    for stale in arch_dir.glob("win_*.qgaf"):
        stale.unlink()
    img_dir = base / "images"
    if cfg.imaging.export_pgm or cfg.imaging.export_png:
        img_dir.mkdir(parents=True, exist_ok=True)
    prov = provenance(cfg)
    encoded, skipped = [], []
    for w in windows:
        try:
            fld = encode_window(w.values, enc, cfg.seed, w.start_index)
        except (DegenerateWindowError, DomainError) as exc:
            log.warning("%s/%s: skipping window %d: %s", src.name, enc.kind, w.start_index, exc)
            skipped.append({"start_index": w.start_index, "reason": str(exc)})
            continue
        name = f"win_{w.start_index}"
        imaging.write_archive(fld, w.label, arch_dir / f"{name}.qgaf",
                              {"encoder": enc.kind, **prov})
        if cfg.imaging.export_pgm or cfg.imaging.export_png:
            img = imaging.field_to_gray(fld, cfg.imaging.ranges[fld.kind], w.label)
            img.meta.update(prov)
            if cfg.imaging.export_pgm:
                imaging.write_pgm(img, img_dir / f"{name}.pgm")
            if cfg.imaging.export_png:
                imaging.write_png(img, img_dir / f"{name}.png")
        encoded.append(w)
    manifest = {
        "stock": src.name,
        "encoder": enc.kind,
        "count": len(encoded),
        "skipped": skipped,
        "label_mode": cfg.window.label_mode,
        "window": {"window_size": cfg.window.window_size, "stride": cfg.window.stride,
                   "horizon": cfg.window.horizon},
        "windows_digest": windows_digest(encoded),
        "files": [f"win_{w.start_index}.qgaf" for w in encoded],
        "provenance": prov,
    }
    if enc.quantum:
        manifest["qgaf"] = {"shots": enc.shots, "sign_mode": enc.sign_mode, "exact": enc.exact}
    else:
        manifest["normalization"] = enc.normalization
    write_json(manifest, arch_dir / "manifest.json")
    log.info("%s/%s: %d archives, %d skipped", src.name, enc.kind, len(encoded), len(skipped))
    return manifest


def load_archives(archive_dir, expected_size: int | None = None):
    """Archives sorted by window start: (matrices, labels, starts, kind)."""
    archive_dir = Path(archive_dir)
    if not archive_dir.is_dir():
        raise ValidationError(f"{archive_dir}: archive directory does not exist")
    paths = list(archive_dir.glob("win_*.qgaf"))
    if not paths:
        raise ValidationError(f"{archive_dir}: no win_*.qgaf archives found")
    paths.sort(key=lambda p: int(p.stem.split("_", 1)[1]))
    mats, labels, starts, kinds = [], [], [], set()
    for p in paths:
        fld, label = imaging.read_archive(p, expected_size)
        mats.append(fld.matrix)
        labels.append(label)
        starts.append(fld.source_window_start)
        kinds.add(fld.kind)
    if len(kinds) != 1:
        raise ValidationError(f"{archive_dir}: mixed field kinds {sorted(kinds)}")
    return np.stack(mats), np.array(labels, dtype=np.float64), starts, kinds.pop()


def _folds_digest(folds) -> str:
    h = hashlib.sha256()
    for f in folds:
        h.update(np.asarray(f, dtype="<i8").tobytes())
        h.update(b"|")
    return h.hexdigest()


def train_archives(cfg: PipelineConfig, archive_dir, out_dir=None) -> dict:
    archive_dir = Path(archive_dir)
    out_dir = Path(out_dir) if out_dir is not None else archive_dir.parent / "train"
    mats, labels, starts, kind = load_archives(archive_dir, cfg.window.window_size)
    manifest_path = archive_dir / "manifest.json"
    digest = None
    encoder = kind.lower()
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        digest = manifest.get("windows_digest")
        encoder = manifest.get("encoder", encoder)
    x = prepare_inputs(mats, kind)
    scaling = "identity" if kind == "QGASF" and mats.min() >= 0 else "(v+1)/2"
    out_dir.mkdir(parents=True, exist_ok=True)

    def progress(k, rep):
        log.info("%s fold %d: val MAE %.5f, MSE %.6f", encoder, k, rep.final_mae, rep.final_mse)

    cv = cross_validate(x, labels, cfg.train, progress)
    prov = {**provenance(cfg), "kernel_backend": kernels.BACKEND}
    for k, (rep, model, state) in enumerate(zip(cv.reports, cv.models, cv.states)):
        write_fold_csv(rep, out_dir / f"fold_{k}.csv")
        save_checkpoint(model, state, out_dir / f"fold_{k}.qcnn", extra={"fold": k, **prov})
    n_epochs = cfg.train.epochs
    curves = {
        "train_loss": [float(np.mean([r.epochs[e].train_loss for r in cv.reports])) for e in range(n_epochs)],
        "val_loss": [float(np.mean([r.epochs[e].val_loss for r in cv.reports])) for e in range(n_epochs)],
    }
    metrics = {
        "encoder": encoder,
        "kind": kind,
        "n_samples": len(labels),
        "window_starts": starts,
        "windows_digest": digest,
        "input_scaling": scaling,
        "train": asdict(cfg.train),
        "fold_mode": "contiguous" if cfg.train.contiguous_folds else "shuffled",
        "folds_digest": _folds_digest(cv.folds),
        "folds": [r.to_dict() for r in cv.reports],
        "aggregate": {"mae": cv.mae, "mse": cv.mse},
        "curves": curves,
        "provenance": prov,
    }
    write_json(metrics, out_dir / "metrics.json")
    return metrics


def compare(cfg: PipelineConfig) -> ComparisonReport:
    """Run both encoders on identical windows and splits, then write the report."""
    encoders = list(cfg.compare_encoders)
    if len(set(encoders)) != 2:
        raise ValidationError(f"compare needs two distinct encoders, got {encoders}")
    if not cfg.sources:
        raise ValidationError("config has no data sources")
    arms: dict[str, dict[str, dict]] = {}
    for src in cfg.sources:
        returns = ingest(cfg, src)[0]
        windows = make_windows(returns, cfg.window)
        keep = []
        for w in windows:
            issues = [window_issue(w.values, cfg.with_encoder(e).encoder) for e in encoders]
            if any(issues):
                log.warning("%s: window %d dropped from both arms: %s", src.name, w.start_index,
                            "; ".join(i for i in issues if i))
                continue
            keep.append(w)
        arms[src.name] = {}
        digests = set()
        for e in encoders:
            arm_cfg = cfg.with_encoder(e)
            manifest = encode(arm_cfg, src, keep)
            if manifest["skipped"]:
                raise ValidationError(f"{src.name}/{e}: encoder skipped windows after pre-filtering")
            digests.add(manifest["windows_digest"])
            arms[src.name][e] = train_archives(arm_cfg, encoder_dir(arm_cfg, src) / "archives")
        if len(digests) != 1:
            raise ValidationError(f"{src.name}: encoders consumed different windows")
    report = build_report(arms, encoders)
    report.provenance = {"run": provenance(cfg), "stocks": report.provenance,
                         "qgaf": {"shots": cfg.encoder.shots, "sign_mode": cfg.encoder.sign_mode,
                                  "exact": cfg.encoder.exact}}
    write_comparison(report, arms, Path(cfg.out) / "comparison", provenance(cfg))
    return report


def write_comparison(report: ComparisonReport, arms: dict, out_dir: Path, prov: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    write_json(report.to_dict(), out_dir / "comparison.json")
    report.write_table_csv(out_dir / "table.csv")
    report.write_reductions_csv(out_dir / "reductions.csv")
    (out_dir / "table.md").write_text(report.to_markdown(), encoding="utf-8")
    note = f"config_hash={prov['config_hash']} seed={prov['seed']}"
    for stock, by_enc in arms.items():
        for enc in report.encoders:
            write_curves_csv(by_enc[enc]["curves"], out_dir / f"curves_{stock}_{enc}.csv")
        for which, label in (("train_loss", "train"), ("val_loss", "validation")):
            series = {enc.upper(): by_enc[enc]["curves"][which] for enc in report.encoders}
            loss_kind = by_enc[report.encoders[0]]["train"]["loss"]
            svg = svg_line_plot(series, f"{stock}: {label} {loss_kind} loss", loss_kind, comment=note)
            (out_dir / f"loss_{label}_{stock}.svg").write_text(svg, encoding="utf-8")
