"""Encoder comparison tables, loss-curve CSVs and SVG line plots."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

from .errors import ValidationError

METRICS = ("mae", "mse")


def percent_reduction(baseline: float, candidate: float) -> float:
    """``100 * (baseline - candidate) / baseline``."""
    if baseline == 0:
        raise ValidationError("baseline metric is zero; reduction undefined")
    return 100.0 * (baseline - candidate) / baseline


@dataclass
class ComparisonReport:
    """Per-stock, per-encoder MAE/MSE with relative reductions.

    ``encoders[0]`` is the baseline the reductions are measured against.
    """

    stocks: list[str]
    encoders: list[str]
    metrics: dict[str, dict[str, dict[str, float]]]
    provenance: dict = field(default_factory=dict)

    def reductions(self) -> dict[str, dict[str, float]]:
        base, cand = self.encoders
        return {
            s: {m: percent_reduction(self.metrics[s][base][m], self.metrics[s][cand][m]) for m in METRICS}
            for s in self.stocks
        }

    def average_reductions(self) -> dict[str, float]:
        red = self.reductions()
        return {m: sum(r[m] for r in red.values()) / len(red) for m in METRICS}

    def header_rows(self) -> list[list[str]]:
        top = [""]
        sub = [""]
        for s in self.stocks:
            top += [s, ""]
            sub += ["MAE", "MSE"]
        return [top, sub]

    def rows(self) -> list[list]:
        out = []
        for enc in self.encoders:
            row = [enc.upper()]
            for s in self.stocks:
                row += [self.metrics[s][enc]["mae"], self.metrics[s][enc]["mse"]]
            out.append(row)
        return out

    def to_dict(self) -> dict:
        return {
            "encoders": self.encoders,
            "stocks": self.stocks,
            "metrics": self.metrics,
            "reductions_pct": self.reductions(),
            "average_reductions_pct": self.average_reductions(),
            "provenance": self.provenance,
        }

    def write_table_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["encoder"] + [f"{s} {m.upper()}" for s in self.stocks for m in METRICS])
            for row in self.rows():
                w.writerow([row[0]] + [repr(float(v)) for v in row[1:]])

    def write_reductions_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["stock", "mae_reduction_pct", "mse_reduction_pct"])
            for s, r in self.reductions().items():
                w.writerow([s, f"{r['mae']:.1f}", f"{r['mse']:.1f}"])

    def to_markdown(self, digits: int = 3) -> str:
        """Two header rows: stock names spanning an MAE/MSE pair, then the metric names."""
        top, sub = self.header_rows()
        lines = ["| " + " | ".join(top) + " |",
                 "|" + "---|" * len(top),
                 "| " + " | ".join(f"**{c}**" if c else "" for c in sub) + " |"]
        for row in self.rows():
            lines.append("| " + " | ".join([row[0]] + [f"{v:.{digits}f}" for v in row[1:]]) + " |")
        avg = self.average_reductions()
        lines.append("")
        lines.append(f"Average reduction ({self.encoders[1].upper()} vs {self.encoders[0].upper()}): "
                     f"MAE {avg['mae']:.1f}%, MSE {avg['mse']:.1f}%")
        return "\n".join(lines) + "\n"


def build_report(arms: dict[str, dict[str, dict]], encoders: list[str]) -> ComparisonReport:
    """Assemble a report from per-stock, per-encoder training metrics.

    Refuses to compare arms that did not see the same windows or the same
    cross-validation split.
    """
    metrics: dict[str, dict[str, dict[str, float]]] = {}
    provenance: dict = {}
    for stock, by_enc in arms.items():
        missing = [e for e in encoders if e not in by_enc]
        if missing:
            raise ValidationError(f"{stock}: no results for encoder(s) {missing}")
        first = by_enc[encoders[0]]
        for enc in encoders[1:]:
            other = by_enc[enc]
            if other["train"]["shuffle_seed"] != first["train"]["shuffle_seed"]:
                raise ValidationError(
                    f"{stock}: split seeds differ ({first['train']['shuffle_seed']} vs "
                    f"{other['train']['shuffle_seed']}); refusing to compare")
            if other["folds_digest"] != first["folds_digest"]:
                raise ValidationError(f"{stock}: cross-validation splits differ; refusing to compare")
            if other["windows_digest"] != first["windows_digest"]:
                raise ValidationError(f"{stock}: encoders saw different windows; refusing to compare")
        metrics[stock] = {e: dict(by_enc[e]["aggregate"]) for e in encoders}
        provenance[stock] = {
            e: {"windows_digest": by_enc[e]["windows_digest"],
                "folds_digest": by_enc[e]["folds_digest"],
                "fold_mode": by_enc[e]["fold_mode"],
                **by_enc[e]["provenance"]}
            for e in encoders
        }
    return ComparisonReport(sorted(metrics), list(encoders), metrics, provenance)


def write_curves_csv(curves: dict[str, list], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", "train_loss", "val_loss"])
        for k, (tr, va) in enumerate(zip(curves["train_loss"], curves["val_loss"]), start=1):
            w.writerow([k, repr(tr), repr(va)])


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def svg_line_plot(series: dict[str, list[float]], title: str, ylabel: str = "loss",
                  width: int = 640, height: int = 400, comment: str | None = None) -> str:
    """Minimal static line chart: axes, min/max tick labels, one polyline per series."""
    left, right, top, bottom = 70, 20, 40, 50
    pw, ph = width - left - right, height - top - bottom
    n = max(len(v) for v in series.values())
    values = [y for v in series.values() for y in v]
    lo, hi = min(values), max(values)
    if hi == lo:
        hi = lo + 1.0

    def sx(k):
        return left + (pw * k / max(n - 1, 1))

    def sy(y):
        return top + ph * (1.0 - (y - lo) / (hi - lo))

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}">']
    if comment:
        parts.append(f"<!-- {escape(comment)} -->")
    parts += [
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-family="sans-serif" '
        f'font-size="15">{escape(title)}</text>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
        f'<text x="{left - 6}" y="{top + 4}" text-anchor="end" font-family="sans-serif" font-size="11">{hi:.4g}</text>',
        f'<text x="{left - 6}" y="{top + ph + 4}" text-anchor="end" font-family="sans-serif" font-size="11">{lo:.4g}</text>',
        f'<text x="{left}" y="{top + ph + 18}" text-anchor="middle" font-family="sans-serif" font-size="11">1</text>',
        f'<text x="{left + pw}" y="{top + ph + 18}" text-anchor="middle" font-family="sans-serif" font-size="11">{n}</text>',
        f'<text x="{left + pw / 2:.1f}" y="{height - 10}" text-anchor="middle" font-family="sans-serif" font-size="12">epoch</text>',
        f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {top + ph / 2:.1f})">{escape(ylabel)}</text>',
    ]
    for k, (name, ys) in enumerate(series.items()):
        color = _COLORS[k % len(_COLORS)]
        pts = " ".join(f"{sx(i):.2f},{sy(y):.2f}" for i, y in enumerate(ys))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = top + 14 + 16 * k
        parts.append(f'<line x1="{left + pw - 110}" y1="{ly - 4}" x2="{left + pw - 90}" y2="{ly - 4}" '
                     f'stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{left + pw - 84}" y="{ly}" font-family="sans-serif" font-size="12">{escape(name)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")
