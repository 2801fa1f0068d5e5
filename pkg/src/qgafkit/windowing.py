"""Rolling windows over a return series and their regression labels."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ValidationError
from .marketdata import ReturnSeries, interval_return

LABEL_MODES = ("same_window", "next_horizon")


@dataclass(frozen=True)
class WindowConfig:
    window_size: int = 30
    stride: int = 10
    label_mode: str = "same_window"
    horizon: int = 30

    def __post_init__(self):
        if self.window_size < 2:
            raise ValidationError("window_size must be >= 2")
        if not 1 <= self.stride <= self.window_size:
            raise ValidationError("stride must be in [1, window_size]")
        if self.label_mode not in LABEL_MODES:
            raise ValidationError(f"label_mode must be one of {LABEL_MODES}")
        if self.horizon < 1:
            raise ValidationError("horizon must be >= 1")

    @property
    def overlap(self) -> int:
        return self.window_size - self.stride


class Window(NamedTuple):
    start_index: int
    values: np.ndarray


@dataclass(frozen=True)
class LabeledWindow:
    start_index: int
    values: np.ndarray
    label: float

    def __post_init__(self):
        if not np.isfinite(self.label):
            raise ValidationError(f"window {self.start_index}: label is not finite")


def _returns(series) -> np.ndarray:
    if isinstance(series, ReturnSeries):
        return series.returns
    return np.asarray(series, dtype=np.float64)


def segment(series, cfg: WindowConfig = WindowConfig()) -> list[Window]:
    """Cut complete windows starting at 0, stride, 2*stride, ...

    Incomplete tail windows are dropped.
    """
    r = _returns(series)
    n = len(r)
    if n < cfg.window_size:
        raise ValidationError(
            f"series of length {n} is shorter than window_size {cfg.window_size}"
        )
    count = (n - cfg.window_size) // cfg.stride + 1
    return [
        Window(k * cfg.stride, r[k * cfg.stride : k * cfg.stride + cfg.window_size].copy())
        for k in range(count)
    ]


def label_windows(series, windows: Sequence[Window], cfg: WindowConfig = WindowConfig()) -> list[LabeledWindow]:
    """Attach an interval-return label to every window.

    In ``next_horizon`` mode the label covers the ``horizon`` days right after
    the window; windows without a full horizon are dropped.
    """
    r = _returns(series)
    out = []
    for w in windows:
        if cfg.label_mode == "same_window":
            label = interval_return(w.values)
        else:
            lo = w.start_index + cfg.window_size
            hi = lo + cfg.horizon
            if hi > len(r):
                continue
            label = interval_return(r[lo:hi])
        out.append(LabeledWindow(w.start_index, w.values, label))
    return out


def make_windows(series, cfg: WindowConfig = WindowConfig()) -> list[LabeledWindow]:
    return label_windows(series, segment(series, cfg), cfg)


def windows_digest(windows: Sequence[LabeledWindow]) -> str:
    """SHA-256 over start indices, float64 values and labels, in order."""
    h = hashlib.sha256()
    for w in windows:
        h.update(int(w.start_index).to_bytes(8, "little", signed=True))
        h.update(np.ascontiguousarray(w.values, dtype="<f8").tobytes())
        h.update(np.float64(w.label).astype("<f8").tobytes())
    return h.hexdigest()
