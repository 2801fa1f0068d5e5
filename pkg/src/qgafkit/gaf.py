"""Classical Gramian angular fields (GASF / GADF).

Each field is computed two ways: from polar angles (``cos(phi_i + phi_j)``,
``sin(phi_i - phi_j)``) and from outer products of the normalized values and
their complements ``sqrt(1 - x**2)``. Both must agree to rounding error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import DegenerateWindowError, DomainError, ValidationError

KINDS = ("GASF", "GADF", "QGASF", "QGADF")
RANGE_TAGS = ("unit", "sym")
CLAMP_TOL = 1e-12

_BOUNDS = {"unit": (0.0, 1.0), "sym": (-1.0, 1.0)}


@dataclass(frozen=True)
class NormalizedSeries:
    values: np.ndarray
    range_tag: str

    def __post_init__(self):
        if self.range_tag not in RANGE_TAGS:
            raise ValidationError(f"range_tag must be one of {RANGE_TAGS}")
        values = np.asarray(self.values, dtype=np.float64)
        lo, hi = _BOUNDS[self.range_tag]
        if values.ndim != 1 or values.size == 0:
            raise ValidationError("normalized values must be a non-empty 1-D array")
        if np.any(values < lo - CLAMP_TOL) or np.any(values > hi + CLAMP_TOL):
            raise DomainError(f"values outside the {self.range_tag} range [{lo}, {hi}]")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class PolarSeries:
    phi: np.ndarray
    r: np.ndarray


@dataclass
class AngularField:
    """Square matrix tagged with the encoding that produced it."""

    kind: str
    matrix: np.ndarray
    source_window_start: int = 0
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"kind must be one of {KINDS}")
        m = np.asarray(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"field matrix must be square, got shape {m.shape}")
        self.matrix = m

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


def _window(x) -> tuple[np.ndarray, float, float]:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise ValidationError("window must be 1-D with at least 2 values")
    if not np.all(np.isfinite(x)):
        raise ValidationError("window contains non-finite values")
    lo, hi = float(x.min()), float(x.max())
    if hi <= lo:
        raise DegenerateWindowError("constant window: max == min, normalization undefined")
    return x, lo, hi


def normalize_unit(x) -> NormalizedSeries:
    """Min-max scale into [0, 1]."""
    x, lo, hi = _window(x)
    v = (x - lo) / (hi - lo)
    return NormalizedSeries(np.clip(v, 0.0, 1.0), "unit")


def normalize_sym(x) -> NormalizedSeries:
    """Min-max scale into [-1, 1] as ``((x - max) + (x - min)) / (max - min)``."""
    x, lo, hi = _window(x)
    v = ((x - hi) + (x - lo)) / (hi - lo)
    return NormalizedSeries(np.clip(v, -1.0, 1.0), "sym")


def normalize(x, range_tag: str = "sym") -> NormalizedSeries:
    if range_tag == "sym":
        return normalize_sym(x)
    if range_tag == "unit":
        return normalize_unit(x)
    raise ValidationError(f"range_tag must be one of {RANGE_TAGS}")


def _checked_values(ns: NormalizedSeries) -> np.ndarray:
    v = ns.values
    if np.any(np.abs(v) > 1.0 + CLAMP_TOL):
        raise DomainError("arccos argument outside [-1, 1]")
    return np.clip(v, -1.0, 1.0)


def to_polar(ns: NormalizedSeries) -> PolarSeries:
    """Angles ``arccos(x)`` and radii ``t / N`` with 1-based time steps."""
    v = _checked_values(ns)
    n = v.size
    return PolarSeries(np.arccos(v), np.arange(1, n + 1, dtype=np.float64) / n)


def gasf(ns: NormalizedSeries, start: int = 0) -> AngularField:
    phi = to_polar(ns).phi
    return AngularField("GASF", np.cos(np.add.outer(phi, phi)), start)


def gadf(ns: NormalizedSeries, start: int = 0) -> AngularField:
    phi = to_polar(ns).phi
    return AngularField("GADF", np.sin(np.subtract.outer(phi, phi)), start)


def gasf_matrix(ns: NormalizedSeries, start: int = 0) -> AngularField:
    x = _checked_values(ns)
    s = np.sqrt(1.0 - x * x)
    m = np.outer(x, x) - np.outer(s, s)
    return AngularField("GASF", np.clip(m, -1.0, 1.0), start)


def gadf_matrix(ns: NormalizedSeries, start: int = 0) -> AngularField:
    # entry (i, j) = sqrt(1 - x_i^2) x_j - x_i sqrt(1 - x_j^2)
    x = _checked_values(ns)
    s = np.sqrt(1.0 - x * x)
    m = np.outer(s, x) - np.outer(x, s)
    return AngularField("GADF", np.clip(m, -1.0, 1.0), start)


def encode_classical(values, kind: str = "GASF", range_tag: str = "sym", start: int = 0) -> AngularField:
    """Normalize a raw window and encode it as GASF or GADF."""
    ns = normalize(values, range_tag)
    kind = kind.upper()
    if kind == "GASF":
        return gasf(ns, start)
    if kind == "GADF":
        return gadf(ns, start)
    raise ValidationError(f"classical kind must be GASF or GADF, got {kind!r}")
