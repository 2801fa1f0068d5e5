"""Quantum Gramian angular fields estimated from simulated single-qubit circuits.

Raw returns are used directly as rotation angles. For a pixel ``(i, j)`` with
``a = x[i]`` and ``b = x[j]``:

* summation field: ``|0> -Ry(2a)-Ry(2b)-`` measure, ``P(0) = cos^2(a + b)``
* difference field: ``|0> -Ry(2a)-Ry(-2b)-`` measure, ``P(1) = sin^2(a - b)``

The square root of the estimated probability only gives the magnitude. In
``analytic`` sign mode the sign is taken from the inputs, which is exact as
long as the combined angle stays inside ``(-pi/2, pi/2)`` (daily returns are
far inside that range); outside it a :class:`DomainError` is raised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, ValidationError
from .gaf import AngularField
from .qsim import DEFAULT_SHOTS, ZERO, RngSeed, prob_one, prob_zero, ry_apply, sample_shots

SIGN_MODES = ("analytic", "positive")
HALF_PI = math.pi / 2.0


@dataclass(frozen=True)
class QgafConfig:
    shots: int = DEFAULT_SHOTS
    sign_mode: str = "analytic"
    seed: int = 0
    exact: bool = False

    def __post_init__(self):
        if self.shots < 1:
            raise ValidationError("shots must be >= 1")
        if self.sign_mode not in SIGN_MODES:
            raise ValidationError(f"sign_mode must be one of {SIGN_MODES}")


def exact_p_mode(cfg: QgafConfig) -> QgafConfig:
    """Same config, but every pixel uses the analytic probability (infinite shots)."""
    return replace(cfg, exact=True)


def _coords(cfg: QgafConfig, coords) -> RngSeed:
    window_id, i, j = coords
    return RngSeed(cfg.seed, int(window_id), int(i), int(j))


def qgasf_pixel(a: float, b: float, cfg: QgafConfig = QgafConfig(), coords=(0, 0, 0)) -> float:
    """Estimate ``cos(a + b)``."""
    if cfg.sign_mode == "analytic" and not abs(a + b) < HALF_PI:
        raise DomainError(f"|a + b| = {abs(a + b):.6g} >= pi/2: sign of cos(a + b) unrecoverable")
    state = ry_apply(ry_apply(ZERO, 2.0 * a), 2.0 * b)
    if cfg.exact:
        p = prob_zero(state)
    else:
        p = sample_shots(state, cfg.shots, _coords(cfg, coords)).zeros / cfg.shots
    return math.sqrt(p)


def qgadf_pixel(a: float, b: float, cfg: QgafConfig = QgafConfig(), coords=(0, 0, 0)) -> float:
    """Estimate ``sin(a - b)``."""
    if cfg.sign_mode == "analytic" and not abs(a - b) < HALF_PI:
        raise DomainError(f"|a - b| = {abs(a - b):.6g} >= pi/2: sign of sin(a - b) unrecoverable")
    state = ry_apply(ry_apply(ZERO, 2.0 * a), -2.0 * b)
    if cfg.exact:
        p = prob_one(state)
    else:
        p = sample_shots(state, cfg.shots, _coords(cfg, coords)).ones / cfg.shots
    mag = math.sqrt(p)
    if cfg.sign_mode == "analytic":
        if a > b:
            return mag
        if a < b:
            return -mag
        return 0.0 * mag
    return mag


def _image(pixel, kind: str, window, cfg: QgafConfig, window_id: int) -> AngularField:
    x = np.asarray(window, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise ValidationError("window must be 1-D with at least 2 values")
    if not np.all(np.isfinite(x)):
        raise ValidationError("window contains non-finite values")
    n = x.size
    vals = x.tolist()
    m = np.empty((n, n), dtype=np.float64)
    # full double loop: diagonal and both triangles are sampled independently
    for i in range(n):
        a = vals[i]
        for j in range(n):
            try:
                m[i, j] = pixel(a, vals[j], cfg, (window_id, i, j))
            except DomainError as exc:
                raise DomainError(f"window {window_id}, pixel ({i}, {j}): {exc}") from exc
    return AngularField(kind, m, window_id, {"shots": cfg.shots, "sign_mode": cfg.sign_mode,
                                             "exact": cfg.exact, "seed": cfg.seed})


def qgasf_image(window, cfg: QgafConfig = QgafConfig(), window_id: int = 0) -> AngularField:
    return _image(qgasf_pixel, "QGASF", window, cfg, window_id)


def qgadf_image(window, cfg: QgafConfig = QgafConfig(), window_id: int = 0) -> AngularField:
    return _image(qgadf_pixel, "QGADF", window, cfg, window_id)
