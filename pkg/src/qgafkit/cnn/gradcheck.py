"""Central finite-difference check of the analytic gradients.

Only the forward pass is used to build the numerical gradient. A parameter
is skipped when nudging it by ``+-h`` flips any ReLU, max-pool or
absolute-value branch, because the loss is not differentiable there.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import PARAM_NAMES, CnnModel, activation_pattern, backward, forward, loss

REL_FLOOR = 1e-8


@dataclass
class GradCheckResult:
    max_rel_error: float
    checked: int
    skipped: int
    per_param: dict[str, float] = field(default_factory=dict)
    worst: tuple[str, tuple[int, ...]] | None = None


def _same(p1, p2) -> bool:
    return all(np.array_equal(a, b) for a, b in zip(p1, p2))


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(abs(analytic) + abs(numeric), REL_FLOOR)


def check_gradients(model: CnnModel, x, y, kind: str = "MSE", h: float = 1e-5) -> GradCheckResult:
    """Compare ``backward`` against ``(L(p + h) - L(p - h)) / 2h`` for every parameter."""
    _, grads = backward(model, x, y, kind)
    probe = model.copy()
    base = activation_pattern(probe, x, y if kind.upper() == "MAE" else None)
    targets = None if kind.upper() == "MSE" else y
    result = GradCheckResult(0.0, 0, 0)
    for name in PARAM_NAMES:
        arr = probe.params[name]
        worst = 0.0
        for idx in np.ndindex(arr.shape):
            orig = arr[idx]
            arr[idx] = orig + h
            up = loss(forward(probe, x), y, kind)[0]
            pat_up = activation_pattern(probe, x, targets)
            arr[idx] = orig - h
            down = loss(forward(probe, x), y, kind)[0]
            pat_down = activation_pattern(probe, x, targets)
            arr[idx] = orig
            if not (_same(base, pat_up) and _same(base, pat_down)):
                result.skipped += 1
                continue
            err = relative_error(float(grads[name][idx]), (up - down) / (2.0 * h))
            result.checked += 1
            if err > worst:
                worst = err
            if err > result.max_rel_error:
                result.max_rel_error = err
                result.worst = (name, idx)
        result.per_param[name] = worst
    return result
