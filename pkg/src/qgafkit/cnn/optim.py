"""Adam with bias correction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import TrainingError
from .model import PARAM_NAMES, CnnModel


@dataclass(frozen=True)
class AdamConfig:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass
class AdamState:
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0

    @classmethod
    def for_model(cls, model: CnnModel) -> "AdamState":
        return cls({n: np.zeros_like(p) for n, p in model.params.items()},
                   {n: np.zeros_like(p) for n, p in model.params.items()}, 0)

    def copy(self) -> "AdamState":
        return AdamState({n: a.copy() for n, a in self.m.items()},
                         {n: a.copy() for n, a in self.v.items()}, self.step)


def adam_step(model: CnnModel, grads: dict[str, np.ndarray], state: AdamState,
              cfg: AdamConfig = AdamConfig()) -> tuple[CnnModel, AdamState]:
    """Update ``model`` and ``state`` in place; both are returned for chaining."""
    for name in PARAM_NAMES:
        if not np.all(np.isfinite(grads[name])):
            bad = int(np.count_nonzero(~np.isfinite(grads[name])))
            raise TrainingError(f"non-finite gradient for {name} ({bad} entries) at step {state.step + 1}")
    if not state.m:
        state.m = {n: np.zeros_like(p) for n, p in model.params.items()}
        state.v = {n: np.zeros_like(p) for n, p in model.params.items()}
    state.step += 1
    t = state.step
    c1 = 1.0 - cfg.beta1 ** t
    c2 = 1.0 - cfg.beta2 ** t
    for name in PARAM_NAMES:
        g = grads[name]
        m = state.m[name]
        v = state.v[name]
        m *= cfg.beta1
        m += (1.0 - cfg.beta1) * g
        v *= cfg.beta2
        v += (1.0 - cfg.beta2) * (g * g)
        model.params[name] -= cfg.lr * (m / c1) / (np.sqrt(v / c2) + cfg.eps)
    return model, state
