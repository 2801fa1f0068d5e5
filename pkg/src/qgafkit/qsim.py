"""Single-qubit statevector simulator restricted to Ry rotations.

Ry rotations applied to ``|0>`` keep both amplitudes real, so a state is just
a pair of floats. Measurement is simulated with one binomial draw per circuit
from a random stream keyed by ``(global_seed, window_id, i, j)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

DEFAULT_SHOTS = 1024


@dataclass(frozen=True)
class QubitState:
    amp0: float
    amp1: float

    @property
    def norm2(self) -> float:
        return self.amp0 * self.amp0 + self.amp1 * self.amp1


ZERO = QubitState(1.0, 0.0)
ONE = QubitState(0.0, 1.0)


@dataclass(frozen=True)
class ShotCounts:
    zeros: int
    ones: int

    @property
    def shots(self) -> int:
        return self.zeros + self.ones


@dataclass(frozen=True)
class RngSeed:
    """Global seed plus the stream coordinates of one circuit."""

    global_seed: int = 0
    window_id: int = 0
    i: int = 0
    j: int = 0

    def generator(self) -> np.random.Generator:
        # spawn_key gives statistically independent streams per coordinate
        ss = np.random.SeedSequence(
            self.global_seed & 0xFFFFFFFFFFFFFFFF,
            spawn_key=(self.window_id, self.i, self.j),
        )
        return np.random.Generator(np.random.PCG64(ss))


def ry_apply(state: QubitState, theta: float) -> QubitState:
    """Apply ``Ry(theta) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]]``."""
    if not math.isfinite(theta):
        raise ValidationError(f"rotation angle must be finite, got {theta}")
    c = math.cos(theta / 2.0)
    s = math.sin(theta / 2.0)
    return QubitState(c * state.amp0 - s * state.amp1, s * state.amp0 + c * state.amp1)


def prob_zero(state: QubitState) -> float:
    return state.amp0 * state.amp0


def prob_one(state: QubitState) -> float:
    return state.amp1 * state.amp1


def sample_shots(state: QubitState, shots: int = DEFAULT_SHOTS, seed: RngSeed = RngSeed()) -> ShotCounts:
    """Measure ``state`` ``shots`` times in the computational basis.

    The number of ``|1>`` outcomes is drawn as ``Binomial(shots, amp1**2)``;
    drawing on the ``|1>`` side keeps the exactly-zero amplitude cases
    (``a == b`` in a difference circuit) exactly deterministic.
    """
    shots = int(shots)
    if shots < 1:
        raise ValidationError("shots must be >= 1")
    p1 = min(max(prob_one(state), 0.0), 1.0)
    if p1 == 0.0:
        return ShotCounts(shots, 0)
    if p1 == 1.0:
        return ShotCounts(0, shots)
    ones = int(seed.generator().binomial(shots, p1))
    return ShotCounts(shots - ones, ones)
