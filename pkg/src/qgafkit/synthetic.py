"""Seeded synthetic price series for demos and end-to-end tests.

Returns follow a regime-switching model: every regime has its own drift and
volatility, so 30-day interval returns vary systematically with the window's
mean and dispersion.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

DRIFTS = (-0.004, -0.001, 0.001, 0.004)
VOLS = (0.008, 0.015, 0.025)


def synthetic_returns(n: int = 2000, seed: int = 0, regime_length: int = 40) -> np.ndarray:
    rng = np.random.default_rng(seed)
    out = np.empty(n)
    pos = 0
    while pos < n:
        length = int(rng.integers(regime_length // 2, 2 * regime_length))
        mu = DRIFTS[rng.integers(len(DRIFTS))]
        sigma = VOLS[rng.integers(len(VOLS))]
        end = min(n, pos + length)
        out[pos:end] = mu + sigma * rng.standard_normal(end - pos)
        pos = end
    return np.clip(out, -0.2, 0.2)


def synthetic_prices(n_returns: int = 2000, seed: int = 0, start_price: float = 100.0,
                     start_date: str = "2010-01-04") -> tuple[list[str], np.ndarray]:
    """``n_returns + 1`` business-day dates and closes."""
    r = synthetic_returns(n_returns, seed)
    closes = start_price * np.concatenate([[1.0], np.cumprod(1.0 + r)])
    days = np.busday_offset(np.datetime64(start_date), np.arange(n_returns + 1), roll="forward")
    return [str(d) for d in days], closes


def write_price_csv(path, n_returns: int = 2000, seed: int = 0, gaps=()) -> Path:
    """Write a ``date,close`` CSV; row indices in ``gaps`` get an empty close."""
    path = Path(path)
    dates, closes = synthetic_prices(n_returns, seed)
    gaps = set(gaps)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("date,close\n")
        for k, (d, c) in enumerate(zip(dates, closes)):
            fh.write(f"{d},{'' if k in gaps else repr(float(c))}\n")
    return path
