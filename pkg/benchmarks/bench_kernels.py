"""Time the numpy and compiled kernel backends on the shapes training uses.

    python benchmarks/bench_kernels.py [--repeat 20] [--batch 32]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from qgafkit.cnn import kernels
from qgafkit.cnn.model import CnnModel, backward
from qgafkit.cnn.optim import AdamState, adam_step


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(batch, rng):
    x1 = rng.uniform(0, 1, (batch, 1, 30, 30))
    w1 = rng.normal(size=(8, 1, 3, 3))
    x2 = rng.uniform(0, 1, (batch, 8, 15, 15))
    w2 = rng.normal(size=(16, 8, 3, 3))
    d2 = rng.normal(size=(batch, 16, 15, 15))
    a1 = rng.normal(size=(batch, 8, 30, 30))
    model = CnnModel.initialize(0)
    y = rng.normal(1, 0.1, batch)
    state = AdamState.for_model(model)

    def step():
        _, g = backward(model, x1, y)
        adam_step(model, g, state)

    def k():
        return kernels.backend

    return {
        "conv1 forward": lambda: k().conv2d_forward(x1, w1, np.zeros(8), 1),
        "conv2 forward": lambda: k().conv2d_forward(x2, w2, np.zeros(16), 1),
        "conv2 backward": lambda: k().conv2d_backward(d2, x2, w2, 1),
        "maxpool forward": lambda: k().maxpool2_forward(a1),
        "train step": step,
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--batch", type=int, default=32)
    args = ap.parse_args(argv)
    names = ["python"] + (["native"] if kernels.native is not None else [])
    if len(names) == 1:
        print("native extension not built; timing the numpy backend only")
    previous = kernels.BACKEND
    results = {}
    try:
        for name in names:
            kernels.set_backend(name)
            for label, fn in cases(args.batch, np.random.default_rng(0)).items():
                results.setdefault(label, {})[name] = best_of(fn, args.repeat)
    finally:
        kernels.set_backend(previous)
    print(f"batch {args.batch}, best of {args.repeat} (ms)")
    print(f"{'kernel':<18}" + "".join(f"{n:>10}" for n in names) + ("   speedup" if len(names) > 1 else ""))
    for label, row in results.items():
        line = f"{label:<18}" + "".join(f"{row[n] * 1e3:>10.2f}" for n in names)
        if len(names) > 1:
            line += f"{row['python'] / row['native']:>9.2f}x"
        print(line)


if __name__ == "__main__":
    main()
