"""Time the numba and numpy kernel backends on qutrit and qubit lattices.

    python3 benchmarks/bench_kernels.py [--steps 10 20 40] [--repeat 50]

Each kernel is warmed up once per backend (so numba compilation is not
counted) and the outputs of the two backends are checked against each other.
"""

import argparse
import time

import numpy as np

from qspforge import kernels
from qspforge._accel import NUMBA_AVAILABLE
from qspforge.linalg import haar_unitary
from qspforge.multivariate import W_SHIFTS


def best_of(func, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        func()
        times.append(time.perf_counter() - t0)
    return min(times)


def workload(steps, seed=0):
    rng = np.random.default_rng(seed)
    ops = np.array([haar_unitary(3, rng) for _ in range(steps + 1)])
    shifts = np.ascontiguousarray(np.broadcast_to(W_SHIFTS, (steps, 3, 2)))
    return ops, shifts


def run(steps_list, repeat):
    backends = ["numpy"] + (["numba"] if NUMBA_AVAILABLE else [])
    print(f"{'kernel':<26}{'steps':>6}" + "".join(f"{b + ' (ms)':>14}" for b in backends) + f"{'speedup':>10}")
    for steps in steps_list:
        ops, shifts = workload(steps)
        lat = kernels.propagate(ops, shifts, backend="numpy")
        u = ops[-1]
        cases = {
            "propagate": lambda b: kernels.propagate(ops, shifts, backend=b),
            "autocorrelation_residual": lambda b: kernels.autocorrelation_residual(lat, backend=b),
            "lower": lambda b: kernels.lower(lat, u, W_SHIFTS, steps, backend=b),
        }
        for name, call in cases.items():
            results = {b: call(b) for b in backends}  # also warms up the jit
            if len(backends) == 2:
                a, b = results["numpy"], results["numba"]
                a, b = (a[0], b[0]) if isinstance(a, tuple) else (a, b)
                assert np.allclose(a, b, atol=1e-12), f"{name}: backends disagree"
            ms = {b: 1e3 * best_of(lambda: call(b), repeat) for b in backends}
            speed = f"{ms['numpy'] / ms['numba']:>9.1f}x" if "numba" in ms else f"{'-':>10}"
            print(f"{name:<26}{steps:>6}" + "".join(f"{ms[b]:>14.3f}" for b in backends) + speed)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, nargs="+", default=[10, 20, 40])
    parser.add_argument("--repeat", type=int, default=50)
    args = parser.parse_args()
    run(args.steps, args.repeat)


if __name__ == "__main__":
    main()
