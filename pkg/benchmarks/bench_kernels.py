"""Timing comparison of the numba kernels against their numpy fallbacks.

Run from the repository root:

    python3 benchmarks/bench_kernels.py

The two hot kernels are the batched 1-D convexification passes of the
log-coordinate envelope solver and the disc-average Bellman sweep of the
4-D grid oracle.  Both implementations produce identical results (up to
floating-point noise); this script reports the speedup numba buys.
"""

import time

import numpy as np

from plurilab._accel import (
    HAS_NUMBA,
    _envelope_pass_py,
    _perron_sweep_py,
    backend_name,
)

if HAS_NUMBA:
    from plurilab._accel import _envelope_pass_nb, _perron_sweep_nb


def time_call(fn, *args, repeats=3):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_envelope(n=801):
    rng = np.random.default_rng(0)
    base = rng.standard_normal((n, n)) + np.add.outer(
        np.linspace(0, 1, n) ** 2, np.linspace(0, 1, n) ** 2
    )
    rows = []
    for code in range(4):
        t_py = time_call(lambda: _envelope_pass_py(base.copy(), code))
        if HAS_NUMBA:
            _envelope_pass_nb(base.copy(), code)  # compile
            t_nb = time_call(lambda: _envelope_pass_nb(base.copy(), code))
            A = base.copy()
            _envelope_pass_nb(A, code)
            B = base.copy()
            _envelope_pass_py(B, code)
            dev = float(np.max(np.abs(A - B)))
        else:
            t_nb, dev = float("nan"), float("nan")
        rows.append((f"envelope pass code {code} ({n}x{n})", t_py, t_nb, dev))
    return rows


def bench_perron(points=11):
    rng = np.random.default_rng(1)
    shape = np.array([points] * 4, dtype=np.int64)
    u = rng.standard_normal(points**4)
    lo = np.full(4, -1.0)
    h = np.full(4, 2.0 / (points - 1))
    nodes = rng.uniform(-0.5, 0.5, size=(points**3, 4))
    offsets = 0.2 * rng.standard_normal((64, 10, 4))
    t_py = time_call(lambda: _perron_sweep_py(u, tuple(shape), lo, h, nodes, offsets))
    if HAS_NUMBA:
        _perron_sweep_nb(u, shape, lo, h, nodes, offsets)  # compile
        t_nb = time_call(lambda: _perron_sweep_nb(u, shape, lo, h, nodes, offsets))
        dev = float(
            np.max(
                np.abs(
                    _perron_sweep_nb(u, shape, lo, h, nodes, offsets)
                    - _perron_sweep_py(u, tuple(shape), lo, h, nodes, offsets)
                )
            )
        )
    else:
        t_nb, dev = float("nan"), float("nan")
    return [(f"disc-average sweep ({points}^4 grid, {len(nodes)} nodes)", t_py, t_nb, dev)]


def main():
    print(f"active backend: {backend_name()}  (numba available: {HAS_NUMBA})")
    print(f"{'kernel':<44} {'numpy [s]':>10} {'numba [s]':>10} {'speedup':>8} {'max|diff|':>10}")
    for name, t_py, t_nb, dev in bench_envelope() + bench_perron():
        speed = t_py / t_nb if t_nb == t_nb and t_nb > 0 else float("nan")
        print(f"{name:<44} {t_py:>10.4f} {t_nb:>10.4f} {speed:>8.1f} {dev:>10.2e}")


if __name__ == "__main__":
    main()
