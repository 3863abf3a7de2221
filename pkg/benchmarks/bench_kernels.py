#!/usr/bin/env python3
"""Benchmark the hot kernels: numba-compiled vs pure-numpy/Python paths.

Run with numba active (default), or set PRECS_NO_NUMBA=1 to confirm the
fallback timings. The compiled path is warmed up before timing so JIT
compilation is not counted.
"""

import time

import numpy as np

from precs import _kernels


def timeit(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_husimi(n=256, n_times=200):
    xs = np.linspace(-8, 8, n)
    re = np.repeat(xs, n)
    im = np.tile(xs, n)
    centers = np.exp(1j * np.linspace(0, 2 * np.pi, n_times))

    def run(kernel):
        acc = 0.0
        for z in centers:
            acc += kernel(re, im, z.real, z.imag)[0]
        return acc

    run(_kernels.plane_husimi)  # warm-up / compile
    t_sel = timeit(run, _kernels.plane_husimi)
    t_np = timeit(run, _kernels.plane_husimi_numpy)
    return t_sel, t_np, n * n * n_times


def bench_sphere(n=128, n_times=200, two_j=20):
    theta = np.repeat((np.arange(n) + 0.5) * np.pi / n, n)
    phi = np.tile(np.arange(n) * 2 * np.pi / n, n)
    nx, ny, nz = np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)

    def run(kernel):
        acc = 0.0
        for t in np.linspace(0, np.pi, n_times):
            acc += kernel(nx, ny, nz, np.sin(t), 0.0, -np.cos(t), two_j)[0]
        return acc

    run(_kernels.sphere_husimi)
    t_sel = timeit(run, _kernels.sphere_husimi)
    t_np = timeit(run, _kernels.sphere_husimi_numpy)
    return t_sel, t_np, n * n * n_times


def bench_rk4(n_steps=200_000):
    ts = np.linspace(0.0, 2 * np.pi, n_steps)
    _kernels.rk4_plane(1.0, 2.0, ts)
    t_plane = timeit(_kernels.rk4_plane, 1.0, 2.0, ts)
    _kernels.rk4_sphere(1.0, 0.0, 1.0, ts)
    t_sphere = timeit(_kernels.rk4_sphere, 1.0, 0.0, 1.0, ts)
    t_plane_py = timeit(_kernels._rk4_plane_loop, 1.0, 2.0, ts[:20_000]) * (n_steps / 20_000)
    t_sphere_py = timeit(_kernels._rk4_sphere_loop, 1.0, 0.0, 1.0, ts[:20_000]) * (n_steps / 20_000)
    return (t_plane, t_plane_py), (t_sphere, t_sphere_py), n_steps


def bench_components(n=256):
    rng = np.random.default_rng(7)
    mask = (rng.random((n, n)) > 0.55).astype(np.uint8)
    _kernels.count_components(mask, False)
    t_sel = timeit(_kernels.count_components, mask, False, repeat=3)
    t_py = timeit(_kernels._count_components_loop, mask, False, repeat=1)
    return t_sel, t_py, n * n


def main():
    mode = "numba" if _kernels.NUMBA_ENABLED else "fallback (PRECS_NO_NUMBA or no numba)"
    print(f"kernel path: {mode}")
    print(f"{'kernel':24s} {'selected':>12s} {'reference':>12s} {'speedup':>8s}  work")

    t_sel, t_np, work = bench_husimi()
    print(f"{'plane_husimi':24s} {t_sel*1e3:10.1f} ms {t_np*1e3:10.1f} ms {t_np/t_sel:7.1f}x  {work:.2e} cells")

    t_sel, t_np, work = bench_sphere()
    print(f"{'sphere_husimi':24s} {t_sel*1e3:10.1f} ms {t_np*1e3:10.1f} ms {t_np/t_sel:7.1f}x  {work:.2e} cells")

    (tp, tppy), (tsph, tsphpy), steps = bench_rk4()
    print(f"{'rk4_plane':24s} {tp*1e3:10.1f} ms {tppy*1e3:10.1f} ms {tppy/tp:7.1f}x  {steps:.2e} steps")
    print(f"{'rk4_sphere':24s} {tsph*1e3:10.1f} ms {tsphpy*1e3:10.1f} ms {tsphpy/tsph:7.1f}x  {steps:.2e} steps")

    t_sel, t_py, work = bench_components()
    print(f"{'count_components':24s} {t_sel*1e3:10.1f} ms {t_py*1e3:10.1f} ms {t_py/t_sel:7.1f}x  {work:.2e} cells")

    print("\nreference = pure numpy (husimi) or plain-Python loop (rk4, components)")


if __name__ == "__main__":
    main()
