"""Hot numeric kernels, compiled with numba when available.

Every kernel has a pure-numpy (or plain-Python) twin so the package works
without a JIT. Selection happens once at import time:

* ``PRECS_NO_NUMBA=1`` in the environment forces the fallback path,
* a missing or broken numba install falls back silently.

``benchmarks/bench_kernels.py`` compares the two paths. Kernels must stay
deterministic: no ``fastmath``, no parallel reductions, so results do not
depend on thread count.
"""

from __future__ import annotations

import math
import os

import numpy as np


def _numba_disabled_by_env() -> bool:
    return os.environ.get("PRECS_NO_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")


_numba = None
if not _numba_disabled_by_env():
    try:
        import numba as _numba
    except ImportError:  # pragma: no cover - exercised via env flag instead
        _numba = None

NUMBA_ENABLED = _numba is not None


# ---------------------------------------------------------------------------
# pure-numpy implementations (always importable, used by the benchmark)
# ---------------------------------------------------------------------------

def plane_husimi_numpy(re, im, zre, zim):
    """exp(-|w - z|^2) per cell, w = re + i*im."""
    return np.exp(-((re - zre) ** 2 + (im - zim) ** 2))


def sphere_husimi_numpy(nx, ny, nz, bx, by, bz, two_j):
    """((1 + n.b)/2)^(2J) per cell; clipped so rounding never leaves [0, 1]."""
    base = 0.5 * (1.0 + nx * bx + ny * by + nz * bz)
    np.clip(base, 0.0, 1.0, out=base)
    return base ** two_j


# ---------------------------------------------------------------------------
# loop kernels (njit-compiled when numba is on; run as plain Python otherwise)
# ---------------------------------------------------------------------------

def _plane_husimi_loop(re, im, zre, zim):
    n = re.shape[0]
    out = np.empty(n, np.float64)
    for i in range(n):
        dx = re[i] - zre
        dy = im[i] - zim
        out[i] = math.exp(-(dx * dx + dy * dy))
    return out


def _sphere_husimi_loop(nx, ny, nz, bx, by, bz, two_j):
    n = nx.shape[0]
    out = np.empty(n, np.float64)
    for i in range(n):
        base = 0.5 * (1.0 + nx[i] * bx + ny[i] * by + nz[i] * bz)
        if base < 0.0:
            base = 0.0
        elif base > 1.0:
            base = 1.0
        out[i] = base ** two_j
    return out


def _rk4_plane_loop(nu, w, ts):
    """RK4 for i z' = nu z + w from z(0) = 0, one step per grid interval."""
    n = ts.shape[0]
    zs = np.empty(n, np.complex128)
    z = 0.0 + 0.0j
    zs[0] = z
    for k in range(n - 1):
        h = ts[k + 1] - ts[k]
        k1 = -1j * (nu * z + w)
        k2 = -1j * (nu * (z + 0.5 * h * k1) + w)
        k3 = -1j * (nu * (z + 0.5 * h * k2) + w)
        k4 = -1j * (nu * (z + h * k3) + w)
        z = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        zs[k + 1] = z
    return zs


def _rk4_sphere_loop(bx, by, bz, ts):
    """RK4 for n' = B x n from the south pole, renormalized each step."""
    n = ts.shape[0]
    out = np.empty((n, 3), np.float64)
    x, y, z = 0.0, 0.0, -1.0
    out[0, 0] = x
    out[0, 1] = y
    out[0, 2] = z
    for k in range(n - 1):
        h = ts[k + 1] - ts[k]
        k1x = by * z - bz * y
        k1y = bz * x - bx * z
        k1z = bx * y - by * x
        ax, ay, az = x + 0.5 * h * k1x, y + 0.5 * h * k1y, z + 0.5 * h * k1z
        k2x = by * az - bz * ay
        k2y = bz * ax - bx * az
        k2z = bx * ay - by * ax
        ax, ay, az = x + 0.5 * h * k2x, y + 0.5 * h * k2y, z + 0.5 * h * k2z
        k3x = by * az - bz * ay
        k3y = bz * ax - bx * az
        k3z = bx * ay - by * ax
        ax, ay, az = x + h * k3x, y + h * k3y, z + h * k3z
        k4x = by * az - bz * ay
        k4y = bz * ax - bx * az
        k4z = bx * ay - by * ax
        x = x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        y = y + (h / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        z = z + (h / 6.0) * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
        inv = 1.0 / math.sqrt(x * x + y * y + z * z)
        x *= inv
        y *= inv
        z *= inv
        out[k + 1, 0] = x
        out[k + 1, 1] = y
        out[k + 1, 2] = z
    return out


def _count_components_loop(mask, wrap_cols):
    """Connected components of a 2D boolean mask, 4-neighbor adjacency.

    ``wrap_cols`` joins column 0 to column n2-1 (azimuthal wrap on the sphere).
    """
    n1, n2 = mask.shape
    seen = np.zeros(n1 * n2, np.uint8)
    stack = np.empty(n1 * n2, np.int64)
    count = 0
    for i0 in range(n1):
        for j0 in range(n2):
            start = i0 * n2 + j0
            if mask[i0, j0] == 0 or seen[start] == 1:
                continue
            count += 1
            seen[start] = 1
            stack[0] = start
            sp = 1
            while sp > 0:
                sp -= 1
                cur = stack[sp]
                ci = cur // n2
                cj = cur - ci * n2
                if ci > 0 and mask[ci - 1, cj] != 0 and seen[cur - n2] == 0:
                    seen[cur - n2] = 1
                    stack[sp] = cur - n2
                    sp += 1
                if ci < n1 - 1 and mask[ci + 1, cj] != 0 and seen[cur + n2] == 0:
                    seen[cur + n2] = 1
                    stack[sp] = cur + n2
                    sp += 1
                jl = cj - 1
                if jl < 0 and wrap_cols:
                    jl = n2 - 1
                if jl >= 0 and mask[ci, jl] != 0 and seen[ci * n2 + jl] == 0:
                    seen[ci * n2 + jl] = 1
                    stack[sp] = ci * n2 + jl
                    sp += 1
                jr = cj + 1
                if jr > n2 - 1:
                    jr = 0 if wrap_cols else -1
                if jr >= 0 and mask[ci, jr] != 0 and seen[ci * n2 + jr] == 0:
                    seen[ci * n2 + jr] = 1
                    stack[sp] = ci * n2 + jr
                    sp += 1
    return count


if NUMBA_ENABLED:
    _njit = _numba.njit(cache=False)
    plane_husimi = _njit(_plane_husimi_loop)
    sphere_husimi = _njit(_sphere_husimi_loop)
    rk4_plane = _njit(_rk4_plane_loop)
    rk4_sphere = _njit(_rk4_sphere_loop)
    count_components = _njit(_count_components_loop)
else:
    plane_husimi = plane_husimi_numpy
    sphere_husimi = sphere_husimi_numpy
    rk4_plane = _rk4_plane_loop
    rk4_sphere = _rk4_sphere_loop
    count_components = _count_components_loop
