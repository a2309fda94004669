"""Compiled hot path for bulk generation, plus the seed-expansion mixer.

The per-draw seed material is the splitmix64 counter stream: 64-bit
word g of the global stream is mix64(key + GAMMA*g), where key is the
master seed and GAMMA is the splitmix64 increment (odd, so g -> key +
GAMMA*g is a permutation of counters).  Coefficient a of block i, side
s (u=0, v=1) in draw t uses the global word

    g = ((t*N + i)*2 + s)*k + a

truncated to its top w bits.  This scheme is random-access, so draws
and blocks can be computed independently and streams can be split by
index ranges.

The numba kernel below fuses expansion, Horner evaluation of the
family polynomials at the points 0..n-1, and the Box-Muller map.  It
must produce bit-identical output to the pure-Python reference path in
prg.prg_generate; tests enforce this.
"""

from __future__ import annotations

import math

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_M64 = 0xFFFFFFFFFFFFFFFF


def mix64_int(z: int) -> int:
    """splitmix64 finalizer on plain ints (reference path)."""
    z &= _M64
    z = ((z ^ (z >> 30)) * _MIX1) & _M64
    z = ((z ^ (z >> 27)) * _MIX2) & _M64
    return z ^ (z >> 31)


def mix64_np(z: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer, vectorized over uint64 arrays."""
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= np.uint64(_MIX1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(_MIX2)
    z ^= z >> np.uint64(31)
    return z


try:
    from numba import njit, prange, uint64

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

if HAVE_NUMBA:
    _NB_GAMMA = np.uint64(GAMMA)
    _NB_MIX1 = np.uint64(_MIX1)
    _NB_MIX2 = np.uint64(_MIX2)
    _ONE = np.uint64(1)

    @njit(uint64(uint64), cache=True, inline="always")
    def _mix64(z):
        z = (z ^ (z >> np.uint64(30))) * _NB_MIX1
        z = (z ^ (z >> np.uint64(27))) * _NB_MIX2
        return z ^ (z >> np.uint64(31))

    @njit(cache=True, parallel=True, boundscheck=False)
    def _gen_kernel(key, t0, count, N, k, n, M, w, poly_low, out):
        # poly_low: reduction polynomial without its x^w bit.
        wm1 = np.uint64(w - 1)
        shift_m = np.uint64(w - M)
        mask = (
            np.uint64(0xFFFFFFFFFFFFFFFF)
            if w == 64
            else (np.uint64(1) << np.uint64(w)) - np.uint64(1)
        )
        top_shift = np.uint64(64 - w)
        inv_grid = 1.0 / float(2**M)
        sqrt_blocks = math.sqrt(float(N))
        two_pi = 2.0 * math.pi
        kk = np.uint64(2 * k)
        for t in prange(count):
            base = np.uint64(t0 + t) * np.uint64(N) * kk
            acc = np.zeros(n, dtype=np.float64)
            cu = np.empty(k, dtype=np.uint64)
            cv = np.empty(k, dtype=np.uint64)
            ru = np.empty(n, dtype=np.uint64)
            rv = np.empty(n, dtype=np.uint64)
            for i in range(N):
                qu = key + _NB_GAMMA * (base + np.uint64(i) * kk)
                qv = qu + _NB_GAMMA * np.uint64(k)
                for a in range(k):
                    g = _NB_GAMMA * np.uint64(a)
                    cu[a] = _mix64(qu + g) >> top_shift
                    cv[a] = _mix64(qv + g) >> top_shift
                # Horner at point 0 collapses to the constant coefficient
                ru[0] = cu[k - 1]
                rv[0] = cv[k - 1]
                if n > 1:
                    x = np.uint64(0)
                    y = np.uint64(0)
                    for a in range(k):
                        x ^= cu[a]
                        y ^= cv[a]
                    ru[1] = x
                    rv[1] = y
                # remaining points: specialized multiply-by-j chains, u and
                # v interleaved for instruction-level parallelism
                for j in range(2, n):
                    x = np.uint64(0)
                    y = np.uint64(0)
                    if j == 2:
                        for a in range(k):
                            x = (((x << _ONE) & mask) ^ ((x >> wm1) * poly_low)) ^ cu[a]
                            y = (((y << _ONE) & mask) ^ ((y >> wm1) * poly_low)) ^ cv[a]
                    elif j == 3:
                        for a in range(k):
                            tx = ((x << _ONE) & mask) ^ ((x >> wm1) * poly_low)
                            ty = ((y << _ONE) & mask) ^ ((y >> wm1) * poly_low)
                            x = tx ^ x ^ cu[a]
                            y = ty ^ y ^ cv[a]
                    elif j == 4:
                        for a in range(k):
                            tx = ((x << _ONE) & mask) ^ ((x >> wm1) * poly_low)
                            ty = ((y << _ONE) & mask) ^ ((y >> wm1) * poly_low)
                            x = (((tx << _ONE) & mask) ^ ((tx >> wm1) * poly_low)) ^ cu[a]
                            y = (((ty << _ONE) & mask) ^ ((ty >> wm1) * poly_low)) ^ cv[a]
                    elif j == 5:
                        for a in range(k):
                            tx = ((x << _ONE) & mask) ^ ((x >> wm1) * poly_low)
                            ty = ((y << _ONE) & mask) ^ ((y >> wm1) * poly_low)
                            tx = ((tx << _ONE) & mask) ^ ((tx >> wm1) * poly_low)
                            ty = ((ty << _ONE) & mask) ^ ((ty >> wm1) * poly_low)
                            x = tx ^ x ^ cu[a]
                            y = ty ^ y ^ cv[a]
                    elif j == 6:
                        for a in range(k):
                            t1x = ((x << _ONE) & mask) ^ ((x >> wm1) * poly_low)
                            t1y = ((y << _ONE) & mask) ^ ((y >> wm1) * poly_low)
                            t2x = ((t1x << _ONE) & mask) ^ ((t1x >> wm1) * poly_low)
                            t2y = ((t1y << _ONE) & mask) ^ ((t1y >> wm1) * poly_low)
                            x = t2x ^ t1x ^ cu[a]
                            y = t2y ^ t1y ^ cv[a]
                    elif j == 7:
                        for a in range(k):
                            t1x = ((x << _ONE) & mask) ^ ((x >> wm1) * poly_low)
                            t1y = ((y << _ONE) & mask) ^ ((y >> wm1) * poly_low)
                            t2x = ((t1x << _ONE) & mask) ^ ((t1x >> wm1) * poly_low)
                            t2y = ((t1y << _ONE) & mask) ^ ((t1y >> wm1) * poly_low)
                            x = t2x ^ t1x ^ x ^ cu[a]
                            y = t2y ^ t1y ^ y ^ cv[a]
                    else:
                        jj = np.uint64(j)
                        for a in range(k):
                            ax = np.uint64(0)
                            ay = np.uint64(0)
                            sx = x
                            sy = y
                            b = jj
                            while b:
                                if b & _ONE:
                                    ax ^= sx
                                    ay ^= sy
                                sx = ((sx << _ONE) & mask) ^ ((sx >> wm1) * poly_low)
                                sy = ((sy << _ONE) & mask) ^ ((sy >> wm1) * poly_low)
                                b >>= _ONE
                            x = ax ^ cu[a]
                            y = ay ^ cv[a]
                    ru[j] = x
                    rv[j] = y
                for j in range(n):
                    # grid value (b+1)/2^M; the +1 wraps only for b all-ones
                    # at M == 64, which encodes u = 1
                    gu = (ru[j] >> shift_m) + _ONE
                    gv = (rv[j] >> shift_m) + _ONE
                    u = 1.0 if gu == np.uint64(0) else float(gu) * inv_grid
                    v = 1.0 if gv == np.uint64(0) else float(gv) * inv_grid
                    acc[j] += math.sqrt(-2.0 * math.log(u)) * math.cos(two_pi * v)
            for j in range(n):
                out[t, j] = acc[j] / sqrt_blocks

    def gen_block_average(key, t0, count, N, k, n, M, w, poly_low):
        """Draws [t0, t0+count) of the block-average generator, shape (count, n)."""
        out = np.empty((count, n), dtype=np.float64)
        _gen_kernel(
            np.uint64(key),
            np.int64(t0),
            np.int64(count),
            np.int64(N),
            np.int64(k),
            np.int64(n),
            np.int64(M),
            np.int64(w),
            np.uint64(poly_low),
            out,
        )
        return out

else:  # pragma: no cover - exercised only without numba
    gen_block_average = None
