"""Parameter planning, seed layout, and the block-average generator.

The generator draws N independent blocks of discretized Gaussians from
k-wise independent families and outputs X = (1/sqrt(N)) * sum of the
blocks.  Planner defaults follow the scaling N = ceil(B^d eps^(-4-c)),
k = ceil(512 d / c), theta = arcsin(1/sqrt(N)); the asymptotic constants
behind B are not knowable, so every planned field can be overridden and
desk-scale experiments pin explicit (N, k, M).

Seed accounting is exact: one draw consumes 2*N*k*w bits, laid out as
N blocks of (u side, v side), each side k coefficients of w bits,
highest degree first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _fastgen
from .bits import BitString
from .errors import (
    InfeasiblePrecisionError,
    InputSizeError,
    ParameterError,
)
from .gauss_block import DEFAULT_C0, GaussianBlock, block_sample
from .gf_kwise import REDUCTION_POLYS, KWiseFamily, field_spec

DEFAULT_B = 2.0
DEFAULT_W = 64

_PLAN_OVERRIDE_KEYS = ("N", "k", "M", "w", "B")


@dataclass(frozen=True)
class PRGParams:
    """Full parameter bundle with derivation provenance."""

    n: int
    d: int
    eps: float
    c: float
    N: int
    k: int
    M: int
    w: int
    theta: float
    B: float
    provenance: dict = field(default_factory=dict, compare=False, repr=False)
    m_infeasible: bool = False

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ParameterError("n and d must be positive integers")
        if not 0.0 < self.eps < 1.0:
            raise ParameterError(f"eps must be in (0, 1), got {self.eps}")
        if not 0.0 < self.c <= 4.0:
            raise ParameterError(f"c must be in (0, 4], got {self.c}")
        if self.N < 1 or self.k < 1:
            raise ParameterError("N and k must be positive")
        if self.w not in REDUCTION_POLYS:
            raise ParameterError(f"unsupported field width {self.w}")
        if not 1 <= self.M <= self.w:
            raise ParameterError(f"M={self.M} must be in [1, w={self.w}]")
        if self.n > (1 << self.w):
            raise ParameterError(f"n={self.n} exceeds the {self.w}-bit position space")
        if abs(self.theta - math.asin(1.0 / math.sqrt(self.N))) > 1e-15:
            raise ParameterError("theta must equal arcsin(1/sqrt(N))")

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "eps": self.eps,
            "c": self.c,
            "N": self.N,
            "k": self.k,
            "M": self.M,
            "w": self.w,
            "theta": self.theta,
            "B": self.B,
            "m_infeasible": self.m_infeasible,
            "provenance": dict(self.provenance),
        }


def plan_params(
    n: int,
    d: int,
    eps: float,
    c: float,
    overrides: dict | None = None,
    c0: float = DEFAULT_C0,
    cap_infeasible: bool = False,
) -> PRGParams:
    """Derive (N, k, M, theta) from the targets, applying overrides.

    N = ceil(B^d eps^(-4-c)); k = ceil(512 d / c); M is the smallest
    multiple of 8 with c0 * 2^(-M/2) < eps^(3d) (d n N)^(-3d), capped
    at the field width.  If the cap binds and M is not overridden, an
    InfeasiblePrecisionError is raised; an M override acknowledges the
    cap and sets the m_infeasible flag instead.  With
    cap_infeasible=True (planning/reporting use), the cap clamps M to
    the field width and sets the flag rather than raising.
    """
    if n < 1 or d < 1:
        raise ParameterError("n and d must be positive integers")
    if not 0.0 < eps < 1.0:
        raise ParameterError(f"eps must be in (0, 1), got {eps}")
    if not 0.0 < c <= 4.0:
        raise ParameterError(f"c must be in (0, 4], got {c}")
    overrides = dict(overrides or {})
    unknown = set(overrides) - set(_PLAN_OVERRIDE_KEYS)
    if unknown:
        raise ParameterError(
            f"unknown override keys {sorted(unknown)}; allowed: {_PLAN_OVERRIDE_KEYS}"
        )

    prov = {}

    B = float(overrides.get("B", DEFAULT_B))
    prov["B"] = "override" if "B" in overrides else "default"
    if B <= 1.0:
        raise ParameterError(f"planner base B must exceed 1, got {B}")

    w = int(overrides.get("w", DEFAULT_W))
    prov["w"] = "override" if "w" in overrides else "default"

    if "N" in overrides:
        N = int(overrides["N"])
        prov["N"] = "override"
    else:
        log2_n_blocks = d * math.log2(B) - (4.0 + c) * math.log2(eps)
        if log2_n_blocks > 62:
            raise ParameterError(
                "planned N exceeds 2^62; override N for desk-scale runs"
            )
        N = math.ceil(B**d * eps ** (-4.0 - c))
        prov["N"] = "derived"

    if "k" in overrides:
        k = int(overrides["k"])
        prov["k"] = "override"
    else:
        k = math.ceil(512.0 * d / c)
        prov["k"] = "derived"

    # strict inequality c0 2^(-M/2) < eps^(3d) (d n N)^(-3d), in log2
    # to dodge float underflow at large d
    m_lower = 2.0 * (math.log2(c0) - 3.0 * d * (math.log2(eps) - math.log2(d * n * N)))
    derived_m = max(8, 8 * (math.floor(m_lower / 8.0) + 1))
    if "M" in overrides:
        M = int(overrides["M"])
        prov["M"] = "override"
        m_infeasible = derived_m > w
    elif derived_m > w:
        if not cap_infeasible:
            raise InfeasiblePrecisionError(
                f"required precision M={derived_m} exceeds field width {w}; "
                "override M explicitly to acknowledge the reduced closeness bound"
            )
        M = w
        prov["M"] = "derived-capped"
        m_infeasible = True
    else:
        M = derived_m
        prov["M"] = "derived"
        m_infeasible = False

    theta = math.asin(1.0 / math.sqrt(N))
    prov["theta"] = "derived"
    for name in ("n", "d", "eps", "c"):
        prov[name] = "input"

    return PRGParams(
        n=n, d=d, eps=eps, c=c, N=N, k=k, M=M, w=w, theta=theta, B=B,
        provenance=prov, m_infeasible=m_infeasible,
    )


@dataclass(frozen=True)
class SeedSegment:
    block: int
    side: str  # "u" or "v"
    offset: int
    length: int


@dataclass(frozen=True)
class SeedLayout:
    """Exact seed accounting: disjoint segments covering [0, total_bits)."""

    total_bits: int
    per_block_bits: int
    segments: tuple[SeedSegment, ...]


def seed_length(params: PRGParams) -> SeedLayout:
    """The exact seed layout; total_bits = 2*N*k*w."""
    side_bits = params.k * params.w
    per_block = 2 * side_bits
    segments = []
    for i in range(params.N):
        base = i * per_block
        segments.append(SeedSegment(i, "u", base, side_bits))
        segments.append(SeedSegment(i, "v", base + side_bits, side_bits))
    return SeedLayout(params.N * per_block, per_block, tuple(segments))


def _coeffs_from_seed(params: PRGParams, seed: BitString) -> np.ndarray:
    """Seed bits as an (N, 2, k) array of field elements."""
    buf = seed.to_bytes()
    w = params.w
    if w == 4:
        raw = np.frombuffer(buf, dtype=np.uint8)
        vals = np.empty(2 * raw.size, dtype=np.uint64)
        vals[0::2] = raw >> 4
        vals[1::2] = raw & 0x0F
    else:
        vals = np.frombuffer(buf, dtype=f">u{w // 8}").astype(np.uint64)
    return vals.reshape(params.N, 2, params.k)


def prg_generate(params: PRGParams, seed: BitString) -> np.ndarray:
    """Reference generator: X_j = (1/sqrt(N)) sum_i Z_ij.

    Pure-Python path through KWiseFamily/GaussianBlock; the compiled
    stream path must match it bit for bit.
    """
    layout = seed_length(params)
    if seed.nbits != layout.total_bits:
        raise InputSizeError(
            f"seed must be exactly {layout.total_bits} bits, got {seed.nbits}"
        )
    spec = field_spec(params.w)
    coeffs = _coeffs_from_seed(params, seed)
    acc = np.zeros(params.n)
    for i in range(params.N):
        u_fam = KWiseFamily(spec, params.k, tuple(int(x) for x in coeffs[i, 0]))
        v_fam = KWiseFamily(spec, params.k, tuple(int(x) for x in coeffs[i, 1]))
        block = GaussianBlock(u_fam, v_fam, params.n, params.M)
        for j in range(params.n):
            acc[j] += block_sample(block, j)
    return acc / math.sqrt(params.N)


def master_key(master_seed: int | str) -> int:
    """Normalize a master seed (int or hex string) to a 64-bit key."""
    if isinstance(master_seed, str):
        try:
            key = int(master_seed.strip().removeprefix("0x") or "0", 16)
        except ValueError as exc:
            raise ParameterError(f"master seed is not hex: {master_seed!r}") from exc
    elif isinstance(master_seed, int):
        key = master_seed
    else:
        raise ParameterError("master seed must be an int or a hex string")
    return key & 0xFFFFFFFFFFFFFFFF


def derive_draw_seed(params: PRGParams, master_seed: int | str, index: int) -> BitString:
    """Materialize the seed bit string of draw `index` from the master seed.

    prg_generate on this seed equals draw `index` of prg_stream.
    """
    if index < 0:
        raise ParameterError("draw index must be non-negative")
    key = master_key(master_seed)
    total_coeffs = 2 * params.N * params.k
    q = np.uint64(index) * np.uint64(total_coeffs) + np.arange(
        total_coeffs, dtype=np.uint64
    )
    words = _fastgen.mix64_np(np.uint64(key) + np.uint64(_fastgen.GAMMA) * q)
    w = params.w
    coeffs = words >> np.uint64(64 - w) if w < 64 else words
    if w == 4:
        packed = ((coeffs[0::2] << np.uint64(4)) | coeffs[1::2]).astype(np.uint8)
        buf = packed.tobytes()
    else:
        buf = coeffs.astype(f">u{w // 8}").tobytes()
    return BitString.from_bytes(buf, nbits=total_coeffs * w)


def _stream_numpy(params: PRGParams, key: int, start: int, count: int) -> np.ndarray:
    """Vectorized fallback used when numba is unavailable.

    The integer pipeline is identical to the compiled kernel; the float
    outputs may differ from the reference path by ~1 ulp because numpy's
    vectorized log/cos are not guaranteed to match libm exactly.  The
    compiled path is bit-identical to prg_generate.
    """
    N, k, n, M, w = params.N, params.k, params.n, params.M, params.w
    poly_low = np.uint64(REDUCTION_POLYS[w] & ((1 << w) - 1))
    mask = np.uint64((1 << w) - 1) if w < 64 else np.uint64(0xFFFFFFFFFFFFFFFF)
    wm1 = np.uint64(w - 1)
    out = np.empty((count, n))
    batch = max(1, min(count, 8_388_608 // (2 * N * k) + 1))
    gamma = np.uint64(_fastgen.GAMMA)
    key64 = np.uint64(key)
    for b0 in range(0, count, batch):
        bsz = min(batch, count - b0)
        t_idx = np.arange(start + b0, start + b0 + bsz, dtype=np.uint64)
        q = (
            t_idx[:, None, None, None] * np.uint64(2 * N * k)
            + np.arange(2 * N * k, dtype=np.uint64).reshape(N, 2, k)[None]
        )
        coeffs = _fastgen.mix64_np(key64 + gamma * q) >> np.uint64(64 - w)
        zsum = np.zeros((bsz, n))
        grid_scale = math.ldexp(1.0, -M)
        for j in range(n):
            state = np.zeros((bsz, N, 2), dtype=np.uint64)
            for a in range(k):
                if j:
                    acc = np.zeros_like(state)
                    cur = state
                    bb = j
                    while bb:
                        if bb & 1:
                            acc ^= cur
                        cur = ((cur << np.uint64(1)) & mask) ^ (
                            (cur >> wm1) * poly_low
                        )
                        bb >>= 1
                    state = acc ^ coeffs[..., a]
                else:
                    state = coeffs[..., a].copy()
            gridint = (state >> np.uint64(w - M)) + np.uint64(1)
            gridvals = np.where(
                gridint == 0, 1.0 / grid_scale, gridint.astype(np.float64)
            )
            u = gridvals[..., 0] * grid_scale
            v = gridvals[..., 1] * grid_scale
            z = np.sqrt(-2.0 * np.log(u)) * np.cos(2.0 * np.pi * v)
            col = np.zeros(bsz)
            for i in range(N):  # fixed order, matches the reference path
                col += z[:, i]
            zsum[:, j] = col
        out[b0 : b0 + bsz] = zsum / math.sqrt(N)
    return out


def prg_stream(
    params: PRGParams, master_seed: int | str, count: int, start: int = 0
) -> np.ndarray:
    """Draws [start, start+count), shape (count, n).

    Draw t is a pure function of (master_seed, t), so streams may be
    split by index ranges and computed in parallel:
    prg_stream(p, s, a+b) == vstack of prg_stream(p, s, a) and
    prg_stream(p, s, b, start=a).
    """
    if count < 1:
        raise ParameterError("count must be at least 1")
    if start < 0:
        raise ParameterError("start must be non-negative")
    key = master_key(master_seed)
    if _fastgen.gen_block_average is not None:
        poly_low = REDUCTION_POLYS[params.w] & ((1 << params.w) - 1)
        return _fastgen.gen_block_average(
            key, start, count, params.N, params.k, params.n, params.M,
            params.w, poly_low,
        )
    return _stream_numpy(params, key, start, count)
