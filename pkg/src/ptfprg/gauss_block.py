"""Discretized Box-Muller Gaussians driven by k-wise uniform grids.

One block holds two independently seeded k-wise families (u side and
v side); coordinate j of the block is sqrt(-2 ln u) cos(2 pi v) with
u, v read from the (0, 1] grid of 2^M points.  Rounding the uniforms
UP onto the grid keeps u > 0, and u = 1 maps to the Gaussian value 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError, PositionError, PrecisionError
from .gf_kwise import KWiseFamily, kwise_uniform

#: Calibration constant for the grid-closeness bound delta = c0 * 2^(-M/2).
#: Measured once by the coupling experiment (see harness.discretization_test)
#: as the smallest power of two holding with a 2x margin at M in {16, 32}.
DEFAULT_C0 = 8.0


def box_muller(u: float, v: float) -> float:
    """sqrt(-2 ln u) * cos(2 pi v); standard Gaussian for uniform (u, v)."""
    if not 0.0 < u <= 1.0:
        raise DomainError(f"u must be in (0, 1], got {u}")
    return math.sqrt(-2.0 * math.log(u)) * math.cos(2.0 * math.pi * v)


def box_muller_np(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Vectorized box_muller for arrays already inside the domain."""
    u = np.asarray(u, dtype=np.float64)
    if np.any(u <= 0.0) or np.any(u > 1.0):
        raise DomainError("u values must be in (0, 1]")
    return np.sqrt(-2.0 * np.log(u)) * np.cos(2.0 * np.pi * np.asarray(v))


def round_up_to_grid(x: float, M: int) -> float:
    """Round x in (0, 1] up to the nearest multiple of 2^-M."""
    if not 0.0 < x <= 1.0:
        raise DomainError(f"x must be in (0, 1], got {x}")
    return math.ceil(math.ldexp(x, M)) * math.ldexp(1.0, -M)


@dataclass(frozen=True)
class GaussianBlock:
    """One block of n discretized Gaussian coordinates."""

    u_family: KWiseFamily
    v_family: KWiseFamily
    n: int
    M: int

    def __post_init__(self):
        uf, vf = self.u_family, self.v_family
        if uf.field.width != vf.field.width:
            raise ParameterError("u and v families must share the field width")
        if uf.k != vf.k:
            raise ParameterError("u and v families must share k")
        if self.M < 1 or self.M > uf.field.width:
            raise PrecisionError(f"M={self.M} must be in [1, {uf.field.width}]")
        if self.n < 1:
            raise ParameterError("dimension n must be positive")
        if self.n > (1 << uf.field.width):
            raise ParameterError(
                f"n={self.n} exceeds the {uf.field.width}-bit position space"
            )


def block_sample(block: GaussianBlock, j: int) -> float:
    """Coordinate j of the block; deterministic in the family seeds."""
    if j < 0 or j >= block.n:
        raise PositionError(f"coordinate {j} outside [0, {block.n})")
    u = math.ldexp(float(kwise_uniform(block.u_family, j, block.M)), -block.M)
    v = math.ldexp(float(kwise_uniform(block.v_family, j, block.M)), -block.M)
    return box_muller(u, v)


def block_vector(block: GaussianBlock) -> np.ndarray:
    """All n coordinates of the block."""
    return np.array([block_sample(block, j) for j in range(block.n)])


@dataclass(frozen=True)
class DiscretizationBound:
    """delta = c0 * 2^(-M/2): grid closeness holding with prob > 1 - delta."""

    M: int
    delta: float
    c0: float


def closeness_bound(M: int, c0: float = DEFAULT_C0) -> DiscretizationBound:
    """The delta bound for an M-bit grid with calibration constant c0."""
    if M < 4:
        raise ParameterError(f"M must be at least 4, got {M}")
    if c0 <= 0:
        raise ParameterError(f"c0 must be positive, got {c0}")
    delta = c0 * 2.0 ** (-M / 2.0)
    if delta >= 1.0:
        raise PrecisionError(
            f"parameters too coarse: delta = {delta} >= 1 for M={M}, c0={c0}"
        )
    return DiscretizationBound(M, delta, c0)
