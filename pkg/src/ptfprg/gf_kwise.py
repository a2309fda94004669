"""Exact k-wise independent families of w-bit words.

A family is a uniformly seeded polynomial of degree < k over GF(2^w).
Its evaluations at any k distinct points determine the coefficients
bijectively (Vandermonde invertibility over a field), so uniform
coefficients make the evaluations at any k points exactly independent
and uniform.  Truncating a uniform w-bit word to its top M bits keeps
it exactly uniform, which is why a binary field is used rather than a
prime one: there is no modulo bias anywhere in the pipeline.

Widths 4 and 8 exist to make exhaustive correctness tests feasible;
generation defaults to width 64.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bits import BitString
from .errors import InputSizeError, ParameterError, PositionError, PrecisionError

# Pinned irreducible reduction polynomials (bit w is the x^w term).
# Widths <= 16 are re-verified by exhaustive trial division on first use;
# 32 and 64 are pinned low-weight standards (64: x^64 + x^4 + x^3 + x + 1).
REDUCTION_POLYS = {
    4: 0x13,
    8: 0x11B,
    16: 0x1002B,
    32: 0x1_0000_008D,
    64: (1 << 64) | 0x1B,
}

SUPPORTED_WIDTHS = tuple(sorted(REDUCTION_POLYS))


@dataclass(frozen=True)
class FieldSpec:
    """GF(2^width) with a fixed irreducible reduction polynomial."""

    width: int
    reduction_poly: int


def _poly_divides(d: int, f: int) -> bool:
    # remainder of f mod d over GF(2), long division on bit vectors
    dd = d.bit_length() - 1
    while f.bit_length() - 1 >= dd and f:
        f ^= d << (f.bit_length() - 1 - dd)
    return f == 0


def _check_irreducible_exhaustive(poly: int, width: int) -> None:
    for deg in range(1, width // 2 + 1):
        for d in range(1 << deg, 1 << (deg + 1)):
            if _poly_divides(d, poly):
                raise ParameterError(
                    f"reduction polynomial {poly:#x} for width {width} is divisible by {d:#x}"
                )


_verified_widths: set[int] = set()


def field_spec(width: int) -> FieldSpec:
    """The pinned field for a supported width."""
    if width not in REDUCTION_POLYS:
        raise ParameterError(f"width must be one of {SUPPORTED_WIDTHS}, got {width}")
    if width <= 16 and width not in _verified_widths:
        _check_irreducible_exhaustive(REDUCTION_POLYS[width], width)
        _verified_widths.add(width)
    return FieldSpec(width, REDUCTION_POLYS[width])


def _check_element(spec: FieldSpec, a: int, what: str = "element") -> None:
    if a < 0 or a >> spec.width:
        raise ParameterError(f"{what} {a} is not a {spec.width}-bit field element")


def gf_mul(spec: FieldSpec, a: int, b: int) -> int:
    """Product in GF(2^width) under the pinned reduction polynomial."""
    _check_element(spec, a)
    _check_element(spec, b)
    if a.bit_length() > b.bit_length():  # iterate over the shorter operand
        a, b = b, a
    top = 1 << spec.width
    poly = spec.reduction_poly
    r = 0
    while a:
        if a & 1:
            r ^= b
        a >>= 1
        b <<= 1
        if b & top:
            b ^= poly
    return r


def gf_pow(spec: FieldSpec, a: int, e: int) -> int:
    """a**e in GF(2^width), e >= 0."""
    if e < 0:
        raise ParameterError("exponent must be non-negative")
    r = 1
    while e:
        if e & 1:
            r = gf_mul(spec, r, a)
        a = gf_mul(spec, a, a)
        e >>= 1
    return r


@dataclass(frozen=True)
class KWiseFamily:
    """A degree-(k-1) polynomial over GF(2^w), seed chunks as coefficients.

    coeffs are ordered highest degree first.
    """

    field: FieldSpec
    k: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if self.k < 1:
            raise ParameterError("independence order k must be positive")
        if len(self.coeffs) != self.k:
            raise InputSizeError(f"need exactly {self.k} coefficients")
        for c in self.coeffs:
            _check_element(self.field, c, "coefficient")


def kwise_new(spec: FieldSpec, k: int, seed: BitString) -> KWiseFamily:
    """Build a family from a seed of exactly k*width bits."""
    if k < 1:
        raise ParameterError("independence order k must be positive")
    if seed.nbits != k * spec.width:
        raise InputSizeError(
            f"seed must be exactly {k * spec.width} bits, got {seed.nbits}"
        )
    coeffs = tuple(seed.chunk(i * spec.width, spec.width) for i in range(k))
    return KWiseFamily(spec, k, coeffs)


def kwise_eval(family: KWiseFamily, index: int) -> int:
    """Evaluate the family polynomial at the field element enc(index)."""
    spec = family.field
    if index < 0 or index >> spec.width:
        raise PositionError(
            f"position {index} does not fit in {spec.width} bits"
        )
    acc = 0
    for c in family.coeffs:
        acc = gf_mul(spec, index, acc) ^ c
    return acc


def kwise_uniform(family: KWiseFamily, index: int, M: int) -> int:
    """Grid value in {1, ..., 2^M}: top M output bits, plus one.

    Represents the point (b+1)/2^M of the (0, 1] grid, so the value is
    never 0 (log stays finite) and 2^M encodes u = 1.
    """
    w = family.field.width
    if M < 1 or M > w:
        raise PrecisionError(f"precision M={M} must be in [1, {w}]")
    return (kwise_eval(family, index) >> (w - M)) + 1
