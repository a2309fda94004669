"""Field arithmetic and k-wise independence tests.

The multiplication oracle here is an independent bit-by-bit
carryless-multiply-then-long-division implementation, deliberately
structured differently from the library's shift-and-reduce loop.
"""

import itertools

import pytest

from ptfprg.bits import BitString
from ptfprg.errors import (
    InputSizeError,
    ParameterError,
    PositionError,
    PrecisionError,
)
from ptfprg.gf_kwise import (
    REDUCTION_POLYS,
    KWiseFamily,
    field_spec,
    gf_mul,
    gf_pow,
    kwise_eval,
    kwise_new,
    kwise_uniform,
)


def oracle_gf_mul(a: int, b: int, width: int) -> int:
    """Carryless multiply, then reduce by long division."""
    poly = REDUCTION_POLYS[width]
    prod = 0
    for bit in range(a.bit_length()):
        if (a >> bit) & 1:
            prod ^= b << bit
    for bit in range(prod.bit_length() - 1, width - 1, -1):
        if (prod >> bit) & 1:
            prod ^= poly << (bit - width)
    return prod


# polynomial helpers over GF(2) for the independent irreducibility check
def _pmul(a, b):
    r = 0
    while a:
        if a & 1:
            r ^= b
        a >>= 1
        b <<= 1
    return r


def _pmod(a, m):
    dm = m.bit_length() - 1
    while a and a.bit_length() - 1 >= dm:
        a ^= m << (a.bit_length() - 1 - dm)
    return a


def _pgcd(a, b):
    while b:
        a, b = b, _pmod(a, b)
    return a


def _x_to_pow2(e, m):
    r = 2
    for _ in range(e):
        r = _pmod(_pmul(r, r), m)
    return r


class TestFieldSpec:
    @pytest.mark.parametrize("width", [4, 8, 16, 32, 64])
    def test_reduction_poly_irreducible(self, width):
        # Frobenius criterion: x^(2^w) == x mod f, and for each prime q | w
        # gcd(x^(2^(w/q)) - x, f) == 1
        f = REDUCTION_POLYS[width]
        assert _x_to_pow2(width, f) == 2
        q = 2
        ww = width
        primes = set()
        while ww > 1:
            while ww % q == 0:
                primes.add(q)
                ww //= q
            q += 1
        for q in primes:
            assert _pgcd(_x_to_pow2(width // q, f) ^ 2, f) == 1

    def test_unsupported_width(self):
        with pytest.raises(ParameterError):
            field_spec(12)

    def test_pinned_width64_poly(self):
        # x^64 + x^4 + x^3 + x + 1
        assert REDUCTION_POLYS[64] == (1 << 64) | (1 << 4) | (1 << 3) | (1 << 1) | 1


class TestGfMul:
    def test_annihilator_and_identity_w64(self):
        spec = field_spec(64)
        a = 0xDEADBEEFCAFEF00D
        assert gf_mul(spec, a, 0) == 0
        assert gf_mul(spec, a, 1) == a

    def test_frozen_w4_example(self):
        spec = field_spec(4)
        expected = oracle_gf_mul(0b0110, 0b0101, 4)
        assert expected == 0b1101  # frozen from the oracle
        assert gf_mul(spec, 0b0110, 0b0101) == expected

    def test_full_w4_table_matches_oracle(self):
        spec = field_spec(4)
        for a in range(16):
            for b in range(16):
                assert gf_mul(spec, a, b) == oracle_gf_mul(a, b, 4)

    def test_w8_grid_matches_oracle(self):
        spec = field_spec(8)
        pts = range(0, 256, 7)
        for a in pts:
            for b in pts:
                assert gf_mul(spec, a, b) == oracle_gf_mul(a, b, 8)

    def test_w4_axioms_exhaustive(self):
        spec = field_spec(4)
        for a, b, c in itertools.product(range(16), repeat=3):
            assert gf_mul(spec, a, b) == gf_mul(spec, b, a)
            assert gf_mul(spec, gf_mul(spec, a, b), c) == gf_mul(spec, a, gf_mul(spec, b, c))
            assert gf_mul(spec, a, b ^ c) == gf_mul(spec, a, b) ^ gf_mul(spec, a, c)

    def test_w8_axioms_grid(self):
        spec = field_spec(8)
        pts = list(range(3, 256, 16))
        for a, b, c in itertools.product(pts, repeat=3):
            assert gf_mul(spec, gf_mul(spec, a, b), c) == gf_mul(spec, a, gf_mul(spec, b, c))
            assert gf_mul(spec, a, b ^ c) == gf_mul(spec, a, b) ^ gf_mul(spec, a, c)

    def test_w64_axioms_randomized(self):
        import random

        spec = field_spec(64)
        rng = random.Random(1234)
        mask = (1 << 64) - 1
        for _ in range(2000):
            a, b, c = (rng.getrandbits(64) & mask for _ in range(3))
            assert gf_mul(spec, a, b) == gf_mul(spec, b, a)
            assert gf_mul(spec, gf_mul(spec, a, b), c) == gf_mul(spec, a, gf_mul(spec, b, c))
            assert gf_mul(spec, a, b ^ c) == gf_mul(spec, a, b) ^ gf_mul(spec, a, c)

    def test_out_of_range_element(self):
        spec = field_spec(4)
        with pytest.raises(ParameterError):
            gf_mul(spec, 16, 2)


class TestKWiseFamily:
    def test_zero_seed_constant_zero(self):
        spec = field_spec(4)
        fam = kwise_new(spec, 2, BitString(0, 8))
        assert fam.coeffs == (0, 0)
        assert all(kwise_eval(fam, i) == 0 for i in range(16))

    def test_degree_zero_is_constant(self):
        spec = field_spec(4)
        for s in (0b0011, 0b1010):
            fam = kwise_new(spec, 1, BitString(s, 4))
            assert all(kwise_eval(fam, i) == s for i in range(16))

    def test_wrong_seed_length(self):
        spec = field_spec(4)
        with pytest.raises(InputSizeError):
            kwise_new(spec, 2, BitString(0, 9))

    def test_matches_naive_horner_oracle(self):
        # naive sum of c_i * x^(k-1-i) against the library's Horner loop
        spec = field_spec(4)
        fam = kwise_new(spec, 3, BitString(0b101101110001, 12))
        for x in range(16):
            expected = 0
            for i, c in enumerate(fam.coeffs):
                expected ^= gf_mul(spec, c, gf_pow(spec, x, fam.k - 1 - i))
            assert kwise_eval(fam, x) == expected

    def test_identity_polynomial_w64(self):
        spec = field_spec(64)
        fam = KWiseFamily(spec, 2, (1, 0))
        assert kwise_eval(fam, 5) == 5

    def test_position_overflow(self):
        spec = field_spec(4)
        fam = kwise_new(spec, 2, BitString(0b10011100, 8))
        with pytest.raises(PositionError):
            kwise_eval(fam, 16)

    def test_determinism(self):
        spec = field_spec(16)
        fam1 = kwise_new(spec, 2, BitString(0xABCD1234, 32))
        fam2 = kwise_new(spec, 2, BitString(0xABCD1234, 32))
        assert [kwise_eval(fam1, i) for i in range(20)] == [
            kwise_eval(fam2, i) for i in range(20)
        ]


class TestKWiseUniform:
    def test_extreme_grid_values(self):
        spec = field_spec(8)
        top = kwise_new(spec, 1, BitString(0xFF, 8))
        bot = kwise_new(spec, 1, BitString(0x00, 8))
        assert kwise_uniform(top, 3, 8) == 256  # grid value 1.0
        assert kwise_uniform(bot, 3, 8) == 1  # grid value 2^-8, never 0

    def test_precision_error(self):
        spec = field_spec(4)
        fam = kwise_new(spec, 1, BitString(0b1000, 4))
        with pytest.raises(PrecisionError):
            kwise_uniform(fam, 0, 5)

    def test_exhaustive_marginal_uniform(self):
        # w=4, M=4, k=2: the marginal at any fixed index over all seeds
        # must be exactly uniform on {1..16}
        spec = field_spec(4)
        for index in (0, 7):
            counts = {}
            for s in range(1 << 8):
                fam = kwise_new(spec, 2, BitString(s, 8))
                v = kwise_uniform(fam, index, 4)
                counts[v] = counts.get(v, 0) + 1
            assert set(counts) == set(range(1, 17))
            assert set(counts.values()) == {16}

    def test_truncated_marginal_uniform(self):
        # M < w keeps exact uniformity (top-bit truncation has no bias)
        spec = field_spec(4)
        counts = {}
        for s in range(1 << 4):
            fam = kwise_new(spec, 1, BitString(s, 4))
            v = kwise_uniform(fam, 2, 2)
            counts[v] = counts.get(v, 0) + 1
        assert counts == {1: 4, 2: 4, 3: 4, 4: 4}


class TestExactKWiseIndependence:
    @pytest.mark.parametrize("k", [1, 2])
    def test_joint_uniform_over_all_seeds(self, k):
        # every k-subset of 4 indices induces the exactly uniform joint
        # distribution when all 2^(k*4) seeds are enumerated
        spec = field_spec(4)
        indices = [0, 1, 2, 3]
        nbits = 4 * k
        for subset in itertools.combinations(indices, k):
            counts = {}
            for s in range(1 << nbits):
                fam = kwise_new(spec, k, BitString(s, nbits))
                key = tuple(kwise_eval(fam, i) for i in subset)
                counts[key] = counts.get(key, 0) + 1
            assert len(counts) == 16**k
            assert set(counts.values()) == {1 << (nbits - 4 * k) if nbits > 4 * k else 1}
