"""Sparse multivariate polynomial arithmetic and Gaussian analysis.

Polynomials are sparse maps from exponent vectors to real coefficients.
The Hermite view uses the orthonormal probabilists' basis h_m =
He_m / sqrt(m!) (unit Gaussian weight), so Parseval gives the Gaussian
L2 norm directly: |p|_2^2 is the sum of squared expansion coefficients,
and the Ornstein-Uhlenbeck operator acts diagonally, scaling the
degree-j component by cos(theta)^j.

Everything here is a pure value computation; all operations are safe
for unrestricted concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import CapabilityError, InputSizeError, ParameterError

#: Practical cap for the dense Hermite change of basis.
HERMITE_DEGREE_CAP = 20
#: Dense multidegree enumeration cap (desk-scale artifact).
DENSE_BASIS_CAP = 1_000_000


class Estimate(NamedTuple):
    """A Monte Carlo estimate with its standard error."""

    value: float
    stderr: float


class Polynomial:
    """Sparse real polynomial in n variables.

    terms maps exponent tuples (length n) to nonzero coefficients;
    zero coefficients are never stored.
    """

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: dict | None = None):
        if n < 1:
            raise ParameterError("variable count must be positive")
        clean = {}
        for evec, coeff in (terms or {}).items():
            evec = tuple(int(e) for e in evec)
            if len(evec) != n:
                raise InputSizeError(
                    f"exponent vector {evec} has length {len(evec)}, expected {n}"
                )
            if any(e < 0 for e in evec):
                raise ParameterError(f"negative exponent in {evec}")
            coeff = float(coeff)
            if coeff != 0.0:
                clean[evec] = clean.get(evec, 0.0) + coeff
        self.n = n
        self.terms = {e: c for e, c in clean.items() if c != 0.0}

    @classmethod
    def zero(cls, n: int) -> "Polynomial":
        return cls(n, {})

    @classmethod
    def constant(cls, n: int, value: float) -> "Polynomial":
        return cls(n, {(0,) * n: value})

    @property
    def degree(self) -> int:
        """Total degree; 0 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=0)

    def evaluate(self, x) -> float:
        """Exact evaluation at one point, with per-variable power tables."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n,):
            raise InputSizeError(f"point must have shape ({self.n},)")
        maxdeg = self.degree
        powers = np.ones((self.n, maxdeg + 1))
        for i in range(self.n):
            for e in range(1, maxdeg + 1):
                powers[i, e] = powers[i, e - 1] * x[i]
        total = 0.0
        for evec, coeff in self.terms.items():
            t = coeff
            for i, e in enumerate(evec):
                if e:
                    t *= powers[i, e]
            total += t
        return total

    def evaluate_many(self, X) -> np.ndarray:
        """Vectorized evaluation on an (S, n) matrix of points."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n:
            raise InputSizeError(f"points must have shape (S, {self.n})")
        out = np.zeros(X.shape[0])
        cache: dict[tuple[int, int], np.ndarray] = {}

        def pw(i: int, e: int) -> np.ndarray:
            got = cache.get((i, e))
            if got is None:
                got = X[:, i] ** e
                cache[(i, e)] = got
            return got

        for evec, coeff in self.terms.items():
            t = np.full(X.shape[0], coeff)
            for i, e in enumerate(evec):
                if e:
                    t = t * pw(i, e)
            out += t
        return out

    def scale(self, factor: float) -> "Polynomial":
        return Polynomial(self.n, {e: c * factor for e, c in self.terms.items()})

    def __add__(self, other: "Polynomial") -> "Polynomial":
        self._check_compatible(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, 0.0) + c
        return Polynomial(self.n, terms)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + other.scale(-1.0)

    def __neg__(self) -> "Polynomial":
        return self.scale(-1.0)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        self._check_compatible(other)
        terms: dict[tuple, float] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                key = tuple(a + b for a, b in zip(e1, e2))
                terms[key] = terms.get(key, 0.0) + c1 * c2
        return Polynomial(self.n, terms)

    def compose_linear(self, matrix) -> "Polynomial":
        """p(A z): substitute x_i -> sum_r A[i, r] z_r."""
        A = np.asarray(matrix, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != self.n:
            raise InputSizeError(f"matrix must have shape ({self.n}, m)")
        m = A.shape[1]
        forms = []
        for i in range(self.n):
            row = {}
            for r in range(m):
                if A[i, r] != 0.0:
                    key = tuple(1 if s == r else 0 for s in range(m))
                    row[key] = A[i, r]
            forms.append(Polynomial(m, row))
        powcache: dict[tuple[int, int], Polynomial] = {}

        def form_power(i: int, e: int) -> Polynomial:
            got = powcache.get((i, e))
            if got is None:
                got = Polynomial.constant(m, 1.0) if e == 0 else form_power(i, e - 1) * forms[i]
                powcache[(i, e)] = got
            return got

        out = Polynomial.zero(m)
        for evec, coeff in self.terms.items():
            t = Polynomial.constant(m, coeff)
            for i, e in enumerate(evec):
                if e:
                    t = t * form_power(i, e)
            out = out + t
        return out

    def _check_compatible(self, other: "Polynomial") -> None:
        if not isinstance(other, Polynomial):
            raise ParameterError("expected a Polynomial")
        if other.n != self.n:
            raise InputSizeError("variable counts differ")

    def __repr__(self) -> str:
        return f"Polynomial(n={self.n}, {len(self.terms)} terms, degree {self.degree})"


def _double_factorial(m: int) -> int:
    out = 1
    while m > 1:
        out *= m
        m -= 2
    return out


def gaussian_integrate(p: Polynomial, var_indices) -> Polynomial:
    """Expectation over the given variables as iid standard Gaussians.

    Term-by-term moment formula: E[z^e] = (e-1)!! for even e, 0 for odd.
    The integrated variables remain in the signature with exponent 0.
    """
    idx = set(int(i) for i in var_indices)
    for i in idx:
        if not 0 <= i < p.n:
            raise InputSizeError(f"variable index {i} outside [0, {p.n})")
    terms: dict[tuple, float] = {}
    for evec, coeff in p.terms.items():
        factor = 1.0
        for i in idx:
            e = evec[i]
            if e % 2:
                factor = 0.0
                break
            factor *= _double_factorial(e - 1)
        if factor == 0.0:
            continue
        key = tuple(0 if i in idx else e for i, e in enumerate(evec))
        terms[key] = terms.get(key, 0.0) + coeff * factor
    return Polynomial(p.n, terms)


def restrict(p: Polynomial, m: int) -> Polynomial:
    """Project onto the first m variables; the rest must not appear."""
    if not 1 <= m <= p.n:
        raise InputSizeError(f"m must be in [1, {p.n}]")
    terms = {}
    for evec, coeff in p.terms.items():
        if any(evec[m:]):
            raise ParameterError("polynomial depends on a dropped variable")
        terms[evec[:m]] = coeff
    return Polynomial(m, terms)


# ---------------------------------------------------------------------------
# Hermite change of basis (orthonormal probabilists' family)

@lru_cache(maxsize=None)
def _mono_to_herm_row(a: int) -> tuple[float, ...]:
    """x^a = sum_m row[m] h_m(x): row[m] = a!/(2^t t! m!) sqrt(m!), a-m=2t."""
    row = [0.0] * (a + 1)
    for m_deg in range(a % 2, a + 1, 2):
        t = (a - m_deg) // 2
        coeff = math.factorial(a) / (2**t * math.factorial(t) * math.factorial(m_deg))
        row[m_deg] = coeff * math.sqrt(math.factorial(m_deg))
    return tuple(row)


@lru_cache(maxsize=None)
def _herm_to_mono_row(m_deg: int) -> tuple[float, ...]:
    """Monomial coefficients of h_m = He_m / sqrt(m!), three-term recurrence."""
    he_prev = [1]
    if m_deg == 0:
        he = he_prev
    else:
        he = [0, 1]
        for m in range(1, m_deg):
            # He_{m+1} = x He_m - m He_{m-1}, integer coefficients
            nxt = [0] + he
            for i, c in enumerate(he_prev):
                nxt[i] -= m * c
            he_prev, he = he, nxt
    norm = math.sqrt(math.factorial(m_deg))
    return tuple(c / norm for c in he)


@dataclass(frozen=True)
class HermiteExpansion:
    """Coefficients of p in the orthonormal Hermite basis."""

    n: int
    coeffs: dict

    def evaluate(self, x) -> float:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n,):
            raise InputSizeError(f"point must have shape ({self.n},)")
        maxdeg = max((max(idx) for idx in self.coeffs if any(idx)), default=0)
        htab = np.ones((self.n, maxdeg + 1))
        for i in range(self.n):
            if maxdeg >= 1:
                htab[i, 1] = x[i]
            for m in range(1, maxdeg):
                # orthonormal recurrence h_{m+1} = (x h_m - sqrt(m) h_{m-1}) / sqrt(m+1)
                htab[i, m + 1] = (x[i] * htab[i, m] - math.sqrt(m) * htab[i, m - 1]) / math.sqrt(m + 1)
        total = 0.0
        for idx, c in self.coeffs.items():
            t = c
            for i, m in enumerate(idx):
                if m:
                    t *= htab[i, m]
            total += t
        return total


def hermite_expand(p: Polynomial) -> HermiteExpansion:
    """Change of basis to orthonormal Hermite coefficients."""
    if p.degree > HERMITE_DEGREE_CAP:
        raise CapabilityError(
            f"degree {p.degree} exceeds the Hermite expansion cap {HERMITE_DEGREE_CAP}"
        )
    coeffs: dict[tuple, float] = {}

    def spread(pos: int, evec: tuple, idx: list, factor: float, coeff: float):
        if pos == p.n:
            key = tuple(idx)
            coeffs[key] = coeffs.get(key, 0.0) + coeff * factor
            return
        row = _mono_to_herm_row(evec[pos])
        for m_deg in range(evec[pos] % 2, evec[pos] + 1, 2):
            idx.append(m_deg)
            spread(pos + 1, evec, idx, factor * row[m_deg], coeff)
            idx.pop()

    for evec, coeff in p.terms.items():
        spread(0, evec, [], 1.0, coeff)
    return HermiteExpansion(p.n, {k: v for k, v in coeffs.items() if v != 0.0})


def hermite_reconstruct(h: HermiteExpansion) -> Polynomial:
    """Inverse change of basis back to monomials."""
    terms: dict[tuple, float] = {}

    def spread(pos: int, idx: tuple, evec: list, factor: float, coeff: float):
        if pos == h.n:
            key = tuple(evec)
            terms[key] = terms.get(key, 0.0) + coeff * factor
            return
        row = _herm_to_mono_row(idx[pos])
        for e in range(idx[pos] % 2, idx[pos] + 1, 2):
            evec.append(e)
            spread(pos + 1, idx, evec, factor * row[e], coeff)
            evec.pop()

    for idx, coeff in h.coeffs.items():
        spread(0, idx, [], 1.0, coeff)
    return Polynomial(h.n, terms)


def l2_norm(p: Polynomial) -> float:
    """Gaussian L2 norm via Parseval, exact up to float error."""
    h = hermite_expand(p)
    return math.sqrt(sum(c * c for c in h.coeffs.values()))


def lk_norm_mc(p: Polynomial, t: float, samples: int, seed: int = 0) -> Estimate:
    """Monte Carlo |p|_t = E[|p(Y)|^t]^(1/t) with delta-method stderr."""
    if t < 1:
        raise ParameterError(f"norm order t must be >= 1, got {t}")
    if samples < 1000:
        raise ParameterError(f"samples must be >= 1000, got {samples}")
    rng = np.random.default_rng(seed)
    Y = rng.standard_normal((samples, p.n))
    vals = np.abs(p.evaluate_many(Y)) ** t
    mean = float(vals.mean())
    se_mean = float(vals.std(ddof=1)) / math.sqrt(samples)
    if mean <= 0.0:
        return Estimate(0.0, 0.0)
    est = mean ** (1.0 / t)
    stderr = se_mean * est / (t * mean)
    return Estimate(est, stderr)


def ou_apply(p: Polynomial, theta: float) -> Polynomial:
    """Ornstein-Uhlenbeck smoothing A_theta p, exact.

    Each orthonormal Hermite component of total degree j is scaled by
    cos(theta)^j, then the result is mapped back to monomial form.
    """
    lam = math.cos(theta)
    h = hermite_expand(p)
    scaled = {idx: c * lam ** sum(idx) for idx, c in h.coeffs.items()}
    return hermite_reconstruct(HermiteExpansion(p.n, scaled))


def _multidegrees(n: int, d: int) -> list[tuple]:
    out: list[tuple] = []
    cur: list[int] = []

    def rec(pos: int, remaining: int):
        if pos == n:
            out.append(tuple(cur))
            return
        for e in range(remaining + 1):
            cur.append(e)
            rec(pos + 1, remaining - e)
            cur.pop()

    rec(0, d)
    return out


def random_poly(n: int, d: int, seed: int, basis: str = "hermite") -> Polynomial:
    """Dense random polynomial: iid N(0,1) coefficients on every
    multidegree <= d, in the chosen basis.

    In the hermite basis, Parseval makes E[|p|_2^2] equal the number of
    basis elements, binom(n+d, d).
    """
    if basis not in ("monomial", "hermite"):
        raise ParameterError(f"basis must be 'monomial' or 'hermite', got {basis!r}")
    if n < 1 or d < 0:
        raise ParameterError("need n >= 1 and d >= 0")
    count = math.comb(n + d, d)
    if count > DENSE_BASIS_CAP:
        raise CapabilityError(
            f"binom(n+d, d) = {count} exceeds the dense cap {DENSE_BASIS_CAP}"
        )
    rng = np.random.default_rng(seed)
    degs = _multidegrees(n, d)
    coeffs = rng.standard_normal(count)
    mapping = dict(zip(degs, coeffs))
    if basis == "monomial":
        return Polynomial(n, mapping)
    return hermite_reconstruct(HermiteExpansion(n, mapping))


# ---------------------------------------------------------------------------
# Text / JSON round-trip formats

def poly_to_text(p: Polynomial) -> str:
    """Lines of `coeff e_1 e_2 ... e_n`, sorted for determinism."""
    lines = []
    for evec in sorted(p.terms):
        lines.append(" ".join([repr(p.terms[evec])] + [str(e) for e in evec]))
    return "\n".join(lines) + "\n"


def poly_from_text(text: str, n: int | None = None) -> Polynomial:
    terms: dict[tuple, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if n is None:
            n = len(parts) - 1
            if n < 1:
                raise ParameterError(f"line {lineno}: need a coefficient and exponents")
        if len(parts) != n + 1:
            raise InputSizeError(
                f"line {lineno}: expected {n + 1} fields, got {len(parts)}"
            )
        evec = tuple(int(t) for t in parts[1:])
        terms[evec] = terms.get(evec, 0.0) + float(parts[0])
    if n is None:
        raise ParameterError("empty polynomial text")
    return Polynomial(n, terms)


def poly_to_json_obj(p: Polynomial) -> dict:
    return {
        "n": p.n,
        "terms": [[p.terms[e], list(e)] for e in sorted(p.terms)],
    }


def poly_from_json_obj(obj: dict) -> Polynomial:
    try:
        n = int(obj["n"])
        terms = {tuple(int(x) for x in evec): float(c) for c, evec in obj["terms"]}
    except (KeyError, TypeError, ValueError) as exc:
        raise ParameterError(f"malformed polynomial JSON: {exc}") from exc
    return Polynomial(n, terms)
