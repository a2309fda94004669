"""Noisy points, noisy derivatives, averaged derivative norms, and the
interpolation identity that annihilates low-degree polynomials.

The noisy point is the Gaussian-measure-preserving rotation
cos(theta) X + sin(theta) Y.  The noisy derivative

    D_{Y,Z} p(X) = (p(N_Y(X)) - p(N_Z(X))) / theta

drops polynomial degree by one, so the order-(d+1) iterated derivative
of a degree-d polynomial vanishes identically, and the order-d squared
norm is a constant function of X.

Unrolling the iterated derivative gives the closed form used by both
the Monte Carlo and exact paths: with c = cos(theta), s = sin(theta),

    D_{Y_1,Z_1} ... D_{Y_l,Z_l} p(X)
      = theta^(-l) * sum over choices V_i in {Y_i, Z_i} of
        (-1)^(#Z) p(c^l X + s * sum_i c^(l-i) V_i).

Monte Carlo estimators use substreams keyed by sample index, and all
reductions go through numpy's pairwise summation, so results do not
depend on how work is split across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import (
    CapabilityError,
    DomainError,
    InputSizeError,
    ParameterError,
)
from .polyalg import (
    Estimate,
    Polynomial,
    gaussian_integrate,
    hermite_expand,
    restrict,
)

#: Caps for the symbolic (exact) derivative-norm construction.
EXACT_N_CAP = 4
EXACT_D_CAP = 3
EXACT_ELL_CAP = 2


@dataclass(frozen=True)
class DerivParams:
    """Configuration bundle for derivative-norm experiments."""

    theta: float
    ell: int
    m: int
    samples: int

    def __post_init__(self):
        if not 0.0 < self.theta < math.pi / 2:
            raise DomainError(f"theta must be in (0, pi/2), got {self.theta}")
        if self.ell < 0 or self.m < 0:
            raise ParameterError("ell and m must be non-negative")
        if self.samples < 1000:
            raise ParameterError("Monte Carlo paths need samples >= 1000")


def noisy_point(X, Y, theta: float) -> np.ndarray:
    """cos(theta) X + sin(theta) Y."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.shape != Y.shape:
        raise InputSizeError(f"shape mismatch {X.shape} vs {Y.shape}")
    return math.cos(theta) * X + math.sin(theta) * Y


def noisy_derivative(p: Polynomial, X, Y, Z, theta: float) -> float:
    """(p(N_Y(X)) - p(N_Z(X))) / theta."""
    if theta == 0.0:
        raise DomainError("theta must be nonzero")
    return (p.evaluate(noisy_point(X, Y, theta)) - p.evaluate(noisy_point(X, Z, theta))) / theta


def _iterated_derivative_values(
    p: Polynomial, X: np.ndarray, Y: np.ndarray, Z: np.ndarray, theta: float
) -> np.ndarray:
    """Iterated noisy derivative for S sampled direction tuples.

    Y, Z have shape (S, ell, n); returns shape (S,).
    """
    S, ell, n = Y.shape
    c, s = math.cos(theta), math.sin(theta)
    weights = [s * c ** (ell - i) for i in range(1, ell + 1)]
    base = (c**ell) * X[None, :]
    out = np.zeros(S)
    for picks in product((0, 1), repeat=ell):
        pts = base.copy()
        for i, pick in enumerate(picks):
            pts = pts + weights[i] * (Z[:, i, :] if pick else Y[:, i, :])
        out += (-1) ** sum(picks) * p.evaluate_many(pts)
    return out / theta**ell


def deriv_norm_mc(
    p: Polynomial, X, ell: int, theta: float, samples: int = 10_000, seed: int = 0
) -> Estimate:
    """Monte Carlo estimate of the squared norm of the order-ell noisy
    derivative at X (expectation over the direction pairs).

    ell = 0 returns p(X)^2 exactly with zero stderr.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.shape != (p.n,):
        raise InputSizeError(f"point must have shape ({p.n},)")
    if ell < 0:
        raise ParameterError("ell must be non-negative")
    if ell == 0:
        return Estimate(p.evaluate(X) ** 2, 0.0)
    if theta == 0.0:
        raise DomainError("theta must be nonzero")
    rng = np.random.default_rng(seed)
    Y = rng.standard_normal((samples, ell, p.n))
    Z = rng.standard_normal((samples, ell, p.n))
    vals = _iterated_derivative_values(p, X, Y, Z, theta) ** 2
    return Estimate(float(vals.mean()), float(vals.std(ddof=1)) / math.sqrt(samples))


def deriv_norm_poly(p: Polynomial, ell: int, theta: float) -> Polynomial:
    """The squared derivative norm as an exact polynomial in X.

    Expands the product of two iterated derivatives over auxiliary
    direction variables and integrates them out term by term with the
    Gaussian moment formula.  Capped at n <= 4, d <= 3, ell <= 2.
    """
    if ell < 0:
        raise ParameterError("ell must be non-negative")
    if ell == 0:
        return p * p
    if theta == 0.0:
        raise DomainError("theta must be nonzero")
    if p.n > EXACT_N_CAP or p.degree > EXACT_D_CAP or ell > EXACT_ELL_CAP:
        raise CapabilityError(
            f"exact mode capped at n <= {EXACT_N_CAP}, degree <= {EXACT_D_CAP}, "
            f"ell <= {EXACT_ELL_CAP}"
        )
    n = p.n
    n_ext = n * (1 + 2 * ell)
    c, s = math.cos(theta), math.sin(theta)
    weights = [s * c ** (ell - i) for i in range(1, ell + 1)]

    total = Polynomial.zero(n_ext)
    for picks in product((0, 1), repeat=ell):
        A = np.zeros((n, n_ext))
        for r in range(n):
            A[r, r] = c**ell
            for i, pick in enumerate(picks):
                col = n * (2 * i + 1 + pick) + r
                A[r, col] = weights[i]
        term = p.compose_linear(A)
        total = total + (term if sum(picks) % 2 == 0 else -term)
    squared = (total * total).scale(theta ** (-2 * ell))
    integrated = gaussian_integrate(squared, range(n, n_ext))
    return restrict(integrated, n)


def q_lm(
    p: Polynomial,
    X,
    ell: int,
    m: int,
    theta: float,
    samples: tuple[int, int] | None = None,
    mode: str = "mc",
    seed: int = 0,
) -> Estimate:
    """The m-fold noise-averaged squared derivative norm at X.

    mc mode: nested Monte Carlo; samples is (outer, inner), defaulting
    to (1000, 10000).  Outer samples average over noisy-point chains of
    length m; each carries an inner derivative-norm estimate, so the
    reported stderr covers both noise sources.

    exact mode: builds the squared-norm polynomial symbolically, applies
    the smoothing operator m times, and evaluates (zero stderr).
    """
    from .polyalg import ou_apply

    X = np.asarray(X, dtype=np.float64)
    if X.shape != (p.n,):
        raise InputSizeError(f"point must have shape ({p.n},)")
    if m < 0:
        raise ParameterError("averaging depth m must be non-negative")
    if mode == "exact":
        q_poly = deriv_norm_poly(p, ell, theta)
        for _ in range(m):
            q_poly = ou_apply(q_poly, theta)
        return Estimate(q_poly.evaluate(X), 0.0)
    if mode != "mc":
        raise ParameterError(f"mode must be 'mc' or 'exact', got {mode!r}")
    outer, inner = samples if samples is not None else (1000, 10_000)
    if m == 0:
        return deriv_norm_mc(p, X, ell, theta, samples=inner, seed=seed)
    key = list(seed) if isinstance(seed, (list, tuple)) else [seed]
    rng = np.random.default_rng(key + [0])
    estimates = np.empty(outer)
    for o in range(outer):
        pt = X
        for step in range(m):
            pt = noisy_point(pt, rng.standard_normal(p.n), theta)
        estimates[o] = deriv_norm_mc(
            p, pt, ell, theta, samples=inner, seed=key + [1, o]
        ).value
    return Estimate(
        float(estimates.mean()), float(estimates.std(ddof=1)) / math.sqrt(outer)
    )


@dataclass(frozen=True)
class DerivProfile:
    """Estimates of the averaged derivative norms at one point.

    values maps (ell, m) to an Estimate of the m-fold-averaged squared
    order-ell derivative norm at X.  Entries with ell equal to the
    polynomial degree are X-free up to estimator noise.
    """

    point: tuple[float, ...]
    values: dict

    def value(self, ell: int, m: int) -> Estimate:
        return self.values[(ell, m)]


def deriv_profile(
    p: Polynomial,
    X,
    ell_range,
    m_range,
    theta: float,
    samples: tuple[int, int] | None = None,
    mode: str = "mc",
    seed: int = 0,
) -> DerivProfile:
    """Tabulate q_(ell, m)(X) over the requested index grid."""
    X = np.asarray(X, dtype=np.float64)
    key = list(seed) if isinstance(seed, (list, tuple)) else [seed]
    values = {}
    for i, ell in enumerate(ell_range):
        for j, m in enumerate(m_range):
            values[(ell, m)] = q_lm(
                p, X, ell, m, theta, samples=samples, mode=mode,
                seed=key + [i, j] if mode == "mc" else 0,
            )
    return DerivProfile(tuple(float(x) for x in X), values)


@dataclass(frozen=True)
class InterpolationScheme:
    """Coefficients c_0..c_(D+1) annihilating smoothing powers on
    polynomials of degree <= D."""

    D: int
    theta: float
    coeffs: tuple[float, ...]
    normalization: str = "max_abs_one_c0_positive"

    @property
    def spread(self) -> float:
        """max |c| / min nonzero |c| (diagnostic for coefficient growth)."""
        mags = [abs(c) for c in self.coeffs if c != 0.0]
        return max(mags) / min(mags)


def interp_coeffs(D: int, theta: float) -> InterpolationScheme:
    """Solve for the null vector of the eigenvalue system
    sum_m c_m lambda^(m j) = 0 for j = 0..D, lambda = cos(theta).

    The (D+1) x (D+2) system has rank D+1 because the D+2 column ratios
    lambda^m are distinct, so the null space is one-dimensional.
    Normalized so max |c_m| = 1 and c_0 > 0.
    """
    if D < 0:
        raise ParameterError("annihilated degree D must be non-negative")
    if not 0.0 < theta < math.pi / 2:
        raise DomainError(
            f"theta must be in (0, pi/2) for distinct eigenvalues, got {theta}"
        )
    lam = math.cos(theta)
    V = np.array([[lam ** (m * j) for m in range(D + 2)] for j in range(D + 1)])
    _, _, vh = np.linalg.svd(V)
    c = vh[-1]
    c = c / np.max(np.abs(c))
    if c[0] < 0:
        c = -c
    return InterpolationScheme(D=D, theta=theta, coeffs=tuple(float(x) for x in c))


@dataclass(frozen=True)
class AnnihilationReport:
    """Residual of sum_m c_m (A_theta)^m p, relative to p's coefficients."""

    residual: float
    max_input_coeff: float
    max_output_coeff: float
    degree: int
    scheme_D: int
    theta: float


def verify_annihilation(p: Polynomial, scheme: InterpolationScheme) -> AnnihilationReport:
    """Apply the scheme exactly (Hermite-coefficientwise) and report the
    max residual coefficient normalized by p's max coefficient."""
    if p.degree > scheme.D:
        raise InputSizeError(
            f"polynomial degree {p.degree} exceeds scheme degree {scheme.D}"
        )
    lam = math.cos(scheme.theta)
    h = hermite_expand(p)
    max_in = max((abs(c) for c in h.coeffs.values()), default=0.0)
    max_out = 0.0
    for idx, coeff in h.coeffs.items():
        j = sum(idx)
        factor = sum(c_m * lam ** (m * j) for m, c_m in enumerate(scheme.coeffs))
        max_out = max(max_out, abs(coeff * factor))
    residual = max_out / max_in if max_in > 0.0 else 0.0
    return AnnihilationReport(
        residual=residual,
        max_input_coeff=max_in,
        max_output_coeff=max_out,
        degree=p.degree,
        scheme_D=scheme.D,
        theta=scheme.theta,
    )
