"""PRG fooling polynomial threshold functions of Gaussians.

The generator averages N blocks of discretized Box-Muller Gaussians,
each driven by exact k-wise independent families over GF(2^w), and the
package ships the statistical lab that verifies the analytic machinery
behind the construction (noisy derivatives, smoothing averages,
interpolation identities, anti-concentration, hypercontractivity).
"""

__version__ = "0.1.0"

from .bits import BitString
from .gauss_block import (
    DEFAULT_C0,
    DiscretizationBound,
    GaussianBlock,
    block_sample,
    box_muller,
    closeness_bound,
)
from .gf_kwise import (
    FieldSpec,
    KWiseFamily,
    field_spec,
    gf_mul,
    gf_pow,
    kwise_eval,
    kwise_new,
    kwise_uniform,
)
from .harness import (
    PTF,
    FoolingReport,
    analytic_gauss_mean,
    anticoncentration_test,
    discretization_test,
    fooling_test,
    inequality_suite,
)
from .noisy_deriv import (
    DerivParams,
    DerivProfile,
    InterpolationScheme,
    deriv_norm_mc,
    deriv_norm_poly,
    deriv_profile,
    interp_coeffs,
    noisy_derivative,
    noisy_point,
    q_lm,
    verify_annihilation,
)
from .polyalg import (
    Estimate,
    HermiteExpansion,
    Polynomial,
    hermite_expand,
    hermite_reconstruct,
    l2_norm,
    lk_norm_mc,
    ou_apply,
    random_poly,
)
from .prg import (
    PRGParams,
    SeedLayout,
    derive_draw_seed,
    plan_params,
    prg_generate,
    prg_stream,
    seed_length,
)

__all__ = [
    "BitString",
    "DEFAULT_C0",
    "DerivParams",
    "DerivProfile",
    "DiscretizationBound",
    "Estimate",
    "FieldSpec",
    "FoolingReport",
    "GaussianBlock",
    "HermiteExpansion",
    "InterpolationScheme",
    "KWiseFamily",
    "PRGParams",
    "PTF",
    "Polynomial",
    "SeedLayout",
    "analytic_gauss_mean",
    "anticoncentration_test",
    "block_sample",
    "box_muller",
    "closeness_bound",
    "deriv_norm_mc",
    "deriv_norm_poly",
    "deriv_profile",
    "derive_draw_seed",
    "discretization_test",
    "field_spec",
    "fooling_test",
    "gf_mul",
    "gf_pow",
    "hermite_expand",
    "hermite_reconstruct",
    "inequality_suite",
    "interp_coeffs",
    "kwise_eval",
    "kwise_new",
    "kwise_uniform",
    "l2_norm",
    "lk_norm_mc",
    "noisy_derivative",
    "noisy_point",
    "ou_apply",
    "plan_params",
    "prg_generate",
    "prg_stream",
    "q_lm",
    "random_poly",
    "seed_length",
    "verify_annihilation",
]
