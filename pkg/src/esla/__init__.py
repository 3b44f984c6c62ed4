"""Skew Normal and Extended Skew Normal approximations to posterior marginals
of latent Gaussian models."""

__version__ = "0.1.0"

from .esn import (  # noqa: E402
    EsnParams,
    Moments,
    c_fun,
    c_funs,
    delta_from_skewness,
    esn_cumulant_gen,
    esn_log_derivative,
    esn_logpdf,
    esn_mode,
    esn_moments,
    esn_pdf,
    max_skewness,
    tail_gap,
)
from .fitters import (  # noqa: E402
    FallbackReason,
    FitResult,
    Strategy,
    TaylorCoeffs,
    esn_poly_derivatives,
    fit_esla,
    fit_sla_classic,
    fit_sla_interpolant,
)
from .interpolants import (  # noqa: E402
    Interpolant,
    build_sn_skewness_interpolant,
    build_tau_ratio_interpolant,
    default_interpolants,
)
from .lgm import (  # noqa: E402
    GaussianApprox,
    GlmModel,
    GridDensity,
    extract_taylor_coeffs,
    gaussian_approximation,
    laplace_marginal,
    marginal_by_strategy,
    verify_marginal_gaussian_bound,
)
