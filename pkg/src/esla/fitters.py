"""Skew Normal and Extended Skew Normal fits to standardized Taylor coefficients.

Inputs live on the standardized scale where the log density expands as
``K - z**2/2 + mu*z + g1*z**3/6 (+ g2*z**4/24)``. Every fit returns ESN
parameters whose mean is ``mu`` and whose variance is 1; callers map
back to the original variable.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidArgumentError, SkewnessUnattainableError
from .esn import EsnParams, c_funs, delta_from_skewness
from .interpolants import RATIO_SUPREMUM, default_interpolants

__all__ = [
    "GAMMA1_MIN",
    "TAU_MAX",
    "Strategy",
    "FallbackReason",
    "TaylorCoeffs",
    "FitResult",
    "fit_sla_classic",
    "fit_sla_interpolant",
    "fit_esla",
    "esn_poly_derivatives",
]

GAMMA1_MIN = 1e-3
TAU_MAX = 10.0


class Strategy(str, enum.Enum):
    GAUSSIAN = "gaussian"
    SLA_CLASSIC = "sla_classic"
    SLA_INTERPOLANT = "sla_interpolant"
    ESLA = "esla"


class FallbackReason(str, enum.Enum):
    GAMMA1_NEAR_ZERO = "gamma1_near_zero"
    TAU_OUT_OF_RANGE = "tau_out_of_range"
    RATIO_OUT_OF_BOUNDS = "ratio_out_of_bounds"


@dataclass(frozen=True)
class TaylorCoeffs:
    """Standardized expansion terms at the mode.

    Attributes
    ----------
    mu_tilde : float
        First-order coefficient; the mean of the matched density.
    gamma1_tilde : float
        Third log-derivative at the mode.
    gamma2_tilde : float or None
        Fourth log-derivative at the mode; ``None`` for third-order input.
    """

    mu_tilde: float
    gamma1_tilde: float
    gamma2_tilde: Optional[float] = None

    def __post_init__(self):
        for name in ("mu_tilde", "gamma1_tilde", "gamma2_tilde"):
            v = getattr(self, name)
            if v is None and name == "gamma2_tilde":
                continue
            v = float(v)
            if not math.isfinite(v):
                raise InvalidArgumentError(f"{name} must be finite")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class FitResult:
    params: EsnParams
    strategy_used: Strategy
    fallback_reason: Optional[FallbackReason] = None

    def __post_init__(self):
        if self.strategy_used is Strategy.ESLA and self.fallback_reason is not None:
            raise InvalidArgumentError("an esla fit carries no fallback reason")
        if self.strategy_used in (Strategy.SLA_CLASSIC, Strategy.SLA_INTERPOLANT) and self.params.tau != 0.0:
            raise InvalidArgumentError("Skew Normal fits have tau = 0")

    def with_reason(self, reason):
        return FitResult(self.params, self.strategy_used, reason)


def _omega_squared(b, c2):
    """Positive root of ``c*s**2 + d*s - 1 = 0`` with ``c = b**2 (1 + C2)``, ``d = 1 - b**2``."""
    c = b * b * (1.0 + c2)
    d = 1.0 - b * b
    disc = d * d + 4.0 * c
    if not disc > 0.0:
        return None
    root = math.sqrt(disc)
    # pick the cancellation-free form of the same root
    s = 2.0 / (d + root) if d >= 0.0 else (root - d) / (2.0 * c)
    return s if math.isfinite(s) and s > 0.0 else None


def _assemble(mu, omega, alpha, tau, c1):
    delta = alpha / math.sqrt(1.0 + alpha * alpha)
    return EsnParams(mu - omega * delta * c1, omega, alpha, tau)


def _gaussian(tc):
    return FitResult(EsnParams(tc.mu_tilde, 1.0, 0.0, 0.0), Strategy.GAUSSIAN)


def fit_sla_classic(tc):
    """Skew Normal fit matching mean, unit variance and the third-derivative polynomial.

    Solves ``C_3(0) (alpha/omega)**3 = gamma1_tilde``. The variance equation
    always has exactly one positive root, so every finite ``gamma1_tilde``
    yields a fit; :class:`SkewnessUnattainableError` is raised only if the
    arithmetic overflows.
    """
    g1 = tc.gamma1_tilde
    if g1 == 0.0:
        return _gaussian(tc)
    c = c_funs(0.0)
    b = float(np.cbrt(g1 / c[3]))
    s = _omega_squared(b, c[2])
    if s is None:
        raise SkewnessUnattainableError(f"no positive scale for gamma1_tilde={g1!r}", best_effort=_gaussian(tc))
    omega = math.sqrt(s)
    return FitResult(_assemble(tc.mu_tilde, omega, omega * b, 0.0, c[1]), Strategy.SLA_CLASSIC)


def fit_sla_interpolant(tc, interp=None):
    """Skew Normal fit through the third-derivative -> skewness map.

    The tabulated map gives the standardized skewness directly, after which
    the moment system (mean ``mu_tilde``, variance 1) has a closed-form
    solution. Out-of-table input falls back to :func:`fit_sla_classic`.
    """
    g1 = tc.gamma1_tilde
    if g1 == 0.0:
        return _gaussian(tc)
    if interp is None:
        interp = default_interpolants()[0]
    if not interp.contains(g1):
        return fit_sla_classic(tc).with_reason(FallbackReason.RATIO_OUT_OF_BOUNDS)
    c = c_funs(0.0)
    delta = delta_from_skewness(interp(g1), 0.0)
    alpha = delta / math.sqrt(1.0 - delta * delta)
    omega = 1.0 / math.sqrt(1.0 + c[2] * delta * delta)
    return FitResult(_assemble(tc.mu_tilde, omega, alpha, 0.0, c[1]), Strategy.SLA_INTERPOLANT)


def fit_esla(tc, tau_interp=None, fallback=None):
    """Extended Skew Normal fit from third and fourth derivatives.

    ``tau`` comes from inverting ``C_4/C_3**(4/3)`` at the observed ratio
    ``gamma2/|gamma1|**(4/3)``; the remaining parameters then follow as in
    the third-order fit with ``C_r(tau)`` in place of ``C_r(0)``.

    Fallbacks to :func:`fit_sla_interpolant` (the reason is recorded):

    * ``|gamma1| < GAMMA1_MIN``: gamma1_near_zero;
    * ratio above its supremum or not finite: ratio_out_of_bounds;
    * ratio attainable but ``|tau| > TAU_MAX``: tau_out_of_range.
    """
    if tc.gamma2_tilde is None:
        raise InvalidArgumentError("fit_esla needs gamma2_tilde")
    g1, g2 = tc.gamma1_tilde, tc.gamma2_tilde
    if g1 == 0.0:
        return _gaussian(tc)
    if tau_interp is None or fallback is None:
        skew, tau_table = default_interpolants()
        tau_interp = tau_table if tau_interp is None else tau_interp
        fallback = skew if fallback is None else fallback

    def fall(reason):
        return fit_sla_interpolant(tc, fallback).with_reason(reason)

    if abs(g1) < GAMMA1_MIN:
        return fall(FallbackReason.GAMMA1_NEAR_ZERO)
    ratio = g2 / abs(g1) ** (4.0 / 3.0)
    if not math.isfinite(ratio) or ratio >= RATIO_SUPREMUM:
        return fall(FallbackReason.RATIO_OUT_OF_BOUNDS)
    if not tau_interp.contains(ratio):
        return fall(FallbackReason.TAU_OUT_OF_RANGE)
    tau = tau_interp(ratio)
    if abs(tau) > TAU_MAX:
        return fall(FallbackReason.TAU_OUT_OF_RANGE)
    c = c_funs(tau)
    b = math.copysign(float(np.cbrt(abs(g1) / c[3])), g1)
    s = _omega_squared(b, c[2])
    if s is None:
        return fall(FallbackReason.RATIO_OUT_OF_BOUNDS)
    omega = math.sqrt(s)
    return FitResult(_assemble(tc.mu_tilde, omega, omega * b, tau, c[1]), Strategy.ESLA)


def esn_poly_derivatives(p):
    """Small-``alpha`` approximations ``(C_3(tau) k**3, C_4(tau) k**4)`` with ``k = alpha/omega``.

    These approximate the third and fourth log-derivatives at the mode; the
    error is of relative order ``alpha**2``.
    """
    c = c_funs(p.tau)
    k = p.alpha / p.omega
    return float(c[3] * k**3), float(c[4] * k**4)
