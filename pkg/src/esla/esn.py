"""Extended Skew Normal distribution: C-function calculus, density, moments, modes.

The density of ``ESN(xi, omega, alpha, tau)`` is

    f(t) = phi(z) * Phi(tau * sqrt(1 + alpha**2) + alpha * z) / (omega * Phi(tau)),

with ``z = (t - xi) / omega``. Setting ``tau = 0`` gives the Skew Normal and
``alpha = 0`` the Gaussian ``N(xi, omega**2)``.

``C_r(tau)`` denotes the r-th derivative of ``log(2 * Phi(tau))``; every moment,
cumulant and log-derivative of the ESN is expressed through these.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import erfcx, log_ndtr

from .errors import InvalidArgumentError, SkewnessUnattainableError, TauRangeWarning

__all__ = [
    "TAU_LIMIT",
    "EsnParams",
    "Moments",
    "c_fun",
    "c_funs",
    "esn_logpdf",
    "esn_pdf",
    "esn_log_derivative",
    "esn_moments",
    "esn_cumulant_gen",
    "delta_from_skewness",
    "max_skewness",
    "esn_mode",
    "tail_gap",
]

TAU_LIMIT = 35.0
MILLS_SWITCH = -5.0

_LOG_2PI = math.log(2.0 * math.pi)
_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
_LD = np.longdouble


def _mills_gap(x, nterms=200):
    """Return ``1/R(x) - x`` for the Mills ratio ``R``, valid for ``x >= 5``.

    Evaluated bottom-up from the continued fraction
    ``R(x) = 1/(x + 1/(x + 2/(x + 3/(x + ...))))`` in extended precision, so the
    small gap is obtained without subtracting two large numbers.
    """
    x = np.asarray(x, dtype=_LD)
    tail = np.zeros_like(x)
    for k in range(nterms, 1, -1):
        tail = k / (x + tail)
    return 1 / (x + tail)


def _higher(c1, c2, c3, tau):
    c4 = -tau * c3 - 2 * c2 - 2 * c2 * c2 - 2 * c1 * c3
    c5 = -3 * c3 - tau * c4 - 6 * c2 * c3 - 2 * c1 * c4
    return c4, c5


def c_funs(tau):
    """Evaluate ``C_0 .. C_5`` at ``tau``.

    Parameters
    ----------
    tau : float or array_like
        Points at which to evaluate.

    Returns
    -------
    ndarray, shape (6,) + shape(tau)
        Row ``r`` holds ``C_r(tau)``.

    Notes
    -----
    For ``tau >= MILLS_SWITCH`` the recursions

        C_2 = -C_1**2 - tau*C_1
        C_3 = -tau*C_2 - 2*C_1*C_2 - C_1
        C_4 = -tau*C_3 - 2*C_2 - 2*C_2**2 - 2*C_1*C_3
        C_5 = -3*C_3 - tau*C_4 - 6*C_2*C_3 - 2*C_1*C_4

    are applied directly to ``C_1 = phi/Phi``. Below the switch ``phi/Phi``
    grows like ``-tau`` while the higher orders shrink like powers of
    ``1/tau``; there ``C_1`` is rebuilt from the Mills-ratio gap and the
    recursion runs in extended precision.
    """
    tau = np.asarray(tau, dtype=float)
    out = np.empty((6,) + tau.shape)
    out[0] = math.log(2.0) + log_ndtr(tau)

    low = tau < MILLS_SWITCH
    if np.any(low):
        t = tau[low].astype(_LD)
        x = -t
        gap = _mills_gap(x)
        c1 = x + gap
        c2 = -c1 * gap
        # C_3 = C_1 * (x*gap - 1 + 2*gap**2), with x*gap - 1 formed in long double
        c3 = c1 * ((x * gap - 1) + 2 * gap * gap)
        c4, c5 = _higher(c1, c2, c3, t)
        out[1:, low] = np.array([c1, c2, c3, c4, c5], dtype=float)

    high = ~low
    if np.any(high):
        t = tau[high]
        neg = np.minimum(t, 0.0)
        pos = np.maximum(t, 0.0)
        c1 = np.where(
            t < 0,
            _SQRT_2_OVER_PI / erfcx(-neg / math.sqrt(2.0)),
            np.exp(-0.5 * pos * pos - 0.5 * _LOG_2PI - log_ndtr(pos)),
        )
        c2 = -c1 * (c1 + t)
        c3 = -t * c2 - 2 * c1 * c2 - c1
        c4, c5 = _higher(c1, c2, c3, t)
        out[1:, high] = np.array([c1, c2, c3, c4, c5])
    return out


def c_fun(r, tau):
    """r-th derivative of ``log(2 * Phi)`` at ``tau`` for ``r`` in 0..5.

    >>> round(float(c_fun(1, 0.0)), 7)
    0.7978846
    """
    if isinstance(r, bool) or not isinstance(r, (int, np.integer)) or not 0 <= r <= 5:
        raise InvalidArgumentError(f"order r must be an integer in 0..5, got {r!r}")
    tau_arr = np.asarray(tau, dtype=float)
    if not np.all(np.isfinite(tau_arr)):
        raise InvalidArgumentError("tau must be finite")
    val = c_funs(tau_arr)[r]
    return float(val) if val.ndim == 0 else val


@dataclass(frozen=True)
class EsnParams:
    """Location ``xi``, scale ``omega``, shape ``alpha`` and hidden mean ``tau``.

    ``|tau|`` beyond ``TAU_LIMIT`` is clamped with a :class:`TauRangeWarning`;
    the density is numerically Gaussian there.
    """

    xi: float
    omega: float
    alpha: float
    tau: float = 0.0

    def __post_init__(self):
        for name in ("xi", "omega", "alpha", "tau"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidArgumentError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if self.omega <= 0:
            raise InvalidArgumentError(f"omega must be positive, got {self.omega}")
        if abs(self.tau) > TAU_LIMIT:
            warnings.warn(
                f"tau={self.tau} outside [-{TAU_LIMIT}, {TAU_LIMIT}], clamped",
                TauRangeWarning,
                stacklevel=3,
            )
            object.__setattr__(self, "tau", math.copysign(TAU_LIMIT, self.tau))

    @property
    def delta(self):
        return self.alpha / math.sqrt(1.0 + self.alpha * self.alpha)

    @property
    def nu(self):
        """Shift of the skewing argument, ``tau * sqrt(1 + alpha**2)``."""
        return self.tau * math.sqrt(1.0 + self.alpha * self.alpha)

    def standardize(self, t):
        return (np.asarray(t, dtype=float) - self.xi) / self.omega

    def as_tuple(self):
        return (self.xi, self.omega, self.alpha, self.tau)


@dataclass(frozen=True)
class Moments:
    """Mean, variance, standardized skewness and excess kurtosis."""

    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float

    @property
    def sd(self):
        return math.sqrt(self.variance)


def esn_logpdf(p, t):
    """Log density of ``ESN(p)`` at ``t`` (scalar or array)."""
    z = p.standardize(t)
    out = (
        -0.5 * z * z
        - 0.5 * _LOG_2PI
        - math.log(p.omega)
        + log_ndtr(p.nu + p.alpha * z)
        - float(log_ndtr(p.tau))
    )
    return float(out) if np.ndim(out) == 0 else out


def esn_pdf(p, t):
    return np.exp(esn_logpdf(p, t))


def esn_log_derivative(p, t, order):
    """Analytic ``order``-th derivative of the log density at ``t``.

    For ``order >= 3`` this is ``C_order(nu + alpha*z) * (alpha/omega)**order``.
    """
    if order not in (1, 2, 3, 4, 5):
        raise InvalidArgumentError(f"order must be in 1..5, got {order}")
    z = p.standardize(t)
    lam = p.alpha / p.omega
    c = c_funs(p.nu + p.alpha * z)[order]
    out = c * lam**order
    if order == 1:
        out = out - z / p.omega
    elif order == 2:
        out = out - 1.0 / p.omega**2
    return float(out) if np.ndim(out) == 0 else out


def esn_moments(p):
    """Mean, variance, skewness and excess kurtosis from the cumulants."""
    c = c_funs(p.tau)
    d = p.delta
    spread = 1.0 + c[2] * d * d
    # C_2 lies in (-1, 0) and |delta| < 1
    assert spread > 0.0, "non-positive variance factor"
    return Moments(
        mean=float(p.xi + c[1] * p.omega * d),
        variance=float(p.omega**2 * spread),
        skewness=float(c[3] * d**3 / spread**1.5),
        excess_kurtosis=float(c[4] * d**4 / spread**2),
    )


def esn_cumulant_gen(p, u):
    """Cumulant generating function ``K(u) = log E exp(u T)``."""
    u = np.asarray(u, dtype=float)
    shift = c_funs(p.tau + p.delta * p.omega * u)[0] - c_funs(p.tau)[0]
    out = p.xi * u + 0.5 * p.omega**2 * u * u + shift
    return float(out) if out.ndim == 0 else out


def max_skewness(tau):
    """Supremum of ``|gamma_1|`` over ``|delta| < 1`` at fixed ``tau``."""
    c = c_funs(tau)
    return float(c[3] / (1.0 + c[2]) ** 1.5)


def delta_from_skewness(gamma1, tau):
    """Invert the skewness formula for ``delta`` at fixed ``tau``.

    Raises
    ------
    SkewnessUnattainableError
        If ``|gamma1|`` is at or above :func:`max_skewness` for this ``tau``.
    """
    gamma1 = float(gamma1)
    if gamma1 == 0.0:
        return 0.0
    c = c_funs(tau)
    g23 = abs(gamma1) ** (2.0 / 3.0)
    denom = c[3] ** (2.0 / 3.0) - c[2] * g23
    if denom <= 0.0:
        raise SkewnessUnattainableError(f"skewness {gamma1} unattainable at tau={tau}")
    d2 = g23 / denom
    if d2 >= 1.0:
        raise SkewnessUnattainableError(
            f"|skewness| {abs(gamma1):.6g} >= attainable bound "
            f"{max_skewness(tau):.6g} at tau={tau}"
        )
    return math.copysign(math.sqrt(d2), gamma1)


def _score_z(p, z):
    # derivative of the log density with respect to the standardized variable
    return -z + p.alpha * c_funs(p.nu + p.alpha * z)[1]


def esn_mode(p, method="exact"):
    """Mode of the ESN density.

    ``approximate`` linearizes the score around ``xi``:
    ``xi + omega * alpha * C_1(nu) / (1 - C_2(nu) * alpha**2)``.
    ``exact`` brackets the maximum on a 1024-point grid and solves the score
    equation inside the bracket; the log density is strictly concave, so the
    root is the unique mode.
    """
    if method == "approximate":
        c = c_funs(p.nu)
        z = p.alpha * c[1] / (1.0 - c[2] * p.alpha**2)
        return p.xi + p.omega * float(z)
    if method != "exact":
        raise InvalidArgumentError(f"unknown mode method {method!r}")
    if p.alpha == 0.0:
        return p.xi
    half = 8.0 + abs(p.tau)
    grid = np.linspace(-half, half, 1024)
    logf = -0.5 * grid**2 + log_ndtr(p.nu + p.alpha * grid)
    k = int(np.argmax(logf))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, grid.size - 1)]
    while _score_z(p, lo) < 0:
        lo -= half
    while _score_z(p, hi) > 0:
        hi += half
    z = brentq(lambda s: float(_score_z(p, s)), lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps)
    return p.xi + p.omega * z


def tail_gap(p, x, side, log_abs=False):
    """Log density minus its leading tail expansion at ``x``.

    Right tail: the leading term is ``-z**2/2`` plus the normalizing constants,
    so the gap is ``log Phi(nu + alpha z)``. Left tail: the leading term is
    ``-(1 + alpha**2) z**2/2 - alpha nu z - nu**2/2 - log(-alpha z sqrt(2 pi))``
    plus the same constants. Both residuals are evaluated in closed form to
    avoid cancelling against the quadratic. ``z`` is the standardized argument;
    for negative ``alpha`` the density is reflected so the left tail stays the
    light one.

    With ``log_abs=True`` returns ``log|gap|``, which stays representable when
    the right-tail gap itself underflows (it is ``O(exp(-(alpha z)**2/2))``).
    """
    if p.alpha == 0.0:
        raise InvalidArgumentError("tail expansion degenerates for alpha = 0")
    if side not in ("left", "right"):
        raise InvalidArgumentError(f"side must be 'left' or 'right', got {side!r}")
    z = float(p.standardize(x))
    alpha = p.alpha
    if alpha < 0:
        alpha, z = -alpha, -z
        side = "left" if side == "right" else "right"
    if (side == "right" and z < 4.0) or (side == "left" and z > -4.0):
        raise InvalidArgumentError("tail expansion needs |standardized x| >= 4 on the requested side")
    w = p.nu + alpha * z
    if side == "right":
        gap = float(log_ndtr(w))
        if not log_abs:
            return gap
        if gap < -1e-8:
            return math.log(-gap)
        # -log Phi(w) = Q(w) * (1 + Q(w)/2 + ...), Q(w) = Phi(-w)
        return float(log_ndtr(-w))
    # log Phi(w) + w**2/2 == log(erfcx(-w/sqrt 2) / 2)
    gap = math.log(0.5 * float(erfcx(-w / math.sqrt(2.0)))) + math.log(-alpha * z * math.sqrt(2.0 * math.pi))
    return math.log(abs(gap)) if log_abs else gap
