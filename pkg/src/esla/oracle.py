"""Reference posteriors and summary statistics.

Brute-force quadrature over the regression coefficients, an adaptive
random-walk Metropolis sampler, density distances and grid summaries.

The oracle integrates the coefficient posterior with ``eta = X beta``
held exactly. For the gaussian family the stiff ``eta - X beta`` term of
the latent model is absorbed into the observation variance, so the oracle
is exact for that model too; for the other families the neglected
jitter has variance ``1/coupling``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy import integrate, optimize, stats
from scipy.interpolate import CubicSpline
from scipy.special import gammaln, log_expit

from .errors import (
    AmbiguousModeError,
    InvalidArgumentError,
    McmcDiagnosticsError,
    UnsupportedDimensionError,
)
from .lgm import GridDensity

__all__ = [
    "SummaryStats",
    "McmcConfig",
    "McmcResult",
    "coefficient_posterior_mode",
    "log_unnormalized_marginal",
    "quadrature_posterior",
    "mcmc_run",
    "mcmc_posterior",
    "kde_density",
    "summarize",
    "density_distance",
    "conditional_bound_ratio",
    "verify_conditional_gaussian_bound",
]

_FAMILY_CODE = {"bernoulli": 0, "poisson": 1, "gaussian": 2}


def _obs_variance(m):
    return 1.0 / m.noise_precision + 1.0 / m.coupling


def _loglik_terms(m, eta):
    """Normalized log-likelihood of each observation given ``eta`` (broadcast over leading axes)."""
    y = m.responses
    if m.family == "bernoulli":
        return np.where(y > 0, log_expit(eta), log_expit(-eta))
    if m.family == "poisson":
        with np.errstate(over="ignore"):
            return y * eta - np.exp(eta) - gammaln(y + 1.0)
    v = _obs_variance(m)
    return -0.5 * (y - eta) ** 2 / v - 0.5 * math.log(2.0 * math.pi * v)


def _score_curv(m, eta):
    y = m.responses
    if m.family == "bernoulli":
        p = np.exp(log_expit(eta))
        return y - p, p * np.exp(log_expit(-eta))
    if m.family == "poisson":
        with np.errstate(over="ignore"):
            mu = np.exp(eta)
        return y - mu, mu
    v = _obs_variance(m)
    return (y - eta) / v, np.full(np.shape(eta), 1.0 / v)


def _log_prior(m, beta):
    p = m.beta_precision
    quad = np.einsum("...i,ij,...j->...", beta, p, beta)
    return -0.5 * quad - math.log(2.0 * math.pi) + 0.5 * np.linalg.slogdet(p)[1]


def coefficient_posterior_mode(m):
    """Mode and covariance (inverse negative Hessian) of the coefficient posterior."""
    X, P = m.design, m.beta_precision
    beta = np.zeros(2)

    def f(b):
        return float(np.sum(_loglik_terms(m, X @ b)) + _log_prior(m, b))

    for _ in range(200):
        d1, w = _score_curv(m, X @ beta)
        g = X.T @ d1 - P @ beta
        h = X.T @ (w[:, None] * X) + P
        step = np.linalg.solve(h, g)
        t, f0 = 1.0, f(beta)
        while t > 1e-12 and not f(beta + t * step) >= f0 - 1e-12 * (1 + abs(f0)):
            t *= 0.5
        beta = beta + t * step
        if np.max(np.abs(g)) < 1e-11 or np.max(np.abs(t * step)) < 1e-15 * (1 + np.max(np.abs(beta))):
            break
    d1, w = _score_curv(m, X @ beta)
    h = X.T @ (w[:, None] * X) + P
    return beta, np.linalg.inv(h)


def _cond_logpost(m, k, values, u):
    """Log posterior at ``beta_k = values``, ``beta_j = u`` with score and curvature in ``u``."""
    j = 1 - k
    X, P = m.design, m.beta_precision
    eta = values[:, None] * X[None, :, k] + u[:, None] * X[None, :, j]
    beta = np.empty(values.shape + (2,))
    beta[:, k], beta[:, j] = values, u
    f = np.sum(_loglik_terms(m, eta), axis=1) + _log_prior(m, beta)
    d1, w = _score_curv(m, eta)
    g = d1 @ X[:, j] - (P[j, j] * u + P[j, k] * values)
    with np.errstate(over="ignore"):
        # far-out Poisson trial points; their curvature is rejected by the line search
        h = w @ (X[:, j] ** 2) + P[j, j]
    return f, g, h


def _conditional_modes(m, k, values, start):
    """Mode and curvature scale of ``beta_j`` given ``beta_k = v`` for each value (vectorized Newton)."""
    u = np.full(values.shape, float(start))
    for _ in range(200):
        f, g, h = _cond_logpost(m, k, values, u)
        step = g / h
        t = np.ones_like(u)
        for _ in range(60):
            f_new = _cond_logpost(m, k, values, u + t * step)[0]
            bad = ~(f_new >= f - 1e-12 * (1 + np.abs(f)))
            if not np.any(bad):
                break
            t = np.where(bad, 0.5 * t, t)
        u = u + t * step
        if np.max(np.abs(g) / np.sqrt(h)) < 1e-10:
            break
    f, _, h = _cond_logpost(m, k, values, u)
    return u, f, 1.0 / np.sqrt(h)


def _edges(logf, center, top, scale, drop, start=6.0, grow=1.5, max_iter=80):
    """Offsets on each side of a concave log density where it has fallen by ``drop``.

    Vectorized over ``center``; returns ``(lo, hi)``.
    """
    out = []
    for sign in (-1.0, 1.0):
        off = start * scale
        for _ in range(max_iter):
            pending = logf(center + sign * off) > top - drop
            if not np.any(pending):
                break
            off = np.where(pending, grow * off, off)
        out.append(center + sign * off)
    return out[0], out[1]


def _log_integral(m, k, values, lo, hi, n_points):
    """``log int exp(log posterior) d beta_j`` over ``[lo, hi]`` for each value."""
    j = 1 - k
    X = m.design
    t = np.linspace(0.0, 1.0, n_points)
    out = np.empty(values.shape)
    chunk = max(1, 2_000_000 // (n_points * max(m.n, 1)))
    for s in range(0, values.size, chunk):
        v = values[s : s + chunk]
        u = lo[s : s + chunk, None] + (hi - lo)[s : s + chunk, None] * t[None, :]
        eta = v[:, None, None] * X[None, None, :, k] + u[:, :, None] * X[None, None, :, j]
        beta = np.empty(u.shape + (2,))
        beta[..., k], beta[..., j] = v[:, None], u
        lg = np.sum(_loglik_terms(m, eta), axis=2) + _log_prior(m, beta)
        top = lg.max(axis=1)
        out[s : s + chunk] = top + np.log(integrate.trapezoid(np.exp(lg - top[:, None]), u, axis=1))
    return out


def log_unnormalized_marginal(m, k, values, n_points=801):
    """``log pi(beta_k = v, y)`` with all normalizing constants, by quadrature over ``beta_j``.

    Each value gets its own window: the conditional log posterior of
    ``beta_j`` is concave, so its edges are placed where it has dropped 40
    below its maximum.
    """
    if k not in (0, 1):
        raise InvalidArgumentError("coefficient number must be 0 or 1")
    values = np.atleast_1d(np.asarray(values, dtype=float))
    mode, _ = coefficient_posterior_mode(m)
    centers, tops, scales = _conditional_modes(m, k, values, mode[1 - k])
    lo, hi = _edges(lambda u: _cond_logpost(m, k, values, u)[0], centers, tops, scales, 40.0)
    return _log_integral(m, k, values, lo, hi, n_points)


def quadrature_posterior(m, coeff_indices=(1,), n_points=801, width=8.0, abscissa=None):
    """Brute-force coefficient marginals.

    Parameters
    ----------
    m : GlmModel
    coeff_indices : sequence of int
        Coefficient numbers (0 intercept, 1 slope); at most three.
    n_points : int
        Points per axis, for both the marginal abscissa and the inner rule.
    width : float
        Initial half-width of the default abscissa in posterior standard
        deviations; each side is stretched until the density is negligible.
    abscissa : array_like, optional
        Evaluate on this grid instead.

    Returns
    -------
    dict
        ``{k: GridDensity}``.
    """
    idx = list(coeff_indices)
    if len(idx) > 3:
        raise UnsupportedDimensionError("quadrature supports at most three coefficients")
    if any(k not in (0, 1) for k in idx):
        raise InvalidArgumentError("coefficient number must be 0 or 1")
    mode, cov = coefficient_posterior_mode(m)
    out = {}
    for k in idx:
        if abscissa is not None:
            grid = np.asarray(abscissa, dtype=float)
        else:
            # the coefficient marginal is log-concave; stretch each side until it is negligible
            sd = math.sqrt(cov[k, k])
            top = log_unnormalized_marginal(m, k, mode[k : k + 1], n_points)[0]
            lo, hi = _edges(
                lambda v: log_unnormalized_marginal(m, k, np.atleast_1d(v), n_points)[0],
                mode[k], top, sd, 30.0, start=width, grow=1.25,
            )
            grid = np.linspace(lo, hi, n_points)
        lg = log_unnormalized_marginal(m, k, grid, n_points)
        out[k] = GridDensity.from_log(grid, lg, {"strategy": "quadrature", "coefficient": k})
    return out


# -- MCMC ---------------------------------------------------------------
@dataclass(frozen=True)
class McmcConfig:
    chains: int = 4
    iterations: int = 25_000
    burn_in: int = 5_000
    step_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if int(self.chains) < 1 or int(self.iterations) < 1:
            raise InvalidArgumentError("chains and iterations must be positive")
        if not 0 <= int(self.burn_in) < int(self.iterations):
            raise InvalidArgumentError("burn_in must lie in [0, iterations)")
        if not self.step_scale > 0:
            raise InvalidArgumentError("step_scale must be positive")
        if int(self.seed) < 0:
            raise InvalidArgumentError("seed must be unsigned")


@dataclass(frozen=True, eq=False)
class McmcResult:
    samples: np.ndarray
    acceptance: np.ndarray
    scales: np.ndarray
    meta: dict = field(default_factory=dict)


@numba.njit(cache=True)
def _log_post(family, y, X, P, obs_var, b):
    lp = -0.5 * (P[0, 0] * b[0] * b[0] + 2.0 * P[0, 1] * b[0] * b[1] + P[1, 1] * b[1] * b[1])
    for i in range(y.shape[0]):
        eta = X[i, 0] * b[0] + X[i, 1] * b[1]
        if family == 0:
            s = -eta if y[i] > 0 else eta
            # -log(1 + e^s)
            lp -= s + math.log1p(math.exp(-s)) if s > 0 else math.log1p(math.exp(s))
        elif family == 1:
            lp += y[i] * eta - math.exp(eta)
        else:
            lp -= 0.5 * (y[i] - eta) ** 2 / obs_var
    return lp


@numba.njit(cache=True)
def _rwm_chain(family, y, X, P, obs_var, start, chol, log_scale, z, u, burn_in, target):
    iters = z.shape[0]
    out = np.empty((iters - burn_in, 2))
    b = start.copy()
    lp = _log_post(family, y, X, P, obs_var, b)
    prop = np.empty(2)
    accepted = 0
    for t in range(iters):
        s = math.exp(log_scale)
        prop[0] = b[0] + s * chol[0, 0] * z[t, 0]
        prop[1] = b[1] + s * (chol[1, 0] * z[t, 0] + chol[1, 1] * z[t, 1])
        lp_new = _log_post(family, y, X, P, obs_var, prop)
        acc = math.log(u[t]) < lp_new - lp
        if acc:
            b[0], b[1] = prop[0], prop[1]
            lp = lp_new
        if t < burn_in:
            # Robbins-Monro steering of the step size
            log_scale += ((1.0 if acc else 0.0) - target) / (t + 1.0) ** 0.6
        else:
            out[t - burn_in, 0], out[t - burn_in, 1] = b[0], b[1]
            accepted += 1 if acc else 0
    return out, accepted / max(iters - burn_in, 1), log_scale


def mcmc_run(m, cfg, target=0.3):
    """Adaptive random-walk Metropolis over ``(beta_0, beta_1)``.

    Chains start at the posterior mode and propose along the Cholesky factor
    of the local covariance. The step size adapts during burn-in only.
    Chain ``c`` draws from ``numpy.random.default_rng([seed, c])``.
    """
    mode, cov = coefficient_posterior_mode(m)
    chol = np.linalg.cholesky(cov)
    y = np.ascontiguousarray(m.responses)
    X = np.ascontiguousarray(m.design)
    P = np.ascontiguousarray(m.beta_precision)
    code = _FAMILY_CODE[m.family]
    draws, acc, scales = [], [], []
    for c in range(int(cfg.chains)):
        rng = np.random.default_rng([int(cfg.seed), c])
        z = rng.standard_normal((int(cfg.iterations), 2))
        u = rng.random(int(cfg.iterations))
        out, rate, ls = _rwm_chain(
            code, y, X, P, _obs_variance(m), mode, chol, math.log(cfg.step_scale * 2.38 / math.sqrt(2.0)),
            z, u, int(cfg.burn_in), target,
        )
        draws.append(out)
        acc.append(rate)
        scales.append(math.exp(ls))
    acc = np.array(acc)
    if np.any((acc < 0.05) | (acc > 0.95)):
        raise McmcDiagnosticsError(f"acceptance rates {acc.tolist()} outside [0.05, 0.95]", acceptance=acc)
    return McmcResult(np.concatenate(draws), acc, np.array(scales), {"target_acceptance": target})


def mcmc_posterior(m, cfg):
    """Post-burn-in draws of ``(beta_0, beta_1)``, chains stacked: shape ``(chains*(iterations-burn_in), 2)``."""
    return mcmc_run(m, cfg).samples


def kde_density(samples, abscissa, bandwidth=None):
    """Gaussian kernel density on ``abscissa``; normal-reference bandwidth by default."""
    s = np.asarray(samples, dtype=float).reshape(-1)
    x = np.asarray(abscissa, dtype=float)
    if bandwidth is None:
        bandwidth = (4.0 / 3.0) ** 0.2 * np.std(s, ddof=1) * s.size ** -0.2
    dens = np.zeros(x.shape)
    for start in range(0, s.size, 4096):
        d = (x[:, None] - s[None, start : start + 4096]) / bandwidth
        dens += np.exp(-0.5 * d * d).sum(axis=1)
    dens /= s.size * bandwidth * math.sqrt(2.0 * math.pi)
    dens /= integrate.trapezoid(dens, x)
    return GridDensity(x, dens, {"kernel": "gaussian", "bandwidth": float(bandwidth)})


# -- summaries ----------------------------------------------------------
@dataclass(frozen=True)
class SummaryStats:
    mode: float
    iqr: float
    skewness: float

    def __post_init__(self):
        if not self.iqr > 0:
            raise InvalidArgumentError("iqr must be positive")


def _refine_mode(x, d, j):
    """Stationary point of a quartic through five log-density values around ``j``."""
    if j < 2 or j > x.size - 3 or np.any(d[j - 2 : j + 3] <= 0):
        if 1 <= j <= x.size - 2 and np.all(d[j - 1 : j + 2] > 0):
            y = np.log(d[j - 1 : j + 2])
            h = x[j] - x[j - 1]
            return float(x[j] + h * (y[0] - y[2]) / (2.0 * (y[0] - 2.0 * y[1] + y[2])))
        return float(x[j])
    h = x[j] - x[j - 1]
    t = (x[j - 2 : j + 3] - x[j]) / h
    coef = np.polynomial.polynomial.polyfit(t, np.log(d[j - 2 : j + 3]), 4)
    poly = np.polynomial.Polynomial(coef)
    roots = poly.deriv().roots()
    roots = roots[(np.abs(roots.imag) < 1e-12) & (np.abs(roots.real) <= 1.0)].real
    if roots.size == 0:
        return float(x[j])
    best = roots[np.argmax(poly(roots))]
    return float(x[j] + h * best)


def summarize(d):
    """Mode, interquartile range and skewness of a grid density.

    The mode is refined by a local quartic in the log density; quartiles
    come from the integrated cubic spline of the density; moments use
    Simpson's rule.
    """
    x, f = d.abscissa, d.density
    top = f.max()
    if top <= 0 or f.min() >= top * (1.0 - 1e-12):
        raise AmbiguousModeError("density is flat")
    near = np.flatnonzero(f >= top * (1.0 - 1e-12))
    if near.size > 1 and np.any(np.diff(near) > 1):
        raise AmbiguousModeError("several separated maxima")
    j = int(near[np.argmax(f[near])])
    mode = _refine_mode(x, f, j)
    mode = min(max(mode, x[0]), x[-1])

    cdf = CubicSpline(x, f).antiderivative()
    total = cdf(x[-1])
    knots = cdf(x) / total

    def quantile(q):
        i = int(np.clip(np.searchsorted(knots, q), 1, x.size - 1))
        lo, hi = x[max(i - 2, 0)], x[min(i + 1, x.size - 1)]
        return optimize.brentq(lambda v: cdf(v) / total - q, lo, hi, xtol=1e-14, rtol=1e-15)

    iqr = quantile(0.75) - quantile(0.25)
    mass = integrate.simpson(f, x=x)
    mean = integrate.simpson(x * f, x=x) / mass
    var = integrate.simpson((x - mean) ** 2 * f, x=x) / mass
    m3 = integrate.simpson((x - mean) ** 3 * f, x=x) / mass
    return SummaryStats(float(mode), float(iqr), float(m3 / var**1.5))


def density_distance(a, b, metric="kl"):
    """KL(a || b), sup-norm or total variation between densities on one grid."""
    if a.abscissa.shape != b.abscissa.shape or not np.array_equal(a.abscissa, b.abscissa):
        raise InvalidArgumentError("densities must share their abscissa")
    x = a.abscissa
    if metric == "kl":
        pa = np.maximum(a.density, 1e-300)
        pb = np.maximum(b.density, 1e-300)
        return float(integrate.trapezoid(a.density * (np.log(pa) - np.log(pb)), x))
    if metric == "sup":
        return float(np.max(np.abs(a.density - b.density)))
    if metric == "tv":
        return float(0.5 * integrate.trapezoid(np.abs(a.density - b.density), x))
    raise InvalidArgumentError("metric must be 'kl', 'sup' or 'tv'")


# -- hierarchical-t bound -------------------------------------------------
def _hierarchical_t_draw(dim, dof, seed, noise_precision):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((dim, dim))
    q = a @ a.T / dim + 0.5 * np.eye(dim)
    lam = rng.gamma(0.5 * dof, 2.0 / dof, size=dim)
    cov = np.linalg.inv(q) / np.sqrt(np.outer(lam, lam))
    x = rng.multivariate_normal(np.zeros(dim), cov)
    y = x + rng.standard_normal(dim) / math.sqrt(noise_precision)
    return q, lam, cov, y


def conditional_bound_ratio(dim, dof, seed, noise_precision=1.0, n_points=801):
    """Largest ratio of ``pi(x_i, y | lambda)`` to ``K * N(x_i; 0, Sigma_ii / lambda_i)`` over ``i`` and a grid.

    The latent field is ``x | lambda ~ N(0, Lambda^-1/2 Q^-1 Lambda^-1/2)``
    with ``lambda_i ~ Gamma(dof/2, rate=dof/2)`` and Gaussian data
    ``y_i ~ N(x_i, 1/noise_precision)``; ``K`` is the product of the
    per-observation likelihood suprema.
    """
    if not (isinstance(dim, (int, np.integer)) and 1 <= dim <= 5):
        raise InvalidArgumentError("dim must be an integer in 1..5")
    if not dof > 0:
        raise InvalidArgumentError("dof must be positive")
    q, lam, cov, y = _hierarchical_t_draw(int(dim), float(dof), int(seed), noise_precision)
    log_k = 0.5 * dim * math.log(noise_precision / (2.0 * math.pi))
    noise = np.eye(dim) / noise_precision
    worst = -np.inf
    for i in range(dim):
        sd = math.sqrt(cov[i, i])
        lo, hi = min(-8.0 * sd, y[i] - 8.0), max(8.0 * sd, y[i] + 8.0)
        grid = np.linspace(lo, hi, n_points)
        w = cov[:, i] / cov[i, i]
        cond = cov - np.outer(cov[:, i], cov[i, :]) / cov[i, i]
        # pi(x_i, y) / N(x_i) is the conditional density of y given x_i
        y_dist = stats.multivariate_normal(mean=np.zeros(dim), cov=cond + noise)
        ratio = np.atleast_1d(y_dist.logpdf(y[None, :] - grid[:, None] * w[None, :])) - log_k
        worst = max(worst, float(np.max(ratio)))
    return math.exp(worst)


def verify_conditional_gaussian_bound(dim, dof, seed, bound_scale=1.0, rtol=1e-9):
    """Whether ``pi(x_i, y | lambda) <= bound_scale * K * N(x_i; 0, Sigma_ii/lambda_i)`` holds on the grid."""
    return conditional_bound_ratio(dim, dof, seed) <= bound_scale * (1.0 + rtol)
