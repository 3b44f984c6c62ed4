import math

import numpy as np
import pytest
import yaml
from scipy import stats

from esla.errors import ExtractionError, InvalidArgumentError
from esla.esn import EsnParams, esn_log_derivative, esn_logpdf, esn_mode
from esla.lgm import (
    GlmModel,
    GridDensity,
    extract_taylor_coeffs,
    fd_derivatives,
    gaussian_approximation,
    laplace_log_density,
    likelihood_bound,
    marginal_by_strategy,
    strategy_grid,
    taylor_expansion,
    taylor_expansion_from_logpdf,
    verify_marginal_gaussian_bound,
)
from esla.experiment import simulate_model
from esla.fitters import esn_poly_derivatives
from esla.oracle import quadrature_posterior, summarize


def exact_coefficient_posterior(m):
    """Closed-form coefficient posterior of the gaussian-family model."""
    v = 1.0 / m.noise_precision + 1.0 / m.coupling
    X = m.design
    prec = m.beta_precision + X.T @ X / v
    cov = np.linalg.inv(prec)
    return cov @ (X.T @ m.responses) / v, cov


class TestModel:
    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(family="binomial", responses=[1.0], covariate=[0.0]),
            dict(family="bernoulli", responses=[2.0], covariate=[0.0]),
            dict(family="poisson", responses=[1.5], covariate=[0.0]),
            dict(family="poisson", responses=[1.0, 2.0], covariate=[0.0]),
            dict(family="gaussian", responses=[], covariate=[]),
            dict(family="gaussian", responses=[np.nan], covariate=[0.0]),
            dict(family="gaussian", responses=[1.0], covariate=[0.0], beta_precision=-1.0),
            dict(family="gaussian", responses=[1.0], covariate=[0.0], beta_precision=[[1.0, 2.0], [0.0, 1.0]]),
            dict(family="gaussian", responses=[1.0], covariate=[0.0], coupling=0.0),
        ],
    )
    def test_rejects(self, kwargs):
        with pytest.raises(InvalidArgumentError):
            GlmModel(**kwargs)

    def test_indices(self, bernoulli_model):
        m = bernoulli_model
        assert m.dim == m.n + 2
        assert m.coefficient_index(1) == m.n + 1
        with pytest.raises(InvalidArgumentError):
            m.coefficient_index(2)

    def test_prior_precision_structure(self, poisson_model):
        m = poisson_model
        q = m.prior_precision
        np.testing.assert_array_equal(q, q.T)
        # eta = X beta + N(0, 1/coupling): the beta block of the covariance is the coefficient prior
        m_soft = GlmModel(m.family, m.responses, m.covariate, 1.0, coupling=4.0)
        cov = np.linalg.inv(m_soft.prior_precision)
        np.testing.assert_allclose(cov[m.n :, m.n :], np.eye(2), atol=1e-12)
        np.testing.assert_allclose(np.diag(cov[: m.n, : m.n]), 1 + m.covariate**2 + 0.25, rtol=1e-12)

    def test_from_mapping(self):
        text = "family: poisson\nresponses: [0, 3, 1]\ncovariate: [0.1, 1.2, -0.4]\nbeta_precision: [0.5, 2.0]\n"
        m = GlmModel.from_mapping(yaml.safe_load(text))
        np.testing.assert_array_equal(m.beta_precision, np.diag([0.5, 2.0]))
        assert m.n == 3
        with pytest.raises(InvalidArgumentError):
            GlmModel.from_mapping({"family": "poisson", "responses": [1], "covariate": [0], "seed": 3})

    def test_immutable_data(self, bernoulli_model):
        with pytest.raises(ValueError):
            bernoulli_model.responses[0] = 0.0


class TestGaussianApproximation:
    @pytest.mark.parametrize("fixture", ["bernoulli_model", "poisson_model", "gaussian_model"])
    def test_gradient_vanishes(self, fixture, request):
        m = request.getfixturevalue(fixture)
        ga = gaussian_approximation(m)
        assert ga.gradient_norm < 1e-8
        k = m.coefficient_index(1)
        h = 1e-5
        e = np.zeros(m.dim)
        e[k] = h
        slope = (m.log_joint(ga.mode + e) - m.log_joint(ga.mode - e)) / (2 * h)
        assert abs(slope) < 1e-4

    def test_covariance_inverts_precision(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal(7)
        m = GlmModel("poisson", rng.poisson(2.0, 7).astype(float), x, 0.5, coupling=20.0)
        ga = gaussian_approximation(m)
        np.testing.assert_allclose(ga.covariance @ ga.precision, np.eye(m.dim), atol=1e-9)

    def test_gaussian_family_exact(self, gaussian_model):
        mean, cov = exact_coefficient_posterior(gaussian_model)
        ga = gaussian_approximation(gaussian_model)
        n = gaussian_model.n
        np.testing.assert_allclose(ga.mode[n:], mean, rtol=1e-10)
        np.testing.assert_allclose(ga.covariance[n:, n:], cov, rtol=1e-8)

    def test_reordering_invariant(self, poisson_model):
        perm = np.random.default_rng(0).permutation(poisson_model.n)
        a = gaussian_approximation(poisson_model)
        b = gaussian_approximation(poisson_model.reordered(perm))
        n = poisson_model.n
        np.testing.assert_allclose(a.mode[n:], b.mode[n:], rtol=1e-10)
        np.testing.assert_allclose(a.mode[:n][perm], b.mode[:n], rtol=1e-10)


class TestGridDensity:
    def test_from_log_normalizes(self):
        x = np.linspace(-8, 8, 401)
        d = GridDensity.from_log(x, -0.5 * x**2 + 1000.0)
        assert d.integral() == pytest.approx(1.0, abs=1e-14)

    @pytest.mark.parametrize(
        "x, y",
        [
            (np.array([0.0, 1.0]), np.array([1.0, 1.0])),
            (np.array([0.0, 2.0, 1.0]), np.ones(3)),
            (np.arange(3.0), np.array([1.0, -1.0, 1.0])),
        ],
    )
    def test_rejects(self, x, y):
        with pytest.raises(InvalidArgumentError):
            GridDensity(x, y)

    def test_text(self):
        d = GridDensity(np.arange(3.0), np.array([0.25, 0.5, 0.25]))
        assert d.to_text().splitlines() == ["x\tdensity", "0.0\t0.25", "1.0\t0.5", "2.0\t0.25"]


class TestLaplace:
    def test_gaussian_family_exact(self, gaussian_model):
        m = gaussian_model
        mean, cov = exact_coefficient_posterior(m)
        i = m.coefficient_index(1)
        grid = strategy_grid(gaussian_approximation(m), i, 201)
        lg = laplace_log_density(m, i, grid)
        ref = stats.norm.logpdf(grid, mean[1], math.sqrt(cov[1, 1]))
        diff = lg - ref
        assert np.ptp(diff) < 1e-8

    def test_latent_index_unsupported(self, bernoulli_model):
        with pytest.raises(InvalidArgumentError):
            laplace_log_density(bernoulli_model, 0, [0.0])

    def test_scalar_input(self, bernoulli_model):
        i = bernoulli_model.coefficient_index(0)
        assert isinstance(laplace_log_density(bernoulli_model, i, 0.1), float)


class TestTaylor:
    def test_stencils_exact_on_polynomials(self):
        f = lambda x: 3 + 2 * x - x**2 + 0.5 * x**3 + 0.25 * x**4  # noqa: E731
        d = fd_derivatives(f, 0.7, 0.1)
        np.testing.assert_allclose(
            [d[1], d[2], d[3], d[4]],
            [2 - 1.4 + 1.5 * 0.49 + 0.343, -2 + 3 * 0.7 + 3 * 0.49, 3 + 6 * 0.7, 6.0],
            rtol=1e-9,
        )

    def test_non_finite(self):
        with pytest.raises(ExtractionError):
            fd_derivatives(lambda x: np.where(x > 0, 0.0, np.nan), 0.0, 0.1)

    def test_recovers_esn_derivatives(self):
        p = EsnParams(0.3, 1.7, 2.5, -0.8)
        center = 0.5
        te = taylor_expansion_from_logpdf(lambda v: esn_logpdf(p, v), center, 1.0)
        mode = esn_mode(p)
        sigma = 1.0 / math.sqrt(-esn_log_derivative(p, mode, 2))
        assert te.mode == pytest.approx(mode, abs=1e-8)
        assert te.scale == pytest.approx(sigma, rel=1e-8)
        c = te.coeffs
        assert c.mu_tilde == pytest.approx(sigma * esn_log_derivative(p, center, 1), rel=1e-7)
        assert c.gamma1_tilde == pytest.approx(sigma**3 * esn_log_derivative(p, mode, 3), rel=1e-5)
        assert c.gamma2_tilde == pytest.approx(sigma**4 * esn_log_derivative(p, mode, 4), rel=1e-4)

    def test_matches_small_shape_approximation(self):
        p = EsnParams(0.0, 1.2, 0.3, -0.5)
        te = taylor_expansion_from_logpdf(lambda v: esn_logpdf(p, v), esn_mode(p), 1.0)
        # scale-free form: polynomial terms times the fitted scale's powers
        g1, g2 = esn_poly_derivatives(p)
        assert te.coeffs.gamma1_tilde == pytest.approx(te.scale**3 * g1, rel=0.05)
        assert te.coeffs.gamma2_tilde == pytest.approx(te.scale**4 * g2, rel=0.05)

    def test_gaussian_family_symmetric(self, gaussian_model):
        c = extract_taylor_coeffs(gaussian_model, gaussian_model.coefficient_index(1))
        assert abs(c.mu_tilde) < 1e-6
        assert abs(c.gamma1_tilde) < 1e-6
        assert abs(c.gamma2_tilde) < 1e-4

    def test_affine_covariate(self, poisson_model):
        # x' = a x + b maps beta' = T beta; transform the prior so the model is unchanged
        a, b = 2.5, -0.7
        T = np.array([[1.0, -b / a], [0.0, 1.0 / a]])
        Tinv = np.linalg.inv(T)
        m = poisson_model
        prec = Tinv.T @ m.beta_precision @ Tinv
        m2 = GlmModel(m.family, m.responses, a * m.covariate + b, 0.5 * (prec + prec.T))
        c1 = extract_taylor_coeffs(m, m.coefficient_index(1))
        c2 = extract_taylor_coeffs(m2, m2.coefficient_index(1))
        np.testing.assert_allclose(
            [c2.mu_tilde, c2.gamma1_tilde, c2.gamma2_tilde],
            [c1.mu_tilde, c1.gamma1_tilde, c1.gamma2_tilde],
            rtol=1e-4, atol=1e-7,
        )

    def test_convex_input(self):
        with pytest.raises(ExtractionError):
            taylor_expansion_from_logpdf(lambda v: 0.5 * v**2, 0.0, 1.0)

    def test_negative_slope_skew(self):
        # single failure at a large covariate pushes the slope to the left
        m = GlmModel("bernoulli", [0.0], [2.0], 0.001)
        c = extract_taylor_coeffs(m, m.coefficient_index(1))
        assert c.gamma1_tilde < -0.3

    def test_step_insensitive(self, bernoulli_model):
        i = bernoulli_model.coefficient_index(1)
        a = taylor_expansion(bernoulli_model, i, step=0.05).coeffs
        b = taylor_expansion(bernoulli_model, i, step=0.1).coeffs
        assert a.gamma1_tilde == pytest.approx(b.gamma1_tilde, rel=1e-4)
        assert a.gamma2_tilde == pytest.approx(b.gamma2_tilde, rel=1e-3)


class TestStrategies:
    @pytest.mark.parametrize("strategy", ["gaussian", "sla", "esla", "la"])
    def test_gaussian_family_exact(self, gaussian_model, strategy, interpolants):
        m = gaussian_model
        i = m.coefficient_index(1)
        mean, cov = exact_coefficient_posterior(m)
        d = marginal_by_strategy(m, i, strategy, interpolants=interpolants)
        ref = stats.norm.pdf(d.abscissa, mean[1], math.sqrt(cov[1, 1]))
        assert np.max(np.abs(d.density - ref)) < 1e-6

    def test_meta_records_fit(self, poisson_model, interpolants):
        i = poisson_model.coefficient_index(1)
        d = marginal_by_strategy(poisson_model, i, "esla", interpolants=interpolants)
        assert d.meta["strategy_used"] in ("esla", "sla_interpolant", "sla_classic")
        assert len(d.meta["params"]) == 4

    def test_interpolant_variant(self, bernoulli_model, interpolants):
        i = bernoulli_model.coefficient_index(1)
        d = marginal_by_strategy(bernoulli_model, i, "sla", sla_variant="interpolant", interpolants=interpolants)
        assert d.meta["strategy_used"] == "sla_interpolant"

    def test_unknown(self, bernoulli_model):
        with pytest.raises(InvalidArgumentError):
            marginal_by_strategy(bernoulli_model, bernoulli_model.coefficient_index(1), "vb")

    def test_skewed_case_ordering(self, interpolants):
        # all three approximations agree on the sign of the skew
        m = GlmModel("bernoulli", [0.0], [2.0], 0.001)
        i = m.coefficient_index(1)
        skews = [summarize(marginal_by_strategy(m, i, s, interpolants=interpolants)).skewness for s in ("sla", "esla", "la")]
        assert all(s < 0 for s in skews)

    def test_single_observation_modes(self, interpolants):
        # across replicates the fourth-order fit sits closer to the Laplace mode
        d_esla, d_sla = [], []
        for rep in range(20):
            m = simulate_model("bernoulli", 1, rep, 0.001)
            i = m.coefficient_index(1)
            ga = gaussian_approximation(m)
            grid = strategy_grid(ga, i)
            te = taylor_expansion(m, i, ga)
            modes = {s: summarize(marginal_by_strategy(m, i, s, grid, ga, te, interpolants=interpolants)).mode for s in ("sla", "esla", "la")}
            d_esla.append(abs(modes["esla"] - modes["la"]))
            d_sla.append(abs(modes["sla"] - modes["la"]))
        assert np.median(d_esla) < np.median(d_sla)

    def test_large_poisson_fits_agree(self, interpolants):
        m = simulate_model("poisson", 100, 0, 0.001)
        i = m.coefficient_index(1)
        ga = gaussian_approximation(m)
        grid = strategy_grid(ga, i)
        te = taylor_expansion(m, i, ga)
        a, b = (marginal_by_strategy(m, i, s, grid, ga, te, interpolants=interpolants) for s in ("sla", "esla"))
        assert np.max(np.abs(a.density - b.density)) < 0.02 * a.density.max()

    @pytest.mark.slow
    @pytest.mark.parametrize("family", ["bernoulli", "poisson"])
    def test_gap_shrinks_with_n(self, family, interpolants):
        # peak-relative sup-norm between sla and la, averaged over replicates
        gaps = []
        for n in (1, 10, 50, 100):
            vals = []
            for rep in range(20):
                m = simulate_model(family, n, rep, 0.001)
                i = m.coefficient_index(1)
                ga = gaussian_approximation(m)
                grid = strategy_grid(ga, i)
                a = marginal_by_strategy(m, i, "sla", grid, ga, interpolants=interpolants)
                b = marginal_by_strategy(m, i, "la", grid, ga)
                vals.append(np.max(np.abs(a.density - b.density)) / b.density.max())
            gaps.append(np.mean(vals))
        assert np.all(np.diff(gaps) < 0), gaps

    def test_close_to_quadrature(self, bernoulli_model, interpolants):
        m = bernoulli_model
        i = m.coefficient_index(1)
        ga = gaussian_approximation(m)
        grid = strategy_grid(ga, i, 301)
        ref = quadrature_posterior(m, (1,), abscissa=grid)[1]
        top = ref.density.max()
        for s, tol in (("sla", 0.1), ("esla", 0.1), ("la", 0.01)):
            d = marginal_by_strategy(m, i, s, grid, ga, interpolants=interpolants)
            assert np.max(np.abs(d.density - ref.density)) < tol * top


class TestGaussianBound:
    def test_likelihood_bounds(self):
        assert likelihood_bound(GlmModel("bernoulli", [0.0, 1.0], [0.0, 1.0])) == 1.0
        pois = GlmModel("poisson", [0.0, 2.0], [0.0, 1.0])
        assert likelihood_bound(pois) == pytest.approx(stats.poisson.pmf(2, 2.0), rel=1e-12)
        gauss = GlmModel("gaussian", [0.0, 2.0, 1.0], [0.0, 1.0, 2.0], noise_precision=4.0)
        assert likelihood_bound(gauss) == pytest.approx((4.0 / (2 * math.pi)) ** 1.5, rel=1e-12)

    @pytest.mark.parametrize("fixture", ["bernoulli_model", "poisson_model", "gaussian_model"])
    def test_holds(self, fixture, request):
        m = request.getfixturevalue(fixture)
        assert verify_marginal_gaussian_bound(m, m.coefficient_index(1), likelihood_bound(m))

    def test_detects_violation(self, poisson_model):
        m = poisson_model
        assert not verify_marginal_gaussian_bound(m, m.coefficient_index(1), 1e-3 * likelihood_bound(m))
