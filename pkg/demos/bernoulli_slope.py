"""
Approximations of a logistic regression slope
=============================================

A ten-observation logistic regression with a vague prior. The slope
marginal is computed by brute-force quadrature and by four approximations;
their modes, spreads and distances to the reference are printed side by
side.
"""

import numpy as np

from esla.experiment import simulate_model
from esla.lgm import gaussian_approximation, marginal_by_strategy, taylor_expansion
from esla.oracle import density_distance, quadrature_posterior, summarize

model = simulate_model("bernoulli", n=10, seed=0, prior_precision=0.001)
print("responses", model.responses.astype(int))
i = model.coefficient_index(1)
ga = gaussian_approximation(model)

# %%
# Reference by quadrature over the intercept; its grid reaches far enough
# into both tails and is reused for every approximation.
ref = quadrature_posterior(model, (1,))[1]
grid = ref.abscissa
s = summarize(ref)
print(f"quadrature: mode {s.mode:.4f}  iqr {s.iqr:.4f}  skewness {s.skewness:.4f}")

# %%
# The expansion is shared by both parametric fits.
te = taylor_expansion(model, i, ga)
for strategy in ("gaussian", "sla", "esla", "la"):
    d = marginal_by_strategy(model, i, strategy, grid, ga, te)
    st = summarize(d)
    kl = density_distance(ref, d, "kl")
    print(f"{strategy:9s} mode {st.mode:.4f}  iqr {st.iqr:.4f}  KL {kl:.2e}  {d.meta.get('strategy_used', '')}")
