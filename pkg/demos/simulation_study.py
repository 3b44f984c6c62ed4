"""
A small simulation study
========================

Runs the seeded study for Poisson data at three sample sizes and prints
the summary table. Outputs land in ``demo-output/``; rerunning gives
byte-identical files.
"""

from pathlib import Path

from esla.experiment import ExperimentConfig, run_experiment
from esla.oracle import McmcConfig

cfg = ExperimentConfig(
    family="poisson",
    sample_sizes=(1, 10, 50),
    seed=1,
    strategies=("sla", "esla", "la", "mcmc"),
    output_dir=Path("demo-output"),
    mcmc=McmcConfig(chains=4, iterations=10_000, burn_in=2_000, seed=1),
)
result = run_experiment(cfg)
print(result.paths["summary"].read_text())
print("missing cells:", result.missing or "none")
