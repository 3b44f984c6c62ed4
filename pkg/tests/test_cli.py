import json
import subprocess
import sys

import numpy as np
import pytest
import yaml

from esla.cli import build_parser, main
from esla.errors import InvalidArgumentError
from esla.experiment import ExperimentConfig, run_experiment, simulate_model
from esla.interpolants import Interpolant, default_interpolants, tau_ratio


class TestExperimentConfig:
    def test_canonical_order(self):
        cfg = ExperimentConfig(strategies=("la", "sla"))
        assert cfg.strategies == ("sla", "la")

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(family="gaussian"),
            dict(sample_sizes=(10, 1)),
            dict(sample_sizes=()),
            dict(strategies=("vb",)),
            dict(strategies=("mcmc",)),
            dict(seed=-1),
            dict(prior_precision=0.0),
        ],
    )
    def test_rejects(self, kwargs):
        with pytest.raises(InvalidArgumentError):
            ExperimentConfig(**kwargs)

    def test_unknown_key(self):
        with pytest.raises(InvalidArgumentError):
            ExperimentConfig.from_mapping({"famliy": "poisson"})

    def test_mcmc_block(self):
        cfg = ExperimentConfig.from_mapping({"strategies": ["mcmc"], "mcmc": {"iterations": 100, "burn_in": 10}})
        assert cfg.mcmc.iterations == 100


class TestSimulate:
    def test_seeded(self):
        a = simulate_model("poisson", 10, 3, 0.001)
        b = simulate_model("poisson", 10, 3, 0.001)
        np.testing.assert_array_equal(a.responses, b.responses)
        assert not np.array_equal(a.covariate, simulate_model("poisson", 10, 4, 0.001).covariate)


class TestRunExperiment:
    def test_outputs(self, tmp_path, interpolants):
        cfg = ExperimentConfig(family="poisson", sample_sizes=(1, 10), seed=1, output_dir=tmp_path, grid_points=101)
        res = run_experiment(cfg, interpolants)
        assert res.complete
        lines = res.paths["summary"].read_text().splitlines()
        assert lines[0] == "n,skew,mode_sla,mode_esla,mode_la,iqr_sla,iqr_esla,iqr_la"
        assert [ln.split(",")[0] for ln in lines[1:]] == ["1", "10"]
        assert sorted(p.name for p in res.paths["curves"].iterdir()) == sorted([
            f"n{n}_{s}.tsv" for n in (1, 10) for s in ("esla", "la", "sla")
        ])
        meta = json.loads(res.paths["metadata"].read_text())
        assert meta["cells"]["10"]["esla"]["strategy_used"] in ("esla", "sla_interpolant")

    @pytest.mark.parametrize("family", ["bernoulli", "poisson"])
    def test_skewed_rows_favour_extended_fit(self, tmp_path, interpolants, family):
        res = run_experiment(ExperimentConfig(family=family, output_dir=tmp_path), interpolants)
        skewed = [r for r in res.rows if abs(r["skew"]) > 0.3]
        assert skewed
        for r in skewed:
            assert abs(r["mode_esla"] - r["mode_la"]) <= abs(r["mode_sla"] - r["mode_la"])

    def test_missing_cell_recorded(self, tmp_path, interpolants):
        # an unadapted huge step fails the acceptance diagnostics
        cfg = ExperimentConfig.from_mapping(
            dict(sample_sizes=[1], strategies=["la", "mcmc"], output_dir=tmp_path, grid_points=51,
                 mcmc=dict(chains=1, iterations=200, burn_in=0, step_scale=1e4))
        )
        res = run_experiment(cfg, interpolants)
        assert not res.complete
        assert res.missing[0]["strategy"] == "mcmc"
        assert res.paths["summary"].read_text().splitlines()[1].split(",")[-1] == "NA"


class TestCli:
    def test_parser_requires_command(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_fit_density(self, capsys):
        assert main(["fit-density", "--mu", "0.1", "--gamma1", "0.3", "--gamma2", "0.1", "--points", "5"]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0].startswith("xi\t")
        assert out[4] == "strategy_used\tesla"
        assert len(out) == 6 + 1 + 5

    def test_fit_density_third_order(self, capsys):
        assert main(["fit-density", "--mu", "0", "--gamma1", "0.2", "--points", "3"]) == 0
        assert "strategy_used\tsla_interpolant" in capsys.readouterr().out

    def _fit(self, capsys, *args):
        assert main(["fit-density", "--points", "3", *args]) == 0
        return dict(line.split("\t") for line in capsys.readouterr().out.splitlines()[:6])

    def test_fit_density_gaussian(self, capsys):
        out = self._fit(capsys, "--mu", "0", "--gamma1", "0")
        assert out["strategy_used"] == "gaussian"
        assert [float(out[k]) for k in ("xi", "omega", "alpha", "tau")] == [0.0, 1.0, 0.0, 0.0]

    def test_fit_density_recovers_tau(self, capsys):
        g2 = tau_ratio(2.0) * 0.1 ** (4 / 3)
        out = self._fit(capsys, "--mu", "0", "--gamma1", "0.1", "--gamma2", repr(g2))
        assert float(out["tau"]) == pytest.approx(2.0, abs=1e-6)

    def test_fit_density_near_zero(self, capsys):
        out = self._fit(capsys, "--mu", "0", "--gamma1", "1e-9", "--gamma2", "0.01")
        assert out["fallback_reason"] == "gamma1_near_zero"

    def test_cached_fit_matches_fresh(self, tmp_path, capsys):
        cache = tmp_path / "c"
        main(["build-cache", "--cache", str(cache)])
        capsys.readouterr()
        args = ["--mu", "0.2", "--gamma1", "0.7", "--gamma2", "0.3"]
        cached = self._fit(capsys, "--cache", str(cache), *args)
        fresh = self._fit(capsys, *args)
        for k in ("xi", "omega", "alpha", "tau"):
            assert abs(float(cached[k]) - float(fresh[k])) < 1e-12

    def test_build_cache_bitwise(self, tmp_path, capsys):
        main(["build-cache", "--cache", str(tmp_path / "a")])
        main(["build-cache", "--cache", str(tmp_path / "b")])
        for name in ("sn_skewness.tsv", "tau_ratio.tsv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_corrupt_cache_rebuilt(self, tmp_path, capsys):
        cache = tmp_path / "c"
        main(["build-cache", "--cache", str(cache)])
        (cache / "tau_ratio.tsv").write_text("# esla-interpolant format=1\nbroken\n")
        default_interpolants.cache_clear()
        capsys.readouterr()
        with pytest.warns(UserWarning, match="rebuilding"):
            self._fit(capsys, "--cache", str(cache), "--mu", "0", "--gamma1", "0.5", "--gamma2", "0.1")
        Interpolant.load(cache / "tau_ratio.tsv")

    def test_build_cache(self, tmp_path, capsys):
        assert main(["build-cache", "--cache", str(tmp_path / "c")]) == 0
        paths = capsys.readouterr().out.split()
        assert len(paths) == 2
        for p in paths:
            Interpolant.load(p)

    def test_simulate_with_config(self, tmp_path, capsys):
        cfg = tmp_path / "run.yaml"
        cfg.write_text(yaml.safe_dump({"family": "poisson", "sample_sizes": [1], "grid_points": 51}))
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
        assert capsys.readouterr().out.startswith("n,skew,")
        meta = json.loads((tmp_path / "o" / "metadata.json").read_text())
        assert meta["config"]["family"] == "poisson"

    def test_bad_config(self, tmp_path, capsys):
        cfg = tmp_path / "run.yaml"
        cfg.write_text("- 1\n- 2\n")
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path)]) == 2

    def test_module_entry(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "esla", "fit-density", "--mu", "0", "--gamma1", "0", "--points", "3"],
            capture_output=True, text=True, check=False,
        )
        assert proc.returncode == 0
        assert "strategy_used\tgaussian" in proc.stdout
