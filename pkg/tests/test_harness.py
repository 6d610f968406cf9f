import numpy as np
import pytest
import scipy.special

from discrepal.data import Dataset, load_csv, standardize
from discrepal.errors import ConfigError
from discrepal.harness import (ExperimentConfig, LearningCurveSet, compare,
                               config_from_mapping, load_preprocessed,
                               ordered_pairs, relative_curve, run_experiment,
                               synthesize_realizable_labels, tune_hyperparameters)
from discrepal.kernels import gaussian
from discrepal.krls import fit, mse, predict


def textbook_ttest(a, b):
    """Independent pooled two-sample t-test: textbook statistic plus the
    two-tailed p-value through the incomplete beta function."""
    na, nb = len(a), len(b)
    va = np.var(a, ddof=1)
    vb = np.var(b, ddof=1)
    dof = na + nb - 2
    sp2 = ((na - 1) * va + (nb - 1) * vb) / dof
    denom = np.sqrt(sp2 * (1.0 / na + 1.0 / nb))
    if denom == 0.0:
        return np.inf if np.mean(a) != np.mean(b) else 0.0, 1.0 if np.mean(a) == np.mean(b) else 0.0
    t = (np.mean(a) - np.mean(b)) / denom
    p = scipy.special.betainc(dof / 2.0, 0.5, dof / (dof + t * t))
    return t, float(p)


def tiny_csv(tmp_path, n=30, d=2, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, d))
    y = np.where(x[:, 0] + rng.normal(scale=0.4, size=n) > 0, 1, -1)
    path = tmp_path / "tiny.csv"
    header = ",".join(f"f{j}" for j in range(d)) + ",label"
    rows = [",".join(repr(float(v)) for v in row) + f",{int(lbl)}" for row, lbl in zip(x, y)]
    path.write_text(header + "\n" + "\n".join(rows) + "\n", encoding="utf-8")
    return path


class TestConfig:
    def test_flat_keys_round_trip(self):
        cfg = config_from_mapping({
            "dataset": "d.csv", "setting": "agnostic", "kernel.family": "gaussian",
            "kernel.sigma": 2.0, "lambda": 0.01, "runs": 3, "budget": 4, "seed": 9,
            "criteria": ["MMD", "Random"],
        })
        assert cfg.sigma == 2.0 and cfg.reg_lambda == 0.01
        assert cfg.criteria == ("MMD", "Random")
        assert cfg.kernel_spec() == gaussian(2.0)

    def test_unknown_key_named(self):
        with pytest.raises(ConfigError, match="'bogus_key'"):
            config_from_mapping({"dataset": "d.csv", "bogus_key": 1})

    def test_dataset_required(self):
        with pytest.raises(ConfigError, match="'dataset'"):
            config_from_mapping({"runs": 3})

    def test_bad_criterion_named(self):
        with pytest.raises(ConfigError, match="Bogus"):
            config_from_mapping({"dataset": "d.csv", "criteria": ["Bogus"]})

    def test_invalid_values(self):
        for key, value in [("runs", 0), ("budget", 0), ("kernel.sigma", -1.0),
                           ("lambda", 0.0), ("setting", "weird"), ("ttest", "anova")]:
            with pytest.raises(ConfigError):
                config_from_mapping({"dataset": "d.csv", key: value})


class TestSynthesize:
    def test_labels_equal_model_predictions(self, rng):
        data = Dataset(rng.standard_normal((20, 2)),
                       np.sign(rng.standard_normal(20) + 0.01))
        kernel = gaussian(1.0)
        out = synthesize_realizable_labels(data, kernel, 0.05)
        model = fit(data.features, data.labels, kernel, 0.05)
        expected = predict(model, data, np.arange(20))
        assert np.allclose(out.labels, expected)
        assert out.features is data.features

    def test_resynthesis_training_mse_shrinks(self, rng):
        data = Dataset(rng.standard_normal((25, 3)),
                       np.sign(rng.standard_normal(25) + 0.01))
        kernel = gaussian(1.0)
        once = synthesize_realizable_labels(data, kernel, 0.1)
        twice = synthesize_realizable_labels(once, kernel, 0.1)
        first_mse = mse(once.labels, data.labels)
        second_mse = mse(twice.labels, once.labels)
        assert second_mse <= first_mse + 1e-12


class TestTune:
    def test_single_point_grid_is_identity(self, rng):
        data = Dataset(rng.standard_normal((40, 2)), rng.uniform(-1, 1, 40))
        assert tune_hyperparameters(data, [1.3], [0.07], reps=2, seed=0) == (1.3, 0.07)

    def test_deterministic(self, rng):
        data = Dataset(rng.standard_normal((60, 2)), rng.uniform(-1, 1, 60))
        grid_s, grid_l = [0.5, 1.0, 2.0], [0.01, 0.1]
        a = tune_hyperparameters(data, grid_s, grid_l, reps=3, seed=11)
        b = tune_hyperparameters(data, grid_s, grid_l, reps=3, seed=11)
        assert a == b

    def test_needs_more_than_25_samples(self, rng):
        data = Dataset(rng.standard_normal((20, 2)), np.ones(20))
        with pytest.raises(ConfigError, match="25"):
            tune_hyperparameters(data, [1.0], [0.1], reps=1, seed=0)

    def test_banana_lands_near_published_bandwidth(self, banana_path):
        # coarse directional check: the tuned bandwidth for the banana
        # fixture should sit in the sub-unit region of a wide log grid
        data = standardize(load_csv(banana_path, "label"))
        sigma_grid = [0.1, 0.32, 0.645, 1.3, 2.6, 5.2, 10.0]
        lambda_grid = [10.0**e for e in (-4.0, -3.0, -2.2, -1.0)]
        sigma, lam = tune_hyperparameters(data, sigma_grid, lambda_grid, reps=5, seed=2)
        assert 0.2 <= sigma <= 2.0
        assert lam <= 0.1


class TestRunExperiment:
    def test_shapes_and_determinism(self, tmp_path):
        path = tiny_csv(tmp_path)
        cfg = ExperimentConfig(dataset=str(path), setting="agnostic", sigma=1.0,
                               reg_lambda=0.1, runs=2, budget=3, seed=5,
                               criteria=("Random", "MMD"))
        a = run_experiment(cfg)
        b = run_experiment(cfg)
        for name in cfg.criteria:
            assert a.curves[name].shape == (2, 3)
            assert np.array_equal(a.curves[name], b.curves[name])
        assert a.seeds == [5, 6]
        assert a.synthesis_residual is None

    def test_single_run_single_query(self, tmp_path):
        path = tiny_csv(tmp_path)
        cfg = ExperimentConfig(dataset=str(path), setting="agnostic", sigma=1.0,
                               reg_lambda=0.1, runs=1, budget=1, seed=0,
                               criteria=("Random",))
        out = run_experiment(cfg)
        assert out.curves["Random"].shape == (1, 1)
        assert np.isfinite(out.curves["Random"]).all()

    def test_realizable_records_synthesis_residual(self, tmp_path):
        path = tiny_csv(tmp_path)
        cfg = ExperimentConfig(dataset=str(path), setting="realizable", sigma=1.0,
                               reg_lambda=0.1, runs=1, budget=2, seed=1,
                               criteria=("NuclearDiscrepancy",))
        out = run_experiment(cfg)
        assert out.synthesis_residual is not None
        assert np.isfinite(out.synthesis_residual)

    def test_budget_larger_than_pool_rejected(self, tmp_path):
        path = tiny_csv(tmp_path, n=10)
        cfg = ExperimentConfig(dataset=str(path), setting="agnostic", sigma=1.0,
                               reg_lambda=0.1, runs=1, budget=9, seed=0,
                               criteria=("Random",))
        with pytest.raises(ConfigError, match="budget"):
            run_experiment(cfg)

    def test_parallel_matches_serial(self, tmp_path):
        path = tiny_csv(tmp_path)
        base = dict(dataset=str(path), setting="agnostic", sigma=1.0,
                    reg_lambda=0.1, runs=2, budget=2, seed=3,
                    criteria=("MMD", "Random"))
        serial = run_experiment(ExperimentConfig(**base))
        parallel = run_experiment(ExperimentConfig(**base, parallel=2))
        for name in base["criteria"]:
            assert np.array_equal(serial.curves[name], parallel.curves[name])


class TestLearningCurveSet:
    def test_stderr_matches_definition(self, rng):
        mat = rng.standard_normal((8, 4))
        curves = LearningCurveSet(curves={"MMD": mat}, seeds=list(range(8)))
        want = mat.std(axis=0, ddof=1) / np.sqrt(8)
        assert np.allclose(curves.stderr("MMD"), want)

    def test_single_run_stderr_is_zero(self):
        curves = LearningCurveSet(curves={"MMD": np.ones((1, 3))}, seeds=[0])
        assert np.array_equal(curves.stderr("MMD"), np.zeros(3))


class TestCompare:
    def test_identical_matrices_tie_everywhere(self, rng):
        mat = rng.standard_normal((10, 20))
        wtl = compare(mat, mat, stride=5)
        assert wtl.ties == 4 and wtl.wins == 0 and wtl.losses == 0
        assert wtl.wins + wtl.ties + wtl.losses == 20 // 5

    def test_strong_separation_wins_everywhere(self, rng):
        a = np.zeros((100, 10)) + rng.normal(scale=1e-6, size=(100, 10))
        b = np.ones((100, 10)) + rng.normal(scale=1e-6, size=(100, 10))
        wtl = compare(a, b, stride=5)
        assert wtl.wins == 2 and wtl.losses == 0
        reverse = compare(b, a, stride=5)
        assert reverse.losses == 2

    def test_matches_textbook_oracle(self, rng):
        for _ in range(50):
            runs = int(rng.integers(4, 40))
            a = rng.normal(loc=rng.uniform(-0.5, 0.5), scale=rng.uniform(0.5, 2.0),
                           size=(runs, 5))
            b = rng.normal(loc=rng.uniform(-0.5, 0.5), scale=rng.uniform(0.5, 2.0),
                           size=(runs, 5))
            wtl = compare(a, b, stride=5, p_threshold=0.05)
            t, p = textbook_ttest(a[:, 4], b[:, 4])
            assert wtl.p_values[0] == pytest.approx(p, rel=1e-10)
            if p < 0.05:
                want = "win" if a[:, 4].mean() < b[:, 4].mean() else "loss"
            else:
                want = "tie"
            assert wtl.verdicts[0] == want

    def test_welch_variant_available(self, rng):
        a = rng.normal(scale=3.0, size=(12, 5))
        b = rng.normal(scale=0.2, size=(12, 5))
        pooled = compare(a, b, stride=5, method="student_pooled")
        welch = compare(a, b, stride=5, method="welch")
        assert pooled.p_values[0] != welch.p_values[0]

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            compare(np.zeros((3, 5)), np.zeros((4, 5)))


class TestRelativeCurve:
    def make_set(self, rng):
        return LearningCurveSet(curves={
            "Random": rng.standard_normal((6, 4)) + 5.0,
            "MMD": rng.standard_normal((6, 4)) + 4.0,
        }, seeds=list(range(6)))

    def test_baseline_minus_itself_is_zero(self, rng):
        curves = self.make_set(rng)
        rel = relative_curve(curves)
        assert np.allclose(rel["Random"][0], 0.0)

    def test_constant_offset_recovered(self, rng):
        mat = rng.standard_normal((5, 3))
        curves = LearningCurveSet(curves={"Random": mat, "MMD": mat + 2.5},
                                  seeds=list(range(5)))
        diff, err = relative_curve(curves)["MMD"]
        assert np.allclose(diff, 2.5)
        assert np.allclose(err, curves.stderr("MMD"))

    def test_missing_baseline(self, rng):
        curves = LearningCurveSet(curves={"MMD": np.ones((2, 2))}, seeds=[0, 1])
        with pytest.raises(ValueError, match="Random"):
            relative_curve(curves)


class TestOrderedPairs:
    def test_configuration_order(self):
        pairs = ordered_pairs(["Discrepancy", "MMD", "NuclearDiscrepancy"])
        assert pairs == [("Discrepancy", "MMD"), ("Discrepancy", "NuclearDiscrepancy"),
                         ("MMD", "NuclearDiscrepancy")]


class TestLoadPreprocessed:
    def test_pipeline_standardizes(self, tmp_path):
        path = tiny_csv(tmp_path, n=40)
        cfg = ExperimentConfig(dataset=str(path), runs=1, budget=1, seed=0)
        data = load_preprocessed(cfg)
        assert np.abs(data.features.mean(axis=0)).max() <= 1e-10
