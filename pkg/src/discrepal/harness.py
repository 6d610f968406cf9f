"""Benchmark protocol: preprocessing, hyperparameter tuning, repeated
active-learning runs, learning curves against random sampling, and
win/tie/loss significance tables.

Reproducibility contract: every recorded number is a deterministic
function of (config, base seed). Run r splits with seed + r, and the
random baseline draws from a generator seeded by (seed, run, criterion
position), so runs are independent but replayable.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.stats

from .data import Dataset, load_csv, split, standardize, subsample
from .errors import ConfigError
from .kernels import KernelSpec, gaussian, linear
from .krls import TrainedModel, fit, mse, predict
from .selection import Criterion, QueryState, SessionCache, select_next
from .decomposition import bin_contributions, decompose_kernel

CRITERION_NAMES = [c.value for c in Criterion]
SETTINGS = ("realizable", "agnostic")
TTEST_METHODS = ("student_pooled", "welch")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one benchmark needs; flat JSON keys map one-to-one."""

    dataset: str
    setting: str = "realizable"
    kernel_family: str = "gaussian"
    sigma: float = 1.0
    reg_lambda: float = 1e-2
    runs: int = 100
    budget: int = 50
    seed: int = 0
    criteria: tuple = tuple(CRITERION_NAMES)
    label_col: str = "label"
    subsample_max: int = 1000
    train_frac: float = 0.65
    ttest: str = "student_pooled"
    stride: int = 5
    p_threshold: float = 0.05
    parallel: int = 1
    sigma_grid: tuple = ()
    lambda_grid: tuple = ()
    tune_reps: int = 10

    def __post_init__(self):
        object.__setattr__(self, "criteria", tuple(self.criteria))
        object.__setattr__(self, "sigma_grid", tuple(self.sigma_grid))
        object.__setattr__(self, "lambda_grid", tuple(self.lambda_grid))
        checks = [
            (self.setting in SETTINGS, "setting", f"must be one of {SETTINGS}"),
            (self.kernel_family in ("gaussian", "linear"), "kernel.family", "must be gaussian or linear"),
            (self.sigma > 0, "kernel.sigma", "must be > 0"),
            (self.reg_lambda > 0, "lambda", "must be > 0"),
            (self.runs >= 1, "runs", "must be >= 1"),
            (self.budget >= 1, "budget", "must be >= 1"),
            (0 < self.train_frac < 1, "train_frac", "must be in (0, 1)"),
            (self.subsample_max >= 2, "subsample_max", "must be >= 2"),
            (self.ttest in TTEST_METHODS, "ttest", f"must be one of {TTEST_METHODS}"),
            (self.stride >= 1, "stride", "must be >= 1"),
            (0 < self.p_threshold < 1, "p_threshold", "must be in (0, 1)"),
            (self.parallel >= 1, "parallel", "must be >= 1"),
            (len(self.criteria) >= 1, "criteria", "must not be empty"),
            (self.tune_reps >= 1, "tune_reps", "must be >= 1"),
        ]
        for ok, key, msg in checks:
            if not ok:
                raise ConfigError(f"config key {key!r} {msg}")
        for name in self.criteria:
            if name not in CRITERION_NAMES:
                raise ConfigError(f"config key 'criteria' has unknown entry {name!r}; "
                                  f"choose from {CRITERION_NAMES}")

    def kernel_spec(self) -> KernelSpec:
        return gaussian(self.sigma) if self.kernel_family == "gaussian" else linear()


# flat config key -> (attribute, parser)
_CONFIG_KEYS = {
    "dataset": ("dataset", str),
    "setting": ("setting", str),
    "kernel.family": ("kernel_family", str),
    "kernel.sigma": ("sigma", float),
    "lambda": ("reg_lambda", float),
    "runs": ("runs", int),
    "budget": ("budget", int),
    "seed": ("seed", int),
    "criteria": ("criteria", lambda v: tuple(v)),
    "label_col": ("label_col", str),
    "subsample_max": ("subsample_max", int),
    "train_frac": ("train_frac", float),
    "ttest": ("ttest", str),
    "stride": ("stride", int),
    "p_threshold": ("p_threshold", float),
    "parallel": ("parallel", int),
    "sigma_grid": ("sigma_grid", lambda v: tuple(float(x) for x in v)),
    "lambda_grid": ("lambda_grid", lambda v: tuple(float(x) for x in v)),
    "tune_reps": ("tune_reps", int),
}


def config_from_mapping(mapping: dict) -> ExperimentConfig:
    """Build a validated config from a flat key/value mapping, rejecting
    unknown keys by name."""
    kwargs = {}
    for key, value in mapping.items():
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        attr, parse = _CONFIG_KEYS[key]
        try:
            kwargs[attr] = parse(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"config key {key!r}: cannot parse {value!r}: {exc}") from exc
    if "dataset" not in kwargs:
        raise ConfigError("config key 'dataset' is required")
    return ExperimentConfig(**kwargs)


@dataclass
class LearningCurveSet:
    """Raw runs-by-queries test MSE per criterion plus derived statistics."""

    curves: dict
    seeds: list
    synthesis_residual: float | None = None

    def mean(self, criterion: str) -> np.ndarray:
        return self.curves[criterion].mean(axis=0)

    def stderr(self, criterion: str) -> np.ndarray:
        mat = self.curves[criterion]
        if mat.shape[0] < 2:
            return np.zeros(mat.shape[1])
        return mat.std(axis=0, ddof=1) / np.sqrt(mat.shape[0])


@dataclass
class WinTieLoss:
    """Per-checkpoint significance verdicts for the first member of a pair."""

    pair: str
    queries: np.ndarray
    p_values: np.ndarray
    verdicts: list
    stride: int
    p_threshold: float

    @property
    def wins(self) -> int:
        return self.verdicts.count("win")

    @property
    def ties(self) -> int:
        return self.verdicts.count("tie")

    @property
    def losses(self) -> int:
        return self.verdicts.count("loss")


def load_preprocessed(cfg: ExperimentConfig) -> Dataset:
    """Load, subsample and standardize; labels stay binary."""
    data = load_csv(cfg.dataset, cfg.label_col)
    data = subsample(data, max_n=cfg.subsample_max, seed=cfg.seed)
    return standardize(data)


def fit_labeling_model(dataset: Dataset, kernel: KernelSpec, reg_lambda: float) -> TrainedModel:
    """The model whose outputs become labels in the realizable setting."""
    return fit(dataset.features, dataset.labels, kernel, reg_lambda)


def synthesize_realizable_labels(dataset: Dataset, kernel: KernelSpec,
                                 reg_lambda: float) -> Dataset:
    """Fit on all rows with the current labels and replace the labels by
    the model's real-valued predictions."""
    model = fit_labeling_model(dataset, kernel, reg_lambda)
    labels = predict(model, dataset, np.arange(dataset.n))
    return Dataset(dataset.features, labels, name=dataset.name)


def tune_hyperparameters(dataset: Dataset, sigma_grid, lambda_grid,
                         reps: int = 10, seed: int = 0):
    """Grid search for the Gaussian bandwidth and regularization strength.

    Each repetition labels 25 random samples, fits every grid point on
    them and scores MSE on the rest; the pair with the best average wins.
    Deterministic per seed, ties to the earliest grid entry.
    """
    sigma_grid = [float(s) for s in sigma_grid]
    lambda_grid = [float(l) for l in lambda_grid]
    if not sigma_grid or not lambda_grid:
        raise ConfigError("tuning needs non-empty sigma and lambda grids")
    if dataset.n <= 25:
        raise ConfigError(f"tuning needs more than 25 samples, got {dataset.n}")
    rng = np.random.default_rng(seed)
    totals = np.zeros((len(sigma_grid), len(lambda_grid)))
    everything = np.arange(dataset.n)
    for _ in range(reps):
        chosen = np.sort(rng.choice(dataset.n, size=25, replace=False))
        rest = np.setdiff1d(everything, chosen)
        x, y = dataset.features[chosen], dataset.labels[chosen]
        for i, sigma in enumerate(sigma_grid):
            kernel = gaussian(sigma)
            for j, lam in enumerate(lambda_grid):
                model = fit(x, y, kernel, lam, support=chosen)
                preds = predict(model, dataset, rest)
                totals[i, j] += mse(preds, dataset.labels[rest])
    i, j = np.unravel_index(int(np.argmin(totals)), totals.shape)
    return sigma_grid[i], lambda_grid[j]


def _single_run(dataset: Dataset, cfg: ExperimentConfig, run_idx: int) -> dict:
    """One split plus one full selection session per criterion; returns a
    budget-length test-MSE row per criterion."""
    kernel = cfg.kernel_spec()
    parts = split(dataset, cfg.train_frac, seed=cfg.seed + run_idx)
    test_x = parts.test
    test_y = dataset.labels[test_x]
    cache = None
    rows = {}
    for ci, name in enumerate(cfg.criteria):
        criterion = Criterion(name)
        rng = None
        if criterion == Criterion.RANDOM:
            rng = np.random.default_rng([cfg.seed, run_idx, ci])
        elif cache is None:
            cache = SessionCache.build(dataset, parts.train, kernel)
        state = QueryState(pool=parts.train)
        curve = np.empty(cfg.budget)
        for q in range(cfg.budget):
            s = select_next(dataset, state, criterion, kernel, rng=rng,
                            cache=None if criterion == Criterion.RANDOM else cache)
            state.add(s)
            labeled = np.asarray(state.labeled, dtype=np.intp)
            model = fit(dataset.features[labeled], dataset.labels[labeled],
                        kernel, cfg.reg_lambda, support=labeled)
            curve[q] = mse(predict(model, dataset, test_x), test_y)
        rows[name] = curve
    return rows


def run_experiment(cfg: ExperimentConfig) -> LearningCurveSet:
    """The full protocol: preprocess once, optionally synthesize labels,
    then run ``cfg.runs`` independent split+session+refit cycles."""
    dataset = load_preprocessed(cfg)
    if cfg.budget > int(np.floor(cfg.train_frac * dataset.n + 0.5)):
        raise ConfigError(f"config key 'budget' exceeds the training pool size")
    kernel = cfg.kernel_spec()
    residual = None
    if cfg.setting == "realizable":
        dataset = synthesize_realizable_labels(dataset, kernel, cfg.reg_lambda)
        refit = fit_labeling_model(dataset, kernel, cfg.reg_lambda)
        repro = predict(refit, dataset, np.arange(dataset.n))
        residual = float(np.abs(repro - dataset.labels).max())

    if cfg.parallel > 1:
        with ProcessPoolExecutor(max_workers=cfg.parallel) as pool:
            results = list(pool.map(_single_run, [dataset] * cfg.runs,
                                    [cfg] * cfg.runs, range(cfg.runs)))
    else:
        results = [_single_run(dataset, cfg, r) for r in range(cfg.runs)]

    curves = {name: np.stack([res[name] for res in results]) for name in cfg.criteria}
    seeds = [cfg.seed + r for r in range(cfg.runs)]
    return LearningCurveSet(curves=curves, seeds=seeds, synthesis_residual=residual)


def compare(a: np.ndarray, b: np.ndarray, stride: int = 5, p_threshold: float = 0.05,
            method: str = "student_pooled", pair: str = "a_vs_b") -> WinTieLoss:
    """Two-sample two-tailed t-test of a's runs against b's runs at every
    ``stride``-th query; a wins where it is significantly lower."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 2:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if method not in TTEST_METHODS:
        raise ConfigError(f"config key 'ttest' must be one of {TTEST_METHODS}")
    budget = a.shape[1]
    queries = np.arange(stride, budget + 1, stride)
    p_values = np.empty(queries.size)
    verdicts = []
    for idx, q in enumerate(queries):
        col = q - 1
        stat = scipy.stats.ttest_ind(a[:, col], b[:, col], equal_var=(method != "welch"))
        p = float(stat.pvalue)
        if np.isnan(p):  # zero variance in both samples, e.g. a == b
            p = 1.0
        p_values[idx] = p
        if p < p_threshold:
            verdicts.append("win" if a[:, col].mean() < b[:, col].mean() else "loss")
        else:
            verdicts.append("tie")
    return WinTieLoss(pair=pair, queries=queries, p_values=p_values,
                      verdicts=verdicts, stride=stride, p_threshold=p_threshold)


def relative_curve(curves: LearningCurveSet, baseline: str = Criterion.RANDOM.value) -> dict:
    """Mean MSE difference to the baseline per query, with the criterion's
    own standard error (95 percent band = 1.96 * stderr)."""
    if baseline not in curves.curves:
        raise ValueError(f"baseline {baseline!r} not in curve set")
    base_mean = curves.mean(baseline)
    return {name: (curves.mean(name) - base_mean, curves.stderr(name))
            for name in curves.curves}


def run_decomposition(cfg: ExperimentConfig):
    """Per-query mean error-decomposition bins for sessions of the first
    configured criterion; realizable setting only.

    Returns (queries, bins dict of budget-length arrays, mean LQ, mean LP).
    """
    if cfg.setting != "realizable":
        raise ConfigError("config key 'setting' must be 'realizable' for decomposition")
    base = load_preprocessed(cfg)
    kernel = cfg.kernel_spec()
    f_model = fit_labeling_model(base, kernel, cfg.reg_lambda)
    labels = predict(f_model, base, np.arange(base.n))
    dataset = Dataset(base.features, labels, name=base.name)

    bin_names = None
    totals = None
    lq_total = np.zeros(cfg.budget)
    lp_total = np.zeros(cfg.budget)
    for run_idx in range(cfg.runs):
        parts = split(dataset, cfg.train_frac, seed=cfg.seed + run_idx)
        criterion = Criterion(cfg.criteria[0])
        rng = np.random.default_rng([cfg.seed, run_idx, 0])
        cache = None
        if criterion != Criterion.RANDOM:
            cache = SessionCache.build(dataset, parts.train, kernel)
        state = QueryState(pool=parts.train)
        pool_y = dataset.labels[parts.train]
        for q in range(cfg.budget):
            s = select_next(dataset, state, criterion, kernel, rng=rng, cache=cache)
            state.add(s)
            labeled = np.asarray(state.labeled, dtype=np.intp)
            h_model = fit(dataset.features[labeled], dataset.labels[labeled],
                          kernel, cfg.reg_lambda, support=labeled)
            result = decompose_kernel(f_model, h_model, dataset, state)
            bins = bin_contributions(result)
            if totals is None:
                bin_names = list(bins)
                totals = {name: np.zeros(cfg.budget) for name in bin_names}
            for name in bin_names:
                totals[name][q] += bins[name]
            lq_total[q] += mse(predict(h_model, dataset, labeled), dataset.labels[labeled])
            lp_total[q] += mse(predict(h_model, dataset, parts.train), pool_y)
    queries = np.arange(1, cfg.budget + 1)
    means = {name: totals[name] / cfg.runs for name in bin_names}
    return queries, means, lq_total / cfg.runs, lp_total / cfg.runs


def ordered_pairs(criteria) -> list:
    """Comparison pairs in configuration order: (earlier, later)."""
    names = list(criteria)
    return [(a, b) for i, a in enumerate(names) for b in names[i + 1:]]


def _fmt(x) -> str:
    return repr(float(x))


def write_curves_csv(path, curves: LearningCurveSet) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["criterion", "run", "query", "mse"])
        for name, mat in curves.curves.items():
            for r in range(mat.shape[0]):
                for q in range(mat.shape[1]):
                    writer.writerow([name, r, q + 1, _fmt(mat[r, q])])


def read_curves_csv(path) -> LearningCurveSet:
    rows = {}
    name_order = []
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        needed = {"criterion", "run", "query", "mse"}
        if reader.fieldnames is None or not needed <= set(reader.fieldnames):
            raise ConfigError(f"{path}: expected columns {sorted(needed)}")
        for row in reader:
            if row["criterion"] not in rows:
                name_order.append(row["criterion"])
                rows[row["criterion"]] = {}
            per_run = rows[row["criterion"]].setdefault(int(row["run"]), {})
            per_run[int(row["query"])] = float(row["mse"])
    curves = {}
    for name in name_order:
        mats = [np.array([per_query[q] for q in sorted(per_query)])
                for _, per_query in sorted(rows[name].items())]
        curves[name] = np.stack(mats)
    return LearningCurveSet(curves=curves, seeds=[])


def write_summary_csv(path, curves: LearningCurveSet,
                      baseline: str = Criterion.RANDOM.value) -> None:
    have_baseline = baseline in curves.curves
    rel = relative_curve(curves, baseline) if have_baseline else None
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["criterion", "query", "mean", "stderr", "mean_minus_random"])
        for name, mat in curves.curves.items():
            mean = curves.mean(name)
            err = curves.stderr(name)
            for q in range(mat.shape[1]):
                delta = _fmt(rel[name][0][q]) if have_baseline else ""
                writer.writerow([name, q + 1, _fmt(mean[q]), _fmt(err[q]), delta])


def write_wtl_csv(path, curves: LearningCurveSet, stride: int = 5,
                  p_threshold: float = 0.05, method: str = "student_pooled") -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["pair", "query", "p_value", "verdict"])
        for a, b in ordered_pairs(curves.curves):
            wtl = compare(curves.curves[a], curves.curves[b], stride=stride,
                          p_threshold=p_threshold, method=method, pair=f"{a}_vs_{b}")
            for q, p, verdict in zip(wtl.queries, wtl.p_values, wtl.verdicts):
                writer.writerow([wtl.pair, int(q), _fmt(p), verdict])
