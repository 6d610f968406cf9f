"""Pool-based active learning that greedily minimizes spectral divergence
criteria (discrepancy, MMD, nuclear discrepancy) for kernel regularized
least squares, plus the benchmarking harness around it."""

from .data import Dataset, SplitIndices, load_csv, split, standardize, subsample
from .decomposition import (DecompositionResult, bin_contributions,
                            decompose_kernel, decompose_linear)
from .divergence import (Spectrum, build_d, build_m_linear, build_mk,
                         discrepancy, mmd_kernel_mean, mmd_spectral,
                         nuclear_discrepancy, spectrum_of_m, spectrum_of_mk)
from .errors import ConfigError, NumericalError
from .harness import (ExperimentConfig, LearningCurveSet, WinTieLoss, compare,
                      config_from_mapping, relative_curve, run_experiment,
                      synthesize_realizable_labels, tune_hyperparameters)
from .kernels import KernelSpec, gaussian, gram, kernel_eval, linear, mmd_kernel, squared
from .krls import ModelConfig, TrainedModel, fit, mse, predict, rkhs_norm
from .selection import Criterion, QueryState, SessionCache, run_session, score_candidate, select_next

__all__ = [
    "ConfigError", "NumericalError",
    "Dataset", "SplitIndices", "load_csv", "standardize", "subsample", "split",
    "KernelSpec", "gaussian", "linear", "squared", "kernel_eval", "gram", "mmd_kernel",
    "ModelConfig", "TrainedModel", "fit", "predict", "rkhs_norm", "mse",
    "Spectrum", "build_d", "build_m_linear", "build_mk", "spectrum_of_m",
    "spectrum_of_mk", "discrepancy", "mmd_spectral", "nuclear_discrepancy",
    "mmd_kernel_mean",
    "Criterion", "QueryState", "SessionCache", "score_candidate", "select_next",
    "run_session",
    "DecompositionResult", "decompose_linear", "decompose_kernel", "bin_contributions",
    "ExperimentConfig", "LearningCurveSet", "WinTieLoss", "config_from_mapping",
    "synthesize_realizable_labels", "tune_hyperparameters", "run_experiment",
    "compare", "relative_curve",
]
