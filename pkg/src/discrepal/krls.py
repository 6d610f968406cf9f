"""Kernel regularized least squares: training, prediction, RKHS norm.

Training minimizes mean squared error on the labeled rows plus
``reg_lambda`` times the squared RKHS norm, which in dual form solves
(G + m * reg_lambda * I) alpha = y. The mean (rather than summed) loss
keeps the scale of ``reg_lambda`` independent of the labeled-set size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .data import Dataset
from .errors import NumericalError
from .kernels import KernelSpec, gram

SOLVE_RESIDUAL_RTOL = 1e-6


@dataclass(frozen=True)
class ModelConfig:
    """Regularization strength and output scale bounding the hypothesis ball."""

    reg_lambda: float
    f_max: float = 1.0

    def __post_init__(self):
        if self.reg_lambda <= 0:
            raise ValueError(f"reg_lambda must be > 0, got {self.reg_lambda}")
        if self.f_max <= 0:
            raise ValueError(f"f_max must be > 0, got {self.f_max}")

    @property
    def capacity(self) -> float:
        """Radius of the hypothesis ball: f_max / sqrt(reg_lambda)."""
        return self.f_max / math.sqrt(self.reg_lambda)


@dataclass(frozen=True)
class TrainedModel:
    """Dual-form model: support row indices into a Dataset plus coefficients."""

    support: np.ndarray
    alpha: np.ndarray
    kernel: KernelSpec

    def __post_init__(self):
        support = np.asarray(self.support, dtype=np.intp)
        alpha = np.asarray(self.alpha, dtype=float)
        if support.shape != alpha.shape:
            raise ValueError("support and alpha must have equal length")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "alpha", alpha)


def fit(features: np.ndarray, targets: np.ndarray, kernel: KernelSpec,
        reg_lambda: float, support=None) -> TrainedModel:
    """Train on the given rows; ``support`` records where those rows live
    in the enclosing dataset (defaults to 0..m-1)."""
    x = np.atleast_2d(np.asarray(features, dtype=float))
    y = np.asarray(targets, dtype=float)
    m = x.shape[0]
    if y.shape != (m,):
        raise ValueError(f"targets shape {y.shape} does not match {m} rows")
    if reg_lambda <= 0:
        raise ValueError(f"reg_lambda must be > 0, got {reg_lambda}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("non-finite training inputs")

    g = gram(kernel, x, x)
    system = g + (m * reg_lambda) * np.eye(m)
    try:
        chol = scipy.linalg.cho_factor(system, lower=True, check_finite=False)
        alpha = scipy.linalg.cho_solve(chol, y, check_finite=False)
    except scipy.linalg.LinAlgError:
        alpha = scipy.linalg.solve(system, y, assume_a="sym", check_finite=False)
    residual = np.linalg.norm(system @ alpha - y)
    if residual > SOLVE_RESIDUAL_RTOL * max(np.linalg.norm(y), 1e-300):
        raise NumericalError(f"dual solve residual {residual:.3e} exceeds tolerance")

    if support is None:
        support = np.arange(m)
    return TrainedModel(support=support, alpha=alpha, kernel=kernel)


def predict(model: TrainedModel, pool: Dataset, query_rows) -> np.ndarray:
    """Evaluate sum_i alpha_i k(x_i, .) at rows of ``pool`` (an index list)
    or at an explicit feature matrix."""
    query_rows = np.asarray(query_rows)
    if query_rows.ndim <= 1 and np.issubdtype(query_rows.dtype, np.integer):
        xq = pool.features[np.atleast_1d(query_rows)]
    else:
        xq = np.atleast_2d(query_rows.astype(float))
    xs = pool.features[model.support]
    return model.alpha @ gram(model.kernel, xs, xq)


def rkhs_norm(model: TrainedModel, pool: Dataset) -> float:
    """RKHS norm sqrt(alpha^T G alpha), clamped at 0 against roundoff."""
    xs = pool.features[model.support]
    g = gram(model.kernel, xs, xs)
    return math.sqrt(max(0.0, float(model.alpha @ g @ model.alpha)))


def mse(predictions: np.ndarray, targets: np.ndarray) -> float:
    """Mean squared error between two equal-length vectors."""
    p = np.asarray(predictions, dtype=float)
    t = np.asarray(targets, dtype=float)
    if p.shape != t.shape or p.ndim != 1 or p.size < 1:
        raise ValueError(f"length mismatch: {p.shape} vs {t.shape}")
    return float(np.mean((p - t) ** 2))
