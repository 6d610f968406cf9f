"""Eigenvalue decomposition of the pool-vs-labeled error difference.

For two models h (trained on the labeled set) and f (the labeling model),
with u = f - h, the loss gap satisfies L_pool(h,f) - L_labeled(h,f) =
sum_i ubar_i^2 lambda_i, where ubar_i projects u onto the i-th eigenvector
of the second-moment difference matrix. The linear route works in explicit
feature space; the kernel route recovers the projections from dual
coefficients and Gram matrices only, so it applies to any kernel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .divergence import ZERO_EIGENVALUE_RTOL, spectrum_of_m, sqrt_psd
from .errors import NumericalError
from .kernels import gram
from .krls import TrainedModel
from .selection import QueryState

DEFAULT_BIN_EDGES = (1, 9, 49)


@dataclass(frozen=True)
class DecompositionResult:
    """Per-eigenvalue split of the error gap, ordered by |eigenvalue| descending.

    ``contributions[i] = weights[i] * eigenvalues[i]`` and the weights are
    the squared eigenvector projections of u.
    """

    eigenvalues: np.ndarray
    weights: np.ndarray
    contributions: np.ndarray

    @property
    def total(self) -> float:
        return float(self.contributions.sum())


def decompose_linear(u: np.ndarray, m: np.ndarray) -> DecompositionResult:
    """Decompose u^T M u over the orthonormal eigenvectors of symmetric M."""
    u = np.asarray(u, dtype=float)
    spec = spectrum_of_m(m)
    ubar = spec.eigenvectors.T @ u
    weights = ubar**2
    return DecompositionResult(eigenvalues=spec.eigenvalues, weights=weights,
                               contributions=weights * spec.eigenvalues)


def decompose_kernel(f_model: TrainedModel, h_model: TrainedModel,
                     pool: Dataset, state: QueryState) -> DecompositionResult:
    """Kernel route: eigenpairs of the kernel-side difference matrix plus
    the combined dual coefficients of f and -h give the projections.

    Eigenvalues below the shared zero threshold get zero contribution; a
    vanishing eigenvector norm at a live eigenvalue is a numerical error.
    """
    if f_model.kernel != h_model.kernel:
        raise ValueError("f and h must share one kernel")
    kernel = f_model.kernel
    pool_idx = state.pool
    n_pool = pool_idx.size
    labeled = set(state.labeled)

    x_pool = pool.features[pool_idx]
    k_pool = gram(kernel, x_pool, x_pool)
    d = np.full(n_pool, 1.0 / n_pool)
    if labeled:
        in_labeled = np.fromiter((int(i) in labeled for i in pool_idx), dtype=bool, count=n_pool)
        d[in_labeled] -= 1.0 / len(labeled)
    else:
        raise ValueError("empty labeled set")

    root = sqrt_psd(k_pool)
    sym = (root * d[None, :]) @ root
    values, vecs = np.linalg.eigh(sym)
    order = np.argsort(-np.abs(values), kind="stable")
    values, vecs = values[order], vecs[:, order]
    cut = ZERO_EIGENVALUE_RTOL * max(1.0, float(np.abs(values[0])) if values.size else 0.0)
    live = np.abs(values) > cut

    # combined dual vector over all dataset rows: f minus h
    c_tilde = np.zeros(pool.n)
    np.add.at(c_tilde, f_model.support, f_model.alpha)
    np.add.at(c_tilde, h_model.support, -h_model.alpha)
    rows = np.flatnonzero(c_tilde)

    weights = np.zeros(n_pool)
    if live.any() and rows.size:
        # beta_i = D K^(1/2) w_i is an eigenvector of (K_PP D)^T for value_i
        betas = d[:, None] * (root @ vecs[:, live])
        denom_sq = np.einsum("ij,ij->j", betas, k_pool @ betas)
        denom = np.sqrt(np.maximum(0.0, denom_sq))
        if np.any(denom <= 1e-12):
            raise NumericalError("degenerate eigenvector norm at a live eigenvalue")
        k_cross = gram(kernel, pool.features[rows], x_pool)
        numer = (c_tilde[rows] @ k_cross) @ betas
        weights[live] = (numer / denom) ** 2

    return DecompositionResult(eigenvalues=values, weights=weights,
                               contributions=weights * values)


def bin_contributions(result: DecompositionResult, edges=DEFAULT_BIN_EDGES) -> dict:
    """Partial sums of contributions over 1-based rank ranges.

    Default edges (1, 9, 49) produce the bins EV1, EV2_9, EV10_49 and
    EV50plus; ranks past the spectrum contribute zero.
    """
    edges = tuple(int(e) for e in edges)
    if not edges or any(b <= a for a, b in zip(edges, edges[1:])) or edges[0] < 1:
        raise ValueError(f"edges must be increasing positive ranks, got {edges}")
    contrib = result.contributions
    bins = {}
    lo = 1
    for hi in edges:
        name = f"EV{lo}" if lo == hi else f"EV{lo}_{hi}"
        bins[name] = float(contrib[lo - 1:hi].sum())
        lo = hi + 1
    bins[f"EV{lo}plus"] = float(contrib[lo - 1:].sum())
    return bins
