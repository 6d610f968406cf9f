"""Greedy sequential query selection.

Each query evaluates every unlabeled candidate s by the chosen divergence
of (pool, labeled + {s}) and takes the argmin, ties broken by smallest
dataset index. Selection never reads labels, so the query sequence is a
pure function of the features, kernel and criterion (plus the rng for the
random baseline).

``score_candidate`` recomputes the spectrum from scratch and is the
reference path. Sessions instead update the shared per-query base matrix
by one rank per candidate and read the scores off the secular solver,
which gives identical values up to roundoff at a fraction of the cost;
the equivalence of the two paths is pinned down by the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ._secular import batch_downdate_scores
from .data import Dataset
from .divergence import (build_d, discrepancy, mmd_spectral,
                         nuclear_discrepancy, spectrum_of_mk, sqrt_psd)
from .kernels import KernelSpec, gram


class Criterion(Enum):
    DISCREPANCY = "Discrepancy"
    MMD = "MMD"
    NUCLEAR = "NuclearDiscrepancy"
    RANDOM = "Random"


@dataclass
class QueryState:
    """Index bookkeeping for one selection session.

    ``pool`` holds the dataset rows the learner may query; ``labeled``
    grows by one index per query, in query order.
    """

    pool: np.ndarray
    labeled: list = field(default_factory=list)

    def __post_init__(self):
        self.pool = np.unique(np.asarray(self.pool, dtype=np.intp))
        self.labeled = [int(i) for i in self.labeled]
        pool_set = set(self.pool.tolist())
        if len(set(self.labeled)) != len(self.labeled):
            raise ValueError("labeled set contains duplicates")
        if not set(self.labeled) <= pool_set:
            raise ValueError("labeled indices must lie in the pool")

    @property
    def unlabeled(self) -> np.ndarray:
        return np.setdiff1d(self.pool, np.asarray(self.labeled, dtype=np.intp))

    def add(self, s: int) -> None:
        s = int(s)
        if s in self.labeled or s not in set(self.pool.tolist()):
            raise ValueError(f"index {s} is not an unlabeled pool member")
        self.labeled.append(s)


@dataclass
class SessionCache:
    """Kernel quantities fixed for a (dataset rows, kernel) pair: the pool
    Gram matrix, its PSD square root, and the dataset-index -> pool-position
    map. Shareable across criteria and sessions over the same pool."""

    pool: np.ndarray
    k_pool: np.ndarray
    root: np.ndarray
    position: dict

    @classmethod
    def build(cls, dataset: Dataset, pool: np.ndarray, kernel: KernelSpec) -> "SessionCache":
        pool = np.unique(np.asarray(pool, dtype=np.intp))
        x = dataset.features[pool]
        k = gram(kernel, x, x)
        return cls(pool=pool, k_pool=k, root=sqrt_psd(k),
                   position={int(idx): i for i, idx in enumerate(pool)})


def score_candidate(dataset: Dataset, state: QueryState, s: int,
                    criterion: Criterion, kernel: KernelSpec) -> float:
    """Divergence of (pool, labeled + {s}) at capacity 1, computed from a
    freshly built labeled-first Gram matrix."""
    if criterion == Criterion.RANDOM:
        raise ValueError("the random baseline has no candidate score")
    s = int(s)
    unlabeled = state.unlabeled
    if s not in set(unlabeled.tolist()):
        raise ValueError(f"candidate {s} is not an unlabeled pool member")
    cand_labeled = list(state.labeled) + [s]
    rest = np.setdiff1d(state.pool, np.asarray(cand_labeled, dtype=np.intp))
    order = np.concatenate([np.asarray(cand_labeled, dtype=np.intp), rest])
    x = dataset.features[order]
    k_pool = gram(kernel, x, x)
    spec = spectrum_of_mk(k_pool, build_d(order.size, len(cand_labeled)))
    if criterion == Criterion.DISCREPANCY:
        return discrepancy(spec)
    if criterion == Criterion.MMD:
        return mmd_spectral(spec)
    return nuclear_discrepancy(spec)


def _batch_scores(state: QueryState, criterion: Criterion, cache: SessionCache,
                  candidates: np.ndarray) -> np.ndarray:
    """Scores for all candidates at once via the shared-base rank-one form."""
    n_pool = cache.pool.size
    pos_labeled = np.array([cache.position[i] for i in state.labeled], dtype=np.intp)
    pos_cand = np.array([cache.position[int(i)] for i in candidates], dtype=np.intp)
    rho = -1.0 / (len(state.labeled) + 1)

    base = cache.k_pool / n_pool
    if pos_labeled.size:
        cols = cache.root[:, pos_labeled]
        base = base + rho * (cols @ cols.T)
    cand_cols = cache.root[:, pos_cand]

    if criterion == Criterion.MMD:
        # sum of squared eigenvalues is the squared Frobenius norm, which
        # has a closed form under a rank-one update
        fro2 = float(np.sum(base * base))
        cross = np.einsum("ij,ij->j", cand_cols, base @ cand_cols)
        k_ss = cache.k_pool[pos_cand, pos_cand]
        return 4.0 * np.sqrt(np.maximum(0.0, fro2 + 2.0 * rho * cross + rho**2 * k_ss**2))

    delta, vecs = np.linalg.eigh(base)
    z_cols = np.ascontiguousarray(vecs.T @ cand_cols)
    scores = batch_downdate_scores(delta, z_cols, rho)
    return 4.0 * (scores[0] if criterion == Criterion.DISCREPANCY else scores[1])


def select_next(dataset: Dataset, state: QueryState, criterion: Criterion,
                kernel: KernelSpec, rng=None, cache: SessionCache | None = None) -> int:
    """Next query: divergence argmin over the unlabeled set (ties to the
    smallest index), or a uniform draw for the random baseline."""
    candidates = state.unlabeled
    if candidates.size == 0:
        raise ValueError("pool exhausted")
    if criterion == Criterion.RANDOM:
        if rng is None:
            raise ValueError("the random baseline needs an rng")
        return int(rng.choice(candidates))
    if cache is None:
        cache = SessionCache.build(dataset, state.pool, kernel)
    scores = _batch_scores(state, criterion, cache, candidates)
    return int(candidates[int(np.argmin(scores))])


def run_session(dataset: Dataset, state: QueryState, criterion: Criterion,
                kernel: KernelSpec, budget: int, rng=None,
                cache: SessionCache | None = None) -> list:
    """Run ``budget`` sequential queries, growing ``state.labeled`` in place;
    returns the queried indices in selection order."""
    if budget < 0:
        raise ValueError(f"budget must be >= 0, got {budget}")
    if budget > state.unlabeled.size:
        raise ValueError(f"budget {budget} exceeds {state.unlabeled.size} unlabeled samples")
    if budget == 0:
        return []
    if cache is None and criterion != Criterion.RANDOM:
        cache = SessionCache.build(dataset, state.pool, kernel)
    queries = []
    for _ in range(budget):
        s = select_next(dataset, state, criterion, kernel, rng=rng, cache=cache)
        state.add(s)
        queries.append(s)
    return queries
