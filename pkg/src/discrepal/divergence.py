"""Distribution-difference criteria between the pool and the labeled set.

Everything is driven by the eigenspectrum of the second-moment difference
matrix M = (1/n_P) X_P^T X_P - (1/n_Q) X_Q^T X_Q, or of its kernel-side
counterpart M_K = K_PP D which shares M's nonzero eigenvalues. The three
criteria are the scaled spectral norm (discrepancy), Frobenius norm of the
eigenvalues (MMD), and nuclear norm (nuclear discrepancy); the MMD also
has an independent mean-embedding route used for cross-checking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

# |eigenvalue| below this fraction of the spectral radius counts as zero
ZERO_EIGENVALUE_RTOL = 1e-12
# residual imaginary parts beyond this fraction of max(1, |lambda_1|) are an error
IMAG_PART_RTOL = 1e-8


@dataclass(frozen=True)
class Spectrum:
    """Real eigenvalues sorted by descending absolute value.

    ``eigenvectors`` (columns aligned with the eigenvalues) are kept for
    the source="M" route where the error decomposition needs them.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    source: str

    @property
    def radius(self) -> float:
        return abs(self.eigenvalues[0]) if self.eigenvalues.size else 0.0

    def nonzero_eigenvalues(self) -> np.ndarray:
        cut = ZERO_EIGENVALUE_RTOL * max(1.0, self.radius)
        return self.eigenvalues[np.abs(self.eigenvalues) > cut]


def build_d(n_pool: int, n_labeled: int) -> np.ndarray:
    """Diagonal of the reweighting matrix D, labeled rows first.

    The first ``n_labeled`` entries are 1/n_pool - 1/n_labeled, the rest
    are 1/n_pool; the entries always sum to zero.
    """
    if n_labeled < 1:
        raise ValueError("empty labeled set")
    if n_labeled > n_pool:
        raise ValueError(f"labeled set size {n_labeled} exceeds pool size {n_pool}")
    d = np.full(n_pool, 1.0 / n_pool)
    d[:n_labeled] -= 1.0 / n_labeled
    return d


def build_m_linear(x_pool: np.ndarray, x_labeled: np.ndarray) -> np.ndarray:
    """Second-moment difference matrix in explicit feature space."""
    x_pool = np.atleast_2d(np.asarray(x_pool, dtype=float))
    x_labeled = np.atleast_2d(np.asarray(x_labeled, dtype=float))
    if x_pool.shape[1] != x_labeled.shape[1]:
        raise ValueError(f"dimension mismatch: {x_pool.shape[1]} vs {x_labeled.shape[1]}")
    return x_pool.T @ x_pool / x_pool.shape[0] - x_labeled.T @ x_labeled / x_labeled.shape[0]


def build_mk(k_pool: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Kernel-side matrix K_PP D; ``k_pool`` must be ordered labeled-rows-first
    consistently with ``d``."""
    k_pool = np.asarray(k_pool, dtype=float)
    d = np.asarray(d, dtype=float)
    if k_pool.shape != (d.size, d.size):
        raise ValueError(f"Gram shape {k_pool.shape} does not match {d.size} weights")
    return k_pool * d[None, :]


def sqrt_psd(k: np.ndarray) -> np.ndarray:
    """Symmetric square root of a PSD matrix, clipping negative roundoff
    eigenvalues at zero."""
    vals, vecs = np.linalg.eigh(k)
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T


def real_eigenvalues(values: np.ndarray) -> np.ndarray:
    """Discard imaginary parts, erroring out if they exceed tolerance."""
    values = np.asarray(values)
    if np.iscomplexobj(values):
        scale = max(1.0, float(np.abs(values).max()) if values.size else 0.0)
        worst = float(np.abs(values.imag).max()) if values.size else 0.0
        if worst > IMAG_PART_RTOL * scale:
            raise NumericalError(f"residual imaginary part {worst:.3e} beyond tolerance")
        values = values.real
    return values.astype(float)


def _sorted_by_abs(values: np.ndarray, vectors: np.ndarray | None):
    order = np.argsort(-np.abs(values), kind="stable")
    return values[order], None if vectors is None else vectors[:, order]


def spectrum_of_m(m: np.ndarray) -> Spectrum:
    """Eigendecomposition of the symmetric matrix M, eigenvectors included."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("non-finite matrix entries")
    scale = max(1.0, float(np.abs(m).max()))
    if float(np.abs(m - m.T).max()) > 1e-8 * scale:
        raise ValueError("matrix is not symmetric")
    values, vectors = np.linalg.eigh(m)
    values, vectors = _sorted_by_abs(values, vectors)
    return Spectrum(eigenvalues=values, eigenvectors=vectors, source="M")


def spectrum_of_mk(k_pool: np.ndarray, d: np.ndarray) -> Spectrum:
    """Spectrum of K_PP D computed through the symmetric similar form
    K^(1/2) diag(d) K^(1/2), which is real by construction."""
    k_pool = np.asarray(k_pool, dtype=float)
    d = np.asarray(d, dtype=float)
    if k_pool.shape != (d.size, d.size):
        raise ValueError(f"Gram shape {k_pool.shape} does not match {d.size} weights")
    root = sqrt_psd(k_pool)
    sym = (root * d[None, :]) @ root
    values = np.linalg.eigvalsh(sym)
    values, _ = _sorted_by_abs(values, None)
    return Spectrum(eigenvalues=values, eigenvectors=None, source="M_K")


def discrepancy(s: Spectrum, capacity: float = 1.0) -> float:
    """4 capacity^2 times the largest absolute eigenvalue."""
    return 4.0 * capacity**2 * s.radius


def mmd_spectral(s: Spectrum, capacity: float = 1.0) -> float:
    """4 capacity^2 times the l2 norm of the eigenvalues."""
    return 4.0 * capacity**2 * float(np.sqrt(np.sum(s.eigenvalues**2)))


def nuclear_discrepancy(s: Spectrum, capacity: float = 1.0) -> float:
    """4 capacity^2 times the sum of absolute eigenvalues."""
    return 4.0 * capacity**2 * float(np.sum(np.abs(s.eigenvalues)))


def mmd_kernel_mean(kp_pool: np.ndarray, n_labeled: int, capacity_prime: float) -> float:
    """Mean-embedding route to the MMD from the squared-kernel Gram matrix
    of the pool, ordered labeled-rows-first."""
    kp = np.asarray(kp_pool, dtype=float)
    n_pool = kp.shape[0]
    if kp.shape != (n_pool, n_pool):
        raise ValueError(f"expected a square Gram matrix, got {kp.shape}")
    if not 1 <= n_labeled <= n_pool:
        raise ValueError(f"labeled count {n_labeled} out of range for pool {n_pool}")
    sum_qq = float(kp[:n_labeled, :n_labeled].sum())
    sum_pq = float(kp[:, :n_labeled].sum())
    sum_pp = float(kp.sum())
    inner = (sum_qq / n_labeled**2
             - 2.0 * sum_pq / (n_pool * n_labeled)
             + sum_pp / n_pool**2)
    return capacity_prime * np.sqrt(max(0.0, inner))
