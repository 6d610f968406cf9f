"""Kernel functions, Gram matrices, and derivation of the squared kernel
used for mean embedding comparisons.

The squared kernel is represented structurally (adjusted bandwidth for the
Gaussian family, an explicit ``squared`` wrapper for the linear family)
rather than by squaring Gram matrices at call sites, so every consumer
goes through the same evaluation path and cannot silently keep the
original bandwidth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

GAUSSIAN = "gaussian"
LINEAR = "linear"
SQUARED = "squared"


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus its parameters.

    ``gaussian`` needs ``sigma`` > 0; ``squared`` wraps a base kernel and
    evaluates to its square (nesting depth at most 1).
    """

    family: str
    sigma: float | None = None
    base: "KernelSpec | None" = None

    def __post_init__(self):
        if self.family == GAUSSIAN:
            if self.sigma is None or self.sigma <= 0:
                raise ValueError(f"gaussian kernel needs sigma > 0, got {self.sigma}")
            if self.base is not None:
                raise ValueError("gaussian kernel takes no base kernel")
        elif self.family == LINEAR:
            if self.sigma is not None or self.base is not None:
                raise ValueError("linear kernel takes no parameters")
        elif self.family == SQUARED:
            if self.base is None:
                raise ValueError("squared kernel needs a base kernel")
            if self.base.family == SQUARED:
                raise ValueError("squared kernels do not nest")
            if self.sigma is not None:
                raise ValueError("squared kernel takes no sigma")
        else:
            raise ValueError(f"unknown kernel family {self.family!r}")


def gaussian(sigma: float) -> KernelSpec:
    return KernelSpec(GAUSSIAN, sigma=float(sigma))


def linear() -> KernelSpec:
    return KernelSpec(LINEAR)


def squared(base: KernelSpec) -> KernelSpec:
    return KernelSpec(SQUARED, base=base)


def kernel_eval(spec: KernelSpec, x: np.ndarray, xp: np.ndarray) -> float:
    """Kernel value for a single pair of d-vectors."""
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    if x.shape != xp.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {xp.shape}")
    if spec.family == GAUSSIAN:
        diff = x - xp
        return math.exp(-float(diff @ diff) / (2.0 * spec.sigma**2))
    if spec.family == LINEAR:
        return float(x @ xp)
    return kernel_eval(spec.base, x, xp) ** 2


def gram(spec: KernelSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Gram matrix with entry (i, j) = k(a_i, b_j)."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]} columns")
    if spec.family == GAUSSIAN:
        sq = (a * a).sum(axis=1)[:, None] + (b * b).sum(axis=1)[None, :] - 2.0 * (a @ b.T)
        np.maximum(sq, 0.0, out=sq)
        return np.exp(-sq / (2.0 * spec.sigma**2))
    if spec.family == LINEAR:
        return a @ b.T
    return gram(spec.base, a, b) ** 2


def mmd_kernel(model_kernel: KernelSpec) -> KernelSpec:
    """The kernel whose values are the model kernel's values squared.

    For a Gaussian kernel with bandwidth sigma this is another Gaussian
    with bandwidth sigma / sqrt(2); for the linear kernel it is the
    explicit squared kernel.
    """
    if model_kernel.family == GAUSSIAN:
        return gaussian(model_kernel.sigma / math.sqrt(2.0))
    if model_kernel.family == LINEAR:
        return squared(model_kernel)
    raise ValueError(f"no squared-kernel derivation for family {model_kernel.family!r}")
