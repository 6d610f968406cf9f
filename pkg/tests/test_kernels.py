import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discrepal.kernels import (KernelSpec, gaussian, gram, kernel_eval, linear,
                               mmd_kernel, squared)


class TestKernelEval:
    def test_gaussian_zero_distance(self):
        assert kernel_eval(gaussian(1.0), np.array([1.0, 2.0]), np.array([1.0, 2.0])) == 1.0

    def test_gaussian_unit_exponent(self):
        # ||x - x'|| = sqrt(2) at sigma 1 gives exp(-1)
        val = kernel_eval(gaussian(1.0), np.array([1.0, 0.0]), np.array([0.0, 1.0]))
        assert val == pytest.approx(math.exp(-1.0), rel=1e-12)

    def test_squared_linear(self):
        val = kernel_eval(squared(linear()), np.array([1.0, 2.0]), np.array([3.0, 1.0]))
        assert val == 25.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            kernel_eval(linear(), np.zeros(2), np.zeros(3))


class TestSpecValidation:
    def test_gaussian_needs_positive_sigma(self):
        with pytest.raises(ValueError):
            gaussian(0.0)

    def test_squared_does_not_nest(self):
        with pytest.raises(ValueError, match="nest"):
            squared(squared(linear()))

    def test_unknown_family(self):
        with pytest.raises(ValueError, match="unknown"):
            KernelSpec("polynomial")


class TestGram:
    def test_gaussian_unit_diagonal(self, rng):
        a = rng.standard_normal((8, 3))
        k = gram(gaussian(0.7), a, a)
        assert np.allclose(np.diag(k), 1.0)

    def test_linear_is_outer_product(self, rng):
        a = rng.standard_normal((6, 4))
        assert np.allclose(gram(linear(), a, a), a @ a.T)

    def test_symmetric(self, rng):
        a = rng.standard_normal((20, 5))
        for spec in (gaussian(1.3), linear(), squared(linear())):
            k = gram(spec, a, a)
            assert np.abs(k - k.T).max() <= 1e-12

    def test_gaussian_psd_up_to_roundoff(self, rng):
        a = rng.standard_normal((30, 4))
        vals = np.linalg.eigvalsh(gram(gaussian(1.0), a, a))
        assert vals.min() >= -1e-10 * vals.max()

    def test_matches_kernel_eval(self, rng):
        a = rng.standard_normal((5, 3))
        b = rng.standard_normal((4, 3))
        for spec in (gaussian(0.9), linear(), squared(gaussian(2.0))):
            k = gram(spec, a, b)
            for i in range(5):
                for j in range(4):
                    assert k[i, j] == pytest.approx(kernel_eval(spec, a[i], b[j]), abs=1e-12)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ValueError, match="mismatch"):
            gram(linear(), rng.standard_normal((3, 2)), rng.standard_normal((3, 4)))


class TestMmdKernel:
    def test_gaussian_bandwidth_shrinks_by_sqrt2(self):
        out = mmd_kernel(gaussian(1.0))
        assert out.family == "gaussian"
        assert out.sigma == pytest.approx(1.0 / math.sqrt(2.0), rel=1e-12)

    def test_linear_becomes_squared(self):
        out = mmd_kernel(linear())
        assert out.family == "squared" and out.base == linear()
        x = np.array([1.0, 0.0])
        assert kernel_eval(out, x, x) == 1.0

    def test_rejects_squared_input(self):
        with pytest.raises(ValueError):
            mmd_kernel(squared(linear()))

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=100, deadline=None)
    def test_values_are_base_values_squared(self, seed):
        rng = np.random.default_rng(seed)
        d = int(rng.integers(1, 6))
        x, xp = rng.standard_normal(d), rng.standard_normal(d)
        for base in (gaussian(float(rng.uniform(0.3, 3.0))), linear()):
            k = kernel_eval(base, x, xp)
            kp = kernel_eval(mmd_kernel(base), x, xp)
            assert kp == pytest.approx(k**2, rel=1e-12, abs=1e-300)
