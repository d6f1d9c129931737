"""Kernel evaluation and Gram matrices.

Covers:
  - Closed-form spot values for RBF, polynomial and linear kernels
  - Symmetry and consistency between single and pairwise evaluation
  - Numerical positive semidefiniteness of RBF Gram matrices
  - Shape errors and parameter validation
"""

from __future__ import annotations

import numpy as np
import pytest

from phevload.errors import GridShapeError, ParameterDomainError
from phevload.svr import (
    LinearKernel,
    PolynomialKernel,
    RbfKernel,
    kernel_eval,
    kernel_matrix,
)


class TestKernelEval:
    def test_rbf_zero_distance(self):
        x = np.array([0.3, 0.4, 0.9])
        assert kernel_eval(RbfKernel(gamma=10.0), x, x) == 1.0

    def test_rbf_known_distance(self):
        # squared distance 0.04 at gamma 10 gives exp(-0.4)
        x = np.array([0.0, 0.0])
        y = np.array([0.2, 0.0])
        assert kernel_eval(RbfKernel(gamma=10.0), x, y) == pytest.approx(
            0.6703200460356393, abs=1e-12
        )

    def test_linear_dot_product(self):
        assert kernel_eval(LinearKernel(), np.array([1.0, 2.0]), np.array([3.0, 4.0])) == 11.0

    def test_polynomial(self):
        x = np.array([1.0, 1.0])
        y = np.array([2.0, 0.5])
        val = kernel_eval(PolynomialKernel(degree=2, gamma=0.5, coef0=1.0), x, y)
        assert val == pytest.approx((0.5 * 2.5 + 1.0) ** 2, abs=1e-14)

    def test_symmetry(self):
        rng = np.random.default_rng(0)
        for kernel in (RbfKernel(3.0), PolynomialKernel(3, 1.0, 0.5), LinearKernel()):
            x = rng.uniform(-1, 1, 5)
            y = rng.uniform(-1, 1, 5)
            assert kernel_eval(kernel, x, y) == pytest.approx(
                kernel_eval(kernel, y, x), abs=1e-14
            )

    def test_matrix_matches_scalar(self):
        rng = np.random.default_rng(1)
        x = rng.uniform(0, 1, (4, 3))
        y = rng.uniform(0, 1, (5, 3))
        for kernel in (RbfKernel(10.0), PolynomialKernel(2, 2.0, 1.0), LinearKernel()):
            mat = kernel_matrix(kernel, x, y)
            for i in range(4):
                for j in range(5):
                    assert mat[i, j] == pytest.approx(
                        kernel_eval(kernel, x[i], y[j]), abs=1e-12
                    )

    def test_dimension_mismatch(self):
        with pytest.raises(GridShapeError):
            kernel_eval(RbfKernel(1.0), np.array([1.0]), np.array([1.0, 2.0]))
        with pytest.raises(GridShapeError):
            kernel_matrix(LinearKernel(), np.ones((2, 2)), np.ones((2, 3)))

    def test_parameter_validation(self):
        with pytest.raises(ParameterDomainError):
            RbfKernel(gamma=0.0)
        with pytest.raises(ParameterDomainError):
            RbfKernel(gamma=-1.0)
        with pytest.raises(ParameterDomainError):
            PolynomialKernel(degree=0, gamma=1.0)
        with pytest.raises(ParameterDomainError):
            PolynomialKernel(degree=2, gamma=0.0)


class TestGramPsd:
    @pytest.mark.parametrize("n,gamma", [(10, 0.5), (30, 10.0), (50, 100.0)])
    def test_rbf_gram_min_eigenvalue(self, n, gamma):
        rng = np.random.default_rng(n)
        x = rng.uniform(0, 1, (n, 3))
        gram = kernel_matrix(RbfKernel(gamma=gamma), x, x)
        min_eig = float(np.linalg.eigvalsh(gram)[0])
        assert min_eig >= -1e-10 * n
