"""The working-set dual solver, the projected-gradient oracle, and the
trained-model surface.

Covers:
  - Brute-force oracle: symmetric two-point instance, constant targets,
    restart agreement and the inequality-form optimality certificate, size
    refusal
  - Working-set solver vs oracle objective agreement on random instances and
    on the frozen sine instance
  - kkt_violation: zero at optima, positive off them, feasibility checks
  - Feasibility invariants after training (coefficient sum, box, tube mass)
  - Bias/epsilon recovery: constant targets, noisy fits, predictions within
    the tube at non-error points
  - nu as a bound on support-vector and tube-error fractions
  - Degenerate data (identical inputs, conflicting targets)
  - Monotone descent of the instrumented objective trace
  - Dense-vs-streaming Gram equality and jit-vs-numpy path equality
  - Prediction consistency when zero-coefficient vectors are pruned
  - Lossless model JSON round-trip
"""

from __future__ import annotations

import numpy as np
import pytest

import phevload.svr as svr
from phevload.errors import (
    GridShapeError,
    NonConvergenceError,
    OracleSizeError,
    ParameterDomainError,
)
from phevload.svr import (
    DualSolution,
    LinearKernel,
    NuSvrParams,
    PolynomialKernel,
    RbfKernel,
    SvrModel,
    TrainingSet,
    brute_force_qp_oracle,
    dual_objective,
    kkt_violation,
    load_model,
    model_from_json,
    model_to_json,
    predict,
    save_model,
    solve_dual,
    train_nu_svr,
)

# Frozen reference instance: six points on one period of a sine wave.
SINE_X = (np.arange(6) / 5.0)[:, None]
SINE_T = np.sin(2.0 * np.pi * np.arange(6) / 5.0)
SINE_DATA = TrainingSet(inputs=SINE_X, targets=SINE_T)
SINE_PARAMS = NuSvrParams(c=1000.0, nu=0.5, kkt_tolerance=1e-10)
SINE_KERNEL = RbfKernel(gamma=10.0)
# Objective value frozen from the oracle run that predates trusting the
# working-set solver.
SINE_OBJECTIVE = -1.7581157360899


def _random_instance(seed: int) -> tuple[TrainingSet, NuSvrParams, object]:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 21))
    d = int(rng.integers(1, 4))
    x = rng.uniform(0, 1, (n, d))
    t = np.sin(2 * np.pi * x[:, 0]) + 0.1 * rng.standard_normal(n)
    kernel = [
        RbfKernel(gamma=10.0),
        RbfKernel(gamma=2.0),
        LinearKernel(),
        PolynomialKernel(degree=3, gamma=1.0, coef0=1.0),
    ][seed % 4]
    params = NuSvrParams(
        c=[2.0, 10.0, 1000.0][seed % 3],
        nu=[0.25, 0.5, 0.8][seed % 3],
        kkt_tolerance=1e-10,
    )
    return TrainingSet(inputs=x, targets=t), params, kernel


class TestOracle:
    def test_symmetric_pair(self):
        # Two mirrored points with opposite targets: the dual pattern is
        # symmetric and the coefficient differences cancel.
        data = TrainingSet(
            inputs=np.array([[0.2, 0.4], [0.8, 0.6]]), targets=np.array([0.5, -0.5])
        )
        params = NuSvrParams(c=4.0, nu=0.5, kkt_tolerance=1e-10)
        sol = brute_force_qp_oracle(data, params, RbfKernel(gamma=1.0), seed=0)
        beta = sol.duals.beta
        assert beta[0] == pytest.approx(-beta[1], abs=1e-9)
        assert float(np.sum(beta)) == pytest.approx(0.0, abs=1e-9)
        assert sol.restart_spread <= 1e-8
        assert sol.certificate_residual <= 1e-8

    def test_constant_targets_zero_objective(self):
        data = TrainingSet(inputs=np.random.default_rng(0).uniform(0, 1, (6, 2)),
                           targets=np.full(6, 0.7))
        params = NuSvrParams(c=5.0, nu=0.5, kkt_tolerance=1e-10)
        sol = brute_force_qp_oracle(data, params, RbfKernel(gamma=3.0), seed=1)
        assert sol.objective == pytest.approx(0.0, abs=1e-10)
        assert np.max(np.abs(sol.duals.beta)) <= 1e-9

    def test_sine_reference_value(self):
        sol = brute_force_qp_oracle(SINE_DATA, SINE_PARAMS, SINE_KERNEL, seed=0)
        assert sol.objective == pytest.approx(SINE_OBJECTIVE, abs=1e-8)
        assert sol.certificate_residual <= 1e-9

    def test_refuses_large_problems(self):
        data = TrainingSet(
            inputs=np.random.default_rng(0).uniform(0, 1, (31, 2)),
            targets=np.zeros(31),
        )
        with pytest.raises(OracleSizeError):
            brute_force_qp_oracle(data, NuSvrParams(c=1.0, nu=0.5), LinearKernel())


class TestSolverAgainstOracle:
    def test_sine_instance(self):
        result = solve_dual(SINE_DATA, SINE_PARAMS, SINE_KERNEL)
        oracle = brute_force_qp_oracle(SINE_DATA, SINE_PARAMS, SINE_KERNEL, seed=0)
        assert abs(result.objective - oracle.objective) <= 1e-6
        assert result.objective == pytest.approx(SINE_OBJECTIVE, abs=1e-8)

    @pytest.mark.parametrize("seed", range(8))
    def test_random_instances(self, seed):
        data, params, kernel = _random_instance(seed)
        result = solve_dual(data, params, kernel)
        oracle = brute_force_qp_oracle(data, params, kernel, seed=seed)
        assert abs(result.objective - oracle.objective) <= 1e-6
        assert dual_objective(data, kernel, result.duals) == pytest.approx(
            result.objective, abs=1e-9 * (1 + abs(result.objective))
        )


class TestKktViolation:
    def test_zero_at_constant_target_optimum(self):
        data = TrainingSet(inputs=SINE_X, targets=np.full(6, 0.7))
        params = NuSvrParams(c=5.0, nu=0.5)
        result = solve_dual(data, params, SINE_KERNEL)
        assert kkt_violation(data, params, SINE_KERNEL, result.duals) <= 1e-12

    def test_positive_for_zero_duals_on_sine(self):
        v = kkt_violation(
            SINE_DATA, SINE_PARAMS, SINE_KERNEL, DualSolution(np.zeros(6), np.zeros(6))
        )
        assert v > 0.1

    def test_small_at_oracle_solution(self):
        oracle = brute_force_qp_oracle(SINE_DATA, SINE_PARAMS, SINE_KERNEL, seed=0)
        assert kkt_violation(SINE_DATA, SINE_PARAMS, SINE_KERNEL, oracle.duals) <= 1e-6

    def test_rejects_box_violations(self):
        bad = DualSolution(np.full(6, 1e6), np.full(6, 1e6))
        with pytest.raises(ParameterDomainError):
            kkt_violation(SINE_DATA, SINE_PARAMS, SINE_KERNEL, bad)


class TestFeasibilityInvariants:
    @pytest.mark.parametrize("seed", range(4))
    def test_post_training_feasibility(self, seed):
        data, params, kernel = _random_instance(seed)
        result = solve_dual(data, params, kernel)
        box = params.c / data.n_samples
        a, s = result.duals.alpha, result.duals.alpha_star
        assert np.all(a >= 0.0) and np.all(a <= box)
        assert np.all(s >= 0.0) and np.all(s <= box)
        assert abs(float(np.sum(result.duals.beta))) <= 1e-9 * max(box, 1.0) * data.n_samples
        assert float(np.sum(a + s)) <= params.c * params.nu + params.kkt_tolerance
        assert result.kkt_violation <= params.kkt_tolerance


class TestBiasEpsilonRecovery:
    def test_constant_targets(self):
        data = TrainingSet(inputs=SINE_X, targets=np.full(6, 0.7))
        model = train_nu_svr(data, NuSvrParams(c=5.0, nu=0.5), SINE_KERNEL)
        assert model.n_support == 0
        assert model.bias == pytest.approx(0.7, abs=1e-12)
        assert model.epsilon == pytest.approx(0.0, abs=1e-12)
        assert predict(model, np.array([0.42])) == pytest.approx(0.7, abs=1e-12)

    def test_training_points_inside_tube(self):
        # Non-error points (dual coefficient strictly inside the box) must
        # sit within epsilon of the fit, up to the solver tolerance.
        data, params, kernel = _random_instance(1)
        model, diag = train_nu_svr(data, params, kernel, return_diagnostics=True)
        box = params.c / data.n_samples
        beta = diag.duals.beta
        preds = predict(model, data.inputs)
        inside = np.abs(beta) < box - 1e-9 * box
        resid = np.abs(preds - data.targets)
        assert np.all(resid[inside] <= model.epsilon + 1e-6)


class TestNuProperty:
    @pytest.mark.parametrize("nu", [0.25, 0.5, 0.75])
    def test_support_and_error_fractions(self, nu):
        rng = np.random.default_rng(int(nu * 100))
        n = 50
        for _ in range(5):
            x = rng.uniform(0, 1, (n, 2))
            t = np.sin(2 * np.pi * x[:, 0]) + 0.3 * np.cos(2 * np.pi * x[:, 1])
            t += 0.05 * rng.standard_normal(n)
            data = TrainingSet(inputs=x, targets=t)
            params = NuSvrParams(c=10.0, nu=nu)
            model, diag = train_nu_svr(
                data, params, RbfKernel(gamma=2.0), return_diagnostics=True
            )
            sv_fraction = np.count_nonzero(diag.duals.beta) / n
            preds = predict(model, x)
            # Tube-edge points satisfy |resid| = epsilon only up to the
            # solver tolerance; the guard keeps them out of the error count.
            guard = 10.0 * params.kkt_tolerance * (1.0 + model.epsilon)
            errors = np.abs(preds - t) > model.epsilon + guard
            assert sv_fraction >= nu - 2.0 / n
            assert errors.mean() <= nu + 2.0 / n


class TestDegenerateData:
    def test_identical_inputs_conflicting_targets(self):
        x = np.tile([0.5, 0.5], (6, 1))
        t = np.array([0.0, 1.0, 0.0, 1.0, 0.2, 0.9])
        model = train_nu_svr(TrainingSet(x, t), NuSvrParams(c=4.0, nu=0.5), RbfKernel(10.0))
        # The fit collapses to a constant; no error is raised.
        preds = predict(model, np.vstack([x[0], [0.1, 0.9]]))
        assert preds[0] == pytest.approx(preds[1], abs=1e-9)

    def test_iteration_budget_raises(self):
        data, params, kernel = _random_instance(2)
        tight = NuSvrParams(c=params.c, nu=params.nu, kkt_tolerance=1e-12, max_iterations=3)
        with pytest.raises(NonConvergenceError) as exc_info:
            solve_dual(data, tight, kernel)
        assert exc_info.value.kkt_violation > 0
        assert exc_info.value.iterations == 3


class TestMonotoneDescent:
    def test_objective_trace_non_increasing(self):
        data, params, kernel = _random_instance(3)
        result = solve_dual(data, params, kernel, collect_objective_trace=True)
        trace = np.asarray(result.objective_trace)
        assert trace.shape[0] == result.iterations
        scale = 1e-12 * (1.0 + np.abs(trace).max())
        assert np.all(np.diff(trace) <= scale)


class TestImplementationPaths:
    def test_jit_and_numpy_paths_identical(self):
        if svr._smo_steps_dense_jit is None:
            pytest.skip("numba unavailable; only the numpy path exists")
        for seed in range(4):
            data, params, kernel = _random_instance(seed)
            jit_result = solve_dual(data, params, kernel)
            saved = svr._smo_steps_dense_jit
            svr._smo_steps_dense_jit = None
            try:
                ref_result = solve_dual(data, params, kernel)
            finally:
                svr._smo_steps_dense_jit = saved
            assert np.array_equal(jit_result.duals.alpha, ref_result.duals.alpha)
            assert np.array_equal(jit_result.duals.alpha_star, ref_result.duals.alpha_star)
            assert jit_result.iterations == ref_result.iterations

    def test_streaming_gram_matches_dense(self, monkeypatch):
        data, params, kernel = _random_instance(5)
        dense = solve_dual(data, params, kernel)
        monkeypatch.setattr(svr, "GRAM_PRECOMPUTE_LIMIT", 2)
        streamed = solve_dual(data, params, kernel)
        assert np.array_equal(dense.duals.alpha, streamed.duals.alpha)
        assert np.array_equal(dense.duals.alpha_star, streamed.duals.alpha_star)


class TestPrediction:
    def test_zero_coefficient_model_returns_bias(self):
        model = SvrModel(
            support_inputs=np.zeros((0, 3)),
            dual_coefs=np.zeros(0),
            bias=0.7,
            epsilon=0.1,
            kernel=RbfKernel(10.0),
        )
        assert predict(model, np.array([1.0, 2.0, 3.0])) == 0.7

    def test_single_support_vector_self_evaluation(self):
        sv = np.array([[0.2, 0.8]])
        model = SvrModel(
            support_inputs=sv, dual_coefs=np.array([1.0]), bias=0.0,
            epsilon=0.0, kernel=RbfKernel(10.0),
        )
        assert predict(model, sv[0]) == pytest.approx(1.0, abs=1e-15)

    def test_pruning_zero_coefficients_changes_nothing(self):
        rng = np.random.default_rng(8)
        sv = rng.uniform(0, 1, (5, 2))
        coefs = np.array([0.4, 0.0, -0.4, 0.0, 0.25])
        with_zeros = SvrModel(sv, coefs, 0.1, 0.0, RbfKernel(5.0))
        keep = coefs != 0.0
        pruned = SvrModel(sv[keep], coefs[keep], 0.1, 0.0, RbfKernel(5.0))
        x = rng.uniform(0, 1, (20, 2))
        np.testing.assert_allclose(
            predict(with_zeros, x), predict(pruned, x), atol=1e-12, rtol=0
        )

    def test_dimension_mismatch(self):
        model = SvrModel(np.ones((1, 3)), np.ones(1), 0.0, 0.0, LinearKernel())
        with pytest.raises(GridShapeError):
            predict(model, np.ones(4))


class TestSerialization:
    def _trained_model(self) -> SvrModel:
        data, params, kernel = _random_instance(7)
        return train_nu_svr(data, params, kernel)

    def test_roundtrip_bit_exact(self):
        model = self._trained_model()
        clone = model_from_json(model_to_json(model))
        assert np.array_equal(model.support_inputs, clone.support_inputs)
        assert np.array_equal(model.dual_coefs, clone.dual_coefs)
        assert model.bias == clone.bias
        assert model.epsilon == clone.epsilon
        assert model.kernel == clone.kernel

    def test_roundtrip_with_scaler(self, tmp_path):
        from phevload.pipeline import Scaler

        scaler = Scaler(
            feature_min=np.array([0.0, 0.1]),
            feature_max=np.array([1.0, 0.9]),
            target_min=3.0,
            target_max=97.0,
        )
        data, params, kernel = _random_instance(4)
        model = train_nu_svr(data, params, kernel, scaler=scaler)
        path = tmp_path / "model.json"
        save_model(model, path)
        clone = load_model(path)
        assert clone.scaler is not None
        assert np.array_equal(clone.scaler.feature_min, scaler.feature_min)
        assert clone.scaler.target_max == scaler.target_max
        x = np.random.default_rng(1).uniform(0, 1, (5, data.n_features))
        np.testing.assert_array_equal(predict(model, x), predict(clone, x))

    def test_version_check(self):
        model = self._trained_model()
        doc = model_to_json(model).replace('"format_version": 1', '"format_version": 99')
        with pytest.raises(ParameterDomainError):
            model_from_json(doc)


class TestParamValidation:
    def test_nu_bounds(self):
        with pytest.raises(ParameterDomainError):
            NuSvrParams(c=1.0, nu=0.0)
        with pytest.raises(ParameterDomainError):
            NuSvrParams(c=1.0, nu=1.5)
        NuSvrParams(c=1.0, nu=1.0)  # boundary is valid

    def test_c_positive(self):
        with pytest.raises(ParameterDomainError):
            NuSvrParams(c=0.0, nu=0.5)

    def test_training_set_validation(self):
        with pytest.raises(ParameterDomainError):
            TrainingSet(inputs=np.ones((1, 2)), targets=np.ones(1))
        with pytest.raises(ParameterDomainError):
            TrainingSet(inputs=np.array([[np.nan, 1.0], [0.0, 1.0]]), targets=np.ones(2))
        with pytest.raises(GridShapeError):
            TrainingSet(inputs=np.ones((3, 2)), targets=np.ones(2))
