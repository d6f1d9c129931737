"""Arrival and charging-duration distributions.

Covers:
  - Wrapped arrival PMF: normalization, mode placement, degenerate widths,
    wrap-around mass, Monte Carlo histogram agreement, exact roll
    equivariance
  - Survival functions of all four duration families: boundary values,
    monotonicity (property-based), closed forms against quadrature
  - Moment matching: closed-form uniform, root-found truncated Gaussian and
    Rician, quadrature fixed point, Monte Carlo moment agreement, infeasible
    targets
  - The shipped non-uniform histogram and the JSON config loader
"""

from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phevload.demand import (
    ArrivalTimeDist,
    EmpiricalPmfCharging,
    RicianCharging,
    TruncatedGaussianCharging,
    UniformCharging,
    charging_survival,
    default_nonuniform_charging,
    load_charging_pmf_json,
    moment_match,
    wrapped_arrival_pmf,
)
from phevload.errors import InfeasibleTargetError, ParameterDomainError


class TestWrappedArrivalPmf:
    def test_sums_to_one(self):
        pmf = wrapped_arrival_pmf(ArrivalTimeDist(19.0, 10.0), 96)
        assert pmf.shape == (96,)
        assert np.all(pmf >= 0.0)
        assert abs(pmf.sum() - 1.0) < 1e-9

    def test_mode_at_mean_slot(self):
        # mu = 19 h sits exactly on the slot-75/76 edge, where the continuous
        # density splits evenly; accept either of the two adjacent slots as
        # the float-level argmax but require slot 76 to carry modal mass.
        pmf = wrapped_arrival_pmf(ArrivalTimeDist(19.0, 10.0), 96)
        modal = np.nonzero(pmf >= pmf.max() * (1.0 - 1e-9))[0]
        assert 76 in modal
        assert set(modal) <= {75, 76}

    def test_mode_strict_for_interior_mean(self):
        pmf = wrapped_arrival_pmf(ArrivalTimeDist(19.125, 10.0), 96)
        assert int(np.argmax(pmf)) == 76

    def test_point_mass_limit(self):
        # Vanishing variance concentrates all mass in the slot containing mu.
        pmf = wrapped_arrival_pmf(ArrivalTimeDist(12.125, 1e-8), 96)
        assert pmf[48] == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.delete(pmf, 48) < 1e-12)

    def test_point_mass_at_slot_edge_splits(self):
        # A degenerate Gaussian centered exactly on a slot boundary genuinely
        # leaves half its mass on each side.
        pmf = wrapped_arrival_pmf(ArrivalTimeDist(12.0, 1e-8), 96)
        assert pmf[47] == pytest.approx(0.5, abs=1e-9)
        assert pmf[48] == pytest.approx(0.5, abs=1e-9)

    def test_wraparound_symmetry(self):
        # mu close to midnight: mass wraps, and near-symmetry about 0.1 h
        # makes the slots one step either side nearly equal.
        pmf = wrapped_arrival_pmf(ArrivalTimeDist(0.1, 10.0), 96)
        assert abs(pmf.sum() - 1.0) < 1e-9
        assert pmf[95] == pytest.approx(pmf[0], rel=5e-3)

    def test_monte_carlo_histogram_agreement(self):
        dist = ArrivalTimeDist(0.1, 10.0)
        pmf = wrapped_arrival_pmf(dist, 96)
        n = 1_000_000
        rng = np.random.default_rng(7)
        samples = rng.normal(dist.mu, np.sqrt(dist.sigma_sq), n) % 24.0
        slots = np.floor(samples / 0.25).astype(int) % 96
        hist = np.bincount(slots, minlength=96) / n
        se = np.sqrt(np.maximum(pmf * (1 - pmf), 1e-12) / n)
        within = np.abs(hist - pmf) <= 4.0 * se
        assert within.mean() >= 0.95

    def test_whole_slot_shift_is_exact_roll(self):
        base = wrapped_arrival_pmf(ArrivalTimeDist(7.25, 10.0), 96)
        shifted = wrapped_arrival_pmf(ArrivalTimeDist(7.25 + 13 * 0.25, 10.0), 96)
        assert np.array_equal(np.roll(base, 13), shifted)

    def test_invalid_parameters(self):
        with pytest.raises(ParameterDomainError):
            ArrivalTimeDist(19.0, 0.0)
        with pytest.raises(ParameterDomainError):
            ArrivalTimeDist(19.0, -1.0)
        with pytest.raises(ParameterDomainError):
            ArrivalTimeDist(24.0, 1.0)
        with pytest.raises(ParameterDomainError):
            wrapped_arrival_pmf(ArrivalTimeDist(19.0, 10.0), 0)


class TestChargingSurvival:
    def test_uniform_midpoint(self):
        assert charging_survival(UniformCharging(1.0, 11.0), 6.0) == pytest.approx(0.5)

    def test_uniform_beyond_support(self):
        assert charging_survival(UniformCharging(1.0, 11.0), 12.0) == 0.0

    def test_boundary_values(self):
        dists = [
            UniformCharging(1.0, 11.0),
            TruncatedGaussianCharging(6.0, 2.887),
            RicianCharging(4.4, 3.5),
            default_nonuniform_charging(),
        ]
        for dist in dists:
            assert charging_survival(dist, 0.0) == pytest.approx(1.0, abs=1e-12)
            assert charging_survival(dist, dist.upper_bound()) == pytest.approx(0.0, abs=1e-12)
            assert charging_survival(dist, 23.999) <= 1e-9

    def test_rician_survival_against_monte_carlo(self):
        dist = moment_match("rician", 6.0, 25.0 / 3.0)
        rng = np.random.default_rng(11)
        n = 1_000_000
        samples = dist.sample(rng, n)
        p_hat = float((samples > 6.0).mean())
        se = np.sqrt(p_hat * (1 - p_hat) / n)
        assert abs(charging_survival(dist, 6.0) - p_hat) <= 3.0 * se

    def test_negative_u_rejected(self):
        with pytest.raises(ParameterDomainError):
            charging_survival(UniformCharging(1.0, 11.0), -0.5)

    @settings(max_examples=60, deadline=None)
    @given(
        kind=st.integers(min_value=0, max_value=3),
        p1=st.floats(0.3, 8.0),
        p2=st.floats(0.3, 5.0),
        u1=st.floats(0.0, 24.0),
        u2=st.floats(0.0, 24.0),
    )
    def test_survival_monotone_and_bounded(self, kind, p1, p2, u1, u2):
        if kind == 0:
            dist = UniformCharging(a=p1, b=p1 + p2 + 0.1)
        elif kind == 1:
            dist = TruncatedGaussianCharging(mu=p1, sigma=p2)
        elif kind == 2:
            dist = RicianCharging(nu_r=p1, sigma_r=p2)
        else:
            lo = min(p1, 20.0)
            dist = EmpiricalPmfCharging(
                bin_edges=(0.5, 0.5 + lo / 2, 1.0 + lo, 1.2 + lo),
                masses=(0.25, 0.35, 0.4),
            )
        lo_u, hi_u = min(u1, u2), max(u1, u2)
        s_lo = charging_survival(dist, lo_u)
        s_hi = charging_survival(dist, hi_u)
        assert -1e-12 <= s_hi <= s_lo <= 1.0 + 1e-12

    def test_slot_averages_match_quadrature(self):
        # The vectorized slot averages must agree with direct adaptive
        # integration of the survival function.
        from scipy.integrate import quad

        for dist in (
            TruncatedGaussianCharging(6.0, 2.887),
            RicianCharging(4.4, 3.5),
        ):
            sbar = dist.survival_slot_averages(96)
            for k in (0, 7, 23, 24, 40, 43, 44, 95):
                ref, _ = quad(lambda u: float(dist.survival(u)), k * 0.25, (k + 1) * 0.25,
                              epsabs=1e-13, epsrel=1e-12)
                assert sbar[k] == pytest.approx(ref / 0.25, abs=1e-10)

    def test_empirical_atom(self):
        atom = EmpiricalPmfCharging(bin_edges=(2.0, 2.0), masses=(1.0,))
        assert charging_survival(atom, 1.999) == 1.0
        assert charging_survival(atom, 2.0) == 0.0
        assert atom.mean() == pytest.approx(2.0)
        assert atom.variance() == pytest.approx(0.0, abs=1e-15)


class TestMomentMatch:
    TARGET_MEAN = 6.0
    TARGET_VAR = 25.0 / 3.0

    def test_uniform_closed_form(self):
        dist = moment_match("uniform", self.TARGET_MEAN, self.TARGET_VAR)
        assert isinstance(dist, UniformCharging)
        assert dist.a == pytest.approx(1.0, abs=1e-12)
        assert dist.b == pytest.approx(11.0, abs=1e-12)

    def test_truncated_gaussian(self):
        dist = moment_match("truncated_gaussian", self.TARGET_MEAN, self.TARGET_VAR)
        # Near the untruncated solution (6, 2.887): truncation pulls the
        # location down and widens the scale a little.
        assert abs(dist.mu - 6.0) < 0.5
        assert abs(dist.sigma - 2.887) < 0.5
        assert dist.mean() == pytest.approx(self.TARGET_MEAN, rel=1e-6)
        assert dist.variance() == pytest.approx(self.TARGET_VAR, rel=1e-6)

    def test_rician(self):
        dist = moment_match("rician", self.TARGET_MEAN, self.TARGET_VAR)
        assert dist.mean() == pytest.approx(self.TARGET_MEAN, rel=1e-6)
        assert dist.variance() == pytest.approx(self.TARGET_VAR, rel=1e-6)

    @pytest.mark.parametrize("family", ["truncated_gaussian", "rician"])
    def test_monte_carlo_moments(self, family):
        dist = moment_match(family, self.TARGET_MEAN, self.TARGET_VAR)
        rng = np.random.default_rng(5)
        n = 1_000_000
        samples = dist.sample(rng, n)
        se_mean = samples.std() / np.sqrt(n)
        assert abs(samples.mean() - self.TARGET_MEAN) <= 3.0 * se_mean
        var_sample = samples.var(ddof=1)
        centered = (samples - samples.mean()) ** 2
        se_var = centered.std() / np.sqrt(n)
        assert abs(var_sample - self.TARGET_VAR) <= 3.0 * se_var

    @settings(max_examples=25, deadline=None)
    @given(
        family=st.sampled_from(["uniform", "truncated_gaussian", "rician"]),
        mean=st.floats(2.0, 10.0),
        ratio=st.floats(0.05, 0.2),
    )
    def test_fixed_point_property(self, family, mean, ratio):
        # Recomputed moments of the matched distribution hit the targets.
        var = ratio * mean**2
        if family == "uniform" and mean - np.sqrt(3 * var) <= 0:
            return
        dist = moment_match(family, mean, var)
        assert dist.mean() == pytest.approx(mean, rel=1e-6)
        assert dist.variance() == pytest.approx(var, rel=1e-6)

    def test_infeasible_uniform(self):
        # Large variance pushes the lower endpoint below zero.
        with pytest.raises(InfeasibleTargetError):
            moment_match("uniform", 2.0, 9.0)

    def test_infeasible_rician(self):
        # A Rician cannot be more dispersed than its Rayleigh limit.
        with pytest.raises(InfeasibleTargetError):
            moment_match("rician", 4.0, 15.0)

    def test_unknown_family(self):
        with pytest.raises(ParameterDomainError):
            moment_match("weibull", 6.0, 8.0)


class TestDefaultNonuniform:
    def test_moments_match_reference_targets(self):
        dist = default_nonuniform_charging()
        assert dist.mean() == pytest.approx(6.0, abs=1e-12)
        assert dist.variance() == pytest.approx(25.0 / 3.0, rel=1e-12)

    def test_masses_normalized(self):
        dist = default_nonuniform_charging()
        assert abs(sum(dist.masses) - 1.0) < 1e-9
        assert all(m >= 0.0 for m in dist.masses)

    def test_visibly_not_uniform(self):
        dist = default_nonuniform_charging()
        uniform = UniformCharging(1.0, 11.0)
        u = np.linspace(0.0, 12.0, 200)
        gap = np.max(np.abs(np.asarray(dist.survival(u)) - np.asarray(uniform.survival(u))))
        assert gap > 0.1


class TestPmfConfigLoader:
    def test_roundtrip(self, tmp_path):
        path = tmp_path / "pmf.json"
        path.write_text(json.dumps({
            "bin_edges_hours": [1.0, 3.0, 7.0, 11.0],
            "masses": [0.2, 0.5, 0.3],
        }))
        dist = load_charging_pmf_json(path)
        assert dist.bin_edges == (1.0, 3.0, 7.0, 11.0)
        assert dist.masses == (0.2, 0.5, 0.3)

    @pytest.mark.parametrize("doc", [
        {"bin_edges_hours": [1, 2]},
        {"bin_edges_hours": [1, 2], "masses": [1.0], "extra": 1},
        {"bin_edges_hours": [1, 2, 3], "masses": [1.0]},
        {"bin_edges_hours": [1, 2], "masses": [0.5]},
        {"bin_edges_hours": [2, 1], "masses": [1.0]},
        {"bin_edges_hours": [0.0, 2], "masses": [1.0]},
        {"bin_edges_hours": [1, 25.0], "masses": [1.0]},
        {"bin_edges_hours": [1, 2], "masses": [-1.0]},
        {"bin_edges_hours": [1, 2], "masses": ["x"]},
    ])
    def test_rejects_bad_documents(self, tmp_path, doc):
        path = tmp_path / "pmf.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(ParameterDomainError):
            load_charging_pmf_json(path)
