"""Expected demand curves, the Monte Carlo cross-check, and fleet totals.

Covers:
  - charging_demand point evaluation including the wrapped window, against a
    48-hour unrolled-timeline reference
  - expected_demand_curve: degenerate box case, energy conservation for all
    four families over random configurations, boundedness, exact circular
    shift equivariance
  - Monte Carlo estimator: single-sample identity, degenerate inputs, seeded
    reproducibility, three-standard-error agreement with the analytic curve,
    internal energy identity
  - total_demand composition rules and energy bookkeeping
  - curve CSV export format
"""

from __future__ import annotations

import numpy as np
import pytest

from phevload.demand import (
    ArrivalTimeDist,
    ChargingEvent,
    EmpiricalPmfCharging,
    RicianCharging,
    TruncatedGaussianCharging,
    UniformCharging,
    charging_demand,
    default_nonuniform_charging,
    expected_demand_curve,
    export_curve_csv,
    moment_match,
    monte_carlo_demand_oracle,
    monte_carlo_demand_stats,
    total_demand,
)
from phevload.errors import GridShapeError, ParameterDomainError

ARRIVAL = ArrivalTimeDist(19.0, 10.0)


def _unrolled_demand(event: ChargingEvent, t: float) -> float:
    """Reference: lay the window on an unwrapped [0, 48) axis and test both
    copies of t."""
    start = event.arrival
    end = event.arrival + event.duration
    for tt in (t, t + 24.0):
        if start <= tt < end:
            return event.power
    return 0.0


class TestChargingDemand:
    def test_inside_window(self):
        event = ChargingEvent(arrival=19.0, duration=2.0, power=2.0)
        assert charging_demand(event, 20.0) == 2.0

    def test_outside_window(self):
        event = ChargingEvent(arrival=19.0, duration=2.0, power=2.0)
        assert charging_demand(event, 22.0) == 0.0

    def test_wrapped_window(self):
        event = ChargingEvent(arrival=23.0, duration=4.0, power=2.0)
        assert charging_demand(event, 1.0) == 2.0

    def test_against_unrolled_timeline(self):
        rng = np.random.default_rng(3)
        for _ in range(300):
            event = ChargingEvent(
                arrival=float(rng.uniform(0, 24)),
                duration=float(rng.uniform(0.1, 23.5)),
                power=float(rng.uniform(0.5, 10)),
            )
            t = float(rng.uniform(0, 24))
            assert charging_demand(event, t) == _unrolled_demand(event, t)

    def test_domain_error(self):
        event = ChargingEvent(arrival=19.0, duration=2.0, power=2.0)
        with pytest.raises(ParameterDomainError):
            charging_demand(event, 24.0)
        with pytest.raises(ParameterDomainError):
            charging_demand(event, -0.1)


class TestExpectedDemandCurve:
    def test_degenerate_box(self):
        # Point-mass arrival inside slot 76 and an exact 2 h duration: the
        # curve is the outlet power on [19, 21) and zero elsewhere.
        atom = EmpiricalPmfCharging(bin_edges=(2.0, 2.0), masses=(1.0,))
        curve = expected_demand_curve(ArrivalTimeDist(19.1, 1e-10), atom, 2.0)
        expected = np.zeros(96)
        expected[76:84] = 2.0
        np.testing.assert_allclose(curve.values, expected, atol=1e-9)

    def test_reference_energy(self):
        curve = expected_demand_curve(ARRIVAL, UniformCharging(1.0, 11.0), 2.0)
        assert curve.energy_kwh == pytest.approx(12.0, rel=1e-9)

    @pytest.mark.parametrize("seed", range(4))
    def test_energy_conservation_random_configs(self, seed):
        rng = np.random.default_rng(seed)
        for _ in range(12):
            kind = rng.integers(0, 4)
            if kind == 0:
                a = float(rng.uniform(0.2, 8.0))
                dist = UniformCharging(a, a + float(rng.uniform(0.5, 10.0)))
            elif kind == 1:
                dist = TruncatedGaussianCharging(
                    float(rng.uniform(1.0, 12.0)), float(rng.uniform(0.3, 5.0))
                )
            elif kind == 2:
                dist = RicianCharging(
                    float(rng.uniform(0.5, 10.0)), float(rng.uniform(0.3, 4.0))
                )
            else:
                edges = np.sort(rng.uniform(0.5, 20.0, 4))
                masses = rng.uniform(0.1, 1.0, 3)
                masses /= masses.sum()
                dist = EmpiricalPmfCharging(tuple(edges), tuple(masses))
            arrival = ArrivalTimeDist(float(rng.uniform(0, 24)), float(rng.uniform(0.05, 40.0)))
            power = float(rng.uniform(0.5, 20.0))
            curve = expected_demand_curve(arrival, dist, power)
            expected = power * dist.mean()
            assert abs(curve.energy_kwh - expected) / expected <= 1e-6

    def test_boundedness(self):
        curve = expected_demand_curve(ARRIVAL, UniformCharging(1.0, 11.0), 2.0)
        assert np.all(curve.values >= 0.0)
        assert np.all(curve.values <= 2.0)

    def test_circular_shift_equivariance(self):
        base = expected_demand_curve(
            ArrivalTimeDist(7.25, 10.0), UniformCharging(1.0, 11.0), 2.0
        )
        for k in (1, 17, 40):
            shifted = expected_demand_curve(
                ArrivalTimeDist(7.25 + k * 0.25, 10.0), UniformCharging(1.0, 11.0), 2.0
            )
            assert np.array_equal(np.roll(base.values, k), shifted.values)

    def test_invalid_power(self):
        with pytest.raises(ParameterDomainError):
            expected_demand_curve(ARRIVAL, UniformCharging(1.0, 11.0), 0.0)


class TestMonteCarloOracle:
    def test_seeded_reproducibility(self):
        a = monte_carlo_demand_oracle(ARRIVAL, UniformCharging(1.0, 11.0), 2.0, 96, 2000, seed=9)
        b = monte_carlo_demand_oracle(ARRIVAL, UniformCharging(1.0, 11.0), 2.0, 96, 2000, seed=9)
        assert np.array_equal(a.values, b.values)

    def test_single_sample_equals_one_event(self):
        # n = 1: the estimate is that one event's per-slot average demand.
        dist = UniformCharging(1.0, 11.0)
        seed = 4
        curve = monte_carlo_demand_oracle(ARRIVAL, dist, 2.0, 96, 1, seed=seed)
        rng = np.random.default_rng(seed)
        raw = float(rng.normal(ARRIVAL.mu, np.sqrt(ARRIVAL.sigma_sq), 1)[0]) % 24.0
        slot = int(raw / 0.25) % 96
        duration = float(dist.sample(rng, 1)[0])
        expected = np.zeros(96)
        for j in range(96):
            offset = (j - slot) % 96
            expected[j] = 2.0 * min(max(duration / 0.25 - offset, 0.0), 1.0)
        np.testing.assert_array_equal(curve.values, expected)

    def test_degenerate_inputs_reproduce_box(self):
        atom = EmpiricalPmfCharging(bin_edges=(2.0, 2.0), masses=(1.0,))
        curve = monte_carlo_demand_oracle(ArrivalTimeDist(19.1, 1e-12), atom, 2.0, 96, 50, seed=1)
        expected = np.zeros(96)
        expected[76:84] = 2.0
        np.testing.assert_allclose(curve.values, expected, atol=1e-9)

    def test_three_sigma_agreement_with_analytic(self):
        dist = UniformCharging(1.0, 11.0)
        stats = monte_carlo_demand_stats(ARRIVAL, dist, 2.0, 96, 200_000, seed=42)
        analytic = expected_demand_curve(ARRIVAL, dist, 2.0)
        diff = np.abs(stats.curve.values - analytic.values)
        ok = diff <= 3.0 * np.maximum(stats.stderr, 1e-300)
        assert ok.mean() >= 0.95

    def test_energy_identity(self):
        # The sampled curve's energy equals outlet power times the sampled
        # mean duration exactly (up to accumulation round-off).
        stats = monte_carlo_demand_stats(ARRIVAL, UniformCharging(1.0, 11.0), 2.0, 96, 5000, seed=3)
        assert stats.curve.energy_kwh == pytest.approx(2.0 * stats.duration_mean_h, rel=1e-12)


class TestTotalDemand:
    def test_zero_vehicles_identity(self):
        base = np.linspace(5.0, 8.0, 96)
        curve = expected_demand_curve(ARRIVAL, UniformCharging(1.0, 11.0), 2.0)
        np.testing.assert_array_equal(total_demand(base, curve, 0), base)

    def test_zero_base_single_vehicle(self):
        curve = expected_demand_curve(ARRIVAL, UniformCharging(1.0, 11.0), 2.0)
        out = total_demand(np.zeros(96), curve, 1)
        np.testing.assert_array_equal(out, curve.values)

    def test_energy_bookkeeping(self):
        rng = np.random.default_rng(0)
        base = rng.uniform(10.0, 40.0, 96)
        curve = expected_demand_curve(ARRIVAL, UniformCharging(1.0, 11.0), 2.0)
        out = total_demand(base, curve, 10)
        assert out.sum() * 0.25 == pytest.approx(base.sum() * 0.25 + 10 * 12.0, rel=1e-9)

    def test_grid_mismatch(self):
        curve = expected_demand_curve(ARRIVAL, UniformCharging(1.0, 11.0), 2.0, grid_slots=48)
        with pytest.raises(GridShapeError):
            total_demand(np.zeros(96), curve, 1)


class TestCurveExport:
    def test_csv_format(self, tmp_path):
        curve = expected_demand_curve(ARRIVAL, UniformCharging(1.0, 11.0), 2.0)
        path = tmp_path / "curve.csv"
        export_curve_csv(curve, path, header_comments=("config_hash: abc",))
        lines = path.read_text().splitlines()
        assert lines[0] == "# config_hash: abc"
        assert lines[1] == "slot_index,hour_start,expected_kw"
        assert len(lines) == 2 + 96
        first = lines[2].split(",")
        assert first[0] == "0"
        assert float(first[1]) == 0.0
        assert float(first[2]) == curve.values[0]
