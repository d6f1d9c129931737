"""Dev sanity for the demand module."""
import time

import numpy as np

from phevload.demand import (
    ArrivalTimeDist, ChargingEvent, EmpiricalPmfCharging, RicianCharging,
    TruncatedGaussianCharging, UniformCharging, charging_demand,
    default_nonuniform_charging, expected_demand_curve, moment_match,
    monte_carlo_demand_stats, wrapped_arrival_pmf,
)

# --- pmf basics ---
pmf = wrapped_arrival_pmf(ArrivalTimeDist(19.0, 10.0), 96)
print("pmf sum:", pmf.sum(), "argmax:", np.argmax(pmf), "pmf[75..77]:", pmf[75:78])
pmf2 = wrapped_arrival_pmf(ArrivalTimeDist(12.125, 1e-8), 96)
print("degenerate: argmax", np.argmax(pmf2), "mass", pmf2[48])
pmf3 = wrapped_arrival_pmf(ArrivalTimeDist(0.1, 10.0), 96)
print("wrap case sum:", pmf3.sum(), "pmf[95] vs pmf[0]:", pmf3[95], pmf3[0])

# shift equivariance
a = wrapped_arrival_pmf(ArrivalTimeDist(7.25, 10.0), 96)
b = wrapped_arrival_pmf(ArrivalTimeDist(7.25 + 13 * 0.25, 10.0), 96)
print("shift equivariance exact:", np.array_equal(np.roll(a, 13), b))

# --- default nonuniform moments ---
nu = default_nonuniform_charging()
print("nonuniform mean/var:", nu.mean(), nu.variance())

# --- moment matching ---
u = moment_match("uniform", 6.0, 25.0 / 3.0)
print("uniform match:", u.a, u.b)
tg = moment_match("truncated_gaussian", 6.0, 25.0 / 3.0)
print("tg match:", tg.mu, tg.sigma, "->", tg.mean(), tg.variance())
ric = moment_match("rician", 6.0, 25.0 / 3.0)
print("rician match:", ric.nu_r, ric.sigma_r, "->", ric.mean(), ric.variance())

# --- energy conservation across families ---
arr = ArrivalTimeDist(19.0, 10.0)
t0 = time.time()
for name, dist in [("uniform", u), ("tg", tg), ("rician", ric), ("nonuni", nu)]:
    c = expected_demand_curve(arr, dist, 2.0)
    expect = 2.0 * dist.mean()
    rel = abs(c.energy_kwh - expect) / expect
    print(f"energy {name}: {c.energy_kwh:.9f} vs {expect:.9f} rel={rel:.2e}")
print("curve time:", time.time() - t0)

# box example: point-mass arrival at 19h, deterministic 2h duration
atom = EmpiricalPmfCharging(bin_edges=(2.0, 2.0), masses=(1.0,))
box = expected_demand_curve(ArrivalTimeDist(19.0, 1e-12), atom, 2.0)
want = np.zeros(96); want[76:84] = 2.0
print("box curve exact:", np.allclose(box.values, want, atol=1e-9), box.values[74:86])

# --- Monte Carlo agreement (paper parameters) ---
t0 = time.time()
mc = monte_carlo_demand_stats(arr, u, 2.0, 96, 1_000_000, seed=42)
analytic = expected_demand_curve(arr, u, 2.0)
diff = np.abs(mc.curve.values - analytic.values)
ok = diff <= 3.0 * np.maximum(mc.stderr, 1e-300)
print(f"MC time {time.time()-t0:.1f}s; slots within 3SE: {ok.sum()}/96; "
      f"max |diff|/se: {(diff/np.maximum(mc.stderr,1e-300)).max():.2f}")
print("MC energy check:", mc.curve.energy_kwh, "vs p*mean(sampled):", 2.0 * mc.duration_mean_h)

# --- family curve distances (to freeze delta) ---
cu = expected_demand_curve(arr, u, 2.0).values
ctg = expected_demand_curve(arr, tg, 2.0).values
cric = expected_demand_curve(arr, ric, 2.0).values
cnu = expected_demand_curve(arr, nu, 2.0).values
print("Linf tg-uniform:   ", np.abs(ctg - cu).max())
print("Linf rician-uniform:", np.abs(cric - cu).max())
print("Linf nonuni-uniform:", np.abs(cnu - cu).max())

# wrap case for charging_demand
ev = ChargingEvent(arrival=23.0, duration=4.0, power=2.0)
print("wrap demand at t=1:", charging_demand(ev, 1.0), "at t=3.5:", charging_demand(ev, 3.5))
