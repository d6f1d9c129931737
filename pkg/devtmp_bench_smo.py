"""Dev benchmark: SMO at month-of-data scale."""
import time

import numpy as np

from phevload.svr import NuSvrParams, RbfKernel, TrainingSet, solve_dual, train_nu_svr, predict

rng = np.random.default_rng(0)
days = 31
n = 96 * days
q = np.tile(np.arange(96), days)
dow = np.repeat(np.arange(days) % 7, 96)
x = np.column_stack([
    q / 95.0,
    np.sin(2 * np.pi * q / 96.0),
    np.cos(2 * np.pi * q / 96.0),
    dow / 6.0,
    (dow >= 5).astype(float),
    np.zeros(n),
])
# winter-ish double-peak shape + small noise, scaled to [0,1]
hours = q * 0.25
shape = (
    30.0
    + 28.0 * np.exp(-0.5 * ((hours - 19.0) / 2.2) ** 2)
    + 12.0 * np.exp(-0.5 * ((hours - 7.5) / 1.5) ** 2)
)
noise = shape * rng.uniform(-0.01, 0.01, n)
y = shape + noise
y = (y - y.min()) / (y.max() - y.min())

data = TrainingSet(inputs=x, targets=y)
params = NuSvrParams(c=1000.0, nu=0.5, kkt_tolerance=1e-6)
t0 = time.time()
res = solve_dual(data, params, RbfKernel(gamma=10.0))
t1 = time.time()
print(f"N={n}: iterations={res.iterations}, violation={res.kkt_violation:.2e}, "
      f"objective={res.objective:.6f}, time={t1-t0:.1f}s")
beta = res.duals.beta
print(f"superv: nSV={np.count_nonzero(beta)} fracSV={np.count_nonzero(beta)/n:.3f}")
