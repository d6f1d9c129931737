"""Dev sanity: SMO vs oracle vs a scipy SLSQP reference on random instances."""
import time

import numpy as np
from scipy.optimize import minimize

from phevload.svr import (
    LinearKernel, NuSvrParams, PolynomialKernel, RbfKernel, TrainingSet,
    brute_force_qp_oracle, dual_objective, kernel_matrix, kkt_violation,
    solve_dual, train_nu_svr, predict,
)


def slsqp_reference(data, params, kernel):
    n = data.n_samples
    q = kernel_matrix(kernel, data.inputs, data.inputs)
    t = data.targets
    ub = params.c / n

    def f(theta):
        beta = theta[:n] - theta[n:]
        return 0.5 * beta @ (q @ beta) - t @ beta

    def grad(theta):
        g = q @ (theta[:n] - theta[n:]) - t
        return np.concatenate([g, -g])

    cons = [
        {"type": "eq", "fun": lambda th: th[:n].sum() - th[n:].sum(),
         "jac": lambda th: np.concatenate([np.ones(n), -np.ones(n)])},
        {"type": "ineq", "fun": lambda th: params.c * params.nu - th.sum(),
         "jac": lambda th: -np.ones(2 * n)},
    ]
    best = None
    for s in range(3):
        rng = np.random.default_rng(100 + s)
        x0 = rng.uniform(0, ub, 2 * n)
        res = minimize(f, x0, jac=grad, bounds=[(0, ub)] * 2 * n,
                       constraints=cons, method="SLSQP",
                       options={"maxiter": 2000, "ftol": 1e-14})
        if best is None or res.fun < best:
            best = res.fun
    return best


rng = np.random.default_rng(7)
print("inst | N  | kernel     |   SMO obj    |  oracle obj  | SLSQP obj    | d(oracle) | d(slsqp) | cert     | kkt")
worst = 0.0
t0 = time.time()
for k in range(12):
    n = int(rng.integers(4, 21))
    d = int(rng.integers(1, 4))
    x = rng.uniform(0, 1, (n, d))
    t = np.sin(2 * np.pi * x[:, 0]) + 0.1 * rng.standard_normal(n)
    kernel = [RbfKernel(gamma=10.0), RbfKernel(gamma=2.0), LinearKernel(),
              PolynomialKernel(degree=3, gamma=1.0, coef0=1.0)][k % 4]
    c = [2.0, 10.0, 1000.0][k % 3]
    nu = [0.25, 0.5, 0.8][k % 3]
    params = NuSvrParams(c=c, nu=nu, kkt_tolerance=1e-10)
    data = TrainingSet(inputs=x, targets=t)
    res = solve_dual(data, params, kernel)
    orc = brute_force_qp_oracle(data, params, kernel, seed=k)
    ref = slsqp_reference(data, params, kernel)
    dv = abs(res.objective - orc.objective)
    dslsqp = abs(res.objective - ref)
    kv = kkt_violation(data, params, kernel, res.duals)
    worst = max(worst, dv)
    print(f"{k:4d} | {n:2d} | {type(kernel).__name__:10s} | {res.objective:12.6f} | "
          f"{orc.objective:12.6f} | {ref:12.6f} | {dv:9.2e} | {dslsqp:8.2e} | "
          f"{orc.certificate_residual:8.2e} | {kv:.1e}")
print(f"worst SMO-oracle gap: {worst:.3e}   elapsed {time.time()-t0:.2f}s")

# constant-target degenerate case
x = rng.uniform(0, 1, (8, 2))
data = TrainingSet(inputs=x, targets=np.full(8, 0.7))
model = train_nu_svr(data, NuSvrParams(c=5.0, nu=0.5), RbfKernel(gamma=3.0))
print("constant targets: n_support =", model.n_support, "bias =", model.bias,
      "eps =", model.epsilon, "pred =", predict(model, np.array([0.3, 0.3])))

# identical inputs, conflicting targets
xx = np.tile([0.5, 0.5], (6, 1))
tt = np.array([0.0, 1.0, 0.0, 1.0, 0.2, 0.9])
m2 = train_nu_svr(TrainingSet(inputs=xx, targets=tt), NuSvrParams(c=4.0, nu=0.5), RbfKernel(gamma=10.0))
print("degenerate inputs: bias =", m2.bias, "pred =", predict(m2, np.array([0.5, 0.5])))
