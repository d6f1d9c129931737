"""From-scratch nu-support-vector regression.

Training solves the dual quadratic program

    min_{a, a*}  1/2 (a - a*)^T Q (a - a*) - t^T (a - a*)
    s.t.         e^T (a - a*) = 0,
                 e^T (a + a*) <= C * nu,
                 0 <= a_i, a_i* <= C / N,

where ``Q`` is the kernel Gram matrix of the training inputs and ``t`` the
target vector.  The regression function is the dual expansion

    f(x) = sum_i beta_i K(x_i, x) + b,      beta = a - a*.

The solver is a sequential two-variable working-set method: the inequality is
tightened to the pair of equalities ``e^T a = e^T a* = C*nu/2`` (an optimum
with that property always exists, because raising ``a_i`` and ``a_i*``
together changes neither ``beta`` nor the objective), which decouples the
feasible set into one sum constraint per dual group.  Every step picks the
maximal violating pair inside one group and solves the two-variable
subproblem exactly, so both equalities and the box are preserved throughout.

``brute_force_qp_oracle`` re-solves the same program with an accelerated
projected-gradient method plus an active-set polish, and certifies its answer
with a fixed-point residual under projection onto the *original*
inequality-form feasible set.  It shares nothing with the working-set path
except the kernel evaluation, which makes it an independent cross-check.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

try:  # optional speedup; the numpy path below computes identical results
    import numba as _numba
except ImportError:  # pragma: no cover
    _numba = None

from .errors import (
    GridShapeError,
    NonConvergenceError,
    OracleSizeError,
    ParameterDomainError,
)

__all__ = [
    "RbfKernel",
    "PolynomialKernel",
    "LinearKernel",
    "KernelSpec",
    "kernel_eval",
    "kernel_matrix",
    "TrainingSet",
    "NuSvrParams",
    "DualSolution",
    "SvrModel",
    "train_nu_svr",
    "solve_dual",
    "predict",
    "dual_objective",
    "kkt_violation",
    "brute_force_qp_oracle",
    "OracleSolution",
    "save_model",
    "load_model",
    "model_to_json",
    "model_from_json",
]

# Curvature floor for the two-variable subproblem, as in standard SMO codes.
_TAU = 1e-12

# Full Gram matrices are precomputed up to this many rows; beyond it the
# solver streams rows through a bounded cache instead.
GRAM_PRECOMPUTE_LIMIT = 10_000

# Periodic full recomputation of the working gradient kills the slow drift
# that incremental rank-two updates accumulate over very long runs.
_GRADIENT_REFRESH_EVERY = 100_000


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RbfKernel:
    """exp(-gamma * ||x - y||^2) with gamma > 0."""

    gamma: float

    def __post_init__(self):
        if not np.isfinite(self.gamma) or self.gamma <= 0:
            raise ParameterDomainError(f"rbf gamma must be finite and > 0, got {self.gamma}")


@dataclass(frozen=True)
class PolynomialKernel:
    """(gamma * <x, y> + coef0) ** degree with integer degree >= 1, gamma > 0."""

    degree: int
    gamma: float
    coef0: float = 0.0

    def __post_init__(self):
        if int(self.degree) != self.degree or self.degree < 1:
            raise ParameterDomainError(f"polynomial degree must be an integer >= 1, got {self.degree}")
        if not np.isfinite(self.gamma) or self.gamma <= 0:
            raise ParameterDomainError(f"polynomial gamma must be finite and > 0, got {self.gamma}")
        if not np.isfinite(self.coef0):
            raise ParameterDomainError("polynomial coef0 must be finite")


@dataclass(frozen=True)
class LinearKernel:
    """Plain dot product."""


KernelSpec = RbfKernel | PolynomialKernel | LinearKernel


def _as_2d(x: np.ndarray, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise GridShapeError(f"{name} must be a vector or matrix, got ndim={arr.ndim}")
    return arr


def kernel_matrix(kernel: KernelSpec, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Pairwise kernel values, shape (len(x), len(y))."""
    xm = _as_2d(x, "x")
    ym = _as_2d(y, "y")
    if xm.shape[1] != ym.shape[1]:
        raise GridShapeError(f"dimension mismatch: {xm.shape[1]} vs {ym.shape[1]}")
    if isinstance(kernel, RbfKernel):
        sq = (
            np.sum(xm * xm, axis=1)[:, None]
            + np.sum(ym * ym, axis=1)[None, :]
            - 2.0 * (xm @ ym.T)
        )
        np.maximum(sq, 0.0, out=sq)
        return np.exp(-kernel.gamma * sq)
    if isinstance(kernel, PolynomialKernel):
        return (kernel.gamma * (xm @ ym.T) + kernel.coef0) ** kernel.degree
    if isinstance(kernel, LinearKernel):
        return xm @ ym.T
    raise TypeError(f"unknown kernel {kernel!r}")


def kernel_eval(kernel: KernelSpec, x: np.ndarray, y: np.ndarray) -> float:
    """Single kernel value K(x, y); symmetric in its vector arguments."""
    xv = np.asarray(x, dtype=float)
    yv = np.asarray(y, dtype=float)
    if xv.ndim != 1 or yv.ndim != 1:
        raise GridShapeError("kernel_eval expects 1-D vectors")
    if xv.shape != yv.shape:
        raise GridShapeError(f"dimension mismatch: {xv.shape} vs {yv.shape}")
    if isinstance(kernel, RbfKernel):
        d = xv - yv
        return float(np.exp(-kernel.gamma * float(d @ d)))
    if isinstance(kernel, PolynomialKernel):
        return float((kernel.gamma * float(xv @ yv) + kernel.coef0) ** kernel.degree)
    if isinstance(kernel, LinearKernel):
        return float(xv @ yv)
    raise TypeError(f"unknown kernel {kernel!r}")


# ---------------------------------------------------------------------------
# Problem data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrainingSet:
    """Supervised pairs: ``inputs`` is (N, n), ``targets`` is (N,)."""

    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        inputs = np.ascontiguousarray(np.asarray(self.inputs, dtype=float))
        targets = np.ascontiguousarray(np.asarray(self.targets, dtype=float))
        if inputs.ndim != 2:
            raise GridShapeError(f"inputs must be 2-D (N, n), got ndim={inputs.ndim}")
        if targets.ndim != 1:
            raise GridShapeError(f"targets must be 1-D, got ndim={targets.ndim}")
        if inputs.shape[0] != targets.shape[0]:
            raise GridShapeError(
                f"inputs/targets row mismatch: {inputs.shape[0]} vs {targets.shape[0]}"
            )
        if inputs.shape[0] < 2:
            raise ParameterDomainError("training set needs at least 2 rows")
        if not np.all(np.isfinite(inputs)) or not np.all(np.isfinite(targets)):
            raise ParameterDomainError("training data must be finite")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)

    @property
    def n_samples(self) -> int:
        return self.inputs.shape[0]

    @property
    def n_features(self) -> int:
        return self.inputs.shape[1]


@dataclass(frozen=True)
class NuSvrParams:
    """Hyperparameters of the dual program.

    ``nu`` is restricted to (0, 1]: at nu = 0 the tube constraint vanishes
    and the program degenerates, so zero is excluded by construction.
    """

    c: float
    nu: float
    kkt_tolerance: float = 1e-6
    max_iterations: int = 10_000_000

    def __post_init__(self):
        if not np.isfinite(self.c) or self.c <= 0:
            raise ParameterDomainError(f"c must be finite and > 0, got {self.c}")
        if not np.isfinite(self.nu) or not 0 < self.nu <= 1:
            raise ParameterDomainError(f"nu must lie in (0, 1], got {self.nu}")
        if not np.isfinite(self.kkt_tolerance) or self.kkt_tolerance <= 0:
            raise ParameterDomainError("kkt_tolerance must be > 0")
        if self.max_iterations < 1:
            raise ParameterDomainError("max_iterations must be >= 1")


@dataclass(frozen=True)
class DualSolution:
    """A feasible point (a, a*) of the dual program."""

    alpha: np.ndarray
    alpha_star: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float)
        s = np.asarray(self.alpha_star, dtype=float)
        if a.shape != s.shape or a.ndim != 1:
            raise GridShapeError("alpha and alpha_star must be 1-D with equal length")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "alpha_star", s)

    @property
    def beta(self) -> np.ndarray:
        """Coefficient differences a - a*."""
        return self.alpha - self.alpha_star


# ---------------------------------------------------------------------------
# Gram access
# ---------------------------------------------------------------------------


class _GramProvider:
    """Row access to the Gram matrix: dense below the precompute limit,
    bounded row cache above it.  Both modes return identical rows."""

    def __init__(self, kernel: KernelSpec, inputs: np.ndarray, limit: int = GRAM_PRECOMPUTE_LIMIT):
        self._kernel = kernel
        self._inputs = inputs
        n = inputs.shape[0]
        self._dense: np.ndarray | None = None
        self._cache: dict[int, np.ndarray] = {}
        self._cache_order: list[int] = []
        self._cache_cap = 1024
        if n <= limit:
            self._dense = kernel_matrix(kernel, inputs, inputs)
        self.diag = (
            self._dense.diagonal().copy()
            if self._dense is not None
            else np.array([kernel_eval(kernel, row, row) for row in inputs])
        )

    @property
    def dense(self) -> np.ndarray | None:
        return self._dense

    def row(self, i: int) -> np.ndarray:
        if self._dense is not None:
            return self._dense[i]
        hit = self._cache.get(i)
        if hit is not None:
            return hit
        row = kernel_matrix(self._kernel, self._inputs[i], self._inputs)[0]
        self._cache[i] = row
        self._cache_order.append(i)
        if len(self._cache_order) > self._cache_cap:
            evict = self._cache_order.pop(0)
            self._cache.pop(evict, None)
        return row

    def matvec(self, v: np.ndarray) -> np.ndarray:
        if self._dense is not None:
            return self._dense @ v
        out = np.zeros_like(v)
        nz = np.nonzero(v)[0]
        for i in nz:
            out += v[i] * self.row(i)
        return out


# ---------------------------------------------------------------------------
# Working-set solver
# ---------------------------------------------------------------------------


def _initial_duals(n: int, box: float, group_sum: float) -> np.ndarray:
    """Greedy fill: both groups start identical, so beta = 0."""
    a = np.zeros(n)
    remaining = group_sum
    for i in range(n):
        if remaining <= 0.0:
            break
        v = min(remaining, box)
        a[i] = v
        remaining -= v
    return a


def _group_violation(g: np.ndarray, lo_mask: np.ndarray, up_mask: np.ndarray) -> tuple[float, int, int]:
    """Maximal violating pair for one dual group.

    ``up_mask`` marks coordinates with room to grow, ``lo_mask`` those with
    room to shrink.  Returns (violation, grow_index, shrink_index) where the
    violation is g[shrink] - g[grow]; non-positive means the group is
    KKT-consistent.  First occurrence wins ties, so selection is
    deterministic.
    """
    if not up_mask.any() or not lo_mask.any():
        return -np.inf, -1, -1
    grow = int(np.argmin(np.where(up_mask, g, np.inf)))
    shrink = int(np.argmax(np.where(lo_mask, g, -np.inf)))
    return float(g[shrink] - g[grow]), grow, shrink


def _smo_loop(
    gram: _GramProvider,
    t: np.ndarray,
    box: float,
    tol: float,
    max_iter: int,
    alpha: np.ndarray,
    alpha_star: np.ndarray,
    objective_trace: list[float] | None = None,
) -> tuple[np.ndarray, int, float]:
    """Run working-set steps until the maximal violation drops to ``tol``.

    Mutates ``alpha``/``alpha_star`` in place and returns the final gradient
    g = Q beta - t, the iteration count and the final violation.
    """
    g = gram.matvec(alpha - alpha_star) - t
    it = 0
    while True:
        viol_a, grow_a, shrink_a = _group_violation(g, alpha > 0.0, alpha < box)
        # In the a* group the objective gradient is -g, which flips the roles
        # of small and large g values.
        viol_s, grow_s, shrink_s = _group_violation(-g, alpha_star > 0.0, alpha_star < box)
        violation = max(viol_a, viol_s)
        if violation <= tol:
            return g, it, max(violation, 0.0)
        if it >= max_iter:
            raise NonConvergenceError(
                f"working-set solver not converged after {it} iterations "
                f"(violation {violation:.3e} > tolerance {tol:.3e})",
                kkt_violation=violation,
                iterations=it,
            )
        if viol_a >= viol_s:
            i, j, sign = grow_a, shrink_a, 1.0
            vec = alpha
        else:
            i, j, sign = grow_s, shrink_s, -1.0
            vec = alpha_star
        qi = gram.row(i)
        qj = gram.row(j)
        denom = max(gram.diag[i] + gram.diag[j] - 2.0 * qi[j], _TAU)
        # Directional derivative along (+e_i, -e_j) within the group is
        # sign*(g_i - g_j); the unconstrained optimum is its negative over
        # the curvature.
        lam_star = sign * (g[j] - g[i]) / denom
        room_up = box - vec[i]
        room_down = vec[j]
        lam = min(lam_star, room_up, room_down)
        if lam == room_up:
            vec[i] = box
        else:
            vec[i] += lam
        if lam == room_down:
            vec[j] = 0.0
        else:
            vec[j] -= lam
        g += (sign * lam) * (qi - qj)
        it += 1
        if it % _GRADIENT_REFRESH_EVERY == 0:
            g = gram.matvec(alpha - alpha_star) - t
        if objective_trace is not None:
            beta = alpha - alpha_star
            objective_trace.append(0.5 * float(beta @ g) - 0.5 * float(beta @ t))


def _smo_steps_dense(q, diag, t, box, tol, max_iter, refresh_every, alpha, alpha_star, g):
    """Explicit-loop twin of ``_smo_loop`` over a dense Gram matrix.

    Selection scans use strict comparisons, so the first extremum wins ties
    exactly as ``np.argmin``/``np.argmax`` do in the vectorized path.
    Returns (converged, iterations, violation); mutates its array arguments.
    """
    n = t.shape[0]
    it = 0
    while True:
        grow_a = -1
        grow_a_val = np.inf
        shrink_a = -1
        shrink_a_val = -np.inf
        grow_s = -1
        grow_s_val = -np.inf
        shrink_s = -1
        shrink_s_val = np.inf
        for k in range(n):
            gk = g[k]
            if alpha[k] < box and gk < grow_a_val:
                grow_a_val = gk
                grow_a = k
            if alpha[k] > 0.0 and gk > shrink_a_val:
                shrink_a_val = gk
                shrink_a = k
            if alpha_star[k] < box and gk > grow_s_val:
                grow_s_val = gk
                grow_s = k
            if alpha_star[k] > 0.0 and gk < shrink_s_val:
                shrink_s_val = gk
                shrink_s = k
        viol_a = shrink_a_val - grow_a_val if (grow_a >= 0 and shrink_a >= 0) else -np.inf
        viol_s = grow_s_val - shrink_s_val if (grow_s >= 0 and shrink_s >= 0) else -np.inf
        violation = viol_a if viol_a >= viol_s else viol_s
        if violation <= tol:
            return True, it, max(violation, 0.0)
        if it >= max_iter:
            return False, it, violation
        if viol_a >= viol_s:
            i, j, sign = grow_a, shrink_a, 1.0
            vec = alpha
        else:
            i, j, sign = grow_s, shrink_s, -1.0
            vec = alpha_star
        denom = max(diag[i] + diag[j] - 2.0 * q[i, j], _TAU)
        lam_star = sign * (g[j] - g[i]) / denom
        room_up = box - vec[i]
        room_down = vec[j]
        lam = min(lam_star, room_up, room_down)
        if lam == room_up:
            vec[i] = box
        else:
            vec[i] += lam
        if lam == room_down:
            vec[j] = 0.0
        else:
            vec[j] -= lam
        sl = sign * lam
        for k in range(n):
            g[k] += sl * (q[i, k] - q[j, k])
        it += 1
        if it % refresh_every == 0:
            g[:] = np.dot(q, alpha - alpha_star) - t


_smo_steps_dense_jit = (
    _numba.njit(cache=True)(_smo_steps_dense) if _numba is not None else None
)


@dataclass(frozen=True)
class DualResult:
    """Converged dual state plus solver diagnostics."""

    duals: DualSolution
    gradient: np.ndarray
    objective: float
    iterations: int
    kkt_violation: float
    objective_trace: tuple[float, ...] = ()


def dual_objective(data: TrainingSet, kernel: KernelSpec, duals: DualSolution) -> float:
    """1/2 beta^T Q beta - t^T beta for beta = alpha - alpha_star."""
    beta = duals.beta
    q = kernel_matrix(kernel, data.inputs, data.inputs)
    return 0.5 * float(beta @ (q @ beta)) - float(data.targets @ beta)


def solve_dual(
    data: TrainingSet,
    params: NuSvrParams,
    kernel: KernelSpec,
    collect_objective_trace: bool = False,
) -> DualResult:
    """Solve the dual program and return the full dual state."""
    n = data.n_samples
    box = params.c / n
    group_sum = params.c * params.nu / 2.0
    alpha = _initial_duals(n, box, group_sum)
    alpha_star = alpha.copy()
    gram = _GramProvider(kernel, data.inputs)
    trace: list[float] | None = [] if collect_objective_trace else None
    if _smo_steps_dense_jit is not None and gram.dense is not None and trace is None:
        g = gram.matvec(alpha - alpha_star) - data.targets
        converged, iterations, violation = _smo_steps_dense_jit(
            gram.dense, gram.diag, data.targets, box, params.kkt_tolerance,
            params.max_iterations, _GRADIENT_REFRESH_EVERY, alpha, alpha_star, g,
        )
        if not converged:
            raise NonConvergenceError(
                f"working-set solver not converged after {iterations} iterations "
                f"(violation {violation:.3e} > tolerance {params.kkt_tolerance:.3e})",
                kkt_violation=violation,
                iterations=iterations,
            )
        violation = max(violation, 0.0)
    else:
        g, iterations, violation = _smo_loop(
            gram, data.targets, box, params.kkt_tolerance, params.max_iterations,
            alpha, alpha_star, trace,
        )
    beta = alpha - alpha_star
    objective = 0.5 * float(beta @ g) - 0.5 * float(beta @ data.targets)
    return DualResult(
        duals=DualSolution(alpha=alpha, alpha_star=alpha_star),
        gradient=g,
        objective=objective,
        iterations=iterations,
        kkt_violation=violation,
        objective_trace=tuple(trace) if trace is not None else (),
    )


def kkt_violation(
    data: TrainingSet,
    params: NuSvrParams,
    kernel: KernelSpec,
    duals: DualSolution,
) -> float:
    """Maximal optimality violation of a feasible dual point.

    Scans every two-variable move that keeps the point feasible: the two
    within-group pair moves, the grow-both cross move (feasible while the
    tube-mass inequality is slack) and the shrink-both cross move.  The
    result is the steepest feasible descent rate, clipped at zero, so it
    vanishes exactly at the optimum.
    """
    n = data.n_samples
    box = params.c / n
    a, s = duals.alpha, duals.alpha_star
    if a.shape[0] != n:
        raise GridShapeError("dual size does not match the training set")
    slack = 1e-12 * max(box, 1.0)
    if (a < -slack).any() or (a > box + slack).any() or (s < -slack).any() or (s > box + slack).any():
        raise ParameterDomainError("duals violate the box constraints")
    if abs(float(np.sum(duals.beta))) > 1e-9 * max(params.c, 1.0):
        raise ParameterDomainError("duals violate the coefficient-sum equality")
    total = float(np.sum(a + s))
    if total > params.c * params.nu + 1e-9 * max(params.c, 1.0):
        raise ParameterDomainError("duals violate the tube-mass constraint")
    q = kernel_matrix(kernel, data.inputs, data.inputs)
    g = q @ duals.beta - data.targets

    def masked_min(mask):
        return float(np.min(g[mask])) if mask.any() else np.inf

    def masked_max(mask):
        return float(np.max(g[mask])) if mask.any() else -np.inf

    viol_a = masked_max(a > 0.0) - masked_min(a < box)
    viol_s = masked_max(s < box) - masked_min(s > 0.0)
    viol_shrink = masked_max(a > 0.0) - masked_min(s > 0.0)
    candidates = [viol_a, viol_s, viol_shrink]
    if total < params.c * params.nu - 1e-9 * max(params.c, 1.0):
        candidates.append(masked_max(s < box) - masked_min(a < box))
    finite = [v for v in candidates if np.isfinite(v)]
    return max(max(finite, default=0.0), 0.0)


# ---------------------------------------------------------------------------
# Bias / tube recovery and the trained model
# ---------------------------------------------------------------------------


def _interval_mid(lo: float, hi: float) -> float:
    if np.isinf(lo) and np.isinf(hi):
        raise ParameterDomainError("cannot recover bias: both interval ends unbounded")
    if np.isinf(lo):
        return hi
    if np.isinf(hi):
        return lo
    return 0.5 * (lo + hi)


def _recover_bias_epsilon(
    g: np.ndarray, alpha: np.ndarray, alpha_star: np.ndarray, box: float
) -> tuple[float, float]:
    """KKT-based recovery of the bias b and the fitted tube half-width.

    For strictly interior a_i the stationarity condition pins b + eps = -g_i;
    for interior a_i* it pins b - eps = -g_i.  Interior values are averaged;
    groups with no interior point fall back to the midpoint of the
    KKT-feasible interval.
    """
    eps_bound = 1e-10 * max(box, 1.0)
    free_a = (alpha > eps_bound) & (alpha < box - eps_bound)
    free_s = (alpha_star > eps_bound) & (alpha_star < box - eps_bound)
    if free_a.any():
        b_plus_eps = float(np.mean(-g[free_a]))
    else:
        at_up = alpha >= box - eps_bound
        at_lo = alpha <= eps_bound
        # rho_a in [max g over upper-bound points, min g over lower-bound
        # points]; b + eps = -rho_a.
        hi = float(np.min(g[at_lo])) if at_lo.any() else np.inf
        lo = float(np.max(g[at_up])) if at_up.any() else -np.inf
        b_plus_eps = -_interval_mid(lo, hi)
    if free_s.any():
        b_minus_eps = float(np.mean(-g[free_s]))
    else:
        at_up = alpha_star >= box - eps_bound
        at_lo = alpha_star <= eps_bound
        h = -g
        hi = float(np.min(h[at_lo])) if at_lo.any() else np.inf
        lo = float(np.max(h[at_up])) if at_up.any() else -np.inf
        b_minus_eps = _interval_mid(lo, hi)
    bias = 0.5 * (b_plus_eps + b_minus_eps)
    epsilon = max(0.5 * (b_plus_eps - b_minus_eps), 0.0)
    return bias, epsilon


@dataclass(frozen=True)
class SvrModel:
    """Trained regressor: support inputs, coefficient differences, bias,
    fitted tube half-width, the kernel, and (optionally) the scaler the
    training pipeline fitted alongside it."""

    support_inputs: np.ndarray
    dual_coefs: np.ndarray
    bias: float
    epsilon: float
    kernel: KernelSpec
    scaler: "object | None" = None

    def __post_init__(self):
        sv = np.asarray(self.support_inputs, dtype=float)
        coefs = np.asarray(self.dual_coefs, dtype=float)
        if sv.ndim != 2:
            raise GridShapeError("support_inputs must be 2-D")
        if coefs.ndim != 1 or coefs.shape[0] != sv.shape[0]:
            raise GridShapeError("dual_coefs must be 1-D and match support_inputs rows")
        if not np.all(np.isfinite(sv)) or not np.all(np.isfinite(coefs)):
            raise ParameterDomainError("model arrays must be finite")
        if not np.isfinite(self.bias):
            raise ParameterDomainError("bias must be finite")
        if not np.isfinite(self.epsilon) or self.epsilon < 0:
            raise ParameterDomainError("epsilon must be finite and >= 0")
        object.__setattr__(self, "support_inputs", sv)
        object.__setattr__(self, "dual_coefs", coefs)

    @property
    def n_support(self) -> int:
        return self.support_inputs.shape[0]


def train_nu_svr(
    data: TrainingSet,
    params: NuSvrParams,
    kernel: KernelSpec,
    scaler: "object | None" = None,
    return_diagnostics: bool = False,
) -> SvrModel | tuple[SvrModel, DualResult]:
    """Train and return the model with zero-coefficient points pruned.

    With ``return_diagnostics`` the converged dual state rides along.
    """
    result = solve_dual(data, params, kernel)
    beta = result.duals.beta
    box = params.c / data.n_samples
    slack = 1e-9 * max(box, 1.0)
    total = float(np.sum(result.duals.alpha + result.duals.alpha_star))
    if abs(float(np.sum(beta))) > slack * data.n_samples:
        raise NonConvergenceError(
            "dual equality drifted beyond round-off", kkt_violation=result.kkt_violation,
            iterations=result.iterations,
        )
    if total > params.c * params.nu + params.kkt_tolerance + slack:
        raise NonConvergenceError(
            "tube-mass constraint violated after convergence",
            kkt_violation=result.kkt_violation, iterations=result.iterations,
        )
    bias, epsilon = _recover_bias_epsilon(
        result.gradient, result.duals.alpha, result.duals.alpha_star, box
    )
    keep = beta != 0.0
    model = SvrModel(
        support_inputs=data.inputs[keep],
        dual_coefs=beta[keep],
        bias=bias,
        epsilon=epsilon,
        kernel=kernel,
        scaler=scaler,
    )
    return (model, result) if return_diagnostics else model


def predict(model: SvrModel, x: np.ndarray) -> float | np.ndarray:
    """Evaluate the dual expansion at one point (1-D) or many (2-D)."""
    xv = np.asarray(x, dtype=float)
    single = xv.ndim == 1
    xm = _as_2d(xv, "x")
    if model.n_support and xm.shape[1] != model.support_inputs.shape[1]:
        raise GridShapeError(
            f"input dimension {xm.shape[1]} does not match support vectors "
            f"({model.support_inputs.shape[1]})"
        )
    if model.n_support == 0:
        out = np.full(xm.shape[0], model.bias)
    else:
        out = kernel_matrix(model.kernel, xm, model.support_inputs) @ model.dual_coefs + model.bias
    return float(out[0]) if single else out


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------


def _project_box_sum(y: np.ndarray, ub: float, total: float) -> np.ndarray:
    """Euclidean projection onto {0 <= x <= ub, sum x = total}, exact via the
    piecewise-linear breakpoint structure of sum(clip(y - lam, 0, ub))."""
    n = y.shape[0]
    if not 0.0 <= total <= n * ub + 1e-12:
        raise ParameterDomainError("projection target sum infeasible")
    bps = np.sort(np.concatenate([y - ub, y]))
    sums = np.clip(y[None, :] - bps[:, None], 0.0, ub).sum(axis=1)
    # sums is non-increasing along bps; find the segment bracketing `total`.
    k = int(np.searchsorted(-sums, -total, side="left"))
    if k == 0:
        # sums[0] equals n*ub, the largest reachable value, so landing here
        # means every coordinate sits at the upper bound.
        lam = bps[0]
    elif k == len(bps):
        lam = bps[-1]
    else:
        lo, hi = bps[k - 1], bps[k]
        mid = 0.5 * (lo + hi)
        free = (y - ub < mid) & (mid < y)
        n_up = int(np.sum(mid <= y - ub))
        n_free = int(free.sum())
        if n_free == 0:
            lam = hi
        else:
            lam = (n_up * ub + float(y[free].sum()) - total) / n_free
            lam = min(max(lam, lo), hi)
    x = np.clip(y - lam, 0.0, ub)
    # One correction pass distributes residual round-off over free coords.
    resid = total - float(x.sum())
    free = (x > 0.0) & (x < ub)
    if free.any() and resid != 0.0:
        x[free] += resid / int(free.sum())
        np.clip(x, 0.0, ub, out=x)
    return x


def _project_equality_form(theta: np.ndarray, ub: float, group_sum: float) -> np.ndarray:
    """Projection onto {0<=theta<=ub, sum a = sum a* = group_sum}: the two
    halves decouple."""
    n = theta.shape[0] // 2
    out = np.empty_like(theta)
    out[:n] = _project_box_sum(theta[:n], ub, group_sum)
    out[n:] = _project_box_sum(theta[n:], ub, group_sum)
    return out


def _project_inequality_form(theta: np.ndarray, ub: float, cnu: float) -> np.ndarray:
    """Projection onto the original feasible set
    {0 <= theta <= ub, e^T(a - a*) = 0, e^T(a + a*) <= cnu}.

    Dualizes both couplings: x(lam, mu) = clip(y - lam*sgn - mu), where sgn
    is +1 on the a block and -1 on the a* block.  For fixed mu the equality
    multiplier lam is solved by bisection (the block sum difference is
    monotone in lam); the outer complementarity in mu >= 0 is bisected too.
    """
    n = theta.shape[0] // 2
    sgn = np.concatenate([np.ones(n), -np.ones(n)])

    def x_of(lam: float, mu: float) -> np.ndarray:
        return np.clip(theta - lam * sgn - mu, 0.0, ub)

    def solve_lam(mu: float) -> float:
        span = float(np.max(np.abs(theta))) + ub + mu + 1.0
        lo, hi = -span, span
        for _ in range(90):
            mid = 0.5 * (lo + hi)
            x = x_of(mid, mu)
            diff = float(x[:n].sum() - x[n:].sum())
            if diff > 0.0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    lam0 = solve_lam(0.0)
    x0 = x_of(lam0, 0.0)
    if float(x0.sum()) <= cnu + 1e-12:
        return x0
    mu_hi = float(np.max(np.abs(theta))) + ub + 1.0
    lo, hi = 0.0, mu_hi
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        x = x_of(solve_lam(mid), mid)
        if float(x.sum()) > cnu:
            lo = mid
        else:
            hi = mid
    return x_of(solve_lam(hi), hi)


def _oracle_objective(q: np.ndarray, t: np.ndarray, theta: np.ndarray) -> float:
    n = t.shape[0]
    beta = theta[:n] - theta[n:]
    return 0.5 * float(beta @ (q @ beta)) - float(t @ beta)


def _oracle_gradient(q: np.ndarray, t: np.ndarray, theta: np.ndarray) -> np.ndarray:
    n = t.shape[0]
    g = q @ (theta[:n] - theta[n:]) - t
    return np.concatenate([g, -g])


def _active_set_polish(
    q: np.ndarray, t: np.ndarray, theta: np.ndarray, ub: float
) -> np.ndarray:
    """Newton step on the coordinates strictly inside the box, restricted to
    the two group-sum equalities, with a feasibility-preserving line search."""
    n = t.shape[0]
    margin = 1e-11 * max(ub, 1.0)
    free = (theta > margin) & (theta < ub - margin)
    if not free.any():
        return theta
    idx = np.nonzero(free)[0]
    sgn = np.where(idx < n, 1.0, -1.0)
    base = idx % n
    h = (sgn[:, None] * sgn[None, :]) * q[np.ix_(base, base)]
    grad = _oracle_gradient(q, t, theta)[idx]
    rows_a = idx < n
    m = idx.shape[0]
    a_eq = np.zeros((2, m))
    a_eq[0, rows_a] = 1.0
    a_eq[1, ~rows_a] = 1.0
    kkt = np.zeros((m + 2, m + 2))
    kkt[:m, :m] = h
    kkt[:m, m:] = a_eq.T
    kkt[m:, :m] = a_eq
    rhs = np.concatenate([-grad, np.zeros(2)])
    step = np.linalg.lstsq(kkt, rhs, rcond=None)[0][:m]
    if not np.all(np.isfinite(step)):
        return theta
    # Largest tau in (0, 1] that keeps the free block inside the box.
    with np.errstate(divide="ignore", invalid="ignore"):
        up = np.where(step > 0, (ub - theta[idx]) / step, np.inf)
        dn = np.where(step < 0, -theta[idx] / step, np.inf)
    tau = min(1.0, float(np.min(np.minimum(up, dn))))
    if tau <= 0 or not np.isfinite(tau):
        return theta
    trial = theta.copy()
    trial[idx] = np.clip(theta[idx] + tau * step, 0.0, ub)
    if _oracle_objective(q, t, trial) < _oracle_objective(q, t, theta):
        return trial
    return theta


@dataclass(frozen=True)
class OracleSolution:
    """Independent dual solution with its optimality certificate."""

    duals: DualSolution
    objective: float
    certificate_residual: float
    restart_spread: float


def brute_force_qp_oracle(
    data: TrainingSet,
    params: NuSvrParams,
    kernel: KernelSpec,
    seed: int = 0,
    restarts: int = 2,
    max_iterations: int = 60_000,
) -> OracleSolution:
    """Dense projected-gradient reference solver for desk-scale instances.

    Refuses N > 30.  Runs ``restarts`` accelerated projected-gradient passes
    from independent random feasible points (with periodic active-set
    polish), demands that the converged objectives agree to 1e-8, and
    certifies the winner by its fixed-point residual under projection onto
    the inequality-form feasible set.
    """
    n = data.n_samples
    if n > 30:
        raise OracleSizeError(f"oracle accepts at most 30 samples, got {n}")
    q = kernel_matrix(kernel, data.inputs, data.inputs)
    t = data.targets
    ub = params.c / n
    group_sum = params.c * params.nu / 2.0
    lip = 2.0 * float(np.linalg.eigvalsh(q)[-1])
    step = 1.0 / max(lip, _TAU)
    rng = np.random.default_rng(seed)

    scale = max(ub, 1.0)
    best: list[tuple[float, np.ndarray]] = []
    for _ in range(max(restarts, 1)):
        theta = _project_equality_form(rng.uniform(0.0, ub, size=2 * n), ub, group_sum)
        z = theta.copy()
        momentum = 1.0
        f_prev = _oracle_objective(q, t, theta)
        for it in range(max_iterations):
            theta_new = _project_equality_form(z - step * _oracle_gradient(q, t, z), ub, group_sum)
            momentum_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * momentum * momentum))
            z = theta_new + ((momentum - 1.0) / momentum_new) * (theta_new - theta)
            f_new = _oracle_objective(q, t, theta_new)
            if f_new > f_prev:  # function restart
                z = theta_new.copy()
                momentum_new = 1.0
            theta, momentum = theta_new, momentum_new
            if it % 64 == 63:
                polished = _active_set_polish(q, t, theta, ub)
                if _oracle_objective(q, t, polished) < f_new:
                    theta = _project_equality_form(polished, ub, group_sum)
                    z = theta.copy()
                    momentum = 1.0
                    f_new = _oracle_objective(q, t, theta)
                fixed_pt = _project_equality_form(
                    theta - step * _oracle_gradient(q, t, theta), ub, group_sum
                )
                if float(np.max(np.abs(theta - fixed_pt))) <= 1e-13 * scale:
                    break
            f_prev = f_new
        theta = _project_equality_form(_active_set_polish(q, t, theta, ub), ub, group_sum)
        best.append((_oracle_objective(q, t, theta), theta))

    best.sort(key=lambda pair: pair[0])
    f_best, theta_best = best[0]
    spread = abs(best[-1][0] - f_best)
    if spread > 1e-8 * (1.0 + abs(f_best)):
        raise NonConvergenceError(
            f"oracle restarts disagree by {spread:.3e}",
            kkt_violation=spread, iterations=max_iterations,
        )
    fixed = _project_inequality_form(
        theta_best - step * _oracle_gradient(q, t, theta_best), ub, params.c * params.nu
    )
    residual = float(np.max(np.abs(theta_best - fixed)))
    return OracleSolution(
        duals=DualSolution(alpha=theta_best[:n], alpha_star=theta_best[n:]),
        objective=f_best,
        certificate_residual=residual,
        restart_spread=spread,
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

_FORMAT_VERSION = 1


def _hex_list(values: np.ndarray) -> list:
    if values.ndim == 1:
        return [float(v).hex() for v in values]
    return [_hex_list(row) for row in values]


def _kernel_to_dict(kernel: KernelSpec) -> dict:
    if isinstance(kernel, RbfKernel):
        return {"type": "rbf", "gamma": float(kernel.gamma).hex()}
    if isinstance(kernel, PolynomialKernel):
        return {
            "type": "polynomial",
            "degree": int(kernel.degree),
            "gamma": float(kernel.gamma).hex(),
            "coef0": float(kernel.coef0).hex(),
        }
    if isinstance(kernel, LinearKernel):
        return {"type": "linear"}
    raise TypeError(f"unknown kernel {kernel!r}")


def _kernel_from_dict(spec: dict) -> KernelSpec:
    kind = spec.get("type")
    if kind == "rbf":
        return RbfKernel(gamma=float.fromhex(spec["gamma"]))
    if kind == "polynomial":
        return PolynomialKernel(
            degree=int(spec["degree"]),
            gamma=float.fromhex(spec["gamma"]),
            coef0=float.fromhex(spec["coef0"]),
        )
    if kind == "linear":
        return LinearKernel()
    raise ParameterDomainError(f"unknown kernel type {kind!r}")


def model_to_json(model: SvrModel) -> str:
    """Lossless JSON encoding; doubles ride as hex-float strings."""
    scaler_dict = None
    if model.scaler is not None:
        to_dict = getattr(model.scaler, "to_json_dict", None)
        if to_dict is None:
            raise TypeError("scaler object does not support JSON export")
        scaler_dict = to_dict()
    doc = {
        "format_version": _FORMAT_VERSION,
        "kernel": _kernel_to_dict(model.kernel),
        "support_inputs": _hex_list(model.support_inputs),
        "dual_coefs": _hex_list(model.dual_coefs),
        "bias": float(model.bias).hex(),
        "epsilon": float(model.epsilon).hex(),
        "scaler": scaler_dict,
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def model_from_json(text: str) -> SvrModel:
    doc = json.loads(text)
    version = doc.get("format_version")
    if version != _FORMAT_VERSION:
        raise ParameterDomainError(f"unsupported model format version {version!r}")
    support = doc["support_inputs"]
    n_sv = len(support)
    width = len(support[0]) if n_sv else 0
    sv = np.array(
        [[float.fromhex(v) for v in row] for row in support], dtype=float
    ).reshape(n_sv, width)
    scaler = None
    if doc.get("scaler") is not None:
        from .pipeline import Scaler

        scaler = Scaler.from_json_dict(doc["scaler"])
    return SvrModel(
        support_inputs=sv,
        dual_coefs=np.array([float.fromhex(v) for v in doc["dual_coefs"]], dtype=float),
        bias=float.fromhex(doc["bias"]),
        epsilon=float.fromhex(doc["epsilon"]),
        kernel=_kernel_from_dict(doc["kernel"]),
        scaler=scaler,
    )


def save_model(model: SvrModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(model_to_json(model))
        fh.write("\n")


def load_model(path) -> SvrModel:
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_json(fh.read())
