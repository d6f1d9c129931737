"""Error metrics, the month-by-scenario experiment driver, and grid search.

The experiment driver mirrors the reporting protocol of the demand study it
desk-scales: for every (month, scenario) cell it assembles the supervised
dataset, trains one nu-SVR with a single shared hyperparameter triple, and
reports MSE and MAPE.  Metrics are computed in scaled [0, 1] target space
(where MSE magnitudes around 1e-8..1e-6 are meaningful) and also in kW for
interpretability.

MAPE policy: the bare ``mape`` function raises on any zero target because the
division is undefined.  Min-max scaling maps the smallest target of a cell to
exactly 0, so the driver explicitly drops zero-scaled-target rows from its
MAPE (never from MSE) and records how many were dropped.  Unscaled kW targets
of the synthetic profiles are strictly positive, so ``mape_percent`` sees
every row.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import GridShapeError, NonConvergenceError, ParameterDomainError, ZeroTargetError
from .pipeline import (
    LoadProfile,
    Scenario,
    ScenarioKind,
    SupervisedDataset,
    assemble_dataset,
)
from .svr import (
    KernelSpec,
    LinearKernel,
    NuSvrParams,
    PolynomialKernel,
    RbfKernel,
    SvrModel,
    TrainingSet,
    predict,
    train_nu_svr,
)

__all__ = [
    "mse",
    "mape",
    "EvalCell",
    "EvalSummary",
    "EvalReport",
    "ExperimentCellError",
    "run_table_experiment",
    "GridSearchSpec",
    "GridTraceEntry",
    "GridSearchResult",
    "ExperimentContext",
    "grid_search",
    "export_report_csv",
    "export_grid_trace_csv",
]


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


def _paired(targets, predictions) -> tuple[np.ndarray, np.ndarray]:
    t = np.asarray(targets, dtype=float)
    f = np.asarray(predictions, dtype=float)
    if t.ndim != 1 or f.ndim != 1 or t.shape != f.shape:
        raise GridShapeError(f"need equal-length vectors, got {t.shape} and {f.shape}")
    if t.shape[0] < 1:
        raise GridShapeError("need at least one element")
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(f))):
        raise ParameterDomainError("metric inputs must be finite")
    return t, f


def mse(targets, predictions) -> float:
    """Mean squared error (1/N) sum (t_i - f_i)^2."""
    t, f = _paired(targets, predictions)
    d = t - f
    return float(np.mean(d * d))


def mape(targets, predictions, mode: str = "percent") -> float:
    """Mean absolute percentage error.

    ``percent`` mode carries the conventional factor 100; ``fraction`` mode
    is percent/100.  Any zero target raises ``ZeroTargetError``: callers that
    want to skip zeros must filter explicitly.
    """
    if mode not in ("percent", "fraction"):
        raise ParameterDomainError(f"mode must be percent|fraction, got {mode!r}")
    t, f = _paired(targets, predictions)
    if np.any(t == 0.0):
        raise ZeroTargetError("mape undefined: at least one target is exactly zero")
    total = float(np.sum(np.abs((t - f) / t)))
    n = t.shape[0]
    return (100.0 / n) * total if mode == "percent" else total / n


# ---------------------------------------------------------------------------
# The month-by-scenario experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EvalCell:
    """Metrics of one (month, scenario) table cell."""

    month: int
    scenario: ScenarioKind
    mse_scaled: float
    mape_fraction: float
    mse_kw2: float
    mape_percent: float
    n_points: int
    n_mape_dropped: int
    iterations: int

    def __post_init__(self):
        if self.mse_scaled < 0 or self.mape_fraction < 0 or self.mse_kw2 < 0 or self.mape_percent < 0:
            raise ParameterDomainError("metrics must be non-negative")
        if self.n_points < 1:
            raise ParameterDomainError("n_points must be >= 1")


@dataclass(frozen=True)
class EvalSummary:
    """Worst (largest) value of each metric over all cells."""

    max_mse_scaled: float
    max_mape_fraction: float
    max_mse_kw2: float
    max_mape_percent: float


@dataclass(frozen=True)
class EvalReport:
    rows: tuple[EvalCell, ...]

    @property
    def summary(self) -> EvalSummary:
        return EvalSummary(
            max_mse_scaled=max(r.mse_scaled for r in self.rows),
            max_mape_fraction=max(r.mape_fraction for r in self.rows),
            max_mse_kw2=max(r.mse_kw2 for r in self.rows),
            max_mape_percent=max(r.mape_percent for r in self.rows),
        )


class ExperimentCellError(RuntimeError):
    """Training failed inside one table cell."""

    def __init__(self, month: int, scenario: ScenarioKind, cause: Exception):
        super().__init__(f"cell (month={month}, scenario={scenario.value}) failed: {cause}")
        self.month = month
        self.scenario = scenario
        self.cause = cause


def _filtered_mape(targets: np.ndarray, predictions: np.ndarray, mode: str) -> tuple[float, int]:
    keep = targets != 0.0
    dropped = int(targets.shape[0] - keep.sum())
    if not keep.any():
        raise ZeroTargetError("all targets are zero; mape undefined")
    return mape(targets[keep], predictions[keep], mode=mode), dropped


def _evaluate_cell(
    month: int,
    profile: LoadProfile,
    scenario: Scenario,
    params: NuSvrParams,
    kernel: KernelSpec,
    holdout_days: int,
) -> tuple[EvalCell, SvrModel]:
    if holdout_days > 0:
        if holdout_days >= profile.n_days:
            raise ParameterDomainError(
                f"holdout_days={holdout_days} must leave at least one training day"
            )
        train_profile = profile.slice_days(0, profile.n_days - holdout_days)
        eval_profile = profile.slice_days(profile.n_days - holdout_days, profile.n_days)
    else:
        train_profile = profile
        eval_profile = profile

    train_ds = assemble_dataset(train_profile, scenario)
    try:
        model, diagnostics = train_nu_svr(
            TrainingSet(train_ds.features, train_ds.targets), params, kernel,
            scaler=train_ds.scaler, return_diagnostics=True,
        )
    except NonConvergenceError as exc:
        raise ExperimentCellError(month, scenario.kind, exc) from exc

    if holdout_days > 0:
        eval_ds = assemble_dataset(eval_profile, scenario)
        eval_features = train_ds.scaler.transform_features(eval_ds.features_raw)
        eval_targets = train_ds.scaler.transform_targets(eval_ds.target_kw)
        eval_kw = eval_ds.target_kw
    else:
        eval_features = train_ds.features
        eval_targets = train_ds.targets
        eval_kw = train_ds.target_kw

    preds_scaled = np.asarray(predict(model, eval_features), dtype=float)
    preds_kw = train_ds.scaler.inverse_targets(preds_scaled)
    mape_frac, dropped = _filtered_mape(eval_targets, preds_scaled, "fraction")
    mape_pct, _ = _filtered_mape(eval_kw, preds_kw, "percent")
    cell = EvalCell(
        month=month,
        scenario=scenario.kind,
        mse_scaled=mse(eval_targets, preds_scaled),
        mape_fraction=mape_frac,
        mse_kw2=mse(eval_kw, preds_kw),
        mape_percent=mape_pct,
        n_points=eval_targets.shape[0],
        n_mape_dropped=dropped,
        iterations=diagnostics.iterations,
    )
    return cell, model


def run_table_experiment(
    profiles_by_month: Mapping[int, LoadProfile],
    scenarios: Sequence[Scenario],
    params: NuSvrParams,
    kernel: KernelSpec,
    holdout_days: int = 0,
) -> EvalReport:
    """Train and evaluate every (scenario, month) cell with one shared
    hyperparameter triple; rows come out scenario-major, month-minor."""
    if not profiles_by_month:
        raise ParameterDomainError("need at least one month profile")
    if not scenarios:
        raise ParameterDomainError("need at least one scenario")
    rows = []
    for scenario in scenarios:
        for month in sorted(profiles_by_month):
            cell, _ = _evaluate_cell(
                month, profiles_by_month[month], scenario, params, kernel, holdout_days
            )
            rows.append(cell)
    return EvalReport(rows=tuple(rows))


# ---------------------------------------------------------------------------
# Grid search
# ---------------------------------------------------------------------------

_OBJECTIVES = ("max-mse", "max-mape", "mean-mse", "mean-mape")


@dataclass(frozen=True)
class GridSearchSpec:
    """Coarse grids plus the refinement schedule.

    Refinement level d surrounds the incumbent with geometric neighbors at
    factor ``refinement_factor ** (0.5 ** (d-1))`` per dimension, so each
    level halves the previous one's logarithmic spacing.
    """

    c_grid: tuple[float, ...]
    nu_grid: tuple[float, ...]
    gamma_grid: tuple[float, ...]
    refinement_factor: float = np.sqrt(10.0)
    refinement_depth: int = 1
    objective: str = "max-mse"

    def __post_init__(self):
        for name, grid in (("c", self.c_grid), ("nu", self.nu_grid), ("gamma", self.gamma_grid)):
            if len(grid) == 0:
                raise ParameterDomainError(f"{name}_grid must be non-empty")
            arr = np.asarray(grid, dtype=float)
            if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
                raise ParameterDomainError(f"{name}_grid values must be finite and > 0")
        if any(v > 1.0 for v in self.nu_grid):
            raise ParameterDomainError("nu_grid values must lie in (0, 1]")
        if not np.isfinite(self.refinement_factor) or self.refinement_factor <= 1.0:
            raise ParameterDomainError("refinement_factor must be > 1")
        if self.refinement_depth < 0:
            raise ParameterDomainError("refinement_depth must be >= 0")
        if self.objective not in _OBJECTIVES:
            raise ParameterDomainError(f"objective must be one of {_OBJECTIVES}")
        object.__setattr__(self, "c_grid", tuple(float(v) for v in self.c_grid))
        object.__setattr__(self, "nu_grid", tuple(float(v) for v in self.nu_grid))
        object.__setattr__(self, "gamma_grid", tuple(float(v) for v in self.gamma_grid))


@dataclass(frozen=True)
class ExperimentContext:
    """Everything one grid evaluation needs; safe to ship to worker
    processes."""

    profiles_by_month: dict[int, LoadProfile]
    scenarios: tuple[Scenario, ...]
    kernel_kind: str = "rbf"
    poly_degree: int = 3
    poly_coef0: float = 1.0
    kkt_tolerance: float = 1e-6
    max_iterations: int = 10_000_000
    holdout_days: int = 0

    def kernel_for(self, gamma: float) -> KernelSpec:
        if self.kernel_kind == "rbf":
            return RbfKernel(gamma=gamma)
        if self.kernel_kind == "polynomial":
            return PolynomialKernel(degree=self.poly_degree, gamma=gamma, coef0=self.poly_coef0)
        if self.kernel_kind == "linear":
            return LinearKernel()
        raise ParameterDomainError(f"unknown kernel kind {self.kernel_kind!r}")


@dataclass(frozen=True)
class GridTraceEntry:
    c: float
    nu: float
    gamma: float
    objective: float
    tiebreak: float
    converged: bool


@dataclass(frozen=True)
class GridSearchResult:
    best_c: float
    best_nu: float
    best_gamma: float
    best_objective: float
    trace: tuple[GridTraceEntry, ...]


def _objective_from_report(report: EvalReport, objective: str) -> tuple[float, float]:
    """(primary, tiebreak): the tiebreak is the other metric, same
    aggregation."""
    mses = [r.mse_scaled for r in report.rows]
    mapes = [r.mape_fraction for r in report.rows]
    agg = max if objective.startswith("max-") else (lambda v: float(np.mean(v)))
    primary_metric = objective.split("-")[1]
    if primary_metric == "mse":
        return float(agg(mses)), float(agg(mapes))
    return float(agg(mapes)), float(agg(mses))


def _evaluate_grid_point(args) -> GridTraceEntry:
    ctx, objective, c, nu, gamma = args
    params = NuSvrParams(
        c=c, nu=nu, kkt_tolerance=ctx.kkt_tolerance, max_iterations=ctx.max_iterations
    )
    try:
        report = run_table_experiment(
            ctx.profiles_by_month, ctx.scenarios, params, ctx.kernel_for(gamma),
            holdout_days=ctx.holdout_days,
        )
    except ExperimentCellError:
        return GridTraceEntry(
            c=c, nu=nu, gamma=gamma, objective=np.inf, tiebreak=np.inf, converged=False
        )
    primary, tiebreak = _objective_from_report(report, objective)
    return GridTraceEntry(
        c=c, nu=nu, gamma=gamma, objective=primary, tiebreak=tiebreak, converged=True
    )


def _point_key(c: float, nu: float, gamma: float) -> tuple[float, float, float]:
    return (float(np.format_float_scientific(c, precision=12)),
            float(np.format_float_scientific(nu, precision=12)),
            float(np.format_float_scientific(gamma, precision=12)))


def grid_search(
    spec: GridSearchSpec,
    context: ExperimentContext,
    jobs: int = 1,
) -> GridSearchResult:
    """Exhaustive coarse pass plus geometric refinement around the incumbent.

    Every evaluated point lands in the trace in deterministic construction
    order regardless of worker scheduling; failed points carry an infinite
    objective.  The incumbent minimizes (objective, tiebreak, c, nu, gamma).
    """
    seen: set = set()
    trace: list[GridTraceEntry] = []

    def argsort_key(entry: GridTraceEntry):
        return (entry.objective, entry.tiebreak, entry.c, entry.nu, entry.gamma)

    def evaluate_batch(points: list[tuple[float, float, float]]):
        new_points = []
        for c, nu, gamma in points:
            key = _point_key(c, nu, gamma)
            if key in seen:
                continue
            seen.add(key)
            new_points.append((context, spec.objective, c, nu, gamma))
        if not new_points:
            return
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_evaluate_grid_point, new_points))
        else:
            results = [_evaluate_grid_point(a) for a in new_points]
        trace.extend(results)

    coarse = list(itertools.product(spec.c_grid, spec.nu_grid, spec.gamma_grid))
    evaluate_batch(coarse)

    for depth in range(1, spec.refinement_depth + 1):
        incumbent = min(trace, key=argsort_key)
        if not np.isfinite(incumbent.objective):
            break
        factor = spec.refinement_factor ** (0.5 ** (depth - 1))
        cs = [incumbent.c / factor, incumbent.c, incumbent.c * factor]
        nus = [
            min(max(v, 1e-3), 1.0)
            for v in (incumbent.nu / factor, incumbent.nu, incumbent.nu * factor)
        ]
        gammas = [incumbent.gamma / factor, incumbent.gamma, incumbent.gamma * factor]
        evaluate_batch(list(itertools.product(cs, nus, gammas)))

    best = min(trace, key=argsort_key)
    return GridSearchResult(
        best_c=best.c,
        best_nu=best.nu,
        best_gamma=best.gamma,
        best_objective=best.objective,
        trace=tuple(trace),
    )


# ---------------------------------------------------------------------------
# Exports
# ---------------------------------------------------------------------------


def export_report_csv(report: EvalReport, path, header_comments: Sequence[str] = ()) -> None:
    lines = [f"# {c}" for c in header_comments]
    lines.append("month,scenario,mse_scaled,mape_fraction,mse_kw2,mape_percent,n_points")
    for r in report.rows:
        lines.append(
            f"{r.month},{r.scenario.value},{r.mse_scaled!r},{r.mape_fraction!r},"
            f"{r.mse_kw2!r},{r.mape_percent!r},{r.n_points}"
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def export_grid_trace_csv(result: GridSearchResult, path, header_comments: Sequence[str] = ()) -> None:
    lines = [f"# {c}" for c in header_comments]
    lines.append("c,nu,gamma,objective,converged")
    for e in result.trace:
        lines.append(f"{e.c!r},{e.nu!r},{e.gamma!r},{e.objective!r},{str(e.converged).lower()}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")
