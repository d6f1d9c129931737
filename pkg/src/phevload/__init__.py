"""Residential daily demand modeling under PHEV charging.

Modules:
  demand     - probabilistic per-vehicle charging demand and expected curves
  svr        - from-scratch nu-support-vector regression engine
  pipeline   - load-profile ingestion/synthesis and dataset assembly
  evaluation - error metrics, the month-by-scenario experiment driver and
               coarse/fine hyperparameter grid search
  cli        - batch command-line interface
"""

from .demand import (
    ArrivalTimeDist,
    ChargingEvent,
    ChargingTimeDist,
    EmpiricalPmfCharging,
    ExpectedDemandCurve,
    RicianCharging,
    TruncatedGaussianCharging,
    UniformCharging,
    charging_demand,
    charging_survival,
    default_nonuniform_charging,
    expected_demand_curve,
    moment_match,
    monte_carlo_demand_oracle,
    monte_carlo_demand_stats,
    total_demand,
    wrapped_arrival_pmf,
)
from .evaluation import (
    EvalReport,
    ExperimentContext,
    GridSearchSpec,
    grid_search,
    mape,
    mse,
    run_table_experiment,
)
from .pipeline import (
    LoadProfile,
    Scaler,
    Scenario,
    ScenarioKind,
    SupervisedDataset,
    assemble_dataset,
    build_features,
    fit_scaler,
    ingest_csv,
    make_scenario,
    synthesize_profile,
)
from .svr import (
    DualSolution,
    KernelSpec,
    LinearKernel,
    NuSvrParams,
    PolynomialKernel,
    RbfKernel,
    SvrModel,
    TrainingSet,
    brute_force_qp_oracle,
    kernel_eval,
    kkt_violation,
    load_model,
    predict,
    save_model,
    train_nu_svr,
)

__version__ = "0.1.0"
