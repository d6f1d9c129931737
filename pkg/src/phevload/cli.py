"""Batch command-line interface.

Subcommands wire the library modules into reproducible experiments:

  demand-curve   expected per-vehicle demand curves per duration family
  synth-profile  deterministic synthetic monthly load profiles
  train          fit one nu-SVR on a profile + scenario, save the model
  evaluate       score a saved model against a profile + scenario
  grid-search    coarse/fine hyperparameter search, trace + incumbent
  table          the month-by-scenario experiment table

Configuration comes from an optional TOML/JSON file (``--config``) overlaid
by command-line flags (flags win).  Every command resolves an explicit seed
(printed on stdout), embeds a hash of the resolved configuration in each
output file, and isolates the only non-reproducible datum, the generation
timestamp, inside the JSON sidecar's ``generated_at`` field.  Exit codes:
0 success, 1 runtime or convergence failure, 2 configuration failure.
"""

from __future__ import annotations

import argparse
import datetime as dt
import hashlib
import json
import os
import sys
from typing import Any, Sequence

import numpy as np

from .demand import (
    DEFAULT_ARRIVAL,
    DEFAULT_CHARGING_MEAN_H,
    DEFAULT_CHARGING_VARIANCE_H2,
    DEFAULT_OUTLET_POWER_KW,
    ArrivalTimeDist,
    ChargingTimeDist,
    default_nonuniform_charging,
    expected_demand_curve,
    export_curve_csv,
    load_charging_pmf_json,
    moment_match,
)
from .errors import (
    ConfigError,
    CsvFormatError,
    GridShapeError,
    InfeasibleTargetError,
    NonConvergenceError,
    ParameterDomainError,
)
from .evaluation import (
    EvalReport,
    ExperimentCellError,
    ExperimentContext,
    GridSearchSpec,
    export_grid_trace_csv,
    export_report_csv,
    grid_search,
    mape,
    mse,
    run_table_experiment,
)
from .pipeline import (
    LoadProfile,
    Scenario,
    ScenarioKind,
    assemble_dataset,
    export_profile_csv,
    ingest_csv,
    make_scenario,
    synthesize_profile,
)
from .svr import (
    KernelSpec,
    LinearKernel,
    NuSvrParams,
    PolynomialKernel,
    RbfKernel,
    TrainingSet,
    load_model,
    predict,
    save_model,
    train_nu_svr,
)

_MONTH_NAMES = {
    "jan": 1, "feb": 2, "mar": 3, "apr": 4, "may": 5, "jun": 6,
    "jul": 7, "aug": 8, "sep": 9, "oct": 10, "nov": 11, "dec": 12,
}
_FAMILIES = ("uniform", "nonuniform", "trunc_gaussian", "rician")

_DEFAULTS: dict[str, Any] = {
    "seed": 0,
    "out": "out",
    "jobs": 1,
    "months": [1, 4, 7, 10],
    "scenarios": ["nophev", "uniform", "nonuniform"],
    "fleet_size": 1,
    "families": ["uniform"],
    "days": None,
    "c": 1000.0,
    "nu": 0.5,
    "gamma": 10.0,
    "kernel": "rbf",
    "poly_degree": 3,
    "poly_coef0": 1.0,
    "kkt_tolerance": 1e-6,
    "max_iterations": 10_000_000,
    "holdout_days": 0,
    "power": DEFAULT_OUTLET_POWER_KW,
    "arrival_mu": DEFAULT_ARRIVAL.mu,
    "arrival_sigma_sq": DEFAULT_ARRIVAL.sigma_sq,
    "tc_mean": DEFAULT_CHARGING_MEAN_H,
    "tc_var": DEFAULT_CHARGING_VARIANCE_H2,
    "pmf_config": None,
    "profiles_dir": None,
    "profile": None,
    "model": None,
    "scenario": "uniform",
    "c_grid": [1.0, 10.0, 100.0, 1000.0],
    "nu_grid": [0.25, 0.5, 0.75],
    "gamma_grid": [0.1, 1.0, 10.0],
    "refinement_factor": float(np.sqrt(10.0)),
    "refinement_depth": 1,
    "objective": "max-mse",
}


# ---------------------------------------------------------------------------
# Configuration plumbing
# ---------------------------------------------------------------------------


def _load_config_file(path: str) -> dict:
    if not os.path.exists(path):
        raise ConfigError(f"config file does not exist: {path}")
    with open(path, "rb") as fh:
        raw = fh.read()
    if path.endswith(".toml"):
        try:
            import tomllib  # Python >= 3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        try:
            doc = tomllib.loads(raw.decode("utf-8"))
        except Exception as exc:
            raise ConfigError(f"bad TOML in {path}: {exc}") from exc
    else:
        try:
            doc = json.loads(raw.decode("utf-8"))
        except Exception as exc:
            raise ConfigError(f"bad JSON in {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config file must hold a table/object at top level")
    unknown = set(doc) - set(_DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return doc


def _parse_months(value) -> list[int]:
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    months = []
    for item in value:
        if isinstance(item, int):
            number = item
        else:
            text = str(item).strip().lower()
            if text[:3] in _MONTH_NAMES:
                number = _MONTH_NAMES[text[:3]]
            else:
                try:
                    number = int(text)
                except ValueError:
                    raise ConfigError(f"bad month {item!r}")
        if not 1 <= number <= 12:
            raise ConfigError(f"month out of range: {number}")
        months.append(number)
    if not months:
        raise ConfigError("months list is empty")
    return sorted(set(months))


def _parse_list(value, kind=float) -> list:
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    try:
        return [kind(v) for v in value]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad list value {value!r}: {exc}") from exc


def _parse_families(value) -> list[str]:
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    out: list[str] = []
    for item in value:
        name = str(item).strip().lower().replace("-", "_")
        if name == "all":
            return list(_FAMILIES)
        if name in ("truncated_gaussian", "trunc_gaussian", "gaussian"):
            name = "trunc_gaussian"
        if name not in _FAMILIES:
            raise ConfigError(f"unknown family {item!r}; expected {_FAMILIES} or 'all'")
        out.append(name)
    if not out:
        raise ConfigError("families list is empty")
    return out


def resolve_config(args: argparse.Namespace) -> dict:
    """Defaults, then config file, then flags; validated."""
    cfg = dict(_DEFAULTS)
    if args.config:
        cfg.update(_load_config_file(args.config))
    for key, value in vars(args).items():
        if key in ("command", "config"):
            continue
        if value is not None:
            cfg[key] = value
    cfg["command"] = args.command

    cfg["months"] = _parse_months(cfg["months"])
    cfg["scenarios"] = [
        ScenarioKind.parse(s).value
        for s in (cfg["scenarios"].split(",") if isinstance(cfg["scenarios"], str) else cfg["scenarios"])
    ]
    cfg["families"] = _parse_families(cfg["families"])
    for key in ("c_grid", "nu_grid", "gamma_grid"):
        cfg[key] = _parse_list(cfg[key], float)
    for key in ("seed", "jobs", "fleet_size", "max_iterations", "holdout_days",
                "refinement_depth", "poly_degree"):
        cfg[key] = int(cfg[key])
    if cfg["days"] is not None:
        cfg["days"] = int(cfg["days"])
    for key in ("c", "nu", "gamma", "kkt_tolerance", "power", "arrival_mu",
                "arrival_sigma_sq", "tc_mean", "tc_var", "refinement_factor",
                "poly_coef0"):
        cfg[key] = float(cfg[key])
    if cfg["seed"] < 0:
        raise ConfigError("seed must be a non-negative integer")
    if cfg["jobs"] < 1:
        raise ConfigError("jobs must be >= 1")
    if cfg["kernel"] not in ("rbf", "polynomial", "linear"):
        raise ConfigError(f"unknown kernel {cfg['kernel']!r}")

    for key in ("pmf_config", "profile", "model", "profiles_dir"):
        path = cfg.get(key)
        if path is not None and not os.path.exists(path):
            raise ConfigError(f"{key} does not exist: {path}")
    if cfg["command"] == "train" and cfg["profile"] is None:
        raise ConfigError("train requires --profile")
    if cfg["command"] == "evaluate":
        if cfg["profile"] is None or cfg["model"] is None:
            raise ConfigError("evaluate requires --profile and --model")

    out_dir = str(cfg["out"])
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out_dir}: {exc}") from exc
    if not os.access(out_dir, os.W_OK):
        raise ConfigError(f"output directory not writable: {out_dir}")
    return cfg


def config_hash(cfg: dict) -> str:
    """Hash of the resolved configuration, excluding output location."""
    hashable = {k: v for k, v in cfg.items() if k != "out"}
    blob = json.dumps(hashable, sort_keys=True, default=str).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


def _sidecar(cfg: dict, payload: dict) -> dict:
    return {
        "command": cfg["command"],
        "config": {k: v for k, v in cfg.items() if k != "out"},
        "config_hash": config_hash(cfg),
        "generated_at": dt.datetime.now().isoformat(timespec="seconds"),
        **payload,
    }


def _write_json(path: str, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Shared builders
# ---------------------------------------------------------------------------


def _arrival(cfg: dict) -> ArrivalTimeDist:
    return ArrivalTimeDist(mu=cfg["arrival_mu"], sigma_sq=cfg["arrival_sigma_sq"])


def _charging_family(cfg: dict, family: str) -> ChargingTimeDist:
    if family == "uniform":
        return moment_match("uniform", cfg["tc_mean"], cfg["tc_var"])
    if family == "trunc_gaussian":
        return moment_match("truncated_gaussian", cfg["tc_mean"], cfg["tc_var"])
    if family == "rician":
        return moment_match("rician", cfg["tc_mean"], cfg["tc_var"])
    if family == "nonuniform":
        if cfg["pmf_config"]:
            return load_charging_pmf_json(cfg["pmf_config"])
        return default_nonuniform_charging()
    raise ConfigError(f"unknown family {family!r}")


def _kernel(cfg: dict) -> KernelSpec:
    if cfg["kernel"] == "rbf":
        return RbfKernel(gamma=cfg["gamma"])
    if cfg["kernel"] == "polynomial":
        return PolynomialKernel(degree=cfg["poly_degree"], gamma=cfg["gamma"], coef0=cfg["poly_coef0"])
    return LinearKernel()


def _params(cfg: dict) -> NuSvrParams:
    return NuSvrParams(
        c=cfg["c"], nu=cfg["nu"],
        kkt_tolerance=cfg["kkt_tolerance"], max_iterations=cfg["max_iterations"],
    )


def _scenario(cfg: dict, kind_text: str) -> Scenario:
    kind = ScenarioKind.parse(kind_text)
    nonuniform = None
    if kind is ScenarioKind.NONUNIFORM_TC and cfg["pmf_config"]:
        nonuniform = load_charging_pmf_json(cfg["pmf_config"])
    return make_scenario(
        kind,
        fleet_size=cfg["fleet_size"],
        arrival=_arrival(cfg),
        outlet_power_kw=cfg["power"],
        nonuniform=nonuniform,
    )


def _profiles(cfg: dict) -> dict[int, LoadProfile]:
    """Per-month profiles: ingested from profiles_dir when given, else
    synthesized from per-month children of the master seed."""
    months = cfg["months"]
    if cfg["profiles_dir"]:
        out = {}
        for month in months:
            path = os.path.join(cfg["profiles_dir"], f"profile_{month:02d}.csv")
            if not os.path.exists(path):
                raise ConfigError(f"profile file does not exist: {path}")
            out[month] = ingest_csv(path)
        return out
    children = np.random.SeedSequence(cfg["seed"]).spawn(12)
    return {m: synthesize_profile(m, days=cfg["days"], seed=children[m - 1]) for m in months}


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _cmd_demand_curve(cfg: dict) -> int:
    arrival = _arrival(cfg)
    chash = config_hash(cfg)
    families = {}
    for family in cfg["families"]:
        dist = _charging_family(cfg, family)
        curve = expected_demand_curve(arrival, dist, cfg["power"])
        path = os.path.join(cfg["out"], f"demand_curve_{family}.csv")
        export_curve_csv(curve, path, header_comments=(f"config_hash: {chash}",))
        families[family] = {
            "csv": os.path.basename(path),
            "energy_kwh": curve.energy_kwh,
            "expected_energy_kwh": cfg["power"] * dist.mean(),
            "duration_mean_h": dist.mean(),
            "duration_variance_h2": dist.variance(),
        }
        print(f"wrote {path} (energy checksum {curve.energy_kwh:.6f} kWh)")
    _write_json(
        os.path.join(cfg["out"], "demand_curve_summary.json"),
        _sidecar(cfg, {"families": families}),
    )
    return 0


def _cmd_synth_profile(cfg: dict) -> int:
    chash = config_hash(cfg)
    children = np.random.SeedSequence(cfg["seed"]).spawn(12)
    written = {}
    for month in cfg["months"]:
        profile = synthesize_profile(month, days=cfg["days"], seed=children[month - 1])
        profile = LoadProfile(
            timestamps=profile.timestamps,
            energy_kwh=profile.energy_kwh,
            profile_type=profile.profile_type,
            weather_zone=profile.weather_zone,
            source=profile.source,
            extra_metadata=(("config_hash", chash),),
        )
        path = os.path.join(cfg["out"], f"profile_{month:02d}.csv")
        export_profile_csv(profile, path)
        written[month] = {
            "csv": os.path.basename(path),
            "days": profile.n_days,
            "total_kwh": float(profile.energy_kwh.sum()),
        }
        print(f"wrote {path} ({profile.n_days} days)")
    _write_json(
        os.path.join(cfg["out"], "synth_profile_summary.json"),
        _sidecar(cfg, {"profiles": written}),
    )
    return 0


def _cmd_train(cfg: dict) -> int:
    profile = ingest_csv(cfg["profile"])
    scenario = _scenario(cfg, cfg["scenario"])
    dataset = assemble_dataset(profile, scenario)
    model, diag = train_nu_svr(
        TrainingSet(dataset.features, dataset.targets),
        _params(cfg),
        _kernel(cfg),
        scaler=dataset.scaler,
        return_diagnostics=True,
    )
    model_path = os.path.join(cfg["out"], "model.json")
    save_model(model, model_path)
    _write_json(
        os.path.join(cfg["out"], "train_summary.json"),
        _sidecar(cfg, {
            "model": os.path.basename(model_path),
            "n_rows": dataset.n_rows,
            "n_support": model.n_support,
            "iterations": diag.iterations,
            "kkt_violation": diag.kkt_violation,
            "dual_objective": diag.objective,
            "epsilon": model.epsilon,
            "bias": model.bias,
        }),
    )
    print(f"wrote {model_path} ({model.n_support} support vectors, "
          f"{diag.iterations} iterations)")
    return 0


def _cmd_evaluate(cfg: dict) -> int:
    profile = ingest_csv(cfg["profile"])
    model = load_model(cfg["model"])
    if model.scaler is None:
        raise ConfigError("model file carries no scaler; cannot evaluate raw profiles")
    scenario = _scenario(cfg, cfg["scenario"])
    dataset = assemble_dataset(profile, scenario)
    features = model.scaler.transform_features(dataset.features_raw)
    targets = model.scaler.transform_targets(dataset.target_kw)
    preds = np.asarray(predict(model, features), dtype=float)
    preds_kw = model.scaler.inverse_targets(preds)
    keep = targets != 0.0
    metrics = {
        "mse_scaled": mse(targets, preds),
        "mape_fraction": mape(targets[keep], preds[keep], mode="fraction"),
        "mse_kw2": mse(dataset.target_kw, preds_kw),
        "mape_percent": mape(dataset.target_kw, preds_kw, mode="percent"),
        "n_points": int(targets.shape[0]),
        "n_mape_dropped": int(targets.shape[0] - keep.sum()),
    }
    chash = config_hash(cfg)
    csv_path = os.path.join(cfg["out"], "evaluation.csv")
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write(f"# config_hash: {chash}\n")
        fh.write("scenario,mse_scaled,mape_fraction,mse_kw2,mape_percent,n_points\n")
        fh.write(
            f"{scenario.kind.value},{metrics['mse_scaled']!r},{metrics['mape_fraction']!r},"
            f"{metrics['mse_kw2']!r},{metrics['mape_percent']!r},{metrics['n_points']}\n"
        )
    _write_json(
        os.path.join(cfg["out"], "evaluation_summary.json"),
        _sidecar(cfg, {"metrics": metrics}),
    )
    print(f"mse_scaled={metrics['mse_scaled']:.6e} mape_fraction={metrics['mape_fraction']:.6f}")
    return 0


def _report_payload(report: EvalReport) -> dict:
    return {
        "rows": [
            {
                "month": r.month,
                "scenario": r.scenario.value,
                "mse_scaled": r.mse_scaled,
                "mape_fraction": r.mape_fraction,
                "mse_kw2": r.mse_kw2,
                "mape_percent": r.mape_percent,
                "n_points": r.n_points,
                "n_mape_dropped": r.n_mape_dropped,
                "iterations": r.iterations,
            }
            for r in report.rows
        ],
        "summary": {
            "max_mse_scaled": report.summary.max_mse_scaled,
            "max_mape_fraction": report.summary.max_mape_fraction,
            "max_mse_kw2": report.summary.max_mse_kw2,
            "max_mape_percent": report.summary.max_mape_percent,
        },
    }


def _cmd_table(cfg: dict) -> int:
    profiles = _profiles(cfg)
    scenarios = [_scenario(cfg, s) for s in cfg["scenarios"]]
    report = run_table_experiment(
        profiles, scenarios, _params(cfg), _kernel(cfg), holdout_days=cfg["holdout_days"]
    )
    chash = config_hash(cfg)
    csv_path = os.path.join(cfg["out"], "table_report.csv")
    export_report_csv(report, csv_path, header_comments=(f"config_hash: {chash}",))
    _write_json(
        os.path.join(cfg["out"], "table_summary.json"),
        _sidecar(cfg, _report_payload(report)),
    )
    for r in report.rows:
        print(f"month={r.month:2d} scenario={r.scenario.value:10s} "
              f"mse_scaled={r.mse_scaled:.6e} mape_fraction={r.mape_fraction:.6f}")
    print(f"wrote {csv_path}")
    return 0


def _cmd_grid_search(cfg: dict) -> int:
    spec = GridSearchSpec(
        c_grid=tuple(cfg["c_grid"]),
        nu_grid=tuple(cfg["nu_grid"]),
        gamma_grid=tuple(cfg["gamma_grid"]),
        refinement_factor=cfg["refinement_factor"],
        refinement_depth=cfg["refinement_depth"],
        objective=cfg["objective"],
    )
    context = ExperimentContext(
        profiles_by_month=_profiles(cfg),
        scenarios=tuple(_scenario(cfg, s) for s in cfg["scenarios"]),
        kernel_kind=cfg["kernel"],
        poly_degree=cfg["poly_degree"],
        poly_coef0=cfg["poly_coef0"],
        kkt_tolerance=cfg["kkt_tolerance"],
        max_iterations=cfg["max_iterations"],
        holdout_days=cfg["holdout_days"],
    )
    result = grid_search(spec, context, jobs=cfg["jobs"])
    chash = config_hash(cfg)
    trace_path = os.path.join(cfg["out"], "grid_trace.csv")
    export_grid_trace_csv(result, trace_path, header_comments=(f"config_hash: {chash}",))
    incumbent = {
        "c": result.best_c,
        "nu": result.best_nu,
        "gamma": result.best_gamma,
        "objective": result.best_objective,
        "objective_kind": cfg["objective"],
        "points_evaluated": len(result.trace),
    }
    _write_json(
        os.path.join(cfg["out"], "grid_incumbent.json"),
        _sidecar(cfg, {"incumbent": incumbent}),
    )
    print(f"incumbent: c={result.best_c!r} nu={result.best_nu!r} "
          f"gamma={result.best_gamma!r} objective={result.best_objective!r}")
    print(f"wrote {trace_path}")
    return 0


_COMMANDS = {
    "demand-curve": _cmd_demand_curve,
    "synth-profile": _cmd_synth_profile,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "table": _cmd_table,
    "grid-search": _cmd_grid_search,
}


# ---------------------------------------------------------------------------
# Parser and entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phevload",
        description="Residential demand modeling under PHEV charging.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser):
        p.add_argument("--config", help="TOML or JSON config file (flags win)")
        p.add_argument("--seed", type=int, help="master RNG seed (default 0)")
        p.add_argument("--out", help="output directory (default ./out)")
        p.add_argument("--jobs", type=int, help="parallel grid evaluations (default 1)")

    def model_flags(p: argparse.ArgumentParser):
        p.add_argument("--c", type=float, dest="c", help="regularization C")
        p.add_argument("--nu", type=float, help="nu in (0, 1]")
        p.add_argument("--gamma", type=float, help="kernel gamma")
        p.add_argument("--kernel", choices=("rbf", "polynomial", "linear"))
        p.add_argument("--kkt-tolerance", type=float, dest="kkt_tolerance")
        p.add_argument("--max-iterations", type=int, dest="max_iterations")

    def scenario_flags(p: argparse.ArgumentParser):
        p.add_argument("--fleet-size", type=int, dest="fleet_size")
        p.add_argument("--power", type=float, help="outlet power (kW)")
        p.add_argument("--pmf-config", dest="pmf_config",
                       help="JSON histogram for the non-uniform duration family")

    p = sub.add_parser("demand-curve", help="expected per-vehicle demand curves")
    common(p)
    p.add_argument("--families", help="comma list of uniform,nonuniform,trunc-gaussian,rician or 'all'")
    p.add_argument("--power", type=float)
    p.add_argument("--arrival-mu", type=float, dest="arrival_mu")
    p.add_argument("--arrival-sigma-sq", type=float, dest="arrival_sigma_sq")
    p.add_argument("--tc-mean", type=float, dest="tc_mean")
    p.add_argument("--tc-var", type=float, dest="tc_var")
    p.add_argument("--pmf-config", dest="pmf_config")

    p = sub.add_parser("synth-profile", help="synthesize monthly profiles")
    common(p)
    p.add_argument("--months", help="comma list (names or numbers)")
    p.add_argument("--days", type=int, help="days per month (default: whole month)")

    p = sub.add_parser("train", help="train one model on a profile")
    common(p)
    p.add_argument("--profile", help="profile CSV path")
    p.add_argument("--scenario", help="nophev|uniform|nonuniform")
    scenario_flags(p)
    model_flags(p)

    p = sub.add_parser("evaluate", help="evaluate a saved model")
    common(p)
    p.add_argument("--profile", help="profile CSV path")
    p.add_argument("--model", help="model JSON path")
    p.add_argument("--scenario", help="nophev|uniform|nonuniform")
    scenario_flags(p)

    p = sub.add_parser("table", help="month-by-scenario experiment table")
    common(p)
    p.add_argument("--months", help="comma list (names or numbers)")
    p.add_argument("--scenarios", help="comma list of nophev,uniform,nonuniform")
    p.add_argument("--days", type=int)
    p.add_argument("--profiles-dir", dest="profiles_dir",
                   help="directory of profile_<MM>.csv files (default: synthesize)")
    p.add_argument("--holdout-days", type=int, dest="holdout_days")
    scenario_flags(p)
    model_flags(p)

    p = sub.add_parser("grid-search", help="coarse/fine hyperparameter search")
    common(p)
    p.add_argument("--months", help="comma list (names or numbers)")
    p.add_argument("--scenarios", help="comma list of nophev,uniform,nonuniform")
    p.add_argument("--days", type=int)
    p.add_argument("--profiles-dir", dest="profiles_dir")
    p.add_argument("--holdout-days", type=int, dest="holdout_days")
    p.add_argument("--c-grid", dest="c_grid", help="comma list")
    p.add_argument("--nu-grid", dest="nu_grid", help="comma list")
    p.add_argument("--gamma-grid", dest="gamma_grid", help="comma list")
    p.add_argument("--refinement-factor", type=float, dest="refinement_factor")
    p.add_argument("--refinement-depth", type=int, dest="refinement_depth")
    p.add_argument("--objective", choices=("max-mse", "max-mape", "mean-mse", "mean-mape"))
    p.add_argument("--kernel", choices=("rbf", "polynomial", "linear"))
    p.add_argument("--kkt-tolerance", type=float, dest="kkt_tolerance")
    p.add_argument("--max-iterations", type=int, dest="max_iterations")
    scenario_flags(p)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except (ConfigError, ParameterDomainError, CsvFormatError, GridShapeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    print(f"seed: {cfg['seed']}")
    print(f"config_hash: {config_hash(cfg)}")
    try:
        return _COMMANDS[cfg["command"]](cfg)
    except (ConfigError, CsvFormatError, InfeasibleTargetError, ParameterDomainError,
            GridShapeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (NonConvergenceError, ExperimentCellError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
