"""Residential load profiles and supervised dataset assembly.

Profiles are quarter-hourly kWh series for a household cluster.  They are
either ingested from CSV (schema below) or synthesized with a seasonal shape
plus bounded noise.  Dataset assembly turns a profile and a PHEV scenario into
(feature, target) pairs: targets are total per-slot demand in average kW
(slot kWh times 4, plus the fleet's expected charging demand), features encode
the calendar, and both are min-max scaled into [0, 1] with the fitted scaler
kept for inverting predictions.

CSV schema: optional leading comment lines ``# profile_type: ...`` and
``# weather_zone: ...``, a ``timestamp,kwh`` header, then one row per quarter
hour with ISO 8601 local timestamps (minutes :00/:15/:30/:45).  Ingestion is
strict: malformed rows, negative energy, cadence gaps and partial days are
rejected with row-addressed errors.
"""

from __future__ import annotations

import calendar
import datetime as dt
import enum
import io
from dataclasses import dataclass

import numpy as np

from .demand import (
    DEFAULT_ARRIVAL,
    DEFAULT_CHARGING_MEAN_H,
    DEFAULT_CHARGING_VARIANCE_H2,
    DEFAULT_OUTLET_POWER_KW,
    ArrivalTimeDist,
    ChargingTimeDist,
    ExpectedDemandCurve,
    default_nonuniform_charging,
    expected_demand_curve,
    moment_match,
    total_demand,
)
from .errors import CsvFormatError, GridShapeError, ParameterDomainError

__all__ = [
    "SLOTS_PER_DAY",
    "SLOT_HOURS",
    "KWH_TO_KW",
    "DEFAULT_YEAR",
    "LoadProfile",
    "ingest_csv",
    "export_profile_csv",
    "synthesize_profile",
    "build_features",
    "FEATURE_NAMES",
    "Scaler",
    "fit_scaler",
    "ScenarioKind",
    "Scenario",
    "make_scenario",
    "SupervisedDataset",
    "assemble_dataset",
    "export_dataset_csv",
]

SLOTS_PER_DAY = 96
SLOT_HOURS = 0.25
KWH_TO_KW = 1.0 / SLOT_HOURS
DEFAULT_YEAR = 2014


# ---------------------------------------------------------------------------
# Load profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LoadProfile:
    """Quarter-hourly kWh records covering whole days."""

    timestamps: tuple[dt.datetime, ...]
    energy_kwh: np.ndarray
    profile_type: str = "residential"
    weather_zone: str = "north"
    source: str = "measured"
    extra_metadata: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        energy = np.asarray(self.energy_kwh, dtype=float)
        stamps = tuple(self.timestamps)
        if energy.ndim != 1 or len(stamps) != energy.shape[0]:
            raise GridShapeError("timestamps and energy_kwh must have equal length")
        if len(stamps) == 0:
            raise ParameterDomainError("profile must contain at least one day")
        if not np.all(np.isfinite(energy)) or np.any(energy < 0.0):
            raise ParameterDomainError("energy values must be finite and >= 0")
        if self.source not in ("measured", "synthetic"):
            raise ParameterDomainError(f"source must be measured|synthetic, got {self.source!r}")
        step = dt.timedelta(minutes=15)
        for a, b in zip(stamps, stamps[1:]):
            if b <= a:
                raise ParameterDomainError(f"timestamps must be strictly increasing at {b}")
            if b.date() == a.date() and b - a != step:
                raise ParameterDomainError(
                    f"15-minute cadence broken between {a} and {b}"
                )
        by_day: dict[dt.date, int] = {}
        for s in stamps:
            by_day[s.date()] = by_day.get(s.date(), 0) + 1
        for day, count in by_day.items():
            if count != SLOTS_PER_DAY:
                raise ParameterDomainError(
                    f"partial day {day}: {count} records instead of {SLOTS_PER_DAY}"
                )
        first_of_day = {s.date() for s in stamps if s.time() == dt.time(0, 0)}
        if set(by_day) != first_of_day:
            missing = sorted(set(by_day) - first_of_day)[0]
            raise ParameterDomainError(f"day {missing} does not start at 00:00")
        object.__setattr__(self, "timestamps", stamps)
        object.__setattr__(self, "energy_kwh", energy)

    @property
    def n_days(self) -> int:
        return len(self.timestamps) // SLOTS_PER_DAY

    @property
    def days(self) -> tuple[dt.date, ...]:
        return tuple(self.timestamps[i * SLOTS_PER_DAY].date() for i in range(self.n_days))

    def day_kw(self, index: int) -> np.ndarray:
        """Average power (kW) per slot for the index-th day."""
        sl = slice(index * SLOTS_PER_DAY, (index + 1) * SLOTS_PER_DAY)
        return self.energy_kwh[sl] * KWH_TO_KW

    def slice_days(self, start: int, stop: int) -> "LoadProfile":
        """Sub-profile covering days [start, stop)."""
        if not 0 <= start < stop <= self.n_days:
            raise ParameterDomainError(f"bad day slice [{start}, {stop}) of {self.n_days}")
        sl = slice(start * SLOTS_PER_DAY, stop * SLOTS_PER_DAY)
        return LoadProfile(
            timestamps=self.timestamps[sl],
            energy_kwh=self.energy_kwh[sl],
            profile_type=self.profile_type,
            weather_zone=self.weather_zone,
            source=self.source,
            extra_metadata=self.extra_metadata,
        )

    @property
    def months(self) -> tuple[int, ...]:
        return tuple(sorted({s.month for s in self.timestamps}))


_METADATA_KEYS = ("profile_type", "weather_zone")


def _parse_timestamp(text: str, row: int) -> dt.datetime:
    try:
        stamp = dt.datetime.fromisoformat(text)
    except ValueError:
        raise CsvFormatError(f"malformed timestamp {text!r}", row=row, column="timestamp")
    if stamp.tzinfo is not None:
        raise CsvFormatError("timestamps must be local (no timezone)", row=row, column="timestamp")
    if stamp.minute % 15 or stamp.second or stamp.microsecond:
        raise CsvFormatError(
            f"timestamp {text!r} is not on the 15-minute grid", row=row, column="timestamp"
        )
    return stamp


def ingest_csv(source) -> LoadProfile:
    """Parse the profile CSV schema from a path or text stream."""
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()

    meta = {"profile_type": "residential", "weather_zone": "north"}
    extra: list[tuple[str, str]] = []
    row = 0
    n_lines = len(lines)
    while row < n_lines and lines[row].startswith("#"):
        body = lines[row][1:].strip()
        if ":" not in body:
            raise CsvFormatError("metadata line must be '# key: value'", row=row + 1)
        key, _, value = body.partition(":")
        key = key.strip()
        if key in _METADATA_KEYS:
            meta[key] = value.strip()
        else:
            extra.append((key, value.strip()))
        row += 1
    if row >= n_lines or lines[row].strip() != "timestamp,kwh":
        raise CsvFormatError("expected header 'timestamp,kwh'", row=row + 1)
    row += 1

    stamps: list[dt.datetime] = []
    energies: list[float] = []
    prev: dt.datetime | None = None
    for line_no in range(row, n_lines):
        line = lines[line_no].rstrip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise CsvFormatError(f"expected 2 fields, got {len(parts)}", row=line_no + 1)
        stamp = _parse_timestamp(parts[0], line_no + 1)
        try:
            kwh = float(parts[1])
        except ValueError:
            raise CsvFormatError(f"malformed energy {parts[1]!r}", row=line_no + 1, column="kwh")
        if not np.isfinite(kwh) or kwh < 0.0:
            raise CsvFormatError(f"negative or non-finite energy {kwh}", row=line_no + 1, column="kwh")
        if prev is not None:
            gap = stamp - prev
            if gap <= dt.timedelta(0):
                raise CsvFormatError(
                    f"timestamp {stamp.isoformat()} does not increase", row=line_no + 1,
                    column="timestamp",
                )
            if stamp.date() == prev.date() and gap != dt.timedelta(minutes=15):
                raise CsvFormatError(
                    f"cadence gap: expected {(prev + dt.timedelta(minutes=15)).isoformat()}",
                    row=line_no + 1,
                    column="timestamp",
                )
        prev = stamp
        stamps.append(stamp)
        energies.append(kwh)
    if not stamps:
        raise CsvFormatError("no data rows", row=n_lines)
    try:
        return LoadProfile(
            timestamps=tuple(stamps),
            energy_kwh=np.array(energies),
            profile_type=meta["profile_type"],
            weather_zone=meta["weather_zone"],
            source="measured",
            extra_metadata=tuple(extra),
        )
    except (ParameterDomainError, GridShapeError) as exc:
        raise CsvFormatError(str(exc)) from exc


def export_profile_csv(profile: LoadProfile, path) -> None:
    """Canonical writer; ingest(export(p)) round-trips byte-identically."""
    lines = [
        f"# profile_type: {profile.profile_type}",
        f"# weather_zone: {profile.weather_zone}",
    ]
    lines += [f"# {k}: {v}" for k, v in profile.extra_metadata]
    lines += [
        "timestamp,kwh",
    ]
    for stamp, kwh in zip(profile.timestamps, profile.energy_kwh):
        lines.append(f"{stamp.isoformat(timespec='minutes')},{float(kwh)!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


# ---------------------------------------------------------------------------
# Synthetic profiles
# ---------------------------------------------------------------------------

# Daily shape per month: flat base (kW) plus circular Gaussian bumps
# (center hour, width hours, amplitude kW).  Winter months carry the
# morning/evening double peak, summer months a broad afternoon peak from
# cooling load, shoulder months a milder double peak.  The negative bump is
# the small-hours dip; its curvature keeps the daily minimum sharp, so only
# a handful of quarter hours sit near the scaled-target floor.
_MONTH_SHAPES: dict[int, tuple[float, tuple[tuple[float, float, float], ...]]] = {
    1: (30.0, ((3.4, 1.2, -6.0), (7.5, 1.6, 13.0), (19.2, 2.4, 45.0))),
    2: (29.0, ((3.4, 1.2, -6.0), (7.6, 1.6, 12.0), (19.1, 2.4, 40.0))),
    3: (27.0, ((3.5, 1.2, -5.5), (7.7, 1.7, 10.0), (19.4, 2.5, 28.0))),
    4: (26.0, ((3.5, 1.2, -5.5), (7.8, 1.8, 10.0), (19.5, 2.6, 20.0))),
    5: (28.0, ((3.6, 1.2, -5.5), (8.0, 2.0, 7.0), (17.5, 3.0, 24.0))),
    6: (32.0, ((3.6, 1.2, -6.0), (8.0, 2.0, 6.0), (16.8, 3.2, 40.0))),
    7: (34.0, ((3.6, 1.2, -6.5), (8.0, 2.0, 6.0), (16.5, 3.4, 52.0))),
    8: (34.0, ((3.6, 1.2, -6.5), (8.0, 2.0, 6.0), (16.6, 3.3, 50.0))),
    9: (30.0, ((3.5, 1.2, -6.0), (7.9, 1.9, 7.0), (17.2, 3.0, 32.0))),
    10: (27.0, ((3.5, 1.2, -5.5), (7.6, 1.7, 9.0), (19.3, 2.6, 24.0))),
    11: (28.0, ((3.4, 1.2, -5.5), (7.5, 1.6, 11.0), (19.2, 2.5, 32.0))),
    12: (30.0, ((3.4, 1.2, -6.0), (7.5, 1.6, 13.0), (19.1, 2.4, 43.0))),
}

# Bounded noise: per-day factor from a clipped normal plus tiny per-slot
# jitter.  Day-level noise is irreducible for a calendar feature map, so it
# is kept well below the deterministic shape variation.
_DAY_NOISE_SD = 0.002
_DAY_NOISE_CLIP = 2.5
_SLOT_NOISE = 0.001
_WEEKEND_FACTOR = 1.04


def _circular_bump(hours: np.ndarray, center: float, width: float) -> np.ndarray:
    out = np.zeros_like(hours)
    for k in (-1, 0, 1):
        z = (hours - center + 24.0 * k) / width
        out += np.exp(-0.5 * z * z)
    return out


def synthesize_profile(
    month: int,
    days: int | None = None,
    seed: int = 0,
    year: int = DEFAULT_YEAR,
) -> LoadProfile:
    """Deterministic synthetic cluster profile for one month.

    Starts on the first of the month and covers ``days`` consecutive days
    (default: the whole month), spilling into the next month if asked for
    more.
    """
    if not 1 <= month <= 12:
        raise ParameterDomainError(f"month must be 1..12, got {month}")
    if days is None:
        days = calendar.monthrange(year, month)[1]
    if days < 1:
        raise ParameterDomainError(f"days must be >= 1, got {days}")
    rng = np.random.default_rng(seed)
    hours = (np.arange(SLOTS_PER_DAY) + 0.5) * SLOT_HOURS
    start = dt.datetime(year, month, 1)

    stamps: list[dt.datetime] = []
    energy = np.empty(days * SLOTS_PER_DAY)
    for d in range(days):
        day_start = start + dt.timedelta(days=d)
        base, bumps = _MONTH_SHAPES[day_start.month]
        kw = np.full(SLOTS_PER_DAY, base)
        for center, width, amp in bumps:
            kw += amp * _circular_bump(hours, center, width)
        if day_start.weekday() >= 5:
            kw = kw * _WEEKEND_FACTOR
        day_factor = 1.0 + _DAY_NOISE_SD * float(
            np.clip(rng.standard_normal(), -_DAY_NOISE_CLIP, _DAY_NOISE_CLIP)
        )
        slot_jitter = 1.0 + rng.uniform(-_SLOT_NOISE, _SLOT_NOISE, SLOTS_PER_DAY)
        kw = kw * day_factor * slot_jitter
        energy[d * SLOTS_PER_DAY : (d + 1) * SLOTS_PER_DAY] = kw * SLOT_HOURS
        stamps.extend(day_start + dt.timedelta(minutes=15 * i) for i in range(SLOTS_PER_DAY))

    return LoadProfile(
        timestamps=tuple(stamps),
        energy_kwh=energy,
        profile_type="residential",
        weather_zone="north",
        source="synthetic",
    )


# ---------------------------------------------------------------------------
# Features
# ---------------------------------------------------------------------------

FEATURE_NAMES = (
    "quarter_linear",
    "quarter_sin",
    "quarter_cos",
    "day_of_week",
    "is_weekend",
    "month_linear",
)


def build_features(timestamp: dt.datetime) -> np.ndarray:
    """Default calendar feature map, dimension 6, components in [-1, 1].

    The cyclic sin/cos pair keeps midnight continuous; the linear quarter
    index keeps slots inside a day ordered.
    """
    if timestamp.minute % 15 or timestamp.second or timestamp.microsecond:
        raise ParameterDomainError(f"timestamp {timestamp} is not on the 15-minute grid")
    quarter = timestamp.hour * 4 + timestamp.minute // 15
    angle = 2.0 * np.pi * quarter / SLOTS_PER_DAY
    weekday = timestamp.weekday()
    return np.array(
        [
            quarter / 95.0,
            np.sin(angle),
            np.cos(angle),
            weekday / 6.0,
            1.0 if weekday >= 5 else 0.0,
            (timestamp.month - 1) / 11.0,
        ]
    )


# ---------------------------------------------------------------------------
# Scaling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Scaler:
    """Per-dimension min-max scaling for features and target.

    Maps the fitted [min, max] onto [0, 1]; constant dimensions map to 0.5
    and invert back to the constant.
    """

    feature_min: np.ndarray
    feature_max: np.ndarray
    target_min: float
    target_max: float

    def __post_init__(self):
        fmin = np.asarray(self.feature_min, dtype=float)
        fmax = np.asarray(self.feature_max, dtype=float)
        if fmin.shape != fmax.shape or fmin.ndim != 1:
            raise GridShapeError("feature_min/feature_max must be 1-D and equal length")
        if np.any(fmax < fmin) or self.target_max < self.target_min:
            raise ParameterDomainError("max must be >= min per dimension")
        if not (np.all(np.isfinite(fmin)) and np.all(np.isfinite(fmax))):
            raise ParameterDomainError("scaler bounds must be finite")
        object.__setattr__(self, "feature_min", fmin)
        object.__setattr__(self, "feature_max", fmax)

    @staticmethod
    def _forward(x: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        span = hi - lo
        with np.errstate(invalid="ignore", divide="ignore"):
            out = (x - lo) / np.where(span > 0.0, span, 1.0)
        return np.where(span > 0.0, out, 0.5)

    @staticmethod
    def _backward(y: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        span = hi - lo
        return np.where(span > 0.0, lo + y * span, lo)

    def transform_features(self, features: np.ndarray) -> np.ndarray:
        f = np.asarray(features, dtype=float)
        if f.shape[-1] != self.feature_min.shape[0]:
            raise GridShapeError("feature dimension mismatch")
        return self._forward(f, self.feature_min, self.feature_max)

    def inverse_features(self, scaled: np.ndarray) -> np.ndarray:
        f = np.asarray(scaled, dtype=float)
        if f.shape[-1] != self.feature_min.shape[0]:
            raise GridShapeError("feature dimension mismatch")
        return self._backward(f, self.feature_min, self.feature_max)

    def transform_targets(self, targets: np.ndarray) -> np.ndarray:
        t = np.asarray(targets, dtype=float)
        lo = np.asarray(self.target_min)
        hi = np.asarray(self.target_max)
        return self._forward(t, lo, hi)

    def inverse_targets(self, scaled: np.ndarray) -> np.ndarray:
        t = np.asarray(scaled, dtype=float)
        lo = np.asarray(self.target_min)
        hi = np.asarray(self.target_max)
        return self._backward(t, lo, hi)

    def to_json_dict(self) -> dict:
        return {
            "feature_min": [float(v).hex() for v in self.feature_min],
            "feature_max": [float(v).hex() for v in self.feature_max],
            "target_min": float(self.target_min).hex(),
            "target_max": float(self.target_max).hex(),
        }

    @staticmethod
    def from_json_dict(doc: dict) -> "Scaler":
        return Scaler(
            feature_min=np.array([float.fromhex(v) for v in doc["feature_min"]]),
            feature_max=np.array([float.fromhex(v) for v in doc["feature_max"]]),
            target_min=float.fromhex(doc["target_min"]),
            target_max=float.fromhex(doc["target_max"]),
        )


def fit_scaler(features: np.ndarray, targets: np.ndarray) -> Scaler:
    """Fit per-dimension [min, max] on at least two rows."""
    f = np.asarray(features, dtype=float)
    t = np.asarray(targets, dtype=float)
    if f.ndim != 2 or t.ndim != 1 or f.shape[0] != t.shape[0]:
        raise GridShapeError("features must be (N, n) and targets (N,)")
    if f.shape[0] < 2:
        raise ParameterDomainError("scaler needs at least 2 rows")
    if not (np.all(np.isfinite(f)) and np.all(np.isfinite(t))):
        raise ParameterDomainError("scaler input must be finite")
    return Scaler(
        feature_min=f.min(axis=0),
        feature_max=f.max(axis=0),
        target_min=float(t.min()),
        target_max=float(t.max()),
    )


# ---------------------------------------------------------------------------
# Scenarios and datasets
# ---------------------------------------------------------------------------


class ScenarioKind(enum.Enum):
    NO_PHEV = "nophev"
    UNIFORM_TC = "uniform"
    NONUNIFORM_TC = "nonuniform"

    @staticmethod
    def parse(text: str) -> "ScenarioKind":
        key = text.strip().lower().replace("-", "").replace("_", "")
        for kind in ScenarioKind:
            if kind.value.replace("-", "") == key:
                return kind
        raise ParameterDomainError(
            f"unknown scenario {text!r}; expected one of "
            f"{[k.value for k in ScenarioKind]}"
        )


@dataclass(frozen=True)
class Scenario:
    """One PHEV demand scenario: the row label of the experiment table."""

    kind: ScenarioKind
    fleet_size: int = 1
    demand_curve: ExpectedDemandCurve | None = None

    def __post_init__(self):
        if self.fleet_size < 0 or int(self.fleet_size) != self.fleet_size:
            raise ParameterDomainError(f"fleet_size must be a count, got {self.fleet_size}")
        if self.kind is ScenarioKind.NO_PHEV:
            if self.demand_curve is not None:
                raise ParameterDomainError("no-PHEV scenario must not carry a demand curve")
        elif self.demand_curve is None:
            raise ParameterDomainError(f"{self.kind.value} scenario needs a demand curve")


def make_scenario(
    kind: ScenarioKind | str,
    fleet_size: int = 1,
    arrival: ArrivalTimeDist = DEFAULT_ARRIVAL,
    outlet_power_kw: float = DEFAULT_OUTLET_POWER_KW,
    nonuniform: ChargingTimeDist | None = None,
    grid_slots: int = SLOTS_PER_DAY,
) -> Scenario:
    """Build a scenario with its expected demand curve from the defaults:
    uniform durations are moment-matched to the standard mean/variance,
    non-uniform ones use the shipped histogram unless one is supplied."""
    if isinstance(kind, str):
        kind = ScenarioKind.parse(kind)
    if kind is ScenarioKind.NO_PHEV:
        return Scenario(kind=kind, fleet_size=0, demand_curve=None)
    if kind is ScenarioKind.UNIFORM_TC:
        charging: ChargingTimeDist = moment_match(
            "uniform", DEFAULT_CHARGING_MEAN_H, DEFAULT_CHARGING_VARIANCE_H2
        )
    else:
        charging = nonuniform if nonuniform is not None else default_nonuniform_charging()
    curve = expected_demand_curve(arrival, charging, outlet_power_kw, grid_slots)
    return Scenario(kind=kind, fleet_size=fleet_size, demand_curve=curve)


@dataclass(frozen=True)
class SupervisedDataset:
    """Scaled training pairs plus everything needed to undo the scaling."""

    features: np.ndarray
    targets: np.ndarray
    scaler: Scaler
    months: tuple[int, ...]
    scenario: ScenarioKind
    timestamps: tuple[dt.datetime, ...]
    features_raw: np.ndarray
    target_kw: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.features, dtype=float)
        t = np.asarray(self.targets, dtype=float)
        if f.ndim != 2 or t.ndim != 1 or f.shape[0] != t.shape[0]:
            raise GridShapeError("features must be (N, n) and targets (N,)")
        tol = 1e-12
        if np.any(f < -tol) or np.any(f > 1.0 + tol) or np.any(t < -tol) or np.any(t > 1.0 + tol):
            raise ParameterDomainError("scaled entries must lie in [0, 1]")
        object.__setattr__(self, "features", np.clip(f, 0.0, 1.0))
        object.__setattr__(self, "targets", np.clip(t, 0.0, 1.0))

    @property
    def n_rows(self) -> int:
        return self.targets.shape[0]


def assemble_dataset(profile: LoadProfile, scenario: Scenario) -> SupervisedDataset:
    """One row per quarter hour: calendar features against scaled total
    demand (base load plus the scenario's fleet curve)."""
    curve = scenario.demand_curve
    if curve is not None and curve.grid_slots != SLOTS_PER_DAY:
        raise GridShapeError(
            f"scenario curve has {curve.grid_slots} slots, profile days have {SLOTS_PER_DAY}"
        )
    n_days = profile.n_days
    target_kw = np.empty(n_days * SLOTS_PER_DAY)
    for d in range(n_days):
        target_kw[d * SLOTS_PER_DAY : (d + 1) * SLOTS_PER_DAY] = total_demand(
            profile.day_kw(d), curve, scenario.fleet_size
        )
    features_raw = np.array([build_features(ts) for ts in profile.timestamps])
    scaler = fit_scaler(features_raw, target_kw)
    return SupervisedDataset(
        features=scaler.transform_features(features_raw),
        targets=scaler.transform_targets(target_kw),
        scaler=scaler,
        months=profile.months,
        scenario=scenario.kind,
        timestamps=profile.timestamps,
        features_raw=features_raw,
        target_kw=target_kw,
    )


def export_dataset_csv(dataset: SupervisedDataset, path) -> None:
    """Inspection export: raw features and the unscaled kW target."""
    names = ",".join(f"f{i+1}" for i in range(dataset.features_raw.shape[1]))
    lines = [f"timestamp,{names},target_kw"]
    for ts, row, kw in zip(dataset.timestamps, dataset.features_raw, dataset.target_kw):
        feats = ",".join(repr(float(v)) for v in row)
        lines.append(f"{ts.isoformat(timespec='minutes')},{feats},{float(kw)!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")
