from __future__ import annotations

import io
import json
import logging
import math
import warnings
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .accounts import DECILES, Region
from .config import Config
from .errors import ConfigError, SchemaError, ZeroImpactWarning
from .fiscal import ImpactResult, IncomeModel
from .inequality import GINI_ESTIMATOR, GroupedDistribution, Regressivity, RegionScope, gini_delta

logger = logging.getLogger(__name__)

IMPACT_COLUMNS = ("class", "y1", "dy", "y2", "pct_dy", "pct_cy")
TOTAL_LABEL = "Total"
NA = "NA"


@dataclass(frozen=True)
class Precision:
    y: int = 0
    dy: int = 2
    pct_dy: int = 7
    pct_cy: int = 2

    def __post_init__(self):
        for name in ("y", "dy", "pct_dy", "pct_cy"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or not 0 <= value <= 15:
                raise ConfigError(f"precision for {name} must be an integer in 0..15")


@dataclass(frozen=True)
class RunConfig:
    sectors_file: Path
    households_file: Path
    scenario_file: Path
    output_dir: Path
    population_weights: Mapping[Region, float] | None = None
    open_model: bool = False
    scope: RegionScope = RegionScope.ALL
    precision: Precision = field(default_factory=Precision)

    def __post_init__(self):
        for name in ("sectors_file", "households_file", "scenario_file", "output_dir"):
            value = getattr(self, name)
            if value is None or not str(value).strip():
                raise ConfigError(f"{name} must be a non-empty path")
            object.__setattr__(self, name, Path(value))
        weights = self.population_weights
        if weights is not None:
            if set(weights) != set(Region):
                raise ConfigError("population weights must name both urban and rural")
            if abs(sum(weights.values()) - 1) > Config.WEIGHT_TOLERANCE:
                raise ConfigError("population weights must sum to 1")


def scope_table(result: ImpactResult, scope: RegionScope) -> pd.DataFrame:
    """Unrounded per-class rows for one scope; All sums urban and rural per decile."""
    region = scope.region
    frame = pd.DataFrame(
        {
            "class": [group.decile for group in result.groups],
            "region": [group.region for group in result.groups],
            "y1": result.y1,
            "dy": result.dy,
            "y2": result.y2,
        }
    )
    if region is not None:
        frame = frame[frame["region"] == region]
    table = (
        frame.groupby("class", sort=True)[["y1", "dy", "y2"]]
        .sum()
        .reindex([d for d in DECILES if d in set(frame["class"])])
    )
    table.index.name = "class"
    total = table["dy"].sum()
    with np.errstate(divide="ignore", invalid="ignore"):
        table["pct_dy"] = np.where(table["y1"] != 0, table["dy"] / table["y1"], np.nan)
        table["pct_cy"] = table["dy"] / total if total != 0 else np.nan
    return table


def _fmt(value: float, decimals: int, *, percent: bool = False) -> str:
    if value is None or not math.isfinite(value):
        return NA
    if percent:
        value *= 100
    text = f"{round(value, decimals) + 0.0:.{decimals}f}"
    return f"{text}%" if percent else text


def _csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, lineterminator="\n")


def emit_impact_table(
    result: ImpactResult, scope: RegionScope = RegionScope.ALL, precision: Precision | None = None
) -> str:
    precision = precision or Precision()
    table = scope_table(result, scope)
    y1, dy, y2 = (float(table[c].sum()) for c in ("y1", "dy", "y2"))
    total_row = {
        "y1": y1,
        "dy": dy,
        "y2": y2,
        "pct_dy": dy / y1 if y1 else math.nan,
        "pct_cy": 1.0 if dy != 0 else math.nan,
    }
    rows = [(str(cls), row) for cls, row in table.to_dict("index").items()]
    rows.append((TOTAL_LABEL, total_row))
    out = pd.DataFrame(
        [
            {
                "class": label,
                "y1": _fmt(row["y1"], precision.y),
                "dy": _fmt(row["dy"], precision.dy),
                "y2": _fmt(row["y2"], precision.y),
                "pct_dy": _fmt(row["pct_dy"], precision.pct_dy, percent=True),
                "pct_cy": _fmt(row["pct_cy"], precision.pct_cy, percent=True),
            }
            for label, row in rows
        ],
        columns=IMPACT_COLUMNS,
    )
    return _csv(out)


def _parse_cell(value: str) -> float:
    value = value.strip()
    if value == NA:
        return math.nan
    if value.endswith("%"):
        return float(value[:-1]) / 100
    return float(value)


def read_impact_table(source: str | Path) -> pd.DataFrame:
    if isinstance(source, Path):
        source = source.read_text(encoding="utf-8")
    frame = pd.read_csv(io.StringIO(source), dtype=str, keep_default_na=False)
    if tuple(frame.columns) != IMPACT_COLUMNS:
        raise SchemaError(f"impact table header must be {','.join(IMPACT_COLUMNS)}")
    try:
        values = frame.set_index("class").apply(lambda column: column.map(_parse_cell))
    except ValueError as exc:
        raise SchemaError(f"impact table has a non-numeric cell: {exc}") from exc
    return values.astype(float)


def emit_contribution_shares(result: ImpactResult, precision: Precision | None = None) -> str:
    precision = precision or Precision()
    table = scope_table(result, RegionScope.ALL)
    total = float(table["dy"].sum())
    if total == 0:
        message = "total income decline is zero; contribution shares emitted as NA"
        logger.warning(message)
        warnings.warn(message, ZeroImpactWarning, stacklevel=2)
    rows = [
        {"class": str(cls), "pct_cy": _fmt(share, precision.pct_cy, percent=True)}
        for cls, share in table["pct_cy"].items()
    ]
    rows.append({"class": TOTAL_LABEL, "pct_cy": _fmt(1.0 if total else math.nan, precision.pct_cy, percent=True)})
    return _csv(pd.DataFrame(rows, columns=("class", "pct_cy")))


def emit_lorenz_gini(
    before: GroupedDistribution, after: GroupedDistribution, scope: RegionScope | None = None
) -> str:
    change = gini_delta(before, after)
    payload = {
        "scope": (scope or before.scope).value,
        "gini_before": change.g_before,
        "gini_after": change.g_after,
        "delta": change.delta,
        "knots_before": change.before.knots,
        "knots_after": change.after.knots,
        "estimator": GINI_ESTIMATOR,
    }
    return json.dumps(payload, indent=2) + "\n"


def _finite_or_none(value):
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


def emit_diagnostics(
    model: IncomeModel,
    result: ImpactResult,
    regressivity: Mapping[RegionScope, Regressivity] | None = None,
    skipped_scopes: Sequence[RegionScope] = (),
) -> str:
    accounts = model.accounts
    aggregate_multiplier = model.miyazawa.income_multiplier.sum(axis=0)
    payload = {
        "label": result.label,
        "open_model": result.open_model,
        "sectors": model.leontief.n,
        "groups": model.miyazawa.r,
        "leontief": model.leontief.diagnostics.as_dict(),
        "miyazawa": model.miyazawa.diagnostics.as_dict(),
        "tax_revenue": result.tax_revenue,
        "total_decline": result.total_decline,
        "total_decline_open": _finite_or_none(None if result.dy_open is None else result.dy_open.sum()),
        "induced_share": _finite_or_none(result.induced_share),
        "price_changes": dict(zip(accounts.sector_ids, map(float, result.dp))),
        "income_multipliers": dict(zip(accounts.sector_ids, map(float, aggregate_multiplier))),
        "regressivity": {
            scope.value: {"kendall_tau": value.kendall_tau, "verdict": value.verdict.value}
            for scope, value in (regressivity or {}).items()
        },
        "skipped_scopes": [scope.value for scope in skipped_scopes],
        "gini_estimator": GINI_ESTIMATOR,
    }
    return json.dumps(payload, indent=2) + "\n"
