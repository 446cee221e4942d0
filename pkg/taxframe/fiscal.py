"""Carbon tax -> unit-cost rise dv -> price rise dp -> demand cut df -> household income DY."""

from __future__ import annotations

import json
import logging
import warnings
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .accounts import EmissionProfile, HouseholdAccounts, HouseholdGroup, SectorAccounts, load_emissions
from .config import Config
from .errors import DimensionError, MissingFileError, ScenarioError, ZeroImpactWarning
from .forms import validate_scenario_payload
from .leontief import LeontiefSystem, leontief_inverse, price_model, technical_coefficients
from .miyazawa import (
    MiyazawaSystem,
    build_miyazawa,
    consumption_coefficients,
    income_coefficients,
    income_impact,
)

logger = logging.getLogger(__name__)

# Intensities are kg per MILLION Rp of output, rates are Rp per kg.
RP_PER_MILLION_RP = 1e6
ZERO_IMPACT_MESSAGE = "scenario produces no income decline; contribution shares are undefined"


@dataclass(frozen=True)
class TaxScenario:
    emissions: EmissionProfile
    rate: float = Config.DEFAULT_TAX_RATE
    pass_through: float = Config.DEFAULT_PASS_THROUGH
    label: str = "carbon tax"

    def __post_init__(self):
        if not np.isfinite(self.rate) or self.rate < 0:
            raise ScenarioError(f"tax rate must be a nonnegative number, got {self.rate!r}")
        if not np.isfinite(self.pass_through) or not 0 <= self.pass_through <= 1:
            raise ScenarioError(f"pass-through must lie in [0, 1], got {self.pass_through!r}")

    def scaled(self, factor: float) -> "TaxScenario":
        return replace(self, emissions=self.emissions.scaled(factor))


@dataclass(frozen=True)
class ImpactResult:
    groups: tuple[HouseholdGroup, ...]
    y1: np.ndarray
    dy: np.ndarray
    y2: np.ndarray
    pct_dy: np.ndarray
    pct_cy: np.ndarray
    dv: np.ndarray = field(default_factory=lambda: np.zeros(0))
    dp: np.ndarray = field(default_factory=lambda: np.zeros(0))
    df: np.ndarray = field(default_factory=lambda: np.zeros(0))
    tax_revenue: float = 0.0
    dy_open: np.ndarray | None = None
    label: str = ""
    open_model: bool = False

    @property
    def total_decline(self) -> float:
        return float(self.dy.sum())

    @property
    def induced_share(self) -> float | None:
        """Fraction of the headline decline that runs through induced consumption."""
        if self.dy_open is None or self.open_model or self.total_decline == 0:
            return None
        return float((self.dy.sum() - self.dy_open.sum()) / self.dy.sum())


@dataclass(frozen=True)
class IncomeModel:
    accounts: SectorAccounts
    households: HouseholdAccounts
    leontief: LeontiefSystem
    miyazawa: MiyazawaSystem


def prepare_model(accounts: SectorAccounts, hh: HouseholdAccounts) -> IncomeModel:
    A = technical_coefficients(accounts)
    leontief = leontief_inverse(A)
    V = income_coefficients(hh, accounts)
    C = consumption_coefficients(hh)
    return IncomeModel(accounts, hh, leontief, build_miyazawa(V, C, leontief))


def tax_cost_vector(scenario: TaxScenario) -> np.ndarray:
    """Tax per unit of output value: rate [Rp/kg] * e [kg/million Rp] / 1e6."""
    return scenario.rate * scenario.emissions.e / RP_PER_MILLION_RP


def demand_shock(dp: np.ndarray, f: np.ndarray, pass_through: float) -> np.ndarray:
    """Nominal budgets held fixed: real demand falls in proportion to the price rise."""
    dp = np.asarray(dp, dtype=float)
    f = np.asarray(f, dtype=float)
    if dp.shape != f.shape:
        raise DimensionError(f"price change {dp.shape} and final demand {f.shape} differ")
    return -pass_through * dp * f + 0.0


def impact_from_declines(
    groups: Sequence[HouseholdGroup],
    y1,
    decline,
    **pipeline,
) -> ImpactResult:
    """Table-1 accounting (Y2, %DY, %CY) for given baseline incomes and declines."""
    y1 = np.asarray(y1, dtype=float)
    decline = np.asarray(decline, dtype=float) + 0.0
    if y1.shape != decline.shape or y1.shape != (len(groups),):
        raise DimensionError("baseline incomes and declines must have one entry per group")
    y2 = y1 - decline
    pct_dy = np.full_like(y1, np.nan)
    np.divide(decline, y1, out=pct_dy, where=y1 != 0)
    total = decline.sum()
    if total == 0:
        logger.warning(ZERO_IMPACT_MESSAGE)
        warnings.warn(ZERO_IMPACT_MESSAGE, ZeroImpactWarning, stacklevel=2)
        pct_cy = np.full_like(y1, np.nan)
    else:
        pct_cy = decline / total
    arrays = {"y1": y1, "dy": decline, "y2": y2, "pct_dy": pct_dy, "pct_cy": pct_cy}
    for key in ("dv", "dp", "df", "dy_open"):
        if pipeline.get(key) is not None:
            arrays[key] = np.asarray(pipeline[key], dtype=float)
    for array in arrays.values():
        array.setflags(write=False)
    extras = {k: v for k, v in pipeline.items() if k not in arrays}
    return ImpactResult(groups=tuple(groups), **arrays, **extras)


def run_scenario(
    accounts: SectorAccounts,
    hh: HouseholdAccounts,
    scenario: TaxScenario,
    *,
    open_model: bool = False,
    model: IncomeModel | None = None,
) -> ImpactResult:
    model = model or prepare_model(accounts, hh)
    emissions = scenario.emissions.aligned(accounts.sector_ids)
    dv = tax_cost_vector(replace(scenario, emissions=emissions))
    dp = price_model(model.leontief, dv)
    df = demand_shock(dp, accounts.f, scenario.pass_through)
    dy_open = income_impact(model.miyazawa, df, open_model=True)
    dy = dy_open if open_model else income_impact(model.miyazawa, df)
    tax_revenue = float(dv @ accounts.x)
    logger.info(
        "Scenario %r: rate=%s pass_through=%s revenue=%.6g total decline=%.6g",
        scenario.label,
        scenario.rate,
        scenario.pass_through,
        tax_revenue,
        -dy.sum(),
    )
    return impact_from_declines(
        hh.groups,
        hh.y0,
        -dy,
        dv=dv,
        dp=dp,
        df=df,
        dy_open=-dy_open + 0.0,
        tax_revenue=tax_revenue,
        label=scenario.label,
        open_model=open_model,
    )


def calibrate_intensity_scale(
    accounts: SectorAccounts,
    hh: HouseholdAccounts,
    scenario: TaxScenario,
    target_total: float,
    *,
    open_model: bool = False,
    model: IncomeModel | None = None,
) -> float:
    """Global emission-intensity factor that makes total DY equal ``target_total``.

    Every pipeline stage is linear in the intensities, so one run fixes the factor.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ZeroImpactWarning)
        result = run_scenario(accounts, hh, scenario, open_model=open_model, model=model)
    total = result.total_decline
    if not total > 0:
        raise ScenarioError("cannot calibrate a scenario that produces no income decline")
    scale = target_total / total
    logger.info("Calibrated emission scale %.10g for target decline %.6g", scale, target_total)
    return scale


def load_scenario(path: str | Path, sector_ids: Sequence[str]) -> TaxScenario:
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"file not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ScenarioError(f"{path.name}: invalid JSON ({exc})") from exc
    cleaned = validate_scenario_payload(payload, source=path.name)
    emissions_path = Path(cleaned["emissions_file"])
    if not emissions_path.is_absolute():
        emissions_path = path.parent / emissions_path
    return TaxScenario(
        emissions=load_emissions(emissions_path, sector_ids),
        rate=cleaned["rate"],
        pass_through=cleaned["pass_through"],
        label=cleaned["label"],
    )
