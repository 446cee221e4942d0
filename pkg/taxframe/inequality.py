from __future__ import annotations

import logging
import warnings
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .accounts import REGION_ORDER, Region
from .config import Config
from .errors import (
    DistributionError,
    GroupMismatchError,
    LorenzInvariantError,
    MissingWeightsWarning,
    ZeroTotalIncomeError,
)

logger = logging.getLogger(__name__)

GINI_ESTIMATOR = "grouped-trapezoid"
MISSING_WEIGHTS_MESSAGE = "no population weights given; skipping the combined urban+rural Gini"
_KNOT_TOLERANCE = 1e-12
_SLOPE_TOLERANCE = 1e-9


class RegionScope(str, Enum):
    ALL = "All"
    URBAN = "Urban"
    RURAL = "Rural"

    @classmethod
    def parse(cls, value: str) -> "RegionScope":
        cleaned = value.strip().lower()
        for scope in cls:
            if scope.value.lower() == cleaned:
                return scope
        raise ValueError(f"unknown scope {value!r}")

    @property
    def region(self) -> Region | None:
        return None if self is RegionScope.ALL else Region(self.value)

    @property
    def slug(self) -> str:
        return self.value.lower()


@dataclass(frozen=True)
class GroupedDistribution:
    population_shares: np.ndarray
    incomes: np.ndarray
    scope: RegionScope = RegionScope.ALL
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        shares = np.array(self.population_shares, dtype=float, copy=True)
        incomes = np.array(self.incomes, dtype=float, copy=True)
        if shares.ndim != 1 or shares.shape != incomes.shape or shares.size == 0:
            raise DistributionError("population shares and incomes must be matching 1-d sequences")
        if self.labels and len(self.labels) != shares.size:
            raise DistributionError("one label per group is required")
        if not (np.isfinite(shares).all() and np.isfinite(incomes).all()):
            raise DistributionError("population shares and incomes must be finite")
        if (shares <= 0).any():
            raise DistributionError("population shares must be positive")
        if abs(shares.sum() - 1) > Config.WEIGHT_TOLERANCE:
            raise DistributionError(f"population shares sum to {shares.sum()!r}, not 1")
        if (incomes < 0).any():
            raise DistributionError("group incomes must be nonnegative")
        shares.setflags(write=False)
        incomes.setflags(write=False)
        object.__setattr__(self, "population_shares", shares)
        object.__setattr__(self, "incomes", incomes)
        object.__setattr__(self, "labels", tuple(self.labels))

    def __len__(self) -> int:
        return self.incomes.size

    @property
    def per_capita(self) -> np.ndarray:
        return self.incomes / self.population_shares

    def scaled(self, factor: float) -> "GroupedDistribution":
        return GroupedDistribution(self.population_shares, self.incomes * factor, self.scope, self.labels)


@dataclass(frozen=True)
class LorenzCurve:
    p: np.ndarray
    L: np.ndarray

    @property
    def knots(self) -> list[list[float]]:
        return [[float(p), float(L)] for p, L in zip(self.p, self.L)]


@dataclass(frozen=True)
class GiniChange:
    g_before: float
    g_after: float
    delta: float
    before: LorenzCurve
    after: LorenzCurve


class Verdict(str, Enum):
    REGRESSIVE = "Regressive"
    PROPORTIONAL = "Proportional"
    PROGRESSIVE = "Progressive"


@dataclass(frozen=True)
class Regressivity:
    kendall_tau: float
    verdict: Verdict


def distribution_from_incomes(
    incomes,
    scope: RegionScope = RegionScope.ALL,
    labels: Sequence[str] = (),
    population_shares=None,
) -> GroupedDistribution:
    """Deciles are equal-population groups unless shares are given."""
    incomes = np.asarray(incomes, dtype=float)
    if population_shares is None:
        population_shares = np.full(incomes.shape, 1.0 / max(incomes.size, 1))
    return GroupedDistribution(population_shares, incomes, scope, tuple(labels))


def check_lorenz(curve: LorenzCurve) -> LorenzCurve:
    p, L = curve.p, curve.L
    if p[0] != 0 or L[0] != 0 or p[-1] != 1 or L[-1] != 1:
        raise LorenzInvariantError("Lorenz curve must run from (0, 0) to (1, 1)")
    dp, dL = np.diff(p), np.diff(L)
    if (dp <= 0).any() or (dL < 0).any():
        raise LorenzInvariantError("Lorenz knots must be strictly increasing in p and nondecreasing in L")
    if (L > p + _KNOT_TOLERANCE).any():
        raise LorenzInvariantError("Lorenz curve rises above the equality diagonal")
    slopes = dL / dp
    if (np.diff(slopes) < -_SLOPE_TOLERANCE * max(1.0, float(slopes.max()))).any():
        raise LorenzInvariantError("Lorenz curve is not convex")
    return curve


def lorenz(dist: GroupedDistribution) -> LorenzCurve:
    total = dist.incomes.sum()
    if not total > 0:
        raise ZeroTotalIncomeError(f"{dist.scope.value} distribution has zero total income")
    order = np.argsort(dist.per_capita, kind="stable")
    p = np.concatenate(([0.0], np.cumsum(dist.population_shares[order]) / dist.population_shares.sum()))
    L = np.concatenate(([0.0], np.cumsum(dist.incomes[order]) / total))
    p[-1] = 1.0
    L[-1] = 1.0
    # Rounding in the cumulative sums can push L a hair above p on near-equal groups.
    L = np.minimum(L, p)
    p.setflags(write=False)
    L.setflags(write=False)
    return check_lorenz(LorenzCurve(p=p, L=L))


def gini(curve: LorenzCurve) -> float:
    area = np.sum(np.diff(curve.p) * (curve.L[1:] + curve.L[:-1]))
    return max(0.0, float(1.0 - area))


def gini_delta(before: GroupedDistribution, after: GroupedDistribution) -> GiniChange:
    if (
        before.scope != after.scope
        or len(before) != len(after)
        or not np.array_equal(before.population_shares, after.population_shares)
        or (before.labels and after.labels and before.labels != after.labels)
    ):
        raise GroupMismatchError("before and after distributions must cover the same groups and shares")
    curve_before, curve_after = lorenz(before), lorenz(after)
    g_before, g_after = gini(curve_before), gini(curve_after)
    return GiniChange(
        g_before=g_before,
        g_after=g_after,
        delta=g_after - g_before,
        before=curve_before,
        after=curve_after,
    )


def kendall_tau(values) -> float:
    """Kendall tau-a between position (1..k) and ``values``, ties counting zero."""
    values = np.asarray(values, dtype=float)
    k = values.size
    signs = np.sign(values[None, :] - values[:, None])
    upper = np.triu_indices(k, 1)
    return float(signs[upper].sum() / (k * (k - 1) / 2))


def regressivity(pct_dy) -> Regressivity:
    pct_dy = np.asarray(pct_dy, dtype=float)
    if pct_dy.ndim != 1 or pct_dy.size < 2:
        raise DistributionError("regressivity needs at least two income classes")
    if not np.isfinite(pct_dy).all():
        raise DistributionError("relative burdens must be finite")
    tau = kendall_tau(pct_dy)
    threshold = Config.REGRESSIVITY_THRESHOLD
    if tau <= -threshold:
        verdict = Verdict.REGRESSIVE
    elif tau >= threshold:
        verdict = Verdict.PROGRESSIVE
    else:
        verdict = Verdict.PROPORTIONAL
    return Regressivity(kendall_tau=tau, verdict=verdict)


def merge_regions(
    urban: GroupedDistribution,
    rural: GroupedDistribution,
    population_weights: Mapping[Region, float],
) -> GroupedDistribution:
    try:
        w_urban = population_weights[Region.URBAN]
        w_rural = population_weights[Region.RURAL]
    except KeyError as exc:
        raise DistributionError(f"population weight missing for {exc.args[0]}") from exc
    return GroupedDistribution(
        np.concatenate((urban.population_shares * w_urban, rural.population_shares * w_rural)),
        np.concatenate((urban.incomes, rural.incomes)),
        RegionScope.ALL,
        urban.labels + rural.labels if urban.labels and rural.labels else (),
    )


def scope_distributions(
    result,
    population_weights: Mapping[Region, float] | None = None,
    scopes: Sequence[RegionScope] = tuple(RegionScope),
) -> dict[RegionScope, tuple[GroupedDistribution, GroupedDistribution]]:
    """The All scope needs population weights; without them it is skipped with a warning."""
    regional: dict[Region, tuple[GroupedDistribution, GroupedDistribution]] = {}
    for region in REGION_ORDER:
        idx = [i for i, group in enumerate(result.groups) if group.region == region]
        if not idx:
            continue
        scope = RegionScope(region.value)
        labels = tuple(result.groups[i].group_id for i in idx)
        regional[region] = (
            distribution_from_incomes(result.y1[idx], scope, labels),
            distribution_from_incomes(result.y2[idx], scope, labels),
        )

    out: dict[RegionScope, tuple[GroupedDistribution, GroupedDistribution]] = {}
    for scope in scopes:
        if scope is not RegionScope.ALL:
            if scope.region in regional:
                out[scope] = regional[scope.region]
            continue
        if len(regional) == 1:
            (before, after), = regional.values()
            out[scope] = (
                distribution_from_incomes(before.incomes, scope, before.labels),
                distribution_from_incomes(after.incomes, scope, after.labels),
            )
        elif population_weights is None:
            logger.warning(MISSING_WEIGHTS_MESSAGE)
            warnings.warn(MISSING_WEIGHTS_MESSAGE, MissingWeightsWarning, stacklevel=2)
        else:
            (u_before, u_after), (r_before, r_after) = regional[Region.URBAN], regional[Region.RURAL]
            out[scope] = (
                merge_regions(u_before, r_before, population_weights),
                merge_regions(u_after, r_after, population_weights),
            )
    return out
