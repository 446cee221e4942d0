from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
import pandas as pd

from .config import Config
from .errors import (
    BalanceError,
    ConsumptionShareError,
    DimensionError,
    GroupSetError,
    MissingFileError,
    MissingSectorError,
    NegativeIntensityError,
    NonFiniteError,
    SchemaError,
    UnknownSectorError,
)

logger = logging.getLogger(__name__)

DECILES = tuple(range(1, 11))
SECTOR_TRAILER = ("final_demand", "value_added", "total_output")
HOUSEHOLD_LEADER = ("group_id", "region", "decile", "kind")
EMISSIONS_HEADER = ("sector_id", "kg_co2e_per_million_rp")
INCOME_KIND = "income"
CONSUMPTION_KIND = "consumption"
_NON_FINITE_TOKENS = {"nan", "inf", "+inf", "-inf", "infinity", "+infinity", "-infinity"}


class Region(str, Enum):
    URBAN = "Urban"
    RURAL = "Rural"

    @classmethod
    def parse(cls, value: str) -> "Region":
        cleaned = value.strip().lower()
        for region in cls:
            if region.value.lower() == cleaned:
                return region
        raise ValueError(f"unknown region {value!r}")


REGION_ORDER = (Region.URBAN, Region.RURAL)


def _frozen(values, dtype=float) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class SectorAccounts:
    sector_ids: tuple[str, ...]
    Z: np.ndarray
    f: np.ndarray
    x: np.ndarray
    va: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "sector_ids", tuple(self.sector_ids))
        for name in ("Z", "f", "x", "va"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        n = len(self.sector_ids)
        if n < 1:
            raise SchemaError("an IO table needs at least one sector")
        if self.Z.shape != (n, n) or any(v.shape != (n,) for v in (self.f, self.x, self.va)):
            raise DimensionError(f"sector arrays do not match {n} sector ids")
        if not all(np.isfinite(v).all() for v in (self.Z, self.f, self.x, self.va)):
            raise NonFiniteError("sector accounts must be finite")
        if (self.Z < 0).any():
            i, j = np.argwhere(self.Z < 0)[0]
            raise SchemaError(f"negative flow from {self.sector_ids[i]!r} to {self.sector_ids[j]!r}")
        if (self.x < 0).any():
            raise SchemaError(f"negative total output for {self.sector_ids[int(np.argmax(self.x < 0))]!r}")

    @property
    def n(self) -> int:
        return len(self.sector_ids)


@dataclass(frozen=True)
class HouseholdGroup:
    region: Region
    decile: int
    group_id: str

    @property
    def key(self) -> tuple[Region, int]:
        return self.region, self.decile

    @property
    def sort_key(self) -> tuple[int, int]:
        return REGION_ORDER.index(self.region), self.decile


@dataclass(frozen=True)
class HouseholdAccounts:
    groups: tuple[HouseholdGroup, ...]
    W: np.ndarray
    H: np.ndarray
    y0: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(self.groups))
        for name in ("W", "H", "y0"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        r = len(self.groups)
        if self.W.ndim != 2 or self.W.shape[0] != r:
            raise DimensionError(f"income matrix must have {r} group rows")
        n = self.W.shape[1]
        if self.H.shape != (n, r) or self.y0.shape != (r,):
            raise DimensionError("consumption matrix or baseline income does not match W")
        if (self.W < 0).any() or (self.H < 0).any():
            raise SchemaError("household income and consumption must be nonnegative")

    @property
    def r(self) -> int:
        return len(self.groups)

    @property
    def n(self) -> int:
        return self.W.shape[1]

    def indices(self, region: Region | None = None) -> np.ndarray:
        return np.array(
            [i for i, group in enumerate(self.groups) if region is None or group.region == region],
            dtype=int,
        )


@dataclass(frozen=True)
class EmissionProfile:
    sector_ids: tuple[str, ...]
    e: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "sector_ids", tuple(self.sector_ids))
        object.__setattr__(self, "e", _frozen(self.e))
        if self.e.shape != (len(self.sector_ids),):
            raise DimensionError("emission vector does not match its sector ids")
        if not np.isfinite(self.e).all():
            raise NonFiniteError("emission intensities must be finite")
        if (self.e < 0).any():
            raise NegativeIntensityError("emission intensities must be nonnegative")

    def scaled(self, factor: float) -> "EmissionProfile":
        return EmissionProfile(self.sector_ids, self.e * factor)

    def aligned(self, sector_ids: Sequence[str]) -> "EmissionProfile":
        if tuple(sector_ids) == self.sector_ids:
            return self
        position = {sector: i for i, sector in enumerate(self.sector_ids)}
        unknown = [sector for sector in self.sector_ids if sector not in set(sector_ids)]
        if unknown:
            raise UnknownSectorError(f"emissions list unknown sector {unknown[0]!r}")
        missing = [sector for sector in sector_ids if sector not in position]
        if missing:
            raise MissingSectorError(f"no emission intensity for sector {missing[0]!r}")
        return EmissionProfile(sector_ids, self.e[[position[s] for s in sector_ids]])


def _read_table(path: str | Path) -> pd.DataFrame:
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"file not found: {path}")
    try:
        frame = pd.read_csv(
            path,
            dtype=str,
            keep_default_na=False,
            na_filter=False,
            encoding="utf-8",
            skipinitialspace=True,
        )
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise SchemaError(f"{path.name}: unreadable CSV ({exc})") from exc
    frame.columns = [str(column).strip() for column in frame.columns]
    return frame.fillna("")


def _numeric_block(
    frame: pd.DataFrame,
    columns: Sequence[str],
    source: str,
    *,
    allow_blank: bool = False,
) -> np.ndarray:
    block = np.empty((len(frame), len(columns)), dtype=float)
    for j, column in enumerate(columns):
        text = frame[column].astype(str).str.strip()
        parsed = pd.to_numeric(text, errors="coerce")
        blank = text.eq("")
        if blank.any() and not allow_blank:
            row = int(np.flatnonzero(blank.to_numpy())[0]) + 2
            raise SchemaError(f"{source}: missing value in column {column!r} (line {row})")
        tokens = text.str.lower().isin(_NON_FINITE_TOKENS)
        unparsed = parsed.isna() & ~blank & ~tokens
        if unparsed.any():
            row = int(np.flatnonzero(unparsed.to_numpy())[0])
            raise SchemaError(
                f"{source}: non-numeric value {text.iloc[row]!r} in column {column!r} (line {row + 2})"
            )
        values = parsed.to_numpy(dtype=float)
        non_finite = tokens.to_numpy() | (~np.isfinite(values) & ~np.isnan(values))
        if non_finite.any():
            row = int(np.flatnonzero(non_finite)[0])
            raise NonFiniteError(f"{source}: non-finite value in column {column!r} (line {row + 2})")
        block[:, j] = values
    return block


def _relative_gaps(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    diff = np.abs(lhs - rhs)
    scale = np.abs(rhs)
    gaps = np.zeros_like(diff)
    nonzero = scale > 0
    gaps[nonzero] = diff[nonzero] / scale[nonzero]
    gaps[~nonzero & (diff > 0)] = np.inf
    return gaps


def _check_balance(lhs, rhs, labels, kind: str, source: str) -> None:
    gaps = _relative_gaps(np.asarray(lhs, dtype=float), np.asarray(rhs, dtype=float))
    worst = int(np.argmax(gaps))
    if gaps[worst] > Config.BALANCE_TOLERANCE:
        raise BalanceError(
            f"{source}: {kind} balance fails for sector {labels[worst]!r} "
            f"({kind} {worst + 1}): {lhs[worst]:.6g} vs total output {rhs[worst]:.6g} "
            f"({gaps[worst]:.2%} gap, tolerance {Config.BALANCE_TOLERANCE:.2%})"
        )


def load_sector_accounts(path: str | Path) -> SectorAccounts:
    frame = _read_table(path)
    source = Path(path).name
    columns = list(frame.columns)
    if len(columns) < 5 or columns[0] != "sector_id" or tuple(columns[-3:]) != SECTOR_TRAILER:
        raise SchemaError(
            f"{source}: header must be sector_id,<sector ids...>,{','.join(SECTOR_TRAILER)}"
        )
    sector_ids = tuple(columns[1:-3])
    if len(set(sector_ids)) != len(sector_ids):
        raise SchemaError(f"{source}: duplicated sector id in header")

    row_ids = frame["sector_id"].astype(str).str.strip()
    if row_ids.duplicated().any():
        raise SchemaError(f"{source}: sector {row_ids[row_ids.duplicated()].iloc[0]!r} has two rows")
    if set(row_ids) != set(sector_ids):
        extra = sorted(set(row_ids) - set(sector_ids))
        missing = sorted(set(sector_ids) - set(row_ids))
        raise SchemaError(f"{source}: row ids do not match header (extra {extra}, missing {missing})")

    frame = frame.assign(sector_id=row_ids).set_index("sector_id").loc[list(sector_ids)]
    values = _numeric_block(frame, list(sector_ids) + list(SECTOR_TRAILER), source)
    n = len(sector_ids)
    Z = values[:, :n]
    f, va, x = values[:, n], values[:, n + 1], values[:, n + 2]

    if (Z < 0).any():
        i, j = np.argwhere(Z < 0)[0]
        raise SchemaError(f"{source}: negative flow from {sector_ids[i]!r} to {sector_ids[j]!r}")
    if (x < 0).any():
        raise SchemaError(f"{source}: negative total output for {sector_ids[int(np.argmax(x < 0))]!r}")

    _check_balance(Z.sum(axis=1) + f, x, sector_ids, "row", source)
    _check_balance(Z.sum(axis=0) + va, x, sector_ids, "column", source)

    logger.info("Loaded %d-sector IO table from %s", n, source)
    return SectorAccounts(sector_ids=sector_ids, Z=Z, f=f, x=x, va=va)


def _resolve_sector_columns(columns: Sequence[str], sector_ids: Sequence[str], source: str) -> list[str]:
    sector_columns = list(columns[len(HOUSEHOLD_LEADER) : -1])
    if len(sector_columns) != len(sector_ids):
        raise DimensionError(
            f"{source}: {len(sector_columns)} sector columns against {len(sector_ids)} sectors"
        )
    if set(sector_columns) != set(sector_ids):
        unknown = sorted(set(sector_columns) - set(sector_ids))
        raise SchemaError(f"{source}: sector columns {unknown} are not in the IO table")
    return list(sector_ids)


def load_household_accounts(path: str | Path, sector_ids: Sequence[str]) -> HouseholdAccounts:
    frame = _read_table(path)
    source = Path(path).name
    columns = list(frame.columns)
    if tuple(columns[: len(HOUSEHOLD_LEADER)]) != HOUSEHOLD_LEADER or columns[-1] != "total":
        raise SchemaError(
            f"{source}: header must be {','.join(HOUSEHOLD_LEADER)},<sector ids...>,total"
        )
    sector_columns = _resolve_sector_columns(columns, sector_ids, source)

    kinds = frame["kind"].astype(str).str.strip().str.lower()
    bad_kind = ~kinds.isin([INCOME_KIND, CONSUMPTION_KIND])
    if bad_kind.any():
        row = int(np.flatnonzero(bad_kind.to_numpy())[0])
        raise SchemaError(f"{source}: kind must be income or consumption (line {row + 2})")

    keys = []
    for row, (region, decile) in enumerate(zip(frame["region"], frame["decile"])):
        try:
            parsed_region = Region.parse(str(region))
            parsed_decile = int(str(decile).strip())
        except ValueError as exc:
            raise SchemaError(f"{source}: bad region/decile on line {row + 2}: {exc}") from exc
        if parsed_decile not in DECILES:
            raise SchemaError(f"{source}: decile {parsed_decile} outside 1..10 (line {row + 2})")
        keys.append((parsed_region, parsed_decile))

    values = _numeric_block(frame, sector_columns, source)
    totals = _numeric_block(frame, ["total"], source, allow_blank=True)[:, 0]
    if (values < 0).any():
        row = int(np.argwhere(values < 0)[0][0])
        raise SchemaError(f"{source}: negative household flow on line {row + 2}")

    group_ids = frame["group_id"].astype(str).str.strip().tolist()
    income_rows: dict[tuple[Region, int], int] = {}
    consumption_rows: dict[tuple[Region, int], int] = {}
    for row, (key, kind) in enumerate(zip(keys, kinds)):
        target = income_rows if kind == INCOME_KIND else consumption_rows
        if key in target:
            raise GroupSetError(f"{source}: duplicated {kind} row for ({key[0].value}, {key[1]})")
        target[key] = row

    expected = {(region, decile) for region in REGION_ORDER for decile in DECILES}
    missing = sorted(expected - set(income_rows), key=lambda k: (REGION_ORDER.index(k[0]), k[1]))
    if missing:
        region, decile = missing[0]
        raise GroupSetError(f"{source}: no income row for ({region.value}, {decile})")
    orphans = sorted(set(consumption_rows) - set(income_rows), key=lambda k: (k[0].value, k[1]))
    if orphans:
        raise GroupSetError(f"{source}: consumption row without income row for {orphans[0]}")

    groups = []
    for region in REGION_ORDER:
        for decile in DECILES:
            group_id = group_ids[income_rows[(region, decile)]]
            if not group_id:
                raise SchemaError(f"{source}: empty group_id for ({region.value}, {decile})")
            groups.append(HouseholdGroup(region=region, decile=decile, group_id=group_id))
    if len({group.group_id for group in groups}) != len(groups):
        raise GroupSetError(f"{source}: group ids must be unique")
    for key, row in consumption_rows.items():
        if group_ids[row] and group_ids[row] != group_ids[income_rows[key]]:
            raise SchemaError(
                f"{source}: consumption row {group_ids[row]!r} does not match income row "
                f"{group_ids[income_rows[key]]!r}"
            )

    n, r = len(sector_columns), len(groups)
    W = np.zeros((r, n))
    H = np.zeros((n, r))
    y0 = np.zeros(r)
    for g, group in enumerate(groups):
        income_row = income_rows[group.key]
        W[g] = values[income_row]
        derived = W[g].sum()
        supplied = totals[income_row]
        if np.isnan(supplied):
            y0[g] = derived
        else:
            if _relative_gaps(np.array([derived]), np.array([supplied]))[0] > Config.BALANCE_TOLERANCE:
                raise BalanceError(
                    f"{source}: income of {group.group_id!r} sums to {derived:.6g} "
                    f"but total says {supplied:.6g}"
                )
            y0[g] = supplied
        consumption_row = consumption_rows.get(group.key)
        if consumption_row is not None:
            H[:, g] = values[consumption_row]
            stated = totals[consumption_row]
            if not np.isnan(stated) and _relative_gaps(
                np.array([H[:, g].sum()]), np.array([stated])
            )[0] > Config.BALANCE_TOLERANCE:
                raise BalanceError(f"{source}: consumption of {group.group_id!r} does not sum to its total")

    spending = H.sum(axis=0)
    over = (y0 > 0) & (spending > y0 * (1 + Config.CONSUMPTION_SHARE_SLACK))
    if over.any():
        g = int(np.argmax(over))
        raise ConsumptionShareError(
            f"{source}: {groups[g].group_id!r} consumes {spending[g] / y0[g]:.4f} of its income"
        )

    logger.info("Loaded %d household groups over %d sectors from %s", r, n, source)
    return HouseholdAccounts(groups=tuple(groups), W=W, H=H, y0=y0)


def load_emissions(path: str | Path, sector_ids: Sequence[str]) -> EmissionProfile:
    frame = _read_table(path)
    source = Path(path).name
    if tuple(frame.columns) != EMISSIONS_HEADER:
        raise SchemaError(f"{source}: header must be {','.join(EMISSIONS_HEADER)}")
    ids = frame["sector_id"].astype(str).str.strip()
    if ids.duplicated().any():
        raise SchemaError(f"{source}: sector {ids[ids.duplicated()].iloc[0]!r} listed twice")
    known = set(sector_ids)
    unknown = [sector for sector in ids if sector not in known]
    if unknown:
        raise UnknownSectorError(f"{source}: unknown sector {unknown[0]!r}")
    missing = [sector for sector in sector_ids if sector not in set(ids)]
    if missing:
        raise MissingSectorError(f"{source}: no intensity for sector {missing[0]!r}")

    intensities = _numeric_block(frame, ["kg_co2e_per_million_rp"], source)[:, 0]
    if (intensities < 0).any():
        raise NegativeIntensityError(
            f"{source}: negative intensity for sector {ids.iloc[int(np.argmax(intensities < 0))]!r}"
        )
    by_sector = dict(zip(ids, intensities))
    return EmissionProfile(tuple(sector_ids), [by_sector[sector] for sector in sector_ids])
