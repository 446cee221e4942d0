"""Household income/consumption coefficients and the interrelational income multiplier.

With V the income coefficients (r x n), C the consumption coefficients (n x r) and
B the Leontief inverse, the income of every household group responds to a final
demand change df as dy = K V B df, where K = (I - V B C)^-1 closes the model over
induced household consumption. K spans all groups jointly so urban and rural
households feed each other's incomes.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .accounts import HouseholdAccounts, SectorAccounts
from .config import Config
from .errors import (
    ConsumptionShareError,
    DimensionError,
    NonProductiveError,
    SingularError,
    ZeroIncomeError,
)
from .leontief import LeontiefSystem, divide_by_output, spectral_radius_bound

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MiyazawaDiagnostics:
    m_spectral_bound: float
    residual_norm: float

    def as_dict(self) -> dict:
        return {"m_spectral_bound": self.m_spectral_bound, "residual_norm": self.residual_norm}


@dataclass(frozen=True)
class MiyazawaSystem:
    V: np.ndarray
    C: np.ndarray
    L: np.ndarray
    M: np.ndarray
    K: np.ndarray
    diagnostics: MiyazawaDiagnostics

    @property
    def r(self) -> int:
        return self.K.shape[0]

    @property
    def n(self) -> int:
        return self.V.shape[1]

    @property
    def income_multiplier(self) -> np.ndarray:
        """Total group income per unit of sector final demand, K V B."""
        return self.K @ self.L


def income_coefficients(hh: HouseholdAccounts, accounts: SectorAccounts) -> np.ndarray:
    if hh.n != accounts.n:
        raise DimensionError(f"household accounts cover {hh.n} sectors, IO table has {accounts.n}")
    V, _ = divide_by_output(hh.W, accounts.x, "household income payments")
    return V


def consumption_coefficients(hh: HouseholdAccounts) -> np.ndarray:
    H, y0 = hh.H, hh.y0
    spending = H.any(axis=0)
    broke = spending & (y0 <= 0)
    if broke.any():
        g = int(np.argmax(broke))
        raise ZeroIncomeError(f"group {hh.groups[g].group_id!r} consumes without any income")
    C = np.zeros_like(H)
    np.divide(H, y0, out=C, where=y0 > 0)
    shares = C.sum(axis=0)
    over = shares > 1 + Config.CONSUMPTION_SHARE_SLACK
    if over.any():
        g = int(np.argmax(over))
        raise ConsumptionShareError(
            f"group {hh.groups[g].group_id!r} has consumption share {shares[g]:.6g} > 1"
        )
    return C


def build_miyazawa(V: np.ndarray, C: np.ndarray, leontief: LeontiefSystem) -> MiyazawaSystem:
    V = np.asarray(V, dtype=float)
    C = np.asarray(C, dtype=float)
    n = leontief.n
    if V.ndim != 2 or V.shape[1] != n or C.shape != (n, V.shape[0]):
        raise DimensionError(
            f"V {V.shape} and C {C.shape} do not fit an {n}-sector Leontief system"
        )
    if (V < 0).any() or (C < 0).any():
        raise ConsumptionShareError("income and consumption coefficients must be nonnegative")
    if (C.sum(axis=0) > 1 + Config.CONSUMPTION_SHARE_SLACK).any():
        raise ConsumptionShareError("a consumption coefficient column sums above 1")

    r = V.shape[0]
    L = V @ leontief.B
    M = L @ C
    bound = spectral_radius_bound(M)
    if bound >= Config.SPECTRAL_THRESHOLD:
        raise NonProductiveError(f"spectral bound of V B C is {bound:.6g}; K does not exist")

    identity = np.eye(r)
    I_minus_M = identity - M
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        try:
            factors = lu_factor(I_minus_M, check_finite=False)
        except Warning as exc:
            raise SingularError(f"I - VBC is singular: {exc}") from exc
    K = lu_solve(factors, identity)
    residual = float(np.max(np.abs(I_minus_M @ K - identity)))
    if not np.isfinite(K).all() or residual > Config.RESIDUAL_TOLERANCE:
        raise SingularError(f"interrelational multiplier residual {residual:.3e} exceeds tolerance")
    if (K - identity).min() < -Config.NEGATIVITY_TOLERANCE:
        raise NonProductiveError("interrelational multiplier has negative induced entries")

    logger.info("Miyazawa system r=%d spectral bound=%.6f residual=%.3e", r, bound, residual)
    arrays = [np.array(a, copy=True) for a in (V, C, L, M, K)]
    for array in arrays:
        array.setflags(write=False)
    V, C, L, M, K = arrays
    return MiyazawaSystem(
        V=V,
        C=C,
        L=L,
        M=M,
        K=K,
        diagnostics=MiyazawaDiagnostics(m_spectral_bound=bound, residual_norm=residual),
    )


def income_impact(sys: MiyazawaSystem, df: np.ndarray, *, open_model: bool = False) -> np.ndarray:
    """Income change per household group (million Rp) for a final-demand change df.

    ``open_model`` drops the induced-consumption loop (K = I).
    """
    df = np.asarray(df, dtype=float)
    if df.shape != (sys.n,):
        raise DimensionError(f"final-demand change has shape {df.shape}, expected ({sys.n},)")
    direct = sys.L @ df
    if open_model:
        return direct
    return sys.K @ direct
