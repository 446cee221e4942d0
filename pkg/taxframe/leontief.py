"""Technical coefficients, the Leontief quantity inverse and its price dual."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .accounts import SectorAccounts
from .config import Config
from .errors import (
    DegenerateSectorError,
    DegenerateSectorWarning,
    DimensionError,
    NonFiniteError,
    NonProductiveError,
    SchemaError,
    SingularError,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LeontiefDiagnostics:
    spectral_radius_bound: float
    hawkins_simon_ok: bool
    residual_norm: float

    def as_dict(self) -> dict:
        return {
            "spectral_radius_bound": self.spectral_radius_bound,
            "hawkins_simon_ok": self.hawkins_simon_ok,
            "residual_norm": self.residual_norm,
        }


@dataclass(frozen=True)
class LeontiefSystem:
    A: np.ndarray
    B: np.ndarray
    diagnostics: LeontiefDiagnostics
    factors: tuple[np.ndarray, np.ndarray]

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def solve(self, demand: np.ndarray) -> np.ndarray:
        """Gross output needed to deliver ``demand``: (I - A) x = demand."""
        return lu_solve(self.factors, np.asarray(demand, dtype=float))

    def solve_prices(self, cost_push: np.ndarray) -> np.ndarray:
        return lu_solve(self.factors, np.asarray(cost_push, dtype=float), trans=1)


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def divide_by_output(flows: np.ndarray, x: np.ndarray, label: str) -> tuple[np.ndarray, tuple[int, ...]]:
    """Column-divide ``flows`` by ``x``; zero-output columns must carry no flows."""
    flows = np.asarray(flows, dtype=float)
    x = np.asarray(x, dtype=float)
    zero = x == 0
    if zero.any():
        offending = np.flatnonzero(zero & (flows != 0).any(axis=0))
        if offending.size:
            raise DegenerateSectorError(
                f"sector {int(offending[0]) + 1} has zero output but nonzero {label}"
            )
    coefficients = np.zeros_like(flows)
    np.divide(flows, x, out=coefficients, where=~zero)
    return coefficients, tuple(int(j) for j in np.flatnonzero(zero))


def technical_coefficients(accounts: SectorAccounts) -> np.ndarray:
    A, degenerate = divide_by_output(accounts.Z, accounts.x, "intermediate inputs")
    if degenerate:
        names = ", ".join(accounts.sector_ids[j] for j in degenerate)
        message = f"zero-output sectors get zero coefficient columns: {names}"
        logger.warning(message)
        warnings.warn(message, DegenerateSectorWarning, stacklevel=2)
    return A


def spectral_radius_bound(matrix: np.ndarray, iterations: int | None = None) -> float:
    """Upper bound on the spectral radius of a nonnegative matrix.

    Power iteration on I + M keeps the iterate strictly positive, so the largest
    Collatz-Wielandt ratio max_i (Mv)_i / v_i bounds the spectral radius from above
    at every step and converges to it.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.size == 0 or not matrix.any():
        return 0.0
    iterations = Config.SPECTRAL_ITERATIONS if iterations is None else iterations
    v = np.ones(matrix.shape[0])
    for _ in range(iterations):
        w = matrix @ v + v
        v = w / w.max()
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = (matrix @ v) / v
    return float(np.max(np.nan_to_num(ratios, nan=0.0, posinf=np.inf)))


def hawkins_simon_pivots(I_minus_A: np.ndarray) -> np.ndarray:
    """Pivots of unpivoted Gaussian elimination on I - A.

    The k-th pivot is the ratio of consecutive leading principal minors, so all
    pivots are positive exactly when the Hawkins-Simon condition holds. Elimination
    stops at the first nonpositive pivot.
    """
    U = np.array(I_minus_A, dtype=float, copy=True)
    n = U.shape[0]
    pivots = []
    for k in range(n):
        pivot = U[k, k]
        pivots.append(pivot)
        if not pivot > 0:
            break
        if k + 1 < n:
            U[k + 1 :, k:] -= np.outer(U[k + 1 :, k] / pivot, U[k, k:])
    return np.array(pivots)


def _check_coefficients(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"coefficient matrix must be square, got shape {A.shape}")
    if not np.isfinite(A).all():
        raise NonFiniteError("coefficient matrix has non-finite entries")
    if (A < 0).any():
        raise SchemaError("coefficient matrix has negative entries")
    return A


def leontief_inverse(A: np.ndarray) -> LeontiefSystem:
    A = _check_coefficients(A)
    n = A.shape[0]
    identity = np.eye(n)
    I_minus_A = identity - A

    pivots = hawkins_simon_pivots(I_minus_A)
    hawkins_simon_ok = len(pivots) == n and bool((pivots > 0).all())
    if not hawkins_simon_ok:
        raise NonProductiveError(
            f"Hawkins-Simon condition fails at leading minor {len(pivots)} "
            f"(pivot {pivots[-1]:.6g})"
        )
    bound = spectral_radius_bound(A)
    if bound >= 1:
        raise NonProductiveError(f"spectral radius bound of A is {bound:.6g} >= 1")

    with warnings.catch_warnings():
        warnings.simplefilter("error")
        try:
            factors = lu_factor(I_minus_A, check_finite=False)
        except Warning as exc:
            raise SingularError(f"I - A is singular: {exc}") from exc
    B = lu_solve(factors, identity)
    residual = float(np.max(np.abs(I_minus_A @ B - identity)))
    if not np.isfinite(B).all() or residual > Config.RESIDUAL_TOLERANCE:
        raise SingularError(f"Leontief inverse residual {residual:.3e} exceeds tolerance")
    tolerance = Config.NEGATIVITY_TOLERANCE
    if B.min() < -tolerance or np.diag(B).min() < 1 - tolerance:
        raise NonProductiveError("Leontief inverse is not nonnegative with unit-dominant diagonal")

    diagnostics = LeontiefDiagnostics(
        spectral_radius_bound=bound,
        hawkins_simon_ok=hawkins_simon_ok,
        residual_norm=residual,
    )
    logger.info("Leontief inverse n=%d spectral bound=%.6f residual=%.3e", n, bound, residual)
    return LeontiefSystem(
        A=_readonly(A.copy()),
        B=_readonly(B),
        diagnostics=diagnostics,
        factors=factors,
    )


def price_model(A: np.ndarray | LeontiefSystem, dv: np.ndarray) -> np.ndarray:
    """Price changes under full forward shifting: dp = (I - A^T)^-1 dv."""
    system = A if isinstance(A, LeontiefSystem) else leontief_inverse(A)
    dv = np.asarray(dv, dtype=float)
    if dv.shape != (system.n,):
        raise DimensionError(f"cost vector has shape {dv.shape}, expected ({system.n},)")
    if not np.isfinite(dv).all():
        raise NonFiniteError("cost vector has non-finite entries")
    return system.solve_prices(dv)
