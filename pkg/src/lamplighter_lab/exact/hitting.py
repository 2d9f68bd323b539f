"""Expected hitting times and return-time tails."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from ..errors import BudgetExceeded, SingularSystem
from ..graphs import WalkKernel

HITTING_BUDGET = 6000


@dataclass(frozen=True)
class HittingResult:
    matrix: np.ndarray  # matrix[x, y] = E_x T_y
    stationary_mean: np.ndarray  # E_nu T_y

    @property
    def t_star(self) -> float:
        return float(self.matrix.max())


def hitting_times(k: WalkKernel, method: str = "solve", budget: int = HITTING_BUDGET) -> HittingResult:
    """``E_x T_y`` for all pairs.

    ``method="solve"`` solves ``(I - Q_y) h = 1`` with row and column ``y``
    deleted, once per target.  ``method="fundamental"`` reads every column
    off one inverse ``Z = (I - P + 1 nu^T)^{-1}`` via
    ``E_x T_y = (Z_yy - Z_xy) / nu_y``; it is much faster on large kernels.
    """
    n = k.n
    if n > budget:
        raise BudgetExceeded(f"{n} states exceeds hitting-time budget {budget}")
    p = k.dense()
    nu = k.stationary
    if method == "solve":
        h = np.zeros((n, n))
        eye = np.eye(n - 1)
        ones = np.ones(n - 1)
        for y in range(n):
            keep = np.r_[0:y, y + 1:n]
            a = eye - p[np.ix_(keep, keep)]
            try:
                col = sla.solve(a, ones, check_finite=False)
            except (sla.LinAlgError, ValueError) as exc:
                raise SingularSystem(f"{k.label}: target {y} unreachable") from exc
            if not np.all(np.isfinite(col)) or np.any(col < 0):
                raise SingularSystem(f"{k.label}: target {y} unreachable")
            h[keep, y] = col
    elif method == "fundamental":
        try:
            z = np.linalg.inv(np.eye(n) - p + np.outer(np.ones(n), nu))
        except np.linalg.LinAlgError as exc:
            raise SingularSystem(f"{k.label}: chain is not irreducible") from exc
        h = (np.diag(z)[None, :] - z) / nu[None, :]
        np.fill_diagonal(h, 0.0)
    else:
        raise ValueError(f"unknown method {method!r}")
    return HittingResult(h, nu @ h)


def recurrence_residual(k: WalkKernel, h: np.ndarray) -> float:
    """Max violation of ``E_x T_y = 1 + sum_z q(x,z) E_z T_y`` off the diagonal."""
    resid = 1.0 + k.matrix @ h - h
    np.fill_diagonal(resid, 0.0)
    return float(np.max(np.abs(resid)))


def return_tails(k: WalkKernel, m: int) -> np.ndarray:
    """``P_x(T_x^+ > m)`` for every ``x``.

    Row ``x`` carries the walk started at ``x`` with ``x`` absorbing after
    the first step; the surviving mass after ``m`` steps is the tail.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    n = k.n
    if n > HITTING_BUDGET:
        raise BudgetExceeded(f"{n} states exceeds budget {HITTING_BUDGET}")
    d = k.dense()
    np.fill_diagonal(d, 0.0)
    p = k.matrix
    for _ in range(m - 1):
        d = np.asarray((p.T @ d.T).T)
        np.fill_diagonal(d, 0.0)
    return d.sum(axis=1)


def return_tail(k: WalkKernel, x: int, m: int) -> float:
    if m < 1:
        raise ValueError("m must be >= 1")
    d = k.matrix.getrow(x).toarray().ravel()
    d[x] = 0.0
    pt = k.matrix.T.tocsr()
    for _ in range(m - 1):
        d = pt @ d
        d[x] = 0.0
    return float(d.sum())
