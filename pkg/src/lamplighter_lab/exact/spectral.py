"""Spectra of reversible kernels and the Dirichlet-form bound on the gap."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import BudgetExceeded, NotReversible, ZeroVariance
from ..graphs import WalkKernel, check_reversible

DENSE_BUDGET = 6000
SPARSE_BUDGET = 1 << 17
UNIT_TOL = 1e-9


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray  # descending; only the extremes when ``partial``
    lambda2: float  # largest |lambda| among non-unit eigenvalues
    t_rel: float
    t_rel_log: Optional[float]
    second: float  # signed second-largest eigenvalue
    partial: bool = False

    @property
    def gap(self) -> float:
        return 1.0 - self.lambda2


def _symmetrized(k: WalkKernel) -> sp.csr_matrix:
    ok, residual = check_reversible(k, tol=1e-10)
    if not k.reversible or not ok:
        raise NotReversible(f"{k.label}: detailed-balance residual {residual:.3g}")
    r = np.sqrt(k.stationary)
    s = sp.diags(r) @ k.matrix @ sp.diags(1.0 / r)
    return ((s + s.T) * 0.5).tocsr()


def _summarize(eigs: np.ndarray, partial: bool) -> SpectrumResult:
    eigs = np.sort(eigs)[::-1]
    if abs(eigs[0] - 1.0) > UNIT_TOL:
        raise ValueError(f"top eigenvalue {eigs[0]!r} is not 1")
    rest = eigs[1:]
    if rest.size == 0:
        return SpectrumResult(eigs, 0.0, 1.0, None, 0.0, partial)
    lam = float(np.max(np.abs(rest)))
    # |lambda| = 1 off the top means periodic or reducible: no finite relaxation
    t_rel = math.inf if lam >= 1.0 - 1e-12 else 1.0 / (1.0 - lam)
    t_rel_log = None
    if 0.0 < lam < 1.0 - 1e-12:
        t_rel_log = -1.0 / math.log(lam)
    return SpectrumResult(eigs, lam, t_rel, t_rel_log, float(rest[0]), partial)


def spectrum(k: WalkKernel, dense_budget: int = DENSE_BUDGET, sparse_budget: int = SPARSE_BUDGET,
             tol: float = 1e-10) -> SpectrumResult:
    """Eigenvalues of ``D^{1/2} q D^{-1/2}`` (D = diag of the stationary law).

    Up to ``dense_budget`` states the full spectrum is computed.  Beyond it,
    and up to ``sparse_budget``, only the two algebraically largest and the
    smallest eigenvalue are found with Lanczos, which is enough for
    ``lambda2``.
    """
    s = _symmetrized(k)
    n = k.n
    if n <= dense_budget:
        return _summarize(np.linalg.eigvalsh(s.toarray()), partial=False)
    if n > sparse_budget:
        raise BudgetExceeded(f"{n} states exceeds the sparse spectral budget {sparse_budget}")
    top = spla.eigsh(s, k=2, which="LA", tol=tol, return_eigenvectors=False)
    bottom = spla.eigsh(s, k=1, which="SA", tol=tol, return_eigenvectors=False)
    return _summarize(np.concatenate([top, bottom]), partial=True)


@dataclass(frozen=True)
class DirichletResult:
    energy: float
    variance: float

    @property
    def ratio(self) -> float:
        """Upper bound on the spectral gap ``1 - lambda2``."""
        return self.energy / self.variance


def dirichlet_form(k: WalkKernel, phi) -> DirichletResult:
    """``E(phi, phi) = 1/2 sum_{x,y} (phi(x) - phi(y))^2 pi(x) p(x, y)`` and ``Var_pi phi``."""
    phi = np.asarray(phi, dtype=float)
    pi = k.stationary
    coo = k.matrix.tocoo()
    energy = 0.5 * float(np.sum((phi[coo.row] - phi[coo.col]) ** 2 * pi[coo.row] * coo.data))
    mean = float(pi @ phi)
    variance = float(pi @ (phi - mean) ** 2)
    scale = max(1.0, float(np.max(np.abs(phi)))) ** 2
    if variance <= 1e-14 * scale:
        raise ZeroVariance("test function is constant under the stationary law")
    return DirichletResult(energy, variance)
