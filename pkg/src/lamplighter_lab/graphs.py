"""Base graphs and the lazy walk kernels that live on them.

Graphs are small immutable records of sorted neighbour lists.  Kernels are
stored as CSR matrices together with their stationary vector, so the same
type serves both the base walk on G and the explicit lamplighter walk.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import product
from typing import IO, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ConstructionFailed, InvalidSpec

ROW_SUM_TOL = 1e-12
PROPAGATED_TOL = 1e-10
REGULAR_RETRY_BUDGET = 1000

#: families for which every vertex looks the same; used to skip worst-start scans
TRANSITIVE_FAMILIES = frozenset({"cycle", "torus", "complete_with_loops", "hypercube"})


@dataclass(frozen=True)
class FiniteGraph:
    """A connected regular graph on vertices ``0..n-1``."""

    n: int
    adjacency: tuple[tuple[int, ...], ...]
    family: str
    params: tuple[int, ...] = ()
    degree: int = 0

    @property
    def tag(self) -> str:
        return f"{self.family}({','.join(str(p) for p in self.params)})"

    @property
    def transitive(self) -> bool:
        return self.family in TRANSITIVE_FAMILIES

    def edges(self) -> list[tuple[int, int]]:
        """Undirected edges ``(u, v)`` with ``u <= v``, each listed once."""
        return [(u, v) for u, nbrs in enumerate(self.adjacency) for v in nbrs if u <= v]

    def is_connected(self) -> bool:
        seen = np.zeros(self.n, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            u = stack.pop()
            for v in self.adjacency[u]:
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
        return bool(seen.all())


@dataclass(frozen=True)
class Distribution:
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if np.any(p < 0) or abs(p.sum() - 1.0) > ROW_SUM_TOL * max(1, p.size):
            raise InvalidSpec("not a probability vector")
        object.__setattr__(self, "probabilities", p)

    def __len__(self):
        return self.probabilities.size


@dataclass(frozen=True, eq=False)
class WalkKernel:
    """Row-stochastic transition kernel with a declared stationary law.

    ``transitive`` is an attestation carried over from the graph family; when
    set, mixing profiles are computed from state 0 only.
    """

    matrix: sp.csr_matrix
    stationary: np.ndarray
    label: str = ""
    reversible: bool = False
    transitive: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix, dtype=float)
        m.sum_duplicates()
        m.sort_indices()
        object.__setattr__(self, "matrix", m)
        nu = np.asarray(self.stationary, dtype=float)
        object.__setattr__(self, "stationary", nu)
        if m.shape[0] != m.shape[1] or nu.shape != (m.shape[0],):
            raise InvalidSpec("kernel shape does not match stationary vector")
        if m.nnz and m.data.min() < 0:
            raise InvalidSpec("negative transition probability")
        rows = np.asarray(m.sum(axis=1)).ravel()
        if np.max(np.abs(rows - 1.0)) > ROW_SUM_TOL:
            raise InvalidSpec("kernel rows do not sum to 1")
        if abs(nu.sum() - 1.0) > ROW_SUM_TOL or nu.min() < 0:
            raise InvalidSpec("stationary vector is not a distribution")

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def row(self, x: int) -> list[tuple[int, float]]:
        lo, hi = self.matrix.indptr[x], self.matrix.indptr[x + 1]
        return list(zip(self.matrix.indices[lo:hi].tolist(), self.matrix.data[lo:hi].tolist()))

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def row_sum_residual(self) -> float:
        return float(np.max(np.abs(np.asarray(self.matrix.sum(axis=1)).ravel() - 1.0)))

    def stationarity_residual(self) -> float:
        """``max |nu^T q - nu^T|``."""
        return float(np.max(np.abs(self.matrix.T @ self.stationary - self.stationary)))

    @classmethod
    def from_dense(cls, q, stationary=None, **kw) -> "WalkKernel":
        q = np.asarray(q, dtype=float)
        if stationary is None:
            stationary = stationary_vector(q)
        return cls(sp.csr_matrix(q), stationary, **kw)


def stationary_vector(q: np.ndarray) -> np.ndarray:
    """Left Perron vector of a dense irreducible stochastic matrix."""
    n = q.shape[0]
    a = np.vstack([q.T - np.eye(n), np.ones(n)])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    nu = np.linalg.lstsq(a, b, rcond=None)[0]
    nu = np.clip(nu, 0, None)
    return nu / nu.sum()


# -- construction -----------------------------------------------------------

def _from_neighbours(nbrs: Sequence[Sequence[int]], family, params) -> FiniteGraph:
    adj = tuple(tuple(sorted(set(a))) for a in nbrs)
    degs = {len(a) for a in adj}
    if len(degs) != 1:
        raise ConstructionFailed(f"{family}{params} is not regular")
    g = FiniteGraph(len(adj), adj, family, tuple(params), degs.pop())
    if not g.is_connected():
        raise ConstructionFailed(f"{family}{params} is not connected")
    return g


def cycle(n: int) -> FiniteGraph:
    if n < 3:
        raise InvalidSpec("cycle needs n >= 3")
    return _from_neighbours([((v - 1) % n, (v + 1) % n) for v in range(n)], "cycle", (n,))


def torus(n: int, d: int = 2) -> FiniteGraph:
    """Discrete torus Z_n^d, vertex index = sum(coord_i * n**i)."""
    if n < 3 or d < 1:
        raise InvalidSpec("torus needs n >= 3 and d >= 1")
    nbrs = []
    for v in range(n ** d):
        coords = [(v // n ** i) % n for i in range(d)]
        out = []
        for i in range(d):
            for step in (-1, 1):
                c = list(coords)
                c[i] = (c[i] + step) % n
                out.append(sum(ci * n ** j for j, ci in enumerate(c)))
        nbrs.append(out)
    return _from_neighbours(nbrs, "torus", (n, d))


def complete_with_loops(n: int) -> FiniteGraph:
    if n < 2:
        raise InvalidSpec("complete graph needs n >= 2")
    everyone = tuple(range(n))
    return _from_neighbours([everyone] * n, "complete_with_loops", (n,))


def hypercube(d: int) -> FiniteGraph:
    if d < 1:
        raise InvalidSpec("hypercube needs d >= 1")
    n = 1 << d
    return _from_neighbours([[v ^ (1 << i) for i in range(d)] for v in range(n)], "hypercube", (d,))


def random_regular(n: int, degree: int, seed: int) -> FiniteGraph:
    """Uniform-ish random regular graph from the pairing model.

    Pairings with loops, multi-edges, or that come out disconnected are
    rejected and redrawn, up to ``REGULAR_RETRY_BUDGET`` attempts.
    """
    if degree < 3 or n <= degree or (n * degree) % 2:
        raise InvalidSpec("random_regular needs degree >= 3, n > degree, n*degree even")
    rng = np.random.Generator(np.random.PCG64(seed))
    stubs = np.repeat(np.arange(n), degree)
    for _ in range(REGULAR_RETRY_BUDGET):
        pairs = rng.permutation(stubs).reshape(-1, 2)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        lo, hi = pairs.min(axis=1), pairs.max(axis=1)
        if np.unique(lo * n + hi).size != lo.size:
            continue
        nbrs = [[] for _ in range(n)]
        for u, v in pairs.tolist():
            nbrs[u].append(v)
            nbrs[v].append(u)
        try:
            return _from_neighbours(nbrs, "random_regular", (n, degree, seed))
        except ConstructionFailed:
            continue
    raise ConstructionFailed(f"pairing model failed {REGULAR_RETRY_BUDGET} times for n={n}, degree={degree}")


_BUILDERS = {
    "cycle": (cycle, 1),
    "torus": (torus, 2),
    "complete": (complete_with_loops, 1),
    "complete_with_loops": (complete_with_loops, 1),
    "hypercube": (hypercube, 1),
    "regular": (random_regular, 3),
    "random_regular": (random_regular, 3),
}


def build_graph(spec: str | tuple) -> FiniteGraph:
    """Build a graph from ``"family:p1,p2,..."`` or ``(family, p1, p2, ...)``.

    >>> build_graph("torus:3,2").degree
    4
    """
    if isinstance(spec, FiniteGraph):
        return spec
    if isinstance(spec, str):
        m = re.fullmatch(r"\s*([a-z_]+)\s*(?::\s*([-\d,\s]*))?\s*", spec)
        if not m:
            raise InvalidSpec(f"cannot parse graph spec {spec!r}")
        family = m.group(1)
        try:
            params = [int(p) for p in (m.group(2) or "").split(",") if p.strip()]
        except ValueError as exc:
            raise InvalidSpec(f"bad parameters in {spec!r}") from exc
    else:
        family, *params = spec
    if family not in _BUILDERS:
        raise InvalidSpec(f"unknown graph family {family!r}")
    fn, arity = _BUILDERS[family]
    if family == "torus" and len(params) == 1:
        params = [params[0], 2]
    if len(params) != arity:
        raise InvalidSpec(f"{family} takes {arity} parameter(s), got {len(params)}")
    return fn(*params)


def lazy_kernel(g: FiniteGraph, holding: float = 0.5) -> WalkKernel:
    """Lazy simple random walk: stay with ``holding``, else a uniform neighbour.

    ``complete_with_loops`` ignores ``holding`` and resamples the position
    uniformly (holding probability 1/n).
    """
    if not 0 <= holding < 1:
        raise InvalidSpec("holding must lie in [0, 1)")
    n = g.n
    if g.family == "complete_with_loops":
        q = sp.csr_matrix(np.full((n, n), 1.0 / n))
        label = f"{g.tag} uniform resampling"
    else:
        rows, cols, vals = [], [], []
        step = (1.0 - holding) / g.degree
        for x, nbrs in enumerate(g.adjacency):
            if holding > 0:
                rows.append(x), cols.append(x), vals.append(holding)
            for y in nbrs:
                rows.append(x), cols.append(y), vals.append(step)
        q = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
        label = f"{g.tag} lazy({holding:g})"
    return WalkKernel(
        q,
        np.full(n, 1.0 / n),
        label=label,
        reversible=True,
        transitive=g.transitive,
        meta={"graph": g.tag, "family": g.family, "params": list(g.params), "holding": holding},
    )


def single_vertex_kernel() -> WalkKernel:
    """One vertex with a loop; the degenerate base of the smallest wreath."""
    return WalkKernel(sp.csr_matrix(np.ones((1, 1))), np.ones(1), label="single", reversible=True,
                      transitive=True, meta={"family": "single"})


def check_reversible(k: WalkKernel, tol: float = ROW_SUM_TOL) -> tuple[bool, float]:
    """Return ``(reversible, max |nu(x)q(x,y) - nu(y)q(y,x)|)``."""
    if k.stationary.min() <= 0:
        raise InvalidSpec("stationary vector must be strictly positive")
    flow = sp.diags(k.stationary) @ k.matrix
    diff = (flow - flow.T).tocoo()
    residual = float(np.max(np.abs(diff.data))) if diff.nnz else 0.0
    return residual <= tol, residual


def write_edge_list(g: FiniteGraph, out: IO[str]) -> None:
    for u, v in g.edges():
        out.write(f"{u} {v}\n")


def torus_coords(n: int, d: int = 2) -> np.ndarray:
    """Coordinates of torus vertices, shape ``(n**d, d)``."""
    return np.array([c[::-1] for c in product(range(n), repeat=d)])
