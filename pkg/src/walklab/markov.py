"""Column-stochastic walk matrices: building, absorbing, interpolating.

Conventions used throughout the package:

* P is column-stochastic; entry P[y, x] is the probability of stepping
  from x to y, so distributions evolve as p' = P @ p and the fixed point
  satisfies P @ pi = pi.
* The discriminant of P is the symmetric matrix with entries
  sqrt(P[x, y] * P[y, x]); its spectral norm never exceeds 1 and, for a
  chain reversible with respect to pi, its top eigenvector is sqrt(pi).
* Matrices are dense numpy arrays up to DENSE_LIMIT states and sparse
  (CSC) above that.  Every operation accepts both and gives the same
  numbers either way.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .graphs import Graph

__all__ = [
    "DENSE_LIMIT",
    "COLUMN_SUM_TOL",
    "FIXED_POINT_TOL",
    "REVERSIBILITY_TOL",
    "WalkMatrix",
    "StationaryDistribution",
    "walk_from_graph",
    "stationary",
    "check_reversible",
    "check_ergodic",
    "make_absorbing",
    "interpolate",
    "interpolated_stationary",
    "discriminant",
    "marked_mask",
    "random_reversible_chain",
    "export_triplets",
]

# Dense above this many states gets expensive for no benefit; the walk
# matrices in question have only ~4 entries per column.
DENSE_LIMIT = 4096

COLUMN_SUM_TOL = 1e-12
FIXED_POINT_TOL = 1e-10
REVERSIBILITY_TOL = 1e-10


def _column_sums(mat) -> np.ndarray:
    if sp.issparse(mat):
        return np.asarray(mat.sum(axis=0)).reshape(-1)
    return mat.sum(axis=0)


@dataclass(frozen=True)
class WalkMatrix:
    """A validated column-stochastic transition matrix.

    Attributes
    ----------
    mat : ndarray or scipy.sparse.csc_array
        The matrix itself; column x holds the out-distribution of x.
    kind : str
        "plain", "absorbing", or "interpolated" (bookkeeping only).
    s : float or None
        Interpolation parameter for kind "interpolated".
    """

    mat: object
    kind: str = "plain"
    s: float | None = None

    def __post_init__(self) -> None:
        mat = self.mat
        if sp.issparse(mat):
            if mat.shape[0] != mat.shape[1]:
                raise ValueError("walk matrix must be square")
            if mat.min() < -COLUMN_SUM_TOL:
                raise ValueError("walk matrix entries must be non-negative")
        else:
            mat = np.asarray(mat, dtype=np.float64)
            if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
                raise ValueError("walk matrix must be square")
            if mat.min() < -COLUMN_SUM_TOL:
                raise ValueError("walk matrix entries must be non-negative")
            object.__setattr__(self, "mat", mat)
        sums = _column_sums(self.mat)
        worst = np.abs(sums - 1.0).max()
        if worst > COLUMN_SUM_TOL:
            raise ValueError(
                f"columns must sum to 1 within {COLUMN_SUM_TOL:g}; worst deviation {worst:.3e}"
            )

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.mat)

    def dense(self) -> np.ndarray:
        """Materialize as a dense ndarray (copy for sparse storage)."""
        if self.is_sparse:
            return self.mat.toarray()
        return self.mat

    def matvec(self, p: np.ndarray) -> np.ndarray:
        return self.mat @ p

    def iteration_operator(self):
        """Matrix object optimized for repeated matvecs (CSR when it pays off)."""
        if self.is_sparse:
            return self.mat.tocsr()
        nnz = np.count_nonzero(self.mat)
        if self.dim >= 256 and nnz < 0.25 * self.dim * self.dim:
            return sp.csr_array(self.mat)
        return self.mat


@dataclass(frozen=True)
class StationaryDistribution:
    """Fixed point of a walk matrix, with its amplitude form sqrt(pi)."""

    probs: np.ndarray
    residual: float

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.min() < 0:
            raise ValueError("stationary probabilities must be non-negative")
        if abs(probs.sum() - 1.0) > 1e-10:
            raise ValueError("stationary probabilities must sum to 1")
        object.__setattr__(self, "probs", probs)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.sqrt(self.probs)

    def mass(self, states: Iterable[int]) -> float:
        idx = np.fromiter(states, dtype=np.int64)
        return float(self.probs[idx].sum()) if idx.size else 0.0


def walk_from_graph(graph: Graph) -> WalkMatrix:
    """Out-degree-normalized walk matrix of a directed multigraph.

    Column u gets weight multiplicity(u -> v) / outdeg(u) at row v; for
    the 4-regular lattice graphs every entry is a multiple of 1/4.
    """
    n = graph.n_vertices
    src = np.array([u for u, _ in graph.edges], dtype=np.int64)
    dst = np.array([v for _, v in graph.edges], dtype=np.int64)
    outdeg = np.bincount(src, minlength=n)
    if (outdeg == 0).any():
        raise ValueError("every vertex needs at least one outgoing edge")
    vals = 1.0 / outdeg[src]
    if n > DENSE_LIMIT:
        mat = sp.csc_array((vals, (dst, src)), shape=(n, n))
        mat.sum_duplicates()
    else:
        mat = np.zeros((n, n))
        np.add.at(mat, (dst, src), vals)
    return WalkMatrix(mat, kind="plain")


def marked_mask(dim: int, marked: Iterable[int]) -> np.ndarray:
    """Boolean mask of a marked set; must be a nonempty strict subset."""
    mask = np.zeros(dim, dtype=bool)
    idx = np.fromiter(marked, dtype=np.int64)
    if idx.size == 0:
        raise ValueError("marked set must be nonempty")
    if idx.min() < 0 or idx.max() >= dim:
        raise ValueError("marked vertex out of range")
    mask[idx] = True
    if mask.all():
        raise ValueError("marked set must be a strict subset of the states")
    return mask


def stationary(P: WalkMatrix, tol: float = 1e-12, max_iter: int = 200_000) -> StationaryDistribution:
    """Fixed point of P by damped power iteration.

    Iterates the lazy matrix (P + I)/2, which shares the fixed point but
    converges for periodic chains too (the even torus is bipartite).  The
    residual reported is ||P p - p||_inf for the original matrix; failure
    to meet tol within max_iter signals a chain without a unique,
    reachable fixed point.
    """
    n = P.dim
    op = P.iteration_operator()
    p = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        step = op @ p
        res = np.abs(step - p).max()
        if res <= tol:
            return StationaryDistribution(np.maximum(step, 0.0) / step.sum(), float(res))
        p = 0.5 * (step + p)
    raise RuntimeError(
        f"power iteration did not reach residual {tol:g} in {max_iter} iterations "
        "(is the chain ergodic?)"
    )


def check_reversible(P: WalkMatrix, pi: np.ndarray, tol: float = REVERSIBILITY_TOL) -> tuple[bool, float]:
    """Detailed-balance check; returns (ok, worst violation of P[y,x] pi[x] = P[x,y] pi[y])."""
    if P.is_sparse:
        flow = P.mat.multiply(pi[None, :])
        diff = (flow - flow.T).tocoo()
        worst = float(np.abs(diff.data).max()) if diff.nnz else 0.0
    else:
        flow = P.mat * pi[None, :]
        worst = float(np.abs(flow - flow.T).max())
    return worst <= tol, worst


def _period_of(adj_sets: list[set[int]], n: int) -> int:
    # gcd of (level[u] + 1 - level[v]) over edges u -> v, with BFS levels
    # from vertex 0; equals the chain period for strongly connected graphs.
    import math
    from collections import deque

    level = np.full(n, -1, dtype=np.int64)
    level[0] = 0
    dq = deque([0])
    while dq:
        u = dq.popleft()
        for v in adj_sets[u]:
            if level[v] < 0:
                level[v] = level[u] + 1
                dq.append(v)
    g = 0
    for u in range(n):
        for v in adj_sets[u]:
            g = math.gcd(g, int(level[u] + 1 - level[v]))
    return g if g > 0 else 1


def check_ergodic(P: WalkMatrix) -> tuple[bool, str]:
    """(ergodic, reason).  Ergodic = strongly connected and aperiodic.

    Periodic but connected chains (every even-n torus) come back as
    (False, "periodic(...)"); downstream spectral code still accepts
    them and reports rather than refuses.
    """
    mat = P.mat if P.is_sparse else sp.csr_array(P.mat)
    n = P.dim
    ncomp, _ = connected_components(mat, directed=True, connection="strong")
    if ncomp != 1:
        return False, f"not strongly connected ({ncomp} components)"
    coo = mat.tocoo()
    adj_sets: list[set[int]] = [set() for _ in range(n)]
    for u, v, w in zip(coo.col, coo.row, coo.data):
        if w > 0:
            adj_sets[int(u)].add(int(v))
    period = _period_of(adj_sets, n)
    if period > 1:
        return False, f"periodic(period={period})"
    return True, "ergodic"


def make_absorbing(P: WalkMatrix, marked: Iterable[int]) -> WalkMatrix:
    """Replace each marked column with the corresponding unit vector.

    Idempotent: absorbing an already-absorbing matrix with the same set
    changes nothing.
    """
    mask = marked_mask(P.dim, marked)
    keep = (~mask).astype(np.float64)
    if P.is_sparse:
        mat = P.mat @ sp.diags_array(keep) + sp.diags_array(mask.astype(np.float64))
        mat = sp.csc_array(mat)
    else:
        mat = P.mat * keep[None, :]
        mat[mask, mask] = 1.0
    return WalkMatrix(mat, kind="absorbing")


def interpolate(P: WalkMatrix, P_abs: WalkMatrix, s: float) -> WalkMatrix:
    """Convex combination (1 - s) P + s P_abs of a chain with its absorbing version."""
    if not (0.0 <= s <= 1.0):
        raise ValueError(f"interpolation parameter s={s} outside [0, 1]")
    if P.dim != P_abs.dim:
        raise ValueError("dimension mismatch")
    mat = (1.0 - s) * P.mat + s * P_abs.mat
    if sp.issparse(mat):
        mat = sp.csc_array(mat)
    return WalkMatrix(mat, kind="interpolated", s=float(s))


def interpolated_stationary(pi: np.ndarray, marked: Iterable[int], s: float) -> np.ndarray:
    """Fixed point of the interpolated chain, in closed form.

    Interpolation only rescales flow out of marked columns, so the fixed
    point is pi with unmarked mass damped by (1 - s) and renormalized:
    proportional to (1 - s) pi on unmarked states and pi on marked ones.
    At s = 1 - eps/(1 - eps) the marked mass becomes exactly 1/2.
    """
    pi = np.asarray(pi, dtype=np.float64)
    mask = marked_mask(pi.size, marked)
    out = np.where(mask, pi, (1.0 - s) * pi)
    total = out.sum()
    if total <= 0:
        raise ValueError("degenerate interpolated fixed point")
    return out / total


def discriminant(P: WalkMatrix):
    """Entrywise sqrt(P * P^T): symmetric, spectral norm <= 1.

    Returned in the same storage format as P (dense or sparse).
    """
    if P.is_sparse:
        prod = P.mat.multiply(P.mat.T)
        return sp.csc_array(prod.sqrt())
    return np.sqrt(P.mat * P.mat.T)


def random_reversible_chain(n: int, rng: np.random.Generator) -> tuple[WalkMatrix, np.ndarray]:
    """Random reversible ergodic chain on n states, with its exact fixed point.

    Symmetrize a positive random matrix S and normalize columns; the
    chain P = S diag(1/colsum) is then reversible with respect to
    pi = colsums / sum(colsums), and positivity makes it ergodic.
    """
    if n < 2:
        raise ValueError("need at least two states")
    raw = rng.random((n, n)) + 0.05
    sym = 0.5 * (raw + raw.T)
    colsums = sym.sum(axis=0)
    P = WalkMatrix(sym / colsums[None, :], kind="plain")
    pi = colsums / colsums.sum()
    return P, pi


def export_triplets(P: WalkMatrix) -> str:
    """Plain-text (row, col, value) listing of nonzero entries, row-major sorted."""
    if P.is_sparse:
        coo = P.mat.tocoo()
        order = np.lexsort((coo.col, coo.row))
        rows, cols, vals = coo.row[order], coo.col[order], coo.data[order]
    else:
        rows, cols = np.nonzero(P.mat)
        vals = P.mat[rows, cols]
    lines = [f"{r} {c} {v:.17g}" for r, c, v in zip(rows, cols, vals)]
    return "\n".join(lines) + "\n"
