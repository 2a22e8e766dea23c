"""Spectra of discriminants: hitting, escape, and extended hitting times.

The central objects are the discriminant D(P) of a reversible chain and
the discriminant of its absorbing counterpart.  D(P) is symmetric with
spectrum in [-1, 1]; for a chain reversible with respect to pi its top
eigenvector is sqrt(pi) with eigenvalue exactly 1.  Absorbing the marked
set M splits D(P') into an identity block on M and a strictly
sub-Perron unmarked block, and the classical expected absorption time
from the pi-conditioned unmarked start has the spectral form

    HT = sum_k  |<v'_k | U_pi>|^2 / (1 - lambda'_k)

over the unmarked-subspace eigenpairs.  An independent linear-solve
oracle for the same quantity, the 2/3-threshold step count, the escape
time of a unit vector, and the (1/eps) * escape-time representative of
the extended hitting time all live here, together with the
interpolated-walk limit that the extended hitting time is defined by.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .markov import (
    WalkMatrix,
    discriminant,
    interpolate,
    make_absorbing,
    marked_mask,
    stationary,
)

__all__ = [
    "SpectralDecomposition",
    "HittingTimes",
    "decompose",
    "hitting_time_spectral",
    "hitting_time_linear",
    "effective_hitting_time",
    "escape_time",
    "escape_time_subset",
    "extended_hitting_time",
    "interpolated_hitting_time",
    "extended_hitting_time_limit",
    "analyze_instance",
    "torus_eigenvalues",
]

RECONSTRUCTION_TOL = 1e-8
ORTHONORMALITY_TOL = 1e-10
PERRON_TOL = 1e-10
GAP_TOL = 1e-12
DEFAULT_S_LIST = (0.9, 0.99, 0.999, 0.9999, 0.99999, 0.999999)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Orthonormal eigendecomposition of a symmetric matrix, sorted descending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def gap(self) -> float:
        """delta = 1 - lambda_2 (meaningful when lambda_1 = 1)."""
        if self.eigenvalues.size < 2:
            return 1.0
        return float(1.0 - self.eigenvalues[1])

    def overlaps(self, g: np.ndarray) -> np.ndarray:
        """<v_k | g> for every eigenvector, in descending-eigenvalue order."""
        return self.eigenvectors.T @ g


def _as_dense(D) -> np.ndarray:
    if sp.issparse(D):
        return D.toarray()
    return np.asarray(D, dtype=np.float64)


def decompose(D) -> SpectralDecomposition:
    """Full symmetric eigendecomposition, validated and sorted descending.

    Raises if the reconstruction V diag(lambda) V^T strays from D by more
    than 1e-8 in any entry, or if the eigenvector matrix is not
    orthonormal to 1e-10.
    """
    dense = _as_dense(D)
    if dense.shape[0] != dense.shape[1]:
        raise ValueError("matrix must be square")
    if np.abs(dense - dense.T).max() > 1e-12:
        raise ValueError("matrix must be symmetric")
    vals, vecs = np.linalg.eigh(dense)
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = vecs[:, order]
    recon = np.abs((vecs * vals[None, :]) @ vecs.T - dense).max()
    if recon > RECONSTRUCTION_TOL:
        raise RuntimeError(f"eigendecomposition reconstruction residual {recon:.3e}")
    ortho = np.abs(vecs.T @ vecs - np.eye(dense.shape[0])).max()
    if ortho > ORTHONORMALITY_TOL:
        raise RuntimeError(f"eigenvector orthonormality residual {ortho:.3e}")
    return SpectralDecomposition(vals, vecs)


def _stationary_probs(P: WalkMatrix, pi: np.ndarray | None) -> np.ndarray:
    if pi is not None:
        return np.asarray(pi, dtype=np.float64)
    return stationary(P).probs


def _unmarked_projection(pi: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """|U_pi>: amplitudes sqrt(pi) restricted to unmarked states, renormalized."""
    eps_u = pi[~mask].sum()
    if eps_u <= 0:
        raise ValueError("unmarked set carries no stationary mass")
    u = np.where(mask, 0.0, np.sqrt(pi))
    return u / math.sqrt(eps_u)


def hitting_time_spectral(P: WalkMatrix, marked: Iterable[int], pi: np.ndarray | None = None) -> float:
    """Expected absorption time via the spectrum of the absorbing discriminant.

    Decomposes D(P') for P' = make_absorbing(P, M) and sums
    |<v'_k|U_pi>|^2 / (1 - lambda'_k) over the N - |M| eigenpairs with
    |lambda'_k| < 1.  The |M| remaining eigenvalues must be 1 (the
    absorbed directions); any unmarked-subspace eigenvalue reaching 1
    means the marked set is unreachable from part of the chain.
    """
    mask = marked_mask(P.dim, marked)
    pi = _stationary_probs(P, pi)
    dec = decompose(discriminant(make_absorbing(P, np.flatnonzero(mask))))
    at_one = dec.eigenvalues >= 1.0 - PERRON_TOL
    n_marked = int(mask.sum())
    if at_one.sum() != n_marked:
        raise RuntimeError(
            f"expected {n_marked} unit eigenvalues in the absorbing discriminant, "
            f"found {int(at_one.sum())} (unmarked dynamics disconnected?)"
        )
    u = _unmarked_projection(pi, mask)
    ovl = dec.overlaps(u)[~at_one]
    lam = dec.eigenvalues[~at_one]
    return float(np.sum(ovl**2 / (1.0 - lam)))


def hitting_time_linear(P: WalkMatrix, marked: Iterable[int], pi: np.ndarray | None = None) -> float:
    """Independent oracle for the absorption time: a direct linear solve.

    t_x = expected steps to reach M from x satisfies (I - Q) t = 1 with
    Q the unmarked block of P^T; the result is the pi-conditioned
    unmarked average of t.
    """
    mask = marked_mask(P.dim, marked)
    pi = _stationary_probs(P, pi)
    unmarked = np.flatnonzero(~mask)
    if P.is_sparse:
        Q = P.mat[np.ix_(unmarked, unmarked)].T.tocsc()
        try:
            t = spla.spsolve(sp.eye_array(unmarked.size, format="csc") - Q, np.ones(unmarked.size))
        except Exception as exc:  # singular factorization
            raise RuntimeError("marked set unreachable: absorption system singular") from exc
    else:
        Q = P.mat[np.ix_(unmarked, unmarked)].T
        try:
            t = np.linalg.solve(np.eye(unmarked.size) - Q, np.ones(unmarked.size))
        except np.linalg.LinAlgError as exc:
            raise RuntimeError("marked set unreachable: absorption system singular") from exc
    if not np.all(np.isfinite(t)) or t.min() < 0:
        raise RuntimeError("absorption-time solve produced invalid values")
    w = pi[unmarked]
    return float((w / w.sum()) @ t)


def effective_hitting_time(
    P: WalkMatrix,
    marked: Iterable[int],
    pi: np.ndarray | None = None,
    threshold: float = 2.0 / 3.0,
    start: str = "conditioned",
) -> int:
    """Smallest T with marked mass >= threshold under the absorbing walk.

    The walk starts from pi conditioned on the unmarked states (the
    default) or from plain pi (start="stationary"), and the iteration is
    capped at 100 * ceil(hitting_time_linear) -- generous, since the
    2/3-threshold time is at most about three times the expectation.
    """
    mask = marked_mask(P.dim, marked)
    pi = _stationary_probs(P, pi)
    if start == "conditioned":
        p = np.where(mask, 0.0, pi)
        p = p / p.sum()
    elif start == "stationary":
        p = pi.copy()
    else:
        raise ValueError(f"unknown start distribution {start!r}")
    ht_lin = hitting_time_linear(P, np.flatnonzero(mask), pi)
    cap = 100 * max(1, math.ceil(ht_lin))
    if p[mask].sum() >= threshold - 1e-12:
        return 0
    op = make_absorbing(P, np.flatnonzero(mask)).iteration_operator()
    for t in range(1, cap + 1):
        p = op @ p
        if p[mask].sum() >= threshold - 1e-12:
            return t
    raise RuntimeError(f"threshold {threshold} not reached within cap {cap}")


def escape_time(
    P: WalkMatrix,
    g: np.ndarray,
    decomp: SpectralDecomposition | None = None,
) -> float:
    """Escape time of a unit vector: sum over non-principal eigenpairs of D(P).

    E(g) = sum_{k>=2} |<v_k|g>|^2 / (1 - lambda_k).  Equals 0 exactly
    when g is the principal eigenvector, is at least 1/2 for any g
    orthogonal to it, and never exceeds 1/gap.
    """
    g = np.asarray(g, dtype=np.float64)
    if abs(np.linalg.norm(g) - 1.0) > 1e-10:
        raise ValueError("escape time requires a unit vector")
    dec = decomp if decomp is not None else decompose(discriminant(P))
    if dec.eigenvalues.size >= 2 and dec.eigenvalues[1] >= 1.0 - GAP_TOL:
        raise RuntimeError("no spectral gap: second eigenvalue at 1")
    ovl = dec.overlaps(g)[1:]
    lam = dec.eigenvalues[1:]
    return float(np.sum(ovl**2 / (1.0 - lam)))


def escape_time_subset(
    P: WalkMatrix,
    subset: Iterable[int],
    pi: np.ndarray | None = None,
    decomp: SpectralDecomposition | None = None,
) -> float:
    """Escape time of |S_pi>, the pi-amplitude unit vector supported on S."""
    idx = np.unique(np.fromiter(subset, dtype=np.int64))
    if idx.size == 0:
        raise ValueError("subset must be nonempty")
    if idx.min() < 0 or idx.max() >= P.dim:
        raise ValueError("subset vertex out of range")
    if idx.size == P.dim:
        return 0.0
    pi = _stationary_probs(P, pi)
    eps = pi[idx].sum()
    if eps <= 0:
        raise ValueError("subset carries no stationary mass")
    g = np.zeros(P.dim)
    g[idx] = np.sqrt(pi[idx])
    g /= math.sqrt(eps)
    return escape_time(P, g, decomp=decomp)


def extended_hitting_time(
    P: WalkMatrix,
    marked: Iterable[int],
    pi: np.ndarray | None = None,
    decomp: SpectralDecomposition | None = None,
) -> tuple[float, float]:
    """Representative of the extended hitting time, with its marked mass.

    Returns ((1/eps_M) * escape_time_subset(P, M), eps_M).  The first
    component matches the s -> 1 interpolated-walk limit up to fixed
    constants, and exactly reproduces the plain hitting time's scaling
    for singletons.
    """
    mask = marked_mask(P.dim, marked)
    pi = _stationary_probs(P, pi)
    eps = float(pi[mask].sum())
    value = escape_time_subset(P, np.flatnonzero(mask), pi=pi, decomp=decomp) / eps
    return value, eps


def interpolated_hitting_time(
    P: WalkMatrix,
    marked: Iterable[int],
    s: float,
    pi: np.ndarray | None = None,
) -> float:
    """Hitting time of the interpolated walk P(s) for 0 <= s < 1.

    The spectral absorption-time sum evaluated on the discriminant of
    P(s) itself rather than of the absorbing walk: with v_k(s),
    lambda_k(s) the non-principal eigenpairs of D(P(s)) and |U_pi> the
    unmarked projection of the *original* chain's stationary state,

        HT(s) = sum_{k >= 2} |<v_k(s)|U_pi>|^2 / (1 - lambda_k(s)).

    As s -> 1 the near-unit eigenvalues contribute finite terms and the
    value converges to the extended hitting time; at s = 1 those terms
    would leave the sum (the absorbing walk's unit eigenspace), which is
    exactly why the extended hitting time is defined as a limit.
    """
    if not (0.0 <= s < 1.0):
        raise ValueError("interpolated hitting time defined for 0 <= s < 1")
    mask = marked_mask(P.dim, marked)
    pi = _stationary_probs(P, pi)
    P_abs = make_absorbing(P, np.flatnonzero(mask))
    dec = decompose(discriminant(interpolate(P, P_abs, s)))
    if dec.eigenvalues.size >= 2 and dec.eigenvalues[1] >= 1.0 - GAP_TOL:
        raise RuntimeError("interpolated chain lost its spectral gap")
    u = _unmarked_projection(pi, mask)
    ovl = dec.overlaps(u)[1:]
    lam = dec.eigenvalues[1:]
    return float(np.sum(ovl**2 / (1.0 - lam)))


def extended_hitting_time_limit(
    P: WalkMatrix,
    marked: Iterable[int],
    s_list: Sequence[float] = DEFAULT_S_LIST,
    pi: np.ndarray | None = None,
) -> float:
    """Cross-check oracle: extrapolated s -> 1 limit of interpolated_hitting_time.

    Evaluates the interpolated hitting time on an ascending grid of s
    values and extrapolates linearly in (1 - s) from the two largest,
    which suffices because the quantity is rational in s near 1.  The
    sequence must be non-decreasing (within rounding); a genuinely
    non-monotone sequence signals numerical trouble.
    """
    s_arr = [float(s) for s in s_list]
    if len(s_arr) < 2:
        raise ValueError("need at least two interpolation points")
    if any(not (0.0 <= s < 1.0) for s in s_arr) or any(
        b <= a for a, b in zip(s_arr, s_arr[1:])
    ):
        raise ValueError("s_list must be strictly ascending within [0, 1)")
    pi = _stationary_probs(P, pi)
    values = [interpolated_hitting_time(P, marked, s, pi=pi) for s in s_arr]
    for a, b in zip(values, values[1:]):
        if b < a * (1.0 - 1e-9) - 1e-12:
            raise RuntimeError(
                f"interpolated hitting times not monotone: {a:.12g} then {b:.12g}"
            )
    e1, e2 = 1.0 - s_arr[-2], 1.0 - s_arr[-1]
    t1, t2 = values[-2], values[-1]
    slope = (t1 - t2) / (e1 - e2)
    return float(t2 - slope * e2)


@dataclass(frozen=True)
class HittingTimes:
    """Bundle of the five time scales of one (chain, marked set) instance."""

    ht: float
    ht_linear: float
    ht_eff: int
    eht: float
    escape: float
    eps_marked: float
    gap: float

    def __post_init__(self) -> None:
        if self.ht < 0 or self.ht_eff < 0:
            raise ValueError("hitting times cannot be negative")
        if abs(self.ht - self.ht_linear) > 1e-6 * max(1.0, self.ht):
            raise ValueError(
                f"spectral and linear hitting times disagree: {self.ht} vs {self.ht_linear}"
            )

    def to_dict(self) -> dict:
        return {
            "ht": self.ht,
            "ht_linear": self.ht_linear,
            "ht_eff": self.ht_eff,
            "eht": self.eht,
            "escape": self.escape,
            "eps_marked": self.eps_marked,
            "gap": self.gap,
        }


def analyze_instance(P: WalkMatrix, marked: Iterable[int], pi: np.ndarray | None = None) -> HittingTimes:
    """All time scales of one instance, sharing a single base decomposition."""
    mask = marked_mask(P.dim, marked)
    idx = np.flatnonzero(mask)
    pi = _stationary_probs(P, pi)
    dec = decompose(discriminant(P))
    escape = escape_time_subset(P, idx, pi=pi, decomp=dec)
    eht, eps = extended_hitting_time(P, idx, pi=pi, decomp=dec)
    return HittingTimes(
        ht=hitting_time_spectral(P, idx, pi=pi),
        ht_linear=hitting_time_linear(P, idx, pi=pi),
        ht_eff=effective_hitting_time(P, idx, pi=pi),
        eht=eht,
        escape=escape,
        eps_marked=eps,
        gap=dec.gap,
    )


def torus_eigenvalues(n: int) -> np.ndarray:
    """Closed-form spectrum of the n x n torus walk, sorted descending.

    The two-dimensional Fourier modes diagonalize the torus: the mode
    with frequencies (k, l) has eigenvalue (cos(2 pi k/n) + cos(2 pi l/n))/2.
    """
    theta = 2.0 * np.pi * np.arange(n) / n
    lam = 0.5 * (np.cos(theta)[:, None] + np.cos(theta)[None, :])
    return np.sort(lam.reshape(-1))[::-1]
