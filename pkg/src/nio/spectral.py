"""Stationary densities, L1 contraction on zero-average densities, and BV diagnostics."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist

from .dynamics import MapSpec
from .ulam import AnnealedOperator, Partition, annealed_matrix, deterministic_matrix

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000
DEFAULT_K_MAX = 64


class NonConvergence(ArithmeticError):
    """Power iteration did not reach the requested residual."""

    def __init__(self, max_iter: int, residual: float):
        super().__init__(f"no convergence after {max_iter} iterations (L1 residual {residual:.3e})")
        self.max_iter = max_iter
        self.residual = residual


class UniquenessWarning(UserWarning):
    """The chain never couples, so the stationary density found may not be unique."""


@dataclass
class StationaryInfo:
    residual: float
    iterations: int


def _apply(M, f):
    return M.apply(f) if isinstance(M, AnnealedOperator) else f @ M


def l1_norm(f: np.ndarray) -> float:
    return float(2.0 / len(f) * np.sum(np.abs(f)))


def stationary_density(M, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                       start: np.ndarray | None = None, check_uniqueness: bool = True,
                       full_output: bool = False):
    """Fixed point of ``f -> f @ M`` by power iteration from the uniform density.

    Parameters
    ----------
    M : ndarray or AnnealedOperator
        Row-stochastic transition matrix (or its factored form).
    tol : float
        Required L1 residual ``||f M - f||_1`` (cell width included).
    max_iter : int
        Iteration cap; :class:`NonConvergence` is raised past it.
    start : ndarray, optional
        Initial density; uniform by default.
    check_uniqueness : bool
        If the iteration stops immediately, check that the chain couples and
        warn with :class:`UniquenessWarning` otherwise.
    full_output : bool
        Also return a :class:`StationaryInfo`.
    """
    n = M.n if isinstance(M, AnnealedOperator) else M.shape[0]
    delta = 2.0 / n
    f = np.full(n, 0.5) if start is None else np.asarray(start, dtype=float).copy()
    f /= delta * f.sum()
    residual = np.inf
    it = 0
    while True:
        g = _apply(M, f)
        g /= delta * g.sum()
        residual = delta * float(np.sum(np.abs(g - f)))
        if residual <= tol:
            break
        f = g
        it += 1
        if it >= max_iter:
            raise NonConvergence(max_iter, residual)
    if check_uniqueness and it == 0 and not isinstance(M, AnnealedOperator):
        if coupling_time(M, DEFAULT_K_MAX) is None:
            warnings.warn("start density is already stationary but the chain does not couple; "
                          "it may not be the unique stationary density", UniquenessWarning,
                          stacklevel=2)
    if full_output:
        return f, StationaryInfo(residual, it)
    return f


def matrix_power(M: np.ndarray, k: int) -> np.ndarray:
    """``M**k`` with rows renormalized after every product."""
    if k < 1:
        raise ValueError("k must be >= 1")

    def mul(a, b):
        c = a @ b
        c /= c.sum(axis=1, keepdims=True)
        return c

    if k & (k - 1) == 0:
        out = M
        while k > 1:
            out = mul(out, out)
            k //= 2
        return out
    out = M
    for _ in range(k - 1):
        out = mul(out, M)
    return out


def dobrushin(A: np.ndarray) -> float:
    """Half the largest L1 distance between two rows of a stochastic matrix."""
    if A.shape[0] < 2:
        return 0.0
    return float(min(1.0, 0.5 * pdist(A, "cityblock").max()))


def v0_contraction_norm(M: np.ndarray, k: int = 1) -> float:
    """L1 operator norm of ``M**k`` on zero-sum row vectors (Dobrushin coefficient)."""
    return dobrushin(matrix_power(np.asarray(M, dtype=float), k))


def _rows_overlap(S: np.ndarray) -> bool:
    Sf = S.astype(np.float32)
    return bool(np.all(Sf @ Sf.T > 0.0))


def coupling_time(M: np.ndarray, k_max: int = DEFAULT_K_MAX) -> int | None:
    """Smallest ``k <= k_max`` such that every pair of rows of ``M**k`` overlaps.

    Works on the zero pattern alone, so the answer is immune to underflow;
    overlapping rows is exactly ``v0_contraction_norm(M, k) < 1``.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    S = np.asarray(M) > 0.0
    step = S.astype(np.float32)
    cur = S
    for k in range(1, k_max + 1):
        if _rows_overlap(cur):
            return k
        nxt = (cur.astype(np.float32) @ step) > 0.0
        if np.array_equal(nxt, cur):
            return None
        cur = nxt
    return None


@dataclass
class ContractionReport:
    k: int
    l1_norm: float
    coupled: bool


def contraction_report(M: np.ndarray, k: int) -> ContractionReport:
    c = v0_contraction_norm(M, k)
    return ContractionReport(k=k, l1_norm=c, coupled=c < 1.0)


@dataclass
class CoarseFineCertificate:
    delta: float
    xi: float
    discrete_norms: list[float] = field(default_factory=list)

    @property
    def i(self) -> int:
        return len(self.discrete_norms) - 1

    @property
    def bound(self) -> float:
        """Upper bound on the L1 norm of ``L_xi^(i+1)`` restricted to zero-average densities."""
        return certified_bound(self.discrete_norms, self.delta, self.xi)

    @property
    def valid(self) -> bool:
        return self.bound < 1.0

    def as_dict(self) -> dict:
        return {"delta": self.delta, "xi": self.xi, "i": self.i,
                "discrete_norms": list(self.discrete_norms), "bound": self.bound,
                "valid": self.valid}


def certified_bound(discrete_norms, delta: float, xi: float) -> float:
    """``C_i + (2i + 1) delta / xi`` for measured discrete norms ``C_0 .. C_i``."""
    i = len(discrete_norms) - 1
    if i < 1:
        raise ValueError("need discrete norms C_0 .. C_i with i >= 1")
    return float(discrete_norms[i] + (2 * i + 1) * delta / xi)


def coarse_fine_certificate(tmap: MapSpec, kernel, bc, n: int, i: int,
                            M: np.ndarray | None = None) -> CoarseFineCertificate:
    """Transfer the measured contraction of the Ulam matrix to the exact operator."""
    if i < 1:
        raise ValueError("i must be >= 1")
    partition = Partition(n)
    if M is None:
        M = annealed_matrix(tmap, kernel, bc, partition)
    norms = [1.0]
    A = M
    for k in range(1, i + 1):
        if k > 1:
            A = A @ M
            A /= A.sum(axis=1, keepdims=True)
        norms.append(dobrushin(A))
    return CoarseFineCertificate(delta=partition.delta, xi=kernel.xi, discrete_norms=norms)


def variation(f: np.ndarray) -> float:
    """Sum of the jumps of a piecewise-constant density at interior cell edges."""
    return float(np.sum(np.abs(np.diff(f))))


def bv_norm(f: np.ndarray) -> float:
    return variation(f) + l1_norm(f)


def fixed_point_proximity(tmap: MapSpec, f: np.ndarray, xi: float, threshold: float = 1e-12,
                          points_per_cell: int = 100) -> bool:
    """True if a cell charged by ``f`` holds a point with ``|T(x) - x| < xi / 2``."""
    part = Partition(len(f))
    edges = part.edges
    cells = np.flatnonzero(np.asarray(f) > threshold)
    if cells.size == 0:
        return False
    t = np.linspace(0.0, 1.0, points_per_cell)
    x = edges[cells, None] + part.delta * t[None, :]
    x = np.clip(x, -1.0, 1.0)
    return bool(np.any(np.abs(tmap.evaluate(x) - x) < 0.5 * xi))


def wasserstein1(f: np.ndarray, g: np.ndarray) -> float:
    """``integral |F - G|`` for two piecewise-constant densities on the same partition.

    The CDF difference is linear on each cell, so each cell contributes a
    trapezoid, or two triangles when the difference changes sign.
    """
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != g.shape:
        raise ValueError("densities live on different partitions")
    delta = 2.0 / len(f)
    d = np.concatenate([[0.0], np.cumsum(f - g) * delta])
    a, b = d[:-1], d[1:]
    same = a * b >= 0.0
    trap = 0.5 * delta * (np.abs(a) + np.abs(b))
    denom = np.where(same, 1.0, np.abs(a) + np.abs(b))
    cross = 0.5 * delta * (a * a + b * b) / denom
    return float(np.sum(np.where(same, trap, cross)))


def stationary_continuity_modulus(tmap: MapSpec, kernel_family, bc, n: int, xi: float,
                                  xi_hat: float, tol: float = DEFAULT_TOL, det=None) -> float:
    """``||f_xi_hat - f_xi||_BV`` from two stationary solves.

    ``kernel_family`` maps an amplitude to a :class:`~nio.noise.NoiseKernel`.
    """
    if not 0.0 < xi <= xi_hat:
        raise ValueError("need 0 < xi <= xi_hat")
    partition = Partition(n)
    if det is None:
        det = deterministic_matrix(tmap, partition)
    f = stationary_density(annealed_matrix(tmap, kernel_family(xi), bc, partition, det=det),
                           tol=tol, check_uniqueness=False)
    if xi_hat == xi:
        return 0.0
    g = stationary_density(annealed_matrix(tmap, kernel_family(xi_hat), bc, partition, det=det),
                           tol=tol, check_uniqueness=False)
    return bv_norm(g - f)
