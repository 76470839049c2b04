"""Ulam discretization of the deterministic, noise and annealed transfer operators.

Matrices are row-stochastic numpy arrays: ``M[i, j]`` is the fraction of the
mass of cell ``i`` sent to cell ``j``, and a density on the partition (a row
vector of cell values) evolves as ``f @ M``.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import integrate

from .dynamics import BoundaryCondition, IntervalMap, MonotoneBranch
from .noise import NoiseKernel, UniformMother

STOCHASTIC_TOL = 1e-12
# largest n for which the annealed product is materialized
MAX_DENSE_PRODUCT = 2048

_HEADER = struct.Struct("<4sIII")
_MAGIC = b"ULAM"


@dataclass(frozen=True)
class Partition:
    """Uniform partition of [-1, 1] into ``n`` cells (``n`` even, so 0 is an edge)."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2 or self.n % 2:
            raise ValueError(f"partition size must be an even integer >= 2, got {self.n!r}")

    @property
    def delta(self) -> float:
        return 2.0 / self.n

    @property
    def edges(self) -> np.ndarray:
        # integer numerator keeps the middle edge exactly 0
        return (2.0 * np.arange(self.n + 1) - self.n) / self.n

    @property
    def centers(self) -> np.ndarray:
        e = self.edges
        return 0.5 * (e[:-1] + e[1:])

    def cell(self, i: int) -> tuple[float, float]:
        e = self.edges
        return float(e[i]), float(e[i + 1])

    def uniform_density(self) -> np.ndarray:
        return np.full(self.n, 0.5)


def partition_of(f: np.ndarray) -> Partition:
    return Partition(len(f))


def project(partition: Partition, f, epsabs: float = 1e-13) -> np.ndarray:
    """Cell averages ``(1/delta) * integral of f over each cell``."""
    out = np.empty(partition.n)
    for i in range(partition.n):
        a, b = partition.cell(i)
        val, err = integrate.quad(f, a, b, epsabs=epsabs, epsrel=1e-12, limit=200)
        if not np.isfinite(val) or err > 1e3 * max(epsabs, 1e-12 * abs(val)):
            raise ArithmeticError(f"quadrature failed on cell {i}: value {val}, error {err}")
        out[i] = val / partition.delta
    return out


def check_stochastic(M: np.ndarray, tol: float = STOCHASTIC_TOL) -> None:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("stochastic matrix must be square")
    if np.any(M < 0):
        raise ValueError("stochastic matrix has negative entries")
    worst = np.max(np.abs(M.sum(axis=1) - 1.0))
    if worst > tol:
        raise ValueError(f"row sums deviate from 1 by {worst:.3e}")


def _normalize_rows(M: np.ndarray) -> np.ndarray:
    np.clip(M, 0.0, None, out=M)
    M /= M.sum(axis=1, keepdims=True)
    return M


def _branch_mass(branch: MonotoneBranch, x_edges: np.ndarray, y_edges: np.ndarray) -> np.ndarray:
    # F[a, b] = m{x in branch, x <= x_edges[a], T(x) <= y_edges[b]}; cell masses by
    # inclusion-exclusion
    c = np.clip(x_edges, branch.lo, branch.hi)[:, None]
    g = branch.inverse(np.clip(y_edges, branch.image_lo, branch.image_hi))
    g = np.clip(g, branch.lo, branch.hi)[None, :]
    if branch.increasing:
        F = np.maximum(0.0, np.minimum(c, g) - branch.lo)
    else:
        F = np.maximum(0.0, c - g)
    return np.diff(np.diff(F, axis=0), axis=1)


def deterministic_matrix(tmap: IntervalMap, partition: Partition) -> np.ndarray:
    """Ulam matrix of the transfer operator: ``M[i, j] = m(I_i & T^-1 I_j) / m(I_i)``.

    Preimages are taken exactly through the branch inverses.
    """
    edges = partition.edges
    tol = 1e-12
    M = np.zeros((partition.n, partition.n))
    for br in tmap.branches():
        for end in (br.lo, br.hi):
            if np.min(np.abs(edges - end)) > tol:
                raise ValueError(
                    f"branch endpoint {end} is not a partition point; "
                    "cells would straddle a branch boundary"
                )
        M += _branch_mass(br, edges, edges)
    return _normalize_rows(M / partition.delta)


def _copy_starts(bc: BoundaryCondition, xi: float, edges: np.ndarray, delta: float) -> np.ndarray:
    """Left endpoints of every real interval that folds onto each cell, shape (copies, n)."""
    starts = edges[:-1]
    if bc is BoundaryCondition.PERIODIC:
        m = int(np.ceil((xi + 2.0) / 2.0)) + 1
        shifts = 2.0 * np.arange(-m, m + 1)
        return starts[None, :] + shifts[:, None]
    m = int(np.ceil((xi + 2.0) / 4.0)) + 1
    shifts = 4.0 * np.arange(-m, m + 1)
    direct = starts[None, :] + shifts[:, None]
    mirrored = (shifts[:, None] - 2.0) - (starts[None, :] + delta)
    return np.vstack([direct, mirrored])


def _box_overlap(t: np.ndarray, delta: float) -> np.ndarray:
    # integral over s <= t of the triangle (delta - |s|)_+, i.e. the box-box convolution CDF
    out = np.where(t <= 0.0, 0.5 * np.square(np.clip(t + delta, 0.0, None)), 0.0)
    pos = (t > 0.0) & (t < delta)
    out = np.where(pos, delta * delta - 0.5 * np.square(delta - t), out)
    return np.where(t >= delta, delta * delta, out)


# Gauss-Legendre rule on [0, 1] for kernels without a closed-form cell integral
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
_GL_NODES = 0.5 * (_GL_NODES + 1.0)
_GL_WEIGHTS = 0.5 * _GL_WEIGHTS


def noise_matrix(kernel: NoiseKernel, bc: BoundaryCondition | str, partition: Partition) -> np.ndarray:
    """Ulam matrix of ``f -> fold_*(rho_xi * f)``.

    ``N[i, j]`` is the probability that a point uniform in cell ``i`` plus a
    noise sample lands in some real interval folding onto cell ``j``.
    """
    bc = BoundaryCondition.parse(bc)
    n, delta, xi = partition.n, partition.delta, kernel.xi
    edges = partition.edges
    starts = _copy_starts(bc, xi, edges, delta)
    src = edges[:-1]
    N = np.zeros((n, n))
    if isinstance(kernel.mother, UniformMother):
        for row in starts:
            off = row[None, :] - src[:, None]
            N += _box_overlap(xi - off, delta) - _box_overlap(-xi - off, delta)
        N /= 2.0 * xi * delta
    else:
        for i in range(n):
            x = src[i] + delta * _GL_NODES
            for row in starts:
                lo = row[None, :] - x[:, None]
                mass = kernel.cdf(lo + delta) - kernel.cdf(lo)
                N[i] += _GL_WEIGHTS @ mass
    return _normalize_rows(N)


class AnnealedOperator:
    """The annealed Ulam operator kept as its two factors ``det @ noise``."""

    def __init__(self, det: np.ndarray, noise: np.ndarray):
        if det.shape != noise.shape:
            raise ValueError("factor shapes differ")
        self.det = det
        self.noise = noise

    @property
    def n(self) -> int:
        return self.det.shape[0]

    def apply(self, f: np.ndarray) -> np.ndarray:
        return (f @ self.det) @ self.noise

    def matrix(self) -> np.ndarray:
        if self.n > MAX_DENSE_PRODUCT:
            raise MemoryError(f"refusing to materialize a {self.n}x{self.n} product; use apply()")
        return _normalize_rows(self.det @ self.noise)


def annealed_operator(tmap: IntervalMap, kernel: NoiseKernel, bc, partition: Partition,
                      det: np.ndarray | None = None) -> AnnealedOperator:
    if det is None:
        det = deterministic_matrix(tmap, partition)
    return AnnealedOperator(det, noise_matrix(kernel, bc, partition))


def annealed_matrix(tmap: IntervalMap, kernel: NoiseKernel, bc, partition: Partition,
                    det: np.ndarray | None = None) -> np.ndarray:
    """Row-stochastic matrix of noise after dynamics: ``deterministic @ noise``."""
    return annealed_operator(tmap, kernel, bc, partition, det=det).matrix()


def dump_matrix(path, M: np.ndarray) -> None:
    """Write ``M`` as a 16-byte header ('ULAM', u32 n, two u32 reserved) + row-major <f8."""
    M = np.ascontiguousarray(M, dtype="<f8")
    n = M.shape[0]
    if M.shape != (n, n):
        raise ValueError("matrix must be square")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, n, 0, 0))
        fh.write(M.tobytes(order="C"))


def load_matrix(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError("truncated matrix file")
    magic, n, _, _ = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise ValueError("not a ULAM matrix file")
    body = raw[_HEADER.size:]
    if len(body) != 8 * n * n:
        raise ValueError(f"expected {8 * n * n} payload bytes, found {len(body)}")
    return np.frombuffer(body, dtype="<f8").reshape(n, n).astype(float)
