"""Monte Carlo orbits of ``X_{n+1} = fold(T(X_n) + omega_n)`` and finite-time exponents.

Every orbit owns a Philox (counter-based) stream derived from ``(seed, orbit
index)`` via :class:`numpy.random.SeedSequence`. Orbits are advanced in blocks
of fixed size, so the numbers produced do not depend on how many threads
process the blocks.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dynamics import BoundaryCondition, MapSpec, fold
from .noise import MotherKernel, NoiseKernel, UniformMother

BLOCK = 64


@dataclass(frozen=True)
class McConfig:
    orbits: int = 200
    length: int = 10_000
    seed: int = 0
    burn_in: int = 0

    def __post_init__(self):
        if self.orbits < 1:
            raise ValueError("orbits must be >= 1")
        if self.length < 1:
            raise ValueError("length must be >= 1")
        if not 0 <= self.burn_in < self.length:
            raise ValueError("burn_in must satisfy 0 <= burn_in < length")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass
class OrbitSummary:
    log_sum: float
    steps: int
    final: float
    rejected: bool

    @property
    def mean(self) -> float:
        return self.log_sum / self.steps


@dataclass
class McEstimate:
    mean: float
    stderr: float
    rejected: int
    orbits: int


class AllOrbitsRejected(ArithmeticError):
    pass


def orbit_stream(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def _advance(tmap: MapSpec, bc: BoundaryCondition, x: np.ndarray, noise: np.ndarray | None,
             steps: int, burn_in: int):
    """Iterate a block of orbits; ``noise`` has shape (orbits, steps) or is None."""
    log_c = math.log(2.0 * tmap.alpha * tmap.beta)
    a1 = tmap.alpha - 1.0
    sums = np.zeros_like(x)
    hit_zero = np.zeros(x.shape, dtype=bool)
    for t in range(steps):
        ax = np.abs(x)
        hit_zero |= ax == 0.0
        if t >= burn_in:
            with np.errstate(divide="ignore"):
                sums += log_c + a1 * np.log(ax)
        y = 2.0 * tmap.beta * ax**tmap.alpha - 1.0
        if noise is not None:
            y = y + noise[:, t]
        x = fold(bc, y)
    return sums, x, hit_zero


def simulate_orbit(tmap: MapSpec, kernel: NoiseKernel | None, bc, x0: float, steps: int,
                   stream: np.random.Generator | None = None, burn_in: int = 0) -> OrbitSummary:
    """One orbit from ``x0``; ``kernel=None`` switches the noise off."""
    if not -1.0 <= x0 <= 1.0:
        raise ValueError("x0 must lie in [-1, 1]")
    bc = BoundaryCondition.parse(bc)
    noise = None
    if kernel is not None:
        if stream is None:
            raise ValueError("a random stream is required when noise is on")
        noise = kernel.sample(stream.random(steps))[None, :]
    sums, x, hit = _advance(tmap, bc, np.array([float(x0)]), noise, steps, burn_in)
    return OrbitSummary(float(sums[0]), steps - burn_in, float(x[0]), bool(hit[0]))


def _block(tmap, kernel, bc, config: McConfig, start: int, stop: int, x0):
    xs = np.empty(stop - start)
    noise = None if kernel is None else np.empty((stop - start, config.length))
    for row, idx in enumerate(range(start, stop)):
        g = orbit_stream(config.seed, idx)
        xs[row] = g.uniform(-1.0, 1.0) if x0 is None else x0
        if noise is not None:
            noise[row] = kernel.sample(g.random(config.length))
    sums, _, hit = _advance(tmap, bc, xs, noise, config.length, config.burn_in)
    return sums / (config.length - config.burn_in), hit


def finite_time_lyapunov(tmap: MapSpec, kernel: NoiseKernel | None, bc, config: McConfig,
                         threads: int = 1, x0: float | None = None) -> McEstimate:
    """Average of per-orbit time averages of ``log|T'(X_n)|`` over independent orbits.

    Starting points are uniform on [-1, 1] unless ``x0`` pins them. Orbits
    that land exactly on the critical point are dropped and counted.
    """
    bc = BoundaryCondition.parse(bc)
    bounds = [(s, min(s + BLOCK, config.orbits)) for s in range(0, config.orbits, BLOCK)]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        parts = list(pool.map(lambda b: _block(tmap, kernel, bc, config, b[0], b[1], x0), bounds))
    means = np.concatenate([p[0] for p in parts])
    hit = np.concatenate([p[1] for p in parts])
    kept = means[~hit]
    if kept.size == 0:
        raise AllOrbitsRejected(f"all {config.orbits} orbits hit the critical point")
    stderr = float(np.std(kept, ddof=1) / math.sqrt(kept.size)) if kept.size > 1 else 0.0
    return McEstimate(float(np.mean(kept)), stderr, int(hit.sum()), config.orbits)


def heatmap_sweep(alpha_grid, xi_grid, beta: float, bc, config: McConfig,
                  mother: MotherKernel | None = None, threads: int = 1):
    """``finite_time_lyapunov`` on every ``(alpha, xi)``; rows follow ``alpha_grid``.

    A cell that fails holds the error message instead of an estimate.
    """
    if len(alpha_grid) == 0 or len(xi_grid) == 0:
        raise ValueError("grids must be non-empty")
    mother = UniformMother() if mother is None else mother
    grid = []
    for alpha in alpha_grid:
        row = []
        for xi in xi_grid:
            try:
                est = finite_time_lyapunov(MapSpec(alpha, beta), NoiseKernel(mother, xi), bc,
                                           config, threads=threads)
            except (ValueError, ArithmeticError) as exc:
                est = f"{type(exc).__name__}: {exc}"
            row.append(est)
        grid.append(row)
    return grid
