"""Lyapunov exponents of stationary densities and noise-induced-order detection."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .dynamics import MapSpec, map_sup_distance
from .noise import MotherKernel, NoiseKernel, UniformMother
from .spectral import (DEFAULT_K_MAX, DEFAULT_MAX_ITER, DEFAULT_TOL, ContractionReport,
                       NonConvergence, certified_bound, coupling_time, matrix_power, dobrushin,
                       stationary_density, variation)
from .ulam import Partition, annealed_matrix, deterministic_matrix


def lyapunov_from_density(tmap: MapSpec, f: np.ndarray) -> float:
    """``integral of log|T'| * f`` for a piecewise-constant density, cell by cell in closed form."""
    f = np.asarray(f, dtype=float)
    return float(np.dot(f, tmap.log_derivative_cell_integrals(Partition(len(f)).edges)))


def tilde_lambda(alpha: float, beta: float = 1.0) -> float:
    """Exponent of the uniform probability density: ``ln 2 + ln alpha + 1 - alpha + ln beta``."""
    MapSpec(alpha, beta)
    return math.log(2.0) + math.log(alpha) + 1.0 - alpha + math.log(beta)


def find_alpha_tilde(lo: float = 2.0, hi: float = 4.0, tol: float = 1e-7) -> tuple[float, float]:
    """Bisection enclosure ``(a, b)``, ``b - a <= tol``, of the zero of ``tilde_lambda(., 1)``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    f_lo, f_hi = tilde_lambda(lo), tilde_lambda(hi)
    if not (f_lo > 0.0 > f_hi):
        raise ValueError(f"[{lo}, {hi}] does not bracket a sign change: "
                         f"tilde_lambda = {f_lo:.6g}, {f_hi:.6g}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if tilde_lambda(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return lo, hi


@dataclass
class CurveSample:
    xi: float
    lam: float
    residual: float
    variation: float
    coupling_k: int | None
    cf_bound: float | None = None
    error: float | None = None
    failure: str | None = None

    @property
    def ok(self) -> bool:
        return self.failure is None


@dataclass
class LyapunovCurve:
    tmap: MapSpec
    n: int
    samples: list[CurveSample] = field(default_factory=list)

    def __post_init__(self):
        xs = [s.xi for s in self.samples]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("curve samples must have strictly increasing xi")

    @property
    def xi(self) -> np.ndarray:
        return np.array([s.xi for s in self.samples])

    @property
    def lam(self) -> np.ndarray:
        return np.array([s.lam for s in self.samples])


def _sample(tmap, mother, bc, partition, det, xi, tol, max_iter, k_max, with_cf) -> CurveSample:
    kernel = NoiseKernel(mother, xi)
    M = annealed_matrix(tmap, kernel, bc, partition, det=det)
    k = coupling_time(M, k_max)
    try:
        f, info = stationary_density(M, tol=tol, max_iter=max_iter, check_uniqueness=False,
                                     full_output=True)
    except NonConvergence as exc:
        return CurveSample(xi, math.nan, exc.residual, math.nan, k, failure=str(exc))
    cf = None
    if with_cf and k is not None:
        norms = [1.0] * k + [dobrushin(matrix_power(M, k))]
        cf = certified_bound(norms, partition.delta, xi)
    return CurveSample(xi, lyapunov_from_density(tmap, f), info.residual, variation(f), k, cf)


def lyapunov_curve(tmap: MapSpec, mother: MotherKernel | None, bc, n: int, xi_grid: Sequence[float],
                   tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                   k_max: int = DEFAULT_K_MAX, with_cf: bool = True, estimate_error: bool = False,
                   workers: int = 1, det: np.ndarray | None = None) -> LyapunovCurve:
    """Sample ``xi -> lambda(xi)`` on an increasing grid.

    For each amplitude the annealed Ulam matrix is built, its stationary
    density solved and the exponent, L1 residual, density variation and
    coupling time recorded. A failed solve is stored in the sample, not raised.

    With ``estimate_error`` every sample also gets ``|lambda_n - lambda_(n/2)|``.
    """
    xs = [float(x) for x in xi_grid]
    if not xs or any(x <= 0 for x in xs) or any(b <= a for a, b in zip(xs, xs[1:])):
        raise ValueError("xi grid must be non-empty, positive and strictly increasing")
    mother = UniformMother() if mother is None else mother
    partition = Partition(n)
    if det is None:
        det = deterministic_matrix(tmap, partition)

    def one(x):
        return _sample(tmap, mother, bc, partition, det, x, tol, max_iter, k_max, with_cf)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        samples = list(pool.map(one, xs))
    if estimate_error:
        half = n // 2 if (n // 2) % 2 == 0 else n // 2 + 1
        coarse = lyapunov_curve(tmap, mother, bc, half, xs, tol=tol, max_iter=max_iter,
                                k_max=k_max, with_cf=False, workers=workers)
        for s, c in zip(samples, coarse.samples):
            s.error = abs(s.lam - c.lam) if s.ok and c.ok else math.nan
    return LyapunovCurve(tmap, n, samples)


@dataclass
class NioCertificate:
    xi_pos: float
    lambda_pos: float
    margin_pos: float
    xi_neg: float
    lambda_neg: float
    margin_neg: float
    diagnostics_pos: dict = field(default_factory=dict)
    diagnostics_neg: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (self.xi_pos < self.xi_neg and self.lambda_pos > 0.0 > self.lambda_neg):
            raise ValueError("certificate needs xi_pos < xi_neg, lambda_pos > 0 > lambda_neg")

    def as_dict(self) -> dict:
        return asdict(self)


def _diag(s: CurveSample) -> dict:
    return {"residual": s.residual, "variation": s.variation, "coupling_k": s.coupling_k,
            "cf_bound": s.cf_bound, "error": s.error}


def sign_changes(curve: LyapunovCurve) -> list[tuple[float, float]]:
    """Consecutive grid pairs across which lambda changes sign."""
    ok = [s for s in curve.samples if s.ok]
    return [(a.xi, b.xi) for a, b in zip(ok, ok[1:]) if a.lam * b.lam < 0.0]


def detect_nio(curve: LyapunovCurve, margin: float | None = 0.0) -> NioCertificate | None:
    """First pair ``xi1 < xi2`` with ``lambda(xi1) > margin`` and ``lambda(xi2) < -margin``.

    ``margin=None`` uses three times each sample's own discretization error.
    """
    if margin is not None and margin < 0:
        raise ValueError("margin must be >= 0")

    def m(s):
        if margin is not None:
            return margin
        return 3.0 * s.error if s.error is not None and math.isfinite(s.error) else math.inf

    ok = [s for s in curve.samples if s.ok]
    first = next((i for i, s in enumerate(ok) if s.lam > m(s)), None)
    if first is None:
        return None
    pos = ok[first]
    neg = next((s for s in ok[first + 1:] if s.lam < -m(s)), None)
    if neg is None:
        return None
    return NioCertificate(pos.xi, pos.lam, m(pos), neg.xi, neg.lam, m(neg), _diag(pos), _diag(neg))


def parameter_continuity_bound(map1: MapSpec, map2: MapSpec, kernel: NoiseKernel,
                               contraction: ContractionReport) -> float:
    """Bound on ``||f1 - f2||_1`` for the stationary densities of two nearby maps.

    With ``||L1^k on V0|| = c < 1``, telescoping gives
    ``k / (1 - c) * sup|T1 - T2| * Var(rho_xi)``.
    """
    if not contraction.l1_norm < 1.0:
        raise ValueError(f"contraction norm {contraction.l1_norm} is not < 1")
    return contraction.k / (1.0 - contraction.l1_norm) * map_sup_distance(map1, map2) * kernel.variation()


def default_xi_grid(lo: float = 0.01, hi: float = 2.5, count: int = 40) -> np.ndarray:
    return np.geomspace(lo, hi, count)


