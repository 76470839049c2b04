"""Noise kernels: a mother density on [-1, 1] rescaled to amplitude ``xi``.

A mother kernel must provide its density, CDF and total variation in closed
form; the Ulam noise matrix for :class:`UniformMother` is assembled from the
exact box-box convolution, every other mother goes through the CDF.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import Polynomial


class MotherKernel:
    """Interface for a bounded-variation probability density supported on [-1, 1]."""

    def density(self, x):
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    def ppf(self, u):
        raise NotImplementedError

    @property
    def variation(self) -> float:
        """Total variation on the real line (jumps at +-1 included)."""
        raise NotImplementedError


class UniformMother(MotherKernel):
    """``rho = 1/2`` on [-1, 1]."""

    def density(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) <= 1.0, 0.5, 0.0)

    def cdf(self, x):
        return np.clip((np.asarray(x, dtype=float) + 1.0) / 2.0, 0.0, 1.0)

    def ppf(self, u):
        return 2.0 * np.asarray(u, dtype=float) - 1.0

    @property
    def variation(self) -> float:
        return 1.0

    def __eq__(self, other):
        return isinstance(other, UniformMother)

    def __hash__(self):
        return hash("uniform")

    def __repr__(self):
        return "UniformMother()"


class PiecewisePolynomialMother(MotherKernel):
    """Mother kernel given by polynomial pieces between ``breaks``.

    Parameters
    ----------
    breaks : sequence of float
        Increasing breakpoints, first -1 and last 1.
    coefs : sequence of sequence of float
        Power-basis coefficients (lowest degree first) of the density on each
        piece, in the variable ``x``.
    """

    def __init__(self, breaks: Sequence[float], coefs: Sequence[Sequence[float]]):
        b = np.asarray(breaks, dtype=float)
        if b.ndim != 1 or b.size < 2 or b[0] != -1.0 or b[-1] != 1.0 or np.any(np.diff(b) <= 0):
            raise ValueError("breaks must increase from -1 to 1")
        if len(coefs) != b.size - 1:
            raise ValueError("need one coefficient list per piece")
        self.breaks = b
        self.pieces = [Polynomial(c) for c in coefs]
        self._anti = [p.integ() for p in self.pieces]
        masses = [a(hi) - a(lo) for a, lo, hi in zip(self._anti, b[:-1], b[1:])]
        self._cum = np.concatenate([[0.0], np.cumsum(masses)])
        if not math.isclose(self._cum[-1], 1.0, abs_tol=1e-12):
            raise ValueError(f"density integrates to {self._cum[-1]!r}, not 1")
        for p, lo, hi in zip(self.pieces, b[:-1], b[1:]):
            inner = np.linspace(lo, hi, 257)[1:-1]
            if np.any(p(inner) <= 0.0):
                raise ValueError("density must be positive inside [-1, 1]")
        self._variation = self._total_variation()

    @classmethod
    def tent(cls) -> "PiecewisePolynomialMother":
        """``rho(x) = 1 - |x|``."""
        return cls([-1.0, 0.0, 1.0], [[1.0, 1.0], [1.0, -1.0]])

    def _piece_index(self, x: np.ndarray) -> np.ndarray:
        return np.clip(np.searchsorted(self.breaks, x, side="right") - 1, 0, len(self.pieces) - 1)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        idx = self._piece_index(x)
        out = np.zeros_like(x)
        for i, p in enumerate(self.pieces):
            sel = idx == i
            out[sel] = p(x[sel])
        return np.where(np.abs(x) <= 1.0, out, 0.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        xc = np.clip(x, -1.0, 1.0)
        idx = self._piece_index(xc)
        out = np.zeros_like(xc)
        for i, a in enumerate(self._anti):
            sel = idx == i
            out[sel] = self._cum[i] + a(xc[sel]) - a(self.breaks[i])
        return np.clip(out, 0.0, 1.0)

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        lo = np.full(u.shape, -1.0)
        hi = np.full(u.shape, 1.0)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            below = self.cdf(mid) < u
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)

    def _total_variation(self) -> float:
        b = self.breaks
        total = abs(self.pieces[0](-1.0)) + abs(self.pieces[-1](1.0))
        for i in range(1, len(self.pieces)):
            total += abs(self.pieces[i](b[i]) - self.pieces[i - 1](b[i]))
        for p, lo, hi in zip(self.pieces, b[:-1], b[1:]):
            crit = [r.real for r in p.deriv().roots() if abs(r.imag) < 1e-14 and lo < r.real < hi]
            pts = np.array([lo, *sorted(crit), hi])
            total += float(np.sum(np.abs(np.diff(p(pts)))))
        return float(total)

    @property
    def variation(self) -> float:
        return self._variation

    def __eq__(self, other):
        return (
            isinstance(other, PiecewisePolynomialMother)
            and np.array_equal(self.breaks, other.breaks)
            and all(np.array_equal(p.coef, q.coef) for p, q in zip(self.pieces, other.pieces))
        )

    def __hash__(self):
        return hash((self.breaks.tobytes(), tuple(p.coef.tobytes() for p in self.pieces)))

    def __repr__(self):
        return f"PiecewisePolynomialMother(breaks={self.breaks.tolist()})"


MOTHERS = {"uniform": UniformMother, "tent": PiecewisePolynomialMother.tent}


def mother_from_name(name: str) -> MotherKernel:
    try:
        return MOTHERS[name.strip().lower()]()
    except KeyError:
        raise ValueError(f"unknown mother kernel {name!r}; choose from {sorted(MOTHERS)}") from None


@dataclass(frozen=True)
class NoiseKernel:
    """``rho_xi(x) = rho(x / xi) / xi`` for a mother kernel ``rho``."""

    mother: MotherKernel
    xi: float

    def __post_init__(self):
        if not (math.isfinite(self.xi) and self.xi > 0.0):
            raise ValueError(f"noise amplitude xi must be > 0, got {self.xi!r}")

    @classmethod
    def uniform(cls, xi: float) -> "NoiseKernel":
        return cls(UniformMother(), xi)

    def scaled_density(self, x):
        x = np.asarray(x, dtype=float)
        out = self.mother.density(x / self.xi) / self.xi
        return out.item() if out.ndim == 0 else out

    def cdf(self, x):
        out = self.mother.cdf(np.asarray(x, dtype=float) / self.xi)
        return out.item() if np.ndim(out) == 0 else out

    def sample(self, u):
        """Inverse-CDF transform of uniform variates ``u`` in [0, 1)."""
        return self.xi * self.mother.ppf(u)

    def variation(self) -> float:
        return self.mother.variation / self.xi

    def bv_norm(self) -> float:
        """``Var(rho_xi) + ||rho_xi||_1``."""
        return self.variation() + 1.0
