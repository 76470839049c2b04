"""Unimodal maps ``T(x) = 2 beta |x|**alpha - 1`` on [-1, 1] and boundary folding.

Anything exposing ``evaluate`` and ``branches`` (a list of :class:`MonotoneBranch`)
can be discretized by :mod:`nio.ulam`; :class:`MapSpec` is the concrete family
used everywhere else.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence

import numpy as np

# slack when checking |x| <= 1 on inputs produced by floating point arithmetic
_DOMAIN_SLACK = 1e-12


class Side(enum.Enum):
    LEFT = "left"
    RIGHT = "right"


class BoundaryCondition(enum.Enum):
    PERIODIC = "periodic"
    REFLECTING = "reflecting"

    @classmethod
    def parse(cls, value: "str | BoundaryCondition") -> "BoundaryCondition":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(
                f"boundary must be 'periodic' or 'reflecting', got {value!r}"
            ) from None


@dataclass(frozen=True)
class MonotoneBranch:
    """A piece ``[lo, hi]`` of the domain on which the map is continuous and monotone.

    ``inverse`` maps points of the image back into ``[lo, hi]``; it is only
    ever called with arguments clipped to ``[image_lo, image_hi]``.
    """

    lo: float
    hi: float
    increasing: bool
    image_lo: float
    image_hi: float
    inverse: Callable[[np.ndarray], np.ndarray]


class IntervalMap(Protocol):
    def evaluate(self, x): ...

    def branches(self) -> Sequence[MonotoneBranch]: ...


def _check_domain(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + _DOMAIN_SLACK) or np.any(np.isnan(x)):
        raise ValueError("x must lie in [-1, 1]")
    return x


def _unwrap(value):
    return value.item() if isinstance(value, np.ndarray) and value.ndim == 0 else value


@dataclass(frozen=True)
class MapSpec:
    """The map ``T(x) = 2*beta*|x|**alpha - 1`` with ``alpha > 1`` and ``0 < beta <= 1``."""

    alpha: float
    beta: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 1.0):
            raise ValueError(f"alpha must be > 1, got {self.alpha!r}")
        if not (math.isfinite(self.beta) and 0.0 < self.beta <= 1.0):
            raise ValueError(f"beta must be in (0, 1], got {self.beta!r}")

    def evaluate(self, x):
        x = _check_domain(x)
        return _unwrap(2.0 * self.beta * np.abs(x) ** self.alpha - 1.0)

    def log_abs_derivative(self, x):
        """``log|T'(x)| = log(2 alpha beta) + (alpha - 1) log|x|``.

        The critical point ``x = 0`` gives ``-inf`` (never NaN).
        """
        x = _check_domain(x)
        with np.errstate(divide="ignore"):
            out = math.log(2.0 * self.alpha * self.beta) + (self.alpha - 1.0) * np.log(np.abs(x))
        return _unwrap(out)

    def branch_inverse(self, y: float, side: Side) -> float | None:
        """Preimage of ``y`` on the chosen side, or None when ``y`` is not in the image."""
        top = 2.0 * self.beta - 1.0
        if not (-1.0 <= y <= top):
            return None
        x = self._inverse_abs(np.asarray(y, dtype=float)).item()
        return x if Side(side) is Side.RIGHT else -x

    def _inverse_abs(self, y: np.ndarray) -> np.ndarray:
        return np.clip((y + 1.0) / (2.0 * self.beta), 0.0, 1.0) ** (1.0 / self.alpha)

    def branches(self) -> list[MonotoneBranch]:
        top = 2.0 * self.beta - 1.0
        return [
            MonotoneBranch(-1.0, 0.0, False, -1.0, top, lambda y: -self._inverse_abs(y)),
            MonotoneBranch(0.0, 1.0, True, -1.0, top, self._inverse_abs),
        ]

    def log_derivative_cell_integrals(self, edges) -> np.ndarray:
        """Exact ``integral of log|T'|`` over each cell ``[edges[i], edges[i+1]]``.

        Uses the antiderivative ``x log|x| - x`` of ``log|x|``, which is
        continuous at 0, so cells touching the critical point are exact too.
        """
        e = np.asarray(edges, dtype=float)
        safe = np.where(e == 0.0, 1.0, e)
        anti = np.where(e == 0.0, 0.0, e * np.log(np.abs(safe)) - e)
        return math.log(2.0 * self.alpha * self.beta) * np.diff(e) + (self.alpha - 1.0) * np.diff(anti)


def fold(bc: BoundaryCondition | str, x):
    """Bring points of the real line back to [-1, 1].

    Periodic identifies ``x`` with ``x + 2``; reflecting is
    ``min_i |(x + 1) - 4 i| - 1``, a mirror at both endpoints.
    """
    bc = BoundaryCondition.parse(bc)
    x = np.asarray(x, dtype=float)
    if bc is BoundaryCondition.PERIODIC:
        out = np.mod(x + 1.0, 2.0) - 1.0
    else:
        u = x + 1.0
        i0 = np.floor(u / 4.0)
        out = np.minimum(np.abs(u - 4.0 * i0), np.abs(u - 4.0 * (i0 + 1.0))) - 1.0
    return _unwrap(out)


def _sup_bound_power_term(alpha: float, h: float, k: float) -> float:
    # max over x in [0, 1] of 2|h| x^alpha + 2 x^alpha (1 - x^k)
    if k == 0.0:
        return 2.0 * h
    t = (1.0 + h) * alpha / (alpha + k)  # stationary point of the bound, as x^k
    if t >= 1.0:
        return 2.0 * h
    return 2.0 * t ** (alpha / k) * (h + 1.0 - t)


def map_sup_distance(map1: MapSpec, map2: MapSpec) -> float:
    """Upper bound on ``sup_x |T2(x) - T1(x)|`` for two maps of the family.

    Pointwise, with ``h = |beta2 - beta1|``, ``k = |alpha2 - alpha1|`` and
    ``a = min(alpha1, alpha2)``::

        |T2(x) - T1(x)| <= 2 h |x|^a + 2 |x|^a (1 - |x|^k)

    and the right-hand side is maximized over ``|x| <= 1`` in closed form.
    """
    h = abs(map2.beta - map1.beta)
    k = abs(map2.alpha - map1.alpha)
    return _sup_bound_power_term(min(map1.alpha, map2.alpha), h, k)
