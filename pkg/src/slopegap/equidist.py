"""Equidistribution experiments for closed horocycles on the torus transversal.

The closed horocycle of length ``L = Q^2`` meets the transversal in the BCZ
orbit of ``(1/Q, 1)``.  This module measures how fast the hitting measure on
that orbit approaches Lebesgue measure ``m``, and fits the decay on log-log
axes for comparison with the effective rates:

* KS distance of renormalized gaps to Hall's law, bounded by ``C log(L) L^{-1/15}``;
* counting deviation ``|2 zeta(2) hits/L - 1|``, of order ``log(L)/sqrt(L)``;
* ``|rho(f) - m(f)|`` for an indicator, bounded by ``C log(L) L^{-1/30}``.

Hits per period are counted on the half-open segment ``[0, L)``, i.e.
``N(Q) - 1``; ``convention="closed"`` counts both endpoints (``N(Q)``).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .bcz import _lattice_steps, in_transversal
from .exact import farey_count, renormalized_gaps
from .hall import C_M, hall_cdf_array, region_measure
from .sl2 import C_MU, ZETA2

__all__ = [
    "EmpiricalMeasure",
    "DecayFit",
    "QUANTITIES",
    "RATE_BOUNDS",
    "hitting_measure",
    "return_time_indicator",
    "rho_integral",
    "hits_per_period",
    "counting_deviation",
    "nu_of_thickened",
    "ks_discrepancy",
    "rho_error",
    "measure_errors",
    "fit_power_law",
    "fit_decay",
    "calibrate_bound",
]

QUANTITIES = ("ks", "counting", "rho_error")

#: slope each quantity's log-log fit against L must not exceed
RATE_BOUNDS = {"ks": -1.0 / 15.0, "counting": -0.4, "rho_error": -1.0 / 30.0}


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Uniform probability measure on finitely many transversal points."""

    points: np.ndarray  # shape (n, 2)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) == 0:
            raise ValueError("points must be a non-empty (n, 2) array")
        a, b = pts[:, 0], pts[:, 1]
        if not np.all((a > 0) & (a <= 1) & (b > 0) & (b <= 1) & (a + b > 1)):
            raise ValueError("all points must lie in the transversal")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    @property
    def weights(self) -> np.ndarray:
        return np.full(len(self.points), 1.0 / len(self.points))


def hitting_measure(Q: int) -> EmpiricalMeasure:
    """Counting measure on the closed horocycle of length ``Q^2`` (``N(Q) - 1`` points)."""
    if Q < 2:
        raise ValueError("Q must be >= 2")
    pairs, end = _lattice_steps(1, Q, Q, farey_count(Q) - 1)
    assert end == (1, Q), "orbit of (1/Q, 1) failed to close"
    pts = np.asarray(pairs, dtype=np.float64) / Q
    return EmpiricalMeasure(pts)


def return_time_indicator(c: float, d: float) -> Callable:
    """Vectorized indicator of ``{c <= 1/(ab) <= d}``."""

    def f(a, b):
        r = 1.0 / (np.asarray(a, float) * np.asarray(b, float))
        return ((r >= c) & (r <= d)).astype(np.float64)

    f.interval = (c, d)
    return f


def rho_integral(mu: EmpiricalMeasure, f: Callable) -> float:
    """Average of ``f`` over the points of ``mu``; ``f`` takes arrays ``a, b``."""
    vals = np.asarray(f(mu.points[:, 0], mu.points[:, 1]), dtype=np.float64)
    return math.fsum(vals) / len(mu)


def hits_per_period(Q: int, convention: str = "half-open") -> int:
    if convention == "half-open":
        return farey_count(Q) - 1
    if convention == "closed":
        return farey_count(Q)
    raise ValueError(f"unknown convention {convention!r}")


def counting_deviation(Q: int, convention: str = "half-open") -> float:
    """``|2 zeta(2) hits / Q^2 - 1|``, the relative gap between hit count and length."""
    if Q < 2:
        raise ValueError("Q must be >= 2")
    hits = hits_per_period(Q, convention)
    return abs((C_M / C_MU) * hits / (Q * Q) - 1.0)


def nu_of_thickened(Q: int, f: Callable, mu: EmpiricalMeasure | None = None) -> float:
    """Horocycle-length average of the thickening of ``f``: ``(c_m/c_mu) (hits/L) rho(f)``."""
    if mu is None:
        mu = hitting_measure(Q)
    return (C_M / C_MU) * len(mu) / (Q * Q) * rho_integral(mu, f)


def ks_discrepancy(Q: int) -> float:
    """Sup distance between the empirical CDF of the gaps of order ``Q`` and Hall's CDF.

    Between jumps the empirical CDF is flat and Hall's CDF is monotone, so the
    supremum is attained at a one-sided limit at a jump; both sides are checked.
    """
    gaps = renormalized_gaps(Q).sorted_float()
    values, counts = np.unique(gaps, return_counts=True)
    after = np.cumsum(counts) / gaps.size
    before = after - counts / gaps.size
    F = hall_cdf_array(values)
    return float(max(np.abs(after - F).max(), np.abs(before - F).max()))


_RHO_INTERVAL = (1.0, 2.0)


def rho_error(Q: int, interval=_RHO_INTERVAL) -> float:
    """``|rho_Q(f) - m(f)|`` for the indicator of ``{c <= R <= d}``."""
    c, d = interval
    return abs(rho_integral(hitting_measure(Q), return_time_indicator(c, d)) - region_measure(c, d))


_QUANTITY_FNS = {"ks": ks_discrepancy, "counting": counting_deviation, "rho_error": rho_error}


def _threads():
    try:
        return max(1, int(os.environ.get("SLOPEGAP_THREADS", "1")))
    except ValueError:
        return 1


def measure_errors(quantity: str, Qs: Sequence[int], threads: int | None = None) -> list[float]:
    """Evaluate ``quantity`` at every ``Q``; results are returned in ``Qs`` order."""
    if quantity not in _QUANTITY_FNS:
        raise ValueError(f"unknown quantity {quantity!r}; choose from {QUANTITIES}")
    fn = _QUANTITY_FNS[quantity]
    n = threads or _threads()
    if n > 1:
        with ThreadPoolExecutor(n) as ex:
            return list(ex.map(fn, Qs))
    return [fn(Q) for Q in Qs]


@dataclass(frozen=True)
class DecayFit:
    lengths: tuple[float, ...]
    errors: tuple[float, ...]
    slope: float
    intercept: float
    r_squared: float
    excluded: int = 0
    quantity: str | None = None
    Qs: tuple[int, ...] = field(default=())

    @property
    def bound(self) -> float | None:
        return RATE_BOUNDS.get(self.quantity)

    @property
    def passed(self) -> bool | None:
        b = self.bound
        return None if b is None else self.slope <= b

    def report(self) -> dict:
        d = asdict(self)
        d["rate_bound"] = self.bound
        d["pass"] = self.passed
        return d


def fit_power_law(lengths, errors, quantity=None, Qs=()) -> DecayFit:
    """Least-squares line through ``(log L, log error)``.

    Errors within ten machine epsilons of zero are dropped and counted in
    ``excluded``; fewer than two usable points is an error.
    """
    L = np.asarray(lengths, dtype=np.float64)
    E = np.asarray(errors, dtype=np.float64)
    if L.shape != E.shape or L.size < 2:
        raise ValueError("need matching lengths and errors, at least two of each")
    if np.any(np.diff(L) <= 0):
        raise ValueError("lengths must be strictly increasing")
    if np.any(E < 0):
        raise ValueError("errors must be non-negative")
    keep = E > 10 * np.finfo(float).eps
    if keep.sum() < 2:
        raise ValueError("fewer than two positive errors; cannot fit a power law")
    x, y = np.log(L[keep]), np.log(E[keep])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(
        lengths=tuple(float(v) for v in L),
        errors=tuple(float(v) for v in E),
        slope=float(slope),
        intercept=float(intercept),
        r_squared=r2,
        excluded=int((~keep).sum()),
        quantity=quantity,
        Qs=tuple(int(q) for q in Qs),
    )


def fit_decay(quantity: str, Qs: Sequence[int], threads: int | None = None) -> DecayFit:
    """Measure ``quantity`` along ``Qs`` and fit its decay against ``L = Q^2``."""
    Qs = sorted(int(q) for q in Qs)
    if len(Qs) < 3:
        raise ValueError("need at least three values of Q")
    errors = measure_errors(quantity, Qs, threads)
    return fit_power_law([q * q for q in Qs], errors, quantity=quantity, Qs=Qs)


def calibrate_bound(Qs: Sequence[int], errors: Sequence[float], exponent: float = 1.0 / 15.0):
    """Fit ``C`` in ``C log(L) L^{-exponent}`` at the first ``Q``, then test the rest.

    Returns ``(C, bounds, holds)`` with ``bounds[i]`` the calibrated bound at ``Qs[i]``.
    """
    Ls = [float(q) ** 2 for q in Qs]
    shape = [math.log(L) * L ** (-exponent) for L in Ls]
    C = errors[0] / shape[0]
    bounds = [C * s for s in shape]
    holds = all(e <= b * (1 + 1e-12) for e, b in zip(errors[1:], bounds[1:]))
    return C, bounds, holds
