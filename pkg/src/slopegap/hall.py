"""Hall's distribution as the law of the return time ``1/(ab)`` on the torus transversal.

Every value is an area of a hyperbola-bounded piece of the triangle
``{0 < a <= 1, 1 - a < b <= 1}``, obtained by integrating the vertical extent
of the piece over ``a``.  The extent is known in closed form for each slice;
only the one-dimensional integral is numeric.  Breakpoints where the
hyperbola ``ab = k`` meets ``b = 1`` or ``b = 1 - a`` are located analytically
and handed to the integrator, so each sub-integral has a smooth integrand.

The normalized Lebesgue measure on the transversal is ``m = 2 da db``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

__all__ = [
    "C_M",
    "ReturnTimeRegion",
    "region_area",
    "region_measure",
    "hall_cdf",
    "hall_cdf_array",
    "hall_density",
    "detect_nonanalyticity",
    "monte_carlo_cdf",
    "sample_triangle",
]

C_M = 2.0

_QUAD = dict(epsabs=1e-14, epsrel=1e-13, limit=200)


@dataclass(frozen=True)
class ReturnTimeRegion:
    """The set ``{(a, b) in Omega : c <= 1/(ab) <= d}``."""

    c: float
    d: float = math.inf

    def __post_init__(self):
        if not (self.c >= 0 and self.c < self.d):
            raise ValueError(f"need 0 <= c < d, got ({self.c}, {self.d})")


def _hyperbola_breaks(k):
    """Abscissae where ``ab = k`` crosses ``b = 1 - a`` (if it does) and ``b = 1``."""
    pts = []
    if 0 < k < 0.25:
        r = math.sqrt(1.0 - 4.0 * k)
        pts += [(1.0 - r) / 2.0, (1.0 + r) / 2.0]
    if 0 < k < 1:
        pts.append(k)
    return sorted(p for p in pts if 0.0 < p < 1.0)


def _extent(a, k_lo, k_hi):
    # vertical extent of {k_lo <= ab <= k_hi} inside the triangle at abscissa a
    lo = max(1.0 - a, k_lo / a)
    hi = 1.0 if math.isinf(k_hi) else min(1.0, k_hi / a)
    return max(0.0, hi - lo)


def region_area(c: float, d: float = math.inf) -> float:
    """Euclidean area of ``{c <= 1/(ab) <= d}`` inside the triangle."""
    region = ReturnTimeRegion(c, d)
    # c <= 1/(ab) <= d  <=>  1/d <= ab <= 1/c
    k_lo = 0.0 if math.isinf(region.d) else 1.0 / region.d
    k_hi = math.inf if region.c == 0 else 1.0 / region.c
    if k_lo >= 1.0:
        return 0.0
    if math.isinf(k_hi) and k_lo == 0.0:
        return 0.5
    breaks = sorted(set(_hyperbola_breaks(k_lo) + (_hyperbola_breaks(k_hi) if k_hi < 1 else [])))
    edges = [0.0] + breaks + [1.0]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi - lo <= 0:
            continue
        val, _ = integrate.quad(_extent, lo, hi, args=(k_lo, k_hi), **_QUAD)
        total += val
    return total


def region_measure(c: float, d: float = math.inf) -> float:
    """Normalized measure ``m`` of the set where the return time lies in ``[c, d]``.

    ``d = inf`` integrates the complement ``{ab < 1/c}`` directly.
    """
    return C_M * region_area(c, d)


def hall_cdf(x: float) -> float:
    """``m{R <= x}``; zero below the minimum return time 1."""
    if x <= 1.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    return C_M * _upper_area_quad(1.0 / x)


def _upper_area_quad(k):
    # area of {ab >= k} in the triangle, 0 < k < 1
    edges = [0.0] + _hyperbola_breaks(k) + [1.0]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(_extent, lo, hi, args=(k, math.inf), **_QUAD)
        total += val
    return total


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)
_CHUNK = 1 << 16


def _gl(fn, lo, hi):
    # fixed-order Gauss-Legendre over [lo, hi], vectorized over the leading axis
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    a = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    return half * (fn(a) @ _GL_WEIGHTS)


def hall_cdf_array(xs) -> np.ndarray:
    """Vectorized :func:`hall_cdf` using Gauss-Legendre panels between breakpoints.

    Each panel integrand is smooth (``1 - k/a`` or ``a``) on an interval whose
    endpoints differ by at most a factor 4, so 24 nodes reach round-off.
    """
    xs = np.asarray(xs, dtype=np.float64)
    if xs.size > _CHUNK:
        flat = xs.ravel()
        parts = [hall_cdf_array(flat[i : i + _CHUNK]) for i in range(0, flat.size, _CHUNK)]
        return np.concatenate(parts).reshape(xs.shape)
    out = np.zeros(xs.shape)
    flat = xs.ravel()
    res = out.ravel()
    res[np.isinf(flat)] = 1.0
    sel = np.isfinite(flat) & (flat > 1.0)
    if not sel.any():
        return out
    k = 1.0 / flat[sel]
    area = np.empty_like(k)

    big = k >= 0.25
    if big.any():
        kb = k[big]
        area[big] = _gl(lambda a: 1.0 - kb[:, None] / a, kb, np.ones_like(kb))
    small = ~big
    if small.any():
        ks = k[small]
        r = np.sqrt(1.0 - 4.0 * ks)
        am, ap = (1.0 - r) / 2.0, (1.0 + r) / 2.0
        left = _gl(lambda a: 1.0 - ks[:, None] / a, ks, am)
        middle = _gl(lambda a: a, am, ap)
        right = _gl(lambda a: 1.0 - ks[:, None] / a, ap, np.ones_like(ks))
        area[small] = left + middle + right
    res[sel] = C_M * area
    return out


def hall_density(x: float, h: float = 1e-4) -> float:
    """Central-difference derivative of :func:`hall_cdf` (a numeric derivative, not a formula)."""
    if x <= 0 or h <= 0:
        raise ValueError("need x > 0 and h > 0")
    return (hall_cdf(x + h) - hall_cdf(x - h)) / (2.0 * h)


def detect_nonanalyticity(grid, factor: float = 5.0) -> list[float]:
    """Candidate points where the CDF stops being analytic.

    The centred third difference of the CDF is taken at every grid point with
    the grid spacing as step; grid points where it is a local maximum and
    exceeds ``factor`` times its median are returned.
    """
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size < 100:
        raise ValueError("grid needs at least 100 points")
    if np.any(np.diff(grid) <= 0) or grid[0] <= 0:
        raise ValueError("grid must be sorted, strictly increasing and positive")
    h = float(np.median(np.diff(grid)))
    F = hall_cdf_array
    d3 = np.abs(F(grid + 1.5 * h) - 3 * F(grid + 0.5 * h) + 3 * F(grid - 0.5 * h) - F(grid - 1.5 * h))
    threshold = factor * float(np.median(d3))
    padded = np.concatenate(([-np.inf], d3, [-np.inf]))
    is_peak = (d3 >= padded[:-2]) & (d3 > padded[2:])
    hits = np.nonzero(is_peak & (d3 > threshold) & (d3 > 0))[0]
    return [float(grid[i]) for i in hits]


def sample_triangle(rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform samples on the transversal triangle by folding the unit square."""
    a = 1.0 - rng.random(n)  # (0, 1]
    b = 1.0 - rng.random(n)
    flip = a + b <= 1.0
    a[flip], b[flip] = 1.0 - a[flip], 1.0 - b[flip]
    return a, b


def monte_carlo_cdf(xs, samples: int = 10**7, seed: int = 0, chunk: int = 10**6):
    """Monte Carlo estimates of ``m{R <= x}`` with their standard errors."""
    xs = np.atleast_1d(np.asarray(xs, dtype=np.float64))
    rng = np.random.default_rng(seed)
    hits = np.zeros(xs.size, dtype=np.int64)
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        a, b = sample_triangle(rng, n)
        ab = np.sort(a * b)
        # R <= x  <=>  ab >= 1/x
        hits += n - np.searchsorted(ab, 1.0 / xs, side="left")
        done += n
    p = hits / samples
    return p, np.sqrt(p * (1.0 - p) / samples)
