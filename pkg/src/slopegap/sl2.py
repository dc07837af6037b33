"""One-parameter subgroups of SL2(R), UAK coordinates and the suspension picture.

Near the transversal, SL2(R)/SL2(Z) is the suspension ``{(a, b, s) : 0 <= s < R(a, b)}``
with ``g = p_{a,b} h_s``.  Haar measure is ``c_mu da db ds`` there and the
transversal carries ``m = c_m da db``; for the torus ``c_m = 2`` and
``c_mu = 1/zeta(2)``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .hall import C_M, sample_triangle

__all__ = [
    "ZETA2",
    "C_MU",
    "SL2Element",
    "geodesic",
    "horocycle_unstable",
    "horocycle_stable",
    "upper_triangular",
    "rotation",
    "SuspensionPoint",
    "UAKCoordinates",
    "uak_decompose",
    "uak_compose",
    "thicken",
    "StepFunction",
    "SuspensionEstimate",
    "suspension_integral",
    "cusp_mass",
]

ZETA2 = math.pi**2 / 6
C_MU = 1.0 / ZETA2
DET_TOL = 1e-12


class SL2Element:
    """A 2x2 real matrix of determinant one."""

    __slots__ = ("m",)

    def __init__(self, entries, check: bool = True):
        m = np.array(entries, dtype=np.float64).reshape(2, 2)
        if check:
            det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
            if abs(det - 1.0) > DET_TOL * max(1.0, float(np.abs(m).max()) ** 2):
                raise ValueError(f"determinant {det!r} is not 1")
        m.flags.writeable = False
        self.m = m

    @property
    def entries(self) -> tuple[float, float, float, float]:
        return tuple(float(v) for v in self.m.ravel())

    def det(self) -> float:
        m = self.m
        return float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])

    def __matmul__(self, other: "SL2Element") -> "SL2Element":
        return SL2Element(self.m @ other.m, check=False)

    def inverse(self) -> "SL2Element":
        (p, q), (r, s) = self.m
        return SL2Element([[s, -q], [-r, p]], check=False)

    def distance(self, other: "SL2Element") -> float:
        """Frobenius norm of the difference."""
        return float(np.linalg.norm(self.m - other.m))

    def __repr__(self):
        return f"SL2Element({self.m.tolist()!r})"


def geodesic(t: float) -> SL2Element:
    """``g_t = diag(e^{t/2}, e^{-t/2})``."""
    return SL2Element([[math.exp(t / 2), 0.0], [0.0, math.exp(-t / 2)]], check=False)


def horocycle_unstable(s: float) -> SL2Element:
    """``h_s = [[1, 0], [-s, 1]]``."""
    return SL2Element([[1.0, 0.0], [-s, 1.0]], check=False)


def horocycle_stable(s: float) -> SL2Element:
    """``u_s = [[1, s], [0, 1]]``."""
    return SL2Element([[1.0, s], [0.0, 1.0]], check=False)


def upper_triangular(a: float, b: float) -> SL2Element:
    """``p_{a,b} = [[a, b], [0, 1/a]]``."""
    if a == 0:
        raise ValueError("p_{a,b} needs a != 0")
    return SL2Element([[a, b], [0.0, 1.0 / a]], check=False)


def rotation(theta: float) -> SL2Element:
    """``k_theta = [[cos, sin], [-sin, cos]]``."""
    c, s = math.cos(theta), math.sin(theta)
    return SL2Element([[c, s], [-s, c]], check=False)


@dataclass(frozen=True)
class SuspensionPoint:
    a: float
    b: float
    s: float

    def element(self) -> SL2Element:
        return upper_triangular(self.a, self.b) @ horocycle_unstable(self.s)


@dataclass(frozen=True)
class UAKCoordinates:
    u: float
    t: float
    theta: float

    def element(self) -> SL2Element:
        return uak_compose(self)


def uak_decompose(p: SuspensionPoint) -> UAKCoordinates:
    """Write ``p_{a,b} h_s = u_u g_t k_theta``.

    Matching bottom rows gives ``tan(theta) = s`` and ``e^{-t} = (1 + s^2)/a^2``;
    the top row then gives ``u = ab - a^2 s/(1 + s^2)``, which tends to ``ab``
    as ``s -> 0``.  ``s = 0`` is rejected: the cotangent form of the angle
    used elsewhere is undefined there.
    """
    a, b, s = float(p.a), float(p.b), float(p.s)
    if s == 0:
        raise ValueError("UAK coordinates are singular at s = 0")
    if a <= 0:
        raise ValueError("need a > 0")
    theta = math.atan(s)
    t = 2.0 * math.log(a / math.sqrt(1.0 + s * s))
    u = a * b - a * a * s / (1.0 + s * s)
    return UAKCoordinates(u, t, theta)


def uak_compose(c: UAKCoordinates) -> SL2Element:
    return horocycle_stable(c.u) @ geodesic(c.t) @ rotation(c.theta)


def thicken(
    f: Callable,
    w: float,
    c_m: float = C_M,
    c_mu: float = C_MU,
    min_return: float = 1.0,
    domain: Callable | None = None,
) -> Callable:
    """Spread ``f`` over ``0 <= s <= w`` along the horocycle direction.

    Returns ``F(a, b, s) = c_m/(c_mu w) f(a, b) 1[0 <= s <= w]``, zero off the
    transversal, so that the Haar integral of ``F`` equals ``m(f)``.
    Requires ``0 < w < min_return``.  ``f`` and ``domain`` must accept arrays.
    """
    if not 0 < w < min_return:
        raise ValueError(f"need 0 < w < {min_return}, got {w}")
    scale = c_m / (c_mu * w)
    if domain is None:
        def domain(a, b):
            return (a > 0) & (a <= 1) & (b > 0) & (b <= 1) & (a + b > 1)

    def thickened(a, b, s):
        a, b, s = np.asarray(a, float), np.asarray(b, float), np.asarray(s, float)
        inside = domain(a, b) & (s >= 0) & (s <= w)
        val = np.where(inside, f(a, b), 0.0)
        return scale * val

    thickened.scale = scale
    thickened.width = w
    return thickened


@dataclass(frozen=True)
class StepFunction:
    """Piecewise-constant function on a uniform grid of ``[0,1]^2``, restricted to the transversal."""

    values: np.ndarray  # shape (nx, ny), row index along a

    def __call__(self, a, b):
        a = np.asarray(a, float)
        b = np.asarray(b, float)
        nx, ny = self.values.shape
        i = np.clip(np.ceil(a * nx).astype(int) - 1, 0, nx - 1)
        j = np.clip(np.ceil(b * ny).astype(int) - 1, 0, ny - 1)
        inside = (a > 0) & (a <= 1) & (b > 0) & (b <= 1) & (a + b > 1)
        return np.where(inside, self.values[i, j], 0.0)

    @classmethod
    def random(cls, rng: np.random.Generator, shape=(4, 4)) -> "StepFunction":
        return cls(rng.uniform(-1.0, 2.0, size=shape))

    def lebesgue_measure(self, c_m: float = C_M) -> float:
        """``m(f)`` by two-dimensional quadrature, cell by cell."""
        nx, ny = self.values.shape
        total = 0.0
        for i in range(nx):
            a0, a1 = i / nx, (i + 1) / nx
            for j in range(ny):
                b0, b1 = j / ny, (j + 1) / ny
                if a1 + b1 <= 1:
                    continue
                area, _ = integrate.dblquad(
                    lambda b, a: 1.0,
                    a0,
                    a1,
                    lambda a: min(b1, max(b0, 1.0 - a)),
                    lambda a: b1,
                    epsabs=1e-13,
                )
                total += self.values[i, j] * area
        return c_m * total


def cusp_mass(r_max: float, c_mu: float = C_MU) -> float:
    """Haar mass of the torus cusp region ``{R(a, b) > r_max}`` in the suspension."""
    k = 1.0 / r_max
    if k >= 1:
        return 1.0

    def inner(a):
        # integral of 1/(ab) db over 1-a < b < min(1, k/a)
        hi = min(1.0, k / a)
        lo = 1.0 - a
        if hi <= lo:
            return 0.0
        return math.log(hi / lo) / a

    pts = []
    if k < 0.25:
        r = math.sqrt(1 - 4 * k)
        pts = [(1 - r) / 2, (1 + r) / 2]
    edges = [0.0] + pts + [k, 1.0]
    edges = sorted(set(e for e in edges if 0 <= e <= 1))
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, _ = integrate.quad(inner, lo, hi, epsabs=1e-14, epsrel=1e-12, limit=200)
        total += v
    return c_mu * total


@dataclass(frozen=True)
class SuspensionEstimate:
    value: float
    stderr: float
    samples: int
    seed: int
    r_max: float
    truncated_mass: float
    cusp_warning: bool


def _threads():
    try:
        return max(1, int(os.environ.get("SLOPEGAP_THREADS", "1")))
    except ValueError:
        return 1


def suspension_integral(
    g: Callable,
    samples: int = 10**6,
    seed: int = 0,
    r_max: float = 1e4,
    c_mu: float = C_MU,
    chunk: int = 1 << 17,
    threads: int | None = None,
) -> SuspensionEstimate:
    """Monte Carlo estimate of the Haar integral of ``g(a, b, s)`` on the torus.

    ``(a, b)`` is uniform on the triangle and ``s`` uniform on ``[0, R(a, b))``,
    so each sample contributes ``c_mu * area * R * g``.  Points with
    ``R > r_max`` are dropped; the Haar mass of that cusp region is reported in
    ``truncated_mass`` and ``cusp_warning`` is set if ``g`` was nonzero there.

    Each chunk draws from its own child of ``SeedSequence(seed)``, so results
    depend on ``(seed, samples, chunk)`` but not on the thread count.
    """
    if samples <= 0:
        raise ValueError("samples must be positive")
    sizes = [chunk] * (samples // chunk)
    if samples % chunk:
        sizes.append(samples % chunk)
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))

    def work(args):
        n, ss = args
        rng = np.random.default_rng(ss)
        a, b = sample_triangle(rng, n)
        R = 1.0 / (a * b)
        s = rng.random(n) * R
        vals = np.asarray(g(a, b, s), dtype=np.float64) * R
        cut = R > r_max
        warn = bool(np.any(vals[cut] != 0))
        vals[cut] = 0.0
        return vals.sum(), np.square(vals).sum(), warn

    n_threads = threads or _threads()
    if n_threads > 1:
        with ThreadPoolExecutor(n_threads) as ex:
            parts = list(ex.map(work, zip(sizes, seqs)))
    else:
        parts = [work(x) for x in zip(sizes, seqs)]
    s1 = math.fsum(p[0] for p in parts)
    s2 = math.fsum(p[1] for p in parts)
    mean = s1 / samples
    var = max(s2 / samples - mean * mean, 0.0)
    scale = c_mu * 0.5  # triangle area
    return SuspensionEstimate(
        value=scale * mean,
        stderr=scale * math.sqrt(var / samples),
        samples=samples,
        seed=seed,
        r_max=r_max,
        truncated_mass=cusp_mass(r_max, c_mu),
        cusp_warning=any(p[2] for p in parts),
    )
