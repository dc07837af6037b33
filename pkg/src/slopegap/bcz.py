"""The BCZ first-return map on the torus transversal.

The transversal is the triangle ``{0 < a <= 1, 0 < b <= 1, a + b > 1}`` and the
horocycle flow returns to it after time ``1/(ab)``, landing at
``(b, -a + floor((1 + a)/b) b)``.  Points may carry exact ``Fraction``
coordinates or floats; the arithmetic follows the coordinate type.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational as _RationalABC

from .exact import farey_count, renormalized_gaps

__all__ = [
    "TransversalPoint",
    "OrbitRecord",
    "in_transversal",
    "bcz_map",
    "return_time",
    "orbit",
    "farey_orbit_equivalence",
    "FLOOR_GUARD",
]

#: distance to an integer below which the floating floor is treated as ambiguous
FLOOR_GUARD = 1e-12


@dataclass(frozen=True)
class TransversalPoint:
    a: object
    b: object

    @property
    def is_exact(self) -> bool:
        return isinstance(self.a, _RationalABC) and isinstance(self.b, _RationalABC)

    def as_float(self) -> tuple[float, float]:
        return float(self.a), float(self.b)

    def __iter__(self):
        yield self.a
        yield self.b


def in_transversal(a, b=None) -> bool:
    """True iff ``0 < a <= 1``, ``0 < b <= 1`` and ``a + b > 1``."""
    if b is None:
        a, b = a
    return 0 < a <= 1 and 0 < b <= 1 and a + b > 1


def _as_point(p) -> TransversalPoint:
    if isinstance(p, TransversalPoint):
        return p
    a, b = p
    return TransversalPoint(a, b)


def _require(p: TransversalPoint):
    if not in_transversal(p.a, p.b):
        raise ValueError(f"point ({p.a}, {p.b}) is outside the transversal")


def _float_floor(a: float, b: float) -> tuple[int, bool]:
    r = (1.0 + a) / b
    n = round(r)
    if abs(r - n) <= FLOOR_GUARD * max(1.0, r):
        return int(n), True
    return math.floor(r), False


def bcz_map(p) -> TransversalPoint:
    """Apply the BCZ map once.  Raises ``ValueError`` outside the transversal."""
    p = _as_point(p)
    _require(p)
    a, b = p.a, p.b
    if p.is_exact:
        a, b = Fraction(a), Fraction(b)
        n = (1 + a) // b
        return TransversalPoint(b, n * b - a)
    a, b = float(a), float(b)
    n, flagged = _float_floor(a, b)
    nb = n * b - a
    if flagged:
        nb = min(nb, 1.0)
    return TransversalPoint(b, nb)


def return_time(p):
    """Return time ``1/(ab)`` of the horocycle flow to the transversal."""
    p = _as_point(p)
    _require(p)
    if p.is_exact:
        return 1 / (Fraction(p.a) * Fraction(p.b))
    return 1.0 / (float(p.a) * float(p.b))


@dataclass(frozen=True)
class OrbitRecord:
    points: tuple[TransversalPoint, ...]
    return_times: tuple
    horocycle_length: object
    flagged_steps: tuple[int, ...] = field(default=())

    def __len__(self):
        return len(self.points)


def _lattice_steps(alpha: int, beta: int, D: int, steps: int):
    """Iterate the map on points ``(alpha/D, beta/D)`` using integers only."""
    out = []
    for _ in range(steps):
        out.append((alpha, beta))
        n = (D + alpha) // beta
        alpha, beta = beta, n * beta - alpha
    return out, (alpha, beta)


def orbit(start, steps: int, mode: str = "auto") -> OrbitRecord:
    """Iterate the BCZ map ``steps`` times from ``start``.

    ``points[i]`` is the i-th visited point and ``return_times[i]`` the return
    time measured leaving it.  ``mode`` is ``"exact"``, ``"float"`` or
    ``"auto"`` (exact iff the start has rational coordinates).

    In float mode with a rational start the orbit stays on the lattice
    ``(1/D) Z^2`` (``D`` the common denominator), so an ambiguous floor is
    recomputed exactly from the rounded lattice coordinates.  For an
    irrational start the floor is rounded to the nearest integer and the step
    is recorded in ``flagged_steps``.
    """
    p = _as_point(start)
    _require(p)
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if mode not in ("auto", "exact", "float"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "auto":
        mode = "exact" if p.is_exact else "float"

    if mode == "exact":
        if not p.is_exact:
            p = TransversalPoint(Fraction(p.a), Fraction(p.b))
        a, b = Fraction(p.a), Fraction(p.b)
        D = a.denominator * b.denominator // math.gcd(a.denominator, b.denominator)
        pairs, _ = _lattice_steps(a.numerator * (D // a.denominator),
                                  b.numerator * (D // b.denominator), D, steps)
        D2 = D * D
        points = tuple(TransversalPoint(Fraction(x, D), Fraction(y, D)) for x, y in pairs)
        prods = [x * y for x, y in pairs]
        times = tuple(Fraction(D2, d) for d in prods)
        # one common denominator instead of a running Fraction sum
        L = math.lcm(*prods) if prods else 1
        total = Fraction(D2 * sum(L // d for d in prods), L)
        return OrbitRecord(points, times, total)

    D = None
    if p.is_exact:
        fa, fb = Fraction(p.a), Fraction(p.b)
        D = fa.denominator * fb.denominator // math.gcd(fa.denominator, fb.denominator)
    a, b = float(p.a), float(p.b)
    points, times, flagged = [], [], []
    for i in range(steps):
        points.append(TransversalPoint(a, b))
        times.append(1.0 / (a * b))
        n, ambiguous = _float_floor(a, b)
        if ambiguous:
            if D is not None:
                alpha, beta = round(a * D), round(b * D)
                n = (D + alpha) // beta
            else:
                flagged.append(i)
        a, b = b, n * b - a
        if ambiguous and D is None:
            b = min(b, 1.0)
    return OrbitRecord(tuple(points), tuple(times), math.fsum(times), tuple(flagged))


def farey_orbit_equivalence(Q: int) -> bool:
    """Check the closed horocycle of length ``Q^2`` against the Farey gaps of order ``Q``.

    The exact orbit from ``(1/Q, 1)`` must produce the renormalized gaps as
    return times, in order, come back to its seed after ``N(Q) - 1`` steps and
    have total length exactly ``Q^2``.
    """
    if Q < 2:
        raise ValueError("Q must be >= 2")
    steps = farey_count(Q) - 1
    pairs, end = _lattice_steps(1, Q, Q, steps)
    if end != (1, Q):
        return False
    products = renormalized_gaps(Q).products
    prods = [x * y for x, y in pairs]
    # both sequences have numerator Q^2, so equal rationals <=> equal denominators
    if prods != [int(d) for d in products]:
        return False
    # sum of Q^2/(xy) equals Q^2  <=>  sum of L/(xy) equals L
    L = math.lcm(*prods)
    return sum(L // d for d in prods) == L
