"""Exact Farey sequences, renormalized gaps and totient counting.

Rationals are :class:`fractions.Fraction` throughout.  Long sequences are also
available as integer denominator arrays, since every Farey gap is
``1/(q*q')`` for consecutive denominators ``q, q'``.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

Rational = Fraction

__all__ = [
    "Rational",
    "FareySequence",
    "GapMultiset",
    "iter_farey",
    "farey_denominators",
    "farey_sequence",
    "totients",
    "farey_count",
    "renormalized_gaps",
    "gap_count_in_interval",
]


def _check_order(Q, minimum=1):
    if isinstance(Q, bool) or not isinstance(Q, (int, np.integer)):
        raise TypeError(f"order must be an integer, got {Q!r}")
    if Q < minimum:
        raise ValueError(f"order must be >= {minimum}, got {Q}")
    return int(Q)


def iter_farey(Q: int) -> Iterator[tuple[int, int]]:
    """Yield ``(p, q)`` for the Farey sequence of order ``Q`` in increasing order.

    Uses the next-term recurrence: from consecutive terms ``p/q < p'/q'`` the
    following term is ``(k p' - p)/(k q' - q)`` with ``k = (q + Q) // q'``.
    """
    Q = _check_order(Q)
    p, q, p1, q1 = 0, 1, 1, Q
    yield p, q
    while p1 <= Q:
        yield p1, q1
        if p1 == 1 and q1 == 1:
            return
        k = (q + Q) // q1
        p, q, p1, q1 = p1, q1, k * p1 - p, k * q1 - q


def farey_denominators(Q: int) -> np.ndarray:
    """Denominators of the Farey sequence of order ``Q`` as an int64 array."""
    Q = _check_order(Q)
    out = np.empty(farey_count(Q), dtype=np.int64)
    q, q1 = 1, Q
    out[0] = 1
    i = 1
    # the numerators are not needed for the denominator recurrence
    while True:
        out[i] = q1
        i += 1
        if q1 == 1:
            break
        k = (q + Q) // q1
        q, q1 = q1, k * q1 - q
    assert i == out.size
    return out


@dataclass(frozen=True)
class FareySequence:
    order: int
    terms: tuple[Fraction, ...]

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)


def farey_sequence(Q: int) -> FareySequence:
    """Return the complete Farey sequence of order ``Q`` as exact fractions."""
    Q = _check_order(Q)
    terms = tuple(Fraction(p, q) for p, q in iter_farey(Q))
    return FareySequence(Q, terms)


_sieve_lock = threading.Lock()
_phi_table = np.zeros(0, dtype=np.int64)
_phi_prefix = np.zeros(0, dtype=np.int64)


def _build_totients(n):
    phi = np.arange(n + 1, dtype=np.int64)
    is_comp = np.zeros(n + 1, dtype=bool)
    for p in range(2, n + 1):
        if is_comp[p]:
            continue
        is_comp[2 * p :: p] = True
        phi[p::p] -= phi[p::p] // p
    return phi


def totients(n: int) -> np.ndarray:
    """Euler's totient for ``0..n`` (index 0 holds 0).

    The table is cached and grown on demand; callers get a read-only view.
    """
    global _phi_table, _phi_prefix
    n = int(n)
    if n < 0:
        raise ValueError("n must be non-negative")
    with _sieve_lock:
        if _phi_table.size <= n:
            size = max(n, 2 * (_phi_table.size - 1), 1024)
            table = _build_totients(size)
            table[0] = 0
            table.flags.writeable = False
            prefix = np.cumsum(table)
            prefix.flags.writeable = False
            _phi_table, _phi_prefix = table, prefix
        view = _phi_table[: n + 1]
    return view


def farey_count(Q: int) -> int:
    """Number of terms of the Farey sequence of order ``Q``: ``1 + sum phi(n)``."""
    Q = _check_order(Q)
    totients(Q)
    return 1 + int(_phi_prefix[Q])


@dataclass(frozen=True)
class GapMultiset:
    """Renormalized Farey gaps ``Q^2 (gamma_{i+1} - gamma_i)`` in occurrence order.

    Each gap equals ``Q^2 / (q_i q_{i+1})``; ``products`` stores the integer
    denominators ``q_i q_{i+1}`` so that large orders stay cheap while every
    gap remains exactly recoverable.
    """

    order: int
    products: np.ndarray

    def __len__(self):
        return int(self.products.size)

    @property
    def gaps(self) -> list[Fraction]:
        q2 = self.order * self.order
        return [Fraction(q2, int(d)) for d in self.products]

    @property
    def raw_gaps(self) -> list[Fraction]:
        return [Fraction(1, int(d)) for d in self.products]

    def as_float(self) -> np.ndarray:
        return float(self.order) ** 2 / self.products.astype(np.float64)

    def sorted_float(self) -> np.ndarray:
        return np.sort(self.as_float())


def renormalized_gaps(Q: int) -> GapMultiset:
    """Renormalized gaps of the Farey sequence of order ``Q >= 2``."""
    Q = _check_order(Q, minimum=2)
    q = farey_denominators(Q)
    products = q[:-1] * q[1:]
    products.flags.writeable = False
    return GapMultiset(Q, products)


def _floor_frac(x: Fraction) -> int:
    return x.numerator // x.denominator


def gap_count_in_interval(Q: int, a, b) -> int:
    """Number of renormalized gaps of order ``Q`` lying in the open interval ``(a, b)``.

    Endpoints may be any real numbers (``b`` may be ``inf``); comparisons are
    exact because float endpoints convert to fractions without rounding.
    """
    Q = _check_order(Q, minimum=2)
    if not a < b:
        raise ValueError(f"need a < b, got ({a}, {b})")
    if a < 0:
        raise ValueError("interval must lie in [0, inf)")
    products = renormalized_gaps(Q).products
    q2 = Q * Q
    # gap = q2/P lies in (a, b)  <=>  q2/b < P < q2/a
    if math.isinf(b):
        lo = 0
    else:
        lo = _floor_frac(q2 / Fraction(b))
    if a == 0:
        mask = products > lo
    else:
        hi = -_floor_frac(-(q2 / Fraction(a)))  # ceil(q2/a)
        mask = (products > lo) & (products < hi)
    return int(np.count_nonzero(mask))
