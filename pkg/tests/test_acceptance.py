"""Acceptance gate: one test per criterion, one PASS/FAIL line each.

Lines are printed as the tests run and collected again in the terminal
summary.  The thresholds here are the contract; do not loosen them.
"""

import math
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from slopegap.bcz import _lattice_steps, farey_orbit_equivalence, orbit
from slopegap.equidist import (
    calibrate_bound,
    counting_deviation,
    fit_decay,
    fit_power_law,
    hits_per_period,
    hitting_measure,
    return_time_indicator,
)
from slopegap.exact import farey_count, renormalized_gaps
from slopegap.hall import detect_nonanalyticity, hall_cdf, monte_carlo_cdf, region_measure, sample_triangle
from slopegap.sl2 import StepFunction, SuspensionPoint, horocycle_unstable, suspension_integral, thicken, uak_decompose
from slopegap.surface import TORUS, min_return_time, surface_gap_cdf, torus_spec, validate_surface

from conftest import CRITERIA

README = Path(__file__).resolve().parents[1] / "README.md"


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    CRITERIA.append(line)
    return ok


def brute_totient(n):
    return sum(1 for k in range(1, n + 1) if math.gcd(k, n) == 1)


def test_criterion_1_orbit_equals_farey_gaps():
    t0 = time.perf_counter()
    bad = [Q for Q in range(2, 301) if not farey_orbit_equivalence(Q)]
    # full Fraction comparison on a spread of orders as a second path
    for Q in list(range(2, 60)) + [97, 150, 211, 300]:
        rec = orbit((Fraction(1, Q), Fraction(1)), farey_count(Q) - 1, mode="exact")
        if list(rec.return_times) != renormalized_gaps(Q).gaps or rec.horocycle_length != Q * Q:
            bad.append(Q)
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 30
    report(1, ok, f"Q in [2,300], mismatches={sorted(set(bad))}, {elapsed:.1f}s (limit 30s)")
    assert ok


def test_criterion_2_counting_law():
    phi_sum = 0
    bad = []
    for Q in range(1, 301):
        phi_sum += brute_totient(Q)
        if farey_count(Q) != 1 + phi_sum:
            bad.append(Q)
        if Q >= 2:
            pairs, end = _lattice_steps(1, Q, Q, farey_count(Q) - 1)
            # the seed is first revisited after exactly N(Q) - 1 steps
            first_return = next((i for i, p in enumerate(pairs[1:], 1) if p == (1, Q)), len(pairs))
            if end != (1, Q) or first_return != len(pairs) or hits_per_period(Q) + 1 != farey_count(Q):
                bad.append(Q)
    density = abs(farey_count(10**4) / 1e8 - 3 / math.pi**2)
    ok = not bad and density <= 5e-3
    report(2, ok, f"hits+1 = N(Q) = 1+Phi(Q) for Q<=300 (mismatches={bad}); "
                  f"|N(1e4)/1e8 - 3/pi^2| = {density:.3e} (<= 5e-3)")
    assert ok


def test_criterion_3_counting_deviation_rate():
    t0 = time.perf_counter()
    Qs = [10**2, 10**3, 10**4]
    fit = fit_decay("counting", Qs)
    closed = fit_power_law([q * q for q in Qs], [counting_deviation(q, "closed") for q in Qs])
    dense_Qs = sorted({int(q) for q in np.geomspace(100, 10000, 25)})
    dense = fit_power_law([q * q for q in dense_Qs], [counting_deviation(q) for q in dense_Qs])
    elapsed = time.perf_counter() - t0
    ok = fit.slope <= -0.4 and elapsed < 120
    report(3, ok, f"slope {fit.slope:.4f} (need <= -0.4), errors {[f'{e:.3e}' for e in fit.errors]}; "
                  f"for reference: closed-endpoint slope {closed.slope:.4f}, 25-point grid slope {dense.slope:.4f}; "
                  f"{elapsed:.1f}s")
    assert ok


def test_criterion_4_hall_distribution():
    xs = np.array([1.5, 2.0, 3.0, 5.0, 10.0])
    p, se = monte_carlo_cdf(xs, samples=10**7, seed=12345)
    exact = np.array([hall_cdf(x) for x in xs])
    z = (exact - p) / se
    closed = abs(hall_cdf(2.0) - (1 - math.log(2)))
    kinks = detect_nonanalyticity(np.linspace(1, 10, 10**4))
    ok = bool(np.all(np.abs(z) <= 3)) and closed <= 1e-3 and len(kinks) == 2
    report(4, ok, f"MC z-scores {np.round(z, 2).tolist()}; |F(2) - (1 - ln 2)| = {closed:.1e}; "
                  f"kinks {[round(k, 4) for k in kinks]}")
    assert ok


def test_criterion_5_gap_convergence():
    t0 = time.perf_counter()
    fit = fit_decay("ks", [100, 300, 1000, 3000])
    errs = fit.errors
    decreasing = all(b < a for a, b in zip(errs, errs[1:]))
    C, bounds, holds = calibrate_bound(fit.Qs, errs, 1.0 / 15.0)
    elapsed = time.perf_counter() - t0
    ok = decreasing and fit.slope <= -1 / 15 and holds and elapsed < 300
    report(5, ok, f"KS {[f'{e:.3e}' for e in errs]}, slope {fit.slope:.3f} (<= {-1/15:.4f}), "
                  f"C={C:.3e}, calibrated bound holds={holds}, {elapsed:.1f}s")
    assert ok


def test_criterion_6_measure_identity():
    t0 = time.perf_counter()
    cases = [("indicator R in [1,2]", return_time_indicator(1.0, 2.0), region_measure(1.0, 2.0))]
    for k in range(5):
        f = StepFunction.random(np.random.default_rng([2024, k]))
        cases.append((f"step {k}", f, f.lebesgue_measure()))
    zs = []
    for i, (_, f, m) in enumerate(cases):
        est = suspension_integral(thicken(f, 0.5), samples=10**6, seed=100 + i)
        zs.append(float((est.value - m) / est.stderr))
    elapsed = time.perf_counter() - t0
    ok = all(abs(z) <= 3 for z in zs) and elapsed < 120
    report(6, ok, f"z-scores {[round(z, 2) for z in zs]} (|z| <= 3), {elapsed:.1f}s")
    assert ok


def test_criterion_7_uak_decomposition():
    rng = np.random.default_rng(77)
    a, b = sample_triangle(rng, 10**4)
    s = rng.choice([-1.0, 1.0], 10**4) * 10 ** rng.uniform(-3, 3, 10**4)
    worst = 0.0
    for x, y, z in zip(a.tolist(), b.tolist(), s.tolist()):
        p = SuspensionPoint(x, y, z)
        worst = max(worst, uak_decompose(p).element().distance(p.element()))
    c = uak_decompose(SuspensionPoint(1.0, 0.0, 1.0))
    coords = max(abs(c.u + 0.5), abs(c.t + math.log(2)), abs(c.theta - math.pi / 4))
    worked = c.element().distance(horocycle_unstable(1.0))
    ok = worst <= 1e-10 and worked <= 1e-12 and coords <= 1e-12
    report(7, ok, f"max round-trip error {worst:.2e} (<= 1e-10); worked point error {worked:.1e}, "
                  f"coordinate error {coords:.1e}")
    assert ok


def test_criterion_8_surface_framework():
    errors = validate_surface(TORUS)
    spec = torus_spec()
    xs = [1.25, 2.0, 3.0, 4.0, 6.5, 10.0]
    diff = max(abs(surface_gap_cdf(spec, x) - hall_cdf(x)) for x in xs)
    rmin = min_return_time(spec)
    ok = not errors and diff <= 1e-3 and abs(rmin - 1) <= 1e-9
    report(8, ok, f"torus valid={not errors}; max |surface CDF - Hall| = {diff:.1e} at {xs}; "
                  f"min return time {rmin!r}")
    assert ok


def test_criterion_9_veech_rate_limitation_documented():
    text = README.read_text() if README.exists() else ""
    ok = "Limitation: Veech-surface rate" in text
    report(9, ok, "Veech-surface effective rate not reproduced; covered by criterion 8 checks; "
                  f"documented in README: {ok}")
    assert ok
