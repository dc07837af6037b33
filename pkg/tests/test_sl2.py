import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slopegap.hall import hall_cdf, region_measure, sample_triangle
from slopegap.sl2 import (
    C_MU,
    ZETA2,
    SL2Element,
    StepFunction,
    SuspensionPoint,
    cusp_mass,
    geodesic,
    horocycle_stable,
    horocycle_unstable,
    rotation,
    suspension_integral,
    thicken,
    uak_compose,
    uak_decompose,
    upper_triangular,
)
from slopegap.equidist import return_time_indicator


def test_constructors_have_unit_determinant():
    for g in (geodesic(0.7), horocycle_unstable(-2.0), horocycle_stable(3.0),
              upper_triangular(0.4, 5.0), rotation(1.1)):
        assert g.det() == pytest.approx(1.0, abs=1e-15)


def test_rejects_bad_determinant():
    with pytest.raises(ValueError):
        SL2Element([[2, 0], [0, 1]])
    with pytest.raises(ValueError):
        upper_triangular(0.0, 1.0)


def test_long_products_stay_unimodular(rng):
    g = SL2Element(np.eye(2))
    for _ in range(10**4):
        k = rng.integers(3)
        x = rng.uniform(-0.05, 0.05)
        g = g @ (geodesic(x) if k == 0 else horocycle_unstable(x) if k == 1 else rotation(x))
    assert g.det() == pytest.approx(1.0, abs=1e-9)


def test_inverse():
    g = upper_triangular(0.3, 2.0) @ horocycle_unstable(1.7)
    assert (g @ g.inverse()).distance(SL2Element(np.eye(2))) < 1e-14


@settings(max_examples=200, deadline=None)
@given(s=st.floats(-100, 100), t=st.floats(-10, 10))
def test_geodesic_conjugates_horocycle(s, t):
    # g_t^{-1} h_s g_t = h_{s e^t}
    lhs = geodesic(t).inverse() @ horocycle_unstable(s) @ geodesic(t)
    rhs = horocycle_unstable(s * math.exp(t))
    assert lhs.distance(rhs) <= 1e-12 * max(1.0, abs(s) * math.exp(t))


def test_worked_uak_point():
    c = uak_decompose(SuspensionPoint(1.0, 0.0, 1.0))
    assert c.u == pytest.approx(-0.5, abs=1e-15)
    assert c.t == pytest.approx(-math.log(2), abs=1e-15)
    assert c.theta == pytest.approx(math.pi / 4, abs=1e-15)
    assert uak_compose(c).distance(horocycle_unstable(1.0)) <= 1e-12


def test_uak_round_trip(rng):
    a, b = sample_triangle(rng, 10**4)
    s = rng.choice([-1.0, 1.0], 10**4) * 10 ** rng.uniform(-3, 3, 10**4)
    worst = 0.0
    for x, y, z in zip(a, b, s):
        p = SuspensionPoint(float(x), float(y), float(z))
        worst = max(worst, uak_decompose(p).element().distance(p.element()))
    assert worst <= 1e-10


def test_uak_limits_and_errors():
    c = uak_decompose(SuspensionPoint(0.8, 0.6, 1e-9))
    assert c.u == pytest.approx(0.8 * 0.6, abs=1e-8)
    with pytest.raises(ValueError):
        uak_decompose(SuspensionPoint(0.8, 0.6, 0.0))
    with pytest.raises(ValueError):
        uak_decompose(SuspensionPoint(-0.8, 0.6, 1.0))


def test_thickening_scale():
    F = thicken(lambda a, b: np.ones_like(a), 0.5)
    assert F.scale == pytest.approx(4 * ZETA2)
    assert F(0.7, 0.7, 0.2) == pytest.approx(4 * ZETA2)
    assert F(0.7, 0.7, 0.6) == 0.0
    assert F(0.2, 0.2, 0.1) == 0.0
    for w in (0.0, 1.0, 1.5):
        with pytest.raises(ValueError):
            thicken(lambda a, b: a, w)


def test_step_function_measure_matches_monte_carlo(rng):
    f = StepFunction.random(rng)
    a, b = sample_triangle(rng, 10**6)
    assert f.lebesgue_measure() == pytest.approx(f(a, b).mean(), abs=5e-3)
    assert StepFunction(np.ones((3, 3))).lebesgue_measure() == pytest.approx(1.0, abs=1e-12)


def test_cusp_mass():
    assert cusp_mass(1.0) == 1.0
    assert cusp_mass(1e3) < cusp_mass(1e2) < cusp_mass(10)
    # total Haar mass of the suspension is c_mu * integral of 1/(ab) = 1
    a, b = sample_triangle(np.random.default_rng(3), 10**6)
    R = 1 / (a * b)
    assert cusp_mass(50) == pytest.approx(C_MU * 0.5 * np.mean(np.where(R > 50, R, 0)), rel=0.05)


def test_suspension_recovers_measure_of_indicator():
    f = return_time_indicator(1.0, 2.0)
    est = suspension_integral(thicken(f, 0.5), samples=10**6, seed=1)
    assert abs(est.value - region_measure(1.0, 2.0)) <= 3 * est.stderr
    assert not est.cusp_warning


def test_suspension_total_mass():
    est = suspension_integral(lambda a, b, s: np.ones_like(a), samples=10**6, seed=2, r_max=50)
    assert est.cusp_warning
    assert est.value + est.truncated_mass == pytest.approx(1.0, abs=4 * est.stderr)


def test_suspension_thread_independent():
    g = thicken(lambda a, b: a * b, 0.5)
    one = suspension_integral(g, samples=3 * 10**5, seed=5, chunk=1 << 15, threads=1)
    two = suspension_integral(g, samples=3 * 10**5, seed=5, chunk=1 << 15, threads=3)
    assert one.value == two.value and one.stderr == two.stderr


def test_suspension_rejects_empty():
    with pytest.raises(ValueError):
        suspension_integral(lambda a, b, s: a, samples=0)


def test_hall_cdf_consistent_with_measure():
    assert region_measure(1.0, 2.0) == pytest.approx(hall_cdf(2.0), abs=1e-14)
