import cmath

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rayflow.dynamics import (OVERFLOW_GUARD, escape_time, iterate_with_derivatives, landing_data,
                              mandelbrot_distance_estimate, solve_misiurewicz)
from rayflow.errors import InsideM, NotMisiurewicz

small = st.floats(-1.5, 1.5, allow_nan=False)


def test_iterate_fixed_point_of_minus_two():
    o = iterate_with_derivatives(-2, 2, 3)
    assert o.points == (2, 2, 2, 2)
    assert o.d_space == (1, 4, 16, 64)


def test_iterate_param_derivative_at_zero():
    o = iterate_with_derivatives(0, 0, 2, want_param=True)
    assert o.d_param == (0, 1, 1)


def test_iterate_zero_steps():
    o = iterate_with_derivatives(0.3 + 0.1j, 1 + 1j, 0)
    assert o.points == (1 + 1j,)
    assert o.d_space == (1,)


def test_iterate_overflow_truncates():
    o = iterate_with_derivatives(0, 10, 20)
    assert o.truncated_at is not None
    assert abs(o.points[-1]) > OVERFLOW_GUARD
    assert len(o.points) == o.truncated_at + 1


def test_escape_time_examples():
    assert escape_time(0, 2, 100, 50) == 3
    assert escape_time(0, 0.5, 100, 50) is None
    n = escape_time(-2.001, 0, 100, 10**4)
    assert n is not None
    z = 0
    for _ in range(n):
        z = z * z - 2.001
    assert abs(z) > 100


@given(small, small, small, small, st.integers(0, 12), st.integers(0, 12))
def test_chain_rule(cr, ci, zr, zi, m, n):
    c, z = complex(cr, ci) * 0.6, complex(zr, zi)
    whole = iterate_with_derivatives(c, z, m + n)
    if whole.truncated_at is not None:
        return
    first = iterate_with_derivatives(c, z, m)
    second = iterate_with_derivatives(c, first.points[-1], n)
    lhs = whole.d_space[m + n]
    rhs = second.d_space[n] * first.d_space[m]
    assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), 1e-300)


@given(st.floats(-1.9, 0.2), st.floats(-0.6, 0.6), st.integers(1, 30))
def test_param_derivative_vs_finite_difference(cr, ci, n):
    c = complex(cr, ci)
    z0 = 0.1 + 0.05j
    o = iterate_with_derivatives(c, z0, n, want_param=True)
    if max(abs(z) for z in o.points) > 10:
        return
    h = 1e-7
    plus = iterate_with_derivatives(c + h, z0, n).points[n]
    minus = iterate_with_derivatives(c - h, z0, n).points[n]
    fd = (plus - minus) / (2 * h)
    d = o.d_param[n]
    if abs(d) < 1e-3:
        return
    assert abs(d - fd) / abs(d) < 1e-5


def test_solve_misiurewicz_examples():
    assert abs(solve_misiurewicz(2, 1, -1.9) + 2) < 1e-12
    assert abs(solve_misiurewicz(2, 2, 0.1 + 1.1j) - 1j) < 1e-12
    with pytest.raises(NotMisiurewicz):
        solve_misiurewicz(1, 1, 0.1)


@pytest.mark.parametrize("seed", [0.1 + 1.1j, -0.1 + 0.95j, -0.2 + 1.0j])
def test_solve_misiurewicz_conjugate_seed(seed):
    try:
        a = solve_misiurewicz(4, 3, seed) if seed.real < 0 else solve_misiurewicz(2, 2, seed)
    except NotMisiurewicz:
        pytest.skip("seed converged to a root of lower preperiod")
    b = solve_misiurewicz(4, 3, seed.conjugate()) if seed.real < 0 else solve_misiurewicz(2, 2, seed.conjugate())
    assert abs(a.conjugate() - b) < 1e-11


@pytest.mark.parametrize("l,p,seed", [(2, 1, -1.9), (2, 2, 0.1 + 1.1j), (4, 3, -0.1 + 0.95j)])
def test_solve_then_landing_data_reproduces_structure(l, p, seed):
    c = solve_misiurewicz(l, p, seed)
    d = landing_data(c)
    assert d.l == l and p % d.period == 0


def test_landing_data_minus_two():
    d = landing_data(-2)
    assert (d.l, d.period, d.p) == (2, 1, 1)
    assert d.cycle[0] == pytest.approx(2)
    assert d.multiplier == pytest.approx(4)


def test_landing_data_i():
    d = landing_data(1j)
    assert (d.l, d.period, d.p) == (2, 2, 2)
    assert sorted(d.cycle, key=lambda z: z.imag) == pytest.approx([-1j, -1 + 1j])
    assert d.multiplier == pytest.approx(4 + 4j)
    assert abs(d.multiplier) == pytest.approx(4 * np.sqrt(2))


def test_landing_data_invariants_9_56():
    c = solve_misiurewicz(4, 3, -0.1 + 0.95j)
    d = landing_data(c)
    z = 0j
    orbit = [z]
    for _ in range(d.l + d.period):
        z = z * z + c
        orbit.append(z)
    assert min(abs(orbit[d.l] - x) for x in d.cycle) < 1e-9
    assert min(abs(orbit[d.l - 1] - x) for x in d.cycle) > 1e-3
    assert abs(d.multiplier) > 1
    for x in d.cycle:
        dp = 1
        y = x
        for _ in range(d.p):
            dp *= 2 * y
            y = y * y + c
        assert abs(dp) >= 3


def test_landing_data_parabolic():
    with pytest.raises(NotMisiurewicz):
        landing_data(0.25)


def test_distance_bracket_minus_three():
    lo, hi = mandelbrot_distance_estimate(-3)
    assert lo <= 1 <= hi and hi / lo <= 4


def test_distance_bracket_ten():
    lo, hi = mandelbrot_distance_estimate(10)
    # the nearest part of M is the main cardioid (real part at most 0.375, at height ~0.2)
    t = np.linspace(0, 2 * np.pi, 200001)
    dist = np.min(np.abs(10 - (np.exp(1j * t) / 2 - np.exp(2j * t) / 4)))
    assert dist == pytest.approx(9.6274, abs=1e-4)
    assert lo <= dist <= hi and hi / lo <= 4
    assert lo >= 8 * 0.99


def test_distance_inside():
    with pytest.raises(InsideM):
        mandelbrot_distance_estimate(0)


@given(st.floats(0, 2 * np.pi), st.floats(2.05, 6))
def test_distance_bracket_brackets_disk_bound(phi, r):
    c = r * cmath.exp(1j * phi)
    lo, hi = mandelbrot_distance_estimate(c)
    # M lies in the closed disk of radius 2 and contains -2, so r - 2 <= dist <= |c + 2|
    assert lo <= abs(c + 2) + 1e-12
    assert hi >= r - 2 - 1e-12
    assert lo <= hi
