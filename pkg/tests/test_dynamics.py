import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ergodic_lab.dynamics import (REAL_LINE, CompactInterval, DomainInterval, InverseMap,
                                  derivative_sign, fixed_points, involution_defect,
                                  involution_from_even, involution_values, invert_monotone, orbit,
                                  periodic_defect, stable_orbits)
from ergodic_lab.errors import (ContractionError, ContractionWarning, NoBracketError,
                                OrbitEscapeError, PreconditionError)
from ergodic_lab.expr import evaluate
from ergodic_lab.intervals import compact_ladder

INVOLUTION = "-3*x+sqrt(8*x^2+2)"


def test_orbit_examples():
    assert orbit("x/2", 1.0, 3) == [1, 0.5, 0.25, 0.125]
    assert orbit("-x", 2.0, 4) == [2, -2, 2, -2, 2]
    big = orbit("2*x", 1.0, 60)
    assert big[-1] == 2.0 ** 60


def test_orbit_escape_carries_partial_orbit():
    with pytest.raises(OrbitEscapeError) as info:
        orbit("x + 1", 0.0, 10, DomainInterval(-1.0, 3.5))
    assert info.value.step == 4
    assert info.value.orbit == [0, 1, 2, 3]


def test_orbit_outside_map_domain():
    with pytest.raises(OrbitEscapeError):
        orbit("log(x)", 0.5, 3)


@pytest.mark.parametrize("phi, search, expected", [
    ("x/2", (-5, 5), [0.0]),
    (INVOLUTION, (-5, 5), [0.5]),
    ("x+1", (-5, 5), []),
    ("x^2", (-0.5, 2.0), [0.0, 1.0]),
    ("cos(x)", (0.0, 1.5), [0.7390851332151607]),
])
def test_fixed_points(phi, search, expected):
    fps = fixed_points(phi, CompactInterval(*search, 101), tol=1e-10)
    assert fps.values == pytest.approx(expected, abs=1e-12)
    for p in fps:
        assert p.residual < 1e-10
        assert p.bracket[0] <= p.x <= p.bracket[1]
    assert all(a < b for a, b in zip(fps.values, fps.values[1:]))


def test_tangential_fixed_point_is_flagged():
    fps = fixed_points("x + 0.25*(x - 1)^2", CompactInterval(-2.0, 3.0, 51))
    assert len(fps) == 1
    assert fps.points[0].tangential
    assert fps.points[0].x == pytest.approx(1.0, abs=1e-9)


def test_stable_orbit_examples():
    rep = stable_orbits("x/2", CompactInterval(-1.0, 1.0), REAL_LINE, N=200)
    assert rep.verdict == "stable-evidence"
    assert rep.running_union == (-1.0, 1.0)
    rep = stable_orbits("2*x", CompactInterval(1.0, 2.0), REAL_LINE, N=200)
    assert rep.verdict == "escape-detected"
    assert rep.witness["value"] > 1e8
    assert rep.escape_step == rep.witness["step"]


@pytest.mark.parametrize("K", [(-1.0, 1.0), (0.0, 3.0), (-5.0, -2.0)])
def test_involution_orbit_hull(K):
    K = CompactInterval(*K)
    rep = stable_orbits(INVOLUTION, K, REAL_LINE, N=50)
    assert rep.stable
    xs = K.grid()
    img = -3 * xs + np.sqrt(8 * xs ** 2 + 2)
    both = np.concatenate([xs, img])
    assert rep.running_union == pytest.approx((both.min(), both.max()), rel=1e-12)


def test_running_union_is_nondecreasing():
    rep = stable_orbits("sin(3*x) + 0.2*x", CompactInterval(-0.5, 0.7), REAL_LINE, N=80)
    lo, hi = np.inf, -np.inf
    for a, b in rep.hull_per_step:
        assert a <= b
        nlo, nhi = min(lo, a), max(hi, b)
        assert nlo <= lo and nhi >= hi
        lo, hi = nlo, nhi
    assert rep.running_union == (lo, hi)


def test_stable_orbits_respects_domain_margin():
    X = DomainInterval(0.0, math.inf)
    rep = stable_orbits("x/2", CompactInterval(1.0, 2.0), X, N=200)
    assert rep.escaped
    with pytest.raises(PreconditionError):
        stable_orbits("x", CompactInterval(-1.0, 1.0), X)


def test_slowly_moving_hull_is_inconclusive():
    rep = stable_orbits("x + 0.001", CompactInterval(0.0, 1.0), REAL_LINE, N=100)
    assert rep.verdict == "inconclusive"


def test_stable_orbits_accepts_callables():
    rep = stable_orbits(lambda xs: 0.5 * xs, CompactInterval(-1.0, 1.0), REAL_LINE, N=20)
    assert rep.stable


@pytest.mark.parametrize("phi, y, bracket, x", [
    ("x/2", 1.0, (0.0, 5.0), 2.0),
    ("exp(x)", math.e, (-3.0, 3.0), 1.0),
    ("-x^3 - x", 2.0, (-3.0, 3.0), -1.0),
])
def test_invert_monotone(phi, y, bracket, x):
    got = invert_monotone(phi, y, CompactInterval(*bracket))
    assert got == pytest.approx(x, abs=1e-12)
    assert abs(evaluate(phi, got) - y) <= 1e-12


def test_involution_is_self_inverse():
    for y in np.linspace(-4, 4, 17):
        x = invert_monotone(INVOLUTION, y, CompactInterval(-100.0, 100.0))
        assert x == pytest.approx(evaluate(INVOLUTION, y), rel=1e-12, abs=1e-12)


def test_invert_errors():
    with pytest.raises(NoBracketError):
        invert_monotone("exp(x)", -1.0, CompactInterval(-5.0, 5.0))
    with pytest.raises(PreconditionError):
        invert_monotone("x^2", 0.5, CompactInterval(-1.0, 1.0))


@given(st.floats(-20, 20))
@settings(max_examples=100, deadline=None)
def test_invert_round_trip(x):
    phi = "x + 0.5*sin(x)"
    y = evaluate(phi, x)
    assert invert_monotone(phi, y, CompactInterval(-40.0, 40.0)) == pytest.approx(x, abs=1e-11)


def test_inverse_map_vectorized_and_jets():
    inv = InverseMap("exp(x)")
    ys = np.array([0.5, 1.0, 10.0])
    assert inv(ys) == pytest.approx(np.log(ys), rel=1e-13)
    j = inv.jet(ys, 2)
    assert j[1] == pytest.approx(1 / ys)
    assert j[2] == pytest.approx(-1 / ys ** 2)
    assert np.isnan(inv(np.array([-1.0]))[0])
    with pytest.raises(NoBracketError):
        inv.values([-1.0], strict=True)


def test_inverse_map_on_half_line():
    inv = InverseMap("x^2", DomainInterval(0.0, math.inf))
    assert inv([4.0, 0.25]) == pytest.approx([2.0, 0.5])


@pytest.mark.parametrize("x", [-10.0, -1.0, 0.0, 0.5, 3.0, 10.0])
def test_involution_from_even_closed_form(x):
    assert involution_from_even("sqrt(x^2/2+1)", x) == pytest.approx(-3 * x + math.sqrt(8 * x * x + 2), abs=1e-12)


def test_involution_from_constant():
    xs = np.linspace(-3, 3, 13)
    assert involution_values("0.5", xs) == pytest.approx(0.5 - xs)


def test_involution_output_is_decreasing():
    ys = involution_values("sqrt(x^2/2+1)", np.linspace(-10, 10, 401))
    assert np.all(np.diff(ys) < 0)
    ys = involution_values("0.4*cos(x)", np.linspace(-5, 5, 201))
    assert np.all(np.diff(ys) < 0)


def test_contraction_violation():
    with pytest.raises(ContractionError):
        involution_from_even("x^2", 1.0, strict=True)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            involution_from_even("x^2", 0.1)
        except Exception:
            pass
    assert any(issubclass(w.category, ContractionWarning) for w in caught)


def test_odd_function_triggers_warning():
    with pytest.warns(ContractionWarning):
        involution_from_even("0.3*sin(x)", 0.2)


@pytest.mark.parametrize("phi, K, expected", [
    ("-x", (-3.0, 3.0), 0.0),
    ("x/2", (-1.0, 1.0), 0.75),
    ("1 - x", (-2.0, 2.0), 0.0),
])
def test_involution_defect(phi, K, expected):
    assert involution_defect(phi, CompactInterval(*K)) == pytest.approx(expected, abs=1e-15)


def test_involution_defect_of_closed_form_symbol():
    assert involution_defect(INVOLUTION, CompactInterval(-10.0, 10.0, 2001)) <= 1e-9


def test_defect_escape():
    with pytest.raises(OrbitEscapeError):
        involution_defect("x + 3", CompactInterval(0.0, 1.0), DomainInterval(-1.0, 5.0))


def test_periodic_defect_of_rotation_like_map():
    # a Möbius map of order three: x -> 1/(1 - x) on (-inf, 1) is not a self-map,
    # so use the shift-by-period structure of -x instead
    assert periodic_defect("-x", CompactInterval(-1.0, 1.0), 4) == 0.0
    assert periodic_defect("-x", CompactInterval(-1.0, 1.0), 3) == pytest.approx(2.0)


def test_derivative_sign():
    assert derivative_sign("x/2", [0.0, 1.0]) == 1
    assert derivative_sign(INVOLUTION, np.linspace(-5, 5, 11)) == -1
    assert derivative_sign("x^3", [-1.0, 0.0, 1.0]) == 0


@pytest.mark.parametrize("phi", ["x + 0.2*sin(x)", "x + 0.3*sin(2*x)"])
def test_fixed_point_bracketing(phi):
    """Points that are not fixed sit strictly between two consecutive fixed points."""
    search = CompactInterval(-12.0, 12.0, 481)
    for K in compact_ladder(CompactInterval(-1.0, 1.0), REAL_LINE, 3):
        assert stable_orbits(phi, K, REAL_LINE, N=400).stable
        assert stable_orbits(InverseMap(phi), K, REAL_LINE, N=400).stable
    fps = fixed_points(phi, search).values
    for x in np.linspace(-3.0, 3.0, 25):
        if abs(evaluate(phi, x) - x) <= 1e-10:
            continue
        below = [p for p in fps if p < x]
        above = [p for p in fps if p > x]
        assert below and above
