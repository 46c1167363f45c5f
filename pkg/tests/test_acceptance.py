"""Acceptance suite: one test group per criterion, summarized at the end of the run."""

import cmath
import math

import numpy as np
import pytest
from scipy import integrate

from ergodic_lab.cli import main
from ergodic_lab.combinatorics import bell_partial, bell_table, faa_di_bruno, stirling_oracle
from ergodic_lab.dynamics import (fixed_points, involution_defect, involution_values,
                                  invert_monotone)
from ergodic_lab.ergodic import (DiagnosisConfig, DistributionSample, TestFunction,
                                 WeightedSymbol, antiderivative_shift_check, apply_power_jet,
                                 apply_to_jets, cesaro_jets, cesaro_pairing_sequence, diagnose,
                                 distribution_pairing, pairing_values, power_jets)
from ergodic_lab.expr import differentiate, evaluate, evaluate_array
from ergodic_lab.intervals import CompactInterval
from ergodic_lab.jets import iterate_jets, jet_compose, jet_lift

INVOLUTION = "-3*x+sqrt(8*x^2+2)"
SYMBOLS = ["x/2", "-x", INVOLUTION]
GRID = CompactInterval(-1.0, 1.0, 11).grid()


def close(a, b, rtol, scale=None):
    """|a - b| <= rtol * scale, where scale defaults to max(|a|, |b|)."""
    a, b = np.asarray(a), np.asarray(b)
    if scale is None:
        scale = np.maximum(np.abs(a), np.abs(b))
    return np.all(np.abs(a - b) <= rtol * np.maximum(scale, 1e-300))


# 1 ---------------------------------------------------------------------------

@pytest.mark.acceptance(1, "Bell/Stirling exactness")
@pytest.mark.parametrize("n", range(9))
def test_bell_matches_set_partition_count(n):
    for k in range(n + 1):
        got = bell_partial(n, k, [1] * max(n, 1))
        assert isinstance(got, int)
        assert got == stirling_oracle(n, k)


@pytest.mark.acceptance(1, "Bell/Stirling exactness")
def test_bell_numbers_from_row_sums():
    table = bell_table([1] * 8, 8)
    sums = [sum(table[n, k] for k in range(n + 1)) for n in range(9)]
    assert sums == [1, 1, 2, 5, 15, 52, 203, 877, 4140]


# 2 ---------------------------------------------------------------------------

OUTER = ["exp(x)", "sin(x)", "cos(2*x)", "x^3 - 2*x", "tanh(x)", "log(1 + x^2)",
         "sqrt(2 + x^2)", "1/(1 + x^2)", "exp(-x^2/2)", "x^4/3 + x"]
INNER = ["sin(x)", "x^2 - 0.5", "exp(x/2)", "cos(x) + x", "tanh(2*x)", "x/(2 + x^2)",
         "sqrt(1 + x^2)", "log(2 + x)", "0.3*x^3 - x", "exp(-x)*x"]


@pytest.mark.acceptance(2, "Faà di Bruno consistency")
def test_faa_di_bruno_agrees_with_jet_composition():
    rng = np.random.default_rng(20240601)
    worst = 0.0
    for _ in range(100):
        f = OUTER[rng.integers(len(OUTER))]
        g = INNER[rng.integers(len(INNER))]
        x = float(rng.uniform(-1.0, 1.0))
        s = int(rng.integers(1, 7))
        gj = jet_lift(g, x, s)
        fj = jet_lift(f, gj.value, s)
        composed = jet_compose(fj, gj).derivs
        # The error is measured against the size of the summands, which stays
        # meaningful when the composite derivative itself cancels to zero.
        abs_table = bell_table(list(np.abs(gj.derivs[1:])), s)
        for q in range(s + 1):
            fdb = faa_di_bruno(fj.derivs[:q + 1], gj.derivs[:q + 1], q)
            terms = sum(abs(fj.derivs[j]) * abs_table[q, j] for j in range(q + 1))
            scale = max(abs(composed[q]), terms, 1e-300)
            worst = max(worst, abs(fdb - composed[q]) / scale)
    assert worst <= 1e-9, worst


# 3 ---------------------------------------------------------------------------

@pytest.mark.acceptance(3, "power derivative formula vs direct jets")
@pytest.mark.parametrize("phi", SYMBOLS)
def test_power_formula_matches_composed_jets(phi):
    f = "sin(x) + x^3/5"
    sym = WeightedSymbol(phi)
    for n in range(1, 21):
        got = apply_power_jet(sym, f, n, 3, GRID)
        for i, x in enumerate(GRID):
            it = iterate_jets(phi, x, n, 3)[-1]
            ref = jet_compose(jet_lift(f, it.value, 3), it).derivs
            assert np.all(np.abs(got.imag[:, i]) == 0)
            assert close(got.real[:, i], ref, 1e-8), (n, x, got[:, i], ref)


# 4 ---------------------------------------------------------------------------

ALPHAS = [1.0, 2.0, cmath.exp(1j * math.pi / 3)]


@pytest.mark.acceptance(4, "Cesàro identities")
@pytest.mark.parametrize("phi", SYMBOLS)
@pytest.mark.parametrize("alpha", ALPHAS, ids=["one", "two", "unit"])
def test_first_cesaro_identity(phi, alpha):
    sym = WeightedSymbol(phi, "1", alpha)
    f, s = "exp(x/3) + cos(x)", 2
    powers = power_jets(sym, f, 50, s, GRID)
    means = cesaro_jets(sym, f, 50, s, GRID)
    for n in range(1, 51):
        prev = means[n - 2] if n >= 2 else powers[0]
        lhs = powers[n] / n
        rhs = means[n - 1] - (n - 1) / n * prev
        scale = np.maximum(np.abs(means[n - 1]), np.abs(prev))
        assert close(lhs, rhs, 1e-10, scale), n


@pytest.mark.acceptance(4, "Cesàro identities")
@pytest.mark.parametrize("phi", SYMBOLS)
@pytest.mark.parametrize("alpha", ALPHAS, ids=["one", "two", "unit"])
def test_second_cesaro_identity(phi, alpha):
    sym = WeightedSymbol(phi, "1", alpha)
    f, s = "exp(x/3) + cos(x)", 1
    powers = power_jets(sym, f, 51, s, GRID)
    means = cesaro_jets(sym, f, 50, s, GRID)
    for n in range(1, 51):
        mean_n = means[n - 1]
        t_mean = apply_to_jets(sym, lambda ys: cesaro_jets(sym, f, n, s, ys)[n - 1], GRID, s)
        lhs = mean_n - t_mean
        rhs = (powers[1] - powers[n + 1]) / n
        scale = np.maximum.reduce([np.abs(mean_n), np.abs(t_mean), np.abs(powers[1]) / n,
                                   np.abs(powers[n + 1]) / n])
        assert close(lhs, rhs, 1e-10, scale), n


# 5 ---------------------------------------------------------------------------

@pytest.mark.acceptance(5, "x/2 example: distributions and smooth functions")
def test_half_map_on_distributions_is_witnessed_not_mean_ergodic():
    rep = diagnose(WeightedSymbol("x/2"), DiagnosisConfig(mode="distributions", real_analytic=True))
    assert rep.verdict == "not-mean-ergodic-witnessed"
    assert rep.cites("Theorem 4.4")
    escape = [w for w in rep.witnesses if w.get("map") == "phi^-1"]
    assert escape and escape[0]["step"] > 0
    assert abs(escape[0]["value"]) > 1e8
    assert escape[0]["value"] == pytest.approx(escape[0]["seed"] * 2.0 ** escape[0]["step"])


@pytest.mark.acceptance(5, "x/2 example: distributions and smooth functions")
def test_half_map_on_smooth_functions_has_evidence_for():
    rep = diagnose(WeightedSymbol("x/2"), DiagnosisConfig(mode="smooth"))
    assert rep.verdict == "evidence-for-mean-ergodic"
    conds = rep.traces["conditions"]
    assert len(conds) == 3 * 2 * 10
    assert all(t["trend"] == "vanishing" for t in conds if t["kind"] == "vanishing")
    assert all(t["trend"] == "bounded" for t in conds if t["kind"] == "cesaro-bound")


# 6 ---------------------------------------------------------------------------

@pytest.mark.acceptance(6, "involution built from an even function")
def test_involution_reproduces_closed_form():
    xs = np.linspace(-10.0, 10.0, 1001)
    ys = involution_values("sqrt(x^2/2+1)", xs)
    ref = -3.0 * xs + np.sqrt(8.0 * xs ** 2 + 2.0)
    assert np.max(np.abs(ys - ref)) <= 1e-8
    assert involution_defect(INVOLUTION, CompactInterval(-10.0, 10.0, 1001)) <= 1e-9


@pytest.mark.acceptance(6, "involution built from an even function")
def test_involution_is_certified():
    rep = diagnose(WeightedSymbol(INVOLUTION), DiagnosisConfig(mode="distributions", real_analytic=True))
    assert rep.verdict == "mean-ergodic-certified"
    assert rep.cites("Theorem 4.9")


# 7 ---------------------------------------------------------------------------

@pytest.mark.acceptance(7, "derivative laws at fixed points")
@pytest.mark.parametrize("phi", ["x/2", INVOLUTION, "x + 0.4*sin(x)", "2*x - x^2"])
def test_iterate_derivative_is_power_at_fixed_points(phi):
    fps = fixed_points(phi, CompactInterval(-4.0, 4.0, 401))
    assert len(fps) >= 1
    for p in fps:
        d1 = jet_lift(phi, p.x, 1).derivs[1]
        jets = iterate_jets(phi, p.x, 20, 1)
        for n, j in enumerate(jets):
            assert close(j.derivs[1], d1 ** n, 1e-9), (p.x, n)


@pytest.mark.acceptance(7, "derivative laws at fixed points")
@pytest.mark.parametrize("psi, x1", [("x + 0.25*(x - 1)^2", 1.0), ("x + sin(x)^2 - x^3", 0.0),
                                     ("x - 0.5*(x + 2)^2 + (x + 2)^3", -2.0)])
def test_second_derivative_grows_linearly_when_slope_is_one(psi, x1):
    c = jet_lift(psi, x1, 2).derivs
    assert c[0] == pytest.approx(x1, abs=1e-15)
    assert c[1] == 1.0
    for n, j in enumerate(iterate_jets(psi, x1, 30, 2)):
        assert close(j.derivs[2], n * c[2], 1e-8), n


# 8 ---------------------------------------------------------------------------

@pytest.mark.acceptance(8, "antiderivative shift identity")
@pytest.mark.parametrize("phi", ["-x", INVOLUTION, "x/2", "x/2 + 0.1*sin(x)"])
@pytest.mark.parametrize("f", ["1", "x", "x^2 - 3*x + 1", "2*x^3 - x", "x^4 - x^2/2 + 0.3"])
def test_antiderivative_shift(phi, f):
    sym = WeightedSymbol(phi)
    dphi = differentiate(phi)
    abs_w = WeightedSymbol(phi, f"abs({dphi})")
    for x in (-0.7, 0.2, 0.9):
        for n in (1, 2, 5, 10):
            # Scale: the largest entry of the left-hand jet, so that sides which
            # cancel to zero (e.g. constant f under an involution) are judged
            # against the size of the quantities they are built from.
            scale = float(np.max(np.abs(apply_power_jet(abs_w, f, n, 2, [x]))))
            for r in range(3):
                left, right = antiderivative_shift_check(sym, f, n, r, x)
                assert close(left, right, 1e-10, max(abs(left), abs(right), scale)), (x, n, r, left, right)


# 9 ---------------------------------------------------------------------------

@pytest.mark.acceptance(9, "distribution pairing")
@pytest.mark.parametrize("phi, rho, support", [
    ("-x", "1 + x", (0.0, 1.0)),
    ("-x", "exp(x)*cos(x)", (-0.5, 1.5)),
    ("x/2", "1 + x^2", (0.0, 2.0)),
])
def test_density_pairing_matches_change_of_variables(phi, rho, support):
    psi = "exp(-x^2)*(1 + x)"
    sym = WeightedSymbol(phi)
    u = DistributionSample.density(rho, CompactInterval(*support))
    for m in range(4):
        got = distribution_pairing(sym, u, m, psi)

        def integrand(z, m=m):
            y = z
            for _ in range(m):
                y = evaluate(phi, y)
            if not support[0] <= y <= support[1]:
                return 0.0
            return evaluate(rho, y) * evaluate(psi, z)

        # z ranges over the preimage of the support under φ^m
        ends = [support[0], support[1]]
        for _ in range(m):
            ends = [invert_monotone(phi, e, CompactInterval(-100.0, 100.0)) for e in ends]
        lo, hi = min(ends), max(ends)
        ref, _ = integrate.quad(integrand, lo, hi, epsabs=0, epsrel=1e-12, limit=200)
        assert got.imag == 0
        assert close(got.real, ref, 1e-6), (m, got, ref)


@pytest.mark.acceptance(9, "distribution pairing")
@pytest.mark.parametrize("phi", [INVOLUTION, "x/2", "x + 0.3*tanh(x)"])
@pytest.mark.parametrize("a", [-0.4, 0.3, 1.1])
def test_dirac_pairing_closed_form(phi, a):
    psi = "exp(-x^2/4)*(2 + sin(x))"
    dphi = differentiate(phi)
    z = invert_monotone(phi, a, CompactInterval(-50.0, 50.0))
    ref = evaluate(psi, z) / abs(evaluate(dphi, z))
    got = distribution_pairing(WeightedSymbol(phi), DistributionSample.dirac(a), 1, psi)
    assert close(got.real, ref, 1e-9)
    got2 = distribution_pairing(WeightedSymbol(phi, "2 + x^2"), DistributionSample.dirac(a), 1, psi)
    assert close(got2.real, ref * (2 + z * z), 1e-9)


@pytest.mark.acceptance(9, "distribution pairing")
@pytest.mark.parametrize("m", [1, 2, 5, 12])
def test_dirac_pairing_for_half_map(m):
    psi = "exp(-x/10)"
    u = DistributionSample.dirac(1.0)
    got = distribution_pairing(WeightedSymbol("x/2"), u, m, psi)
    assert close(got.real, 2.0 ** m * math.exp(-(2.0 ** m) / 10), 1e-9)
    # first derivative of the Dirac mass: -(d/dx)[2^m psi(2^m x)] at 1
    d = DistributionSample.dirac(1.0, 1)
    got = distribution_pairing(WeightedSymbol("x/2"), d, m, psi)
    ref = -(4.0 ** m) * (-0.1) * math.exp(-(2.0 ** m) / 10)
    assert close(got.real, ref, 1e-9)


@pytest.mark.acceptance(9, "distribution pairing")
@pytest.mark.parametrize("u", [DistributionSample.dirac(0.8), DistributionSample.dirac(-0.2, 1)],
                         ids=["dirac", "dirac-derivative"])
def test_involution_cesaro_pairing_converges_like_one_over_n(u):
    sym = WeightedSymbol(INVOLUTION)
    psi = TestFunction("exp(-x^2)*(1 + x)", CompactInterval(-6.0, 6.0))
    vals = pairing_values(sym, u, psi, 2)
    limit = 0.5 * (vals[1] + vals[2])
    seq = cesaro_pairing_sequence(sym, u, 400, psi)
    n = np.arange(1, 401)
    bound = 2.0 * max(abs(vals[1]), abs(vals[2]))
    assert np.all(n[:-2] * np.abs(seq[2:] - seq[:-2]) <= 2.0 * bound)
    assert np.all(n * np.abs(seq - limit) <= bound)


# 10 --------------------------------------------------------------------------

@pytest.mark.acceptance(10, "deterministic diagnose output")
@pytest.mark.parametrize("argv", [
    ["--phi", "x/2", "--mode", "smooth", "--N", "80", "--M", "80"],
    ["--phi", INVOLUTION, "--mode", "distributions", "--real-analytic"],
    ["--phi", "x/2", "--alpha", "0.6,0.8", "--weight", "1 + x^2/4", "--N", "60", "--M", "60"],
])
def test_diagnose_json_is_byte_identical(tmp_path, argv):
    outs = []
    path = tmp_path / "report.json"
    for _ in range(2):
        assert main(["diagnose", *argv, "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    assert outs[0].startswith(b'{\n  "schema": "ergodic-lab/1"')
