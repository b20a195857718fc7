import cmath
import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curalg import structfn
from curalg.boson import checks, master
from curalg.boson.atoms import ExponentFn, ParamLin
from curalg.boson.contraction import contraction_exponent, quadrature_exponent
from curalg.boson.currents import (
    ZeroModeWord,
    current,
    klein_phase,
    phi_value,
    word_phase,
)
from curalg.boson.kernel import kernel, kernel_value, kernel_value_primed
from curalg.liealg import cartan
from curalg.params import ParamTower


def tower(*levels):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return ParamTower(0.1, 1.0, levels or (1.0, 1.0))


@pytest.fixture(scope="module")
def params():
    return tower(1.0, 1.0)


@pytest.fixture(scope="module")
def a2():
    return cartan("A", 2)


# ---------------------------------------------------------------------------
# Master primitives
# ---------------------------------------------------------------------------


def test_master_closed_vs_quadrature(params):
    for k in range(20):
        ex = 0.2 + (3.0 - 0.2) * k / 19.0
        x = ex / params.eta
        closed = master.master_integral(x, params.eta)
        quad = master.master_integral_quadrature(x, params.eta)
        assert abs(closed - quad) < 1e-6


def test_master_special_points(params):
    # ln Gamma(1) = 0: value reduces to (1/2)(gamma - ln eta) - ln(2 pi)/2
    eta = 0.8
    want = 0.5 * (master.EULER_GAMMA - math.log(eta)) - 0.5 * math.log(2 * math.pi)
    assert abs(master.master_integral(1.0 / eta, eta) - want) < 1e-14
    # eta*x = 1/2 brings in ln Gamma(1/2) = ln(pi)/2
    want = 0.5 * math.log(math.pi) - 0.5 * math.log(2 * math.pi)
    assert abs(master.master_integral(0.5 / eta, eta) - want) < 1e-14


def test_master_reflection_pairing():
    # master(x) + master(xbar) with eta*xbar = 1 - eta*x collapses through
    # the Gamma reflection to -ln(2 sin(pi eta x)); linear terms cancel.
    eta = 1.3
    for ex in (0.2, 0.35, 0.7):
        lhs = master.master_integral(ex / eta, eta) + master.master_integral((1 - ex) / eta, eta)
        rhs = -cmath.log(2.0 * math.sin(math.pi * ex))
        assert abs(lhs - rhs) < 1e-12


def test_gamma_reflection_grid():
    worst = max(master.gamma_reflection_defect(0.2 + 2.8 * k / 19.0) for k in range(20))
    assert worst < 1e-10


def test_i0_validated_against_quadrature():
    for x in (0.4, 1.1, 2.7):
        assert abs(master.i0_closed(x) - master.i0_quadrature(x)) < 1e-8
        assert abs(master.i0_closed(x) + master.EULER_GAMMA + math.log(x)) < 1e-15


def test_branch_errors():
    with pytest.raises(master.BranchError):
        master.master_integral(-0.3, 1.0)
    with pytest.raises(master.BranchError):
        master.i0_closed(-1.0)


# ---------------------------------------------------------------------------
# Kernel
# ---------------------------------------------------------------------------


def test_kernel_antisymmetry_and_symmetry(params, a2):
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(100):
        lam = complex(rng.uniform(-3, 3), rng.uniform(-0.5, 0.5))
        if abs(lam) < 0.05:
            continue
        for i in (1, 2):
            for j in (1, 2):
                worst = max(worst,
                            abs(kernel_value(a2, i, j, lam, params)
                                + kernel_value(a2, i, j, -lam, params)),
                            abs(kernel_value(a2, i, j, lam, params)
                                - kernel_value(a2, j, i, lam, params)))
    assert worst < 1e-12


def test_kernel_regular_at_zero(params, a2):
    # the kernel is odd, so it vanishes linearly at 0; the normalized
    # limit alpha(lambda)/lambda -> 2 hbar^2 B_ij eta'/eta is finite
    h = params.hbar
    lam = 1e-5
    for i, j in ((1, 1), (1, 2)):
        b = float(a2.b_entry(i, j))
        want = 2.0 * h * h * b * params.eta_prime / params.eta
        got = kernel_value(a2, i, j, lam, params) / lam
        assert abs(got - want) < 1e-8 * max(1.0, abs(want))


def test_kernel_primed_variant(params, a2):
    lam = 0.7 + 0.2j
    a = kernel_value(a2, 1, 1, lam, params)
    b = kernel_value_primed(a2, 1, 1, lam, params)
    ratio = (cmath.sinh(lam / (2 * params.eta_prime)) / cmath.sinh(lam / (2 * params.eta))) ** 2
    assert abs(a * ratio - b) < 1e-12


def test_kernel_atoms_match_pointwise(params, a2):
    ker = kernel(a2, 1, 2, 0)
    lam = 0.9 - 0.3j
    val = ker.coeff * lam ** ker.lambda_power
    for a in ker.num_sh:
        val *= cmath.sinh(a.value(params) * lam)
    for b in ker.den_sh:
        val /= cmath.sinh(b.value(params) * lam)
    assert abs(val - kernel_value(a2, 1, 2, lam, params)) < 1e-13


# ---------------------------------------------------------------------------
# Mode coefficient functions
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("kind", ["E", "F", "H+", "H-"])
def test_g_functions_match_pointwise(kind, params):
    cur = current(kind, 1, "u")
    g = cur.g()
    rng = np.random.default_rng(3)
    for _ in range(25):
        lam = complex(rng.uniform(-3, 3), rng.uniform(-0.4, 0.4))
        if abs(lam) < 0.1:
            continue
        u = complex(rng.uniform(-1, 1), rng.uniform(-0.1, 0.1))
        want = phi_value(kind, 1, lam, u, params)
        got = g.eval_at(lam, {"u": u}, params)
        assert abs(got - want) < 1e-10 * max(1.0, abs(want))


def test_g_negated_lambda(params):
    g = current("H+", 1, "u").g()
    gn = g.negated_lambda(params)
    lam = 1.1 + 0.2j
    assert abs(gn.eval_at(lam, {"u": 0.3}, params)
               - g.eval_at(-lam, {"u": 0.3}, params)) < 1e-12


# ---------------------------------------------------------------------------
# Zero modes and Klein phases
# ---------------------------------------------------------------------------


letters_strategy = st.lists(
    st.tuples(st.sampled_from(["Q", "P"]), st.integers(1, 3), st.integers(-2, 2)),
    min_size=0, max_size=6,
)


@given(letters_strategy, letters_strategy)
@settings(max_examples=60, deadline=None)
def test_zero_mode_product_confluent(l1, l2):
    # canonicalizing a concatenation directly or in stages gives the
    # same phase and charges (the exchange phases are central)
    cd = cartan("A", 3)
    w1, w2 = ZeroModeWord(tuple(l1)), ZeroModeWord(tuple(l2))
    ph_direct, charges_direct = (w1 * w2).canonicalize(cd)
    ph1, (q1, p1) = w1.canonicalize(cd)
    ph2, (q2, p2) = w2.canonicalize(cd)
    # stage 2: canonical pieces concatenated as Q1 P1 Q2 P2 and reduced
    staged = ZeroModeWord(
        tuple(("Q", j + 1, m) for j, m in enumerate(q1) if m)
        + tuple(("P", j + 1, m) for j, m in enumerate(p1) if m)
        + tuple(("Q", j + 1, m) for j, m in enumerate(q2) if m)
        + tuple(("P", j + 1, m) for j, m in enumerate(p2) if m)
    )
    ph_staged, charges_staged = staged.canonicalize(cd)
    assert charges_staged == charges_direct
    assert abs(ph1 * ph2 * ph_staged - ph_direct) < 1e-12


def test_exchange_rule_single_move():
    cd = cartan("A", 2)
    w = ZeroModeWord((("P", 1, 1), ("Q", 2, 1)))
    phase, (q, p) = w.canonicalize(cd)
    assert q == (0, 1) and p == (1, 0)
    assert abs(phase - cmath.exp(2j * math.pi * float(cd.b_entry(1, 2)))) < 1e-14


def test_klein_cocycle_ratio(a2):
    # epsilon(xi, xi')/epsilon(xi', xi) = (-1)^(xi . A . xi') off-diagonal
    e1, e2 = (1, 0), (0, 1)
    assert klein_phase(e1, e2, a2) * klein_phase(e2, e1, a2) == -1
    assert klein_phase(e1, e1, a2) == 1
    d = cartan("A", 3)
    assert klein_phase((1, 0, 0), (0, 0, 1), d) == 1  # disconnected nodes


def test_combined_exchange_phase_is_b_weighted(a2):
    # the combined reorder phase must be e^{2 pi i q q' B_ij}
    for (xk, yk, want) in (("E", "E", -1.0), ("E", "F", -1.0), ("F", "F", -1.0)):
        x = current(xk, 1, "u")
        y = current(yk, 2, "v")
        ratio = word_phase((x, y), a2) / word_phase((y, x), a2)
        qx = 1 if xk == "E" else -1
        qy = 1 if yk == "E" else -1
        expect = cmath.exp(2j * math.pi * qx * qy * float(a2.b_entry(1, 2)))
        assert abs(ratio - expect) < 1e-12
        assert abs(expect - want) < 1e-12


# ---------------------------------------------------------------------------
# Contraction engine
# ---------------------------------------------------------------------------


def test_empty_contraction(params, a2):
    g0 = ExponentFn(weight=0.0)
    ker = kernel(a2, 1, 1, 0)
    cf = contraction_exponent(g0, g0, ker, params)
    assert cf.primitives == ()
    assert cf.exp_value({}, params) == 1.0


def test_closed_form_vs_direct_quadrature(params, a2):
    # convergent sample point: Im(u - v) well above every shift
    pt = {"u": 0.3 + 2.2j, "v": -0.1 - 0.4j}
    for xk, yk in (("E", "E"), ("H+", "F"), ("H+", "E"), ("F", "F")):
        x, y = current(xk, 1, "u"), current(yk, 1, "v")
        ker = kernel(a2, 1, 1, 0)
        cf = contraction_exponent(x.g(), y.g(), ker, params)
        closed = cf.value(pt, params)
        quad = quadrature_exponent(ker, x.g(), y.g(), pt, params)
        assert abs(closed - quad) < 1e-9


def test_ef_contraction_factor_closed_form(params, a2):
    # exp(C_EF) = -e^{-2 gamma} / ((w - i hbar/2)(w + i hbar/2))
    x, y = current("E", 1, "u"), current("F", 1, "v")
    cf = checks.pair_exponent(x, y, a2, params)
    h = params.hbar
    for w in (0.8, -0.9 + 0.3j):
        got = cf.exp_value({"u": w, "v": 0.0}, params)
        want = -math.exp(-2 * master.EULER_GAMMA) / ((w - 0.5j * h) * (w + 0.5j * h))
        assert abs(got - want) < 1e-12 * abs(want)


@pytest.mark.parametrize("rel,xk,yk,i,j,sign", [
    ("EE", "E", "E", 1, 1, +1),
    ("EE", "E", "E", 1, 2, +1),
    ("FF", "F", "F", 1, 1, +1),
    ("FF", "F", "F", 2, 1, +1),
    ("HE", "H+", "E", 1, 1, +1),
    ("HE", "H-", "E", 1, 2, -1),
    ("HF", "H+", "F", 1, 2, +1),
    ("HF", "H-", "F", 1, 1, -1),
    ("HH_pm", "H+", "H-", 1, 1, +1),
    ("HH_pm", "H+", "H-", 1, 2, +1),
    ("HH_same", "H+", "H+", 1, 2, +1),
    ("HH_same", "H-", "H-", 1, 1, +1),
])
def test_exchange_relations(params, a2, rel, xk, yk, i, j, sign):
    x, y = current(xk, i, "u"), current(yk, j, "v")
    sr = structfn.ratio(rel, i, j, a2, c=1, sign=sign)
    rep = checks.exchange_check(x, y, sr, a2, params, samples=30, tol=1e-8)
    assert rep["pass"], rep


def test_disconnected_ef_pair_commutes(params):
    a3 = cartan("A", 3)
    t3 = tower(1.0, 1.0)
    x, y = current("E", 1, "u"), current("F", 3, "v")
    sr = structfn.StructureRatio("one", 1, 3, Fraction(1), (), ())
    rep = checks.exchange_check(x, y, sr, a3, t3, samples=20, tol=1e-10)
    assert rep["pass"]
    assert abs(word_phase((x, y), a3) / word_phase((y, x), a3) - 1.0) < 1e-14


def test_ef_delta_audit(params, a2):
    for i in (1, 2):
        rep = checks.ef_delta_check(i, a2, params, tol=1e-8)
        assert rep["pass"], rep
        assert sorted(rep["poles"]) == ["-1/2*h", "1/2*h"]


def test_h_merge_identities(params, a2):
    # :E(u + ih/4) F(u - ih/4): carries exactly the H+ mode function
    for sgn, hk in ((+1, "H+"), (-1, "H-")):
        rep = checks.merged_exponent_matches(
            (current("E", 1, "u"), current("F", 1, "u", Fraction(-sgn, 2))),
            current(hk, 1, "u", Fraction(-sgn, 4)), params)
        assert rep["pass"], rep


def test_serre_combination_vanishes(params, a2):
    for i, j in ((1, 2), (2, 1)):
        rep = checks.serre_check(i, j, a2, params, samples=15, tol=1e-7)
        assert rep["pass"], rep


def test_serre_needs_adjacency(params):
    a3 = cartan("A", 3)
    with pytest.raises(ValueError):
        checks.serre_check(1, 3, a3, tower(1.0, 1.0))


# ---------------------------------------------------------------------------
# Fock pairing prescriptions
# ---------------------------------------------------------------------------


def test_vacuum_pairing(params, a2):
    assert checks.wick_pairing([], a2, params) == 1.0


def test_two_point_pairing_is_contour_integral(params, a2):
    g = current("H-", 1, "u").g()
    f = current("H+", 1, "v").g()
    pt = {"u": 0.2 + 1.5j, "v": 0.0 - 0.5j}
    val = checks.pairing(g, f, 1, 1, a2, params, pt)
    quad = quadrature_exponent(kernel(a2, 1, 1, 0), g, f, pt, params)
    assert abs(val - quad) < 1e-9


def test_odd_pairing_vanishes(params, a2):
    g = current("H-", 1, "u").g()
    assert checks.wick_pairing([(g, 1)], a2, params, {"u": 1.0j}) == 0.0


def test_four_point_wick_vs_finite_difference(params, a2):
    """Wick sum over the 3 pairings against an independent oracle.

    The generating identity <prod :e^{eps_k a(g_k)}:> = exp(sum_{p<q}
    eps_p eps_q C_pq) makes the 4-point function the mixed fourth
    derivative at 0; central finite differences of the right side must
    reproduce the pair-partition sum.
    """
    gs = [
        (current("H-", 1, "u1").g(), 1),
        (current("H-", 2, "u2").g(), 2),
        (current("H+", 1, "u3").g(), 1),
        (current("H+", 2, "u4").g(), 2),
    ]
    # heights keep every ordered pairing inside its convergence half-plane
    pt = {"u1": 0.1 + 3.4j, "u2": -0.2 + 1.2j, "u3": 0.3 - 1.0j, "u4": 0.0 - 3.2j}
    wick = checks.wick_pairing(gs, a2, params, pt)

    c = {}
    for p in range(4):
        for q in range(p + 1, 4):
            c[(p, q)] = checks.pairing(gs[p][0], gs[q][0], gs[p][1], gs[q][1],
                                       a2, params, pt)

    def gen(eps):
        s = sum(eps[p] * eps[q] * c[(p, q)] for p in range(4) for q in range(p + 1, 4))
        return cmath.exp(s)

    h = 0.05
    acc = 0.0
    for s1 in (+1, -1):
        for s2 in (+1, -1):
            for s3 in (+1, -1):
                for s4 in (+1, -1):
                    acc += s1 * s2 * s3 * s4 * gen((s1 * h, s2 * h, s3 * h, s4 * h))
    fd = acc / (2 * h) ** 4
    direct = c[(0, 1)] * c[(2, 3)] + c[(0, 2)] * c[(1, 3)] + c[(0, 3)] * c[(1, 2)]
    assert abs(wick - direct) < 1e-12 * max(1.0, abs(direct))
    assert abs(fd - direct) < 1e-4 * max(1.0, abs(direct))


def test_exchange_invariant_a3():
    # module invariant: every delta-free pair also at rank 3
    a3 = cartan("A", 3)
    t3 = tower(1.0, 1.0)
    from curalg.report import _boson_pair_catalog
    rng = np.random.default_rng(77)
    for (xk, xi), (yk, yj), (rel, sign) in _boson_pair_catalog(a3):
        if rel == "one":
            sr = structfn.StructureRatio("one", xi, yj, Fraction(1), (), ())
        else:
            sr = structfn.ratio(rel, xi, yj, a3, c=1, sign=sign)
        rec = checks.exchange_check(current(xk, xi, "u"), current(yk, yj, "v"),
                                    sr, a3, t3, samples=8, tol=1e-8, rng=rng)
        assert rec["pass"], rec


def test_quadrature_fallback_for_uncatalogued_pair():
    """A contrived two-Bose integrand with no matching sh numerator falls
    back to direct contour quadrature."""
    from curalg.boson.contraction import QuadratureFallback, contraction_exponent
    from curalg.boson.kernel import Kernel

    params = tower(1.0, 1.0)
    ker = Kernel(coeff=1.0, num_sh=(), den_sh=())
    g1 = ExponentFn(weight=1.0, vars=(("u", 1),), bose=(ParamLin.inv_eta(0),))
    g2 = ExponentFn(weight=1.0, vars=(("v", 1),),
                    bose=(ParamLin.inv_eta(0, Fraction(5, 7)),))
    pt = {"u": 0.2 + 2.8j, "v": 0.0}
    cf = contraction_exponent(g1, g2, ker, params, probe=pt)
    assert isinstance(cf, QuadratureFallback)
    val = cf.value(pt, params)
    quad = quadrature_exponent(ker, g1, g2, pt, params)
    assert abs(val - quad) < 1e-12


def test_exchange_d_series_fork_node():
    # adjacency through the D4 fork behaves like any simply-laced edge
    d4 = cartan("D", 4)
    t = tower(1.0, 1.0)
    rng = np.random.default_rng(13)
    for i, j in ((2, 4), (1, 2), (1, 3)):
        sr = structfn.ratio("EE", i, j, d4, c=1)
        rec = checks.exchange_check(current("E", i, "u"), current("E", j, "v"),
                                    sr, d4, t, samples=10, tol=1e-8, rng=rng)
        assert rec["pass"], rec
    rec = checks.serre_check(2, 4, d4, t, samples=8, tol=1e-7, rng=rng)
    assert rec["pass"], rec


def test_exchange_e6_smoke():
    # the exceptional series enters only through its Cartan matrix
    e6 = cartan("E", 6)
    t = tower(1.0)
    rng = np.random.default_rng(19)
    for i, j in ((2, 4), (1, 3), (1, 2)):  # edge, edge, non-edge
        sr = structfn.ratio("EE", i, j, e6, c=1)
        rec = checks.exchange_check(current("E", i, "u"), current("E", j, "v"),
                                    sr, e6, t, samples=6, tol=1e-8, rng=rng)
        assert rec["pass"], rec
