"""Numeric verification of the level-1 free-field realization.

Every delta-free exchange relation is checked by comparing

    exp(C_XY(u,v) - C_YX(v,u)) * (zero-mode/Klein phase ratio)

against the corresponding structure function; the E-F relation is
checked through the pole/residue structure of its contraction factor;
the cubic relations by symmetrized cancellation of full word
coefficients.  All closed forms evaluate through the meromorphic Gamma
continuation, so sample points are unconstrained up to poles.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from ..liealg import CartanData
from ..params import ParamTower
from ..structfn import StructureRatio
from .atoms import ExponentFn, ParamLin
from .contraction import ClosedForm, contraction_exponent
from .currents import BosonCurrent, current, word_phase
from .kernel import kernel
from .master import EULER_GAMMA


def pair_exponent(x: BosonCurrent, y: BosonCurrent, cartan: CartanData,
                  params: ParamTower) -> ClosedForm:
    """Contraction exponent of the ordered pair X(arg_x) Y(arg_y)."""
    if x.slot != y.slot:
        return ClosedForm(())  # independent mode copies never contract
    ker = kernel(cartan, x.j, y.j, x.slot)
    return contraction_exponent(x.g(), y.g(), ker, params)


def word_exponent(word: Sequence[BosonCurrent], cartan: CartanData,
                  params: ParamTower) -> ClosedForm:
    """Sum of pairwise contraction exponents of an ordered word."""
    total = ClosedForm(())
    for a in range(len(word)):
        for b in range(a + 1, len(word)):
            total = total + pair_exponent(word[a], word[b], cartan, params)
    return total


def word_coefficient(word: Sequence[BosonCurrent], cartan: CartanData,
                     params: ParamTower, assignment) -> complex:
    """Full scalar in front of the normal-ordered product of ``word``."""
    phase = word_phase(word, cartan)
    return phase * word_exponent(word, cartan, params).exp_value(assignment, params)


def exchange_check(x: BosonCurrent, y: BosonCurrent, expected: StructureRatio,
                   cartan: CartanData, params: ParamTower,
                   samples: int = 30, tol: float = 1e-8,
                   rng: Optional[np.random.Generator] = None,
                   imag_window: float = 0.2) -> dict:
    """Compare the realized exchange ratio of X(u)Y(v) with ``expected``."""
    if rng is None:
        rng = np.random.default_rng(11)
    if {x.kind, y.kind} == {"E", "F"} and x.j == y.j:
        raise ValueError("the E-F pair at equal nodes is delta-bearing; use ef_delta_check")
    c_xy = word_exponent((x, y), cartan, params)
    c_yx = word_exponent((y, x), cartan, params)
    ph = word_phase((x, y), cartan) / word_phase((y, x), cartan)
    u_name = x.arg.vars[0][0]
    v_name = y.arg.vars[0][0]
    max_res = 0.0
    done = 0
    tries = 0
    while done < samples and tries < samples + 200:
        tries += 1
        pt = {
            u_name: complex(rng.uniform(-2, 2), rng.uniform(-imag_window, imag_window)),
            v_name: complex(rng.uniform(-2, 2), rng.uniform(-imag_window, imag_window)),
        }
        try:
            num = c_xy.exp_value(pt, params)
            den = c_yx.exp_value(pt, params)
            if not (np.isfinite(num.real) and np.isfinite(den.real)) or den == 0:
                continue
            model = ph * num / den
            w = pt[u_name] - pt[v_name]
            target = expected.eval(w, params)
        except (ArithmeticError, OverflowError, ValueError):
            continue
        scale = max(1.0, abs(model), abs(target))
        max_res = max(max_res, abs(model - target) / scale)
        done += 1
    return {
        "pair": f"{x.kind}_{x.j}|{y.kind}_{y.j}",
        "relation": expected.relation,
        "samples": done,
        "max_residual": max_res,
        "tol": tol,
        "pass": bool(done > 0 and max_res < tol),
    }


def merged_exponent_matches(pair: tuple[BosonCurrent, BosonCurrent],
                            target: BosonCurrent, params: ParamTower,
                            rng: Optional[np.random.Generator] = None,
                            n_lambda: int = 40, tol: float = 1e-9) -> dict:
    """Pointwise check that g_X + g_Y equals g_target as mode functions."""
    if rng is None:
        rng = np.random.default_rng(5)
    gx, gy, gt = pair[0].g(), pair[1].g(), target.g()
    names = sorted({n for g in (gx, gy, gt) for n, _ in g.vars})
    worst = 0.0
    done = 0
    tries = 0
    while done < n_lambda and tries < n_lambda + 200:
        tries += 1
        lam = complex(rng.uniform(-3, 3), rng.uniform(-0.4, 0.4))
        if abs(lam) < 0.2:
            continue
        pt = {n: complex(rng.uniform(-1, 1), 0.0) for n in names}
        try:
            merged = gx.eval_at(lam, pt, params) + gy.eval_at(lam, pt, params)
            tgt = gt.eval_at(lam, pt, params)
        except (ZeroDivisionError, OverflowError):
            continue
        scale = max(1.0, abs(tgt))
        worst = max(worst, abs(merged - tgt) / scale)
        done += 1
    return {"samples": done, "max_residual": worst, "pass": bool(done and worst < tol)}


def ef_delta_check(i: int, cartan: CartanData, params: ParamTower,
                   tol: float = 1e-8) -> dict:
    """Pole/residue audit of E_i(u) F_i(v) against the H payloads.

    Checks, in order: the contraction factor has simple poles exactly at
    w = +-i*hbar/2 inside the fundamental strip; the commutator delta
    coefficients (-2*pi*i * residue, times the e^{2 gamma} prefactor of
    the two currents) equal +-2*pi/hbar; and the merged mode function on
    each support equals the corresponding H coefficient function with
    the quarter-shifted argument.
    """
    e_cur = current("E", i, "u")
    f_cur = current("F", i, "v")
    cform = word_exponent((e_cur, f_cur), cartan, params)
    phase = word_phase((e_cur, f_cur), cartan)

    strip_bound = 0.45 / params.eta
    catalog = cform.pole_catalog("u", "v", params, strip_bound)
    poles = [(pos, order) for pos, order, _h in catalog if order > 0]
    want = [ParamLin.hbar(Fraction(-1, 2)), ParamLin.hbar(Fraction(1, 2))]
    structure_ok = (
        len(poles) == 2
        and all(order == 1 for _p, order in poles)
        and all(any((pos - wpos).is_zero() for pos, _o in poles) for wpos in want)
    )
    if not structure_ok:
        raise AssertionError(
            f"E_{i} F_{i} contraction pole structure mismatch: "
            f"{[(str(p), o) for p, o in poles]}")

    report: dict = {"i": i, "poles": [str(p) for p, _ in poles], "pass": True}
    gamma_pref = math.exp(2.0 * EULER_GAMMA)  # e^gamma from each of E and F

    residual = 0.0
    for sgn, hkind in ((+1, "H+"), (-1, "H-")):
        w0 = 1j * sgn * params.hbar / 2.0
        res = cform.residue_at(w0, params, "u", "v", radius=params.hbar / 8.0)
        coeff = -2j * math.pi * res * gamma_pref * phase
        target = sgn * 2.0 * math.pi / params.hbar
        residual = max(residual, abs(coeff - target) / abs(target))
        h_cur = current(hkind, i, "u", Fraction(-sgn, 4))
        f_shift = current("F", i, "u", Fraction(-sgn, 2))
        payload = merged_exponent_matches((current("E", i, "u"), f_shift),
                                          h_cur, params)
        residual = max(residual, payload["max_residual"])
        report[f"payload_{hkind}"] = payload["max_residual"]
    report["max_residual"] = residual
    report["tol"] = tol
    report["pass"] = bool(residual < tol)
    return report


def serre_check(i: int, j: int, cartan: CartanData, params: ParamTower,
                samples: int = 20, tol: float = 1e-7,
                rng: Optional[np.random.Generator] = None) -> dict:
    """Symmetrized cubic combination of full word coefficients vanishes."""
    if cartan.a_entry(i, j) != -1:
        raise ValueError("cubic relation applies to adjacent pairs only")
    if rng is None:
        rng = np.random.default_rng(23)
    coef = 2.0 * math.cos(math.pi * params.eta * params.hbar)

    def words(u1: str, u2: str):
        a = current("E", i, u1)
        b = current("E", i, u2)
        c = current("E", j, "v")
        return [((a, b, c), 1.0), ((a, c, b), -coef), ((c, a, b), 1.0)]

    terms = words("u1", "u2") + words("u2", "u1")
    worst = 0.0
    done = 0
    tries = 0
    while done < samples and tries < samples + 300:
        tries += 1
        pt = {
            "u1": complex(rng.uniform(-2, 2), rng.uniform(-0.15, 0.15)),
            "u2": complex(rng.uniform(-2, 2), rng.uniform(-0.15, 0.15)),
            "v": complex(rng.uniform(-2, 2), rng.uniform(-0.15, 0.15)),
        }
        try:
            vals = [wt * word_coefficient(word, cartan, params, pt)
                    for word, wt in terms]
        except (ArithmeticError, OverflowError, ValueError):
            continue
        if not all(np.isfinite(abs(v)) for v in vals):
            continue
        scale = max(1.0, max(abs(v) for v in vals))
        worst = max(worst, abs(sum(vals)) / scale)
        done += 1
    return {
        "pair": (i, j),
        "samples": done,
        "max_residual": worst,
        "tol": tol,
        "pass": bool(done > 0 and worst < tol),
    }


# ---------------------------------------------------------------------------
# Fock pairing prescriptions
# ---------------------------------------------------------------------------


def pairing(g_left: ExponentFn, f_right: ExponentFn, i: int, j: int,
            cartan: CartanData, params: ParamTower, assignment=None,
            slot: int = 0) -> complex:
    """Two-point pairing <a_i(g) a_j(f)>: the log-weighted contour integral."""
    if assignment is None:
        assignment = {}
    ker = kernel(cartan, i, j, slot)
    cform = contraction_exponent(g_left, f_right, ker, params)
    return cform.value(assignment, params)


def wick_pairing(factors: Sequence[tuple[ExponentFn, int]], cartan: CartanData,
                 params: ParamTower, assignment=None, slot: int = 0) -> complex:
    """Vacuum expectation of a product of modes by pair-partition expansion.

    ``factors`` is the ordered list of (mode function, node index); the
    value is the sum over perfect matchings of products of two-point
    pairings taken in word order.  Odd length gives 0; the empty product
    is the vacuum-vacuum pairing 1.
    """
    n = len(factors)
    if n == 0:
        return 1.0 + 0.0j
    if n % 2:
        return 0.0 + 0.0j
    (g0, i0) = factors[0]
    total = 0.0 + 0.0j
    for k in range(1, n):
        gk, ik = factors[k]
        rest = [factors[m] for m in range(1, n) if m != k]
        total += pairing(g0, gk, i0, ik, cartan, params, assignment, slot) \
            * wick_pairing(rest, cartan, params, assignment, slot)
    return total
