"""Reduction of contraction integrands to master-formula primitives.

The normal-ordering exponent of a pair of free-field exponentials is the
log-weighted contour integral of kernel(lambda) * g1(lambda) *
g2(-lambda); after the sh products are cancelled and resummed the
integrand always lands on the finite catalog

    coeff * e^{i*lambda*vars + s*lambda} / lambda              -> I0
    coeff * e^{...} / (lambda * (1 - e^{-beta*lambda}))        -> M_{1/beta}

Reduction rules (coefficients stay integers by construction):

* sh cancellation:  identical num/den arguments drop.
* integer ratio:    sh(m*b)/sh(b) = sum_j e^{(m-1-2j)*b*lambda}.
* den -> Bose:      1/sh(b) = 2 e^{-b} / (1 - e^{-2b}),  b > 0.
* sh vs Bose:       sh(a) * Bose(2a) = e^{a*lambda}/2.
* two Bose scales:  with d = beta2 - beta1 > 0 and sh(d/2) available,
  Bose(beta1)*Bose(beta2) = (e^{(beta1+beta2)/2}/2) * [Bose(beta1) -
  Bose(beta2)] after absorbing sh(d/2); this is what untangles the
  H-current pairs whose two Bose scales differ by the level shift.

Anything that fails to land on the catalog falls back to direct contour
quadrature (convergence permitting) or raises ``UnsupportedPairError``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from ..params import ParamTower
from .atoms import ExponentFn, ParamLin
from .kernel import Kernel
from .master import (
    EULER_GAMMA,
    _contour_quadrature,
    exp_i0,
    exp_master,
    i0_closed,
    master_integral,
)


class UnsupportedPairError(ValueError):
    """Integrand neither decomposes nor admits convergent quadrature."""


@dataclass(frozen=True)
class Primitive:
    """coeff * primitive(x(w)), x = -i*vars - s; Bose scale beta or None."""

    coeff: int
    vars: tuple[tuple[str, int], ...]
    s: ParamLin
    beta: Optional[ParamLin]

    def x_value(self, assignment: Mapping[str, complex], params: ParamTower) -> complex:
        z = 0.0 + 0.0j
        for n, c in self.vars:
            z += c * complex(assignment[n])
        return -1j * z - self.s.value(params)


@dataclass
class _Work:
    coeff: complex
    vars: tuple[tuple[str, int], ...]
    rshift: ParamLin
    num_sh: list[ParamLin]
    den_sh: list[ParamLin]
    bose: list[ParamLin]


def _normalize_sh_list(args: Sequence[ParamLin], params: ParamTower) -> tuple[int, list[ParamLin]]:
    sign = 1
    out = []
    for a in args:
        v = a.value(params)
        if v == 0:
            raise UnsupportedPairError("sh argument degenerates to zero")
        if v < 0:
            sign = -sign
            a = -a
        out.append(a)
    return sign, out


def _reduce(work: _Work, params: ParamTower) -> list[_Work]:
    """Apply one reduction step; returns replacement works (may branch)."""
    # identical num/den cancellation
    for a in list(work.num_sh):
        for b in list(work.den_sh):
            if (a - b).is_zero():
                work.num_sh.remove(a)
                work.den_sh.remove(b)
                return [work]
    # integer-multiple resummation sh(m b)/sh(b)
    for b in list(work.den_sh):
        for a in list(work.num_sh):
            m = a.integer_ratio(b)
            if m is None:
                continue
            work.num_sh.remove(a)
            work.den_sh.remove(b)
            outs = []
            for jj in range(m):
                w2 = _clone(work)
                w2.rshift = work.rshift + b * Fraction(m - 1 - 2 * jj)
                outs.append(w2)
            return outs
    # sh(a) against Bose(2a)
    for a in list(work.num_sh):
        for beta in list(work.bose):
            if (beta - a * 2).is_zero():
                work.num_sh.remove(a)
                work.bose.remove(beta)
                work.coeff *= 0.5
                work.rshift = work.rshift + a
                return [work]
    # remaining 1/sh -> Bose
    if work.den_sh:
        b = work.den_sh.pop()
        work.coeff *= 2.0
        work.rshift = work.rshift - b
        work.bose.append(b * 2)
        return [work]
    # two distinct Bose scales, difference matched by an sh numerator
    if len(work.bose) >= 2:
        bs = sorted(work.bose, key=lambda b: b.value(params))
        b1, b2 = bs[0], bs[1]
        d = b2 - b1
        if d.is_zero():
            raise UnsupportedPairError("repeated Bose scale without matching sh")
        half = d * Fraction(1, 2)
        match = next((a for a in work.num_sh if (a - half).is_zero()), None)
        if match is None:
            raise UnsupportedPairError(
                f"Bose scales {b1}, {b2} differ by {d} with no sh({half}) numerator")
        work.num_sh.remove(match)
        work.bose.remove(b1)
        work.bose.remove(b2)
        work.coeff *= 0.5
        work.rshift = work.rshift + (b1 + b2) * Fraction(1, 2)
        wa = _clone(work)
        wa.bose = work.bose + [b1]
        wb = _clone(work)
        wb.coeff = -wb.coeff
        wb.bose = work.bose + [b2]
        return [wa, wb]
    # expand leftover sh numerators
    if work.num_sh:
        a = work.num_sh.pop()
        work.coeff *= 0.5
        wa = _clone(work)
        wa.rshift = work.rshift + a
        wb = _clone(work)
        wb.coeff = -wb.coeff
        wb.rshift = work.rshift - a
        return [wa, wb]
    return []


def _clone(w: _Work) -> _Work:
    return _Work(w.coeff, w.vars, w.rshift, list(w.num_sh), list(w.den_sh), list(w.bose))


@dataclass(frozen=True)
class ClosedForm:
    """Finite sum of primitives; the exponent C of one contraction factor."""

    primitives: tuple[Primitive, ...]
    gamma_power: int = 0  # e^{gamma * power} prefactor carried symbolically

    def free_vars(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for p in self.primitives:
            out |= frozenset(n for n, _ in p.vars)
        return out

    def value(self, assignment: Mapping[str, complex], params: ParamTower) -> complex:
        """The exponent itself (principal branches; may raise off-domain)."""
        total = complex(self.gamma_power * EULER_GAMMA)
        for p in self.primitives:
            x = p.x_value(assignment, params)
            if p.beta is None:
                total += p.coeff * i0_closed(x)
            else:
                total += p.coeff * master_integral(x, 1.0 / p.beta.value(params))
        return total

    def exp_value(self, assignment: Mapping[str, complex], params: ParamTower) -> complex:
        """exp(C), single-valued meromorphic continuation."""
        out = math.exp(self.gamma_power * EULER_GAMMA)
        for p in self.primitives:
            x = p.x_value(assignment, params)
            base = exp_i0(x) if p.beta is None else exp_master(x, 1.0 / p.beta.value(params))
            out *= base ** p.coeff
        return out

    def __add__(self, other: "ClosedForm") -> "ClosedForm":
        return ClosedForm(self.primitives + other.primitives,
                          self.gamma_power + other.gamma_power)

    def negated(self) -> "ClosedForm":
        return ClosedForm(tuple(replace(p, coeff=-p.coeff) for p in self.primitives),
                          -self.gamma_power)

    def describe(self) -> list[str]:
        """Audit strings, one per primitive: coeff * kind(x = -i*w - s)."""
        out = []
        for p in self.primitives:
            wpart = "".join(
                ("+" if c > 0 else "-") + (f"{abs(c)}*" if abs(c) != 1 else "") + n
                for n, c in p.vars)
            kind = "I0" if p.beta is None else f"M[beta={p.beta}]"
            out.append(f"{p.coeff:+d} * {kind}(x = -i*({wpart.lstrip('+')}) - ({p.s}))")
        return sorted(out)

    # -- pole bookkeeping ---------------------------------------------------

    def pole_catalog(self, wvar_plus: str, wvar_minus: str, params: ParamTower,
                     imag_bound: float) -> list[tuple[ParamLin, int, float]]:
        """Zeros/poles of exp(C) in w = (+var) - (-var), |Im w| <= bound.

        Every primitive must depend on exactly the pair (wvar_plus,
        +1), (wvar_minus, -1).  Returns (position p [w = i*p], order,
        numeric height); order > 0 means pole.
        """
        ladder: dict[ParamLin, int] = {}

        def add(pos: ParamLin, order: int) -> None:
            if abs(pos.value(params)) > imag_bound + 1e-12:
                return
            for known in ladder:
                if (known - pos).is_zero():
                    ladder[known] += order
                    return
            ladder[pos] = order

        for p in self.primitives:
            expect = tuple(sorted(((wvar_plus, 1), (wvar_minus, -1))))
            if tuple(sorted(p.vars)) != expect:
                raise ValueError("pole catalog needs primitives in one difference variable")
            if p.beta is None:
                # (e^,-gamma}/x)^c: x = 0 at w = i*s
                add(p.s, p.coeff)
            else:
                beta_val = p.beta.value(params)
                m = 0
                while m * beta_val <= (imag_bound + abs(p.s.value(params))) + 1e-12:
                    add(p.s - p.beta * m, p.coeff)
                    m += 1
        out = [(pos, order, pos.value(params)) for pos, order in ladder.items() if order != 0]
        out.sort(key=lambda rec: rec[2])
        return out

    def residue_at(self, w0: complex, params: ParamTower,
                   var_plus: str = "u", var_minus: str = "v",
                   radius: float = 1e-3, npts: int = 64) -> complex:
        """Numeric residue of exp(C) at w = w0 (simple pole), circle rule."""
        acc = 0.0 + 0.0j
        for k in range(npts):
            th = 2.0 * math.pi * k / npts
            w = w0 + radius * cmath.exp(1j * th)
            val = self.exp_value({var_plus: w, var_minus: 0.0}, params)
            acc += val * radius * cmath.exp(1j * th)
        return acc / npts


def product_exponent(kernel: Kernel, g1: ExponentFn, g2: ExponentFn,
                     params: ParamTower) -> ClosedForm:
    """Decompose kernel * g1(lambda) * g2(-lambda) (kernel carries 1/lambda)."""
    g2n = g2.negated_lambda(params)
    coeff = kernel.coeff * g1.weight * g2n.weight
    if coeff == 0:
        return ClosedForm(())

    def res(seq):
        return [a.resolved(params) for a in seq]

    sign_n, num = _normalize_sh_list(
        res(tuple(kernel.num_sh) + g1.num_sh + g2n.num_sh), params)
    sign_d, den = _normalize_sh_list(
        res(tuple(kernel.den_sh) + g1.den_sh + g2n.den_sh), params)
    v = dict(g1.vars)
    for n, c in g2n.vars:
        v[n] = v.get(n, 0) + c
    work = _Work(
        coeff=coeff * sign_n * sign_d,
        vars=tuple(sorted((n, c) for n, c in v.items() if c)),
        rshift=(g1.rshift + g2n.rshift).resolved(params),
        num_sh=num,
        den_sh=den,
        bose=res(list(g1.bose) + list(g2n.bose)),
    )
    queue = [work]
    prims: list[Primitive] = []
    while queue:
        w = queue.pop()
        nxt = _reduce(w, params)
        if not nxt:
            c = w.coeff
            ci = round(c.real) if isinstance(c, complex) else round(c)
            if abs(c - ci) > 1e-9:
                raise UnsupportedPairError(f"non-integer primitive coefficient {c}")
            if ci == 0:
                continue
            # e^{(i*vars + rshift)*lambda} = e^{-x*lambda} with x = -i*vars - rshift
            prims.append(Primitive(int(ci), w.vars, w.rshift, w.bose[0] if w.bose else None))
        else:
            queue.extend(nxt)
    merged: list[Primitive] = []
    for p in prims:
        for i, q in enumerate(merged):
            if p.vars == q.vars and (p.s - q.s).is_zero() and _beta_eq(p.beta, q.beta):
                merged[i] = replace(q, coeff=q.coeff + p.coeff)
                break
        else:
            merged.append(p)
    return ClosedForm(tuple(p for p in merged if p.coeff != 0))


def _beta_eq(a: Optional[ParamLin], b: Optional[ParamLin]) -> bool:
    if a is None or b is None:
        return a is None and b is None
    return (a - b).is_zero()


class QuadratureFallback:
    """Exponent evaluated by direct contour quadrature per call.

    Produced when an integrand fails to land on the primitive catalog;
    carries the same value/exp_value interface as ClosedForm but no
    symbolic pole bookkeeping, and is only valid where the contour
    integral converges.
    """

    def __init__(self, kernel: Kernel, g1: ExponentFn, g2: ExponentFn):
        self.kernel = kernel
        self.g1 = g1
        self.g2 = g2
        self.primitives = ()
        self.gamma_power = 0

    def value(self, assignment, params: ParamTower) -> complex:
        return quadrature_exponent(self.kernel, self.g1, self.g2, assignment, params)

    def exp_value(self, assignment, params: ParamTower) -> complex:
        return cmath.exp(self.value(assignment, params))


def contraction_exponent(g1: ExponentFn, g2: ExponentFn, kernel: Kernel,
                         params: ParamTower,
                         probe: Optional[dict] = None):
    """The normal-ordering exponent for the ordered pair (g1, g2).

    Returns a ClosedForm when the integrand decomposes onto the
    primitive catalog; otherwise falls back to direct contour quadrature
    (validated at the ``probe`` assignment) and returns a
    QuadratureFallback, or raises UnsupportedPairError when that
    diverges too.
    """
    if g1.is_zero() or g2.is_zero() or kernel.coeff == 0:
        return ClosedForm(())
    try:
        return product_exponent(kernel, g1, g2, params)
    except UnsupportedPairError:
        fb = QuadratureFallback(kernel, g1, g2)
        if probe is not None:
            fb.value(probe, params)  # raises if divergent
        return fb


def quadrature_exponent(kernel: Kernel, g1: ExponentFn, g2: ExponentFn,
                        assignment: Mapping[str, complex], params: ParamTower,
                        rho: float = 0.3, lam_max: float = 400.0) -> complex:
    """Direct keyhole quadrature of the undecomposed integrand.

    Only converges when the spectral arguments keep every exponential
    decaying along the positive axis; used as the oracle for the closed
    forms and as a last-resort fallback.
    """
    g2n = g2.negated_lambda(params)

    def f(lam: complex) -> complex:
        val = kernel.coeff * lam ** kernel.lambda_power
        for a in kernel.num_sh:
            val *= cmath.sinh(a.value(params) * lam)
        for b in kernel.den_sh:
            val /= cmath.sinh(b.value(params) * lam)
        val *= g1.eval_at(lam, assignment, params)
        val *= g2n.eval_at(lam, assignment, params)
        return val

    tail = abs(f(complex(lam_max, 0.0)))
    if not (tail < 1e-10):
        raise UnsupportedPairError("quadrature fallback divergent along the contour")
    return _contour_quadrature(f, 0.0, rho, lam_max, 4096)
