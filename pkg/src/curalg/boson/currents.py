"""Free-field currents: zero modes, Klein phases and mode coefficients.

The level-1 currents are

    E_j(u) = e^gamma  exp(2*pi*i*Q_j) exp(P_j)  :exp( phi'_j(u)/2):
    F_j(u) = e^gamma  exp(-2*pi*i*Q_j) exp(-P_j) :exp(-phi_j(u)/2):
    H+-_j(u) = :exp(-+ int e^{i*lambda*u} e^{-+hbar*lambda/4}
                    / (1 - e^{+-lambda/eta}) a_j(lambda)):

with [P_i, Q_j] = B_ij.  Reordering exp(P_i) past exp(2*pi*i*Q_j) costs
exp(2*pi*i*B_ij); for adjacent nodes that half-integer phase enters both
orders of a product symmetrically and cancels in the exchange ratio, so
the E/F words additionally carry standard multiplicative Klein factors
with epsilon(xi, xi') = (-1)^(sum_{a<b} xi_a xi'_b A_ab) on the charge
lattice (E_j carries +e_j, F_j carries -e_j).  The combined reordering
phase of two currents is then exp(2*pi*i*q*q'*B_ij), which is what the
exchange relations require.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from ..liealg import CartanData
from ..params import ParamTower
from ..trigcalc import ShiftExpr
from .atoms import ExponentFn, ParamLin, spectral_exponent

KINDS = ("E", "F", "H+", "H-")


# ---------------------------------------------------------------------------
# Zero modes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ZeroModeWord:
    """A word in the letters exp(2*pi*i*Q_j) (kind 'Q') and exp(P_j) ('P').

    ``letters`` is a sequence of (kind, node, multiplicity).  Canonical
    form pulls every Q letter left of every P letter, accumulating the
    exp(2*pi*i*B) exchange phases; the rewrite is confluent because the
    phases are central.
    """

    letters: tuple[tuple[str, int, int], ...] = ()

    @staticmethod
    def for_current(kind: str, j: int) -> "ZeroModeWord":
        if kind == "E":
            return ZeroModeWord((("Q", j, 1), ("P", j, 1)))
        if kind == "F":
            return ZeroModeWord((("Q", j, -1), ("P", j, -1)))
        return ZeroModeWord(())

    def __mul__(self, other: "ZeroModeWord") -> "ZeroModeWord":
        return ZeroModeWord(self.letters + other.letters)

    def canonicalize(self, cartan: CartanData) -> tuple[complex, tuple[tuple[int, ...], tuple[int, ...]]]:
        """(phase, (q charges, p charges)) after moving all Q left."""
        letters = list(self.letters)
        phase_exponent = Fraction(0)  # in units of 2*pi*i
        changed = True
        while changed:
            changed = False
            for k in range(len(letters) - 1):
                (ka, ja, ma), (kb, jb, mb) = letters[k], letters[k + 1]
                if ka == "P" and kb == "Q":
                    phase_exponent += Fraction(ma * mb) * cartan.b_entry(ja, jb)
                    letters[k], letters[k + 1] = letters[k + 1], letters[k]
                    changed = True
        q = [0] * cartan.rank
        p = [0] * cartan.rank
        for kind, j, m in letters:
            if kind == "Q":
                q[j - 1] += m
            else:
                p[j - 1] += m
        phase = cmath.exp(2j * math.pi * float(phase_exponent))
        return phase, (tuple(q), tuple(p))


def klein_phase(xi_left: Sequence[int], xi_right: Sequence[int],
                cartan: CartanData) -> int:
    """Multiplicative cocycle (-1)^(sum_{a<b} xi_a xi'_b A_ab)."""
    s = 0
    r = cartan.rank
    for a in range(1, r + 1):
        for b in range(a + 1, r + 1):
            s += xi_left[a - 1] * xi_right[b - 1] * cartan.a_entry(a, b)
    return -1 if s % 2 else 1


# ---------------------------------------------------------------------------
# Currents
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BosonCurrent:
    """One current letter: kind, node, spectral argument, family slot.

    ``slot`` selects the Heisenberg copy: the mode kernel of slot m uses
    the scales (eta^(m), eta^(m+1)); level-1 words live entirely in
    slot 0.
    """

    kind: str
    j: int
    arg: ShiftExpr
    slot: int = 0

    @property
    def gamma_power(self) -> int:
        return 1 if self.kind in ("E", "F") else 0

    def charge(self, rank: int) -> tuple[int, ...]:
        xi = [0] * rank
        if self.kind == "E":
            xi[self.j - 1] = 1
        elif self.kind == "F":
            xi[self.j - 1] = -1
        return tuple(xi)

    def zero_mode(self) -> ZeroModeWord:
        return ZeroModeWord.for_current(self.kind, self.j)

    def g(self) -> ExponentFn:
        """The mode coefficient function g(lambda) of this letter."""
        vars_, shift = spectral_exponent(self.arg)
        m = self.slot
        if self.kind == "E":
            return ExponentFn(
                weight=0.5, vars=vars_, rshift=shift,
                num_sh=(ParamLin.inv_eta(m + 1, Fraction(1, 2)),),
                den_sh=(ParamLin.inv_eta(m, Fraction(1, 2)), ParamLin.hbar(Fraction(1, 2))),
            )
        if self.kind == "F":
            return ExponentFn(
                weight=-0.5, vars=vars_, rshift=shift,
                den_sh=(ParamLin.hbar(Fraction(1, 2)),),
            )
        beta = ParamLin.inv_eta(m)
        if self.kind == "H+":
            # -e^{-hbar/4} / (1 - e^{+lambda/eta}) = +e^{-hbar/4 - 1/eta} Bose
            return ExponentFn(
                weight=1.0, vars=vars_,
                rshift=shift + ParamLin.hbar(Fraction(-1, 4)) - beta,
                bose=(beta,),
            )
        if self.kind == "H-":
            return ExponentFn(
                weight=1.0, vars=vars_,
                rshift=shift + ParamLin.hbar(Fraction(1, 4)),
                bose=(beta,),
            )
        raise ValueError(f"unknown current kind {self.kind!r}")


def current(kind: str, j: int, var_name: str, q_shift: Fraction | int = 0,
            slot: int = 0) -> BosonCurrent:
    arg = ShiftExpr.of_var(var_name) + ShiftExpr.hbar_units(Fraction(q_shift))
    return BosonCurrent(kind, j, arg, slot)


def phi_value(kind: str, j: int, lam: complex, u: complex,
              params: ParamTower, slot: int = 0) -> complex:
    """Pointwise g(lambda) evaluation (oracle for the atom bookkeeping)."""
    eta = params.eta_at(slot)
    eta_p = params.eta_at(slot + 1)
    h = params.hbar
    e_iu = cmath.exp(1j * lam * u)
    if kind == "E":
        return 0.5 * e_iu * cmath.sinh(lam / (2 * eta_p)) / (
            cmath.sinh(lam / (2 * eta)) * cmath.sinh(h * lam / 2))
    if kind == "F":
        return -0.5 * e_iu / cmath.sinh(h * lam / 2)
    if kind == "H+":
        return -e_iu * cmath.exp(-h * lam / 4) / (1 - cmath.exp(lam / eta))
    if kind == "H-":
        return e_iu * cmath.exp(h * lam / 4) / (1 - cmath.exp(-lam / eta))
    raise ValueError(kind)


# ---------------------------------------------------------------------------
# Ordered products of currents
# ---------------------------------------------------------------------------


def word_phase(currents: Iterable[BosonCurrent], cartan: CartanData) -> complex:
    """Scalar accumulated when normal-ordering the zero-mode/Klein part.

    Pairwise over the word, left to right: canonicalization phase of the
    concatenated zero-mode letters times the Klein cocycle of the charge
    vectors.
    """
    cs = list(currents)
    word = ZeroModeWord(())
    for c in cs:
        word = word * c.zero_mode()
    phase, _ = word.canonicalize(cartan)
    klein = 1
    for a in range(len(cs)):
        for b in range(a + 1, len(cs)):
            klein *= klein_phase(cs[a].charge(cartan.rank), cs[b].charge(cartan.rank), cartan)
    return phase * klein
