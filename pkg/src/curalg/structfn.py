"""Structure functions of the defining exchange relations.

Each relation X(u)Y(v) = R(u-v) Y(v)X(u) carries a ratio R of sh factors
with arguments shifted by exact rational multiples of i*hbar.  This
module builds those ratios in canonical factored form over the single
variable w = u - v, with period 0 (eta) and period 1 (eta') entering
exactly as in the relations: the E-side exchange and H-E mixing use eta
only, the F-side and H-F mixing use eta' only, and the H-H relations mix
both.

Sign convention note: the H-F mixing ratio is built with the shift signs
opposite to the H-E one (numerator +i*hbar*(B - c/4) for H^+ instead of
-i*hbar*(B - c/4)).  Both the finite-dimensional representation and the
level-1 free-field realization force this orientation; see the F-F
relation, which mirrors E-E the same way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from .liealg import CartanData
from .params import ParamTower
from .trigcalc import DistExpr, ShiftExpr, Term, TrigFactor

RELATIONS = ("HH_pm", "HH_same", "HE", "HF", "EE", "FF")

ETA = 0        # period index of eta
ETA_PRIME = 1  # period index of eta'


@dataclass(frozen=True)
class StructureRatio:
    """Exchange function in w = u - v, as numerator/denominator factor lists."""

    relation: str
    i: int
    j: int
    c: Fraction
    num: tuple[TrigFactor, ...]
    den: tuple[TrigFactor, ...]

    @property
    def ratio(self) -> DistExpr:
        inv = tuple(TrigFactor(f.period, f.arg, -1) for f in self.den)
        return DistExpr((Term(1.0, self.num + inv),))

    def num_expr(self) -> DistExpr:
        return DistExpr((Term(1.0, self.num),))

    def den_expr(self) -> DistExpr:
        return DistExpr((Term(1.0, self.den),))

    def eval(self, w: complex, params: ParamTower) -> complex:
        return self.ratio.eval({"w": w}, params)

    def rational_eval(self, w: complex, params: ParamTower) -> complex:
        """eta -> 0 degeneration: each sh(pi*eta_p*(w - s)) replaced by (w - s)."""
        val = 1.0 + 0.0j
        for f in self.num:
            val *= f.arg.eval({"w": w}, params)
        for f in self.den:
            val /= f.arg.eval({"w": w}, params)
        return val


def _sh(period: int, q_shift: Fraction) -> TrigFactor:
    return TrigFactor(period, ShiftExpr.of_var("w") + ShiftExpr.hbar_units(q_shift))


def _build(relation: str, b: Fraction, c: Fraction,
           prime: int) -> tuple[list[TrigFactor], list[TrigFactor]]:
    if relation == "HH_pm":
        num = [_sh(ETA, -(b - c / 2)), _sh(prime, b - c / 2)]
        den = [_sh(ETA, b + c / 2), _sh(prime, -(b + c / 2))]
    elif relation == "HH_same":
        num = [_sh(ETA, -b), _sh(prime, b)]
        den = [_sh(ETA, b), _sh(prime, -b)]
    elif relation == "HE":
        num = [_sh(ETA, -(b - c / 4))]
        den = [_sh(ETA, b + c / 4)]
    elif relation == "HF":
        # Orientation opposite to HE; forced by both realizations.
        num = [_sh(prime, b - c / 4)]
        den = [_sh(prime, -(b + c / 4))]
    elif relation == "EE":
        num = [_sh(ETA, -b)]
        den = [_sh(ETA, b)]
    elif relation == "FF":
        num = [_sh(prime, b)]
        den = [_sh(prime, -b)]
    else:
        raise ValueError(f"unknown relation {relation!r}; expected one of {RELATIONS}")
    return num, den


def ratio(relation: str, i: int, j: int, cartan: CartanData,
          c: Fraction | int = 0, sign: int = +1,
          prime_period: int = ETA_PRIME) -> StructureRatio:
    """Exchange function for the given relation and node pair.

    ``sign`` selects H^+ (+1) or H^- (-1) in the HE/HF relations; the
    HH and EE/FF relations ignore it.  ``c`` is the level, kept rational
    so every shift stays on the exact i*hbar lattice.  ``prime_period``
    is the tower index whose scale satisfies 1/eta' - 1/eta = hbar*c
    (index 1 for a level-c member, index 2 for the level-2 images built
    from two level-1 slots, and so on).
    """
    if sign not in (+1, -1):
        raise ValueError("sign must be +-1")
    b = cartan.b_entry(i, j)
    cc = Fraction(c) if sign == +1 else -Fraction(c)
    if relation in ("HE", "HF"):
        num, den = _build(relation, b, cc, prime_period)
    else:
        num, den = _build(relation, b, Fraction(c), prime_period)
    # Structural cancellation (B_ij = 0 makes every ratio identically 1,
    # and partial collisions can occur at special c).
    num2, den2 = list(num), list(den)
    for f in list(num2):
        for g in list(den2):
            if f.period == g.period and f.arg == g.arg:
                num2.remove(f)
                den2.remove(g)
                break
    return StructureRatio(relation, i, j, Fraction(c), tuple(num2), tuple(den2))


def serre_coefficient(params: ParamTower, side: str) -> float:
    """The middle coefficient 2*cos(pi*eta*hbar) of the cubic relations.

    E-side uses eta, F-side the primed scale.
    """
    if side == "E":
        return 2.0 * math.cos(math.pi * params.eta * params.hbar)
    if side == "F":
        return 2.0 * math.cos(math.pi * params.eta_prime * params.hbar)
    raise ValueError("side must be 'E' or 'F'")


def swapped_ratio_product(rel: str, i: int, j: int, cartan: CartanData,
                          c: Fraction | int, w: complex, params: ParamTower) -> complex:
    """R_ij(w) * R_ji(-w); the exchange applied twice must give 1."""
    rij = ratio(rel, i, j, cartan, c)
    rji = ratio(rel, j, i, cartan, c)
    return rij.eval(w, params) * rji.eval(-w, params)
