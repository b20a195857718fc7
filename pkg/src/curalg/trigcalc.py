"""Exact calculus of trigonometric factors, boundary values and deltas.

Everything downstream (structure functions, the finite-dimensional
representation, the intertwiner catalog) evaluates through the objects
defined here:

* ``ShiftExpr`` -- an exact point  sum_k n_k*var_k + i*(q*hbar + sum_p
  m_p/eta_p) + t with rational q and integer lattice coefficients m_p.
  This is the lattice all poles, zeros and delta supports live on, so it
  is kept exact (Fractions and ints), never floated until evaluation.
* ``TrigFactor`` -- sh(pi*eta_p * arg)^(+-1), optionally tagged with a
  boundary-value prescription (+i0 / -i0) on reciprocal factors.
* ``DistExpr`` -- finite sums  scalar * prod(TrigFactor) * prod(delta)
  * (matrix coefficient), closed under sum, product and commutator.

Conventions fixed here and relied on by every verification module:

* Half-period flip: sh(x - i*pi) = -sh(x), so a factor whose argument
  carries k units of its own period lattice reduces to the unshifted
  factor times (-1)^k.  Canonicalization always performs this reduction.
* Boundary values: the tag -i0 means the limit onto the line from below
  (argument displaced by -i*epsilon), +i0 from above.
* Plemelj: 1/(x - i0) - 1/(x + i0) = 2*pi*i*delta(x); for the simple
  zero of sh(pi*eta_p*arg) this turns a matched +-i0 pair into
  (2i/eta_p) * delta(arg) times the common cofactor frozen on the
  support.  Only the delta of the canonical (pinched) zero is kept by
  default; an explicit strip window widens that to the zero lattice.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .params import ParamTower

BV_NONE = 0
BV_PLUS = 1   # +i0: limit from above
BV_MINUS = -1  # -i0: limit from below


class PoleProximityError(ArithmeticError):
    """Evaluation point too close to a pole of a reciprocal sh factor."""


class DeltaPresentError(ValueError):
    """Pointwise evaluation requested for an expression with delta atoms."""


class ReductionError(ValueError):
    """plemelj_reduce / residue precondition failed."""


# ---------------------------------------------------------------------------
# ShiftExpr
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShiftExpr:
    """var part + i*(q*hbar + sum_p lattice_p / eta_p) + t, all exact."""

    vars: tuple[tuple[str, int], ...] = ()
    q: Fraction = Fraction(0)
    lattice: tuple[tuple[int, int], ...] = ()
    t: float = 0.0

    @staticmethod
    def of_var(name: str, coeff: int = 1) -> "ShiftExpr":
        return ShiftExpr(vars=((name, coeff),))

    @staticmethod
    def hbar_units(q: Fraction | int) -> "ShiftExpr":
        """The point i*hbar*q."""
        return ShiftExpr(q=Fraction(q))

    @staticmethod
    def lattice_units(period: int, n: int = 1) -> "ShiftExpr":
        """The point i*n/eta_period."""
        return ShiftExpr(lattice=((period, n),))

    def _vdict(self) -> dict[str, int]:
        return dict(self.vars)

    def _ldict(self) -> dict[int, int]:
        return dict(self.lattice)

    def __add__(self, other: "ShiftExpr") -> "ShiftExpr":
        v = self._vdict()
        for name, c in other.vars:
            v[name] = v.get(name, 0) + c
        l = self._ldict()
        for p, n in other.lattice:
            l[p] = l.get(p, 0) + n
        return _mk_shift(v, self.q + other.q, l, self.t + other.t)

    def __neg__(self) -> "ShiftExpr":
        return _mk_shift(
            {k: -c for k, c in self.vars},
            -self.q,
            {p: -n for p, n in self.lattice},
            -self.t,
        )

    def __sub__(self, other: "ShiftExpr") -> "ShiftExpr":
        return self + (-other)

    def shifted(self, q: Fraction | int = 0, period: Optional[int] = None,
                n: int = 0, t: float = 0.0) -> "ShiftExpr":
        extra = ShiftExpr(q=Fraction(q), t=t)
        if period is not None and n:
            extra = extra + ShiftExpr.lattice_units(period, n)
        return self + extra

    def is_zero(self) -> bool:
        return not self.vars and self.q == 0 and not self.lattice and self.t == 0.0

    def var_coeff(self, name: str) -> int:
        return self._vdict().get(name, 0)

    def lattice_coeff(self, period: int) -> int:
        return self._ldict().get(period, 0)

    def without_lattice(self, period: int) -> "ShiftExpr":
        l = self._ldict()
        l.pop(period, None)
        return _mk_shift(self._vdict(), self.q, l, self.t)

    def subs(self, name: str, repl: "ShiftExpr") -> "ShiftExpr":
        c = self.var_coeff(name)
        if c == 0:
            return self
        v = self._vdict()
        del v[name]
        base = _mk_shift(v, self.q, self._ldict(), self.t)
        scaled = repl
        if c != 1:
            scaled = _scale_int(repl, c)
        return base + scaled

    def solve_for(self, name: str) -> "ShiftExpr":
        """The point where this expression vanishes, solved for ``name``.

        Requires the coefficient of ``name`` to be +-1 (all supports in
        this artifact are of that form).
        """
        c = self.var_coeff(name)
        if c not in (1, -1):
            raise ReductionError(f"cannot solve for {name}: coefficient {c}")
        rest = self.subs(name, ShiftExpr())
        return -rest if c == 1 else rest

    def imag_shift(self, params: ParamTower) -> float:
        """Imaginary offset q*hbar + sum_p n_p/eta_p (vars taken real)."""
        val = float(self.q) * params.hbar
        for p, n in self.lattice:
            val += n / params.eta_at(p)
        return val

    def eval(self, assignment: Mapping[str, complex], params: ParamTower) -> complex:
        val = complex(self.t, 0.0)
        for name, c in self.vars:
            if name not in assignment:
                raise KeyError(f"unassigned variable {name!r}")
            val += c * complex(assignment[name])
        val += 1j * self.imag_shift(params)
        return val

    def free_vars(self) -> frozenset[str]:
        return frozenset(name for name, _ in self.vars)

    def __str__(self) -> str:
        bits = []
        for name, c in self.vars:
            bits.append(name if c == 1 else f"{c}*{name}")
        if self.q:
            bits.append(f"{self.q}*ih")
        for p, n in self.lattice:
            bits.append(f"{n}*i/eta{p}")
        if self.t:
            bits.append(repr(self.t))
        return " + ".join(bits) if bits else "0"


def _mk_shift(v: Mapping[str, int], q: Fraction, l: Mapping[int, int], t: float) -> ShiftExpr:
    vs = tuple(sorted((k, c) for k, c in v.items() if c != 0))
    ls = tuple(sorted((p, n) for p, n in l.items() if n != 0))
    return ShiftExpr(vars=vs, q=q, lattice=ls, t=t + 0.0)


def _scale_int(e: ShiftExpr, c: int) -> ShiftExpr:
    return _mk_shift(
        {k: c * v for k, v in e.vars},
        c * e.q,
        {p: c * n for p, n in e.lattice},
        c * e.t,
    )


def var(name: str) -> ShiftExpr:
    return ShiftExpr.of_var(name)


# ---------------------------------------------------------------------------
# TrigFactor / DeltaAtom
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrigFactor:
    """sh(pi * eta_period * arg)^exponent with a boundary-value tag."""

    period: int
    arg: ShiftExpr
    exponent: int = 1
    bv: int = BV_NONE

    def __post_init__(self) -> None:
        if self.exponent not in (1, -1):
            raise ValueError("exponent must be +-1")
        if self.bv != BV_NONE and self.exponent != -1:
            raise ValueError("boundary-value tags only make sense on 1/sh factors")

    def canonical(self) -> tuple[int, "TrigFactor"]:
        """Strip own-period lattice units; returns (sign, reduced factor)."""
        k = self.arg.lattice_coeff(self.period)
        if k == 0:
            return 1, self
        sign = -1 if k % 2 else 1
        return sign, TrigFactor(self.period, self.arg.without_lattice(self.period),
                                self.exponent, self.bv)

    def untagged(self) -> "TrigFactor":
        return TrigFactor(self.period, self.arg, self.exponent, BV_NONE)

    def subs(self, name: str, repl: ShiftExpr) -> "TrigFactor":
        return TrigFactor(self.period, self.arg.subs(name, repl), self.exponent, self.bv)

    def eval(self, assignment: Mapping[str, complex], params: ParamTower,
             eps_pole: float = 1e-6) -> complex:
        x = math.pi * params.eta_at(self.period) * self.arg.eval(assignment, params)
        s = cmath.sinh(x)
        if self.exponent == 1:
            return s
        if abs(s) < eps_pole:
            raise PoleProximityError(f"sh({x}) = {s} too close to zero")
        return 1.0 / s


@dataclass(frozen=True)
class DeltaAtom:
    """delta(arg); arg must involve at least one formal variable."""

    arg: ShiftExpr

    def __post_init__(self) -> None:
        if not self.arg.vars:
            raise ValueError("delta atom needs at least one variable")

    def canonical(self) -> "DeltaAtom":
        name, c = self.arg.vars[0]
        if c < 0:
            return DeltaAtom(-self.arg)
        return self

    def subs(self, name: str, repl: ShiftExpr) -> "DeltaAtom":
        return DeltaAtom(self.arg.subs(name, repl))


# ---------------------------------------------------------------------------
# Terms and DistExpr
# ---------------------------------------------------------------------------


def _mat_tuple(mat: Optional[np.ndarray]) -> Optional[np.ndarray]:
    if mat is None:
        return None
    arr = np.asarray(mat, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Term:
    scalar: complex
    factors: tuple[TrigFactor, ...] = ()
    deltas: tuple[DeltaAtom, ...] = ()
    mat: Optional[np.ndarray] = None

    def signature(self) -> tuple:
        return (self.factors, self.deltas)

    def free_vars(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for f in self.factors:
            out |= f.arg.free_vars()
        for d in self.deltas:
            out |= d.arg.free_vars()
        return out


def _factor_sort_key(f: TrigFactor):
    return (f.period, f.exponent, f.bv, str(f.arg))


def _delta_sort_key(d: DeltaAtom):
    return str(d.arg)


def _canonical_term(scalar: complex, factors: Iterable[TrigFactor],
                    deltas: Iterable[DeltaAtom], mat: Optional[np.ndarray]) -> Optional[Term]:
    """Half-period reduction, delta resolution, deterministic ordering."""
    sc = complex(scalar)
    fs: list[TrigFactor] = []
    for f in factors:
        sign, g = f.canonical()
        sc *= sign
        fs.append(g)

    # Triangular delta resolution: repeatedly solve the delta whose
    # alphabetically-smallest variable is globally smallest, pin that
    # variable and substitute everywhere else.
    ds = [d.canonical() for d in deltas]
    pins: dict[str, ShiftExpr] = {}
    pending = sorted(ds, key=_delta_sort_key)
    resolved: list[tuple[str, ShiftExpr]] = []
    while pending:
        pending.sort(key=_delta_sort_key)
        d = pending.pop(0)
        names = sorted(d.arg.free_vars())
        if not names:
            if not d.arg.is_zero():
                return None  # delta of a nonzero constant: term vanishes
            continue
        target = None
        for nm in names:
            if d.arg.var_coeff(nm) in (1, -1):
                target = nm
                break
        if target is None:
            resolved.append(("", d.arg))  # unsolvable; keep verbatim
            continue
        sol = d.arg.solve_for(target)
        resolved.append((target, sol))
        pins[target] = sol
        pending = [p.subs(target, sol) for p in pending]
        fs = [f.subs(target, sol) for f in fs]
        resolved = [
            (nm, s.subs(target, sol) if nm != target else s) for nm, s in resolved
        ]
    # Back-substitute pins into each other until stable.
    changed = True
    guard = 0
    while changed and guard < 32:
        changed = False
        guard += 1
        out = []
        for nm, s in resolved:
            s2 = s
            for other, sol in resolved:
                if other and other != nm and s2.var_coeff(other) != 0:
                    s2 = s2.subs(other, sol)
                    changed = True
            out.append((nm, s2))
        resolved = out

    new_deltas = []
    for nm, s in resolved:
        arg = ShiftExpr.of_var(nm) - s if nm else s
        new_deltas.append(DeltaAtom(arg).canonical())

    fs2: list[TrigFactor] = []
    sc2 = sc
    for f in fs:
        sign, g = f.canonical()
        sc2 *= sign
        fs2.append(g)
    # sh(x)^{+1} * sh(x)^{-1} == 1 exactly (removable at the common zero);
    # cancelling here keeps delta-pinned cofactors evaluable on support.
    fs3: list[TrigFactor] = []
    for f in fs2:
        if f.bv == BV_NONE:
            partner = next((g for g in fs3 if g.bv == BV_NONE and g.period == f.period
                            and g.arg == f.arg and g.exponent == -f.exponent), None)
            if partner is not None:
                fs3.remove(partner)
                continue
        fs3.append(f)
    return Term(
        scalar=sc2,
        factors=tuple(sorted(fs3, key=_factor_sort_key)),
        deltas=tuple(sorted(new_deltas, key=_delta_sort_key)),
        mat=_mat_tuple(mat),
    )


class DistExpr:
    """Finite sum of trig-factor/delta/matrix terms, canonical on build."""

    __slots__ = ("terms",)

    def __init__(self, terms: Sequence[Term] = (), *, _canonical: bool = False):
        if _canonical:
            self.terms: tuple[Term, ...] = tuple(terms)
            return
        buckets: dict[tuple, Term] = {}
        order: list[tuple] = []
        for t in terms:
            ct = _canonical_term(t.scalar, t.factors, t.deltas, t.mat)
            if ct is None or ct.scalar == 0:
                continue
            if ct.mat is not None and not ct.mat.any():
                continue
            key = ct.signature()
            if key in buckets:
                old = buckets[key]
                merged = _merge_terms(old, ct)
                if merged is None:
                    del buckets[key]
                    order.remove(key)
                else:
                    buckets[key] = merged
            else:
                buckets[key] = ct
                order.append(key)
        self.terms = tuple(buckets[k] for k in order)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero() -> "DistExpr":
        return DistExpr(())

    @staticmethod
    def scalar(value: complex) -> "DistExpr":
        return DistExpr((Term(scalar=value),))

    @staticmethod
    def from_factors(scalar: complex, factors: Sequence[TrigFactor],
                     deltas: Sequence[DeltaAtom] = (), mat=None) -> "DistExpr":
        return DistExpr((Term(scalar, tuple(factors), tuple(deltas), _mat_tuple(mat)),))

    @staticmethod
    def matrix(mat: np.ndarray) -> "DistExpr":
        return DistExpr((Term(1.0, (), (), _mat_tuple(mat)),))

    # -- algebra -----------------------------------------------------------

    def __add__(self, other: "DistExpr") -> "DistExpr":
        return DistExpr(self.terms + other.terms)

    def __sub__(self, other: "DistExpr") -> "DistExpr":
        return self + other.scaled(-1.0)

    def scaled(self, c: complex) -> "DistExpr":
        if c == 0:
            return DistExpr.zero()
        return DistExpr(
            tuple(Term(t.scalar * c, t.factors, t.deltas, t.mat) for t in self.terms),
            _canonical=True,
        )

    def __mul__(self, other: "DistExpr") -> "DistExpr":
        out: list[Term] = []
        for a in self.terms:
            for b in other.terms:
                mat = _mat_mul(a.mat, b.mat)
                out.append(Term(a.scalar * b.scalar, a.factors + b.factors,
                                a.deltas + b.deltas, mat))
        return DistExpr(out)

    def commutator(self, other: "DistExpr") -> "DistExpr":
        return self * other - other * self

    def subs(self, name: str, repl: ShiftExpr) -> "DistExpr":
        return DistExpr(tuple(
            Term(t.scalar,
                 tuple(f.subs(name, repl) for f in t.factors),
                 tuple(d.subs(name, repl) for d in t.deltas),
                 t.mat)
            for t in self.terms
        ))

    def tagged(self, name: str, bv: int) -> "DistExpr":
        """Attach a boundary-value tag to every 1/sh factor involving ``name``."""
        out = []
        for t in self.terms:
            fs = tuple(
                TrigFactor(f.period, f.arg, f.exponent, bv)
                if f.exponent == -1 and f.arg.var_coeff(name) != 0 else f
                for f in t.factors
            )
            out.append(Term(t.scalar, fs, t.deltas, t.mat))
        return DistExpr(out)

    def untagged(self) -> "DistExpr":
        return DistExpr(tuple(
            Term(t.scalar, tuple(f.untagged() for f in t.factors), t.deltas, t.mat)
            for t in self.terms
        ))

    def is_zero(self) -> bool:
        return not self.terms

    def free_vars(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for t in self.terms:
            out |= t.free_vars()
        return out

    def has_deltas(self) -> bool:
        return any(t.deltas for t in self.terms)

    def delta_free_part(self) -> "DistExpr":
        return DistExpr(tuple(t for t in self.terms if not t.deltas), _canonical=True)

    def delta_groups(self) -> dict[tuple[DeltaAtom, ...], "DistExpr"]:
        """Group terms by their (canonical) delta support; '' key = delta-free."""
        groups: dict[tuple[DeltaAtom, ...], list[Term]] = {}
        for t in self.terms:
            groups.setdefault(t.deltas, []).append(
                Term(t.scalar, t.factors, (), t.mat)
            )
        return {k: DistExpr(tuple(v), _canonical=True) for k, v in groups.items()}

    # -- evaluation --------------------------------------------------------

    def eval(self, assignment: Mapping[str, complex], params: ParamTower,
             eps_pole: float = 1e-6):
        """Numeric value; complex scalar, or complex matrix if any term has one."""
        shape = None
        for t in self.terms:
            if t.deltas:
                raise DeltaPresentError("use residue/delta APIs for delta terms")
            if t.mat is not None:
                shape = t.mat.shape
        acc_mat = np.zeros(shape, dtype=complex) if shape else None
        acc_sc = 0.0 + 0.0j
        for t in self.terms:
            val = t.scalar
            for f in t.factors:
                val *= f.eval(assignment, params, eps_pole)
            if t.mat is not None:
                acc_mat += val * t.mat
            elif acc_mat is not None:
                acc_mat += val * np.eye(shape[0], dtype=complex)
            else:
                acc_sc += val
        return acc_mat if acc_mat is not None else acc_sc

    # -- reductions --------------------------------------------------------

    def plemelj_reduce(self, name: str, params: ParamTower,
                       strip: Optional[tuple[float, float]] = None) -> "DistExpr":
        """Turn matched +-i0 pairs of 1/sh factors in ``name`` into deltas.

        With ``strip=None`` only the canonical pinched zero (lattice k=0)
        is kept; with a numeric strip (lo, hi) every zero of the
        reciprocal factor whose support height falls in [lo, hi) is
        kept.  Terms without tags pass through.
        """
        tagged: dict[tuple, dict[int, Term]] = {}
        passthrough: list[Term] = []
        order: list[tuple] = []
        for t in self.terms:
            hits = [
                (i, f) for i, f in enumerate(t.factors)
                if f.bv != BV_NONE and f.exponent == -1 and f.arg.var_coeff(name) != 0
            ]
            if len(hits) != 1:
                passthrough.append(t)
                continue
            i, f = hits[0]
            rest = t.factors[:i] + t.factors[i + 1:]
            key = (rest, t.deltas, f.untagged())
            slot = tagged.setdefault(key, {})
            if key not in order:
                order.append(key)
            if f.bv in slot:
                raise ReductionError("duplicate boundary-value tag in pair search")
            slot[f.bv] = t

        out = list(passthrough)
        reduced_any = False
        for key in order:
            slot = tagged[key]
            if set(slot) != {BV_PLUS, BV_MINUS}:
                out.extend(slot.values())
                continue
            tm, tp = slot[BV_MINUS], slot[BV_PLUS]
            if not _mats_equal(tm.mat, tp.mat):
                raise ReductionError("boundary-value pair differs in matrix coefficient")
            if abs(tm.scalar + tp.scalar) > 1e-14 * max(1.0, abs(tm.scalar)):
                raise ReductionError("boundary-value pair scalars are not opposite")
            reduced_any = True
            rest, deltas, bare = key
            eta_p_period = bare.period
            ks: Iterable[int]
            if strip is None:
                ks = (0,)
            else:
                lo, hi = strip
                base = bare.arg.solve_for(name).imag_shift(params)
                inv = 1.0 / params.eta_at(eta_p_period)
                kmin = math.ceil((lo - base) / inv - 1e-12)
                kmax = math.floor((hi - base) / inv - 1e-12)
                ks = range(kmin, kmax + 1)
            for k in ks:
                arg_k = bare.arg - ShiftExpr.lattice_units(eta_p_period, k)
                support = arg_k.solve_for(name)
                sign = -1 if k % 2 else 1
                coeff = tm.scalar * 2j * sign / params.eta_at(eta_p_period)
                cof = tuple(f.subs(name, support) for f in rest)
                ds = deltas + (DeltaAtom(arg_k),)
                out.append(Term(coeff, cof, ds, tm.mat))
        if not reduced_any and tagged:
            raise ReductionError("no matching boundary-value pair")
        return DistExpr(out)

    def residue(self, name: str, at: ShiftExpr, params: ParamTower) -> "DistExpr":
        """Residue in ``name`` at the simple pole ``name = at``."""
        out: list[Term] = []
        n_poles_seen = 0
        for t in self.terms:
            for d in t.deltas:
                if d.arg.var_coeff(name) != 0:
                    raise ReductionError("residue through a delta atom is undefined")
            vanish_m = []
            vanish_p = 0
            rest: list[TrigFactor] = []
            for f in t.factors:
                if f.arg.var_coeff(name) != 0 and f.arg.subs(name, at).is_zero():
                    if f.exponent == -1:
                        vanish_m.append(f)
                    else:
                        vanish_p += 1
                else:
                    rest.append(f)
            order = len(vanish_m) - vanish_p
            if len(vanish_m) >= 2:
                raise ReductionError("higher-order pole (multiple vanishing 1/sh factors)")
            if order <= 0:
                continue
            n_poles_seen += 1
            f = vanish_m[0]
            c_var = f.arg.var_coeff(name)
            scale = 1.0 / (math.pi * params.eta_at(f.period) * c_var)
            cof = tuple(g.subs(name, at) for g in rest)
            out.append(Term(t.scalar * scale, cof, t.deltas, t.mat))
        if n_poles_seen == 0:
            raise ReductionError(f"{name} = {at} is not a pole of the expression")
        return DistExpr(out)

    # -- serialization -----------------------------------------------------

    def to_json_dict(self) -> dict:
        def shift_d(e: ShiftExpr) -> dict:
            return {
                "vars": [[n, c] for n, c in e.vars],
                "q": [e.q.numerator, e.q.denominator],
                "lattice": [[p, n] for p, n in e.lattice],
                "t": e.t,
            }

        terms = []
        for t in self.terms:
            terms.append({
                "scalar": [t.scalar.real, t.scalar.imag],
                "factors": [
                    {"period": f.period, "arg": shift_d(f.arg),
                     "exp": f.exponent, "bv": f.bv}
                    for f in t.factors
                ],
                "deltas": [shift_d(d.arg) for d in t.deltas],
                "mat": None if t.mat is None else
                       [[[z.real, z.imag] for z in row] for row in t.mat.tolist()],
            })
        return {"terms": terms}

    @staticmethod
    def from_json_dict(d: dict) -> "DistExpr":
        def shift_u(e: dict) -> ShiftExpr:
            return _mk_shift(
                {n: c for n, c in e["vars"]},
                Fraction(e["q"][0], e["q"][1]),
                {p: n for p, n in e["lattice"]},
                e["t"],
            )

        terms = []
        for td in d["terms"]:
            mat = None
            if td["mat"] is not None:
                mat = np.array([[complex(re, im) for re, im in row] for row in td["mat"]])
            terms.append(Term(
                complex(*td["scalar"]),
                tuple(TrigFactor(f["period"], shift_u(f["arg"]), f["exp"], f["bv"])
                      for f in td["factors"]),
                tuple(DeltaAtom(shift_u(a)) for a in td["deltas"]),
                mat,
            ))
        return DistExpr(terms)

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    def __repr__(self) -> str:
        return f"DistExpr({len(self.terms)} terms)"


def _merge_terms(a: Term, b: Term) -> Optional[Term]:
    if a.mat is None and b.mat is None:
        s = a.scalar + b.scalar
        if abs(s) < 1e-300:
            return None
        return Term(s, a.factors, a.deltas, None)
    ma = a.mat if a.mat is not None else np.eye(b.mat.shape[0], dtype=complex)
    mb = b.mat if b.mat is not None else np.eye(a.mat.shape[0], dtype=complex)
    m = a.scalar * ma + b.scalar * mb
    if np.max(np.abs(m)) < 1e-300:
        return None
    return Term(1.0 + 0j, a.factors, a.deltas, _mat_tuple(m))


def _mat_mul(a: Optional[np.ndarray], b: Optional[np.ndarray]) -> Optional[np.ndarray]:
    if a is None:
        return b
    if b is None:
        return a
    return a @ b


def _mats_equal(a: Optional[np.ndarray], b: Optional[np.ndarray]) -> bool:
    if a is None and b is None:
        return True
    if a is None or b is None:
        return False
    return bool(np.array_equal(a, b))


# ---------------------------------------------------------------------------
# Numeric comparison
# ---------------------------------------------------------------------------


def eval_extended(expr: DistExpr, assignment: Mapping[str, complex],
                  params: ParamTower, dps: int = 40):
    """Optional extended-precision evaluation pass (mpmath backend).

    Used to validate double-precision results near strip edges, where
    the sh factors are badly conditioned; matrix terms are accumulated
    entrywise at the requested decimal precision and returned as a
    complex (array) rounded back to double.
    """
    import mpmath as mp

    with mp.workdps(dps):
        shape = None
        for t in expr.terms:
            if t.deltas:
                raise DeltaPresentError("use residue/delta APIs for delta terms")
            if t.mat is not None:
                shape = t.mat.shape
        acc_mat = [[mp.mpc(0)] * shape[1] for _ in range(shape[0])] if shape else None
        acc_sc = mp.mpc(0)
        for t in expr.terms:
            val = mp.mpc(t.scalar)
            for f in t.factors:
                arg = mp.mpc(0)
                for name, c in f.arg.vars:
                    arg += c * mp.mpc(assignment[name])
                arg += mp.mpc(0, 1) * (mp.mpf(float(f.arg.q)) * params.hbar
                                       + sum(n / params.eta_at(p) for p, n in f.arg.lattice))
                arg += f.arg.t
                s = mp.sinh(mp.pi * params.eta_at(f.period) * arg)
                val = val * s if f.exponent == 1 else val / s
            if t.mat is not None:
                for a in range(shape[0]):
                    for b in range(shape[1]):
                        acc_mat[a][b] += val * t.mat[a, b]
            elif acc_mat is not None:
                for a in range(shape[0]):
                    acc_mat[a][a] += val
            else:
                acc_sc += val
        if acc_mat is not None:
            return np.array([[complex(z) for z in row] for row in acc_mat])
        return complex(acc_sc)


def sample_assignment(names: Sequence[str], rng: np.random.Generator,
                      imag_window: tuple[float, float]) -> dict[str, complex]:
    lo, hi = imag_window
    return {
        n: complex(rng.uniform(-2.0, 2.0), rng.uniform(lo, hi)) for n in sorted(names)
    }


def _value_scale(v) -> float:
    if isinstance(v, np.ndarray):
        return float(np.max(np.abs(v)))
    return abs(v)


def _value_diff(a, b) -> float:
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        if not isinstance(a, np.ndarray):
            a = a * np.eye(b.shape[0], dtype=complex)
        if not isinstance(b, np.ndarray):
            b = b * np.eye(a.shape[0], dtype=complex)
        return float(np.max(np.abs(a - b)))
    return abs(a - b)


def compare_numeric(a: DistExpr, b: DistExpr, params: ParamTower,
                    samples: int, rng: np.random.Generator,
                    imag_window: Optional[tuple[float, float]] = None,
                    eps_pole: float = 1e-6, max_retries: int = 200) -> dict:
    """Sampled comparison of two delta-free expressions (relative residual)."""
    names = sorted(a.free_vars() | b.free_vars())
    if imag_window is None:
        w = 0.35 / params.eta
        imag_window = (-w, w)
    max_res = 0.0
    done = 0
    tries = 0
    while done < samples and tries < samples + max_retries:
        tries += 1
        pt = sample_assignment(names, rng, imag_window)
        try:
            va = a.eval(pt, params, eps_pole)
            vb = b.eval(pt, params, eps_pole)
        except PoleProximityError:
            continue
        scale = max(1.0, _value_scale(va), _value_scale(vb))
        max_res = max(max_res, _value_diff(va, vb) / scale)
        done += 1
    return {
        "samples": done,
        "max_residual": max_res,
        "pass": done > 0,
    }


def equal_numeric(a: DistExpr, b: DistExpr, params: ParamTower,
                  samples: int = 50, tol: float = 1e-9,
                  rng: Optional[np.random.Generator] = None,
                  imag_window: Optional[tuple[float, float]] = None) -> dict:
    """Delta-aware structural + sampled equality report.

    Delta-free parts are compared pointwise at generic sampled points;
    delta parts are grouped by canonical support and their coefficient
    expressions compared recursively.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    ga = a.delta_groups()
    gb = b.delta_groups()
    pieces = []
    max_res = 0.0
    for key in sorted(set(ga) | set(gb), key=lambda k: [str(d.arg) for d in k]):
        ca = ga.get(key, DistExpr.zero())
        cb = gb.get(key, DistExpr.zero())
        rep = compare_numeric(ca, cb, params, samples, rng, imag_window)
        max_res = max(max_res, rep["max_residual"])
        pieces.append({
            "support": [str(d.arg) for d in key],
            "max_residual": rep["max_residual"],
            "samples": rep["samples"],
        })
    ok = max_res < tol and all(p["samples"] > 0 or not pieces for p in pieces)
    return {
        "max_residual": max_res,
        "tol": tol,
        "pass": bool(ok),
        "groups": pieces,
    }
