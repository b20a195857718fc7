"""Deformation-parameter tower shared by the whole family of algebras.

The member algebras are indexed by n with deformation scales eta^(n)
obeying the exact telescoping recursion

    1/eta^(n+1) - 1/eta^(n) = hbar * c_n,        eta^(0) = eta,

so eta^(1) is the primed scale attached to level c when c_0 = c.  The
recursion is kept in inverse form (the inverses are the quantities that
add) and only materialized levels may be queried.

The second derived scale eta'' (used by the shift relating the two half
currents) is never pinned down by the defining relations away from c = 0;
this module fixes 1/eta'' = 1/eta + hbar*c/2, the midpoint of 1/eta and
1/eta', which collapses to eta at c = 0 where every consistent choice
must agree.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction


class ParameterRangeError(ValueError):
    """The recursion left the admissible (positive) parameter range."""


class GenericityWarning(UserWarning):
    """hbar close to a small rational multiple of 1/eta."""


def check_genericity(hbar: float, eta: float, max_den: int = 12, tol: float = 1e-9) -> bool:
    """Warn when hbar*eta is numerically a rational p/q with q <= max_den.

    Returns True when the pair looks generic.  Non-generic pairs make the
    sh-ratio structure functions degenerate (zeros colliding with poles),
    so they are flagged but not rejected.
    """
    x = hbar * eta
    frac = Fraction(x).limit_denominator(max_den)
    if abs(x - float(frac)) < tol:
        warnings.warn(
            f"hbar*eta = {x!r} is within {tol} of {frac}; "
            "deformation parameters are not generic",
            GenericityWarning,
            stacklevel=2,
        )
        return False
    return True


@dataclass(frozen=True)
class ParamTower:
    """(hbar, eta^(0), c_0, c_1, ...) with cached eta^(n) values.

    ``levels`` holds c_n for n = 0, 1, ...; only this many steps of the
    tower can be materialized.  Immutable; safe to share.
    """

    hbar: float
    eta: float
    levels: tuple[float, ...] = ()
    _inv_etas: tuple[float, ...] = field(init=False, repr=False, default=())

    def __post_init__(self) -> None:
        if self.hbar <= 0 or self.eta <= 0:
            raise ParameterRangeError("hbar and eta must be positive")
        inv = [1.0 / self.eta]
        for n, c in enumerate(self.levels):
            nxt = inv[-1] + self.hbar * c
            if nxt <= 0:
                raise ParameterRangeError(
                    f"1/eta^({n + 1}) = {nxt} <= 0; tower leaves parameter range"
                )
            inv.append(nxt)
        object.__setattr__(self, "_inv_etas", tuple(inv))
        check_genericity(self.hbar, self.eta)

    @property
    def eta_prime(self) -> float:
        return self.eta_at(1)

    def max_level(self) -> int:
        return len(self.levels)

    def c_at(self, n: int) -> float:
        if not 0 <= n < len(self.levels):
            raise ParameterRangeError(f"c_{n} not materialized (levels={self.levels})")
        return self.levels[n]

    def inv_eta_at(self, n: int) -> float:
        if not 0 <= n < len(self._inv_etas):
            raise ParameterRangeError(
                f"eta^({n}) not materialized; extend levels (have {len(self.levels)})"
            )
        return self._inv_etas[n]

    def eta_at(self, n: int) -> float:
        """eta^(n) from the exact telescoped recursion; idempotent."""
        return 1.0 / self.inv_eta_at(n)

    def with_levels(self, levels: tuple[float, ...]) -> "ParamTower":
        return ParamTower(self.hbar, self.eta, tuple(levels))


def eta_double_prime(tower: ParamTower, c: float) -> float:
    """The half-current shift scale: 1/eta'' = 1/eta + hbar*c/2.

    At c = 0 this is forced (H^- must be the plain 1/eta translate of
    H^+), and that is the only case exercised by verification; the c != 0
    value is a recorded convention, symmetric between eta and eta'.
    """
    inv = 1.0 / tower.eta + tower.hbar * c / 2.0
    if inv <= 0:
        raise ParameterRangeError("1/eta'' <= 0")
    return 1.0 / inv
