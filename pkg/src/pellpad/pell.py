"""Pell equations x^2 - d y^2 = +-1 and X^2 - d Y^2 = +-4."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from math import isqrt

from .bigreal import BigReal, sqrt
from .contfrac import SquareError, is_square, pqa


class Family(enum.Enum):
    UNIT = "unit"  # norm +-1
    QUAD = "quad"  # norm +-4

    @property
    def norm(self) -> int:
        return 1 if self is Family.UNIT else 4


@dataclass(frozen=True)
class EqKind:
    family: Family
    sign: int

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @property
    def rhs(self) -> int:
        return self.sign * self.family.norm

    @property
    def slug(self) -> str:
        return f"{self.family.value}-{'plus' if self.sign > 0 else 'minus'}"

    @classmethod
    def parse(cls, text: str) -> "EqKind":
        fam, _, sgn = text.partition("-")
        if sgn not in ("plus", "minus"):
            raise ValueError(f"unknown equation kind {text!r}")
        return cls(Family(fam), 1 if sgn == "plus" else -1)

    def __str__(self):
        return self.slug


ALL_KINDS = tuple(EqKind(f, s) for f in Family for s in (1, -1))


class SignUnsolvable(ValueError):
    """The negative equation has no solution for this d."""


class DomainError(ValueError):
    """The unit built from x1 is not larger than 1."""


class FactoringTimeout(RuntimeError):
    """Input too large to factor at desk scale."""


@dataclass(frozen=True)
class PellFundamental:
    d: int
    family: Family
    x1: int
    y1: int
    eps: int

    def __post_init__(self):
        if self.x1 * self.x1 - self.d * self.y1 * self.y1 != self.eps * self.family.norm:
            raise ValueError("not a solution")

    def unit(self, prec: int = 256) -> BigReal:
        return unit_value(self.x1, self.family, self.eps, prec).delta


def _check_d(d: int) -> None:
    if d < 2 or is_square(d):
        raise SquareError(f"d = {d} must be a nonsquare integer >= 2")


def _unit_fundamental(d: int) -> tuple[int, int, int]:
    for p, q in _pqa_convergents(0, 1, d):
        n = p * p - d * q * q
        if n in (1, -1):
            return p, q, n
    raise AssertionError("unreachable")


def _pqa_convergents(P0, Q0, D):
    p0, q0, p1, q1 = 1, 0, 0, 1
    for a, _, _ in pqa(P0, Q0, D):
        p0, p1 = a * p0 + p1, p0
        q0, q1 = a * q0 + q1, q0
        yield p0, q0


def fundamental(d: int, family: Family = Family.UNIT) -> PellFundamental:
    """Smallest positive solution of x^2 - d y^2 = +-1 (or +-4).

    eps is the norm sign found, so eps = -1 exactly when the negative
    equation is solvable.
    """
    _check_d(d)
    if family is Family.UNIT:
        x, y, e = _unit_fundamental(d)
        return PellFundamental(d, family, x, y, e)
    if d % 4 == 1:
        # convergents A/B of (1 + sqrt d)/2 give units (2A - B + B sqrt d)/2
        for A, B in _pqa_convergents(1, 2, d):
            G = 2 * A - B
            n = G * G - d * B * B
            if n in (4, -4):
                return PellFundamental(d, family, G, B, n // 4)
    if d % 4 == 0:
        x, y, e = _unit_fundamental(d // 4)
        return PellFundamental(d, family, 2 * x, y, e)
    x, y, e = _unit_fundamental(d)
    return PellFundamental(d, family, 2 * x, 2 * y, e)


def brute_fundamental(d: int, family: Family, y_max: int = 10 ** 4) -> PellFundamental | None:
    """Smallest solution by scanning y; an independent oracle for small d."""
    _check_d(d)
    N = family.norm
    for y in range(1, y_max + 1):
        for e in (-1, 1):
            t = d * y * y + e * N
            if t > 0 and is_square(t):
                return PellFundamental(d, family, isqrt(t), y, e)
    return None


def _step(family: Family) -> int:
    return 2 if family is Family.UNIT else 1


def sequence(x1: int, y1: int, family: Family, eps: int, k_max: int):
    """(k, x_k, y_k) for k = 1..k_max from the companion recurrences."""
    c = _step(family) * x1
    x0 = 1 if family is Family.UNIT else 2
    xa, xb, ya, yb = x0, x1, 0, y1
    for k in range(1, k_max + 1):
        yield k, xb, yb
        xa, xb = xb, c * xb - eps * xa
        ya, yb = yb, c * yb - eps * ya


def solution_x(f: PellFundamental, k: int) -> int:
    if k < 1:
        raise ValueError("k must be positive")
    return q_closed_form(f.x1, f.family, f.eps, k, check=False)


def solution_xy(f: PellFundamental, k: int) -> tuple[int, int]:
    for j, x, y in sequence(f.x1, f.y1, f.family, f.eps, k):
        if j == k:
            return x, y
    raise ValueError("k must be positive")


def stated_exponents(eps: int, sign: int, k_max: int) -> list[int]:
    """Unit exponents whose solution lands on the equation with this sign."""
    if sign == -1 and eps == 1:
        raise SignUnsolvable("negative equation has no solution")
    if eps == 1:
        return list(range(1, k_max + 1))
    start = 1 if sign == -1 else 2
    return list(range(start, k_max + 1, 2))


def stated_equation_solutions(f: PellFundamental, sign: int, k_max: int) -> list[tuple[int, int, int]]:
    """(ordinal, k, x_k) for the solutions of the stated equation with k <= k_max."""
    ks = stated_exponents(f.eps, sign, k_max)
    xs = {k: x for k, x, _ in sequence(f.x1, f.y1, f.family, f.eps, k_max)}
    return [(i + 1, k, xs[k]) for i, k in enumerate(ks)]


def stated_fundamental(d: int, kind: EqKind) -> tuple[int, int]:
    """Smallest positive solution of the stated equation itself."""
    f = fundamental(d, kind.family)
    k = stated_exponents(f.eps, kind.sign, 2)[0]
    return solution_xy(f, k)


# -- closed forms in x1 -------------------------------------------------------

def _min_x1(family: Family, sign: int) -> int:
    if family is Family.UNIT:
        return 2 if sign == 1 else 1
    return 3 if sign == 1 else 1


def q_closed_form(x1: int, family: Family, sign: int, k: int, check: bool = True) -> int:
    """x-coordinate of (x1 + sqrt(x1^2 - sign N))^k, halved as appropriate.

    For UNIT this is 1/2 (delta^k + sigma^k), for QUAD rho^k + rho'^k.
    """
    if check and x1 < _min_x1(family, sign):
        raise DomainError("unit must exceed 1")
    if k < 0:
        raise ValueError("k must be nonnegative")
    c = _step(family) * x1
    a, b = (1 if family is Family.UNIT else 2), x1
    if k == 0:
        return a
    for _ in range(k - 1):
        a, b = b, c * b - sign * a
    return b


def invert_q(target: int, family: Family, sign: int, k: int) -> int | None:
    """The x1 with q_closed_form(x1, family, sign, k) == target, if any."""
    if k < 1 or target < 1:
        raise ValueError("need k >= 1 and target >= 1")
    lo = _min_x1(family, sign)
    if k == 1:
        return target if target >= lo else None
    if q_closed_form(lo, family, sign, k) > target:
        return None
    hi = lo + 1
    while q_closed_form(hi, family, sign, k) < target:
        lo, hi = hi, 2 * hi
    # invariant: Q(lo) <= target <= Q(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if q_closed_form(mid, family, sign, k) <= target:
            lo = mid
        else:
            hi = mid
    for x in (lo, hi):
        if q_closed_form(x, family, sign, k) == target:
            return x
    return None


def recover_d(x1: int, family: Family, sign: int, max_digits: int = 60) -> list[tuple[int, int]]:
    """All (d, y1) with d y1^2 = x1^2 - sign N, d >= 2 nonsquare."""
    from sympy import factorint

    n = x1 * x1 - sign * family.norm
    if n <= 0:
        return []
    if len(str(n)) > max_digits:
        raise FactoringTimeout(f"refusing to factor a {len(str(n))}-digit number")
    ys = [1]
    for p, e in factorint(n).items():
        ys = [y * p ** j for y in ys for j in range(e // 2 + 1)]
    out = []
    for y in sorted(ys):
        d = n // (y * y)
        if d >= 2 and not is_square(d):
            out.append((d, y))
    return sorted(out)


def is_squarefree(n: int) -> bool:
    from sympy import factorint

    return all(e == 1 for e in factorint(n).values())


# -- units as reals -----------------------------------------------------------

@dataclass(frozen=True)
class UnitValue:
    x1: int
    family: Family
    eps: int
    delta: BigReal

    @property
    def key(self) -> tuple:
        return (self.family.value, self.x1, self.eps)


def unit_value(x1: int, family: Family, eps: int, prec: int = 256) -> UnitValue:
    """delta = x1 + sqrt(x1^2 - eps) (UNIT) or rho = (x1 + sqrt(x1^2 - 4 eps))/2 (QUAD)."""
    if x1 < _min_x1(family, eps):
        raise DomainError("unit must exceed 1")
    N = family.norm
    root = sqrt(BigReal.exact(x1 * x1 - eps * N, prec))
    delta = x1 + root
    if family is Family.QUAD:
        delta = delta / 2
    return UnitValue(x1, family, eps, delta)


def unit_power_root(x1: int, family: Family, eps: int) -> tuple[int, int, int]:
    """Write the unit of x1 as u^j with u primitive; returns (u_x1, u_eps, j).

    u is found among units of the same discriminant: if the unit is a j-th
    power then x1 = Q_j(u_x1) for the sign u_eps.
    """
    best = (x1, eps, 1)
    for j in range(2, 2 * x1.bit_length() + 3):
        for s in (1, -1):
            if s ** j != eps:
                continue
            u = invert_q(x1, family, s, j)
            if u is None or u < _min_x1(family, s):
                continue
            N = family.norm
            # same quadratic field and order: (u^2 - sN) * z^2 == x1^2 - eps N for integer z
            a, b = u * u - s * N, x1 * x1 - eps * N
            if b % a == 0 and is_square(b // a):
                best = (u, s, j)
    if best[2] > 1:
        u, s, j = best
        uu, ss, jj = unit_power_root(u, family, s)
        return uu, ss, j * jj
    return best
