"""Continued fractions of certified reals and of quadratic surds."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Callable

from .bigreal import AmbiguousPrecision, BigReal, PrecisionPolicy, run_with_precision


class InsufficientExpansion(ValueError):
    """The expansion does not reach far enough for the requested question."""


class SquareError(ValueError):
    """A perfect square was passed where a nonsquare is required."""


@dataclass(frozen=True)
class CFExpansion:
    source: str
    quotients: tuple[int, ...]
    convergents: tuple[tuple[int, int], ...]
    certified_upto: int
    period_start: int | None = None
    period: tuple[int, ...] = field(default=())

    @property
    def denominators(self) -> tuple[int, ...]:
        return tuple(q for _, q in self.convergents)

    def first_index_above(self, bound) -> int | None:
        """Smallest i with q_i > bound, or None."""
        for i, (_, q) in enumerate(self.convergents):
            if q > bound:
                return i
        return None


def convergents(quotients) -> list[tuple[int, int]]:
    out = []
    p0, q0, p1, q1 = 1, 0, 0, 1  # (p_{-1}, q_{-1}), (p_{-2}, q_{-2})
    for a in quotients:
        p0, p1 = a * p0 + p1, p0
        q0, q1 = a * q0 + q1, q0
        out.append((p0, q0))
    return out


def rational_cf(x: Fraction) -> list[int]:
    """Finite expansion of a rational number (Euclid)."""
    p, q = x.numerator, x.denominator
    out = []
    while q:
        a, r = divmod(p, q)
        out.append(a)
        p, q = q, r
    return out


def certified_quotients(x: BigReal) -> list[int]:
    """Partial quotients shared by every real in the ball.

    The common prefix of the expansions of both endpoints is shared by all
    reals in between; the last common entry is dropped because an endpoint
    may sit exactly on the boundary of the corresponding cylinder.
    """
    lo, hi = rational_cf(x.lower()), rational_cf(x.upper())
    n = 0
    while n < min(len(lo), len(hi)) and lo[n] == hi[n]:
        n += 1
    return lo[: max(n - 1, 0)]


def expand(x: Callable[[int], BigReal], n_terms: int, source: str = "tau",
           policy: PrecisionPolicy | None = None, start: int = 256) -> CFExpansion:
    """First n_terms partial quotients of the real produced by x(prec)."""
    if n_terms < 1:
        raise ValueError("n_terms must be positive")

    def attempt(prec):
        qs = certified_quotients(x(prec))
        if len(qs) < n_terms:
            raise AmbiguousPrecision(f"only {len(qs)} quotients certified at {prec} bits")
        qs = qs[:n_terms]
        return CFExpansion(source, tuple(qs), tuple(convergents(qs)), n_terms - 1)

    return run_with_precision(attempt, policy, start=start)


def expand_until(x: Callable[[int], BigReal], bound, source: str = "tau",
                 policy: PrecisionPolicy | None = None, extra: int = 0,
                 start: int = 256) -> CFExpansion:
    """Expansion long enough that some q_i exceeds bound, plus extra terms."""

    def attempt(prec):
        qs = certified_quotients(x(prec))
        cv = convergents(qs)
        hit = next((i for i, (_, q) in enumerate(cv) if q > bound), None)
        if hit is None or hit + extra >= len(qs):
            raise AmbiguousPrecision(f"expansion at {prec} bits stops before q > bound")
        n = hit + extra + 1
        return CFExpansion(source, tuple(qs[:n]), tuple(cv[:n]), n - 1)

    return run_with_precision(attempt, policy, start=start)


@dataclass(frozen=True)
class LegendreBound:
    N: int
    aM: int
    argmax: int
    qN: int


def legendre_bound(cf: CFExpansion, M) -> LegendreBound:
    """Smallest N with q_N > M and the largest quotient a_0..a_N.

    Any rational r/s with 0 < s < M then satisfies |tau - r/s| > 1/((aM + 2) s^2).
    """
    M = Fraction(M) if not isinstance(M, int) else M
    N = cf.first_index_above(M)
    if N is None:
        raise InsufficientExpansion("no convergent denominator exceeds M")
    head = cf.quotients[: N + 1]
    aM = max(head)
    return LegendreBound(N, aM, head.index(aM), cf.convergents[N][1])


# -- quadratic surds --------------------------------------------------------

def is_square(n: int) -> bool:
    return n >= 0 and isqrt(n) ** 2 == n


def pqa(P0: int, Q0: int, D: int):
    """Expansion of (P0 + sqrt(D))/Q0, yielding (a_i, P_i, Q_i) forever.

    Requires D > 0 nonsquare, Q0 > 0, Q0 | D - P0^2 and 0 <= P0 <= sqrt(D),
    which keeps every Q_i positive.
    """
    if is_square(D):
        raise SquareError(f"{D} is a perfect square")
    if Q0 <= 0 or (D - P0 * P0) % Q0 or not 0 <= P0 * P0 <= D:
        raise ValueError("need Q0 > 0, Q0 | D - P0^2 and 0 <= P0 <= sqrt(D)")
    r = isqrt(D)
    P, Q = P0, Q0
    while True:
        a = (P + r) // Q
        yield a, P, Q
        P = a * Q - P
        Q = (D - P * P) // Q


def sqrt_cf(d: int) -> CFExpansion:
    """Periodic expansion [a0; (a1, ..., a_L)] of sqrt(d)."""
    if d < 2 or is_square(d):
        raise SquareError(f"{d} is not a nonsquare integer >= 2")
    qs = []
    a0 = isqrt(d)
    for i, (a, _, Q) in enumerate(pqa(0, 1, d)):
        qs.append(a)
        if i > 0 and a == 2 * a0:
            break
    return CFExpansion(f"sqrt({d})", tuple(qs), tuple(convergents(qs)), len(qs) - 1,
                       period_start=1, period=tuple(qs[1:]))
