"""Padovan numbers, the Binet-form error term, and sums of two Padovan numbers."""

from __future__ import annotations

import bisect
import threading
from dataclasses import dataclass

from .bigreal import (
    AmbiguousPrecision,
    BigReal,
    Ordering,
    PrecisionPolicy,
    certified_compare,
    constants,
    run_with_precision,
)

_lock = threading.Lock()
_values = [0, 1, 1]


def _extend(n: int) -> None:
    with _lock:
        v = _values
        while len(v) <= n:
            v.append(v[-2] + v[-3])


def padovan(n: int) -> int:
    if n < 0:
        raise ValueError("index must be nonnegative")
    if n >= len(_values):
        _extend(n)
    return _values[n]


def padovan_table(n_max: int) -> tuple[int, ...]:
    """P_0 .. P_{n_max} as an immutable tuple."""
    padovan(n_max)
    return tuple(_values[: n_max + 1])


def canonical_index(n: int) -> int:
    """Indices 1 and 2 are reported as 3, index 4 as 5 (equal values)."""
    if n in (1, 2):
        return 3
    if n == 4:
        return 5
    return n


# -- Binet form ---------------------------------------------------------------

@dataclass(frozen=True)
class BinetError:
    """e_n = P_n - a alpha^(n - shift) together with the certified verdict on
    |e_n| < alpha^(-(n - shift)/2)."""
    n: int
    e_n: BigReal
    bound: BigReal
    holds: bool
    shift: int = 0


def _decide(small: BigReal, big: BigReal, what: str) -> bool:
    order = certified_compare(small, big)
    if order is Ordering.UNKNOWN:
        raise AmbiguousPrecision(what)
    return order is Ordering.LESS


def binet_residual(n: int, prec: int = 256, shift: int = 0,
                   policy: PrecisionPolicy | None = None) -> BinetError:
    """Ball for P_n - a alpha^(n-shift) and whether it beats alpha^(-(n-shift)/2).

    shift=0 is the textbook statement; with P_0 = 0, P_1 = P_2 = 1 the true
    dominant term is a alpha^(n-1), so only shift=1 holds for all n >= 1.
    """
    if n < 1:
        raise ValueError("n must be positive")
    j = n - shift

    def attempt(p):
        c = constants(p)
        e_n = padovan(n) - c.a * c.alpha ** j
        bound = c.abs_beta ** j  # alpha^(-j/2) = |beta|^j
        holds = _decide(e_n.abs_ball(), bound, f"Binet bound undecided at n={n}")
        return BinetError(n, e_n, bound, holds, shift)

    return run_with_precision(attempt, policy, start=prec)


def growth_bounds_hold(n: int, prec: int = 256, low: int = 2, high: int = 1,
                       policy: PrecisionPolicy | None = None) -> bool:
    """Certified truth value of alpha^(n-low) <= P_n <= alpha^(n-high).

    The defaults are the commonly quoted (low, high) = (2, 1); the lower half
    of that fails for n >= 5, while (3, 2) holds for every n >= 5.
    """
    if n < 4:
        raise ValueError("growth bounds are stated for n >= 4")

    def attempt(p):
        alpha = constants(p).alpha
        v = BigReal.exact(padovan(n), p)
        lo_ok = not _decide(v, alpha ** (n - low), f"lower growth bound undecided at n={n}")
        hi_ok = _decide(v, alpha ** (n - high), f"upper growth bound undecided at n={n}")
        return lo_ok and hi_ok

    return run_with_precision(attempt, policy, start=prec)


# -- sums of two Padovan numbers --------------------------------------------

def _value_index(n_max: int) -> dict[int, int]:
    idx: dict[int, int] = {}
    for i, v in enumerate(padovan_table(n_max)):
        idx[v] = max(idx.get(v, 0), canonical_index(i))
    return idx


def representations(x: int, n_max: int) -> list[tuple[int, int]]:
    """All canonical (n, m), n >= m, n <= n_max, with P_n + P_m = x."""
    if x < 0:
        raise ValueError("x must be nonnegative")
    top = max(n_max, 5)
    table = padovan_table(top)
    index = _value_index(top)
    out = set()
    for m, pm in enumerate(table):
        if 2 * pm > x:
            break
        n = index.get(x - pm)
        if n is None:
            continue
        mm = canonical_index(m)
        if mm <= n <= n_max:
            out.add((n, mm))
    return sorted(out, reverse=True)


class PadovanSums:
    """Fast membership test for x = P_n + P_m with canonical n <= n_max.

    The larger summand lies in [x/2, x], so only a couple of indices are
    tried, each with one dictionary lookup for the complement.
    """

    def __init__(self, n_max: int):
        self.n_max = n_max
        self.values = padovan_table(n_max)
        self.index = _value_index(n_max)
        self.top = 2 * self.values[n_max]

    def contains(self, x: int) -> bool:
        if x < 0 or x > self.top:
            return False
        vals = self.values
        hi = min(bisect.bisect_right(vals, x) - 1, self.n_max)
        lo = bisect.bisect_left(vals, (x + 1) // 2)
        for n in range(hi, lo - 1, -1):
            if x - vals[n] in self.index:
                return True
        return False

    def representations(self, x: int) -> list[tuple[int, int]]:
        return representations(x, self.n_max) if self.contains(x) else []
