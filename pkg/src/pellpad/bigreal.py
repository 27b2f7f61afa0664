"""Ball arithmetic on dyadic rationals.

A BigReal is ``mid ± rad`` where both parts are dyadic rationals stored as
``(mantissa, exponent)`` integer pairs.  Every operation returns a ball that
contains the exact result whenever the inputs contain their exact values.
Radii are rounded upward to a 32-bit mantissa; midpoints are rounded to the
ball's ``prec`` significant bits and the rounding error is folded into the
radius.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from mpmath import libmp

RAD_BITS = 32


class PrecisionExhausted(ArithmeticError):
    """Raised when the precision policy runs out before a result certifies."""


class AmbiguousPrecision(ArithmeticError):
    """Raised when a ball is too wide to decide a discrete question."""


@dataclass(frozen=True)
class PrecisionPolicy:
    start_bits: int = 256
    max_bits: int = 1 << 20
    growth: int = 2

    def __post_init__(self):
        if not 0 < self.start_bits <= self.max_bits:
            raise ValueError("need 0 < start_bits <= max_bits")
        if self.growth < 2:
            raise ValueError("growth factor must be at least 2")

    @classmethod
    def from_env(cls, **kw) -> "PrecisionPolicy":
        raw = os.environ.get("PELLPAD_PRECISION_BITS")
        if raw:
            kw.setdefault("start_bits", int(raw))
        return cls(**kw)

    def ladder(self, start: int | None = None):
        p = max(start or self.start_bits, self.start_bits)
        while p <= self.max_bits:
            yield p
            p *= self.growth


def run_with_precision(fn, policy: PrecisionPolicy | None = None, start: int | None = None):
    """Call ``fn(prec)`` along the policy ladder until it stops raising AmbiguousPrecision."""
    policy = policy or PrecisionPolicy.from_env()
    last = None
    for prec in policy.ladder(start):
        try:
            return fn(prec)
        except AmbiguousPrecision as exc:
            last = exc
    raise PrecisionExhausted(f"no certified result up to {policy.max_bits} bits: {last}")


# -- dyadic helpers ---------------------------------------------------------

def _align(m1, e1, m2, e2):
    e = min(e1, e2)
    return m1 << (e1 - e), m2 << (e2 - e), e


def _rad_up(r, e):
    """Round a nonnegative dyadic upward to RAD_BITS bits of mantissa."""
    if r == 0:
        return 0, 0
    extra = r.bit_length() - RAD_BITS
    if extra > 0:
        r = (r >> extra) + 1
        e += extra
    return r, e


def _rad_add(r1, e1, r2, e2):
    if r1 == 0:
        return _rad_up(r2, e2)
    if r2 == 0:
        return _rad_up(r1, e1)
    # a summand far below the other's last bit is absorbed as one unit
    top1, top2 = e1 + r1.bit_length(), e2 + r2.bit_length()
    if top1 - top2 > 2 * RAD_BITS:
        r2, e2 = 1, top2
    elif top2 - top1 > 2 * RAD_BITS:
        r1, e1 = 1, top1
    a, b, e = _align(r1, e1, r2, e2)
    return _rad_up(a + b, e)


def _div_up(nm, ne, dm, de):
    """Upper bound for (nm 2^ne)/(dm 2^de), nm >= 0, dm > 0."""
    if nm == 0:
        return 0, 0
    s = RAD_BITS + 2 + dm.bit_length() - nm.bit_length()
    num, den = (nm << s, dm) if s >= 0 else (nm, dm << -s)
    return _rad_up(-(-num // den), ne - de - s)


def _round_mid(m, e, prec):
    """Round m 2^e to prec bits; return the rounded pair and an error bound."""
    extra = abs(m).bit_length() - prec
    if extra <= 0:
        return m, e, 0, 0
    m = (m + (1 << (extra - 1))) >> extra
    return m, e + extra, 1, e + extra - 1


def _iroot(n, k):
    """Floor of the k-th root of a nonnegative integer, by Newton's method."""
    if n < 2:
        return n
    if k == 2:
        return math.isqrt(n)
    x = 1 << -(-n.bit_length() // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            return x
        x = y


def _root_floor(L, E, k, bits):
    """(r, f) with r 2^f <= (L 2^E)^(1/k) < (r+1) 2^f, plus an exactness flag."""
    f = (L.bit_length() + E - k * bits) // k
    shift = E - k * f
    if shift >= 0:
        n, exact = L << shift, True
    else:
        n = L >> -shift
        exact = (n << -shift) == L
    r = _iroot(n, k)
    return r, f, exact and r ** k == n


def _mpf_dyadic(t):
    sign, man, exp, _ = t
    if not man and exp:
        raise ValueError("special mpf value")
    return (-int(man) if sign else int(man)), int(exp)


# -- the ball type ----------------------------------------------------------

class BigReal:
    __slots__ = ("m", "e", "r", "re", "prec")

    def __init__(self, m: int, e: int, r: int = 0, re: int = 0, prec: int = 256):
        if r < 0:
            raise ValueError("radius must be nonnegative")
        self.m, self.e, self.r, self.re, self.prec = m, e, r, re, prec

    # construction

    @classmethod
    def _rounded(cls, m, e, r, re, prec):
        m, e, er, ee = _round_mid(m, e, prec)
        r, re = _rad_add(r, re, er, ee)
        return cls(m, e, r, re, prec)

    @classmethod
    def exact(cls, value, prec: int = 256) -> "BigReal":
        """Ball around an int, Fraction, or decimal string; exact when dyadic."""
        if isinstance(value, BigReal):
            return value
        if isinstance(value, bool):
            value = int(value)
        if isinstance(value, int):
            return cls(value, 0, 0, 0, prec)
        if isinstance(value, float):
            n, d = value.as_integer_ratio()
            value = Fraction(n, d)
        value = Fraction(value)
        p, q = value.numerator, value.denominator
        if q & (q - 1) == 0:
            return cls._rounded(p, -(q.bit_length() - 1), 0, 0, prec)
        s = prec + 2 + q.bit_length() - abs(p).bit_length()
        s = max(s, 0)
        mid = (p << s) // q
        return cls._rounded(mid, -s, 1, -s, prec)

    @classmethod
    def from_bounds(cls, lo_m, hi_m, exp, prec) -> "BigReal":
        """Smallest ball covering [lo_m 2^exp, hi_m 2^exp]."""
        if hi_m < lo_m:
            raise ValueError("empty interval")
        return cls._rounded(lo_m + hi_m, exp - 1, hi_m - lo_m, exp - 1, prec)

    @classmethod
    def from_interval(cls, lo, hi, prec: int = 256) -> "BigReal":
        """Ball covering the rational interval [lo, hi], rounded outward."""
        lo, hi = Fraction(lo), Fraction(hi)
        if hi < lo:
            raise ValueError("empty interval")
        s = prec + 2
        top = max(abs(lo), abs(hi))
        if top:
            s -= top.numerator.bit_length() - top.denominator.bit_length()
        L = (lo.numerator << s) // lo.denominator if s >= 0 else lo.numerator // (lo.denominator << -s)
        H = -((-hi.numerator << s) // hi.denominator) if s >= 0 else -(-hi.numerator // (hi.denominator << -s))
        return cls.from_bounds(L, H, -s, prec)

    def hull(self, other) -> "BigReal":
        """Smallest ball containing both balls."""
        other = self._coerce(other)
        return BigReal.from_interval(min(self.lower(), other.lower()),
                                     max(self.upper(), other.upper()), max(self.prec, other.prec))

    def with_prec(self, prec: int) -> "BigReal":
        return BigReal._rounded(self.m, self.e, self.r, self.re, prec)

    # endpoints

    def bounds(self):
        """(L, H, E) with the ball equal to [L 2^E, H 2^E]."""
        m, r, e = _align(self.m, self.e, self.r, self.re)
        return m - r, m + r, e

    def lower(self) -> Fraction:
        L, _, E = self.bounds()
        return Fraction(L) * Fraction(2) ** E

    def upper(self) -> Fraction:
        _, H, E = self.bounds()
        return Fraction(H) * Fraction(2) ** E

    @property
    def mid(self) -> Fraction:
        return Fraction(self.m) * Fraction(2) ** self.e

    @property
    def rad(self) -> Fraction:
        return Fraction(self.r) * Fraction(2) ** self.re

    def contains(self, value) -> bool:
        if isinstance(value, BigReal):
            return self.lower() <= value.lower() and value.upper() <= self.upper()
        if not isinstance(value, (int, Fraction)):
            value = Fraction(value)  # floats and mpf-as-float
        return self.lower() <= value <= self.upper()

    def contains_mpf(self, x) -> bool:
        """Containment test for an mpmath number without float rounding."""
        man, exp = _mpf_dyadic(x._mpf_)
        return self.contains(Fraction(man) * Fraction(2) ** exp)

    def is_exact(self) -> bool:
        return self.r == 0

    def __float__(self):
        return float(self.mid)

    def __repr__(self):
        return f"BigReal({libmp.to_str(libmp.from_man_exp(self.m, self.e), 20)} ± {float(self.rad):.3g})"

    def to_string(self, digits: int = 20) -> str:
        return libmp.to_str(libmp.from_man_exp(self.m, self.e), digits)

    # arithmetic

    def _coerce(self, other):
        if isinstance(other, BigReal):
            return other
        return BigReal.exact(other, self.prec)

    def __neg__(self):
        return BigReal(-self.m, self.e, self.r, self.re, self.prec)

    def __abs__(self):
        if self.m >= 0:
            return self
        return -self

    def abs_ball(self) -> "BigReal":
        """|x| as a ball, clipped at zero when the ball straddles the origin."""
        L, H, E = self.bounds()
        if L >= 0:
            return self
        if H <= 0:
            return -self
        return BigReal.from_bounds(0, max(-L, H), E, self.prec)

    def __add__(self, other):
        o = self._coerce(other)
        a, b, e = _align(self.m, self.e, o.m, o.e)
        r, re = _rad_add(self.r, self.re, o.r, o.re)
        return BigReal._rounded(a + b, e, r, re, max(self.prec, o.prec))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        m, e = self.m * o.m, self.e + o.e
        r1, e1 = _rad_up(abs(self.m) * o.r, self.e + o.re)
        r2, e2 = _rad_up(abs(o.m) * self.r, o.e + self.re)
        r3, e3 = _rad_up(self.r * o.r, self.re + o.re)
        r, re = _rad_add(*_rad_add(r1, e1, r2, e2), r3, e3)
        return BigReal._rounded(m, e, r, re, max(self.prec, o.prec))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        prec = max(self.prec, o.prec)
        am2 = abs(o.m)
        # |m2| - r2 must be positive: the divisor ball excludes zero
        d_m, d_r, d_e = _align(am2, o.e, o.r, o.re)
        gap = d_m - d_r
        if gap <= 0:
            raise ZeroDivisionError("divisor ball contains zero")
        s = max(prec + 2 + am2.bit_length() - abs(self.m).bit_length(), 0)
        q = (self.m << s) // o.m
        qe = self.e - s - o.e
        # rounding error of the quotient is below one unit of 2^qe
        n1, n1e = _rad_up(abs(self.m) * o.r, self.e + o.re)
        n2, n2e = _rad_up(am2 * self.r, o.e + self.re)
        nm, ne = _rad_add(n1, n1e, n2, n2e)
        # lower bound for |m2| (|m2| - r2), rounded down to keep the quotient an upper bound
        den = am2 * gap
        den_e = o.e + d_e
        drop = den.bit_length() - RAD_BITS - 8
        if drop > 0:
            den >>= drop
            den_e += drop
        r, re = _div_up(nm, ne, den, den_e)
        r, re = _rad_add(r, re, 1, qe)
        return BigReal._rounded(q, qe, r, re, prec)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return exp(log(self) * n)
        if n < 0:
            return 1 / (self ** -n)
        result = BigReal(1, 0, 0, 0, self.prec)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def sign(self) -> int:
        """+1 or -1 when certain, 0 when the ball contains zero."""
        L, H, _ = self.bounds()
        if L > 0:
            return 1
        if H < 0:
            return -1
        return 0


# -- monotone functions -----------------------------------------------------

def _as_ball(x, prec=256) -> BigReal:
    return x if isinstance(x, BigReal) else BigReal.exact(x, prec)


def _nth_root(x, k: int) -> BigReal:
    x = _as_ball(x)
    L, H, E = x.bounds()
    if L < 0:
        raise ValueError("root of a ball reaching below zero")
    bits = x.prec + 4
    lo, f_lo, _ = _root_floor(L, E, k, bits) if L else (0, 0, True)
    hi, f_hi, exact = _root_floor(H, E, k, bits)
    if not exact:
        hi += 1
    a, b, f = _align(lo, f_lo, hi, f_hi)
    return BigReal.from_bounds(a, b, f, x.prec)


def sqrt(x) -> BigReal:
    return _nth_root(x, 2)


def cbrt(x) -> BigReal:
    """Real cube root; negative balls handled by symmetry."""
    x = _as_ball(x)
    if x.sign() < 0:
        return -_nth_root(-x, 3)
    return _nth_root(x, 3)


def _widen(m, e, bits):
    s = bits - abs(m).bit_length()
    return (m << s, e - s) if m and s > 0 else (m, e)


def _mono(x: BigReal, f, slack_bits: int):
    """Apply an increasing libmp kernel to both endpoints with directed rounding."""
    L, H, E = x.bounds()
    wp = x.prec + slack_bits
    lo = _mpf_dyadic(f(libmp.from_man_exp(L, E), wp, libmp.round_floor))
    hi = _mpf_dyadic(f(libmp.from_man_exp(H, E), wp, libmp.round_ceiling))
    # the kernels are accurate to a few ulp; widen by a generous 2^-(wp-8) relative,
    # after scaling mantissas to wp bits (mpf strips trailing zeros, so 1 is (1, 0))
    lm, le = _widen(*lo, wp)
    hm, he = _widen(*hi, wp)
    lo_pad = (abs(lm) >> (wp - 8)) + 1 if lm else 0
    hi_pad = (abs(hm) >> (wp - 8)) + 1 if hm else 0
    a, b, e = _align(lm - lo_pad, le, hm + hi_pad, he)
    return BigReal.from_bounds(a, b, e, x.prec)


def log(x) -> BigReal:
    x = _as_ball(x)
    L, _, _ = x.bounds()
    if L <= 0:
        raise ValueError("log of a ball reaching zero or below")
    return _mono(x, libmp.mpf_log, 32)


def exp(x) -> BigReal:
    return _mono(_as_ball(x), libmp.mpf_exp, 32)


def pi(prec: int = 256) -> BigReal:
    wp = prec + 32
    m, e = _mpf_dyadic(libmp.mpf_pi(wp, libmp.round_floor))
    return BigReal.from_bounds(m, m + 2, e, prec)


# -- certified decisions ----------------------------------------------------

class Ordering(enum.Enum):
    LESS = "less"
    GREATER = "greater"
    UNKNOWN = "unknown"


def certified_compare(x, y) -> Ordering:
    x, y = _as_ball(x), _as_ball(y)
    xl, xh, xe = x.bounds()
    yl, yh, ye = y.bounds()
    xh_a, yl_a, _ = _align(xh, xe, yl, ye)
    if xh_a < yl_a:
        return Ordering.LESS
    xl_a, yh_a, _ = _align(xl, xe, yh, ye)
    if xl_a > yh_a:
        return Ordering.GREATER
    return Ordering.UNKNOWN


def certainly_less(x, y) -> bool:
    return certified_compare(x, y) is Ordering.LESS


def certified_floor(x) -> int:
    x = _as_ball(x)
    L, H, E = x.bounds()
    if E >= 0:
        lo, hi = L << E, H << E
    else:
        lo, hi = L >> -E, H >> -E
    if lo != hi:
        raise AmbiguousPrecision(f"floor undecided for {x!r}")
    return lo


def floor_upper(x) -> int:
    """Floor of the ball's upper endpoint: a sound integer upper bound for any w < x."""
    _, H, E = _as_ball(x).bounds()
    return H << E if E >= 0 else H >> -E


def nearest_integer(x) -> int:
    """The integer closest to every point of the ball, or AmbiguousPrecision."""
    return certified_floor(_as_ball(x) + Fraction(1, 2))


def distance_to_nearest_integer(x) -> BigReal:
    """Ball containing ||x||, the distance from x to the nearest integer."""
    x = _as_ball(x)
    k = nearest_integer(x)
    return (x - k).abs_ball()


# -- constants of x^3 - x - 1 -----------------------------------------------

@dataclass(frozen=True)
class AlgebraicConstants:
    prec: int
    r1: BigReal
    r2: BigReal
    alpha: BigReal
    re_beta: BigReal
    im_beta: BigReal
    abs_beta: BigReal
    a: BigReal
    abs_b: BigReal
    log_alpha: BigReal
    log_a: BigReal
    log_2a: BigReal


def _psi_exact(v: Fraction) -> Fraction:
    return v ** 3 - v - 1


def _between(x: BigReal, lo, hi) -> bool:
    return certainly_less(lo, x) and certainly_less(x, hi)


def _build_constants(prec: int) -> AlgebraicConstants:
    wp = prec + 32
    s69 = sqrt(BigReal.exact(69, wp))
    r1 = cbrt(108 + 12 * s69)
    r2 = cbrt(108 - 12 * s69)
    alpha = (r1 + r2) / 6
    re_beta = -(r1 + r2) / 12
    im_beta = sqrt(BigReal.exact(3, wp)) * (r1 - r2) / 12
    im2 = im_beta * im_beta
    abs_beta = sqrt(re_beta * re_beta + im2)
    one_minus_beta2 = (1 - re_beta) ** 2 + im2
    alpha_minus_beta2 = (alpha - re_beta) ** 2 + im2
    a = one_minus_beta2 / alpha_minus_beta2
    # b = (1-alpha)(1-gamma)/((beta-alpha)(beta-gamma)); only |b| is needed
    abs_b = (alpha - 1) * sqrt(one_minus_beta2) / (sqrt(alpha_minus_beta2) * 2 * im_beta)
    consts = AlgebraicConstants(
        prec=prec,
        r1=r1.with_prec(prec), r2=r2.with_prec(prec),
        alpha=alpha.with_prec(prec),
        re_beta=re_beta.with_prec(prec), im_beta=im_beta.with_prec(prec),
        abs_beta=abs_beta.with_prec(prec), a=a.with_prec(prec), abs_b=abs_b.with_prec(prec),
        log_alpha=log(alpha).with_prec(prec), log_a=log(a).with_prec(prec),
        log_2a=log(2 * a).with_prec(prec),
    )
    _check_constants(consts)
    return consts


def _check_constants(c: AlgebraicConstants) -> None:
    F = Fraction
    ok = (
        _between(c.alpha, F(132, 100), F(133, 100))
        and _between(c.abs_beta, F(86, 100), F(87, 100))
        and _between(c.a, F(72, 100), F(73, 100))
        and _between(c.abs_b, F(24, 100), F(25, 100))
    )
    lo, hi = c.alpha.lower(), c.alpha.upper()
    w = hi - lo
    ok = ok and _psi_exact(lo) <= 0 <= _psi_exact(hi)
    ok = ok and _psi_exact(lo - w) < 0 < _psi_exact(hi + w)
    if not ok:
        raise AmbiguousPrecision(f"constants not certified at {c.prec} bits")


@lru_cache(maxsize=32)
def constants(prec: int = 256, policy: PrecisionPolicy | None = None) -> AlgebraicConstants:
    """Certified balls for the roots and Binet coefficients of x^3 - x - 1."""
    if prec < 64:
        raise ValueError("constants need at least 64 bits")
    policy = policy or PrecisionPolicy(start_bits=prec, max_bits=max(prec, PrecisionPolicy().max_bits))
    return run_with_precision(_build_constants, policy, start=prec)
