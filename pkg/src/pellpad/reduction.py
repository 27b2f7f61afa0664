"""Bound-producing engines: heights, Matveev, Baker-Davenport, LLL, and the log-power resolver."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Callable, Sequence

import mpmath

from .bigreal import (
    AmbiguousPrecision, BigReal, PrecisionExhausted, _mpf_dyadic, Ordering, PrecisionPolicy, certified_compare,
    distance_to_nearest_integer, floor_upper, log, nearest_integer, run_with_precision, sqrt,
)
from .contfrac import CFExpansion, InsufficientExpansion, expand_until


class HypothesisViolated(ValueError):
    """A lemma's hypothesis does not hold for the given data."""


class EpsilonNonpositive(ArithmeticError):
    """No convergent in the allowed window gave epsilon > 0."""


class ThetaTooSmall(ArithmeticError):
    """The reduced lattice is too short for the coefficient box; enlarge C."""


class RootIsolationFailure(ArithmeticError):
    """Root disks could not be separated at the precision limit."""


@dataclass(frozen=True)
class ReductionOutcome:
    kind: str  # legendre, bd, lll, matveev, gl
    inputs: dict
    certified_bound: object
    success: bool
    details: dict = field(default_factory=dict)


def _as_fn(x) -> Callable[[int], BigReal]:
    if callable(x):
        return x
    ball = x if isinstance(x, BigReal) else BigReal.exact(x)
    return lambda prec: ball


# -- heights ------------------------------------------------------------------

@dataclass(frozen=True)
class HeightedNumber:
    description: str
    minimal_polynomial: tuple[int, ...]
    degree: int
    height: BigReal


def height_rational(p: int, q: int, prec: int = 256) -> BigReal:
    if q <= 0 or gcd(p, q) != 1:
        raise ValueError("need q > 0 and gcd(p, q) = 1")
    return log(BigReal.exact(max(abs(p), q), prec))


def _cpoly(coeffs, x, y):
    """f(z) and f'(z) at z = x + iy, exact rationals, coefficients highest first."""
    fr, fi, dr, di = Fraction(0), Fraction(0), Fraction(0), Fraction(0)
    for c in coeffs:
        dr, di = dr * x - di * y + fr, dr * y + di * x + fi
        fr, fi = fr * x - fi * y + c, fr * y + fi * x
    return fr, fi, dr, di


def _frac(x) -> Fraction:
    man, exp = _mpf_dyadic(x._mpf_)
    return Fraction(man) * Fraction(2) ** exp


def root_disks(coeffs: Sequence[int], prec: int) -> list[tuple[Fraction, Fraction, Fraction]]:
    """(x, y, r^2): disjoint disks, each holding exactly one root.

    A disk of radius n|f(z)/f'(z)| around any z holds a root of f; if the
    n disks are pairwise disjoint each holds exactly one.
    """
    n = len(coeffs) - 1
    with mpmath.workprec(prec + 32):
        zs = mpmath.polyroots([int(c) for c in coeffs], maxsteps=400, extraprec=prec)
        zs = [(_frac(mpmath.re(z)), _frac(mpmath.im(z))) for z in zs]
    disks = []
    for x, y in zs:
        fr, fi, dr, di = _cpoly(coeffs, x, y)
        den = dr * dr + di * di
        if den == 0:
            raise AmbiguousPrecision("derivative vanishes at an approximate root")
        disks.append((x, y, n * n * (fr * fr + fi * fi) / den))
    for i in range(n):
        for j in range(i):
            xi, yi, ri = disks[i]
            xj, yj, rj = disks[j]
            dist2 = (xi - xj) ** 2 + (yi - yj) ** 2
            # disjoint iff dist > sqrt(ri) + sqrt(rj), i.e. (dist2 - ri - rj)^2 > 4 ri rj with dist2 > ri + rj
            if not (dist2 > ri + rj and (dist2 - ri - rj) ** 2 > 4 * ri * rj):
                raise AmbiguousPrecision("root disks overlap")
    return disks


def height_algebraic(coeffs: Sequence[int], prec: int = 256,
                     policy: PrecisionPolicy | None = None) -> BigReal:
    """(1/D)(log a0 + sum log max(|root|, 1)) for the integer polynomial coeffs (highest first)."""
    coeffs = [int(c) for c in coeffs]
    if len(coeffs) < 2 or coeffs[0] <= 0:
        raise ValueError("need degree >= 1 and a positive leading coefficient")
    D = len(coeffs) - 1

    def attempt(p):
        total = log(BigReal.exact(coeffs[0], p))
        for x, y, r2 in root_disks(coeffs, p):
            mod = sqrt(BigReal.from_interval(x * x + y * y, x * x + y * y, p))
            rad = sqrt(BigReal.from_interval(r2, r2, p)).upper()
            lo, hi = max(mod.lower() - rad, Fraction(1)), max(mod.upper() + rad, Fraction(1))
            if hi > 1:
                total = total + log(BigReal.from_interval(lo, hi, p))
        h = total / D
        if h.rad > Fraction(1, 2 ** (p // 2)):
            raise AmbiguousPrecision("height ball too wide")
        return h

    try:
        return run_with_precision(attempt, policy, start=prec)
    except PrecisionExhausted as exc:
        raise RootIsolationFailure(str(exc)) from exc


def heighted(description: str, coeffs: Sequence[int], prec: int = 256) -> HeightedNumber:
    return HeightedNumber(description, tuple(coeffs), len(coeffs) - 1, height_algebraic(coeffs, prec))


# -- Matveev ------------------------------------------------------------------

@dataclass(frozen=True)
class LinearFormData:
    t: int
    D: int
    A: tuple
    B: object

    def __post_init__(self):
        if len(self.A) != self.t or self.t < 1:
            raise ValueError("need exactly t values A_i")
        if any(certified_compare(a, Fraction(4, 25)) is Ordering.LESS for a in self.A):
            raise ValueError("every A_i must be at least 0.16")
        if certified_compare(self.B, 1) is Ordering.LESS:
            raise ValueError("B must be at least 1")


def matveev_constant(t: int, D: int, prec: int = 256) -> BigReal:
    """1.4 * 30^(t+3) * t^4.5 * D^2 * (1 + log D)."""
    c = BigReal.exact(Fraction(7, 5) * 30 ** (t + 3) * t ** 4 * D * D, prec)
    return c * sqrt(BigReal.exact(t, prec)) * (1 + log(BigReal.exact(D, prec)))


def matveev_bound(data: LinearFormData, prec: int = 256) -> BigReal:
    """Upper bound for -log|Lambda|: C(t, D) (1 + log B) prod A_i."""
    out = matveev_constant(data.t, data.D, prec) * (1 + log(BigReal.exact(data.B, prec)))
    for a in data.A:
        out = out * a
    return out


# -- Baker-Davenport ------------------------------------------------------------

@dataclass(frozen=True)
class BDInstance:
    tau: object  # BigReal or prec -> BigReal
    mu: object
    A: object
    B: object
    M: int

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be a positive integer")


def bd_reduce(inst: BDInstance, cf: CFExpansion | None = None, max_attempts: int = 50,
              policy: PrecisionPolicy | None = None, best_of: int = 1) -> ReductionOutcome:
    """Walk convergents from the first q > 6M until eps = ||mu q|| - M ||tau q|| > 0.

    On success no solution of 0 < |u tau - v + mu| < A B^-w with u <= M has
    w > certified_bound.  Each convergent with eps > 0 yields a valid bound,
    so with best_of > 1 the smallest of the first best_of such bounds is kept.
    """
    tau, mu, A, B = _as_fn(inst.tau), _as_fn(inst.mu), _as_fn(inst.A), _as_fn(inst.B)
    if cf is None:
        cf = expand_until(tau, 6 * inst.M, extra=max_attempts, policy=policy)
    start = cf.first_index_above(6 * inst.M)
    if start is None:
        raise InsufficientExpansion("no convergent denominator exceeds 6M")
    inputs = {"M": inst.M, "A": A(64).to_string(12), "B": B(64).to_string(12)}
    best, found = None, 0
    for i in range(start, min(start + max_attempts, len(cf.convergents))):
        q = cf.convergents[i][1]

        def attempt(p):
            need = p + 2 * q.bit_length()
            t, m = tau(need), mu(need)
            eps = distance_to_nearest_integer(m * q) - inst.M * distance_to_nearest_integer(t * q)
            s = eps.sign()
            if s == 0:
                raise AmbiguousPrecision("sign of eps undecided")
            if s < 0:
                return None
            b = log(A(need) * q / eps) / log(B(need))
            return eps, b

        res = run_with_precision(attempt, policy, start=128)
        if res is None:
            continue
        eps, b = res
        out = ReductionOutcome("bd", inputs, floor_upper(b), True,
                               {"index": i, "q": q, "eps_lower": eps.lower(), "raw": b.to_string(12)})
        if best is None or out.certified_bound < best.certified_bound:
            best = out
        found += 1
        if found >= best_of:
            break
    if best is None:
        raise EpsilonNonpositive(f"no eps > 0 among {max_attempts} convergents after q > 6M")
    return best


def homogeneous_reduce(tau, A, B, M: int, cf: CFExpansion | None = None,
                       policy: PrecisionPolicy | None = None) -> ReductionOutcome:
    """Bound w in 0 < |u tau - v| < A B^-w with 1 <= u <= M (the case mu in Z).

    With q_N the largest convergent denominator not above M, every such u
    has |u tau - v| >= |q_N tau - p_N|, so w <= log(A / ||q_N tau||) / log B.
    """
    tau, A, B = _as_fn(tau), _as_fn(A), _as_fn(B)
    if M < 1:
        raise ValueError("M must be a positive integer")
    if cf is None:
        cf = expand_until(tau, M, policy=policy)
    nxt = cf.first_index_above(M)
    if nxt is None or nxt == 0:
        raise InsufficientExpansion("need convergents on both sides of M")
    q = cf.convergents[nxt - 1][1]

    def attempt(p):
        need = p + 2 * q.bit_length()
        gap = distance_to_nearest_integer(tau(need) * q)
        if gap.sign() <= 0:
            raise AmbiguousPrecision("||q tau|| not separated from zero")
        return gap, log(A(need) / gap) / log(B(need))

    gap, b = run_with_precision(attempt, policy, start=128)
    return ReductionOutcome("homogeneous", {"M": M, "A": A(64).to_string(12), "B": B(64).to_string(12)},
                            max(floor_upper(b), 0), True,
                            {"index": nxt - 1, "q": q, "gap_lower": gap.lower(), "raw": b.to_string(12)})


# -- LLL ----------------------------------------------------------------------

def _lll(rows: list[list[int]], delta: Fraction = Fraction(3, 4)):
    """Integral LLL after Cohen; returns (basis, d) with d_i = Gram determinants."""
    dp, dq = Fraction(delta).numerator, Fraction(delta).denominator
    if not Fraction(1, 4) < Fraction(dp, dq) <= 1:
        raise ValueError("delta must lie in (1/4, 1]")
    b = [list(map(int, r)) for r in rows]
    n = len(b)
    dot = lambda u, v: sum(x * y for x, y in zip(u, v))
    d = [1] + [0] * n  # d[0] = 1, d[i] for i = 1..n
    lam = [[0] * n for _ in range(n)]
    d[1] = dot(b[0], b[0])
    if d[1] == 0:
        raise ValueError("rows are linearly dependent")
    k, kmax = 1, 0  # zero-based k; kmax = largest index with Gram data computed

    def red(k, l):
        if 2 * abs(lam[k][l]) > d[l + 1]:
            q = (2 * lam[k][l] + d[l + 1]) // (2 * d[l + 1])
            b[k] = [x - q * y for x, y in zip(b[k], b[l])]
            lam[k][l] -= q * d[l + 1]
            for i in range(l):
                lam[k][i] -= q * lam[l][i]

    def swap(k):
        b[k], b[k - 1] = b[k - 1], b[k]
        for j in range(k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        la = lam[k][k - 1]
        Bv = (d[k - 1] * d[k + 1] + la * la) // d[k]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k + 1] * lam[i][k - 1] - la * t) // d[k]
            lam[i][k - 1] = (Bv * t + la * lam[i][k]) // d[k + 1]
        d[k] = Bv

    while k < n:
        if k > kmax:
            kmax = k
            for j in range(k + 1):
                u = dot(b[k], b[j])
                for i in range(j):
                    u = (d[i + 1] * u - lam[k][i] * lam[j][i]) // d[i]
                if j < k:
                    lam[k][j] = u
                else:
                    if u == 0:
                        raise ValueError("rows are linearly dependent")
                    d[k + 1] = u
        red(k, k - 1)
        if dq * d[k + 1] * d[k - 1] < dp * d[k] * d[k] - dq * lam[k][k - 1] ** 2:
            swap(k)
            k = max(1, k - 1)
        else:
            for l in range(k - 2, -1, -1):
                red(k, l)
            k += 1
    return b, d


def lll_reduce_basis(rows: Sequence[Sequence[int]], delta=Fraction(3, 4)) -> list[list[int]]:
    """delta-LLL-reduced basis of the lattice spanned by the rows, exact integers."""
    return _lll([list(r) for r in rows], Fraction(delta))[0]


def gram_schmidt_norms2(rows: Sequence[Sequence[int]]) -> list[Fraction]:
    """Squared Gram-Schmidt lengths |b_i*|^2 = d_i / d_(i-1), exact."""
    b = [list(map(int, r)) for r in rows]
    out, star = [], []
    for v in b:
        w = [Fraction(x) for x in v]
        for s, n2 in zip(star, out):
            mu = sum(x * y for x, y in zip(v, s)) / n2
            w = [x - mu * y for x, y in zip(w, s)]
        star.append(w)
        out.append(sum(x * x for x in w))
    return out


@dataclass(frozen=True)
class LLLInstance:
    t: int
    tau: tuple  # BigReals or prec -> BigReal
    X: tuple
    C: int

    def __post_init__(self):
        if len(self.tau) != self.t or len(self.X) != self.t:
            raise ValueError("need t values tau_i and X_i")
        if self.C <= (self.t * max(self.X)) ** self.t:
            raise ValueError("need C > (t max X)^t")


def lattice_rows(inst: LLLInstance, policy: PrecisionPolicy | None = None) -> list[list[int]]:
    """Rows e_j with last entry round(C tau_j) for j < t, then round(C tau_t) e_t."""
    fns = [_as_fn(x) for x in inst.tau]

    def attempt(p):
        need = p + inst.C.bit_length()
        return [nearest_integer(f(need) * inst.C) for f in fns]

    vals = run_with_precision(attempt, policy, start=64)
    t = inst.t
    rows = []
    for j in range(t - 1):
        r = [0] * t
        r[j] = 1
        r[-1] = vals[j]
        rows.append(r)
    rows.append([0] * (t - 1) + [vals[-1]])
    return rows


def lll_lower_bound(inst: LLLInstance, policy: PrecisionPolicy | None = None, prec: int = 256,
                    delta=Fraction(3, 4)) -> ReductionOutcome:
    """Certified lower bound on |sum x_i tau_i| for nonzero integer x with |x_i| <= X_i.

    With theta^2 = min |b_i*|^2 of a reduced basis, Q = sum_{i<t} X_i^2 and
    R = (1 + sum X_i)/2, the bound is (sqrt(theta^2 - Q) - R)/C.  Every
    nonzero lattice vector is at least min |b_i*| long for any basis, so a
    stronger delta only sharpens the bound.
    """
    rows = lattice_rows(inst, policy)
    if rows[-1][-1] == 0:
        raise ThetaTooSmall("last lattice entry rounds to zero; enlarge C")
    basis, d = _lll(rows, Fraction(delta))
    theta2 = min(Fraction(d[i + 1], d[i]) for i in range(inst.t))
    Q = sum(x * x for x in inst.X[:-1])
    R = Fraction(1 + sum(inst.X), 2)
    if theta2 < Q + R * R:
        raise ThetaTooSmall(f"theta^2 has {len(str(int(theta2)))} digits, below Q + R^2 "
                            f"with {len(str(int(Q + R * R)))} digits; enlarge C")
    val = (sqrt(BigReal.from_interval(theta2 - Q, theta2 - Q, prec)) - R) / inst.C
    lo = val.lower()
    bound = BigReal.from_interval(lo, lo, prec)
    return ReductionOutcome("lll", {"t": inst.t, "X": list(inst.X), "C_digits": len(str(inst.C)),
                                    "delta": str(Fraction(delta))},
                            bound, True, {"theta2": theta2, "Q": Q, "R": R, "basis": basis})


# -- log-power resolver --------------------------------------------------------

def gl_resolve(r: int, H, prec: int = 256) -> BigReal:
    """If L/(log L)^r < H with H > (4r^2)^r then L < 2^r H (log H)^r."""
    if r < 1:
        raise HypothesisViolated("need r >= 1")
    H = H if isinstance(H, BigReal) else BigReal.exact(Fraction(H) if not isinstance(H, str) else H, prec)
    if certified_compare(H, (4 * r * r) ** r) is not Ordering.GREATER:
        raise HypothesisViolated(f"need H > (4r^2)^r = {(4 * r * r) ** r}")
    return 2 ** r * H * log(H) ** r
