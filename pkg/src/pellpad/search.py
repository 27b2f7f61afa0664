"""Exhaustive searches: x_k = P_n + P_m inside certified boxes, and theorem lists."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import isqrt

import numpy as np
from sympy import sieve

from .padovan import PadovanSums, padovan, padovan_table
from .pell import (
    EqKind,
    Family,
    SignUnsolvable,
    _min_x1,
    fundamental,
    invert_q,
    is_squarefree,
    q_closed_form,
    recover_d,
    sequence,
    stated_exponents,
    unit_power_root,
)
from .contfrac import is_square

SIEVE_K_MAX = 200  # primes up to here are sieved, larger ones enumerated
FLAG_D_MAX = 10 ** 4  # non-squarefree d reached through unit powers are tracked up to here


@dataclass(frozen=True, order=True)
class QHit:
    k: int
    x1: int
    sign: int
    n: int
    m: int


@dataclass(frozen=True)
class SolutionRecord:
    d: int
    eq_kind: EqKind
    ordinal: int
    k_unit: int
    x_value: int
    representations: tuple

    def __post_init__(self):
        for n, m in self.representations:
            if padovan(n) + padovan(m) != self.x_value:
                raise ValueError(f"P_{n} + P_{m} != {self.x_value}")

    def as_dict(self) -> dict:
        return {"d": self.d, "eq": self.eq_kind.slug, "ordinal": self.ordinal, "k_unit": self.k_unit,
                "x": str(self.x_value), "reps": [list(r) for r in self.representations]}


# -- Q-search: Q_k(x1) = P_n + P_m ------------------------------------------------

def _q_mod(family: Family, sign: int, k: int, ell: int) -> np.ndarray:
    """Q_k(x) mod ell for every residue x."""
    x = np.arange(ell, dtype=np.int64)
    c = (2 if family is Family.UNIT else 1) * x % ell
    a = np.full(ell, 1 if family is Family.UNIT else 2, dtype=np.int64)
    b = x.copy()
    for _ in range(k - 1):
        a, b = b, (c * b - sign * a) % ell
    return b


def _sieve_moduli(k: int, limit: int = 40000):
    for ell in sieve.primerange(7, limit):
        if k == 2 or ell % k in (1, k - 1):
            yield ell


def _sieve_prime(family: Family, sign: int, k: int, P: list[int], sums: PadovanSums,
                 max_moduli: int = 80, target: int = 64) -> list[QHit]:
    n_max = len(P) - 1
    lo = _min_x1(family, sign)
    ni = mi = None
    used = 0
    for ell in _sieve_moduli(k):
        img = np.zeros(ell, dtype=bool)
        img[_q_mod(family, sign, k, ell)] = True
        if img.mean() > 0.75:
            continue
        R = np.array([p % ell for p in P], dtype=np.int64)
        if ni is None:
            grid = img[(R[:, None] + R[None, :]) % ell]
            grid &= np.tri(n_max + 1, dtype=bool)  # m <= n
            ni, mi = np.nonzero(grid)
            del grid
        else:
            keep = img[(R[ni] + R[mi]) % ell]
            ni, mi = ni[keep], mi[keep]
        used += 1
        if len(ni) <= target or used >= max_moduli:
            break
    hits = []
    seen: dict[int, int | None] = {}
    for n, m in zip(ni.tolist(), mi.tolist()):
        T = P[n] + P[m]
        if T not in seen:
            seen[T] = invert_q(T, family, sign, k) if T >= 1 else None
        x1 = seen[T]
        if x1 is not None and x1 >= lo:
            hits.append(QHit(k, x1, sign, n, m))
    return hits


def _enumerate_large(family: Family, sign: int, k_lo: int, k_hi: int, sums: PadovanSums) -> list[QHit]:
    """Primes k in (k_lo, k_hi]: Q_k grows fast, so walk x1 upward directly."""
    primes = set(sieve.primerange(k_lo + 1, k_hi + 1))
    if not primes:
        return []
    p0 = min(primes)
    hits = []
    x = _min_x1(family, sign)
    while q_closed_form(x, family, sign, p0) <= sums.top:
        c = (2 if family is Family.UNIT else 1) * x
        a, b = (1 if family is Family.UNIT else 2), x
        for k in range(1, k_hi + 1):
            if b > sums.top:
                break
            if k in primes and sums.contains(b):
                for n, m in sums.representations(b):
                    hits.append(QHit(k, x, sign, n, m))
            a, b = b, c * b - sign * a
        x += 1
    return hits


def q_search(family: Family, n_max: int, k_max: int, signs=(1, -1)) -> list[QHit]:
    """All (k, x1, sign) with k prime, 2 <= k <= k_max, Q_k(x1) = P_n + P_m, m <= n <= n_max.

    Composite k need no separate search because Q_{pq} = Q_p o Q_q.
    """
    P = list(padovan_table(n_max))
    sums = PadovanSums(n_max)
    hits = []
    for sign in signs:
        for k in sieve.primerange(2, min(k_max, SIEVE_K_MAX) + 1):
            hits.extend(_sieve_prime(family, sign, k, P, sums))
        if k_max > SIEVE_K_MAX:
            hits.extend(_enumerate_large(family, sign, SIEVE_K_MAX, k_max, sums))
    return sorted(set(hits))


def primitive_units(family: Family, hits) -> list[tuple[int, int]]:
    """Distinct (x1, eps) of the primitive units whose powers produce the hits."""
    roots = set()
    for h in hits:
        u, s, _ = unit_power_root(h.x1, family, h.sign)
        roots.add((u, s))
    return sorted(roots)


# -- final scans -----------------------------------------------------------------

def _records_for(d: int, kind: EqKind, k_max: int, sums: PadovanSums) -> list[SolutionRecord]:
    f = fundamental(d, kind.family)
    try:
        ks = stated_exponents(f.eps, kind.sign, 2 * k_max)[:k_max]
    except SignUnsolvable:
        return []
    out = []
    want = set(ks)
    c = (2 if kind.family is Family.UNIT else 1) * f.x1
    a, b = (1 if kind.family is Family.UNIT else 2), f.x1
    ordinal = 0
    for k in range(1, max(ks) + 1):
        if b > sums.top:
            break
        if k in want:
            ordinal += 1
            reps = sums.representations(b)
            if reps:
                out.append(SolutionRecord(d, kind, ordinal, k, b, tuple(reps)))
        a, b = b, c * b - f.eps * a
    return out


def _qualifies(records) -> bool:
    return len({r.x_value for r in records}) >= 2


def scan_final(eq_kind: EqKind, box: dict, candidates, close_gap: bool = True) -> dict[int, list[SolutionRecord]]:
    """Every d whose stated equation has two or more solutions that are Padovan sums.

    candidates are units (UnitValue or (x1, eps) pairs).  With close_gap the
    generator set also receives the primitive roots of a prime-k search over
    the final box itself, which covers fundamental solutions that are already
    sums (first exponent 1) and therefore never enter the reduction.
    """
    fam = eq_kind.family
    k_max, n_max = box["k_max"], box["n_max"]
    sums = PadovanSums(n_max)
    gens = set()
    for c in candidates:
        x1, eps = (c.x1, c.eps) if hasattr(c, "x1") else c
        gens.add(unit_power_root(x1, fam, eps)[:2])
    if close_gap:
        gens.update(primitive_units(fam, q_search(fam, n_max, 2 * k_max + 1)))
    out: dict[int, list[SolutionRecord]] = {}

    def visit(d, x1, y, eps):
        f = fundamental(d, fam)
        if (f.x1, f.y1, f.eps) == (x1, y, eps):
            recs = _records_for(d, eq_kind, k_max, sums)
            if _qualifies(recs):
                out[d] = recs

    for x1, eps in sorted(gens):
        for d0, y0 in recover_d(x1, fam, eps):
            visit(d0, x1, y0, eps)
            # d = d0 s^2 may have u^j = x_j + (y_j/s) sqrt(d) as fundamental unit;
            # such d are outside the theorem statements and only tracked to FLAG_D_MAX
            s_max = isqrt(FLAG_D_MAX // d0)
            if s_max < 2:
                continue
            for j, xj, yj in sequence(x1, y0, fam, eps, 10 ** 6):
                if xj > sums.top:
                    break
                if j > 1:
                    for s_ in range(2, s_max + 1):
                        if yj % s_ == 0:
                            visit(d0 * s_ * s_, xj, yj // s_, eps ** j)
    return dict(sorted(out.items()))


def small_d_sweep(eq_kind: EqKind, d_max: int, k_max: int, n_max: int) -> dict[int, list[SolutionRecord]]:
    """Independent oracle: walk every nonsquare d <= d_max from its fundamental solution."""
    if d_max > 10 ** 4:
        raise ValueError("small_d_sweep is meant for d <= 10^4")
    sums = PadovanSums(n_max)
    out = {}
    for d in range(2, d_max + 1):
        if is_square(d):
            continue
        recs = _records_for(d, eq_kind, k_max, sums)
        if _qualifies(recs):
            out[d] = recs
    return out


# -- theorem lists ------------------------------------------------------------------

# (label, value or None when only the representation is given, representations)
STATED_LISTS = {
    "unit-plus": {
        2: [(1, 3, [(6, 0), (5, 3)]), (2, 17, [(12, 3)])],
        3: [(1, 2, [(3, 0), (3, 3)]), (2, 7, [(9, 0), (7, 6)]), (3, 26, [(13, 8)])],
        6: [(1, 5, [(8, 0), (7, 3), (6, 5)]), (2, 49, [(16, 0), (15, 12), (14, 13)])],
        15: [(1, 4, [(7, 0), (6, 3), (5, 5)]), (2, 31, [(14, 6)])],
        110: [(1, 21, [(13, 0), (12, 8), (11, 10)]), (2, 881, [(26, 17), (25, 22)])],
        483: [(1, 22, [(13, 3)]), (2, 967, [(26, 20), (25, 23)])],
    },
    "unit-minus": {
        2: [(1, 1, [(3, 0)]), (2, 7, [(9, 0), (8, 5), (7, 6)]), (3, 41, [(15, 7), (14, 10), (13, 12)])],
        5: [(1, 2, [(5, 0), (3, 3)]), (2, 38, [(15, 3)])],
        10: [(1, 3, [(6, 0), (5, 3)]), (2, 117, [(19, 6)])],
        17: [(1, 4, [(7, 0), (6, 3), (5, 5)]), (2, None, [(22, 6)])],
    },
    "quad-plus": {
        3: [(1, 4, [(7, 0), (6, 3), (5, 5)]), (2, 14, [(11, 5), (10, 8)]), (3, 52, [(16, 6)])],
        5: [(1, 3, [(6, 0), (5, 3)]), (2, 7, [(9, 0), (7, 6)]), (3, 18, [(12, 5)])],
        21: [(1, 5, [(8, 0), (7, 3), (6, 5)]), (2, 23, [(13, 5), (12, 9)]), (3, 2525, [(30, 11)])],
    },
    "quad-minus": {
        2: [(1, 2, [(5, 0), (3, 3)]), (2, 14, [(11, 5), (10, 8)])],
        5: [(1, 1, [(3, 0)]), (2, 4, [(7, 0), (6, 3), (5, 5)]), (3, 11, [(10, 5), (9, 7)]),
            (4, 29, [(14, 3)])],
    },
}

STATED_D = {"unit-plus": {2, 3, 6, 15, 110, 483}, "unit-minus": {2, 5, 10, 17},
            "quad-plus": {3, 5, 21}, "quad-minus": {2, 5}}


@dataclass
class TheoremReport:
    kind: str
    d_stated: set
    d_found: set
    d_flagged: set  # non-squarefree d found, same unit as a squarefree one
    matches: list = field(default_factory=list)
    mismatches: list = field(default_factory=list)
    errata: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.d_stated == self.d_found and not self.mismatches

    def as_dict(self) -> dict:
        return {"kind": self.kind, "ok": self.ok, "d_stated": sorted(self.d_stated),
                "d_found": sorted(self.d_found), "d_flagged_nonsquarefree": sorted(self.d_flagged),
                "matches": self.matches, "mismatches": self.mismatches, "errata": self.errata}


def compare_with_stated(kind: EqKind, found: dict[int, list[SolutionRecord]]) -> TheoremReport:
    """Diff computed solution lists against the encoded theorem lists.

    A listed representation that is arithmetically wrong is an erratum; a
    valid listed representation or value missing from the computation is a
    mismatch.  Valid representations the lists omit are errata too.
    """
    slug = kind.slug
    squarefree = {d for d in found if is_squarefree(d)}
    rep = TheoremReport(slug, STATED_D[slug], squarefree, set(found) - squarefree)
    for d in sorted(STATED_D[slug] | squarefree):
        recs = found.get(d, [])
        by_value = {r.x_value: r for r in recs}
        stated = STATED_LISTS[slug].get(d, [])
        if not stated:
            rep.mismatches.append(f"d={d}: found but not stated")
            continue
        if not recs:
            rep.mismatches.append(f"d={d}: stated but not found")
            continue
        seen_values = set()
        for label, value, pairs in stated:
            if value is None:
                value = padovan(pairs[0][0]) + padovan(pairs[0][1])
                rep.errata.append(f"d={d} x_{label}: value omitted, P_{pairs[0][0]}+P_{pairs[0][1]} = {value}")
            valid = [p for p in pairs if padovan(p[0]) + padovan(p[1]) == value]
            for p in pairs:
                if p not in valid:
                    rep.errata.append(f"d={d} x_{label}={value}: listed P_{p[0]}+P_{p[1]} = "
                                      f"{padovan(p[0]) + padovan(p[1])}")
            seen_values.add(value)
            r = by_value.get(value)
            if r is None:
                rep.mismatches.append(f"d={d}: stated value {value} not found")
                continue
            missing = [p for p in valid if p not in r.representations]
            if missing:
                rep.mismatches.append(f"d={d} x={value}: stated {missing} not found")
            extra = [p for p in r.representations if p not in pairs]
            if extra:
                rep.errata.append(f"d={d} x={value}: list omits {extra}")
            if r.ordinal != label:
                rep.errata.append(f"d={d} x={value}: labelled x_{label}, solution number {r.ordinal}")
            rep.matches.append(f"d={d} x={value}")
        for v in sorted(set(by_value) - seen_values):
            rep.mismatches.append(f"d={d}: found value {v} not stated")
    return rep


def verify_theorems(found_by_kind: dict[str, dict[int, list[SolutionRecord]]]) -> dict[str, TheoremReport]:
    return {slug: compare_with_stated(EqKind.parse(slug), found) for slug, found in found_by_kind.items()}
