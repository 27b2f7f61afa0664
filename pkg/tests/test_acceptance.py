"""Acceptance criteria 1-10; each test records a pass/fail line for the run summary."""

import time
from fractions import Fraction

import numpy as np
import pytest

from pellpad.bigreal import BigReal, log
from pellpad.contfrac import expand, expand_until, legendre_bound
from pellpad.padovan import PadovanSums, binet_residual, growth_bounds_hold, padovan
from pellpad.pell import ALL_KINDS, Family, fundamental, q_closed_form, recover_d, solution_x
from pellpad.pipeline import (
    TARGETS,
    Convention,
    _absolute,
    _final,
    _first,
    _tau,
    certify,
    error_constants,
    gamma4_lll,
)
from pellpad.reduction import LLLInstance, gl_resolve, lll_lower_bound
from pellpad.search import STATED_D, small_d_sweep

UNIT, QUAD = Family.UNIT, Family.QUAD
REF = Convention.REFERENCE


# -- 1. Padovan suite ------------------------------------------------------------------

def test_c1_recurrence_and_listing(criterion):
    t = time.time()
    P = [padovan(n) for n in range(2004)]
    assert P[:3] == [0, 1, 1]
    assert all(P[n + 3] == P[n + 1] + P[n] for n in range(2000))
    assert P[19] == 114
    assert all(binet_residual(n, shift=1).holds for n in range(1, 2001))
    assert all(growth_bounds_hold(n, low=3, high=2) for n in range(5, 2001))
    assert time.time() - t < 5
    criterion(1, True, "recurrence, P19=114, Binet error in the exponent n-1 and growth a^(n-3)..a^(n-2) certified for n<=2000")


@pytest.mark.xfail(strict=True, reason="stated Binet error bound fails from n=3 (see decisions ledger)")
def test_c1_stated_binet_error(criterion):
    bad = [n for n in range(1, 2001) if not binet_residual(n).holds]
    criterion(1, not bad, f"stated Binet error |P_n - a alpha^n| < alpha^(-n/2) fails for {len(bad)} n, first {bad[:3]}")
    assert not bad


@pytest.mark.xfail(strict=True, reason="stated lower growth bound fails for n>=5 (see decisions ledger)")
def test_c1_stated_growth_bounds(criterion):
    bad = [n for n in range(4, 2001) if not growth_bounds_hold(n)]
    criterion(1, not bad, f"stated growth alpha^(n-2) <= P_n <= alpha^(n-1) fails for {len(bad)} n, first {bad[:3]}")
    assert not bad


# -- 2. Pell tables -------------------------------------------------------------------------

UNIT_ROWS = [  # (k1, x1, y1, d, sign)
    (2, 2, 1, 3, 1), (2, 3, 2, 2, 1), (2, 4, 1, 15, 1), (2, 5, 2, 6, 1), (2, 21, 2, 110, 1),
    (2, 22, 1, 483, 1), (2, 47, 4, 138, 1),
    (2, 1, 1, 2, -1), (2, 2, 1, 5, -1), (2, 3, 1, 10, -1), (2, 4, 1, 17, -1), (2, 5, 1, 26, -1),
    (2, 9, 1, 82, -1), (2, 10, 1, 101, -1), (2, 17, 1, 290, -1), (2, 42, 1, 1765, -1),
    (2, 47, 1, 2210, -1), (2, 63, 1, 3970, -1),
]
QUAD_ROWS = [
    (2, 3, 1, 5, 1), (2, 4, 2, 3, 1), (2, 5, 1, 21, 1), (3, 9, 1, 77, 1), (2, 10, 4, 6, 1),
    (2, 11, 3, 13, 1), (2, 12, 2, 35, 1), (2, 13, 1, 165, 1), (3, 15, 1, 221, 1), (2, 25, 3, 69, 1),
    (2, 44, 2, 483, 1), (2, 51, 7, 53, 1), (2, 88, 6, 215, 1), (2, 2570, 4, 412806, 1),
    (2, 1, 1, 5, -1), (2, 2, 2, 2, -1), (2, 3, 1, 13, -1), (2, 4, 2, 5, -1), (2, 6, 2, 10, -1),
    (2, 7, 1, 53, -1), (2, 8, 2, 17, -1), (2, 10, 2, 26, -1), (2, 11, 5, 5, -1), (2, 19, 1, 365, -1),
    (2, 22, 2, 122, -1), (2, 30, 2, 226, -1), (2, 58, 2, 842, -1), (2, 88, 2, 1937, -1),
    (2, 178, 2, 7922, -1), (2, 3480, 2, 3027601, -1),
]


def test_c2_pell_tables(criterion):
    t = time.time()
    sums = PadovanSums(3318)
    for fam, rows in ((UNIT, UNIT_ROWS), (QUAD, QUAD_ROWS)):
        for k, x, y, d, sign in rows:
            assert x * x - d * y * y == sign * fam.norm
            assert (d, y) in recover_d(x, fam, sign)
            f = fundamental(d, fam)
            assert any(solution_x(f, j) == x for j in range(1, 8))
            assert sums.contains(q_closed_form(x, fam, sign, k))
    assert len(UNIT_ROWS) == 18 and len(QUAD_ROWS) == 30
    assert time.time() - t < 10
    criterion(2, True, "all 18 UNIT rows (17 distinct units) and 30 QUAD rows reproduced by recover_d/fundamental")


# -- 3. continued fractions ---------------------------------------------------------------

def test_c3_continued_fractions(criterion):
    t = time.time()
    assert list(expand(_tau(UNIT), 24).quotients) == [1, 3, 3, 1, 11, 1, 2, 1, 1, 1, 3, 1, 1, 1, 2, 5, 1, 15, 2, 19, 1, 1, 2, 2]
    assert list(expand(_tau(QUAD), 6).quotients) == [1, 6, 2, 1, 18, 166]
    M1, M2 = int(Fraction("4.87e165")), int(Fraction("3.07e162"))
    lb = legendre_bound(expand_until(_tau(UNIT), M1), M1)
    lq = legendre_bound(expand_until(_tau(QUAD), M2), M2)
    assert (lb.aM, lb.argmax) == (2107, 282)
    assert (lq.aM, lq.argmax) == (1028, 189)
    assert time.time() - t < 120
    criterion(3, True, "tau and tau' heads; a(M)=2107 at 282, 1028 at 189")


# -- 4. cutoff chain ------------------------------------------------------------------------

def test_c4_unit_cutoffs(criterion):
    cyc = _first(UNIT, REF, True).symbols["cycles"]
    got = [c["lam"] for c in cyc]
    criterion(4, got == [2714, 752], f"UNIT lambda {got[0]} then {got[1]}")
    assert got == [2714, 752]


def test_c4_quad_cycle1(criterion):
    cyc = _first(QUAD, REF, True).symbols["cycles"]
    criterion(4, cyc[0]["lam"] == 2661, f"QUAD lambda' {cyc[0]['lam']} (cycle 1)")
    assert cyc[0]["lam"] == 2661


@pytest.mark.xfail(strict=True, reason="reference a(M)=397 at M=2.76e44 gives 751, not 738 (see decisions ledger)")
def test_c4_quad_cycle2(criterion):
    lam = _first(QUAD, REF, True).symbols["cycles"][1]["lam"]
    criterion(4, lam == 738, f"QUAD lambda' {lam} (cycle 2) vs reference 738")
    assert lam == 738


# -- 5. gl resolver ---------------------------------------------------------------------------

@pytest.mark.parametrize("H, target", [("4.64e137", "4.87e165"), ("3.67e134", "3.07e162")])
def test_c5_gl_resolve(criterion, H, target):
    b = gl_resolve(10, Fraction(H))
    rel = abs(b.mid / Fraction(target) - 1)
    ok = rel < Fraction(1, 100)
    criterion(5, ok, f"H={H} -> {b.to_string(4)} (reference {target}, off {float(rel):.2%})")
    assert ok


# -- 6. Matveev constants -----------------------------------------------------------------------

@pytest.mark.parametrize("fam", [UNIT, QUAD])
def test_c6_matveev(criterion, fam):
    c = _absolute(fam, REF)
    pub = TARGETS[fam]
    for key in ("good1", "good2"):
        assert c.constants_used[key].upper() <= Fraction(pub[key]) * Fraction(3, 2)
    assert c.symbols["n2"] <= Fraction(pub["n2_abs"]) * Fraction(21, 20)
    assert c.symbols["n1"] <= Fraction(pub["n1_abs"]) * Fraction(21, 20)
    criterion(6, True, f"{fam.value}: good1 {c.constants_used['good1'].to_string(3)}, good2 "
                       f"{c.constants_used['good2'].to_string(3)}, n2 {float(c.symbols['n2']):.3e}, "
                       f"n1 {float(c.symbols['n1']):.3e}")


# -- 7. Baker-Davenport tables ---------------------------------------------------------------------

@pytest.mark.parametrize("fam, n2_pub", [(UNIT, 408), (QUAD, 414)])
def test_c7_baker_davenport(criterion, fam, n2_pub):
    t = time.time()
    fin = _final(fam, REF, True)
    pub = TARGETS[fam]
    assert len(fin["rows"]) == pub["rows"]
    assert {r["unit"] for r in fin["rows"]} == set(pub["b_t"])
    for r in fin["rows"]:
        assert r["stage1"].success and r["stage1"].details["eps_lower"] > 0
        assert r["b_t"] <= pub["b_t"][r["unit"]] + 5
    n2 = fin["box"]["n_max"]
    ok = n2 <= n2_pub
    criterion(7, ok, f"{fam.value}: {len(fin['rows'])} rows, b_t within +5, n2 {n2} (reference {n2_pub}), "
                     f"{time.time() - t:.0f}s")
    assert ok


# -- 8. LLL stages ------------------------------------------------------------------------------------

def test_c8_lll_sampled(criterion):
    E = error_constants(UNIT, REF)
    M = int(Fraction("4.87e165"))
    mins = []
    for lam in (1, 100, 321, 1000, 2714):
        o = gamma4_lll(UNIT, lam, M, E.coef_bound, 20)
        assert o.certified_bound.lower() > 0
        mins.append(o.certified_bound)
    m4 = min(mins, key=lambda b: b.upper())
    nu = int((log(E.g4 * M / m4) / E.cutoff_log).upper())
    ok = nu <= 6760
    criterion(8, ok, f"sampled Gamma4 minimum {m4.to_string(3)}, implied nu {nu} <= 6760")
    assert ok


def test_c8_lll_soundness(criterion):
    rng = np.random.default_rng(7)
    for t_, X in ((2, (50, 50)), (3, (50, 50, 50))):
        for _ in range(3):
            tau = [BigReal.exact(Fraction(int(v), 10 ** 12), 256) for v in rng.integers(10 ** 11, 10 ** 12, t_)]
            C = (4 * max(X)) ** (t_ + 3)
            bound = lll_lower_bound(LLLInstance(t_, tuple(tau), X, C)).certified_bound.lower()
            fl = np.array([float(x.mid) for x in tau])
            grids = np.meshgrid(*[np.arange(-x, x + 1) for x in X], indexing="ij")
            vals = np.abs(sum(g * f for g, f in zip(grids, fl)))
            nonzero = np.any([g != 0 for g in grids], axis=0)
            assert vals[nonzero].min() >= float(bound) * (1 - 1e-9)
    criterion(8, True, "LLL lower bounds sound on synthetic forms, exhaustive over |x_i| <= 50")


# -- 9. theorem reproduction ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def certified():
    return {k.slug: certify(k, REF, sample=True, strict=False) for k in ALL_KINDS}


@pytest.mark.parametrize("slug", ["unit-plus", "unit-minus", "quad-minus"])
def test_c9_theorem_lists(criterion, certified, slug):
    rep = certified[slug]["report"]
    ok = rep.ok and rep.d_found == STATED_D[slug]
    criterion(9, ok, f"{slug}: d {sorted(rep.d_found)}, {len(rep.matches)} values match, "
                     f"{len(rep.errata)} list errata")
    assert ok


def test_c9_representation_examples(certified):
    def reps(slug, d, x):
        return next(r.representations for r in certified[slug]["solutions"][d] if r.x_value == x)

    assert {(26, 17), (25, 22)} <= set(reps("unit-plus", 110, 881))
    assert (30, 11) in reps("quad-plus", 21, 2525)
    assert (22, 6) in reps("unit-minus", 17, 268)


@pytest.mark.xfail(strict=True, reason="the +4 statement omits d=6, 13, 35, ... (see decisions ledger)")
def test_c9_quad_plus(criterion, certified):
    rep = certified["quad-plus"]["report"]
    ok = rep.ok
    criterion(9, ok, f"quad-plus: stated {sorted(rep.d_stated)}, found {sorted(rep.d_found)}")
    assert ok


@pytest.mark.parametrize("fam, k_pub, n_pub", [(UNIT, 133, 408), (QUAD, 248, 414)])
def test_c9_final_boxes(criterion, fam, k_pub, n_pub):
    box = _final(fam, REF, True)["box"]
    ok = box["k_max"] <= k_pub and box["n_max"] <= n_pub
    criterion(9, ok, f"{fam.value} box k2 {box['k_max']} <= {k_pub}, n {box['n_max']} <= {n_pub}")
    assert ok


# -- 10. oracle cross-check -------------------------------------------------------------------------------

@pytest.mark.parametrize("kind", ALL_KINDS, ids=lambda k: k.slug)
def test_c10_oracle_agreement(criterion, certified, kind):
    t = time.time()
    box = certified[kind.slug]["box"]
    found = {d: v for d, v in certified[kind.slug]["solutions"].items() if d <= 1000}
    sweep = small_d_sweep(kind, 1000, box["k_max"], box["n_max"])
    ok = found == sweep
    criterion(10, ok, f"{kind.slug}: {len(sweep)} d agree")
    assert ok
    assert time.time() - t < 300
