import numpy as np
import pytest

from pellpad.contfrac import is_square
from pellpad.padovan import padovan
from pellpad.pell import EqKind
from pellpad.search import (
    SolutionRecord,
    compare_with_stated,
    q_search,
    scan_final,
    small_d_sweep,
)
from sympy.ntheory.factor_ import core

KINDS = ["unit-plus", "unit-minus", "quad-plus", "quad-minus"]


def _brute_d(kind: EqKind, d_max: int, n_max: int) -> set:
    """d with two distinct positive solutions x (y >= 1) that are Padovan sums, by scanning y."""
    P = [padovan(i) for i in range(n_max + 1)]
    sums = np.array(sorted({a + b for a in P for b in P}), dtype=np.int64)
    top = int(sums[-1])
    out = set()
    y = np.arange(1, top + 1, dtype=np.int64)
    for d in range(2, d_max + 1):
        if is_square(d):
            continue
        x2 = d * y * y + kind.rhs
        ok = (x2 > 0) & (x2 <= top * top)
        x = np.rint(np.sqrt(x2[ok].astype(np.float64))).astype(np.int64)
        x = x[x * x == x2[ok]]
        if len(set(np.intersect1d(x, sums).tolist())) >= 2:
            out.add(d)
    return out


@pytest.mark.parametrize("slug", KINDS)
def test_sweep_matches_brute_force(slug):
    kind = EqKind.parse(slug)
    assert set(small_d_sweep(kind, 80, 60, 36)) == _brute_d(kind, 80, 36)


def test_small_examples():
    um = small_d_sweep(EqKind.parse("unit-minus"), 20, 6, 80)
    assert set(um) == {2, 5, 10, 17}
    qm = small_d_sweep(EqKind.parse("quad-minus"), 10, 6, 80)
    assert {d for d in qm if core(d) == d} == {2, 5}
    up = small_d_sweep(EqKind.parse("unit-plus"), 10, 3, 80)
    assert 7 not in up
    second = up[2][1]
    assert second.x_value == 17 and (12, 3) in second.representations
    six = up[6]
    assert six[0].representations == ((8, 0), (7, 3), (6, 5))


def test_record_rejects_wrong_representation():
    kind = EqKind.parse("unit-plus")
    SolutionRecord(2, kind, 2, 2, 17, ((12, 3),))
    with pytest.raises(ValueError):
        SolutionRecord(2, kind, 2, 2, 17, ((13, 3),))


def test_q_search_hits_are_sums():
    from pellpad.pell import Family, q_closed_form
    for h in q_search(Family.UNIT, 40, 11):
        assert q_closed_form(h.x1, Family.UNIT, h.sign, h.k) == padovan(h.n) + padovan(h.m)


def test_scan_final_agrees_with_sweep():
    kind = EqKind.parse("unit-minus")
    box = {"n_max": 60, "k_max": 8}
    found = scan_final(kind, box, [])
    ref = small_d_sweep(kind, 1000, 8, 60)
    assert {d: v for d, v in found.items() if d <= 1000} == ref


def test_compare_flags_errata_and_mismatches():
    kind = EqKind.parse("unit-minus")
    rep = compare_with_stated(kind, small_d_sweep(kind, 20, 6, 80))
    assert rep.ok
    assert any("d=2 x_3=41" in e for e in rep.errata)
    rep = compare_with_stated(kind, {})
    assert not rep.ok and "d=2: stated but not found" in rep.mismatches
