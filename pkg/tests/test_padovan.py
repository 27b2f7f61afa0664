import pytest
from hypothesis import given, strategies as st

from pellpad.padovan import (
    PadovanSums,
    binet_residual,
    canonical_index,
    growth_bounds_hold,
    padovan,
    padovan_table,
    representations,
)


def test_listing():
    assert padovan_table(19) == (0, 1, 1, 1, 2, 2, 3, 4, 5, 7, 9, 12, 16, 21, 28, 37, 49, 65, 86, 114)


def test_canonical_index():
    assert [canonical_index(n) for n in range(7)] == [0, 3, 3, 3, 5, 5, 6]


def test_representations_examples():
    assert representations(5, 50) == [(8, 0), (7, 3), (6, 5)]
    assert set(representations(881, 50)) == {(26, 17), (25, 22)}
    assert (30, 11) in representations(2525, 50)
    assert representations(8, 3) == []


@given(st.integers(0, 120), st.integers(0, 120))
def test_sums_agree_with_direct_table(n, m):
    n, m = max(n, m), min(n, m)
    x = padovan(n) + padovan(m)
    sums = PadovanSums(120)
    assert sums.contains(x)
    assert (canonical_index(n), canonical_index(m)) in representations(x, 120) or \
        padovan(canonical_index(n)) + padovan(canonical_index(m)) == x


def test_membership_against_brute_force():
    sums = PadovanSums(40)
    table = padovan_table(40)
    brute = {a + b for a in table for b in table}
    assert all(sums.contains(x) == (x in brute) for x in range(0, 5000))


def test_binet_shifted_form_holds():
    assert all(binet_residual(n, shift=1).holds for n in range(1, 300))


def test_stated_forms_fail():
    assert not binet_residual(3).holds
    assert not growth_bounds_hold(5)
    assert all(growth_bounds_hold(n, low=3, high=2) for n in range(5, 300))


def test_domain_errors():
    with pytest.raises(ValueError):
        binet_residual(0)
    with pytest.raises(ValueError):
        representations(-1, 10)
