import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from pellpad.bigreal import BigReal, constants, log, sqrt
from pellpad.contfrac import expand_until
from pellpad.reduction import (
    BDInstance,
    EpsilonNonpositive,
    HypothesisViolated,
    LinearFormData,
    LLLInstance,
    ThetaTooSmall,
    bd_reduce,
    gl_resolve,
    gram_schmidt_norms2,
    height_algebraic,
    height_rational,
    homogeneous_reduce,
    lll_lower_bound,
    lll_reduce_basis,
    matveev_bound,
    matveev_constant,
)


def _oracle_height(coeffs):
    mpmath.mp.dps = 50
    roots = mpmath.polyroots(coeffs, maxsteps=200, extraprec=200)
    return (mpmath.log(abs(coeffs[0])) + sum(mpmath.log(max(1, abs(r))) for r in roots)) / (len(coeffs) - 1)


@pytest.mark.parametrize("coeffs", [(23, -46, 24, -8), (23, -23, 6, -1), (1, 0, -1, -1), (1, -2, -1), (3, 0, 0, -7)])
def test_height_against_polyroots(coeffs):
    h = height_algebraic(coeffs)
    oracle = _oracle_height(coeffs)
    assert abs((mpmath.mpf(h.mid.numerator) / h.mid.denominator) - oracle) < mpmath.mpf(10) ** -40


def test_height_rational():
    mpmath.mp.dps = 50
    h = height_rational(-8, 23)
    assert abs((mpmath.mpf(h.mid.numerator) / h.mid.denominator) - mpmath.log(23)) < mpmath.mpf(10) ** -40


def test_matveev_constant_formula():
    c = matveev_constant(3, 6)
    ref = mpmath.mpf(1.4) * 30 ** 6 * 3 ** 4.5 * 36 * (1 + mpmath.log(6))
    assert abs(float(c.mid) / float(ref) - 1) < 1e-12


def test_matveev_data_checks():
    with pytest.raises(ValueError):
        LinearFormData(2, 3, (1,), 10)
    with pytest.raises(ValueError):
        LinearFormData(1, 3, (Fraction(1, 10),), 10)
    b = matveev_bound(LinearFormData(2, 3, (1, 1), 10))
    assert b.lower() > 0


@given(st.integers(1, 6), st.integers(10 ** 6, 10 ** 12))
def test_gl_resolve_is_an_upper_bound(r, H):
    H = max(H, (4 * r * r) ** r + 1)
    L = gl_resolve(r, H)
    x = float(L.upper())
    assert x / math.log(x) ** r >= H


def test_gl_resolve_hypothesis():
    with pytest.raises(HypothesisViolated):
        gl_resolve(2, 10)


def _irr(k):
    return lambda p: sqrt(BigReal.exact(k, p))


@pytest.mark.parametrize("seed", [2, 3, 5, 7, 11])
def test_bd_bound_exhaustive(seed):
    """No u <= M with |u tau - v + mu| < A B^-w has w above the certified bound."""
    M = 60
    tau, mu = _irr(seed), (lambda p: sqrt(BigReal.exact(seed + 13, p)) / 7)
    A, B = 3, 2
    out = bd_reduce(BDInstance(tau, mu, A, B, M))
    t, m = math.sqrt(seed), math.sqrt(seed + 13) / 7
    for u in range(0, M + 1):
        x = u * t + m
        val = abs(x - round(x))
        w = math.floor(math.log(A / val, B))
        assert w <= out.certified_bound


def test_bd_fails_for_integer_mu():
    with pytest.raises(EpsilonNonpositive):
        bd_reduce(BDInstance(_irr(2), 1, 3, 2, 1000), max_attempts=10)


def test_bd_best_of_never_worse():
    inst = BDInstance(_irr(3), lambda p: sqrt(BigReal.exact(5, p)), 3, 2, 10 ** 8)
    assert bd_reduce(inst, best_of=4).certified_bound <= bd_reduce(inst).certified_bound


@pytest.mark.parametrize("k", [2, 3, 7, 10])
def test_homogeneous_bound_exhaustive(k):
    M = 500
    out = homogeneous_reduce(_irr(k), 3, 2, M)
    t = math.sqrt(k)
    for u in range(1, M + 1):
        val = abs(u * t - round(u * t))
        assert math.floor(math.log(3 / val, 2)) <= out.certified_bound


def test_lll_basis_properties():
    rows = [[1, 0, 0, 12345], [0, 1, 0, 67891], [0, 0, 1, 43210], [0, 0, 0, 99991]]
    red = lll_reduce_basis(rows)
    g = gram_schmidt_norms2(red)
    assert all(Fraction(3, 4) * g[i] <= 2 * g[i + 1] for i in range(len(g) - 1))
    # same lattice: equal Gram determinant
    assert math.prod(gram_schmidt_norms2(rows)) == math.prod(g)


@given(st.integers(1, 10 ** 6), st.integers(1, 10 ** 6))
def test_lll_bound_two_terms_exhaustive(a, b):
    X = (20, 20)
    tau = (lambda p: log(BigReal.exact(a + 1, p)), lambda p: log(BigReal.exact(b + 2, p)))
    try:
        out = lll_lower_bound(LLLInstance(2, tau, X, 10 ** 12))
    except ThetaTooSmall:
        return
    ta, tb = math.log(a + 1), math.log(b + 2)
    best = min(abs(x * ta + y * tb) for x in range(-20, 21) for y in range(-20, 21) if x or y)
    assert best >= float(out.certified_bound.lower()) * (1 - 1e-9)


def test_lll_instance_checks():
    with pytest.raises(ValueError):
        LLLInstance(2, (1, 2), (10, 10), 100)


def test_alpha_form_bounds_are_positive():
    c = constants()
    tau = (lambda p: constants(p).log_alpha, lambda p: constants(p).log_2a)
    out = lll_lower_bound(LLLInstance(2, tau, (10 ** 6, 10 ** 6), 10 ** 40))
    assert out.certified_bound.lower() > 0
    assert c.log_alpha.lower() > 0


def test_bd_with_expansion_reuse():
    tau = _irr(2)
    cf = expand_until(tau, 6 * 10 ** 6, extra=50)
    a = bd_reduce(BDInstance(tau, _irr(3), 2, 2, 10 ** 6), cf)
    b = bd_reduce(BDInstance(tau, _irr(3), 2, 2, 10 ** 6))
    assert a.certified_bound == b.certified_bound
