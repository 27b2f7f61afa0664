import mpmath
import pytest

from pellpad.pell import EqKind, Family
from pellpad.pipeline import (
    Convention,
    absolute_bounds,
    degenerate_shift,
    error_constants,
    first_reduction,
    psi_power_shift,
)

mpmath.mp.dps = 120
ALPHA = mpmath.findroot(lambda x: x ** 3 - x - 1, 1.3)
A = (ALPHA ** 2 + ALPHA) / (3 * ALPHA ** 2 - 1)


def _is_alpha_power(x):
    j = mpmath.nint(mpmath.log(x) / mpmath.log(ALPHA))
    return int(j) if abs(x - ALPHA ** j) < mpmath.mpf(10) ** -100 else None


def test_degenerate_shift_against_numeric():
    for lam in range(1, 300):
        assert degenerate_shift(lam) == _is_alpha_power(1 + ALPHA ** -lam)
    assert [lam for lam in range(1, 300) if degenerate_shift(lam)] == [1, 4]


@pytest.mark.parametrize("family,c", [(Family.UNIT, 2), (Family.QUAD, 1)])
def test_psi_power_shift_against_numeric(family, c):
    for w in range(1, 300):
        assert psi_power_shift(family, w) == _is_alpha_power(c * A * (1 + ALPHA ** -w))
    hits = [w for w in range(1, 300) if psi_power_shift(family, w) is not None]
    assert hits == ([11] if family is Family.QUAD else [])


def _padovan_error(n, shift):
    P = [0, 1, 1]
    while len(P) <= n:
        P.append(P[-2] + P[-3])
    return abs(P[n] - A * ALPHA ** (n - shift))


@pytest.mark.parametrize("family", list(Family))
def test_certified_constants_are_sound(family):
    E = error_constants(family, Convention.CERTIFIED)
    assert E.shift == 1
    # the error P_n - a alpha^(n-1) decays like |beta|^n, so it stays below 1/2 past small n
    assert all(_padovan_error(n, E.shift) < 0.5 for n in range(5, 400))
    assert E.cutoff_log.lower() > 0


@pytest.mark.parametrize("slug", ["unit-minus", "quad-minus"])
def test_bound_chain_is_monotone(slug):
    kind = EqKind.parse(slug)
    ab = absolute_bounds(kind)
    fr = first_reduction(kind)
    assert all(ab.checks.values())
    cyc = [v[0] for k, v in sorted(fr.checks.items()) if k.endswith("_n2")]
    assert ab.symbols["n2"] > cyc[0] > cyc[1]
    assert ab.symbols["n1"] > fr.symbols["n1"]
