"""The finiteness argument end to end: absolute bounds, two reduction cycles,
final reduction, and the exhaustive search inside the final box.

Two conventions are supported.  REFERENCE replays the reference error
constants, seeds and lattice minima, evaluating exponential inequalities with
alpha rounded up to 1.33 as the reference cutoffs are; it exists to
reproduce and audit the reference integers.  CERTIFIED uses the exact Binet
exponent n - 1, error constants derived by ball arithmetic, its own bounds as
seeds, and log(alpha) throughout.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from . import __version__
from .bigreal import BigReal, constants, floor_upper, log, sqrt
from .contfrac import expand_until, legendre_bound
from .pell import EqKind, Family, UnitValue, unit_value
from .reduction import (
    BDInstance,
    LLLInstance,
    ReductionOutcome,
    bd_reduce,
    gl_resolve,
    height_algebraic,
    homogeneous_reduce,
    lll_lower_bound,
    matveev_constant,
)
from .search import primitive_units, q_search, scan_final, compare_with_stated

PREC = 256
F = Fraction


class Convention(enum.Enum):
    REFERENCE = "reference"
    CERTIFIED = "certified"


class MismatchError(AssertionError):
    """Computed solution lists disagree with the theorem statements."""

    def __init__(self, report):
        super().__init__(f"{report.kind}: {report.mismatches}")
        self.report = report


def _num(text: str) -> Fraction:
    return Fraction(text)


# Reference figures: REFERENCE seeds and the comparison targets.
TARGETS = {
    Family.UNIT: {
        "good1": "8.30e17", "good2": "9.84e14", "lemma1": "8.2e32", "H": "4.64e137",
        "n2_abs": "4.87e165", "n1_abs": "1.76e63",
        "cycles": [
            {"M": "4.87e165", "X": "5.4e166", "C_base": 20, "aM": 2107, "aM_index": 282,
             "m4": "2e-671", "m5": "8e-1342", "aM_eq": 306269, "eq_lams": (321,),
             "lam": 2714, "nu": 6760, "n1_lt": 12172, "n1_eq": 2730, "log_delta": 3475, "n2": "3.36e44"},
            {"M": "3.36e44", "X": "3.36e44", "C_base": 10, "aM": 373, "aM_index": 54,
             "m4": "5.33e-184", "m5": "2e-366", "aM_eq": 206961, "eq_lams": (175, 205),
             "lam": 752, "nu": 1846, "n1_lt": 3318, "n1_eq": 772, "log_delta": None, "n2": "5e42"},
        ],
        "k1": 3125, "bd1_M": "5e42", "bd2_M": "5e43", "n2_final": 408, "k_final": 133, "rows": 17,
        "b_t": {(2, 1): 374, (4, 1): 371, (5, 1): 382, (21, 1): 374, (22, 1): 372, (47, 1): 373,
                (1, -1): 375, (2, -1): 377, (3, -1): 374, (4, -1): 375, (5, -1): 374, (9, -1): 373,
                (10, -1): 377, (17, -1): 384, (42, -1): 373, (47, -1): 370, (63, -1): 371},
    },
    Family.QUAD: {
        "good1": "7.40e17", "good2": "9.52e14", "lemma1": "7.03e32", "H": "3.67e134",
        "n2_abs": "3.07e162", "n1_abs": "4.76e61",
        "cycles": [
            {"M": "3.07e162", "X": "3.99e163", "C_base": 20, "aM": 1028, "aM_index": 189,
             "m4": "8e-660", "m5": "9.9e-1317", "aM_eq": 2818130, "eq_lams": (2466,),
             "lam": 2661, "nu": 6643, "n1_lt": 11948, "n1_eq": 2690, "log_delta": 3410, "n2": "2.76e44"},
            {"M": "2.76e44", "X": "2.76e44", "C_base": 10, "aM": 397, "aM_index": 55,
             "m4": "8.6e-183", "m5": "8e-365", "aM_eq": 155013, "eq_lams": (125, 160),
             "lam": 738, "nu": 1838, "n1_lt": 3304, "n1_eq": 774, "log_delta": None, "n2": "4e42"},
        ],
        "k1": 3108, "bd1_M": "4e42", "bd2_M": "4e43", "n2_final": 414, "k_final": 248, "rows": 25,
        "b_t": {(2, -1): 379, (4, 1): 374, (1, -1): 369, (10, 1): 372, (6, -1): 373, (3, -1): 379,
                (8, -1): 376, (5, 1): 377, (10, -1): 372, (12, 1): 381, (7, -1): 376, (25, 1): 371,
                (9, 1): 373, (22, -1): 380, (13, 1): 372, (88, 1): 371, (15, 1): 371, (30, -1): 371,
                (19, -1): 372, (44, 1): 374, (58, -1): 382, (88, -1): 376, (178, -1): 369,
                (2570, 1): 385, (3480, -1): 378},
    },
}

# Minimal polynomials of psi (2a for UNIT, a for QUAD), highest coefficient first.
PSI_MINPOLY = {Family.UNIT: (23, -46, 24, -8), Family.QUAD: (23, -23, 6, -1)}
N0 = 100  # the absolute chain assumes n2 >= N0


# -- error constants ----------------------------------------------------------------

@dataclass(frozen=True)
class ErrorConstants:
    """Coefficients of the exponential error terms, all upper bounds.

    |Gamma1| < gam1 alpha^-n, |Gamma2| < gam2 alpha^-(n-m) with n read as the
    Binet exponent; g3, g4, g5 multiply n2 in the cross-product forms; leg3
    and leg5 are g3/log(alpha) and g5/log(alpha) as used with Legendre.
    """
    convention: Convention
    family: Family
    shift: int
    lam1: BigReal
    gam1: BigReal
    lam2: BigReal
    gam2: BigReal
    g3: BigReal
    g4: BigReal
    g5: BigReal
    leg3: BigReal
    leg5: BigReal
    coef_bound: int  # |b_i| <= coef_bound * n2 in the cross-product forms
    c_delta: BigReal  # log(delta) <= n1 * cutoff_log + c_delta
    c_final: BigReal  # k log(delta_min) <= n_max * cutoff_log + c_final
    cutoff_log: BigReal
    n_lo: int  # smallest Binet exponent covered by the absolute chain

    def as_dict(self) -> dict:
        out = {}
        for k, v in self.__dict__.items():
            out[k] = v.to_string(12) if isinstance(v, BigReal) else (v.value if isinstance(v, enum.Enum) else v)
        return out


def _g(x: BigReal) -> BigReal:
    """-log(1 - x)/x, an increasing function on (0, 1)."""
    return -log(1 - x) / x


def _ball(x, prec=PREC) -> BigReal:
    return x if isinstance(x, BigReal) else BigReal.exact(Fraction(x), prec)


def delta_min(family: Family, prec: int = PREC) -> BigReal:
    """Smallest unit of each family: 1 + sqrt 2, resp. the golden ratio."""
    if family is Family.UNIT:
        return 1 + sqrt(BigReal.exact(2, prec))
    return (1 + sqrt(BigReal.exact(5, prec))) / 2


def _lam2_sup(c, tail_over_delta: BigReal, m_hi: int = 200) -> BigReal:
    """sup over m >= 3 of (P_m + tail/delta_min + 2|b| alpha^-(m~+1)/2) / (a alpha^m~), m~ = m - 1."""
    from .padovan import padovan

    al, a, b = c.alpha, c.a, c.abs_b
    rs = sqrt(al)
    best = None
    for m in range(3, m_hi + 1):
        mt = m - 1
        r = (padovan(m) + tail_over_delta + 2 * b / rs ** (mt + 1)) / (a * al ** mt)
        best = r if best is None or r.upper() > best.upper() else best
    # beyond m_hi: P_m <= a alpha^m~ + 2|b| alpha^(-m~/2), so the ratio is below 1 + tiny
    tail = 1 + (4 * b + tail_over_delta) / (a * al ** (m_hi - 1))
    return best if best.upper() > tail.upper() else tail


@lru_cache(maxsize=8)
def error_constants(family: Family, convention: Convention, prec: int = PREC) -> ErrorConstants:
    c = constants(prec)
    la, al = c.log_alpha, c.alpha
    two = BigReal.exact(2, prec)
    if convention is Convention.REFERENCE:
        ref = {Family.UNIT: ("1.5", "3", "2.5", "5", "10", "8", "6", "36", "21", 11, 6, 2),
               Family.QUAD: ("2.5", "10", "3", "6", "12", "16", "20", "42", "70", 13, 5, 2)}[family]
        v = [_ball(F(x), prec) for x in ref[:9]]
        cut = log(BigReal.exact(F(133, 100), prec))
        final_exp = 3 if family is Family.UNIT else 1  # delta^k <= 2 alpha^(n+3), rho^k <= 2 alpha^(n+1)
        return ErrorConstants(convention, family, 0, *v, ref[9], log(_ball(ref[10], prec)),
                              final_exp * cut + log(two), cut, 10)
    # CERTIFIED: P_n = a alpha^(n-1) + e_n with |e_n| <= 2|b| alpha^(-(n-1)/2)
    tail = F(1, 2) if family is Family.UNIT else F(1)
    tod = tail / delta_min(family, prec)
    rs = sqrt(al)
    n_lo = 10
    nt0, mt0 = 3, 2  # n >= 4, m >= 3
    lam1 = (tod + 2 * c.abs_b * (1 / rs ** nt0 + 1 / rs ** mt0)) / c.a
    gam1 = lam1 * _g(lam1 / al ** (n_lo - 1))
    lam2 = _lam2_sup(c, tod)
    gam2 = lam2 * _g(lam2 / al ** 10)  # n - m >= 10
    g3 = 2 * gam2
    g4 = gam1 + gam2
    g5 = gam1 * (1 + al * al)  # n1 <= n2 + 2
    log_psi = abs(c.log_2a if family is Family.UNIT else c.log_a)
    gmax = g5 if g5.upper() > g4.upper() else g4
    gmax = gmax if gmax.upper() > g3.upper() else g3
    coef = floor_upper((log_psi + log(two) + gmax / al ** 10) / la) + 1
    # delta^k < 2 x_k <= 4 alpha^(n-1) (UNIT); rho^k < X_k + 1 <= 3 alpha^(n-1) (QUAD)
    c_delta = log(BigReal.exact(4 if family is Family.UNIT else 3, prec))
    return ErrorConstants(convention, family, 1, lam1, gam1, lam2, gam2, g3, g4, g5,
                          g3 / la, g5 / la, coef, c_delta, c_delta, la, n_lo)


# -- certificates ---------------------------------------------------------------------

@dataclass
class BoundCertificate:
    eq_kind: EqKind
    stage: str
    symbols: dict
    provenance: list = field(default_factory=list)
    constants_used: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    complete: bool = True

    def as_dict(self) -> dict:
        def enc(v):
            if isinstance(v, bool) or v is None:
                return v
            if isinstance(v, int):
                return str(v)
            if isinstance(v, BigReal):
                return v.to_string(12)
            if isinstance(v, Fraction):
                return str(v)
            if isinstance(v, dict):
                return {str(k): enc(x) for k, x in v.items()}
            if isinstance(v, (list, tuple)):
                return [enc(x) for x in v]
            if isinstance(v, ReductionOutcome):
                return {"kind": v.kind, "inputs": enc(v.inputs), "bound": enc(v.certified_bound),
                        "success": v.success, "details": enc(v.details)}
            return v if isinstance(v, (str, float)) else str(v)

        return {"schema": 1, "tool_version": __version__, "precision_bits": PREC,
                "eq_kind": self.eq_kind.slug, "stage": self.stage, "complete": self.complete,
                "symbols": enc(self.symbols), "checks": enc(self.checks),
                "constants_used": enc(self.constants_used), "provenance": enc(self.provenance)}


def _psi_log(c, family: Family) -> BigReal:
    return c.log_2a if family is Family.UNIT else c.log_a


def _kind(family: Family) -> EqKind:
    return EqKind(family, 1)


# -- absolute bounds -------------------------------------------------------------------

def absolute_bounds(eq_kind: EqKind, convention: Convention = Convention.REFERENCE) -> BoundCertificate:
    """Matveev chain: Gamma1, Gamma2 -> n < L1 (log n)^2 (log delta)^2; Gamma3..Gamma5 -> n1
    polynomial in log n2; then the log-power resolver."""
    return _absolute(eq_kind.family, convention).with_kind(eq_kind)


class _Cert(BoundCertificate):
    def with_kind(self, kind: EqKind) -> BoundCertificate:
        return BoundCertificate(kind, self.stage, self.symbols, self.provenance, self.constants_used,
                                self.checks, self.complete)


@lru_cache(maxsize=4)
def _absolute(family: Family, convention: Convention) -> _Cert:
    c = constants(PREC)
    E = error_constants(family, convention)
    la = c.log_alpha
    l2 = log(BigReal.exact(2, PREC))
    h_psi = height_algebraic(PSI_MINPOLY[family], PREC)
    A6, A3 = 6 * h_psi, 3 * h_psi
    n_lo = E.n_lo - E.shift
    kappa_n = 1 + 1 / log(BigReal.exact(n_lo, PREC))
    min_log_delta = log(delta_min(family))
    log_nlo = log(BigReal.exact(n_lo, PREC))

    def pos_log(x):
        v = log(x)
        return v if v.lower() > 0 else BigReal.exact(0, PREC)

    # Gamma1: t=4, D=6, A = (3 log delta, 6 h(psi), 2 log alpha, (2 log alpha + 6 log 2)(n-m))
    G1p = matveev_constant(4, 6) * kappa_n * 3 * A6 * (2 * la) * (2 * la + 6 * l2)
    G1 = (G1p + pos_log(E.lam1) / (log_nlo * min_log_delta)) / la
    # Gamma2: t=3, D=6, A = (3 log delta, 6 h(psi), 2 log alpha)
    G2p = matveev_constant(3, 6) * kappa_n * 3 * A6 * (2 * la)
    G2 = (G2p + pos_log(E.lam2) / (log_nlo * min_log_delta)) / la
    L1 = G1 * G2
    # cross products: D=3, B = coef_bound * n2, n2 >= N0
    logN0 = log(BigReal.exact(N0, PREC))
    kappa_B = 1 + (1 + log(BigReal.exact(E.coef_bound, PREC))) / logN0
    A_eta = la + 3 * l2  # 3 h(1 + alpha^-lambda) <= lambda (log alpha + 3 log 2)
    L3 = (matveev_constant(2, 3) * kappa_B * A3 * la + 1 + log(2 * E.g3) / logN0) / la
    L4 = (matveev_constant(3, 3) * kappa_B * A3 * la * A_eta + 1 + log(2 * E.g4) / logN0) / la
    L5 = (matveev_constant(4, 3) * kappa_B * A3 * la * A_eta * A_eta + 1 + log(2 * E.g5) / logN0) / la
    K = L5 * L3 * L3 * L4  # n1 < K (log n2)^4
    Dk = K * la + E.c_delta / logN0 ** 4  # log delta < Dk (log n2)^4
    H = L1 * Dk * Dk
    gl = gl_resolve(10, H)
    n2 = floor_upper(gl) + E.shift
    n1 = floor_upper(K * log(BigReal.exact(n2, PREC)) ** 4) + E.shift
    sym = {"n2": n2, "n1": n1}
    consts = {"good1": G1, "good2": G2, "L1": L1, "L3": L3, "L4": L4, "L5": L5, "K": K,
              "log_delta_coef": Dk, "H": H, "h_psi": h_psi, "kappa_n": kappa_n, "kappa_B": kappa_B}
    prov = [ReductionOutcome("matveev", {"t": 4, "D": 6}, G1, True),
            ReductionOutcome("matveev", {"t": 3, "D": 6}, G2, True),
            ReductionOutcome("gl", {"r": 10, "H": H.to_string(6)}, gl, True)]
    pub = TARGETS[family]
    checks = {}
    if convention is Convention.REFERENCE:
        for key, ours in (("good1", G1), ("good2", G2)):
            checks[key] = ours.upper() <= _num(pub[key]) * F(3, 2)
        checks["n2_abs"] = n2 <= _num(pub["n2_abs"]) * F(21, 20)
        checks["n1_abs"] = n1 <= _num(pub["n1_abs"]) * F(21, 20)
    return _Cert(_kind(family), "absolute", sym, prov, consts, checks)


# -- degenerate lambda -------------------------------------------------------------------

def _alpha_power(n: int) -> tuple[int, int, int]:
    """alpha^n = u alpha^2 + v alpha + w with integers (u, v, w), n >= 0."""
    u, v, w = 0, 0, 1
    for _ in range(n):
        u, v, w = v, w + u, u  # alpha^3 = alpha + 1
    return u, v, w


def degenerate_shift(lam: int) -> int | None:
    """j with 1 + alpha^-lam = alpha^j, if any (then log(1 + alpha^-lam) = j log alpha).

    Such j satisfies 0 < j <= 2 because 1 + alpha^-lam < 2 < alpha^3; the
    identity alpha^(lam+j) - alpha^lam = 1 is checked exactly in Z[alpha].
    """
    base = _alpha_power(lam)
    for j in (1, 2):
        top = _alpha_power(lam + j)
        if (top[0] - base[0], top[1] - base[1], top[2] - base[2]) == (0, 0, 1):
            return j
    return None


def _zmul(x, y):
    """Product in Z[alpha] with elements written (c0, c1, c2) = c0 + c1 alpha + c2 alpha^2."""
    c = [0] * 5
    for i, xi in enumerate(x):
        for j, yj in enumerate(y):
            c[i + j] += xi * yj
    for k in (4, 3):  # alpha^k = alpha^(k-2) + alpha^(k-3)
        c[k - 2] += c[k]
        c[k - 3] += c[k]
    return tuple(c[:3])


def _zpow(n: int):
    u, v, w = _alpha_power(n)
    return (w, v, u)


def psi_power_shift(family: Family, w: int) -> int | None:
    """j with psi (1 + alpha^-w) = alpha^j, if any; then mu_w = -j is an integer.

    psi = c (alpha^2 + alpha)/(3 alpha^2 - 1) with c = 2 (UNIT) or 1 (QUAD);
    the candidate j comes from a float estimate and is checked exactly.
    """
    import math

    c = 2 if family is Family.UNIT else 1
    al = 1.324717957244746
    j = round(math.log(c * (al * al + al) / (3 * al * al - 1) * (1 + al ** -w)) / math.log(al))
    e = max(0, -(w + j))
    one_plus = tuple(x + y for x, y in zip(_zpow(w), (1, 0, 0)))
    lhs = _zmul(_zmul((0, c, c), one_plus), _zpow(e))
    rhs = _zmul((-1, 0, 3), _zpow(w + j + e))
    return j if lhs == rhs else None


# -- first reduction ------------------------------------------------------------------------

def _log1p_alpha(lam: int):
    def f(p):
        c = constants(p)
        return log(1 + 1 / c.alpha ** lam)
    return f


def _log_alpha(p):
    return constants(p).log_alpha


def _log_psi_fn(family: Family):
    return lambda p: _psi_log(constants(p), family)


_C_EXP = {2: 4, 3: 5, 4: 9}


def gamma4_lll(family: Family, lam: int, M: int, coef: int, base: int) -> ReductionOutcome:
    """Lower bound on |Gamma4| for n_i - m_i = lam; coefficient bounds (coef M, M, M).

    log(psi) takes the last lattice slot; when 1 + alpha^-lam is a power of
    alpha the form collapses to two terms.
    """
    j = degenerate_shift(lam)
    if j is None:
        taus, X = (_log_alpha, _log1p_alpha(lam), _log_psi_fn(family)), (coef * M, M, M)
    else:
        taus, X = (_log_alpha, _log_psi_fn(family)), ((coef + j) * M, M)
    t = len(taus)
    out = lll_lower_bound(LLLInstance(t, taus, X, (base * max(X)) ** _C_EXP[t]))
    out.inputs.update({"form": "gamma4", "lambda": lam, "degenerate": j})
    return out


def gamma5_lll(family: Family, lam: int, chi: int, M: int, coef: int, base: int) -> ReductionOutcome:
    """Lower bound on |Gamma5| for the pair (lam, chi), lam < chi."""
    taus, shift = [_log_alpha], 0
    for v in (lam, chi):
        j = degenerate_shift(v)
        if j is None:
            taus.append(_log1p_alpha(v))
        else:
            shift += j
    taus.append(_log_psi_fn(family))
    t = len(taus)
    X = ((coef + shift) * M,) + (M,) * (t - 1)
    out = lll_lower_bound(LLLInstance(t, tuple(taus), X, (base * max(X)) ** _C_EXP[t]))
    out.inputs.update({"form": "gamma5", "lambda": lam, "chi": chi})
    return out


def _tau_eq(family: Family, lam: int):
    def f(p):
        c = constants(p)
        return abs(_psi_log(c, family) + log(1 + 1 / c.alpha ** lam)) / c.log_alpha
    return f


def _tau(family: Family):
    def f(p):
        c = constants(p)
        return abs(_psi_log(c, family)) / c.log_alpha
    return f


def _cutoff(Y: BigReal, L: BigReal) -> int:
    """Largest integer x with alpha^x < Y, evaluated with log base L."""
    return floor_upper(log(Y) / L)


def lambda_sample(lam_max: int) -> list[int]:
    return sorted({v for v in (1, 4, 100, 321, 1000, lam_max) if 1 <= v <= lam_max})


def pair_sample(lam_max: int, chi_max: int) -> list[tuple[int, int]]:
    pairs = {(1, 4), (2, 3), (lam_max // 2, chi_max // 2), (lam_max, chi_max)}
    return sorted((a, b) for a, b in pairs if 1 <= a < b <= chi_max and a <= lam_max)


def run_cycle(family: Family, convention: Convention, M: int, cycle: int, sample: bool = True,
              lll: bool = True) -> dict:
    """One reduction cycle with n2 <= M; returns every intermediate cutoff."""
    E = error_constants(family, convention)
    L = E.cutoff_log
    pub = TARGETS[family]["cycles"][cycle]
    ref = convention is Convention.REFERENCE
    base = pub["C_base"]
    Mb = BigReal.exact(M, PREC)
    out = {"M": M, "outcomes": [], "complete": not sample}
    # (a) Legendre on tau
    cf = expand_until(_tau(family), M, source="tau")
    lb = legendre_bound(cf, M)
    lam_max = max(_cutoff(E.leg3 * (lb.aM + 2) * Mb * Mb, L), 9)
    out.update(legendre=lb, lam=lam_max)
    # (b) Gamma4 over lambda
    lams = lambda_sample(lam_max) if sample else list(range(1, lam_max + 1))
    m4 = None
    if lll:
        for lam in lams:
            o = gamma4_lll(family, lam, M, E.coef_bound, base)
            out["outcomes"].append(o)
            m4 = o.certified_bound if m4 is None or o.certified_bound.upper() < m4.upper() else m4
    out["m4_ours"] = m4
    m4_used = _ball(_num(pub["m4"])) if ref else m4
    small = floor_upper(log(4 * E.g4 * Mb) / L)  # when g4 n2 alpha^-nu > 1/2
    nu = max(_cutoff(E.g4 * Mb / m4_used, L), small) if m4_used is not None else None
    out["nu"] = nu
    if m4 is not None:
        out["nu_ours"] = max(_cutoff(E.g4 * Mb / m4, L), small)
    # (c) Gamma5 for lambda < chi; Legendre on tau_lambda for lambda = chi
    m5 = None
    if lll and nu is not None:
        for lam, chi in pair_sample(lam_max, nu):
            o = gamma5_lll(family, lam, chi, M, E.coef_bound, base)
            out["outcomes"].append(o)
            m5 = o.certified_bound if m5 is None or o.certified_bound.upper() < m5.upper() else m5
    out["m5_ours"] = m5
    m5_used = _ball(_num(pub["m5"])) if ref else m5
    g5M = E.g5 * Mb
    n1_lt = _cutoff(g5M / m5_used, L) if m5_used is not None else None
    out["n1_lt"] = n1_lt
    if m5 is not None:
        out["n1_lt_ours"] = _cutoff(g5M / m5, L)
    eq_lams = (sorted(set(lambda_sample(lam_max)) | {v for v in pub["eq_lams"] if v <= lam_max})
               if sample else list(range(1, lam_max + 1)))
    aM_eq, arg = 0, None
    for lam in eq_lams:
        b = legendre_bound(expand_until(_tau_eq(family, lam), M, source=f"tau_{lam}"), M)
        if b.aM > aM_eq:
            aM_eq, arg = b.aM, (lam, b.argmax, b.N)
    out.update(aM_eq=aM_eq, aM_eq_at=arg)
    if ref and sample:
        aM_eq = max(aM_eq, pub["aM_eq"])
    n1_eq = _cutoff(E.leg5 * (aM_eq + 2) * Mb * Mb, L)
    out["n1_eq"] = n1_eq
    n1 = max(v for v in (nu, n1_lt, n1_eq) if v is not None)
    out["n1"] = n1
    # (d) log delta bound and the log-power resolver with r = 2
    # the reference log(delta) bound uses log(alpha) here, not the rounded cutoff
    log_delta = n1 * (constants(PREC).log_alpha if ref else L) + E.c_delta
    L1 = _ball(_num(TARGETS[family]["lemma1"])) if ref else _absolute(family, convention).constants_used["L1"]
    H = L1 * log_delta * log_delta
    n2 = floor_upper(gl_resolve(2, H)) + E.shift
    out.update(log_delta=log_delta, H=H, n2=n2)
    out["k1"] = floor_upper((n1 * L + E.c_final) / log(delta_min(family)))
    return out


@lru_cache(maxsize=8)
def _first(family: Family, convention: Convention, sample: bool, lll: bool = True) -> _Cert:
    ref = convention is Convention.REFERENCE
    pub = TARGETS[family]
    M = int(_num(pub["n2_abs"])) if ref else _absolute(family, convention).symbols["n2"]
    cycles = []
    for i in range(2):
        cyc = run_cycle(family, convention, M, i, sample, lll)
        cycles.append(cyc)
        M = int(_num(pub["cycles"][i]["n2"])) if ref else min(M, cyc["n2"])
    last = cycles[-1]
    n1 = last["n1"]
    k1 = pub["k1"] if ref else last["k1"]
    sym = {"n1": n1, "n2": M, "k1": k1, "lambda": last["lam"], "nu": last["nu"],
           "cycles": [{k: v for k, v in c.items() if k != "outcomes"} for c in cycles]}
    prov = [o for c in cycles for o in c["outcomes"]]
    checks = {}
    if ref:
        for i, (c, p) in enumerate(zip(cycles, pub["cycles"])):
            checks[f"cycle{i + 1}_lam"] = (c["lam"], p["lam"])
            checks[f"cycle{i + 1}_nu"] = (c["nu"], p["nu"])
            checks[f"cycle{i + 1}_n1_lt"] = (c["n1_lt"], p["n1_lt"])
            checks[f"cycle{i + 1}_n2"] = (c["n2"], int(_num(p["n2"])))
    # the fourfold lattice stage and (in sample mode) the threefold one are sampled
    return _Cert(_kind(family), "first_reduction", sym, prov, {}, checks, complete=False)


def first_reduction(eq_kind: EqKind, cert: BoundCertificate | None = None,
                    convention: Convention = Convention.REFERENCE, sample: bool = True) -> BoundCertificate:
    return _first(eq_kind.family, convention, sample).with_kind(eq_kind)


# -- final reduction ---------------------------------------------------------------------------

def _tau_unit(x1: int, eps: int, family: Family):
    def f(p):
        return log(unit_value(x1, family, eps, p).delta) / constants(p).log_alpha
    return f


def _mu(family: Family, w: int | None):
    def f(p):
        c = constants(p)
        v = _psi_log(c, family)
        if w is not None:
            v = v + log(1 + 1 / c.alpha ** w)
        return -v / c.log_alpha
    return f


def bd_row(family: Family, unit: tuple[int, int], convention: Convention, M1: int, M2: int,
           best_of: int = 3) -> dict:
    """Both Baker-Davenport passes for one candidate unit.

    Stage 1 keeps the first admissible convergent; stage 2 keeps the best
    of the first best_of admissible ones for each w.
    """
    E = error_constants(family, convention)
    la = lambda p: constants(p).log_alpha
    alpha = lambda p: constants(p).alpha
    tau = _tau_unit(*unit, family)
    cf1 = expand_until(tau, 6 * M1, extra=50, source=f"unit{unit}")
    A1 = lambda p: error_constants(family, convention).gam2 / la(p)
    s1 = bd_reduce(BDInstance(tau, _mu(family, None), A1, alpha, M1), cf1)
    b_t = max(s1.certified_bound, 9)  # the gam2 estimate needs n - m >= 10
    cf2 = cf1 if M2 == M1 else expand_until(tau, 6 * M2, extra=50, source=f"unit{unit}")
    A2 = lambda p: error_constants(family, convention).gam1 / la(p)
    worst, at, homogeneous = 0, None, []
    for w in range(1, b_t + 1):
        if psi_power_shift(family, w) is not None:
            # mu_w is an integer, so the form is homogeneous in (k, n)
            o = homogeneous_reduce(tau, A2, alpha, M2, cf2)
            homogeneous.append(w)
        else:
            o = bd_reduce(BDInstance(tau, _mu(family, w), A2, alpha, M2), cf2, best_of=best_of)
        if o.certified_bound > worst:
            worst, at = o.certified_bound, w
    n2 = max(worst, E.n_lo - 1) + E.shift
    return {"unit": unit, "stage1": s1, "b_t": s1.certified_bound, "n2": n2, "argmax_w": at,
            "homogeneous_w": homogeneous}


@lru_cache(maxsize=8)
def _final(family: Family, convention: Convention, sample: bool) -> dict:
    ref = convention is Convention.REFERENCE
    pub = TARGETS[family]
    first = _first(family, convention, sample)
    n1, k1 = first.symbols["n1"], first.symbols["k1"]
    hits = q_search(family, n1, k1)
    units = primitive_units(family, hits)
    if ref:
        M1, M2 = int(_num(pub["bd1_M"])), int(_num(pub["bd2_M"]))
    else:
        M1 = M2 = first.symbols["n2"]
    rows = [bd_row(family, u, convention, M1, M2) for u in units]
    E = error_constants(family, convention)
    n_max = max(r["n2"] for r in rows)
    n_max = max(n_max, n1 if n1 < n_max else n_max)
    k_max = floor_upper((n_max * E.cutoff_log + E.c_final) / log(delta_min(family))) \
        if ref else floor_upper(((n_max - 1) * E.cutoff_log + E.c_final) / log(delta_min(family)))
    box = {"k_max": k_max, "n_max": n_max}
    return {"hits": hits, "units": units, "rows": rows, "box": box, "n1": n1, "k1": k1, "M": (M1, M2)}


def final_reduction(eq_kind: EqKind, cert: BoundCertificate | None = None,
                    convention: Convention = Convention.REFERENCE, sample: bool = True):
    """Candidate fundamental units and the final search box."""
    fin = _final(eq_kind.family, convention, sample)
    units = [unit_value(x, eq_kind.family, e) for x, e in fin["units"]]
    return units, dict(fin["box"])


def final_certificate(eq_kind: EqKind, convention: Convention, sample: bool = True) -> BoundCertificate:
    fin = _final(eq_kind.family, convention, sample)
    pub = TARGETS[eq_kind.family]
    rows = [{"unit": list(r["unit"]), "b_t": r["b_t"], "n2": r["n2"], "w": r["argmax_w"],
             "index": r["stage1"].details["index"], "eps": float(r["stage1"].details["eps_lower"])}
            for r in fin["rows"]]
    sym = {"n2": fin["box"]["n_max"], "k2": fin["box"]["k_max"], "rows": rows}
    checks = {"rows": (len(rows), pub["rows"]), "n2": (fin["box"]["n_max"], pub["n2_final"]),
              "k2": (fin["box"]["k_max"], pub["k_final"])}
    return BoundCertificate(eq_kind, "final_reduction", sym, [r["stage1"] for r in fin["rows"]],
                            {"M": list(fin["M"])}, checks)


# -- end to end ------------------------------------------------------------------------------

def certify(eq_kind: EqKind, convention: Convention = Convention.REFERENCE, sample: bool = True,
            strict: bool = True) -> dict:
    """Every stage, then the search in the final box and the theorem comparison."""
    a = absolute_bounds(eq_kind, convention)
    f = first_reduction(eq_kind, a, convention, sample)
    units, box = final_reduction(eq_kind, f, convention, sample)
    fin = final_certificate(eq_kind, convention, sample)
    found = scan_final(eq_kind, box, units)
    for recs in found.values():
        for r in recs:
            for n, m in r.representations:
                assert n <= box["n_max"]
    report = compare_with_stated(eq_kind, found)
    if strict and not report.ok:
        raise MismatchError(report)
    chain = [a.symbols["n2"], f.symbols["n2"], fin.symbols["n2"]]
    if any(x < y for x, y in zip(chain, chain[1:])):
        raise AssertionError(f"n2 bounds not monotone: {chain}")
    return {"convention": convention.value, "sample": sample, "stages": [a, f, fin], "box": box,
            "candidates": [(u.x1, u.eps) for u in units], "solutions": found, "report": report}
