"""The double Dirichlet series Z(s, w; psi, psi') in its regions of convergence.

Three representations of the same function:

* ``direct``:   zeta_2(2s+2w-1) sum_{d odd} L_2(s, chi_d psi) psi'(d) d^-w
* ``region1``:  zeta_2(2s+2w-1) sum_{d0 odd squarefree}
                L_2(s, chi_d0 psi) psi'(d0) zeta_2(2w) / (d0^w L_2(s+2w, chi_d0 psi))
* ``swapped``:  zeta_2(2s+2w-1) sum_{n odd} L_2(w, chi~_n psi') psi(n) n^-s

The 16-vector is ordered by ``characters.pair_index``.  Truncated tails are
bounded by a majorant |summand| <= K d^(e - Re w), where the exponent e
depends on the real part of the L-function argument (``majorant_exponent``)
and K is measured on the upper half of the summation range.  The exponent
is empirical (no Lindelof-type input), and the output metadata says so.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .analytic_kernels import PoleError
from .characters import CharIndex, pair_index, psi_array, squarefree_parts
from .lfunctions import LCache, Method, l2_values, zeta

__all__ = [
    "Rep", "ZVector", "TruncationPlan", "RegionMargins", "ConvergenceError",
    "NoRepresentationError", "zeta2", "majorant_exponent", "a_priori_tail",
    "choose_rep", "z_direct", "z_region1", "z_swapped", "z_vector",
    "z_components", "DEFAULT_CACHE",
]

DEFAULT_CACHE = LCache()
POLAR_GUARD = 1e-3


class ConvergenceError(RuntimeError):
    """The certified tail exceeds the plan's tolerance."""


class NoRepresentationError(ValueError):
    """No convergent representation applies at this point."""


class Rep(str, enum.Enum):
    DIRECT = "direct"
    REGION1 = "region1"
    SWAPPED = "swapped"
    CONTINUED = "continued"
    CRITICAL = "critical"


@dataclass(frozen=True)
class TruncationPlan:
    """d_max / n_max cut the d- and n-sums; tail_bound is the largest
    certified tail (majorant bound) a result may carry."""

    d_max: int = 20000
    n_max: int = 20000
    tail_bound: float = 1e-4

    def __post_init__(self):
        if self.d_max < 3 or self.n_max < 3:
            raise ValueError("truncation caps must be at least 3")
        if not self.tail_bound > 0:
            raise ValueError("tail_bound must be positive")


@dataclass(frozen=True)
class RegionMargins:
    """Predicates deciding which representation is used at a point."""

    direct_s: float = 1.1       # Re s >= direct_s
    direct_w: float = 1.35      # Re w >= direct_w
    region1_w: float = 1.1      # Re w > region1_w
    region1_sum: float = 1.6    # Re s + Re w > region1_sum


@dataclass
class ZVector:
    point: tuple[complex, complex]
    values: np.ndarray
    rep: Rep
    err: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex).reshape(16)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("ZVector values must be finite")
        if not self.err >= 0:
            raise ValueError("ZVector.err must be nonnegative")

    def component(self, psi, psi2) -> complex:
        return complex(self.values[pair_index(CharIndex.parse(psi), CharIndex.parse(psi2))])

    def as_matrix(self) -> np.ndarray:
        """values reshaped to [psi, psi']."""
        return self.values.reshape(4, 4)


# ---------------------------------------------------------------------------
# zeta_2 and majorants

def zeta2(z) -> complex:
    """(1 - 2^-z) zeta(z)."""
    z = complex(z)
    if abs(z - 1) < 1e-12:
        raise PoleError("zeta_2 has a pole at z = 1", z)
    if abs(z - 1) < 1e-2:
        # (1 - 2^-z) zeta(z) = (1-2^-z)/(z-1) + (1-2^-z)(zeta(z) - 1/(z-1));
        # the regular part of zeta is gamma + O(z-1)
        e = z - 1
        f = -np.expm1(-z * math.log(2))
        stieltjes = (0.5772156649015329, -0.07281584548367672, -0.009690363192872318,
                     0.002053834420303346)
        reg = sum((-1) ** k * g * e ** k / math.factorial(k) for k, g in enumerate(stieltjes))
        return complex(f / e + f * reg)
    return complex(-np.expm1(-z * math.log(2)) * zeta(z))


def majorant_exponent(sigma: float) -> float:
    """e with |L_2(sigma + it, chi_d psi)| <= K d^e used for tail bounds."""
    if sigma > 1:
        return 0.05
    if sigma >= 0:
        return (1 - sigma) / 2 + 0.05
    return 0.5 - sigma + 0.05


def _tail_sum(D: int, expo: float) -> float:
    """sum over odd d > D of d^expo, bounded by an integral (expo < -1)."""
    if expo >= -1:
        return math.inf
    return 0.5 * D ** (1 + expo) / (-1 - expo)


def a_priori_tail(rep: Rep, s: complex, w: complex, plan: TruncationPlan) -> float:
    """Tail majorant with K = 1; depends on Re s, Re w only."""
    if rep is Rep.DIRECT or rep is Rep.REGION1:
        return _tail_sum(plan.d_max, majorant_exponent(s.real) - w.real)
    if rep is Rep.SWAPPED:
        return _tail_sum(plan.n_max, majorant_exponent(w.real) - s.real)
    raise ValueError(f"no a-priori tail for {rep}")


def _predicates(s: complex, w: complex, m: RegionMargins) -> list[Rep]:
    out = []
    if s.real >= m.direct_s and w.real >= m.direct_w:
        out.append(Rep.DIRECT)
    if w.real > m.region1_w and s.real + w.real > m.region1_sum:
        out.append(Rep.REGION1)
    if s.real > m.region1_w and s.real + w.real > m.region1_sum:
        out.append(Rep.SWAPPED)
    return out


def choose_rep(s, w, plan: TruncationPlan | None = None,
               margins: RegionMargins | None = None) -> Rep | None:
    """First of direct, region1, swapped whose predicate holds and whose
    a-priori tail is within the plan; None if none applies."""
    s, w = complex(s), complex(w)
    plan = plan or TruncationPlan()
    margins = margins or RegionMargins()
    for rep in _predicates(s, w, margins):
        if a_priori_tail(rep, s, w, plan) <= plan.tail_bound:
            return rep
    return None


# ---------------------------------------------------------------------------
# the three sums

def _l2_table(s, N, psis, cache):
    """{psi: (d, values, errors)} for odd d <= N."""
    out = {}
    for p in psis:
        out[p] = l2_values(s, N, p, Method.AFE, cache, tol=math.inf)
    return out


def _measured_K(d, summand_abs, expo_e, N):
    """max over the upper half of |summand| / d^e."""
    upper = d > N // 2
    if not np.any(upper):
        upper = np.ones_like(d, dtype=bool)
    return float(np.max(summand_abs[upper] / d[upper] ** expo_e))


def _sum_direct(s, w, psis, plan, cache):
    N = plan.d_max
    tab = _l2_table(s, N, psis, cache)
    e = majorant_exponent(s.real)
    vals = np.zeros((4, 4), dtype=complex)
    errs = np.zeros((4, 4))
    tails = np.zeros((4, 4))
    for p, (d, lv, le) in tab.items():
        dw = np.exp(-w * np.log(d))
        adw = np.abs(dw)
        K = _measured_K(d, np.abs(lv), e, N)
        tail = K * _tail_sum(N, e - w.real)
        for q in CharIndex:
            sgn = psi_array(q, d)
            vals[p, q] = np.sum(lv * sgn * dw)
            errs[p, q] = np.sum(le * adw)
            tails[p, q] = tail
    return vals, errs, tails


def _sum_region1(s, w, psis, plan, cache):
    N = plan.d_max
    d0_all, d1_all = squarefree_parts(max(N, 3))
    tab = _l2_table(s, N, psis, cache)
    tab2 = _l2_table(s + 2 * w, N, psis, cache)
    z2w = zeta2(2 * w)
    e = majorant_exponent(s.real)
    vals = np.zeros((4, 4), dtype=complex)
    errs = np.zeros((4, 4))
    tails = np.zeros((4, 4))
    for p in psis:
        d, lv, le = tab[p]
        _, lv2, le2 = tab2[p]
        sf = d1_all[d] == 1
        d, lv, le, lv2, le2 = d[sf], lv[sf], le[sf], lv2[sf], le2[sf]
        coef = lv * z2w / lv2
        cerr = (le + np.abs(lv) * le2 / np.abs(lv2)) * abs(z2w) / np.abs(lv2)
        dw = np.exp(-w * np.log(d))
        adw = np.abs(dw)
        K = _measured_K(d, np.abs(coef), e, N)
        tail = K * _tail_sum(N, e - w.real)
        for q in CharIndex:
            sgn = psi_array(q, d)
            vals[p, q] = np.sum(coef * sgn * dw)
            errs[p, q] = np.sum(cerr * adw)
            tails[p, q] = tail
    return vals, errs, tails


def _sum_swapped(s, w, psis2, plan, cache):
    """psis2 are the psi' needed; L_2(w, chi~_n psi') uses psi' psi_-1^[n=3 (4)]."""
    N = plan.n_max
    need = sorted({int(q) ^ k for q in psis2 for k in (0, 1)})
    tab = _l2_table(w, N, [CharIndex(k) for k in need], cache)
    e = majorant_exponent(w.real)
    vals = np.zeros((4, 4), dtype=complex)
    errs = np.zeros((4, 4))
    tails = np.zeros((4, 4))
    n = tab[CharIndex(need[0])][0]
    three = (n % 4) == 3
    ns = np.exp(-s * np.log(n))
    ans = np.abs(ns)
    for q in psis2:
        _, la, ea = tab[CharIndex(int(q))]
        _, lb, eb = tab[CharIndex(int(q) ^ 1)]
        lv = np.where(three, lb, la)
        le = np.where(three, eb, ea)
        K = _measured_K(n, np.abs(lv), e, N)
        tail = K * _tail_sum(N, e - s.real)
        for p in CharIndex:
            sgn = psi_array(p, n)
            vals[p, q] = np.sum(lv * sgn * ns)
            errs[p, q] = np.sum(le * ans)
            tails[p, q] = tail
    return vals, errs, tails


_SUMS = {Rep.DIRECT: _sum_direct, Rep.REGION1: _sum_region1, Rep.SWAPPED: _sum_swapped}


def _guard_poles(s, w, rep, psis):
    if rep is Rep.REGION1 and CharIndex.PSI_1 in psis and abs(s - 1) < POLAR_GUARD:
        raise PoleError("polar line s=1 (trivial psi)", s)
    if rep is Rep.SWAPPED and abs(w - 1) < POLAR_GUARD:
        raise PoleError("polar line w=1", w)


def z_components(s, w, rep: Rep | str, plan: TruncationPlan | None = None,
                 pairs=None, cache: LCache | None = DEFAULT_CACHE) -> ZVector:
    """Evaluate the requested components with a fixed representation.

    ``pairs`` is an iterable of (psi, psi') (default: all 16); components
    not requested are returned as zero.  Raises ConvergenceError if any
    requested component's certified tail exceeds ``plan.tail_bound``.
    """
    s, w = complex(s), complex(w)
    rep = Rep(rep)
    plan = plan or TruncationPlan()
    if pairs is None:
        pairs = [(p, q) for p in CharIndex for q in CharIndex]
    pairs = [(CharIndex.parse(p), CharIndex.parse(q)) for p, q in pairs]
    if rep is Rep.SWAPPED:
        psis = sorted({q for _, q in pairs})
    else:
        psis = sorted({p for p, _ in pairs})
    _guard_poles(s, w, rep, sorted({p for p, _ in pairs}))
    pref = zeta2(2 * s + 2 * w - 1)
    vals, errs, tails = _SUMS[rep](s, w, psis, plan, cache)
    out = np.zeros(16, dtype=complex)
    comp_err = np.zeros(16)
    comp_tail = np.zeros(16)
    for p, q in pairs:
        k = pair_index(p, q)
        out[k] = pref * vals[p, q]
        comp_tail[k] = abs(pref) * tails[p, q]
        comp_err[k] = abs(pref) * errs[p, q] + comp_tail[k]
    worst = float(comp_tail.max())
    if not worst <= plan.tail_bound:
        raise ConvergenceError(f"{rep.value}: certified tail {worst:.3g} exceeds "
                               f"tail_bound {plan.tail_bound:.3g} at (s,w)=({s}, {w})")
    meta = {
        "tail": worst,
        "component_err": comp_err,
        "majorant_exponent": majorant_exponent((w if rep is Rep.SWAPPED else s).real),
        "majorant": "empirical",
        "d_max": plan.d_max if rep is not Rep.SWAPPED else plan.n_max,
    }
    return ZVector((s, w), out, rep, float(comp_err.max()), meta)


def _single(rep, s, w, psi, psi2, plan, cache):
    z = z_components(s, w, rep, plan, [(psi, psi2)], cache)
    return z.component(psi, psi2)


def z_direct(s, w, psi, psi2, plan: TruncationPlan | None = None,
             cache: LCache | None = DEFAULT_CACHE) -> complex:
    """zeta_2(2s+2w-1) sum_{d odd <= d_max} L_2(s, chi_d psi) psi'(d) d^-w."""
    s, w = complex(s), complex(w)
    if s.real < 0.5:
        raise NoRepresentationError("z_direct needs Re s >= 1/2")
    return _single(Rep.DIRECT, s, w, psi, psi2, plan, cache)


def z_region1(s, w, psi, psi2, plan: TruncationPlan | None = None,
              cache: LCache | None = DEFAULT_CACHE) -> complex:
    """Sum over squarefree d0 with the closed-form square-part factor."""
    s, w = complex(s), complex(w)
    m = RegionMargins()
    if not (w.real > m.region1_w and s.real + w.real > m.region1_sum):
        raise NoRepresentationError(f"({s}, {w}) is outside the region1 domain")
    return _single(Rep.REGION1, s, w, psi, psi2, plan, cache)


def z_swapped(s, w, psi, psi2, plan: TruncationPlan | None = None,
              cache: LCache | None = DEFAULT_CACHE) -> complex:
    """zeta_2(2s+2w-1) sum_{n odd <= n_max} L_2(w, chi~_n psi') psi(n) n^-s."""
    s, w = complex(s), complex(w)
    m = RegionMargins()
    if not (s.real > m.region1_w and s.real + w.real > m.region1_sum):
        raise NoRepresentationError(f"({s}, {w}) is outside the swapped domain")
    return _single(Rep.SWAPPED, s, w, psi, psi2, plan, cache)


def z_vector(s, w, plan: TruncationPlan | None = None,
             cache: LCache | None = DEFAULT_CACHE,
             margins: RegionMargins | None = None) -> ZVector:
    """All 16 components with one representation (see ``choose_rep``)."""
    s, w = complex(s), complex(w)
    plan = plan or TruncationPlan()
    rep = choose_rep(s, w, plan, margins)
    if rep is None:
        raise NoRepresentationError(
            f"no convergent representation at (s,w)=({s}, {w}); use continue_z")
    return z_components(s, w, rep, plan, None, cache)
