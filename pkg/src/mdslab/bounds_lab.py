"""Empirical checks of the inequalities used for the growth and mean-square
bounds: Lemma 1 with exhaustive tuple counts, the quadratic large sieve,
the D- and Q-sums, growth-exponent scans and the mean-square integral.

All constants fitted here are empirical stand-ins; nothing is certified.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate

from .analytic_kernels import QuadratureError
from .characters import CharIndex, conductor_data, jacobi_table, psi_array
from .critical_line import CriticalEngine, analytic_conductor
from .lfunctions import LCache, Method, l2_values
from .zcore import DEFAULT_CACHE, TruncationPlan

__all__ = [
    "Bump", "bump", "smooth_step", "partition_piece", "Lemma1Instance",
    "pinned_lemma1_instances", "lemma1_lhs", "lemma1_rhs", "lemma1_tuple_count",
    "count1_shape", "count2_shape", "sieve_check", "SieveReport", "eval_D",
    "eval_D_cutoff", "q_sums", "bilinear_block_sum", "RangeCapError", "Slice",
    "GrowthSample", "GrowthFit", "growth_scan", "MeanSquareGrid", "mean_square",
    "fit_loglog", "SCAN_PLAN",
]

EPS = 0.05
RANGE_CAP = 2 ** 14
# scans only need a few digits; a shorter d-sum keeps them at desk scale
SCAN_PLAN = TruncationPlan(d_max=5000, n_max=5000, tail_bound=1e-3)


class RangeCapError(ValueError):
    pass


# ---------------------------------------------------------------------------
# smooth weights

def _psi0(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def smooth_step(x):
    """C-infinity step: 1 for x <= 1, 0 for x >= 2."""
    x = np.asarray(x, dtype=float)
    a = _psi0(2.0 - x)
    b = _psi0(x - 1.0)
    return a / (a + b)


@dataclass(frozen=True)
class Bump:
    """exp(1 - 1/(1 - r^2)) on the interval (lo, hi), r the rescaled offset
    from the midpoint; or a dyadic partition piece phi(x) - phi(2x)."""

    lo: float
    hi: float
    kind: str = "bump"

    @property
    def support(self) -> tuple[float, float]:
        return (self.lo, self.hi)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "partition":
            out = smooth_step(x) - smooth_step(2 * x)
            return np.where((x > self.lo) & (x < self.hi), out, 0.0)
        mid, half = (self.lo + self.hi) / 2, (self.hi - self.lo) / 2
        r = (x - mid) / half
        inside = np.abs(r) < 1
        out = np.zeros_like(x)
        out[inside] = np.exp(1 - 1 / (1 - r[inside] ** 2))
        return out

    def integral(self) -> float:
        return integrate.quad(lambda x: float(self(x)), self.lo, self.hi,
                              epsabs=1e-13, epsrel=1e-13, limit=200)[0]


def bump(lo: float = -2.0, hi: float = 2.0) -> Bump:
    return Bump(lo, hi)


def partition_piece() -> Bump:
    """phi(x) - phi(2x), supported on [1/2, 2]; its dyadic dilates sum to a
    smooth cutoff."""
    return Bump(0.5, 2.0, "partition")


# ---------------------------------------------------------------------------
# Lemma 1

@dataclass(frozen=True)
class Lemma1Instance:
    D: float
    N: float
    Y1: float
    Y2: float
    f: np.ndarray = field(compare=False, repr=False, default=None)
    W1: Bump = field(default_factory=bump)
    W2: Bump = field(default_factory=bump)

    def __post_init__(self):
        if not (self.D > 0 and self.N > 0 and self.Y1 >= 1 and self.Y2 >= 1):
            raise ValueError("need D, N > 0 and Y1, Y2 >= 1")
        d, n = self.d_range, self.n_range
        f = np.ones((d.size, n.size), dtype=complex) if self.f is None \
            else np.asarray(self.f, dtype=complex)
        if f.shape != (d.size, n.size):
            raise ValueError(f"f must have shape {(d.size, n.size)}")
        if np.any(np.abs(f) > 1 + 1e-12):
            raise ValueError("coefficients f(d, n) must have modulus <= 1")
        object.__setattr__(self, "f", f)

    @property
    def X(self) -> float:
        return self.Y1 * self.Y2 * self.D * self.N

    @property
    def d_range(self) -> np.ndarray:
        return _dyadic(self.D)

    @property
    def n_range(self) -> np.ndarray:
        return _dyadic(self.N)


def _dyadic(D: float) -> np.ndarray:
    """Integers d with D <= d < 2D."""
    return np.arange(math.ceil(D), math.ceil(2 * D), dtype=np.int64)


def pinned_lemma1_instances(seed: int = 20240611, count: int = 20) -> list[Lemma1Instance]:
    """Deterministic instance set with D, N <= 32 and Y1, Y2 <= 16."""
    rng = np.random.default_rng(seed)
    sizes = (1, 2, 4, 8, 16, 32)
    ys = (1, 2, 4, 8, 16)
    out = []
    for k in range(count):
        D = float(sizes[rng.integers(len(sizes))])
        N = float(sizes[rng.integers(len(sizes))])
        Y1 = float(ys[rng.integers(len(ys))])
        Y2 = float(ys[rng.integers(len(ys))])
        shape = (_dyadic(D).size, _dyadic(N).size)
        if k % 2 == 0:
            f = rng.choice([-1.0, 1.0], size=shape)
        else:
            f = np.exp(2j * np.pi * rng.random(shape))
        out.append(Lemma1Instance(D, N, Y1, Y2, f))
    return out


def _lemma1_grid(inst: Lemma1Instance, variant: str, nodes: int):
    t = np.linspace(-2 * inst.Y1, 2 * inst.Y1, nodes + 1)
    u = np.linspace(-2 * inst.Y2, 2 * inst.Y2, nodes + 1)
    ht, hu = t[1] - t[0], u[1] - u[0]
    logd = np.log(inst.d_range.astype(float))
    logn = np.log(inst.n_range.astype(float))
    F = inst.f
    if variant == "diri1":
        # sum f(d,n) n^-it d^-iu = E_u^T F E_t
        Et = np.exp(-1j * np.outer(logn, t))          # (n, t)
        Eu = np.exp(-1j * np.outer(logd, u))          # (d, u)
        S = Eu.T @ F @ Et                             # (u, t)
    else:
        # sum f(d,n) n^-iu d^{i(u+t)}: for each t, g(d) = f(d,n) d^{it}
        S = np.zeros((u.size, t.size), dtype=complex)
        Eun = np.exp(-1j * np.outer(u, logn))          # (u, n)
        Eud = np.exp(1j * np.outer(u, logd))           # (u, d)
        for j, tj in enumerate(t):
            G = F * np.exp(1j * tj * logd)[:, None]    # (d, n)
            S[:, j] = np.einsum("ud,dn,un->u", Eud, G, Eun)
    w = inst.W2(u / inst.Y2)[:, None] * inst.W1(t / inst.Y1)[None, :]
    return float(np.sum(w * np.abs(S) ** 2) * ht * hu)


def lemma1_lhs(inst: Lemma1Instance, variant: str = "diri1", nodes: int = 256,
               tol: float = 1e-6) -> float:
    """The weighted double integral of the Dirichlet polynomial, by the
    trapezoid rule (the weights vanish to all orders at the ends)."""
    if variant not in ("diri1", "diri2"):
        raise ValueError("variant must be 'diri1' or 'diri2'")
    if max(inst.D, inst.N) > 64:
        raise ValueError("Lemma 1 checks are limited to D, N <= 64")
    prev = _lemma1_grid(inst, variant, nodes)
    for _ in range(4):
        nodes *= 2
        cur = _lemma1_grid(inst, variant, nodes)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise QuadratureError(f"lemma1_lhs did not settle ({prev} vs {cur})")


def lemma1_rhs(inst: Lemma1Instance, variant: str = "diri1") -> float:
    """Bound shapes without the X^eps factor."""
    D, N, Y1, Y2 = inst.D, inst.N, inst.Y1, inst.Y2
    if variant == "diri1":
        return D * N * Y1 * Y2 * (1 + N / Y1) * (1 + D / Y2)
    return N * D * Y1 * Y2 + N * D * D * min(Y1, Y2) + N * N * D * Y1 + (N * D) ** 2


def lemma1_tuple_count(D: float, N: float, Y1: float, Y2: float,
                       eps: float = EPS) -> tuple[int, int, int]:
    """Exhaustive count of (d1, d2, n1, n2, a, b) with d_i ~ D, n_i ~ N,
    d1 = d2 + a, n2 d1 = n1 d2 + b, |a| <= D X^eps / Y1, |b| <= N D X^eps / Y2.

    Returns (total, #{n1 = n2}, #{n1 != n2}).
    """
    if max(D, N) > 64:
        raise ValueError("tuple counts are limited to D, N <= 64")
    X = Y1 * Y2 * D * N
    wa = D * X ** eps / Y1
    wb = N * D * X ** eps / Y2
    d = _dyadic(D)
    n = _dyadic(N)
    d1, d2 = np.meshgrid(d, d, indexing="ij")
    ok_a = np.abs(d1 - d2) <= wa
    d1, d2 = d1[ok_a], d2[ok_a]
    n1, n2 = np.meshgrid(n, n, indexing="ij")
    n1, n2 = n1.ravel(), n2.ravel()
    b = n2[None, :] * d1[:, None] - n1[None, :] * d2[:, None]
    ok = np.abs(b) <= wb
    eq = (n1 == n2)[None, :]
    total = int(ok.sum())
    same = int((ok & eq).sum())
    return total, same, total - same


def count1_shape(D, N, Y1, Y2, eps: float = EPS) -> float:
    X = Y1 * Y2 * D * N
    return X ** eps * N * D * (1 + D / max(Y1, Y2))


def count2_shape(D, N, Y1, Y2, eps: float = EPS) -> float:
    X = Y1 * Y2 * D * N
    return X ** eps * N * (1 + D / Y1) * (1 + N * D / Y2)


# ---------------------------------------------------------------------------
# large sieve

@dataclass
class SieveReport:
    mode: str
    params: dict
    values: list
    ratios: list
    max_ratio: float
    bound: float
    passed: bool


def _sequence(kind: str, size: int, rng: np.random.Generator, eps: float) -> np.ndarray:
    k = np.arange(1, size + 1, dtype=float)
    base = k ** (-0.5 + eps) if kind.endswith("eps") else k ** -0.5
    if kind.startswith("random"):
        return base * rng.choice([-1.0, 1.0], size=size)
    if kind.startswith("power"):
        return base
    raise ValueError(f"unknown sequence kind {kind!r}")


def bilinear_sum(a: np.ndarray, b: np.ndarray) -> complex:
    """sum_{m <= M odd} sum_{n <= N} a_m b_n (n/m); a, b indexed from 1."""
    M, N = a.size, b.size
    m = np.arange(1, M + 1, 2)
    n = np.arange(1, N + 1)
    J = jacobi_table(m, n).astype(float)
    return complex(a[m - 1] @ J @ b)


def sieve_check(mode: str, params: dict | None = None, seed: int = 1,
                cache: LCache | None = DEFAULT_CACHE) -> SieveReport:
    """Ratio checks for the quadratic large sieve and the first moment.

    bilinear: params M, N, trials, kind_a, kind_b ('random', 'power'),
              eps, bound; ratio |S| / (M+N)^(1/2+eps).
    first_moment: params X (list), t (list), psi, bound_c; ratio
              R(X) = sum_{d <= X odd} |L_2(1/2+it, chi_d psi)| / (X (1+|t|)^(1/4))
              compared with bound_c X^0.05.
    """
    params = dict(params or {})
    rng = np.random.default_rng(seed)
    if mode == "bilinear":
        M = int(params.get("M", 1024))
        N = int(params.get("N", 1024))
        if max(M, N) > 2 ** 14:
            raise RangeCapError("bilinear sieve check is limited to M, N <= 2^14")
        eps = float(params.get("eps", EPS))
        trials = int(params.get("trials", 1))
        ka = params.get("kind_a", "random")
        kb = params.get("kind_b", "random")
        bound = float(params.get("bound", 10.0))
        vals, ratios = [], []
        for _ in range(trials):
            a = _sequence(ka, M, rng, 0.0)
            b = _sequence(kb, N, rng, 0.0)
            S = bilinear_sum(a, b)
            vals.append(abs(S))
            ratios.append(abs(S) / (M + N) ** (0.5 + eps))
        mx = max(ratios)
        return SieveReport(mode, dict(M=M, N=N, eps=eps, trials=trials, kind_a=ka, kind_b=kb),
                           vals, ratios, mx, bound, mx <= bound)
    if mode == "first_moment":
        Xs = [int(x) for x in params.get("X", [2 ** k for k in range(5, 13)])]
        ts = [float(t) for t in params.get("t", [0.0, 10.0, 40.0])]
        psi = CharIndex.parse(params.get("psi", 0))
        c = float(params.get("bound_c", 20.0))
        if max(Xs) > 2 ** 12 or max(abs(t) for t in ts) > 40:
            raise RangeCapError("first-moment check is limited to X <= 2^12, |t| <= 40")
        vals, ratios, ok = [], [], True
        for t in ts:
            d, lv, _ = l2_values(complex(0.5, t), max(Xs), psi, Method.AFE, cache)
            csum = np.cumsum(np.abs(lv))
            for X in Xs:
                R = float(csum[(X + 1) // 2 - 1]) / (X * (1 + abs(t)) ** 0.25)
                vals.append((X, t, R))
                ratios.append(R / X ** 0.05)
                ok &= R <= c * X ** 0.05
        return SieveReport(mode, dict(X=Xs, t=ts, psi=int(psi), bound_c=c),
                           vals, ratios, max(ratios), c, bool(ok))
    raise ValueError(f"unknown sieve mode {mode!r}")


# ---------------------------------------------------------------------------
# the D-sum

def _dm_terms(t, u, dmax, psi, psi2, method, cache):
    s = complex(0.5, t)
    d, lv, _ = l2_values(s, max(dmax, 1), psi, method, cache)
    coef = lv * psi_array(psi2, d) * np.exp(-(0.5 + 1j * u) * np.log(d))
    return d, coef


def _d_sum(t, u, lo, hi, weight, psi, psi2, method, cache):
    """sum_{d, m odd, lo <= d m^2 <= hi} L_2 psi'(d) d^-(1/2+iu) m^-(1+2i(u+t)) weight(d m^2)."""
    psi, psi2 = CharIndex.parse(psi), CharIndex.parse(psi2)
    dmax = int(math.floor(hi))
    if dmax < 1:
        return 0j
    d, coef = _dm_terms(t, u, dmax, psi, psi2, Method(method), cache)
    total = 0j
    m = 1
    while m * m <= hi:
        x = d * m * m
        sel = (x >= lo) & (x <= hi)
        if np.any(sel):
            wm = m ** complex(-1, -2 * (u + t))
            total += wm * np.sum(coef[sel] * weight(x[sel]))
        m += 2
    return complex(total)


def eval_D(t: float, u: float, P: float, psi, psi2, W: Bump | None = None,
           method: Method | str = Method.AFE, cache: LCache | None = DEFAULT_CACHE,
           check_range: bool = True) -> complex:
    """sum_{d, m odd} L_2(1/2+it, chi_d psi) psi'(d) d^-(1/2+iu) m^-(1+2i(u+t)) W(d m^2 / P)."""
    W = W or Bump(1.0, 2.0)
    U, S = 1 + abs(u), 1 + abs(u + t)
    if P < 1:
        raise ValueError("eval_D needs P >= 1")
    if check_range and P > (U * S) ** 0.6:
        raise ValueError(f"P = {P} exceeds (U S)^0.6 = {(U * S) ** 0.6:.4g}")
    lo, hi = W.support
    return _d_sum(t, u, lo * P, hi * P, lambda x: W(x / P), psi, psi2, method, cache)


def eval_D_cutoff(t: float, u: float, Cprime: float, psi, psi2,
                  method: Method | str = Method.AFE,
                  cache: LCache | None = DEFAULT_CACHE) -> complex:
    """The same sum with the smooth cutoff phi(d m^2 / C'), phi = smooth_step."""
    return _d_sum(t, u, 1.0, 2.0 * Cprime, lambda x: smooth_step(x / Cprime),
                  psi, psi2, method, cache)


# ---------------------------------------------------------------------------
# Q-sums

def _caps_check(*caps):
    for c in caps:
        if c > RANGE_CAP:
            raise RangeCapError(f"dyadic range {c:.4g} exceeds the cap 2^14")


def _powers_of_two(cap: float) -> list[int]:
    out, D = [], 1
    while D <= cap:
        out.append(D)
        D *= 2
    return out


def bilinear_block_sum(D_cap: float, N_cap: float, n_exp: complex, d_exp: complex,
                       rho, rho2, odd_n: bool = True) -> float:
    """sum over dyadic D <= D_cap, N <= N_cap of
    |sum_{d ~ D, n ~ N, d, n odd} chi_d(n) rho(n) rho'(d) n^-n_exp d^-d_exp|."""
    _caps_check(D_cap, N_cap)
    rho, rho2 = CharIndex.parse(rho), CharIndex.parse(rho2)
    total = 0.0
    for D in _powers_of_two(D_cap):
        d = np.arange(D, 2 * D)
        d = d[d % 2 == 1]
        if d.size == 0:
            continue
        bd = psi_array(rho2, d) * np.exp(-d_exp * np.log(d))
        for N in _powers_of_two(N_cap):
            n = np.arange(N, 2 * N)
            n = n[n % 2 == 1] if odd_n else n
            if n.size == 0:
                continue
            an = psi_array(rho, n) * np.exp(-n_exp * np.log(n))
            J = jacobi_table(n, d).astype(float)   # (d/n) = chi_d(n) for odd n
            total += abs(an @ J @ bd)
    return float(total)


def q_sums(kind: str, t: float, u: float, P: float, Y1: float, Y2: float,
           s: complex, w: complex, psi=0, psi2=0, rho=0, rho2=0, sign: int = 1,
           eps: float = EPS) -> float:
    """The dyadic bilinear sums Q1 (sign +-1), Q2, Q3, evaluated as displayed."""
    s, w = complex(s), complex(w)
    if kind == "Q1":
        psi, psi2 = CharIndex.parse(psi), CharIndex.parse(psi2)
        D_cap = P ** (1 + eps)
        N_cap = (Y1 * P) ** (0.5 + eps)
        _caps_check(D_cap, N_cap)
        total = 0.0
        for D in _powers_of_two(D_cap):
            d0 = np.array([k for k in range(D, 2 * D) if k % 2 == 1 and _squarefree(k)],
                          dtype=np.int64)
            if d0.size == 0:
                continue
            delta = np.array([conductor_data(int(k), psi).delta0 for k in d0], dtype=float)
            bd = (psi_array(psi2, d0) * np.exp(s / 2 * np.log(delta))
                  * np.exp(-(0.5 + 1j * u - w) * np.log(d0)))
            for N in _powers_of_two(N_cap):
                n = np.arange(N, 2 * N)
                n = n[n % 2 == 1]
                if n.size == 0:
                    continue
                an = psi_array(psi, n) * np.exp(-(0.5 + sign * 1j * t - s) * np.log(n))
                J = jacobi_table(n, d0).astype(float)
                total += abs(an @ J @ bd)
        return float(total)
    if kind == "Q2":
        D_cap = (Y1 * P) ** (0.5 + eps)
        N_cap = (Y1 / P) ** 0.5 * Y2 ** (1 + eps)
        return bilinear_block_sum(D_cap, N_cap, 0.5 - 1j * u + w,
                                  0.5 + 1j * (u + t) - w + s, rho, rho2)
    if kind == "Q3":
        D_cap = (Y1 / P) ** 0.5 * Y2 ** (1 + eps)
        N_cap = (Y1 * P) ** 0.5 * Y2 ** eps
        return bilinear_block_sum(D_cap, N_cap, 0.5 + 1j * u + w,
                                  0.5 - 1j * (u + t) - w + s, rho, rho2)
    raise ValueError(f"unknown Q-sum {kind!r}")


def _squarefree(k: int) -> bool:
    p = 3
    while p * p <= k:
        if k % (p * p) == 0:
            return False
        p += 2
    return True


# ---------------------------------------------------------------------------
# growth scans

class Slice(str, enum.Enum):
    W_LINE = "w_line"
    ANTIDIAG = "antidiag"
    GENERIC = "generic"


@dataclass
class GrowthSample:
    t: float
    u: float
    absZ: np.ndarray
    conductor: float
    slice: Slice
    err: float = 0.0

    def __post_init__(self):
        self.absZ = np.asarray(self.absZ, dtype=float)
        if not np.all(np.isfinite(self.absZ)):
            raise ValueError("non-finite |Z|")
        if not self.conductor > 0:
            raise ValueError("conductor must be positive")


@dataclass
class GrowthFit:
    slope: float
    intercept: float
    r2: float
    variable: str
    slope_conductor: float


def fit_loglog(x: Sequence[float], y: Sequence[float]) -> tuple[float, float, float]:
    """OLS of log y on log x: (slope, intercept, r^2)."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    if lx.size < 2 or np.ptp(lx) == 0:
        raise ValueError("exponent fit needs at least two distinct abscissae")
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - np.sum((ly - pred) ** 2) / ss if ss > 0 else 1.0
    return float(slope), float(intercept), float(r2)


def _slice_points(slice_: Slice, grid) -> list[tuple[float, float]]:
    if slice_ is Slice.W_LINE:
        return [(0.0, float(u)) for u in grid]
    if slice_ is Slice.ANTIDIAG:
        return [(float(t), -float(t)) for t in grid]
    return [(float(t), float(u)) for t, u in grid]


def _slice_variable(slice_: Slice, t: float, u: float) -> float:
    if slice_ is Slice.W_LINE:
        return abs(complex(0.5, u))
    if slice_ is Slice.ANTIDIAG:
        return 1 + abs(t)
    return analytic_conductor(t, u)


def growth_scan(slice_: Slice | str, grid, plan: TruncationPlan = SCAN_PLAN,
                cache: LCache | None = DEFAULT_CACHE,
                contour_c: float = 2.0) -> tuple[list[GrowthSample], GrowthFit]:
    """Evaluate the critical-line vector on a slice and fit the growth exponent.

    The abscissa of the fit is |w| on the w-line (t = 0), 1+|t| on the
    antidiagonal u = -t, and the analytic conductor otherwise.
    """
    slice_ = Slice(slice_)
    pts = _slice_points(slice_, grid)
    if any(abs(t) > 200 or abs(u) > 200 for t, u in pts):
        raise ValueError("growth scans are limited to |t|, |u| <= 200")
    if len({(t, u) for t, u in pts}) < 2:
        raise ValueError("exponent fit needs at least two grid points")
    engines: dict[float, CriticalEngine] = {}
    samples = []
    for t, u in pts:
        eng = engines.get(t)
        if eng is None:
            eng = engines[t] = CriticalEngine(t, contour_c, plan, cache)
        z = eng.evaluate(u)
        samples.append(GrowthSample(t, u, np.abs(z.values), analytic_conductor(t, u),
                                    slice_, z.err))
    xs = [_slice_variable(slice_, s.t, s.u) for s in samples]
    ys = [float(s.absZ.max()) for s in samples]
    slope, icpt, r2 = fit_loglog(xs, ys)
    slope_c, _, _ = fit_loglog([s.conductor for s in samples], ys)
    var = {"w_line": "|w|", "antidiag": "1+|t|", "generic": "Cana"}[slice_.value]
    return samples, GrowthFit(slope, icpt, r2, var, slope_c)


# ---------------------------------------------------------------------------
# mean square

class MeanSquareGrid:
    """|Z(1/2+it, 1/2+iu)|^2 on Gauss-Legendre panels of unit width.

    By Schwarz reflection |Z(-t,-u)| = |Z(t,u)|, so only t >= 0 is evaluated.
    Values are memoised per (t, u) node, so nested boxes share all work.
    """

    def __init__(self, points_per_panel: int = 3, plan: TruncationPlan = SCAN_PLAN,
                 cache: LCache | None = DEFAULT_CACHE, contour_c: float = 2.0):
        self.q = int(points_per_panel)
        self.plan = plan
        self.cache = cache
        self.c = contour_c
        self._vals: dict[tuple[float, float], np.ndarray] = {}
        self._engines: dict[float, CriticalEngine] = {}

    def _panel(self, lo: float, hi: float):
        x, w = np.polynomial.legendre.leggauss(self.q)
        edges = np.arange(lo, hi + 1e-12, 1.0)
        if edges[-1] < hi - 1e-12:
            edges = np.append(edges, hi)
        a, b = edges[:-1, None], edges[1:, None]
        nodes = ((a + b) / 2 + (b - a) / 2 * x).ravel()
        wts = ((b - a) / 2 * w).ravel()
        return nodes, wts

    def _sq(self, t: float, u: float) -> np.ndarray:
        key = (round(t, 12), round(u, 12))
        hit = self._vals.get(key)
        if hit is None:
            eng = self._engines.get(key[0])
            if eng is None:
                # one engine alive at a time keeps memory flat
                self._engines = {key[0]: CriticalEngine(t, self.c, self.plan, self.cache)}
                eng = self._engines[key[0]]
            hit = np.abs(eng.evaluate(u).values) ** 2
            self._vals[key] = hit
        return hit

    def integral(self, Y1: float, Y2: float) -> np.ndarray:
        """Per-component integral over [-Y1, Y1] x [-Y2, Y2]."""
        tn, tw = self._panel(0.0, Y1)
        un, uw = self._panel(-Y2, Y2)
        total = np.zeros(16)
        for ti, wi in zip(tn, tw):
            row = np.array([self._sq(ti, uj) for uj in un])
            total += 2 * wi * (uw @ row)
        return total


def mean_square(Y1: float, Y2: float, quad: int = 3, plan: TruncationPlan = SCAN_PLAN,
                cache: LCache | None = DEFAULT_CACHE,
                grid: MeanSquareGrid | None = None) -> dict:
    """Integral of |Z(1/2+it, 1/2+iu)|^2 over the box, per component,
    and its ratio to Y1*Y2."""
    if not 0 < Y1 <= Y2 <= 32:
        raise ValueError("mean_square needs 0 < Y1 <= Y2 <= 32")
    grid = grid or MeanSquareGrid(quad, plan, cache)
    vals = grid.integral(Y1, Y2)
    return {"Y1": Y1, "Y2": Y2, "integral": vals, "ratio": vals / (Y1 * Y2)}
