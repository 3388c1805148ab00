"""L-values of the quadratic characters chi_{d0} psi.

Two independent evaluators:

* ``afe``: the approximate functional equation
  L(s) = sum chi(n) n^-s W_s(n sqrt(pi/delta0))
         + X(s) sum chi(n) n^(s-1) W_{1-s}(n sqrt(pi/delta0)),
  where X(s) = (delta0/pi)^(1/2-s) Gamma((1-s+kappa)/2)/Gamma((s+kappa)/2)
  and W is tabulated once per (s, kappa) (``afe_weight_table``).  A numba
  kernel walks a batch of conductors with a sieve for the character values.
* ``hurwitz_oracle``: L(s) = q^-s sum_{a mod q} chi(a) zeta(s, a/q) with
  the Hurwitz zeta function by Euler-Maclaurin summation.

For Re s < 1/2 both evaluate L(1 - s) and apply the functional equation;
for Re s > 5 the Dirichlet series is summed directly.
"""
from __future__ import annotations

import enum
import math
import struct
import threading
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numba
import numpy as np
from scipy import special

from .analytic_kernels import PoleError, afe_weight_table
from .characters import (CharIndex, conductor_data, fundamental_discriminant,
                         kronecker_standard, smallest_prime_factor,
                         squarefree_parts)

__all__ = [
    "Method", "LQuery", "LCache", "ConvergenceError", "root_lambda",
    "fe_factor", "hurwitz_zeta", "zeta", "l_primitive", "l_primitive_result",
    "l_primitive_batch", "l2_value", "l2_values", "euler_factor_2d1",
    "AFE_DECAY", "L_TOL",
]

AFE_DECAY = 32.0      # A in cos(pi u / 4A)^(-4A) for the L-engine
L_TOL = 1e-8          # contract accuracy of l_primitive
_DIRECT_SIGMA = 5.0   # above this the Dirichlet series is summed directly
_EM_TERMS = 12
_EM_SHIFT = 15


class ConvergenceError(RuntimeError):
    """An evaluator's own error estimate exceeds the requested tolerance."""


class Method(str, enum.Enum):
    AFE = "afe"
    HURWITZ = "hurwitz_oracle"


@dataclass(frozen=True)
class LQuery:
    """L(s, chi_{d0} psi) request; d0 odd squarefree."""

    s: complex
    d0: int
    psi: CharIndex
    method: Method = Method.AFE

    def __post_init__(self):
        object.__setattr__(self, "s", complex(self.s))
        object.__setattr__(self, "psi", CharIndex.parse(self.psi))
        object.__setattr__(self, "method", Method(self.method))
        d0 = int(self.d0)
        if d0 < 1 or d0 % 2 == 0:
            raise ValueError(f"d0 must be odd positive, got {d0}")
        sqf, _ = _squarefree_check(d0)
        if not sqf:
            raise ValueError(f"d0 must be squarefree, got {d0}")
        object.__setattr__(self, "d0", d0)

    @property
    def disc(self) -> int:
        return fundamental_discriminant(self.d0, self.psi)


def _squarefree_check(n: int) -> tuple[bool, int]:
    m, p = n, 3
    while p * p <= m:
        if m % (p * p) == 0:
            return False, p
        if m % p == 0:
            m //= p
        p += 2
    return True, 0


# ---------------------------------------------------------------------------
# functional equation data

def root_lambda(t: float, delta0: int, kappa: int) -> complex:
    """lambda(t, delta0) = (delta0/pi)^(-it) Gamma((1/2-it+k)/2)/Gamma((1/2+it+k)/2)."""
    t = float(t)
    lg = (special.loggamma((0.5 - 1j * t + kappa) / 2)
          - special.loggamma((0.5 + 1j * t + kappa) / 2))
    return complex(np.exp(-1j * t * math.log(delta0 / math.pi) + lg))


def fe_factor(s, delta0, kappa: int):
    """X(s) = (delta0/pi)^(1/2-s) Gamma((1-s+kappa)/2)/Gamma((s+kappa)/2).

    Vectorised over ``delta0``; zero where Gamma((s+kappa)/2) has a pole.
    """
    s = complex(s)
    num = (1 - s + kappa) / 2
    if _near_pole(num, 1e-12):
        raise PoleError("X(s) has a pole here", num)
    den = (s + kappa) / 2
    if _near_pole(den, 0.0) or (round(den.real) <= 0 and den == round(den.real)):
        return np.zeros_like(np.asarray(delta0, dtype=float), dtype=complex)
    lg = special.loggamma(num) - special.loggamma(den)
    return np.exp((0.5 - s) * np.log(np.asarray(delta0, dtype=float) / math.pi) + lg)


def _near_pole(z: complex, tol: float) -> bool:
    """Distance from z to the nonpositive integers below tol."""
    k = round(z.real)
    return k <= 0 and abs(z - k) < tol


# ---------------------------------------------------------------------------
# Hurwitz zeta by Euler-Maclaurin

_B2K = np.array([special.bernoulli(2 * _EM_TERMS)[2 * k] for k in range(1, _EM_TERMS + 1)])
_FACT2K = np.array([math.factorial(2 * k) for k in range(1, _EM_TERMS + 1)], dtype=float)


def _em_tail_terms(s: complex, x: np.ndarray) -> np.ndarray:
    """(1/2) x^-s + sum_k B_2k/(2k)! (s)_(2k-1) x^(-s-2k+1), for each x."""
    logx = np.log(x)
    out = 0.5 * np.exp(-s * logx)
    poch = s  # rising factorial (s)_(2k-1)
    for k in range(_EM_TERMS):
        out = out + _B2K[k] / _FACT2K[k] * poch * np.exp((-s - 2 * k - 1) * logx)
        poch = poch * (s + 2 * k + 1) * (s + 2 * k + 2)
    return out


def _em_shift(s: complex) -> int:
    return _EM_SHIFT + int(math.ceil(abs(s)))


def hurwitz_zeta(s: complex, a) -> np.ndarray:
    """zeta(s, a) = sum_{n >= 0} (n + a)^-s for a > 0, by Euler-Maclaurin."""
    s = complex(s)
    if s == 1:
        raise PoleError("Hurwitz zeta has a pole at s = 1", s)
    a = np.atleast_1d(np.asarray(a, dtype=float))
    N = _em_shift(s)
    n = np.arange(N)[:, None]
    head = np.exp(-s * np.log(n + a[None, :])).sum(axis=0)
    x = N + a
    return head + np.exp((1 - s) * np.log(x)) / (s - 1) + _em_tail_terms(s, x)


def zeta(s: complex) -> complex:
    """Riemann zeta; Euler-Maclaurin for Re s >= -1/2 and the reflection formula below."""
    s = complex(s)
    if s == 1:
        raise PoleError("zeta has a pole at s = 1", s)
    if s.real < -0.5:
        # zeta(s) = X(s) zeta(1-s) with delta0 = 1, kappa = 0
        return complex(fe_factor(s, 1, 0) * zeta(1 - s))
    return complex(hurwitz_zeta(s, 1.0)[0])


def _hurwitz_l(s: complex, D: int) -> complex:
    """L(s, (D/.)) for a fundamental discriminant D with |D| > 1."""
    q = abs(D)
    a = np.arange(1, q + 1)
    chi = np.array([kronecker_standard(D, int(k)) for k in a], dtype=float)
    keep = chi != 0
    a, chi = a[keep] / q, chi[keep]
    N = _em_shift(s)
    n = np.arange(N)[:, None]
    head = complex(np.sum(chi * np.exp(-s * np.log(n + a[None, :])).sum(axis=0)))
    x = N + a
    logx = np.log(x)
    # sum chi(a) = 0, so x^(1-s)/(s-1) contributes sum chi(a) (x^(1-s) - 1)/(s-1)
    z = (1 - s) * logx
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = np.where(np.abs(z) > 1e-300, np.expm1(z) / np.where(z == 0, 1, z), 1.0)
    main = complex(np.sum(chi * (-logx) * rel))
    tail = complex(np.sum(chi * _em_tail_terms(s, x)))
    return complex(np.exp(-s * math.log(q)) * (head + main + tail))


# ---------------------------------------------------------------------------
# numba kernels

@numba.njit(cache=True)
def _powmod(a, e, m):
    r = 1
    a %= m
    while e > 0:
        if e & 1:
            r = (r * a) % m
        a = (a * a) % m
        e >>= 1
    return r


@numba.njit(cache=True)
def _kron_prime(D, p):
    """Kronecker symbol (D/p) for a prime p."""
    if p == 2:
        r = D % 8
        if r == 1 or r == 7:
            return 1
        if r == 3 or r == 5:
            return -1
        return 0
    a = D % p
    if a == 0:
        return 0
    return 1 if _powmod(a, (p - 1) // 2, p) == 1 else -1


@numba.njit(cache=True)
def _fill_chi(D, nmax, spf, chi):
    chi[1] = 1
    for n in range(2, nmax + 1):
        p = spf[n]
        if p == n:
            chi[n] = _kron_prime(D, n)
        else:
            chi[n] = chi[p] * chi[n // p]


@numba.njit(cache=True)
def _hermite(x0, h, val, der, der2, x):
    """Quintic Hermite interpolation of a WeightTable."""
    u = (x - x0) / h
    k = int(u)
    if k < 0:
        k = 0
    if k > val.size - 2:
        k = val.size - 2
    r = u - k
    r2 = r * r
    r3 = r2 * r
    r4 = r3 * r
    r5 = r4 * r
    return ((1 - 10 * r3 + 15 * r4 - 6 * r5) * val[k]
            + (r - 6 * r3 + 8 * r4 - 3 * r5) * h * der[k]
            + 0.5 * (r2 - 3 * r3 + 3 * r4 - r5) * h * h * der2[k]
            + 0.5 * (r3 - 2 * r4 + r5) * h * h * der2[k + 1]
            + (-4 * r3 + 7 * r4 - 3 * r5) * h * der[k + 1]
            + (10 * r3 - 15 * r4 + 6 * r5) * val[k + 1])


@numba.njit(cache=True)
def _afe_batch(D, logn, npow1, npow2, x0, h, val1, der1, dd1, cut1,
               val2, der2, dd2, cut2, spf, pref, out, out_abs):
    nall = logn.size - 1
    chi = np.zeros(nall + 1, dtype=np.int8)
    for i in range(D.size):
        delta = abs(D[i])
        c = 0.5 * math.log(math.pi / delta)
        n1 = min(int(math.exp(cut1 - c)), nall)
        n2 = min(int(math.exp(cut2 - c)), nall)
        nm = max(n1, n2)
        _fill_chi(D[i], nm, spf, chi)
        s1 = 0j
        a1 = 0.0
        for n in range(1, n1 + 1):
            if chi[n] != 0:
                term = npow1[n] * _hermite(x0, h, val1, der1, dd1, logn[n] + c)
                s1 += chi[n] * term
                a1 += abs(term)
        s2 = 0j
        a2 = 0.0
        for n in range(1, n2 + 1):
            if chi[n] != 0:
                term = npow2[n] * _hermite(x0, h, val2, der2, dd2, logn[n] + c)
                s2 += chi[n] * term
                a2 += abs(term)
        out[i] = s1 + pref[i] * s2
        out_abs[i] = a1 + abs(pref[i]) * a2


@numba.njit(cache=True)
def _direct_batch(D, npow, nmax, spf, out):
    chi = np.zeros(nmax + 1, dtype=np.int8)
    for i in range(D.size):
        _fill_chi(D[i], nmax, spf, chi)
        acc = 0j
        for n in range(nmax, 0, -1):
            if chi[n] != 0:
                acc += chi[n] * npow[n]
        out[i] = acc


# ---------------------------------------------------------------------------
# batch evaluation

@lru_cache(maxsize=64)
def _tables(s: complex, kappa: int, x_lo: float):
    """Weight tables and the dual prefactor shape for one (s, kappa)."""
    w1 = afe_weight_table(s, kappa, AFE_DECAY, x_lo, normalized=True)
    dual = (1 - s + kappa) / 2
    near = round(dual.real) <= 0 and abs(dual - round(dual.real)) < 0.1
    # dual summands scale like n^(Re s - 1) |W(x_n)|
    w2 = afe_weight_table(1 - s, kappa, AFE_DECAY, x_lo, normalized=not near,
                          cut_exp=s.real - 1)
    return w1, w2, near


def _x_lo(delta_max: int) -> float:
    return min(-1.0, math.floor(0.5 * math.log(math.pi / delta_max)) - 1.0)


def _npow(s: complex, nmax: int) -> tuple[np.ndarray, np.ndarray]:
    logn = np.log(np.arange(1, nmax + 1, dtype=float))
    logn = np.concatenate([[0.0], logn])
    return logn, np.exp(-s * logn)


def _afe_values(s: complex, D: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """AFE for Re s in [1/2, 5] and fundamental discriminants D (|D| > 1)."""
    out = np.zeros(D.size, dtype=complex)
    err = np.zeros(D.size)
    if D.size == 0:
        return out, err
    dmax = int(np.abs(D).max())
    x_lo = _x_lo(dmax)
    for kappa in (0, 1):
        sel = np.nonzero((D < 0) == bool(kappa))[0]
        if sel.size == 0:
            continue
        Dk = np.ascontiguousarray(D[sel], dtype=np.int64)
        w1, w2, near = _tables(s, kappa, x_lo)
        delta = np.abs(Dk).astype(float)
        if near:
            # unnormalised dual weight: Gamma((1-s+kappa)/2) lives inside the table
            pref = np.exp((0.5 - s) * np.log(delta / math.pi)) * special.rgamma((s + kappa) / 2)
        else:
            pref = fe_factor(s, delta, kappa)
        c_min = 0.5 * math.log(math.pi / dmax)
        nmax = int(math.exp(max(w1.x_cut, w2.x_cut) - c_min)) + 2
        logn, npow1 = _npow(s, nmax)
        npow2 = np.exp((s - 1) * logn)
        spf = smallest_prime_factor(max(nmax, 16))
        vals = np.zeros(sel.size, dtype=complex)
        absum = np.zeros(sel.size)
        _afe_batch(Dk, logn, npow1, npow2, w1.x0, w1.h, w1.val, w1.der, w1.der2, w1.x_cut,
                   w2.val, w2.der, w2.der2, w2.x_cut, spf, np.asarray(pref, dtype=complex),
                   vals, absum)
        out[sel] = vals
        # interpolated weights are good to ~1e-12 relative to their peak
        err[sel] = 1e-12 * absum + 1e-15
    return out, err


def _direct_values(s: complex, D: np.ndarray, tol: float = 1e-14) -> tuple[np.ndarray, np.ndarray]:
    sigma = s.real
    nmax = int(math.ceil(tol ** (-1.0 / (sigma - 1.0)))) + 2
    logn, npow = _npow(s, nmax)
    spf = smallest_prime_factor(max(nmax, 16))
    out = np.zeros(D.size, dtype=complex)
    _direct_batch(np.ascontiguousarray(D, dtype=np.int64), npow, nmax, spf, out)
    tail = nmax ** (1 - sigma) / (sigma - 1)
    return out, np.full(D.size, tail)


def _zeta_values(s: complex, count: int) -> tuple[np.ndarray, np.ndarray]:
    val = zeta(s)
    return np.full(count, val), np.full(count, 1e-13 * max(1.0, abs(val)))


def _primitive_core(s: complex, D: np.ndarray, method: Method) -> tuple[np.ndarray, np.ndarray]:
    """Values for Re s >= 1/2."""
    out = np.zeros(D.size, dtype=complex)
    err = np.zeros(D.size)
    triv = np.abs(D) == 1
    if np.any(triv):
        out[triv], err[triv] = _zeta_values(s, int(triv.sum()))
    rest = np.nonzero(~triv)[0]
    if rest.size == 0:
        return out, err
    if method is Method.HURWITZ:
        for i in rest:
            out[i] = _hurwitz_l(s, int(D[i]))
            err[i] = 1e-12 * max(1.0, abs(out[i]))
    elif s.real > _DIRECT_SIGMA:
        out[rest], err[rest] = _direct_values(s, D[rest])
    else:
        out[rest], err[rest] = _afe_values(s, D[rest])
    return out, err


def l_primitive_batch(s, discs, method: Method | str = Method.AFE,
                      tol: float = L_TOL) -> tuple[np.ndarray, np.ndarray]:
    """L(s, (D/.)) for an array of fundamental discriminants D.

    Returns (values, error estimates).  D = 1 gives zeta(s).
    """
    s = complex(s)
    method = Method(method)
    D = np.atleast_1d(np.asarray(discs, dtype=np.int64))
    if np.any(np.abs(D) == 1) and s == 1:
        raise PoleError("L(s, chi) has a pole at s = 1 for the trivial character", s)
    if s.real >= 0.5:
        out, err = _primitive_core(s, D, method)
    else:
        out, err = _primitive_core(1 - s, D, method)
        for kappa in (0, 1):
            sel = (D < 0) == bool(kappa)
            if np.any(sel):
                X = fe_factor(s, np.abs(D[sel]), kappa)
                out[sel] *= X
                err[sel] *= np.abs(X)
    if np.any(err > tol):
        worst = int(np.argmax(err))
        raise ConvergenceError(f"L-value error {err[worst]:.2g} exceeds {tol:.2g} "
                               f"(s={s}, D={int(D[worst])})")
    return out, err


def l_primitive_result(q: LQuery, cache: "LCache | None" = None) -> tuple[complex, float]:
    if cache is not None:
        hit = cache.get(q.d0, q.psi, q.s, q.method)
        if hit is not None:
            return hit
    vals, errs = l_primitive_batch(q.s, [q.disc], q.method)
    res = (complex(vals[0]), float(errs[0]))
    if cache is not None:
        cache.put(q.d0, q.psi, q.s, res[0], res[1], q.method)
    return res


def l_primitive(q: LQuery, cache: "LCache | None" = None) -> complex:
    """L(s, chi_{d0} psi) for the primitive character; see module docstring."""
    return l_primitive_result(q, cache)[0]


# ---------------------------------------------------------------------------
# imprimitive L_2

def euler_factor_2d1(s: complex, disc: int, d1: int) -> complex:
    """prod_{p | 2 d1} (1 - chi*(p) p^-s) with chi* = (disc/.)."""
    s = complex(s)
    out = 1.0 + 0j
    m, p = 2 * int(d1), 2
    while m > 1:
        if m % p == 0:
            out *= 1 - kronecker_standard(disc, p) * p ** (-s)
            while m % p == 0:
                m //= p
        p += 1 if p == 2 else 2
    return out


def l2_value(s: complex, d: int, psi, method: Method | str = Method.AFE,
             cache: "LCache | None" = None) -> complex:
    """L_2(s, chi_d psi) = prod_{p | 2 d1} (1 - chi*(p) p^-s) L(s, chi_{d0} psi)."""
    cd = conductor_data(d, psi)
    q = LQuery(s, cd.d0, psi, method)
    return euler_factor_2d1(s, cd.disc, cd.d1) * l_primitive(q, cache)


def l2_values(s, d_max: int, psi, method: Method | str = Method.AFE,
              cache: "LCache | None" = None,
              tol: float = L_TOL) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """L_2(s, chi_d psi) for all odd d <= d_max.

    Returns (d, values, errors).  One primitive L-value per squarefree d0;
    the Euler factors for p | 2 d1 are applied by a vectorised sweep.
    """
    s = complex(s)
    psi = CharIndex.parse(psi)
    d = np.arange(1, d_max + 1, 2, dtype=np.int64)
    d0_all, d1_all = squarefree_parts(max(d_max, 3))
    d0, d1 = d0_all[d], d1_all[d]
    uniq = np.unique(d0)
    discs = np.array([fundamental_discriminant(int(k), psi) for k in uniq], dtype=np.int64)
    lv, le = _cached_batch(s, uniq, discs, psi, Method(method), cache, tol)
    pos = np.searchsorted(uniq, d0)
    vals, errs = lv[pos].copy(), le[pos].copy()
    disc_d = discs[pos]
    # p = 2 factor
    r = disc_d % 8
    chi2 = np.where((r == 1) | (r == 7), 1, np.where((r == 3) | (r == 5), -1, 0))
    fac = 1 - chi2 * 2.0 ** (-s)
    # odd p | d1
    spf = smallest_prime_factor(max(d_max, 3))
    m = d1.copy()
    while True:
        act = np.nonzero(m > 1)[0]
        if act.size == 0:
            break
        p = spf[m[act]]
        chip = np.array([kronecker_standard(int(D), int(q)) for D, q in zip(disc_d[act], p)])
        fac[act] *= 1 - chip * np.exp(-s * np.log(p.astype(float)))
        for _ in range(64):
            div = m[act] % p == 0
            if not np.any(div):
                break
            m[act[div]] //= p[div]
    return d, vals * fac, errs * np.abs(fac)


def _cached_batch(s, d0s, discs, psi, method, cache, tol=L_TOL):
    if cache is None:
        return l_primitive_batch(s, discs, method, tol)
    vals = np.zeros(d0s.size, dtype=complex)
    errs = np.zeros(d0s.size)
    missing = []
    for i, k in enumerate(d0s):
        hit = cache.get(int(k), psi, s, method)
        if hit is None:
            missing.append(i)
        else:
            vals[i], errs[i] = hit
    if missing:
        idx = np.array(missing)
        v, e = l_primitive_batch(s, discs[idx], method, tol)
        vals[idx], errs[idx] = v, e
        cache.put_many([(int(d0s[i]), psi, s, v[j], e[j], method) for j, i in enumerate(idx)])
    return vals, errs


# ---------------------------------------------------------------------------
# cache

_MAGIC = b"MDSL1"
_RECORD = struct.Struct("<QBddd")


@dataclass
class LCache:
    """Thread-safe map (d0, psi, s, method) -> (value, error).

    Keys are exact (no interpolation).  ``save``/``load`` use the binary
    record format of docs/formats.md, which stores critical-line values
    (Re s = 1/2, afe method) only; loaded entries carry the error ceiling
    L_TOL.
    """

    entries: dict = field(default_factory=dict)
    hits: int = 0
    misses: int = 0

    def __post_init__(self):
        self._lock = threading.Lock()

    @staticmethod
    def key(d0, psi, s, method=Method.AFE):
        s = complex(s)
        return (int(d0), int(psi), s.real, s.imag, Method(method).value)

    def get(self, d0, psi, s, method=Method.AFE):
        k = self.key(d0, psi, s, method)
        with self._lock:
            hit = self.entries.get(k)
            if hit is None:
                self.misses += 1
            else:
                self.hits += 1
            return hit

    def put(self, d0, psi, s, value, err, method=Method.AFE):
        with self._lock:
            self.entries[self.key(d0, psi, s, method)] = (complex(value), float(err))

    def put_many(self, items):
        with self._lock:
            for d0, psi, s, value, err, method in items:
                self.entries[self.key(d0, psi, s, method)] = (complex(value), float(err))

    def __len__(self):
        return len(self.entries)

    def save(self, path) -> int:
        """Write critical-line entries; returns the number of records."""
        with self._lock:
            # the file has no error field, so only values within L_TOL are kept
            items = sorted(k for k, (_, e) in self.entries.items()
                           if k[2] == 0.5 and k[4] == Method.AFE.value and e <= L_TOL)
            blob = bytearray(_MAGIC)
            for k in items:
                v, _ = self.entries[k]
                blob += _RECORD.pack(k[0], k[1], k[3], v.real, v.imag)
        Path(path).write_bytes(bytes(blob))
        return len(items)

    @classmethod
    def load(cls, path) -> "LCache":
        data = Path(path).read_bytes()
        if not data.startswith(_MAGIC):
            raise ValueError(f"{path}: not an MDSL1 cache file")
        body = data[len(_MAGIC):]
        if len(body) % _RECORD.size:
            raise ValueError(f"{path}: truncated record")
        cache = cls()
        # save() writes only values that met L_TOL
        for d0, psi, t, re, im in _RECORD.iter_unpack(body):
            cache.entries[cls.key(d0, psi, complex(0.5, t))] = (complex(re, im), L_TOL)
        return cache
