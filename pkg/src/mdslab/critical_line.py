"""Z(1/2+it, 1/2+iu) on the critical lines by a contour identity.

With s0 = 1/2+it, w0 = 1/2+iu and K(z) = P(z) F_{u,t}(z) H(z) / z,

    Z(s0, w0) = I+ - I-,
    I+ = (1/2 pi i) int_{(c)}  K(z) Z(s0, w0+z) dz,
    I- = (1/2 pi i) int_{(-c)} K(z) M(s0, w0+z) Z(1-s0, 1-w0-z) dz,

since the only pole between the two lines is z = 0 with residue Z(s0, w0).
P(z) cancels the poles of F at z = -1/2-iu, -1/2-i(u+t) and of Z at
z = 1/2-iu, 1/2-i(u+t).  Both lines need Z at second coordinate with real
part 1/2 + c, where the d-sum converges absolutely; by Schwarz reflection
Z(1/2-it, 1/2+c-iv) = conj Z(1/2+it, 1/2+c+iv), so the two lines share
their nodes.  Nodes sit on the lattice v = u + y = j h, so one table of
Z(s0, 1/2+c+iv) serves every u at a given t.

The truncated d-sum is completed by the contribution of the two polar
lines w = 1 and s + w = 3/2 to the tail (``tail_correction``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytic_kernels import PoleError, conductor_C, kernel_F, kernel_H
from .characters import CharIndex, pair_index, psi_array
from .functional_equations import matrix_A, matrix_B, matrix_M
from .lfunctions import LCache, Method, l2_values
from .zcore import (DEFAULT_CACHE, Rep, TruncationPlan, ZVector, _tail_sum,
                    majorant_exponent, zeta2)

__all__ = [
    "CriticalPoint", "analytic_conductor", "CriticalEngine", "z_critical",
    "tail_residues", "frac_poly", "frac_closed", "C_RANGE",
]

C_RANGE = (1.1, 2.5)
STEP = 0.05
Y_MAX = 9.0
NEAR_SWITCH = 1e-3


@dataclass(frozen=True)
class CriticalPoint:
    t: float
    u: float

    @property
    def U(self) -> float:
        return 1 + abs(self.u)

    @property
    def T(self) -> float:
        return 1 + abs(self.t)

    @property
    def S(self) -> float:
        return 1 + abs(self.u + self.t)

    @property
    def X(self) -> float:
        return self.S * self.T * self.U

    @property
    def C(self) -> float:
        return conductor_C(self.u, self.t)

    @property
    def Cana(self) -> float:
        return analytic_conductor(self.t, self.u)


def analytic_conductor(t: float, u: float) -> float:
    """|1/4 + it/2| |1/4 + i(u+t)/2| |1/4 + iu/2|."""
    return abs(0.25 + 0.5j * t) * abs(0.25 + 0.5j * (u + t)) * abs(0.25 + 0.5j * u)


# ---------------------------------------------------------------------------
# pole-cancelling factors

def frac_poly(z, u: float, t: float):
    """Polynomial with zeros at +-1/2 - iu, +-1/2 - i(u+t), equal to 1 at 0."""
    z = np.asarray(z, dtype=complex)
    out = np.ones_like(z)
    for a in (0.5 + 1j * u, 0.5 + 1j * (u + t)):
        out = out * (z + a) / a
        b = a - 1
        out = out * (z + b) / b
    return out


def frac_closed(z, u: float, t: float):
    """(2^(a+z)-1)(4^(a+z)-4)/((2^a-1)(4^a-4)) over a = 1/2+iu, 1/2+i(u+t)."""
    z = np.asarray(z, dtype=complex)
    out = np.ones_like(z)
    l2 = math.log(2)
    for a in (0.5 + 1j * u, 0.5 + 1j * (u + t)):
        out = out * (np.exp((a + z) * l2) - 1) / (np.exp(a * l2) - 1)
        out = out * (np.exp(2 * (a + z) * l2) - 4) / (np.exp(2 * a * l2) - 4)
    return out


_FRACS = {"poly": frac_poly, "closed": frac_closed}


# ---------------------------------------------------------------------------
# tail of the d-sum

def _residue_vectors(s: complex) -> tuple[np.ndarray, np.ndarray]:
    """rho1, rho2 with sum_{d odd > Y} a_d d^-w ~ rho1 Y^(1-w)/(w-1)
    + rho2 Y^(3/2-s-w)/(w+s-3/2), a_d the coefficient of d^-w in Z(s, w)
    without the zeta_2(2s+2w-1) prefactor."""
    A = matrix_A().entries
    e = np.zeros(16)
    e[:4] = 1.0
    rho1 = A @ (0.5 * zeta2(2 * s) * e) / zeta2(2 * s + 1)
    rho2 = matrix_B(s).entries @ (A @ (0.5 * zeta2(2 - 2 * s) * e)) / zeta2(2)
    return rho1, rho2


def tail_residues(s: complex, w: np.ndarray, Y: float, radius: float = 0.2,
                  points: int = 32) -> np.ndarray:
    """Polar-line approximation of the d-sum tail past Y, shape (len(w), 16).

    Near s = 1/2 the two terms have cancelling poles in s; there the value is
    taken as the mean over a circle around s (exact for holomorphic functions).
    """
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    logY = math.log(Y)

    def g(sv):
        r1, r2 = _residue_vectors(sv)
        a = np.exp((1 - w) * logY) / (w - 1)
        b = np.exp((1.5 - sv - w) * logY) / (w + sv - 1.5)
        return a[:, None] * r1[None, :] + b[:, None] * r2[None, :]

    if abs(s - 0.5) > radius:
        return g(s)
    theta = 2 * np.pi * (np.arange(points) + 0.5) / points
    acc = np.zeros((w.size, 16), dtype=complex)
    for th in theta:
        acc += g(s + radius * np.exp(1j * th))
    return acc / points


# ---------------------------------------------------------------------------
# engine

class CriticalEngine:
    """Shared state for all evaluations at one t.

    L_2(1/2+it, chi_d psi) for odd d <= d_max is computed once (at |t|, and
    conjugated for negative t); Z(s0, 1/2+c+iv) is tabulated lazily on the
    lattice v = j*step.
    """

    def __init__(self, t: float, contour_c: float = 2.0, plan: TruncationPlan | None = None,
                 cache: LCache | None = DEFAULT_CACHE, step: float = STEP,
                 y_max: float = Y_MAX, frac: str = "poly", tail_correction: bool = True):
        if not C_RANGE[0] <= contour_c < C_RANGE[1]:
            raise ValueError(f"contour_c must lie in [{C_RANGE[0]}, {C_RANGE[1]})")
        if frac not in _FRACS:
            raise ValueError(f"frac must be one of {sorted(_FRACS)}")
        self.t = float(t)
        self.c = float(contour_c)
        self.plan = plan or TruncationPlan()
        self.step = float(step)
        self.y_max = float(y_max)
        self.frac = frac
        self.tail_correction = tail_correction
        self.s0 = complex(0.5, self.t)
        self._coef, self._cerr, self._d = self._coefficients(cache)
        self._logd = np.log(self._d.astype(float))
        e = majorant_exponent(0.5)
        upper = self._d > self.plan.d_max // 2
        K = np.max(np.abs(self._coef[:, upper]) / self._d[upper] ** e, axis=1)
        self._tail_major = K * _tail_sum(self.plan.d_max, e - (0.5 + self.c))
        self._Y = float(self._d[-1] + 1)
        self._table: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]] = {}

    def _coefficients(self, cache):
        s = complex(0.5, abs(self.t))
        rows = np.zeros((16, 0), dtype=complex)
        errs = np.zeros((16, 0))
        d = None
        for p in CharIndex:
            d, lv, le = l2_values(s, self.plan.d_max, p, Method.AFE, cache, tol=math.inf)
            if self.t < 0:
                lv = np.conj(lv)
            if rows.shape[1] == 0:
                rows = np.zeros((16, d.size), dtype=complex)
                errs = np.zeros((16, d.size))
            for q in CharIndex:
                k = pair_index(p, q)
                rows[k] = lv * psi_array(q, d)
                errs[k] = le
        return rows, errs, d

    # -- lattice table -------------------------------------------------------
    def _fill(self, js: np.ndarray) -> None:
        js = np.array([j for j in np.unique(js) if j not in self._table], dtype=np.int64)
        if js.size == 0:
            return
        v = js * self.step
        sig = 0.5 + self.c
        w = sig + 1j * v
        # d^-w = d^-sig e^(-i v log d), in chunks to bound memory
        zp = np.zeros((js.size, 16), dtype=complex)
        lerr = np.zeros(16)
        amp = np.exp(-sig * self._logd)
        lerr = self._cerr @ amp
        for lo in range(0, js.size, 256):
            sl = slice(lo, lo + 256)
            ph = np.exp(-1j * np.outer(self._logd, v[sl])) * amp[:, None]
            zp[sl] = (self._coef @ ph).T
        if self.tail_correction:
            zp += tail_residues(self.s0, w, self._Y)
        pref = np.array([zeta2(2 * self.s0 + 2 * wi - 1) for wi in w])
        zp *= pref[:, None]
        perr = np.abs(pref)[:, None] * (lerr + self._tail_major)[None, :]
        zm = np.zeros_like(zp)
        merr = np.zeros_like(perr)
        for i, vi in enumerate(v):
            M = matrix_M(self.s0, complex(0.5 - self.c, vi)).entries
            zm[i] = M @ np.conj(zp[i])
            merr[i] = np.abs(M) @ perr[i]
        for i, j in enumerate(js):
            self._table[int(j)] = (zp[i], zm[i], perr[i], merr[i])

    # -- evaluation ----------------------------------------------------------
    def _nodes(self, u: float) -> np.ndarray:
        lo = math.ceil((u - self.y_max) / self.step)
        hi = math.floor((u + self.y_max) / self.step)
        return np.arange(lo, hi + 1, dtype=np.int64)

    def _kernel(self, z, u):
        return _FRACS[self.frac](z, u, self.t) * kernel_F(u, self.t, z) * kernel_H(z) / z

    def evaluate(self, u: float) -> ZVector:
        u = float(u)
        js = self._nodes(u)
        self._fill(js)
        zp = np.array([self._table[int(j)][0] for j in js])
        zm = np.array([self._table[int(j)][1] for j in js])
        ep = np.array([self._table[int(j)][2] for j in js])
        em = np.array([self._table[int(j)][3] for j in js])
        y = js * self.step - u
        kp = self._kernel(self.c + 1j * y, u) * self.step / (2 * np.pi)
        km = self._kernel(-self.c + 1j * y, u) * self.step / (2 * np.pi)
        terms = kp[:, None] * zp - km[:, None] * zm
        value = terms.sum(axis=0)
        # trapezoid converges geometrically: the error at h is about the
        # square of the relative error at 2h
        coarse = 2 * terms[(js % 2) == 0].sum(axis=0)
        scale = np.abs(terms).sum(axis=0) + 1e-300
        quad = np.abs(value - coarse) ** 2 / scale
        edge = (np.abs(terms[0]) + np.abs(terms[-1])) / (2 * self.y_max * self.step)
        data = np.abs(kp) @ ep + np.abs(km) @ em
        comp_err = quad + edge + data
        meta = {
            "t": self.t, "u": u, "contour_c": self.c, "nodes": int(2 * js.size),
            "step": self.step, "frac": self.frac, "tail_correction": self.tail_correction,
            "component_err": comp_err, "d_max": self.plan.d_max,
            "near_switch": bool(abs(u) < NEAR_SWITCH or abs(u + self.t) < NEAR_SWITCH),
            "majorant": "empirical",
        }
        return ZVector((self.s0, complex(0.5, u)), value, Rep.CRITICAL,
                       float(comp_err.max()), meta)


def z_critical(t: float, u: float, contour_c: float = 2.0, plan: TruncationPlan | None = None,
               cache: LCache | None = DEFAULT_CACHE, frac: str = "poly",
               step: float = STEP, y_max: float = Y_MAX) -> ZVector:
    """All 16 components of Z(1/2+it, 1/2+iu)."""
    if abs(t) > 200 or abs(u) > 200:
        raise ValueError("z_critical is limited to |t|, |u| <= 200")
    c = contour_c
    for attempt in range(4):
        try:
            eng = CriticalEngine(t, c, plan, cache, step, y_max, frac)
            return eng.evaluate(u)
        except PoleError:
            if attempt == 3:
                raise
            c = c + 1e-2
    raise AssertionError("unreachable")
