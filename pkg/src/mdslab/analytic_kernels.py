"""Special functions and contour kernels.

Gamma quotients go through ``scipy.special.loggamma``/``rgamma``; everything
else (vertical-line quadrature, the kernels H, F_{u,t}, G, V and the
tabulated approximate-functional-equation weights) lives here.

Vertical integrals are written as ``(1/2 pi i) int_{(a)} f(z) dz`` and are
computed with composite Gauss-Legendre panels in ``y = Im z``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple

import numpy as np
from scipy import special

__all__ = [
    "PoleError", "QuadratureError", "ContourSpec", "KernelConfig", "QuadResult",
    "loggamma", "gamma_quotient", "gamma_ratio", "cot_half_pi", "kernel_H",
    "conductor_C", "kernel_F", "vertical_integral", "kernel_G", "kernel_G_result",
    "kernel_V", "kernel_V_result", "kernel_V_ut", "WeightTable", "afe_weight_table",
    "gl_nodes",
]

POLE_GUARD = 1e-6


class PoleError(ValueError):
    """Raised when an argument sits on (or too close to) a pole."""

    def __init__(self, msg, argument=None):
        super().__init__(msg)
        self.argument = argument


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class ContourSpec:
    """Vertical line Re z = abscissa, truncated at |Im z| <= height."""

    abscissa: float = 2.0
    height: float = 12.0
    nodes: int = 512

    def __post_init__(self):
        if not self.height > 0:
            raise ValueError("ContourSpec.height must be positive")
        if self.nodes < 16:
            raise ValueError("ContourSpec.nodes must be at least 16")

    def doubled(self) -> "ContourSpec":
        return replace(self, nodes=2 * self.nodes)


@dataclass(frozen=True)
class KernelConfig:
    A_decay: float = 8.0
    C_conductor: float = 1.0
    u: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        if not self.A_decay > 5:
            raise ValueError("A_decay must exceed 5")
        if not self.C_conductor > 0:
            raise ValueError("C_conductor must be positive")

    @classmethod
    def for_point(cls, u: float, t: float, A_decay: float = 8.0) -> "KernelConfig":
        return cls(A_decay=A_decay, C_conductor=conductor_C(u, t), u=u, t=t)


class QuadResult(NamedTuple):
    value: complex
    err: float
    nodes: int


# ---------------------------------------------------------------------------
# Gamma function helpers

def loggamma(z):
    """Principal log-Gamma for complex input (scipy)."""
    return special.loggamma(np.asarray(z, dtype=complex))


def _pole_distance(z):
    z = np.asarray(z, dtype=complex)
    near = np.round(z.real)
    d = np.abs(z - near)
    return np.where(near <= 0, d, np.inf)


def gamma_quotient(num=(), den=(), check=True):
    """prod Gamma(num) / prod Gamma(den), broadcasting over arrays.

    Denominator poles give exact zeros (via rgamma); numerator arguments
    within POLE_GUARD of a pole raise PoleError when ``check`` is set.
    """
    num = [np.asarray(a, dtype=complex) for a in num]
    den = [np.asarray(b, dtype=complex) for b in den]
    shape = np.broadcast_shapes(*(a.shape for a in num + den)) if num or den else ()
    logs = np.zeros(shape, dtype=complex)
    factor = np.ones(shape, dtype=complex)
    for a in num:
        if check:
            dist = _pole_distance(a)
            if np.any(dist < POLE_GUARD):
                bad = np.broadcast_to(a, shape)[np.broadcast_to(dist < POLE_GUARD, shape)][0]
                raise PoleError(f"Gamma pole at argument {bad}", bad)
        logs = logs + special.loggamma(a)
    for b in den:
        b = np.broadcast_to(b, shape)
        near = _pole_distance(b) < 1e-3
        if np.any(near):
            safe = np.where(near, 1.0, b)
            logs = logs - special.loggamma(safe)
            factor = factor * np.where(near, special.rgamma(b), 1.0)
        else:
            logs = logs - special.loggamma(b)
    out = factor * np.exp(logs)
    return out[()] if out.ndim == 0 else out


def gamma_ratio(s, z):
    """Gamma(s+z) / Gamma(conj(s) - z)."""
    s = np.asarray(s, dtype=complex)
    return gamma_quotient([s + z], [np.conj(s) - z])


def cot_half_pi(z):
    """cot(pi z / 2), evaluated stably for large |Im z|."""
    z = np.asarray(z, dtype=complex)
    dist = np.abs(z / 2 - np.round(z.real / 2))
    if np.any(dist * 2 < POLE_GUARD):
        bad = z[dist * 2 < POLE_GUARD] if z.ndim else z
        raise PoleError(f"cot(pi z/2) pole near z = {np.ravel(bad)[0]}", np.ravel(bad)[0])
    x = np.pi * z / 2
    up = x.imag >= 0
    e_up = np.exp(2j * np.where(up, x, 0))
    e_dn = np.exp(-2j * np.where(up, 0, x))
    with np.errstate(divide="ignore", invalid="ignore"):
        # np.where evaluates both branches; the unused one may divide by zero
        out = np.where(up, 1j * (e_up + 1) / (e_up - 1), 1j * (1 + e_dn) / (1 - e_dn))
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# kernels of the critical-line identity

def kernel_H(z):
    """H(z) = exp(z^2): even, H(0) = 1, |H(x+iy)| = exp(x^2 - y^2)."""
    z = np.asarray(z, dtype=complex)
    out = np.exp(z * z)
    return out[()] if out.ndim == 0 else out


def conductor_C(u: float, t: float) -> float:
    """C = |1/4 + i(u+t)/2| * |1/4 + iu/2|."""
    return abs(0.25 + 0.5j * (u + t)) * abs(0.25 + 0.5j * u)


def kernel_F(u: float, t: float, z, C: float | None = None):
    """F_{u,t}(z) = C^{-z/2} Q0 Gamma-quotient(z) / 2 + C^{z/2} / 2."""
    z = np.asarray(z, dtype=complex)
    C = conductor_C(u, t) if C is None else C
    a1 = 0.5 + 1j * u
    a2 = 0.5 + 1j * (u + t)
    q0 = gamma_quotient([np.conj(a1) / 2, np.conj(a2) / 2], [a1 / 2, a2 / 2])
    q = gamma_quotient([(a1 + z) / 2, (a2 + z) / 2],
                       [(np.conj(a1) - z) / 2, (np.conj(a2) - z) / 2])
    logC = math.log(C)
    out = 0.5 * np.exp(-z * logC / 2) * q0 * q + 0.5 * np.exp(z * logC / 2)
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# quadrature on vertical lines

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gl_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def _panel_nodes(edges, per_panel=16):
    x, w = gl_nodes(per_panel)
    a, b = edges[:-1, None], edges[1:, None]
    half = (b - a) / 2
    y = (a + b) / 2 + half * x[None, :]
    wt = half * w[None, :]
    return y.ravel(), wt.ravel()


def _line_nodes(height, nodes, fine=0.0, centres=(0.0,)):
    """Composite GL nodes on [-height, height].

    ``nodes`` sets the density of the outer panels; with ``fine > 0`` each
    band |y - c| < 8*fine around a centre c gets 16 narrow panels (for
    integrands with a pole at distance ~fine from the line).
    """
    per = 16
    panels = max(2, nodes // per)
    edges = np.linspace(-height, height, panels + 1)
    if fine > 0:
        inner = 8 * fine
        bands = [c for c in centres if abs(c) < height - inner]
        for c in bands:
            edges = edges[np.abs(edges - c) >= inner]
        extra = [np.linspace(c - inner, c + inner, 17) for c in bands]
        edges = np.unique(np.concatenate([edges, *extra]))
    return _panel_nodes(edges, per)


def vertical_integral(f: Callable[[np.ndarray], np.ndarray], spec: ContourSpec,
                      tol: float = 1e-10, max_nodes: int = 1 << 15,
                      fine: float = 0.0) -> QuadResult:
    """(1/2 pi i) int_{a - iH}^{a + iH} f(z) dz with node doubling.

    The reported error is the difference between the last two estimates.
    """
    nodes = spec.nodes
    prev = None
    while True:
        y, w = _line_nodes(spec.height, nodes, fine)
        z = spec.abscissa + 1j * y
        terms = w * f(z)
        val = np.sum(terms) / (2 * np.pi)
        # rounding floor: cancellation in the sum limits attainable accuracy
        floor = 64 * np.finfo(float).eps * np.sum(np.abs(terms)) / (2 * np.pi)
        if prev is not None:
            err = abs(val - prev)
            target = tol * max(1.0, abs(val)) + floor
            if err < target:
                return QuadResult(complex(val), float(max(err, floor)), nodes)
            if nodes >= max_nodes:
                raise QuadratureError(
                    f"vertical integral not converged: err {err:.3g} at {nodes} nodes")
        prev = val
        nodes *= 2


def _cos_factor(u, A):
    """cos(pi u / 4A)^(-4A), principal branch (Re u in (-2A, 2A))."""
    return np.exp(-4 * A * np.log(np.cos(np.pi * u / (4 * A))))


def kernel_G_result(t: float, xi: float, kappa: int, cfg: KernelConfig | None = None,
                    contour: ContourSpec | None = None, tol: float = 1e-10) -> QuadResult:
    """G_t(xi) as a vertical integral, with error estimate.

    If the abscissa is negative the residue 1 at z = 0 is added, so any
    abscissa in (-(1/2 + kappa), 2A) gives the same function.  The default
    contour uses abscissa 2 for xi >= 1/2 and 0.25 below, where xi^{-2}
    would otherwise cost many digits to cancellation.
    """
    if not xi > 0:
        raise ValueError("kernel_G needs xi > 0")
    cfg = cfg or KernelConfig()
    if contour is None:
        contour = ContourSpec(abscissa=2.0 if xi >= 0.5 else 0.25, height=40.0, nodes=1024)
    A = cfg.A_decay
    s0 = 0.5 + 1j * t + kappa
    lg0 = special.loggamma(s0 / 2)
    lx = math.log(xi)

    def f(z):
        return (_cos_factor(z, A) * np.exp(special.loggamma((s0 + z) / 2) - lg0 - z * lx) / z)

    res = vertical_integral(f, contour, tol=tol, fine=min(0.25, abs(contour.abscissa)))
    if contour.abscissa < 0:
        res = QuadResult(res.value + 1.0, res.err, res.nodes)
    return res


def kernel_G(t: float, xi: float, kappa: int, cfg: KernelConfig | None = None,
             contour: ContourSpec | None = None) -> complex:
    """The weight G_t(xi) of the approximate functional equation."""
    return kernel_G_result(t, xi, kappa, cfg, contour).value


def kernel_V_result(xi: float, contour: ContourSpec | None = None,
                    tol: float = 1e-12) -> QuadResult:
    if not xi > 0:
        raise ValueError("kernel_V needs xi > 0")
    contour = contour or ContourSpec(abscissa=1.0, height=12.0, nodes=512)
    lx = math.log(math.pi ** 2 * xi)

    def f(z):
        return np.exp(z * z - z * lx) / z

    res = vertical_integral(f, contour, tol=tol, fine=min(0.25, abs(contour.abscissa)))
    if contour.abscissa < 0:
        res = QuadResult(res.value + 1.0, res.err, res.nodes)
    return res


def kernel_V(xi: float, contour: ContourSpec | None = None) -> float:
    """V(xi) = (1/2 pi i) int_{(1)} pi^{-2z} H(z) xi^{-z} dz/z (real)."""
    return kernel_V_result(xi, contour).value.real


def kernel_V_ut(xi, u: float, t: float, kappa2: int, kappa3: int,
                eps: float = 0.25, height: float = 10.0, panels: int = 160):
    """V_{u,t}^{(k2,k3)}(xi) on the imaginary axis, indented to the right of 0.

    The contour is [-i inf, -i eps] + right semicircle + [i eps, i inf];
    H(z) = exp(z^2) makes truncation at |Im z| = height harmless.
    Accepts an array of xi.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    C = conductor_C(u, t)
    # straight pieces
    edges = np.linspace(eps, height, panels + 1)
    y, w = _panel_nodes(edges)
    z_up = 1j * y
    z_dn = -1j * y[::-1]
    w_dn = w[::-1]
    # semicircle z = eps e^{i theta}, theta from -pi/2 to pi/2
    th, wth = _panel_nodes(np.linspace(-np.pi / 2, np.pi / 2, 9))
    z_arc = eps * np.exp(1j * th)
    dz_arc = 1j * z_arc * wth
    z_all = np.concatenate([z_dn, z_arc, z_up])
    dz_all = np.concatenate([1j * w_dn, dz_arc, 1j * w])

    g = np.ones_like(z_all)
    if kappa2:
        g = g * cot_half_pi(0.5 + 1j * (u + t) - z_all)
    if kappa3:
        g = g * cot_half_pi(0.5 + 1j * u - z_all)
    g = g * np.exp(-z_all * math.log(C) / 2) * kernel_F(u, t, z_all, C)
    g = g * np.exp(z_all * z_all - 2 * z_all * math.log(math.pi)) / z_all
    phase = np.exp(-np.outer(np.log(xi), z_all))
    out = phase @ (g * dz_all) / (2j * np.pi)
    return out if out.size > 1 else out[0]


# ---------------------------------------------------------------------------
# tabulated weights for the L-function engine

@dataclass
class WeightTable:
    """Samples of a smooth weight T and of T', T'' on x0 + h*k, k = 0..n-1."""

    x0: float
    h: float
    val: np.ndarray
    der: np.ndarray
    der2: np.ndarray
    x_cut: float  # T is below the cut tolerance for x >= x_cut

    def __call__(self, x):
        """Quintic Hermite interpolation."""
        x = np.asarray(x, dtype=float)
        pos = (x - self.x0) / self.h
        k = np.clip(np.floor(pos).astype(np.int64), 0, self.val.size - 2)
        r = pos - k
        return _quintic(r, self.h, self.val[k], self.der[k], self.der2[k],
                        self.val[k + 1], self.der[k + 1], self.der2[k + 1])


def _quintic(r, h, f0, d0, e0, f1, d1, e1):
    r2 = r * r
    r3 = r2 * r
    r4 = r3 * r
    r5 = r4 * r
    return ((1 - 10 * r3 + 15 * r4 - 6 * r5) * f0
            + (r - 6 * r3 + 8 * r4 - 3 * r5) * h * d0
            + 0.5 * (r2 - 3 * r3 + 3 * r4 - r5) * h * h * e0
            + 0.5 * (r3 - 2 * r4 + r5) * h * h * e1
            + (-4 * r3 + 7 * r4 - 3 * r5) * h * d1
            + (10 * r3 - 15 * r4 + 6 * r5) * f1)


def afe_weight_table(shift: complex, kappa: int, A: float, x_lo: float,
                     normalized: bool = True, h: float = 1 / 256,
                     cut_tol: float = 1e-14, x_hi: float | None = None,
                     cut_exp: float = 0.0) -> WeightTable:
    """Tabulate W(x) = (1/2 pi i) int G(u) Gamma((shift+u+kappa)/2) e^{-ux} du/u.

    G(u) = cos(pi u / 4A)^{-4A}.  With ``normalized`` the Gamma factor is
    divided by Gamma((shift+kappa)/2) so W -> 1 as x -> -inf.  For small x the
    contour sits just right of u = 0 and of every Gamma pole, which keeps
    the cancellation mild; past the transition it moves further right so
    that the rounding noise decays with W.  ``x_cut`` is where |W(x)| e^{cut_exp x}
    drops below ``cut_tol`` times its peak past the split (at least 1).
    """
    sk = complex(shift) + kappa
    rightmost = -sk.real  # largest real part of the Gamma poles u = -sk - 2k
    a = max(0.0, rightmost) + 0.3
    if a >= 2 * A - 4:
        raise PoleError(f"contour abscissa {a} too close to the G-factor poles (A={A})", a)
    scale = max(abs(sk), 1.0)
    if x_hi is None:
        # |W| ~ exp(-2A (log r)^2 / pi^2) with r = e^x / sqrt(|shift|/2)
        x_hi = 0.5 * math.log(scale / 2) + math.pi * math.sqrt(40.0 / (2 * A)) + 1.0
    n = int(math.ceil((x_hi - x_lo) / h)) + 2
    x = x_lo + h * np.arange(n)
    # right of the transition x ~ log(|shift|/2)/2 the shifted line gains e^{-3x}
    # faster than its Gamma factor grows
    neg = x < 0.5 * math.log(scale / 2) + 0.5
    val = np.empty(n, dtype=complex)
    der = np.empty(n, dtype=complex)
    der2 = np.empty(n, dtype=complex)
    for sel, abscissa in ((neg, a), (~neg, a + 3.0)):
        if np.any(sel):
            val[sel], der[sel], der2[sel] = _weight_segment(
                x[sel], sk, A, abscissa, normalized, h)
    mag = np.abs(val) * np.exp(cut_exp * x)
    ref = mag[~neg].max() if np.any(~neg) else mag.max()
    above = np.nonzero(mag > cut_tol * max(1.0, ref))[0]
    if above.size and above[-1] + 1 >= n:
        if x_hi - x_lo > 40:
            raise QuadratureError("weight table does not decay; check A and shift")
        return afe_weight_table(shift, kappa, A, x_lo, normalized, h, cut_tol, x_hi + 2.0,
                                cut_exp)
    x_cut = x[above[-1] + 1] if above.size else x[0]
    return WeightTable(x0=float(x_lo), h=h, val=val, der=der, der2=der2, x_cut=float(x_cut))


def _weight_segment(x, sk, A, a, normalized, h):
    """W, W', W'' on the uniform grid x (step h) from the line Re u = a."""
    x_lo, x_hi = x[0], x[-1]
    n = x.size
    # the integrand decays like exp(-3 pi |y| / 4) or faster in both directions
    height = 60.0
    # panel width small enough to resolve e^{-i y x} over the whole x range
    width = min(1.0, 8.0 / max(abs(x_lo), abs(x_hi), 1.0))
    y, wy = _line_nodes(height, int(16 * 2 * height / width), fine=0.1,
                        centres=(0.0, -sk.imag))
    u = a + 1j * y
    lg = special.loggamma((sk + u) / 2) - 4 * A * np.log(np.cos(np.pi * u / (4 * A)))
    if normalized:
        lg = lg - special.loggamma(sk / 2)
    core = np.exp(lg) * wy / (2 * np.pi)
    # drop nodes whose contribution is negligible even after e^{-ux} growth
    growth = math.exp(a * max(0.0, -x_lo))
    keep = np.abs(core) * growth > 1e-22 * np.max(np.abs(core))
    u, core = u[keep], core[keep]
    # e^{-u x} factored over blocks: x = X_b + k h
    block = 64
    nb = -(-n // block)
    eb = np.exp(-np.outer(x_lo + h * block * np.arange(nb), u))
    ek = np.exp(-np.outer(u, h * np.arange(block)))
    val = ((eb * (core / u)) @ ek).reshape(-1)[:n]
    der = -((eb * core) @ ek).reshape(-1)[:n]
    der2 = ((eb * (core * u)) @ ek).reshape(-1)[:n]
    return val, der, der2
