"""Functional-equation matrices and analytic continuation of the 16-vector.

Z(s, w) = A Z(w, s)                      (alpha: (s, w) -> (w, s))
Z(s, w) = B(s) Z(1 - s, s + w - 1/2)     (beta:  (s, w) -> (1-s, s+w-1/2))

A has entries in {0, +-1/2}; B(s) is block diagonal with one 4x4 block per
psi.  Iterating gives Z(s, w) = M(s, w) Z(1 - s, 1 - w) with
M(s, w) = B(s) A B(s + w - 1/2) A B(w) A.

``continue_z`` walks the 12-element orbit of a point under alpha, beta in
shortlex order and evaluates Z at the first orbit point that one of the
convergent representations of ``zcore`` accepts.
"""
from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .analytic_kernels import PoleError, gamma_quotient
from .zcore import (DEFAULT_CACHE, Rep, TruncationPlan, ZVector, choose_rep,
                    z_components)

__all__ = [
    "FEKind", "FEMatrix", "PointMap", "DegenerateOrbitError", "NoOrbitPointError",
    "matrix_A", "matrix_A_exact", "matrix_B", "matrix_M", "alpha", "beta",
    "identity_map", "word_map", "group_elements", "group_orbit", "continue_z",
    "MATRIX_GUARD", "POLAR_GUARD",
]

MATRIX_GUARD = 1e-6
POLAR_GUARD = 1e-3


class DegenerateOrbitError(ValueError):
    """Two orbit points coincide (special point)."""


class NoOrbitPointError(ValueError):
    """No point of the orbit is evaluable by a convergent representation."""


class FEKind(str, enum.Enum):
    A = "A"
    B = "B"
    M = "M"


@dataclass(frozen=True)
class FEMatrix:
    entries: np.ndarray
    kind: FEKind
    at: tuple = ()

    def __post_init__(self):
        e = np.array(self.entries, dtype=complex)
        if e.shape != (16, 16):
            raise ValueError("FEMatrix must be 16x16")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    def __matmul__(self, other):
        if isinstance(other, FEMatrix):
            return self.entries @ other.entries
        if isinstance(other, ZVector):
            return self.entries @ other.values
        return self.entries @ np.asarray(other)

    def block(self, k: int) -> np.ndarray:
        return self.entries[4 * k:4 * k + 4, 4 * k:4 * k + 4]


# ---------------------------------------------------------------------------
# A

_A_ROWS = (
    (1, 1, 0, 0, 1, -1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (1, -1, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 0, 0, 1, -1, 0, 0),
    (0, 0, 0, 0, 0, 0, 0, 0, 1, -1, 0, 0, 1, 1, 0, 0),
    (1, 1, 0, 0, -1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (-1, 1, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 0, 0, -1, 1, 0, 0),
    (0, 0, 0, 0, 0, 0, 0, 0, -1, 1, 0, 0, 1, 1, 0, 0),
    (0, 0, 1, 1, 0, 0, 1, -1, 0, 0, 0, 0, 0, 0, 0, 0),
    (0, 0, 1, -1, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0),
    (0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 0, 0, 1, -1),
    (0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, -1, 0, 0, 1, 1),
    (0, 0, 1, 1, 0, 0, -1, 1, 0, 0, 0, 0, 0, 0, 0, 0),
    (0, 0, -1, 1, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0),
    (0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 0, 0, -1, 1),
    (0, 0, 0, 0, 0, 0, 0, 0, 0, 0, -1, 1, 0, 0, 1, 1),
)


def matrix_A_exact() -> list[list[Fraction]]:
    """A with Fraction entries, for exact-arithmetic checks."""
    half = Fraction(1, 2)
    return [[half * v for v in row] for row in _A_ROWS]


def matrix_A() -> FEMatrix:
    """A; the entries 0, +-1/2 are exact in binary floating point."""
    return FEMatrix(0.5 * np.array(_A_ROWS, dtype=float), FEKind.A)


# ---------------------------------------------------------------------------
# B(s)

def _gamma_factor(num, den, label):
    try:
        return complex(gamma_quotient([num], [den]))
    except PoleError as exc:
        raise PoleError(f"B(s): {label} has a pole (argument {exc.argument})",
                        exc.argument) from None


def _check_four(s, guard):
    v = 4 ** s - 4
    if abs(v) <= guard:
        raise PoleError(f"B(s): factor 4^s - 4 vanishes at s = {s}", s)
    return v


def _blocks(s: complex, guard: float) -> list[np.ndarray]:
    p4 = 4.0 ** (1 - s)
    a = 2.0 ** (1 - s) - 2.0 ** s
    f1 = np.exp((s - 0.5) * math.log(math.pi))
    f3 = np.exp((s - 0.5) * math.log(math.pi / 8))
    g1 = _gamma_factor((1 - s) / 2, s / 2, "Gamma((1-s)/2)")
    g2 = _gamma_factor((2 - s) / 2, (s + 1) / 2, "Gamma((2-s)/2)")
    four = _check_four(s, guard)
    b1 = f1 * g1 / four * np.array([
        [-p4, p4 - 2, a, a],
        [p4 - 2, -p4, a, a],
        [a, a, -p4, p4 - 2],
        [a, a, p4 - 2, -p4]])
    b2 = f1 * g2 / four * np.array([
        [-p4, 2 - p4, a, -a],
        [2 - p4, -p4, -a, a],
        [a, -a, -p4, 2 - p4],
        [-a, a, 2 - p4, -p4]])
    b3 = f3 * g1 * np.eye(4)
    b4 = f3 * g2 * np.eye(4)
    return [b1, b2, b3, b4]


def matrix_B(s, guard: float = MATRIX_GUARD) -> FEMatrix:
    """Block-diagonal B(s) = diag(B1, B2, B3, B4)."""
    s = complex(s)
    out = np.zeros((16, 16), dtype=complex)
    for k, blk in enumerate(_blocks(s, guard)):
        out[4 * k:4 * k + 4, 4 * k:4 * k + 4] = blk
    return FEMatrix(out, FEKind.B, (s,))


def matrix_M(s, w, guard: float = MATRIX_GUARD) -> FEMatrix:
    """M(s, w) = B(s) A B(s+w-1/2) A B(w) A, so Z(s,w) = M Z(1-s, 1-w)."""
    s, w = complex(s), complex(w)
    A = matrix_A().entries
    out = (matrix_B(s, guard).entries @ A @ matrix_B(s + w - 0.5, guard).entries
           @ A @ matrix_B(w, guard).entries @ A)
    return FEMatrix(out, FEKind.M, (s, w))


# ---------------------------------------------------------------------------
# the group generated by alpha and beta

@dataclass(frozen=True)
class PointMap:
    """(s, w) -> mat @ (s, w) + off with exact rational coefficients.

    ``word`` lists the generators in the order they are applied.
    """

    mat: tuple[tuple[int, int], tuple[int, int]]
    off: tuple[Fraction, Fraction]
    word: tuple[str, ...] = field(default=(), compare=False)

    def __call__(self, s, w):
        (a, b), (c, d) = self.mat
        return (a * s + b * w + float(self.off[0]), c * s + d * w + float(self.off[1]))

    def then(self, other: "PointMap") -> "PointMap":
        """Apply self first, then other."""
        (a, b), (c, d) = other.mat
        (e, f), (g, h) = self.mat
        mat = ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))
        off = (a * self.off[0] + b * self.off[1] + other.off[0],
               c * self.off[0] + d * self.off[1] + other.off[1])
        return PointMap(mat, off, self.word + other.word)

    @property
    def key(self):
        return (self.mat, self.off)

    def is_identity(self) -> bool:
        return self.key == identity_map().key


def identity_map() -> PointMap:
    return PointMap(((1, 0), (0, 1)), (Fraction(0), Fraction(0)), ())


def alpha() -> PointMap:
    return PointMap(((0, 1), (1, 0)), (Fraction(0), Fraction(0)), ("a",))


def beta() -> PointMap:
    return PointMap(((-1, 0), (1, 1)), (Fraction(1), Fraction(-1, 2)), ("b",))


_GEN = {"a": alpha, "b": beta}


def word_map(word) -> PointMap:
    """Composite map of a word over {'a', 'b'} (applied left to right)."""
    m = identity_map()
    for g in word:
        if g not in _GEN:
            raise ValueError(f"unknown generator {g!r}")
        m = m.then(_GEN[g]())
    return m


def group_elements(max_len: int = 12) -> list[PointMap]:
    """Distinct group elements, each with its shortlex-least word."""
    seen = {identity_map().key: identity_map()}
    order = [identity_map()]
    queue = deque([identity_map()])
    while queue:
        m = queue.popleft()
        if len(m.word) >= max_len:
            continue
        for g in ("a", "b"):
            n = m.then(_GEN[g]())
            if n.key not in seen:
                seen[n.key] = n
                order.append(n)
                queue.append(n)
    return order


def group_orbit(s, w, tol: float = 1e-6) -> list[tuple[PointMap, tuple[complex, complex]]]:
    """The orbit of (s, w) with the reduced word reaching each point."""
    s, w = complex(s), complex(w)
    out = [(m, m(s, w)) for m in group_elements()]
    pts = np.array([p for _, p in out])
    for i in range(len(pts)):
        for j in range(i):
            if np.max(np.abs(pts[i] - pts[j])) < tol:
                raise DegenerateOrbitError(
                    f"orbit points {out[j][0].word} and {out[i][0].word} coincide at ({s}, {w})")
    return out


# ---------------------------------------------------------------------------
# continuation

def _polar_check(s, w, guard):
    if abs(s - 1) < guard:
        raise PoleError(f"polar line s=1 at (s,w)=({s}, {w})", s)
    if abs(w - 1) < guard:
        raise PoleError(f"polar line w=1 at (s,w)=({s}, {w})", w)
    if abs(s + w - 1.5) < guard:
        raise PoleError(f"polar line s+w=3/2 at (s,w)=({s}, {w})", s + w)


def word_matrix(word, s, w, guard: float = MATRIX_GUARD) -> np.ndarray:
    """Matrix P with Z(s, w) = P Z(word(s, w))."""
    A = matrix_A().entries
    P = np.eye(16, dtype=complex)
    for g in word:
        if g == "a":
            P = P @ A
            s, w = w, s
        else:
            P = P @ matrix_B(s, guard).entries
            s, w = 1 - s, s + w - 0.5
    return P


def continue_z(s, w, plan: TruncationPlan | None = None, cache=DEFAULT_CACHE,
               polar_guard: float = POLAR_GUARD,
               matrix_guard: float = MATRIX_GUARD) -> ZVector:
    """Z(s, w) anywhere off the polar lines, through the orbit."""
    s, w = complex(s), complex(w)
    plan = plan or TruncationPlan()
    _polar_check(s, w, polar_guard)
    for m in group_elements():
        p = m(s, w)
        rep = choose_rep(p[0], p[1], plan)
        if rep is None:
            continue
        try:
            P = word_matrix(m.word, s, w, matrix_guard)
        except PoleError:
            continue
        z = z_components(p[0], p[1], rep, plan, None, cache)
        values = P @ z.values
        amp = float(np.max(np.sum(np.abs(P), axis=1)))
        meta = dict(z.meta)
        meta.update(word="".join(m.word), inner_rep=rep.value, inner_point=p,
                    amplification=amp)
        return ZVector((s, w), values, Rep.CONTINUED, amp * z.err, meta)
    raise NoOrbitPointError(f"no orbit point of ({s}, {w}) is evaluable; use critical_line")
