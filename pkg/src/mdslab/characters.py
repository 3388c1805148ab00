"""Quadratic characters: Kronecker/Jacobi symbols, the characters mod 8,
squarefree decompositions and conductor data.

Conventions
-----------
``chi_d(n) = kronecker(d, n)`` where ``d`` is first replaced by the
discriminant ``d`` (if ``d = 0, 1 mod 4``) or ``4d`` (otherwise).  For odd
``n`` this is the Jacobi symbol ``(d/n)``; at ``n = 2`` it gives
``chi_d(2) = 0`` for ``d = 3 mod 4``, and ``chi_d(-1) = 1`` for ``d > 0``.

The four characters mod 8 are indexed 0..3 in the order
``psi1, psi-1, psi2, psi-2`` and are the Kronecker symbols of the
discriminants ``1, -4, 8, -8``.  Products of them correspond to XOR of
their indices.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "CharIndex", "CharDecomposition", "pair_index", "pair_from_index",
    "jacobi", "kronecker", "kronecker_standard", "decompose", "psi_value",
    "conductor_data", "tilde_chi", "fundamental_discriminant",
    "squarefree_parts", "smallest_prime_factor", "odd_primes_upto",
    "jacobi_table", "psi_array", "ALL_PSI",
]


class CharIndex(enum.IntEnum):
    """One of the four characters mod 8, in vector order."""

    PSI_1 = 0
    PSI_M1 = 1
    PSI_2 = 2
    PSI_M2 = 3

    @property
    def disc(self) -> int:
        """Discriminant whose Kronecker symbol is this character."""
        return (1, -4, 8, -8)[self]

    @property
    def kappa(self) -> int:
        """Parity: 0 for even characters, 1 for odd ones."""
        return (0, 1, 0, 1)[self]

    @property
    def label(self) -> str:
        return ("psi1", "psi-1", "psi2", "psi-2")[self]

    def __call__(self, n):
        return psi_value(self, n)

    def __mul__(self, other):
        if isinstance(other, CharIndex):
            return CharIndex(int(self) ^ int(other))
        return NotImplemented

    @classmethod
    def parse(cls, text) -> "CharIndex":
        """Accepts 'psi1', 'psi_-1', 'psim2', '-2', or an integer index."""
        if isinstance(text, (int, np.integer)) and not isinstance(text, bool):
            return cls(int(text))
        key = str(text).strip().lower().replace("_", "").replace("ψ", "psi")
        if key.startswith("psi"):
            key = key[3:]
        key = key.replace("m", "-")
        table = {"1": 0, "-1": 1, "2": 2, "-2": 3}
        if key not in table:
            raise ValueError(f"unknown character mod 8: {text!r}")
        return cls(table[key])


ALL_PSI = tuple(CharIndex)


def pair_index(psi, psi2) -> int:
    """Position of Z(.,.;psi,psi2) in the 16-vector: 4*ord(psi) + ord(psi2)."""
    return 4 * int(psi) + int(psi2)


def pair_from_index(k: int) -> tuple[CharIndex, CharIndex]:
    if not 0 <= k < 16:
        raise ValueError(f"pair index out of range: {k}")
    return CharIndex(k // 4), CharIndex(k % 4)


@dataclass(frozen=True)
class CharDecomposition:
    """d = d0*d1^2 with d0 squarefree; delta0/kappa describe chi_{d0}*psi."""

    d: int
    d0: int
    d1: int
    delta0: int | None = None
    kappa: int | None = None
    disc: int | None = None  # fundamental discriminant of the primitive character


# ---------------------------------------------------------------------------
# symbols

def jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd positive n."""
    if n <= 0 or n % 2 == 0:
        raise ValueError(f"Jacobi symbol needs odd positive modulus, got {n}")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def kronecker_standard(a: int, n: int) -> int:
    """The usual Kronecker symbol (a/n), any integers."""
    if n == 0:
        return 1 if a in (1, -1) else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            result = -result
    if n == 1:
        return result
    return result * jacobi(a, n)


def _as_discriminant(d: int) -> int:
    return d if d % 4 in (0, 1) else 4 * d


def kronecker(d: int, n: int) -> int:
    """chi_d(n): Kronecker symbol of the discriminant attached to d.

    Agrees with the Jacobi symbol for odd positive n; for odd d it gives
    chi_d(2) = 1, -1, 0 according as d = 1 (8), 5 (8), 3 (4).
    """
    n = int(n)
    d = int(d)
    if n == 0:
        raise ValueError("kronecker(d, n) is undefined for n = 0")
    if d == 0 and n in (1, -1):
        return 1
    return kronecker_standard(_as_discriminant(d), n)


def psi_value(psi, n) -> int:
    """psi(n) for psi in {psi1, psi-1, psi2, psi-2}; zero for even n."""
    psi = CharIndex.parse(psi) if not isinstance(psi, CharIndex) else psi
    n = int(n)
    if n % 2 == 0:
        return 0
    r = n % 8
    if psi == CharIndex.PSI_1:
        return 1
    if psi == CharIndex.PSI_M1:
        return 1 if r in (1, 5) else -1
    if psi == CharIndex.PSI_2:
        return 1 if r in (1, 7) else -1
    return 1 if r in (1, 3) else -1


_PSI_TABLE = np.array([[0, 1, 0, 1, 0, 1, 0, 1],
                       [0, 1, 0, -1, 0, 1, 0, -1],
                       [0, 1, 0, -1, 0, -1, 0, 1],
                       [0, 1, 0, 1, 0, -1, 0, -1]], dtype=np.int8)


def psi_array(psi, n) -> np.ndarray:
    """Vectorised psi(n) for an integer array n."""
    return _PSI_TABLE[int(psi)][np.asarray(n) % 8]


def tilde_chi(n: int, d: int) -> int:
    """chi~_n(d): chi_n(d) if n = 1 (4), chi_{-n}(d) if n = 3 (4)."""
    if n <= 0 or d <= 0 or n % 2 == 0 or d % 2 == 0:
        raise ValueError("tilde_chi needs odd positive arguments")
    return kronecker(n if n % 4 == 1 else -n, d)


# ---------------------------------------------------------------------------
# decompositions

def decompose(d: int) -> CharDecomposition:
    """Write odd d >= 1 as d0*d1^2 with d0 squarefree."""
    d = int(d)
    if d < 1 or d % 2 == 0:
        raise ValueError(f"decompose needs an odd positive integer, got {d}")
    d0, d1 = 1, 1
    m = d
    p = 3
    while p * p <= m:
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        if e:
            d1 *= p ** (e // 2)
            if e % 2:
                d0 *= p
        p += 2
    d0 *= m  # leftover prime (or 1)
    return CharDecomposition(d=d, d0=d0, d1=d1)


def fundamental_discriminant(d0: int, psi) -> int:
    """Discriminant of the primitive character inducing chi_{d0}*psi.

    d0 must be odd and squarefree.  With d0* = +-d0 = 1 (4) we have
    chi_{d0}(n) = (d0*/n) * psi_{-1}(n)^[d0 = 3 (4)] on odd n, so the
    primitive character is the Kronecker symbol of d0* * disc(psi'').
    """
    psi = CharIndex.parse(psi) if not isinstance(psi, CharIndex) else psi
    star = d0 if d0 % 4 == 1 else -d0
    twist = psi * CharIndex.PSI_M1 if d0 % 4 == 3 else psi
    return star * twist.disc


def conductor_data(d: int, psi) -> CharDecomposition:
    """Decomposition of d plus conductor and parity of chi_{d0}*psi."""
    psi = CharIndex.parse(psi) if not isinstance(psi, CharIndex) else psi
    base = decompose(d)
    disc = fundamental_discriminant(base.d0, psi)
    delta0 = abs(disc)
    kappa = 1 if disc < 0 else 0
    assert kappa == psi.kappa
    return CharDecomposition(d=base.d, d0=base.d0, d1=base.d1,
                             delta0=delta0, kappa=kappa, disc=disc)


# ---------------------------------------------------------------------------
# sieves and tables

@lru_cache(maxsize=8)
def smallest_prime_factor(n_max: int) -> np.ndarray:
    """spf[n] for 0 <= n <= n_max (spf[0] = spf[1] = 1)."""
    spf = np.zeros(n_max + 1, dtype=np.int64)
    spf[:2] = 1
    for p in range(2, math.isqrt(n_max) + 1):
        if spf[p] == 0:
            block = spf[p * p::p]
            block[block == 0] = p
    rest = spf == 0
    spf[rest] = np.nonzero(rest)[0]
    spf.setflags(write=False)
    return spf


def odd_primes_upto(n: int) -> np.ndarray:
    if n < 3:
        return np.zeros(0, dtype=np.int64)
    spf = smallest_prime_factor(max(n, 3))
    idx = np.arange(3, n + 1, 2)
    return idx[spf[idx] == idx]


@lru_cache(maxsize=8)
def squarefree_parts(n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Arrays (d0, d1) with d = d0*d1^2, d0 squarefree, for 0 <= d <= n_max."""
    d0 = np.arange(n_max + 1, dtype=np.int64)
    d1 = np.ones(n_max + 1, dtype=np.int64)
    for p in range(2, math.isqrt(n_max) + 1):
        if smallest_prime_factor(n_max)[p] != p:
            continue
        q = p * p
        while True:
            hit = np.nonzero(d0 % q == 0)[0]
            hit = hit[hit > 0]
            if hit.size == 0:
                break
            d0[hit] //= q
            d1[hit] *= p
    d0.setflags(write=False)
    d1.setflags(write=False)
    return d0, d1


def jacobi_table(m_values, n_values) -> np.ndarray:
    """Matrix of Jacobi symbols (n/m) for odd positive m (rows) and n >= 1.

    Built multiplicatively over the prime factorisation of m from Legendre
    tables, so the cost is small even for thousands of rows.
    """
    m_values = np.asarray(m_values, dtype=np.int64)
    n_values = np.asarray(n_values, dtype=np.int64)
    if np.any(m_values % 2 == 0) or np.any(m_values <= 0):
        raise ValueError("jacobi_table needs odd positive moduli")
    out = np.ones((m_values.size, n_values.size), dtype=np.int8)
    if m_values.size == 0:
        return out
    spf = smallest_prime_factor(int(m_values.max()) + 2)
    leg_cache: dict[int, np.ndarray] = {}
    for i, m in enumerate(m_values):
        m = int(m)
        while m > 1:
            p = int(spf[m])
            m //= p
            leg = leg_cache.get(p)
            if leg is None:
                leg = _legendre_residues(p)
                leg_cache[p] = leg
            out[i] *= leg[n_values % p]
    return out


def _legendre_residues(p: int) -> np.ndarray:
    leg = np.full(p, -1, dtype=np.int8)
    r = np.arange(1, p, dtype=np.int64)
    leg[(r * r) % p] = 1
    leg[0] = 0
    return leg
