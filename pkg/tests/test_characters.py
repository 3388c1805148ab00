import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mdslab.characters import (CharIndex, conductor_data, decompose, jacobi, jacobi_table,
                               kronecker, pair_from_index, pair_index, psi_array,
                               psi_value, squarefree_parts, tilde_chi)

odd = st.integers(min_value=0, max_value=2000).map(lambda k: 2 * k + 1)


def euler_legendre(a, p):
    """(a/p) for an odd prime p by Euler's criterion."""
    r = pow(a % p, (p - 1) // 2, p)
    return 0 if r == 0 else (1 if r == 1 else -1)


def factor(n):
    out, p = [], 2
    while p * p <= n:
        while n % p == 0:
            out.append(p)
            n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def jacobi_oracle(a, n):
    return math.prod(euler_legendre(a, p) for p in factor(n)) if n > 1 else 1


def test_kronecker_examples():
    assert kronecker(1, 7) == 1
    assert kronecker(17, 2) == 1
    assert kronecker(5, 3) == -1


def test_kronecker_rejects_zero():
    with pytest.raises(ValueError):
        kronecker(5, 0)


@given(odd, odd)
def test_jacobi_matches_euler_oracle(a, n):
    assert jacobi(a, n) == jacobi_oracle(a, n)
    assert kronecker(a, n) == jacobi_oracle(a, n)


@given(st.integers(1, 200), st.integers(1, 200), st.integers(1, 200))
def test_multiplicative_in_n(d, n, m):
    d = 2 * d - 1
    assert kronecker(d, n * m) == kronecker(d, n) * kronecker(d, m)


def test_even_convention():
    for d in range(1, 200, 2):
        for n in range(1, 60, 2):
            # chi_d(-n) = chi_d(-1) chi_d(n) with chi_d(-1) = 1
            assert tilde_chi(n, d) == kronecker(d, n)


def test_2factor_table():
    for d in range(1, 20001, 2):
        want = 1 if d % 8 == 1 else (-1 if d % 8 == 5 else 0)
        assert kronecker(d, 2) == want


def test_decompose_examples():
    assert (decompose(45).d0, decompose(45).d1) == (5, 3)
    assert (decompose(1).d0, decompose(1).d1) == (1, 1)
    assert (decompose(75).d0, decompose(75).d1) == (3, 5)
    for bad in (0, -3, 8):
        with pytest.raises(ValueError):
            decompose(bad)


@given(odd)
def test_decompose_property(d):
    c = decompose(d)
    assert c.d0 * c.d1 ** 2 == d
    assert all(c.d0 % (p * p) for p in range(3, int(math.isqrt(c.d0)) + 1, 2))


def test_squarefree_parts_table():
    d0, d1 = squarefree_parts(999)
    for d in range(1, 1000, 2):
        c = decompose(d)
        assert (d0[d], d1[d]) == (c.d0, c.d1)


def test_psi_examples():
    assert psi_value(CharIndex.PSI_2, 7) == 1
    assert psi_value(CharIndex.PSI_2, 3) == -1
    assert psi_value(CharIndex.PSI_M1, 3) == -1
    for psi in CharIndex:
        assert psi_value(psi, 1) == 1
        assert psi_value(psi, 6) == 0


@given(st.sampled_from(list(CharIndex)), odd, odd)
def test_psi_multiplicative(psi, n, m):
    assert psi_value(psi, n * m) == psi_value(psi, n) * psi_value(psi, m)


def test_psi_array_matches_scalar():
    n = np.arange(-20, 40)
    for psi in CharIndex:
        assert list(psi_array(psi, n)) == [psi_value(psi, int(k)) for k in n]


def test_pair_indexing():
    seen = set()
    for k in range(16):
        p, q = pair_from_index(k)
        assert pair_index(p, q) == k == 4 * int(p) + int(q)
        seen.add((p, q))
    assert len(seen) == 16
    assert CharIndex.parse("psi-2") is CharIndex.PSI_M2
    assert CharIndex.PSI_M1 * CharIndex.PSI_2 is CharIndex.PSI_M2


def test_conductor_examples():
    c = conductor_data(5, CharIndex.PSI_1)
    assert (c.delta0, c.kappa) == (5, 0)
    c = conductor_data(3, CharIndex.PSI_1)
    assert (c.delta0, c.kappa) == (12, 0)
    c = conductor_data(5, CharIndex.PSI_2)
    assert (c.delta0, c.kappa) == (40, 0)


def _min_period(values):
    q = len(values)
    for p in range(1, q + 1):
        if q % p == 0 and all(values[i] == values[i % p] for i in range(q)):
            return p
    return q


def test_conductor_is_minimal_period():
    """chi_{d0} psi on all n (even n included, where it vanishes) has exact
    period delta0, checked by brute force over two periods."""
    for d0 in range(1, 101, 2):
        if decompose(d0).d1 != 1:
            continue
        for psi in CharIndex:
            cd = conductor_data(d0, psi)
            q = cd.delta0
            vals = [kronecker(cd.disc, n) for n in range(1, 2 * q + 1)]
            # agreement with chi_{d0} psi on odd n
            for n in range(1, 2 * q, 2):
                assert vals[n - 1] == kronecker(d0, n) * psi_value(psi, n)
            assert _min_period(vals) == q
            assert cd.kappa == psi.kappa


def test_tilde_chi_examples():
    assert tilde_chi(5, 3) == -1
    assert tilde_chi(3, 5) == -1
    for d in range(1, 100, 2):
        for n in range(1, 100, 2):
            assert tilde_chi(n, d) == kronecker(d, n)


@settings(max_examples=50)
@given(st.lists(odd, min_size=1, max_size=8), st.lists(odd, min_size=1, max_size=8))
def test_jacobi_table(ms, ns):
    T = jacobi_table(np.array(ms), np.array(ns))
    for i, m in enumerate(ms):
        for j, n in enumerate(ns):
            assert T[i, j] == jacobi(n, m)
