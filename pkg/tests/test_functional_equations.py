from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mdslab.analytic_kernels import PoleError
from mdslab.functional_equations import (DegenerateOrbitError, alpha, beta, continue_z,
                                         group_elements, group_orbit, matrix_A,
                                         matrix_A_exact, matrix_B, matrix_M, word_map,
                                         word_matrix)
from mdslab.zcore import Rep, TruncationPlan, z_vector

coord = st.tuples(st.floats(-3, 4), st.floats(-8, 8)).map(lambda p: complex(*p))


def test_A_exact_involution():
    A = matrix_A_exact()
    for i in range(16):
        row = [v for v in A[i] if v != 0]
        assert len(row) == 4 and all(abs(v) == Fraction(1, 2) for v in row)
        for j in range(16):
            assert sum(A[i][k] * A[k][j] for k in range(16)) == (1 if i == j else 0)
    assert np.array_equal(matrix_A().entries.real, np.array(A, dtype=float))


def test_A_first_row():
    A = matrix_A().entries.real
    assert list(np.nonzero(A[0])[0]) == [0, 1, 4, 5]
    assert list(A[0, [0, 1, 4, 5]]) == [0.5, 0.5, 0.5, -0.5]


@settings(max_examples=40, deadline=None)
@given(coord)
def test_B_involution(s):
    try:
        P = matrix_B(s).entries @ matrix_B(1 - s).entries
    except PoleError:
        return
    assert np.max(np.abs(P - np.eye(16))) < 1e-9


def test_B_special_values():
    assert np.max(np.abs(matrix_B(0.0).block(0))) < 1e-12
    Bh = matrix_B(0.5)
    for k in (2, 3):
        assert np.max(np.abs(Bh.block(k) - np.eye(4))) < 1e-12
    B = matrix_B(0.3 + 2j).entries
    off = B.copy()
    for k in range(4):
        off[4 * k:4 * k + 4, 4 * k:4 * k + 4] = 0
    assert not off.any()


def test_B_reflection():
    s = 0.3 + 2j
    assert np.max(np.abs(np.conj(matrix_B(s).entries) - matrix_B(np.conj(s)).entries)) < 1e-14


@settings(max_examples=25, deadline=None)
@given(coord, coord)
def test_M_involution(s, w):
    try:
        P = matrix_M(s, w).entries @ matrix_M(1 - s, 1 - w).entries
    except PoleError:
        return
    scale = np.abs(matrix_M(s, w).entries).max() * np.abs(matrix_M(1 - s, 1 - w).entries).max()
    assert np.max(np.abs(P - np.eye(16))) < 1e-9 * max(1.0, scale)


def test_M_zero_pattern():
    Z = np.abs(matrix_M(0.5 + 1.3j, 0.5 + 0.7j).entries) < 1e-12
    assert Z.sum() == 124
    Z2 = np.abs(matrix_M(0.5 - 0.4j, 0.5 + 2.1j).entries) < 1e-12
    assert np.array_equal(Z, Z2)


def test_M_is_word_matrix():
    s, w = 0.2 + 0.4j, 0.6 - 1.1j
    # alpha beta alpha beta alpha beta sends (s, w) to (1-s, 1-w)
    word = "babab" + "a"
    assert np.allclose(word_map(word)(s, w), (1 - s, 1 - w))
    assert np.max(np.abs(word_matrix(word, s, w) - matrix_M(s, w).entries)) < 1e-12


def test_orbit_size_and_relations():
    orbit = group_orbit(0.3 + 1j, 0.8 - 2j)
    assert len(orbit) == 12
    assert len(group_elements()) == 12
    assert alpha().then(alpha()).is_identity()
    assert beta().then(beta()).is_identity()
    assert word_map("ab" * 6).is_identity()
    assert not word_map("ab" * 3).is_identity()
    pts = [p for _, p in orbit]
    assert pts[0] == (0.3 + 1j, 0.8 - 2j)


def test_degenerate_orbit():
    # the fixed point of alpha and beta: s = w, s = 1 - s
    with pytest.raises(DegenerateOrbitError):
        group_orbit(0.5, 0.5)
    # beta sends this point onto the diagonal s = w, which alpha fixes
    assert beta()(0.3 + 1j, 0.9 - 2j) == (0.7 - 1j, 0.7 - 1j)
    with pytest.raises(DegenerateOrbitError):
        group_orbit(0.3 + 1j, 0.9 - 2j)


def test_word_map_rejects_unknown():
    with pytest.raises(ValueError):
        word_map("abc")


def test_continue_identity_in_region():
    z = continue_z(2.6, 2.6)
    assert z.meta["word"] == "" and z.meta["inner_rep"] == "direct"
    assert np.max(np.abs(z.values - z_vector(2.6, 2.6).values)) < 1e-14


def test_continue_word_b():
    s, w = -1.0, 3.0
    z = continue_z(s, w)
    assert z.meta["word"] == "b"
    inner = z_vector(2.0, 1.5)
    assert np.max(np.abs(z.values - matrix_B(s).entries @ inner.values)) < 1e-12


def test_continue_round_trip():
    s, w = 2.2, 2.4
    direct = z_vector(s, w)
    M = matrix_M(s, w).entries
    far = continue_z(1 - s, 1 - w)
    res = np.max(np.abs(direct.values - M @ far.values))
    assert res <= direct.err + np.abs(M).sum(1).max() * far.err
    assert res < 1e-5


def test_continue_deterministic_word():
    plan = TruncationPlan(4000, 4000, 1e-2)
    a = continue_z(-1 + 1j, 3 - 1j, plan)
    b = continue_z(-1 + 1j, 3 - 1j, plan)
    assert np.array_equal(a.values, b.values)
    assert a.rep is Rep.CONTINUED
    # the word depends on the real parts only
    words = {continue_z(complex(-1, y1), complex(3, y2), plan).meta["word"]
             for y1, y2 in [(1, -1), (-4, 2), (7, 5)]}
    assert words == {a.meta["word"]}


def test_continue_polar_lines():
    for s, w in [(1.0, 0.3), (0.3, 1.0), (0.7, 0.8)]:
        with pytest.raises(PoleError, match="polar line"):
            continue_z(s, w)


def test_fe_A_residual_small_plan():
    plan = TruncationPlan(4000, 4000, 1e-2)
    z1, z2 = z_vector(2.5, 3.0, plan), z_vector(3.0, 2.5, plan)
    res = np.max(np.abs(z1.values - matrix_A().entries @ z2.values))
    assert res <= z1.err + 2 * z2.err
