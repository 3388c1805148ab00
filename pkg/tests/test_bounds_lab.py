import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mdslab import bounds_lab as bl
from mdslab.characters import CharIndex, conductor_data, psi_value
from mdslab.critical_line import z_critical
from mdslab.functional_equations import matrix_A
from mdslab.lfunctions import Method, l2_value

PSI1 = CharIndex.PSI_1


# ---------------------------------------------------------------- weights

def test_smooth_step_and_partition():
    x = np.linspace(0, 3, 301)
    phi = bl.smooth_step(x)
    assert np.all(phi[x <= 1] == 1) and np.all(phi[x >= 2] == 0)
    assert np.all(np.diff(phi) <= 0)
    piece = bl.partition_piece()
    # dyadic dilates telescope to phi(x / 2^J) for x >= 1
    y = np.linspace(1, 40, 500)
    acc = sum(piece(y / 2 ** j) for j in range(6))
    assert np.max(np.abs(acc - bl.smooth_step(y / 32))) < 1e-15


def test_bump():
    b = bl.bump()
    assert b(0.0) == 1.0 and b(2.0) == 0.0 and b(-2.5) == 0.0
    assert b.support == (-2.0, 2.0)
    # scipy's adaptive rule against a plain trapezoid on a fine grid
    x = np.linspace(-2, 2, 200001)
    assert abs(b.integral() - np.trapezoid(b(x), x)) < 1e-9


# ---------------------------------------------------------------- Lemma 1

def test_lemma1_single_term():
    inst = bl.Lemma1Instance(1, 1, 4, 2)
    lhs = bl.lemma1_lhs(inst, "diri1")
    assert lhs == pytest.approx(4 * 2 * bl.bump().integral() ** 2, rel=1e-6)


def test_lemma1_example_instance():
    rng = np.random.default_rng(7)
    inst = bl.Lemma1Instance(8, 8, 4, 4, rng.choice([-1.0, 1.0], size=(8, 8)))
    for v in ("diri1", "diri2"):
        c = bl.lemma1_lhs(inst, v) / (inst.X ** 0.1 * bl.lemma1_rhs(inst, v))
        assert 0 < c <= 100


def test_lemma1_pinned_constants():
    inst = bl.pinned_lemma1_instances()
    assert len(inst) == 20 and max(max(x.D, x.N) for x in inst) <= 32
    for v, pinned in (("diri1", 2.36), ("diri2", 2.57)):
        c = max(bl.lemma1_lhs(x, v) / (x.X ** 0.1 * bl.lemma1_rhs(x, v)) for x in inst)
        assert c <= 200
        assert 0.5 * pinned <= c <= 1.5 * pinned


def _count_oracle(D, N, Y1, Y2, eps):
    X = Y1 * Y2 * D * N
    wa, wb = D * X ** eps / Y1, N * D * X ** eps / Y2
    ds = range(math.ceil(D), math.ceil(2 * D))
    ns = range(math.ceil(N), math.ceil(2 * N))
    eq = ne = 0
    for d1 in ds:
        for d2 in ds:
            if abs(d1 - d2) > wa:
                continue
            for n1 in ns:
                for n2 in ns:
                    if abs(n2 * d1 - n1 * d2) <= wb:
                        if n1 == n2:
                            eq += 1
                        else:
                            ne += 1
    return eq + ne, eq, ne


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([1, 2, 3, 4, 8]), st.sampled_from([1, 2, 5, 8]),
       st.sampled_from([1, 2, 4, 16]), st.sampled_from([1, 3, 4, 16]))
def test_tuple_count_matches_loops(D, N, Y1, Y2):
    assert bl.lemma1_tuple_count(D, N, Y1, Y2) == _count_oracle(D, N, Y1, Y2, bl.EPS)


def test_tuple_count_diagonal_limit():
    total, eq, ne = bl.lemma1_tuple_count(8, 8, 1e6, 1e6)
    assert (total, eq, ne) == (64, 64, 0)


def test_tuple_count_example():
    _, eq, ne = bl.lemma1_tuple_count(8, 8, 4, 4)
    assert eq <= 4 * bl.count1_shape(8, 8, 4, 4)
    assert ne <= 8 * bl.count2_shape(8, 8, 4, 4)


def test_lemma1_guards():
    with pytest.raises(ValueError):
        bl.Lemma1Instance(1, 1, 0.5, 1)
    with pytest.raises(ValueError):
        bl.Lemma1Instance(2, 2, 1, 1, np.full((2, 2), 2.0))
    with pytest.raises(ValueError):
        bl.lemma1_tuple_count(128, 1, 1, 1)


# ---------------------------------------------------------------- large sieve

def test_sieve_principal_column():
    rep = bl.sieve_check("bilinear", {"M": 1, "N": 64, "kind_b": "power"})
    want = sum(n ** -0.5 for n in range(1, 65))
    assert rep.values[0] == pytest.approx(want, rel=1e-13)


def test_bilinear_sum_by_loops():
    from mdslab.characters import jacobi
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=15), rng.normal(size=11)
    want = sum(a[m - 1] * b[n - 1] * jacobi(n, m) for m in range(1, 16, 2) for n in range(1, 12))
    assert abs(bl.bilinear_sum(a, b) - want) < 1e-12


def test_sieve_examples():
    rep = bl.sieve_check("bilinear", {"M": 1024, "N": 1024, "trials": 20})
    assert rep.passed and len(rep.ratios) == 20 and rep.max_ratio <= 10
    for M, N in ((2 ** 8, 2 ** 12), (2 ** 12, 2 ** 8)):
        rep = bl.sieve_check("bilinear", {"M": M, "N": N, "kind_a": "power", "kind_b": "power"})
        assert rep.passed
    with pytest.raises(bl.RangeCapError):
        bl.sieve_check("bilinear", {"M": 2 ** 15})


def test_first_moment_report():
    rep = bl.sieve_check("first_moment", {"X": [64, 512], "t": [0.0, 10.0]})
    assert rep.passed and len(rep.values) == 4


# ---------------------------------------------------------------- D-sums

def test_eval_D_single_term():
    t, u = 3.0, 7.0
    # the default weight vanishes at the only surviving point d m^2 = 1
    assert bl.eval_D(t, u, 1, PSI1, PSI1) == 0
    W = bl.Bump(0.5, 1.5)
    for psi in CharIndex:
        want = l2_value(complex(0.5, t), 1, psi)
        assert abs(bl.eval_D(t, u, 1, psi, PSI1, W) - want) < 1e-13


def test_eval_D_range_check():
    with pytest.raises(ValueError, match="exceeds"):
        bl.eval_D(0.0, 10.0, 64, PSI1, PSI1)


def test_eval_D_dual_method():
    a = bl.eval_D(0.0, 10.0, 64, PSI1, PSI1, check_range=False)
    b = bl.eval_D(0.0, 10.0, 64, PSI1, PSI1, method=Method.HURWITZ, check_range=False)
    assert np.isfinite(a) and abs(a - b) < 1e-6


def test_eval_D_by_direct_loop():
    t, u, P = 2.0, 5.0, 6.0
    W = bl.Bump(1.0, 2.0)
    want = 0j
    for d in range(1, 13, 2):
        for m in range(1, 4, 2):
            x = d * m * m
            if P <= x <= 2 * P:
                want += (l2_value(complex(0.5, t), d, CharIndex.PSI_2)
                         * psi_value(CharIndex.PSI_M1, d) * d ** complex(-0.5, -u)
                         * m ** complex(-1, -2 * (u + t)) * float(W(x / P)))
    got = bl.eval_D(t, u, P, CharIndex.PSI_2, CharIndex.PSI_M1, W)
    assert abs(got - want) < 1e-12


def test_partition_reconstruction():
    t, u, J = 3.0, 7.0, 4
    piece = bl.partition_piece()
    dyadic = sum(bl.eval_D(t, u, 2 ** j, PSI1, PSI1, piece, check_range=False)
                 for j in range(J + 1))
    assert abs(dyadic - bl.eval_D_cutoff(t, u, 2 ** J, PSI1, PSI1)) < 1e-12


# ---------------------------------------------------------------- Q-sums

def test_q1_unit_block():
    t, u, Y1, Y2 = 2.0, 3.0, 16.0, 4.0
    s, w = 0.3 + 0.1j, 0.2
    for psi in (CharIndex.PSI_1, CharIndex.PSI_2):
        delta = conductor_data(1, psi).delta0
        N_cap = (Y1 * 1) ** (0.5 + bl.EPS)
        want, N = 0.0, 1
        while N <= N_cap:
            acc = sum(psi_value(psi, n) * delta ** (s / 2) * n ** -(0.5 + 1j * t - s)
                      for n in range(N, 2 * N) if n % 2)
            want += abs(acc)
            N *= 2
        got = bl.q_sums("Q1", t, u, 1, Y1, Y2, s, w, psi, PSI1)
        assert got == pytest.approx(want, rel=1e-12)


def test_q2_against_sieve_shape():
    t, u, P, Y1, Y2, eps = 5.0, 9.0, 4.0, 8.0, 16.0, bl.EPS
    q2 = bl.q_sums("Q2", t, u, P, Y1, Y2, eps, eps)
    D_cap = (Y1 * P) ** (0.5 + eps)
    N_cap = (Y1 / P) ** 0.5 * Y2 ** (1 + eps)
    shape = sum((D + N) ** (0.5 + eps) for D in bl._powers_of_two(D_cap)
                for N in bl._powers_of_two(N_cap))
    assert 0 < q2 <= 10 * shape


def test_q3_is_swapped_q2_formula():
    t, u, P, Y1, Y2, eps = 5.0, 9.0, 4.0, 8.0, 16.0, bl.EPS
    s = w = eps
    q3 = bl.q_sums("Q3", t, u, P, Y1, Y2, s, w)
    D_cap = (Y1 / P) ** 0.5 * Y2 ** (1 + eps)
    N_cap = (Y1 * P) ** 0.5 * Y2 ** eps
    ref = bl.bilinear_block_sum(D_cap, N_cap, 0.5 + 1j * u + w, 0.5 - 1j * (u + t) - w + s, 0, 0)
    assert q3 == ref


def test_q_range_cap():
    with pytest.raises(bl.RangeCapError):
        bl.q_sums("Q2", 0, 0, 1.0, 2.0 ** 30, 2.0, 0, 0)
    with pytest.raises(ValueError):
        bl.q_sums("Q4", 0, 0, 1, 1, 1, 0, 0)


# ---------------------------------------------------------------- scans

def test_fit_loglog_exact_power():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    slope, icpt, r2 = bl.fit_loglog(x, 3 * x ** 0.4)
    assert slope == pytest.approx(0.4) and icpt == pytest.approx(math.log(3)) and r2 == 1.0
    with pytest.raises(ValueError):
        bl.fit_loglog([2.0], [1.0])


def test_growth_scan_single_point():
    with pytest.raises(ValueError):
        bl.growth_scan("w_line", [10])
    with pytest.raises(ValueError):
        bl.growth_scan("w_line", [10, 10])


def test_growth_scan_short():
    samples, fit = bl.growth_scan("w_line", [4, 8, 16])
    assert [s.u for s in samples] == [4.0, 8.0, 16.0]
    assert fit.variable == "|w|" and np.isfinite(fit.slope)
    ys = [s.absZ.max() for s in samples]
    xs = [abs(complex(0.5, s.u)) for s in samples]
    assert fit.slope == pytest.approx(bl.fit_loglog(xs, ys)[0])


def test_convexity_envelope_monitor():
    # |Z| <= 10 Cana^(1/4+eps) is monitored, not enforced; log the worst ratio
    worst = 0.0
    for t, u in [(0.0, 20.0), (5.0, -5.0), (10.0, 30.0)]:
        z = z_critical(t, u, plan=bl.SCAN_PLAN)
        env = 10 * bl.analytic_conductor(t, u) ** 0.3
        worst = max(worst, float(np.abs(z.values).max() / env))
    print(f"convexity envelope: worst ratio {worst:.3g}")
    assert np.isfinite(worst)


def test_wlog_symmetry():
    rng = np.random.default_rng(11)
    A = np.abs(matrix_A().entries)
    for _ in range(10):
        t, u = rng.uniform(-8, 8, 2)
        z = z_critical(t, u, plan=bl.SCAN_PLAN)
        zs = z_critical(u, t, plan=bl.SCAN_PLAN)
        bound = A @ np.abs(zs.values)
        assert np.all(np.abs(z.values) <= bound + z.err + zs.err)


# ---------------------------------------------------------------- mean square

def test_mean_square_small_box():
    q = 2
    res = bl.mean_square(1.0, 1.0, quad=q)
    assert np.all(res["integral"] >= 0)
    assert np.allclose(res["ratio"], res["integral"])
    # independent Gauss-Legendre sum over [-1,1]^2 with unit panels
    x, w = np.polynomial.legendre.leggauss(q)
    tn, tw = 0.5 + 0.5 * x, 0.5 * w
    un = np.concatenate([-0.5 + 0.5 * x, 0.5 + 0.5 * x])
    uw = np.concatenate([0.5 * w, 0.5 * w])
    want = np.zeros(16)
    for ti, wi in zip(tn, tw):
        for uj, vj in zip(un, uw):
            z = z_critical(ti, uj, plan=bl.SCAN_PLAN).values
            zr = z_critical(-ti, -uj, plan=bl.SCAN_PLAN).values
            want += wi * vj * (np.abs(z) ** 2 + np.abs(zr) ** 2)
    assert np.allclose(res["integral"], want, rtol=1e-10)


def test_mean_square_guards():
    with pytest.raises(ValueError):
        bl.mean_square(4.0, 2.0)
    with pytest.raises(ValueError):
        bl.mean_square(1.0, 64.0)
