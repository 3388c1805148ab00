import math

import numpy as np
import pytest

from mdslab.analytic_kernels import PoleError
from mdslab.characters import CharIndex, pair_from_index, psi_value
from mdslab.lfunctions import l2_value
from mdslab.zcore import (ConvergenceError, NoRepresentationError, Rep, TruncationPlan,
                          ZVector, choose_rep, z_components, z_direct, z_region1,
                          z_swapped, z_vector, zeta2)

PSI1, PSIM1, PSI2 = CharIndex.PSI_1, CharIndex.PSI_M1, CharIndex.PSI_2
SMALL = TruncationPlan(d_max=4000, n_max=4000, tail_bound=1e-3)


def test_zeta2_examples():
    assert abs(zeta2(2) - math.pi ** 2 / 8) < 1e-14
    assert abs(zeta2(0)) < 1e-15
    for k in range(3, 7):
        z = 1 + 10.0 ** -k
        assert abs((z - 1) * zeta2(z) - 0.5) < 10.0 ** -k
    with pytest.raises(PoleError):
        zeta2(1)


def test_direct_leading_terms():
    s = w = 3.0
    plan = TruncationPlan(d_max=3, n_max=3, tail_bound=1.0)
    z = z_components(s, w, Rep.DIRECT, plan, [(PSI1, PSI1)])
    lead = zeta2(11) * zeta2(3)
    assert abs(lead - zeta2(11) * l2_value(3, 1, PSI1)) < 1e-15
    by_hand = lead + zeta2(11) * l2_value(3, 3, PSI1) * 3.0 ** -3
    assert abs(z.component(PSI1, PSI1) - by_hand) < 1e-14


def test_swapped_leading_term():
    plan = TruncationPlan(d_max=3, n_max=1 + 2, tail_bound=1.0)
    z = z_components(3.0, 3.0, Rep.SWAPPED, plan, [(PSI2, PSIM1)])
    # n = 1: L_2(w, psi'), n = 3: psi(3) L_2(w, chi~_3 psi') 3^-s with chi~_3 = chi_-3
    n1 = l2_value(3, 1, PSIM1)
    n3 = psi_value(PSI2, 3) * l2_value(3, 3, PSIM1 * PSIM1) * 3.0 ** -3
    assert abs(z.component(PSI2, PSIM1) - zeta2(11) * (n1 + n3)) < 1e-14


def test_three_representations_agree_at_3_3():
    a = z_components(3, 3, Rep.DIRECT)
    b = z_components(3, 3, Rep.REGION1)
    c = z_components(3, 3, Rep.SWAPPED)
    assert np.max(np.abs(a.values - b.values)) < 1e-8
    assert np.max(np.abs(a.values - c.values)) < 1e-8


def test_single_component_api():
    v = z_direct(3, 3, PSI2, PSIM1)
    assert abs(v - z_region1(3, 3, PSI2, PSIM1)) < 1e-8
    assert abs(v - z_swapped(3, 3, PSI2, PSIM1)) < 1e-8
    with pytest.raises(NoRepresentationError):
        z_direct(0.3, 3, PSI1, PSI1)
    with pytest.raises(NoRepresentationError):
        z_region1(3, 0.5, PSI1, PSI1)


def test_two_plans_at_2_2():
    p1 = TruncationPlan(d_max=1000, n_max=1000, tail_bound=1e-2)
    p2 = TruncationPlan(d_max=10000, n_max=10000, tail_bound=1e-2)
    a = z_components(2, 2, Rep.DIRECT, p1, [(PSI1, PSIM1)])
    b = z_components(2, 2, Rep.DIRECT, p2, [(PSI1, PSIM1)])
    assert np.isfinite(a.component(PSI1, PSIM1))
    assert abs(a.component(PSI1, PSIM1) - b.component(PSI1, PSIM1)) <= a.err + b.err


def test_region1_example():
    z = z_components(0.5, 2.5, Rep.REGION1, pairs=[(PSI2, PSI1)])
    assert z.meta["tail"] < 1e-5
    assert np.isfinite(z.component(PSI2, PSI1))


def test_region1_polar_line():
    assert np.isfinite(z_region1(1, 2, PSI2, PSI1))
    with pytest.raises(PoleError, match="polar line s=1"):
        z_region1(1, 2, PSI1, PSI1)


def test_rep_choice():
    assert z_vector(3, 3).rep is Rep.DIRECT
    assert z_vector(0.5, 2.5).rep is Rep.REGION1
    assert z_vector(2.5, 0.5).rep is Rep.SWAPPED
    assert choose_rep(0.2, 0.3) is None
    with pytest.raises(NoRepresentationError):
        z_vector(0.2, 0.3)


def test_tail_ceiling_enforced():
    plan = TruncationPlan(d_max=100, n_max=100, tail_bound=1e-8)
    with pytest.raises(ConvergenceError):
        z_components(2, 2, Rep.DIRECT, plan)


@pytest.mark.parametrize("s,w", [(3 + 1j, 2.5 - 2j), (0.5 - 3j, 2.5 + 1j), (2.5 + 2j, 0.5 - 1j)])
def test_schwarz_reflection(s, w):
    a = z_vector(s, w, SMALL)
    b = z_vector(np.conj(s), np.conj(w), SMALL)
    assert a.rep is b.rep
    assert np.max(np.abs(np.conj(a.values) - b.values)) < 1e-12


def test_representation_independence_grid():
    plan = TruncationPlan(d_max=4000, n_max=4000, tail_bound=1e-2)
    worst = 0.0
    for sr in (1.8, 2.2, 2.6, 3.0, 3.4):
        for wr in (1.8, 2.2, 2.6, 3.0, 3.4):
            s, w = complex(sr, 0.7), complex(wr, -0.4)
            zs = [z_components(s, w, r, plan) for r in (Rep.DIRECT, Rep.REGION1, Rep.SWAPPED)]
            for i in range(3):
                for j in range(i):
                    gap = np.max(np.abs(zs[i].values - zs[j].values))
                    assert gap <= zs[i].err + zs[j].err
                    worst = max(worst, gap)
    assert worst < plan.tail_bound


def test_error_honesty():
    """Raising d_max moves the value by no more than the coarser error."""
    for s, w, rep in [(2.2, 2.4, Rep.DIRECT), (0.4, 2.6, Rep.REGION1), (2.6, 0.4, Rep.SWAPPED)]:
        a = z_components(s, w, rep, TruncationPlan(2000, 2000, 1e-2))
        b = z_components(s, w, rep, TruncationPlan(8000, 8000, 1e-2))
        assert np.max(np.abs(a.values - b.values)) <= a.err


def test_zvector_type():
    with pytest.raises(ValueError):
        ZVector((1, 1), np.full(16, np.nan), Rep.DIRECT, 0.0)
    with pytest.raises(ValueError):
        ZVector((1, 1), np.zeros(16), Rep.DIRECT, -1.0)
    z = ZVector((1, 1), np.arange(16), Rep.DIRECT, 0.0)
    for k in range(16):
        p, q = pair_from_index(k)
        assert z.component(p, q) == k == z.as_matrix()[p, q]


def test_meta_flags_majorant():
    z = z_vector(3, 3)
    assert z.meta["majorant"] == "empirical"
    assert z.meta["majorant_exponent"] == 0.05
