"""
Quadratic characters and their L-values
=======================================

The building blocks of the double series: the characters chi_d, the four
characters psi modulo 8, and L_2(s, chi_d psi) with the Euler factor at 2
removed.
"""
import numpy as np

from mdslab.characters import CharIndex, conductor_data, decompose, kronecker, psi_value
from mdslab.lfunctions import LQuery, Method, fe_factor, l2_value, l_primitive

###############################################################################
# chi_d(n) is the Kronecker symbol of the discriminant attached to d.  For odd
# d and n it is the Jacobi symbol, and the value at 2 depends on d mod 8.
for d in (1, 3, 5, 7, 17):
    print(d, [kronecker(d, n) for n in range(1, 12)])

###############################################################################
# The four characters psi and the conductor of chi_{d0} psi.
for psi in CharIndex:
    cd = conductor_data(5, psi)
    print(f"{psi.label:>5}: psi(3)={psi_value(psi, 3):+d}  delta0={cd.delta0:3d}  kappa={cd.kappa}")

###############################################################################
# d = 45 = 5 * 3^2 is not squarefree; L_2 is the primitive L-function with the
# Euler factors at 2 and 3 taken out.
print(decompose(45))
print("L_2(2, chi_45) =", l2_value(2.0, 45, CharIndex.PSI_1))

###############################################################################
# Two independent routes to a critical value: the approximate functional
# equation and a Hurwitz-zeta sum.
s = complex(0.5, 14.0)
afe = l_primitive(LQuery(s, 13, CharIndex.PSI_1, Method.AFE))
hur = l_primitive(LQuery(s, 13, CharIndex.PSI_1, Method.HURWITZ))
print(f"AFE     {afe:.14f}\nHurwitz {hur:.14f}\n|diff|  {abs(afe - hur):.2e}")

###############################################################################
# The functional equation relates s and 1 - s.
s = 0.3 + 2j
cd = conductor_data(13, CharIndex.PSI_1)
lhs = l_primitive(LQuery(s, 13, CharIndex.PSI_1))
rhs = fe_factor(s, cd.delta0, cd.kappa) * l_primitive(LQuery(1 - s, 13, CharIndex.PSI_1))
print("functional equation residual", abs(lhs - rhs))
print("root factor modulus on the line", abs(fe_factor(0.5 + 7j, cd.delta0, cd.kappa)))
np.testing.assert_allclose(lhs, rhs, atol=1e-7)
