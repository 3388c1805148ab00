"""
Values on the critical lines
============================

On Re s = Re w = 1/2 no series converges.  A contour identity moves the
evaluation to Re w = 1/2 + c on the right, and to Re w = 1/2 - c on the left
(folded back with M).  The result must not depend on c.
"""
import numpy as np

from mdslab.bounds_lab import SCAN_PLAN, growth_scan
from mdslab.critical_line import CriticalEngine, analytic_conductor, z_critical
from mdslab.functional_equations import matrix_M

t, u = 1.0, 2.0
z2 = z_critical(t, u)
z15 = z_critical(t, u, contour_c=1.5)
print("contour c=2 vs c=1.5:", np.abs(z2.values - z15.values).max())

###############################################################################
# Checks against exact symmetries: Schwarz reflection and the functional
# equation (1 - s0 is the conjugate of s0 on the line).
zr = z_critical(-t, -u)
M = matrix_M(complex(0.5, t), complex(0.5, u)).entries
print("reflection:", np.abs(np.conj(z2.values) - zr.values).max())
print("M symmetry:", np.abs(z2.values - M @ zr.values).max())

###############################################################################
# One engine per t shares the L-values and the lattice of Z-values, so a row
# of u values costs little more than one point.
eng = CriticalEngine(0.0, plan=SCAN_PLAN)
for uu in (5.0, 10.0, 20.0, 40.0):
    z = eng.evaluate(uu)
    print(f"u={uu:5.1f}  max|Z|={np.abs(z.values).max():.4f}  Cana={analytic_conductor(0, uu):9.2f}")

###############################################################################
# A short growth scan along t = 0.  The fitted exponent is far below the
# convexity value 1/2 at this range.
samples, fit = growth_scan("w_line", [10, 20, 40, 80])
print(f"slope {fit.slope:.3f} (r^2 {fit.r2:.2f}) against {fit.variable}")
