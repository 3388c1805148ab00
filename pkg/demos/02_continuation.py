"""
Three series, two functional equations, one continuation
========================================================

Z(s, w) is a 16-vector.  Far to the right it is a plain double sum; two other
expansions reach further left in s or in w.  The swap matrix A and the
block-diagonal B(s) relate values at points of a 12-element orbit, which
carries Z to every point off the polar lines.
"""
import numpy as np

from mdslab.functional_equations import (continue_z, group_orbit, matrix_A, matrix_B,
                                         matrix_M)
from mdslab.zcore import Rep, z_components, z_vector

###############################################################################
# The three convergent expansions agree where they overlap.
vals = {r: z_components(3, 3, r) for r in (Rep.DIRECT, Rep.REGION1, Rep.SWAPPED)}
ref = vals[Rep.DIRECT].values
for r, z in vals.items():
    print(f"{r.value:>8}: max diff {np.abs(z.values - ref).max():.1e}  tail {z.meta['tail']:.1e}")

###############################################################################
# z_vector picks the cheapest expansion that applies.
for s, w in [(3, 3), (0.5, 2.5), (2.5, 0.5)]:
    print((s, w), z_vector(s, w).rep.value)

###############################################################################
# The swap: Z(s, w) = A Z(w, s).
s, w = 2.6, 2.8
res = np.abs(z_vector(s, w).values - matrix_A().entries @ z_vector(w, s).values).max()
print("A residual", res)

###############################################################################
# The orbit of a generic point has 12 elements.
for m, p in group_orbit(0.3 + 0.17j, 0.71 - 0.4j):
    print(f"{''.join(m.word) or '-':>7}  ({p[0]:.2f}, {p[1]:.2f})")

###############################################################################
# B(s) B(1-s) = I, and M(s, w) has a fixed pattern of 124 zeros.
B = matrix_B(0.2 + 1.5j).entries @ matrix_B(0.8 - 1.5j).entries
print("B(s)B(1-s) - I:", np.abs(B - np.eye(16)).max())
print("zeros in M:", int((np.abs(matrix_M(0.5 + 1.3j, 0.5 + 0.7j).entries) < 1e-12).sum()))

###############################################################################
# Continuation to s = -1 goes through one application of beta.
z = continue_z(-1.0, 3.0)
print("word", z.meta["word"], "evaluated at", z.meta["inner_point"], "err", f"{z.err:.1e}")
print(np.round(z.as_matrix(), 6))
