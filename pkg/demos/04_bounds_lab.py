"""
Empirical checks of the averaging inequalities
==============================================

The growth bounds rest on mean-value estimates for Dirichlet polynomials and
on the large sieve for real characters.  Here each inequality is evaluated
exactly on small instances and the implied constant is read off.
"""
import numpy as np

from mdslab import bounds_lab as bl

###############################################################################
# Weighted mean values of Dirichlet polynomials on the pinned instance set.
inst = bl.pinned_lemma1_instances()
for v in ("diri1", "diri2"):
    c = max(bl.lemma1_lhs(x, v) / (x.X ** 0.1 * bl.lemma1_rhs(x, v)) for x in inst)
    print(f"{v}: fitted constant {c:.3f}")

###############################################################################
# The counting problem behind them, by exhaustive enumeration.
total, eq, ne = bl.lemma1_tuple_count(8, 8, 4, 4)
print(f"tuples {total}: diagonal {eq} (shape {bl.count1_shape(8, 8, 4, 4):.0f}), "
      f"off-diagonal {ne} (shape {bl.count2_shape(8, 8, 4, 4):.0f})")

###############################################################################
# The quadratic large sieve for random signs and for a smooth sequence.
rep = bl.sieve_check("bilinear", {"M": 1024, "N": 1024, "trials": 20})
print("random signs: max ratio", round(rep.max_ratio, 3))
rep = bl.sieve_check("bilinear", {"M": 256, "N": 4096, "kind_a": "power", "kind_b": "power"})
print("n^(-1/2):     max ratio", round(rep.max_ratio, 3))

###############################################################################
# The first moment of |L(1/2+it, chi_d)| over d <= X, divided by X: the ratio
# R creeps up slowly, well inside the X^0.05 allowance.
rep = bl.sieve_check("first_moment", {"X": [64, 256, 1024, 4096], "t": [0.0, 10.0]})
for X, t, R in rep.values:
    print(f"X={X:5d} t={t:4.1f}  R={R:.3f}")

###############################################################################
# A dyadic partition of unity rebuilds the smoothly truncated D-sum.
piece = bl.partition_piece()
parts = sum(bl.eval_D(3.0, 7.0, 2 ** j, 0, 0, piece, check_range=False) for j in range(5))
print("partition error", abs(parts - bl.eval_D_cutoff(3.0, 7.0, 16, 0, 0)))

###############################################################################
# Mean square over a small box (each component; the box is [-Y, Y]^2).
res = bl.mean_square(2.0, 2.0, quad=2)
print("integral / Y^2:", np.round(res["ratio"], 3))
