"""Acceptance checks shared by ``mds-lab selftest`` and the test suite.

Each check returns a CheckResult whose ``detail`` holds only deterministic,
JSON-serialisable numbers (no timings), so reports can be compared byte
for byte.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import bounds_lab as bl
from .characters import CharIndex, jacobi_table, kronecker, tilde_chi
from .critical_line import z_critical
from .functional_equations import (group_orbit, matrix_A, matrix_A_exact, matrix_B,
                                   matrix_M, word_map)
from .lfunctions import (Method, _hurwitz_l, fe_factor, l_primitive_batch, root_lambda,
                         zeta)
from .zcore import z_vector

__all__ = ["CheckResult", "CHECKS", "run_checks", "report_json", "FAST", "EXPECTED_FAIL"]

# criteria not attainable at desk scale (see notes); reported, never forced green
EXPECTED_FAIL = frozenset({10})
FAST = (1, 2, 3, 4, 6, 8)


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] criterion {self.number}: {self.name} ({self.seconds:.1f} s)"


def _r(x, digits=10):
    """Round for reports; keeps them stable against last-bit noise."""
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_r(v, digits) for v in x]
    return float(f"{float(x):.{digits}g}")


# ---------------------------------------------------------------------------

def check_characters(cfg: dict) -> CheckResult:
    bad = {"2factor": 0, "reciprocity": 0, "multiplicativity_n": 0,
           "multiplicativity_d": 0, "table": 0}
    odd = np.arange(1, 1000, 2)
    for d in range(1, 100001, 2):
        want = 1 if d % 8 == 1 else (-1 if d % 8 == 5 else 0)
        if kronecker(d, 2) != want:
            bad["2factor"] += 1
    # T[i, j] = (d_j / n_i) = chi_{d_j}(n_i)
    T = jacobi_table(odd, odd)
    for i, n in enumerate(odd):
        for j, d in enumerate(odd):
            c = kronecker(int(d), int(n))
            if c != tilde_chi(int(n), int(d)):
                bad["reciprocity"] += 1
            if c != T[i, j]:
                bad["table"] += 1
    idx = {int(v): k for k, v in enumerate(odd)}
    for a in odd:
        for b in odd:
            ab = int(a) * int(b)
            if ab > 999:
                break
            ia, ib, iab = idx[int(a)], idx[int(b)], idx[ab]
            if np.any(T[iab, :] != T[ia, :] * T[ib, :]):
                bad["multiplicativity_n"] += 1
            if np.any(T[:, iab] != T[:, ia] * T[:, ib]):
                bad["multiplicativity_d"] += 1
    return CheckResult(1, "character exactness", sum(bad.values()) == 0, bad)


def check_matrices(cfg: dict) -> CheckResult:
    A = matrix_A_exact()
    eye = [[Fraction(int(i == j)) for j in range(16)] for i in range(16)]
    A2 = [[sum(A[i][k] * A[k][j] for k in range(16)) for j in range(16)] for i in range(16)]
    a_ok = A2 == eye
    rng = np.random.default_rng(int(cfg.get("seed", 1)))
    worst, n = 0.0, 0
    while n < 50:
        s = complex(rng.uniform(-3, 4), rng.uniform(-10, 10))
        try:
            P = matrix_B(s).entries @ matrix_B(1 - s).entries
        except Exception:
            continue
        worst = max(worst, float(np.abs(P - np.eye(16)).max()))
        n += 1
    b1 = float(np.abs(matrix_B(0.0).block(0)).max())
    Bh = matrix_B(0.5)
    b34 = max(float(np.abs(Bh.block(k) - np.eye(4)).max()) for k in (2, 3))
    ok = a_ok and worst < 1e-9 and b1 < 1e-12 and b34 < 1e-12
    return CheckResult(2, "matrix algebra", ok,
                       {"A2_exact": a_ok, "BB_residual": _r(worst, 3),
                        "B1_at_0": _r(b1, 3), "B34_at_half": _r(b34, 3)})


def check_group(cfg: dict) -> CheckResult:
    orbit = group_orbit(0.3 + 0.17j, 0.71 - 0.4j)
    ident = word_map("ab" * 6).is_identity()
    ok = len(orbit) == 12 and ident
    return CheckResult(3, "group structure", ok,
                       {"orbit_size": len(orbit), "ab6_identity": ident,
                        "words": ["".join(m.word) for m, _ in orbit]})


def check_zero_pattern(cfg: dict) -> CheckResult:
    rng = np.random.default_rng(int(cfg.get("seed", 1)))
    pts = [(0.5 + 1.3j, 0.5 + 0.7j)]
    # structurally nonzero entries decay like exp(-pi|Im|/2), so keep |Im| small
    pts += [(complex(0.5, rng.uniform(-3, 3)), complex(0.5, rng.uniform(-3, 3)))
            for _ in range(10)]
    counts, supports = [], set()
    for s, w in pts:
        Z = np.abs(matrix_M(s, w).entries) < 1e-12
        counts.append(int(Z.sum()))
        supports.add(Z.tobytes())
    ok = all(c == 124 for c in counts) and len(supports) == 1
    return CheckResult(4, "zero pattern", ok, {"zero_counts": counts,
                                               "distinct_supports": len(supports)})


A_POINTS = [(2.6, 2.8), (3, 3), (2.5 + 1j, 3 - 0.5j), (2.2, 3.1), (3.5, 2.4),
            (2.8 + 2j, 2.6 - 1j), (2.4, 2.4 + 3j), (4, 2.5), (2.5 - 1j, 3.2 + 1j),
            (3.1, 3.6)]
B_POINTS = [(0.3, 3), (-0.5, 3.5), (0.5 + 1j, 3.3), (0.2 - 2j, 2.9 + 1j)]
FE_CEILING = 1e-5


def check_fe_ground_truth(cfg: dict) -> CheckResult:
    A = matrix_A().entries
    rows = []
    ok = True
    for s, w in A_POINTS:
        z1, z2 = z_vector(s, w), z_vector(w, s)
        res = float(np.abs(z1.values - A @ z2.values).max())
        bound = z1.err + float(np.abs(A).sum(1).max()) * z2.err
        ok &= res <= bound and res <= FE_CEILING
        rows.append({"kind": "A", "s": str(complex(s)), "w": str(complex(w)),
                     "residual": _r(res, 2), "bound": _r(bound, 2)})
    for s, w in B_POINTS:
        s, w = complex(s), complex(w)
        B = matrix_B(s).entries
        z1, z2 = z_vector(s, w), z_vector(1 - s, s + w - 0.5)
        res = float(np.abs(z1.values - B @ z2.values).max())
        bound = z1.err + float(np.abs(B).sum(1).max()) * z2.err
        ok &= res <= bound and res <= FE_CEILING
        rows.append({"kind": "B", "s": str(s), "w": str(w), "residual": _r(res, 2),
                     "bound": _r(bound, 2), "reps": [z1.rep.value, z2.rep.value]})
    return CheckResult(5, "FE ground truth", bool(ok), {"points": rows})


def check_l_machinery(cfg: dict) -> CheckResult:
    discs = []
    for d0 in range(1, 51, 2):
        if any(d0 % (p * p) == 0 for p in (3, 5, 7)):
            continue
        for psi in CharIndex:
            star = d0 if d0 % 4 == 1 else -d0
            twist = psi * CharIndex.PSI_M1 if d0 % 4 == 3 else psi
            discs.append(star * twist.disc)
    discs = np.array(sorted(set(discs)), dtype=np.int64)
    agree, fe_res, lam = 0.0, 0.0, 0.0
    for t in (0, 1, -1, 5, -5, 20, -20):
        s = complex(0.5, t)
        a, _ = l_primitive_batch(s, discs, Method.AFE)
        h, _ = l_primitive_batch(s, discs, Method.HURWITZ)
        agree = max(agree, float(np.max(np.abs(a - h))))
        s2 = complex(0.7, t)
        a2, _ = l_primitive_batch(s2, discs, Method.AFE)
        for D, v in zip(discs, a2):
            kappa = 1 if D < 0 else 0
            other = zeta(1 - s2) if abs(D) == 1 else _hurwitz_l(1 - s2, int(D))
            X = complex(fe_factor(s2, abs(int(D)), kappa))
            fe_res = max(fe_res, abs(v - X * other))
            lam = max(lam, abs(abs(root_lambda(t, abs(int(D)), kappa)) - 1))
    ok = agree <= 1e-8 and fe_res <= 1e-7 and lam <= 1e-12
    return CheckResult(6, "L machinery", ok, {"afe_vs_hurwitz": _r(agree, 2),
                                             "fe_residual": _r(fe_res, 2),
                                             "lambda_unit": _r(lam, 2),
                                             "discriminants": len(discs)})


CRIT_POINTS = [(1.0, 2.0), (3.0, 7.0), (0.0, 10.0)]


def check_critical(cfg: dict) -> CheckResult:
    rows, ok = [], True
    for t, u in CRIT_POINTS:
        z = z_critical(t, u)
        zc = z_critical(t, u, contour_c=1.5)
        zr = z_critical(-t, -u)
        M = matrix_M(complex(0.5, t), complex(0.5, u)).entries
        contour = float(np.abs(z.values - zc.values).max())
        refl = float(np.abs(np.conj(z.values) - zr.values).max())
        msym = float(np.abs(z.values - M @ zr.values).max())
        ok &= contour <= 1e-5 and refl <= 1e-5 and msym <= 1e-4
        rows.append({"t": t, "u": u, "contour": _r(contour, 2), "reflection": _r(refl, 2),
                     "msym": _r(msym, 2)})
    return CheckResult(7, "critical-line evaluator", bool(ok), {"points": rows})


def check_lemma1(cfg: dict) -> CheckResult:
    inst = bl.pinned_lemma1_instances()
    consts = {}
    for v in ("diri1", "diri2"):
        consts[v] = max(bl.lemma1_lhs(x, v) / (x.X ** 0.1 * bl.lemma1_rhs(x, v))
                        for x in inst)
    c1 = c2 = 0.0
    for x in inst:
        _, e, ne = bl.lemma1_tuple_count(x.D, x.N, x.Y1, x.Y2)
        c1 = max(c1, e / bl.count1_shape(x.D, x.N, x.Y1, x.Y2))
        c2 = max(c2, ne / bl.count2_shape(x.D, x.N, x.Y1, x.Y2))
    ok = consts["diri1"] <= 200 and consts["diri2"] <= 200 and c1 <= 16 and c2 <= 16
    return CheckResult(8, "Lemma 1 oracles", ok,
                       {"c_diri1": _r(consts["diri1"], 6), "c_diri2": _r(consts["diri2"], 6),
                        "c_count1": _r(c1, 6), "c_count2": _r(c2, 6)})


GROWTH_THRESHOLD = 0.55


def check_growth(cfg: dict) -> CheckResult:
    sw, fw = bl.growth_scan("w_line", range(10, 101, 10))
    sa, fa = bl.growth_scan("antidiag", range(5, 51, 5))
    finite = all(np.all(np.isfinite(s.absZ)) for s in sw + sa)
    ok = finite and fw.slope <= GROWTH_THRESHOLD and fa.slope <= GROWTH_THRESHOLD
    return CheckResult(9, "growth scans", bool(ok),
                       {"w_line_slope": _r(fw.slope, 6), "w_line_r2": _r(fw.r2, 4),
                        "antidiag_slope": _r(fa.slope, 6), "antidiag_r2": _r(fa.r2, 4),
                        "reference_exponent": 1 / 3, "threshold": GROWTH_THRESHOLD})


MS_YS = (2, 4, 8, 16)
MS_SLOPE = 1.2


def check_mean_square(cfg: dict) -> CheckResult:
    q = int(cfg.get("ms_quad", 2))
    integrals = {}
    for qq in (q, 2 * q):
        g = bl.MeanSquareGrid(qq)
        integrals[qq] = np.array([bl.mean_square(Y, Y, grid=g)["integral"] for Y in MS_YS])
    I, I2 = integrals[q], integrals[2 * q]
    x = [Y * Y for Y in MS_YS]
    slopes = [bl.fit_loglog(x, I[:, k])[0] for k in range(16)]
    stab = float(np.max(np.abs(I2 / I - 1)))
    ok = max(slopes) <= MS_SLOPE and stab < 0.01
    return CheckResult(10, "mean square", bool(ok),
                       {"slopes": _r(slopes, 5), "max_slope": _r(max(slopes), 5),
                        "total_slope": _r(bl.fit_loglog(x, I.sum(1))[0], 5),
                        "node_doubling": _r(stab, 3), "threshold": MS_SLOPE})


def check_determinism(cfg: dict) -> CheckResult:
    numbers = [int(n) for n in cfg.get("determinism_subset", FAST)]
    a = report_json(run_checks(numbers, cfg))
    b = report_json(run_checks(numbers, cfg))
    return CheckResult(11, "determinism", a == b, {"criteria": numbers,
                                                    "bytes": len(a)})


CHECKS: dict[int, Callable[[dict], CheckResult]] = {
    1: check_characters, 2: check_matrices, 3: check_group, 4: check_zero_pattern,
    5: check_fe_ground_truth, 6: check_l_machinery, 7: check_critical, 8: check_lemma1,
    9: check_growth, 10: check_mean_square, 11: check_determinism,
}


def run_checks(numbers, cfg: dict | None = None, log: Callable[[str], None] | None = None
               ) -> list[CheckResult]:
    cfg = cfg or {}
    out = []
    for n in numbers:
        t0 = time.perf_counter()
        res = CHECKS[int(n)](cfg)
        res.seconds = time.perf_counter() - t0
        if log:
            log(res.line())
        out.append(res)
    return out


def report_json(results: list[CheckResult]) -> str:
    body = {"criteria": [{"number": r.number, "name": r.name, "passed": r.passed,
                          "expected_fail": r.number in EXPECTED_FAIL, "detail": r.detail}
                         for r in results],
            "all_passed": all(r.passed for r in results)}
    return json.dumps(body, indent=2, sort_keys=True) + "\n"
