"""Command-line front end: ``mds-lab <command> [options]``.

Exit status: 0 when every enabled check passes, 1 when a check fails or an
evaluation hits a polar line or convergence limit, 2 for configuration
errors.  Options may come from a ``key = value`` file (``--config``);
command-line flags win.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .analytic_kernels import PoleError, QuadratureError
from .characters import CharIndex, pair_from_index, pair_index

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration

@dataclass
class RunConfig:
    tail_bound: float = 1e-4
    d_max: int = 20000
    n_max: int = 20000
    scan_d_max: int = 5000
    contour_c: float = 2.0
    cache: str = ""
    format: str = "json"
    seed: int = 1
    ms_quad: int = 2
    output: str = ""

    _RANGES = {
        "tail_bound": (1e-12, 1e-2), "d_max": (100, 200000), "n_max": (100, 200000),
        "scan_d_max": (100, 200000), "contour_c": (1.1, 2.5), "seed": (0, 2 ** 63 - 1),
        "ms_quad": (1, 8),
    }

    def validate(self) -> "RunConfig":
        for k, (lo, hi) in self._RANGES.items():
            v = getattr(self, k)
            ok = lo <= v < hi if k == "contour_c" else lo <= v <= hi
            if not ok:
                raise ConfigError(f"{k} = {v} outside [{lo}, {hi}]")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"format must be json or csv, not {self.format!r}")
        return self

    @classmethod
    def keys(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def update(self, items: dict) -> "RunConfig":
        types = {f.name: f.type for f in fields(self)}
        for k, v in items.items():
            if k not in types:
                raise ConfigError(f"unknown config key {k!r}")
            if v is None:
                continue
            kind = {"float": float, "int": int, "str": str}[types[k]]
            try:
                setattr(self, k, kind(v) if kind is not int else int(float(v)))
            except ValueError as exc:
                raise ConfigError(f"bad value for {k}: {v!r}") from exc
        return self

    def plan(self, scan: bool = False):
        from .zcore import TruncationPlan
        if scan:
            return TruncationPlan(self.scan_d_max, self.scan_d_max, max(self.tail_bound, 1e-3))
        return TruncationPlan(self.d_max, self.n_max, self.tail_bound)


def read_config_file(path) -> dict:
    out = {}
    for no, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{no}: expected key = value")
        k, v = (x.strip() for x in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


# ---------------------------------------------------------------------------
# helpers

def _complex(text: str) -> complex:
    try:
        return complex(str(text).replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise ConfigError(f"not a number: {text!r}") from exc


def _pairs(text: str | None) -> list[tuple[CharIndex, CharIndex]]:
    if not text:
        return [pair_from_index(k) for k in range(16)]
    try:
        a, b = text.split(",")
        return [(CharIndex.parse(a.strip()), CharIndex.parse(b.strip()))]
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad pair {text!r}; expected e.g. psi1,psi-1") from exc


def _grid(text: str) -> list[float]:
    """'a:b:step' (inclusive) or a comma list."""
    try:
        if ":" in text:
            a, b, h = (float(x) for x in text.split(":"))
            n = int(round((b - a) / h))
            return [a + k * h for k in range(n + 1)]
        return [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}") from exc


def _num(x):
    return float(f"{float(x):.15g}")


def _emit(cfg: RunConfig, rows: list[dict], summary: dict | None = None) -> str:
    if cfg.format == "csv" and rows:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        text = buf.getvalue()
        if summary is not None:
            text += "# " + json.dumps(summary, sort_keys=True) + "\n"
    else:
        body = {"rows": rows} if summary is None else {"rows": rows, "summary": summary}
        if summary is None and len(rows) == 1:
            body = rows[0]
        text = json.dumps(body, indent=2, sort_keys=True) + "\n"
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)
    return text


def _component_rows(values, errs, pairs, extra: dict) -> list[dict]:
    rows = []
    for p, q in pairs:
        k = pair_index(p, q)
        v = complex(values[k])
        rows.append({**extra, "component": f"{p.label},{q.label}", "re": _num(v.real),
                     "im": _num(v.imag), "err": _num(errs[k])})
    return rows


# ---------------------------------------------------------------------------
# commands

def cmd_eval(args, cfg):
    from .functional_equations import continue_z
    from .zcore import DEFAULT_CACHE, z_components, choose_rep
    s, w = _complex(args.s), _complex(args.w)
    pairs = _pairs(args.pair)
    plan = cfg.plan()
    if choose_rep(s, w, plan) is not None:
        z = z_components(s, w, choose_rep(s, w, plan), plan, pairs, DEFAULT_CACHE)
    else:
        z = continue_z(s, w, plan, DEFAULT_CACHE)
    errs = z.meta.get("component_err", np.full(16, z.err))
    if z.rep.value == "continued":
        errs = np.full(16, z.err)
    extra = {"s": str(s), "w": str(w), "rep": z.rep.value, "tail": _num(z.meta["tail"])}
    if "word" in z.meta:
        extra["word"] = z.meta["word"]
    _emit(cfg, _component_rows(z.values, errs, pairs, extra))
    return EXIT_OK


def cmd_eval_critical(args, cfg):
    from .critical_line import z_critical
    from .zcore import DEFAULT_CACHE
    pairs = _pairs(args.pair)
    z = z_critical(args.t, args.u, cfg.contour_c, cfg.plan(), DEFAULT_CACHE)
    _emit(cfg, _component_rows(z.values, z.meta["component_err"], pairs,
                               {"t": _num(args.t), "u": _num(args.u)}))
    return EXIT_OK


def _report(cfg, results) -> int:
    from .acceptance import report_json
    text = report_json(results)
    for r in results:
        print(r.line(), file=sys.stderr)
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def cmd_fe_check(args, cfg):
    from .acceptance import run_checks
    return _report(cfg, run_checks([2, 5], vars(cfg)))


def cmd_group_check(args, cfg):
    from .acceptance import run_checks
    res = run_checks([2, 3], vars(cfg))
    m, g = res[0].detail, res[1].detail
    parts = [f"orbit size {g['orbit_size']}",
             "A^2=I" if m["A2_exact"] else "A^2!=I",
             "B(s)B(1-s)=I" if m["BB_residual"] < 1e-9 else
             f"B(s)B(1-s) residual {m['BB_residual']}",
             "(ab)^6=id" if g["ab6_identity"] else "(ab)^6!=id"]
    print("; ".join(parts))
    return EXIT_OK if all(r.passed for r in res) else EXIT_FAIL


def cmd_scan_growth(args, cfg):
    from . import bounds_lab as bl
    from .zcore import DEFAULT_CACHE
    grid = _grid(args.grid)
    if args.slice == "generic":
        if not args.u_grid:
            raise ConfigError("generic slice needs --u-grid")
        grid = list(zip(grid, _grid(args.u_grid)))
    samples, fit = bl.growth_scan(args.slice, grid, cfg.plan(scan=True), DEFAULT_CACHE,
                                  cfg.contour_c)
    rows = []
    for smp in samples:
        for k in range(16):
            p, q = pair_from_index(k)
            rows.append({"slice": smp.slice.value, "t": _num(smp.t), "u": _num(smp.u),
                         "component": f"{p.label},{q.label}", "absZ": _num(smp.absZ[k]),
                         "conductor": _num(smp.conductor)})
    summary = {"slope": _num(fit.slope), "intercept": _num(fit.intercept),
               "r2": _num(fit.r2), "variable": fit.variable,
               "threshold": args.threshold, "pass": fit.slope <= args.threshold}
    _emit(cfg, rows, summary)
    return EXIT_OK if summary["pass"] else EXIT_FAIL


def cmd_mean_square(args, cfg):
    from . import bounds_lab as bl
    from .zcore import DEFAULT_CACHE
    Y2 = args.Y2 if args.Y2 is not None else args.Y1
    res = bl.mean_square(args.Y1, Y2, cfg.ms_quad, cfg.plan(scan=True), DEFAULT_CACHE)
    rows = []
    for k in range(16):
        p, q = pair_from_index(k)
        rows.append({"Y1": _num(args.Y1), "Y2": _num(Y2), "component": f"{p.label},{q.label}",
                     "integral": _num(res["integral"][k]), "ratio": _num(res["ratio"][k])})
    _emit(cfg, rows)
    return EXIT_OK


def cmd_lemma1(args, cfg):
    from . import bounds_lab as bl
    rows = []
    for i, x in enumerate(bl.pinned_lemma1_instances()):
        tot, eq, ne = bl.lemma1_tuple_count(x.D, x.N, x.Y1, x.Y2)
        rows.append({"instance": i, "D": x.D, "N": x.N, "Y1": x.Y1, "Y2": x.Y2,
                     "lhs1": _num(bl.lemma1_lhs(x, "diri1")), "rhs1": _num(bl.lemma1_rhs(x, "diri1")),
                     "lhs2": _num(bl.lemma1_lhs(x, "diri2")), "rhs2": _num(bl.lemma1_rhs(x, "diri2")),
                     "tuples": tot, "n1_eq_n2": eq, "n1_ne_n2": ne})
    X = [r["D"] * r["N"] * r["Y1"] * r["Y2"] for r in rows]
    c1 = max(r["lhs1"] / (x ** 0.1 * r["rhs1"]) for r, x in zip(rows, X))
    c2 = max(r["lhs2"] / (x ** 0.1 * r["rhs2"]) for r, x in zip(rows, X))
    k1 = max(r["n1_eq_n2"] / bl.count1_shape(r["D"], r["N"], r["Y1"], r["Y2"]) for r in rows)
    k2 = max(r["n1_ne_n2"] / bl.count2_shape(r["D"], r["N"], r["Y1"], r["Y2"]) for r in rows)
    ok = c1 <= 200 and c2 <= 200 and k1 <= 16 and k2 <= 16
    _emit(cfg, rows, {"c_diri1": _num(c1), "c_diri2": _num(c2), "c_count1": _num(k1),
                      "c_count2": _num(k2), "pass": ok})
    return EXIT_OK if ok else EXIT_FAIL


def cmd_sieve_check(args, cfg):
    from . import bounds_lab as bl
    from .zcore import DEFAULT_CACHE
    params = {}
    if args.mode == "bilinear":
        params = {"M": args.M, "N": args.N, "trials": args.trials,
                  "kind_a": args.kind, "kind_b": args.kind, "bound": args.bound or 10.0}
    else:
        if args.bound:
            params["bound_c"] = args.bound
    rep = bl.sieve_check(args.mode, params, cfg.seed, DEFAULT_CACHE)
    rows = [{"index": i, "ratio": _num(r)} for i, r in enumerate(rep.ratios)]
    _emit(cfg, rows, {"mode": rep.mode, "max_ratio": _num(rep.max_ratio),
                      "bound": rep.bound, "pass": rep.passed})
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_selftest(args, cfg):
    from .acceptance import CHECKS, FAST, run_checks
    if args.criteria == "fast":
        numbers = list(FAST)
    elif args.criteria == "all":
        numbers = sorted(CHECKS)
    else:
        try:
            numbers = [int(x) for x in args.criteria.split(",")]
        except ValueError as exc:
            raise ConfigError(f"bad criteria list {args.criteria!r}") from exc
        if any(n not in CHECKS for n in numbers):
            raise ConfigError(f"criteria must be among {sorted(CHECKS)}")
    return _report(cfg, run_checks(numbers, vars(cfg)))


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mds-lab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file")
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--cache", help="L-value cache file (MDS_CACHE wins)")
    common.add_argument("--d-max", dest="d_max", type=int, default=None)
    common.add_argument("--tail-bound", dest="tail_bound", type=float, default=None)
    common.add_argument("--contour-c", dest="contour_c", type=float, default=None)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="Z(s, w) anywhere off the polar lines")
    p.add_argument("--s", required=True)
    p.add_argument("--w", required=True)
    p.add_argument("--pair")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("eval-critical", parents=[common],
                       help="Z(1/2+it, 1/2+iu) by the contour method")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--u", type=float, required=True)
    p.add_argument("--pair")
    p.set_defaults(func=cmd_eval_critical)

    p = sub.add_parser("fe-check", parents=[common], help="matrix algebra and FE ground truth")
    p.set_defaults(func=cmd_fe_check)
    p = sub.add_parser("group-check", parents=[common], help="orbit and matrix identities")
    p.set_defaults(func=cmd_group_check)

    p = sub.add_parser("scan-growth", parents=[common], help="growth-exponent scan")
    p.add_argument("--slice", choices=("w_line", "antidiag", "generic"), default="w_line")
    p.add_argument("--grid", default="10:100:10", help="u (w_line) or t grid, a:b:step or list")
    p.add_argument("--u-grid", dest="u_grid", help="u values for the generic slice")
    p.add_argument("--threshold", type=float, default=0.55)
    p.add_argument("--scan-d-max", dest="scan_d_max", type=int, default=None)
    p.set_defaults(func=cmd_scan_growth)

    p = sub.add_parser("mean-square", parents=[common], help="box integral of |Z|^2")
    p.add_argument("--Y1", type=float, required=True)
    p.add_argument("--Y2", type=float)
    p.add_argument("--ms-quad", dest="ms_quad", type=int, default=None)
    p.add_argument("--scan-d-max", dest="scan_d_max", type=int, default=None)
    p.set_defaults(func=cmd_mean_square)

    p = sub.add_parser("lemma1", parents=[common], help="Lemma 1 oracles on the pinned set")
    p.set_defaults(func=cmd_lemma1)

    p = sub.add_parser("sieve-check", parents=[common], help="large-sieve ratio checks")
    p.add_argument("--mode", choices=("bilinear", "first_moment"), default="bilinear")
    p.add_argument("--M", type=int, default=1024)
    p.add_argument("--N", type=int, default=1024)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--kind", choices=("random", "power"), default="random")
    p.add_argument("--bound", type=float)
    p.set_defaults(func=cmd_sieve_check)

    p = sub.add_parser("selftest", parents=[common], help="acceptance suite")
    p.add_argument("--criteria", default="all", help="'all', 'fast' or a list like 1,2,5")
    p.add_argument("--ms-quad", dest="ms_quad", type=int, default=None)
    p.set_defaults(func=cmd_selftest)
    return ap


def _load_cache(path: str):
    from .lfunctions import LCache
    from .zcore import DEFAULT_CACHE
    if path and Path(path).exists():
        DEFAULT_CACHE.entries.update(LCache.load(path).entries)


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = RunConfig()
        if args.config:
            cfg.update(read_config_file(args.config))
        flags = {k: getattr(args, k, None) for k in RunConfig.keys()}
        cfg.update(flags)
        if os.environ.get("MDS_CACHE"):
            cfg.cache = os.environ["MDS_CACHE"]
        cfg.validate()
        if args.command == "selftest":
            # loaded entries carry a coarser error field, which would leak into
            # the report; selftest always recomputes
            cfg.cache = ""
        _load_cache(cfg.cache)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        status = args.func(args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PoleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (QuadratureError, RuntimeError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if cfg.cache:
        from .zcore import DEFAULT_CACHE
        DEFAULT_CACHE.save(cfg.cache)
    return status


if __name__ == "__main__":
    sys.exit(main())
