"""Command-line front end.

    superpositivity reproduce thm2
    superpositivity bound --upsilon 0.64 --r 4.6 --ladder 0..20 --tail
    superpositivity verify petersson --q 101
    superpositivity scan --coeffs level11.csv --grid 0.02

Exit codes: 0 success, 1 a check failed, 2 invalid input, 3 accuracy
not reached, 4 missing data.  A ``key = value`` config file supplies
defaults for the long options of the chosen command; flags override it.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import afe, moments, zerodensity as zd
from .errors import AccuracyError, DomainError, IncompleteDataError, ValidationError
from .mollifier import MollifierProfile
from .quadrature import QuadratureSpec

EXIT_OK, EXIT_FAIL, EXIT_VALIDATION, EXIT_ACCURACY, EXIT_DATA = 0, 1, 2, 3, 4

# reference constants and tolerances of the reproduce pipelines
THM2_TARGETS = {"central": (0.5041, 1e-3)}
THM2_PROPORTION_FLOOR = 0.4959
THM1_TARGETS = {"central": (0.60934, 1e-3), "ladder_1": (0.21032, 1e-3),
                "ladder_2": (0.03758, 1e-3), "ladder_3": (0.00995, 1e-3)}
THM1_LADDER_SUM_CAP = 0.00528 + 5e-4
THM1_TAIL_CAP = 0.001
THM1_TOTAL_CAP = 0.88
THM1_PROPORTION_FLOOR = 0.12


def fmt(x) -> str:
    return f"{x:.10g}"


def _round(obj):
    # 10 significant digits everywhere in JSON output
    if isinstance(obj, (float, np.floating)):
        return float(f"{float(obj):.10g}")
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_round(obj), indent=2, sort_keys=True)


def _csv(rows, columns) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row[c]) if isinstance(row[c], (float, np.floating)) else row[c] for c in columns])
    return buf.getvalue().rstrip("\n")


def _table(rows, columns) -> str:
    cells = [[str(c) for c in columns]]
    cells += [[fmt(r[c]) if isinstance(r[c], (float, np.floating)) else str(r[c]) for c in columns] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(columns))]
    return "\n".join("  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in cells)


def emit(args, payload: dict, rows=None, columns=None):
    """Print ``payload`` as JSON, or ``rows`` as CSV / an aligned table."""
    form = args.format or args.default_format
    if form == "json" or rows is None:
        text = dumps(payload)
    elif form == "csv":
        text = _csv(rows, columns)
    else:
        text = _table(rows, columns)
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _spec(args) -> QuadratureSpec:
    return QuadratureSpec(abs_tol=args.abs_tol, rel_tol=max(args.abs_tol * 10, 1e-13), max_subdivisions=4000)


def _parse_range(text: str) -> tuple[int, int]:
    if ".." in text:
        lo, hi = text.split("..")
        return int(lo), int(hi)
    return int(text), int(text)


def _default_coeffs() -> str:
    return str(resources.files("superpositivity") / "data" / "level11.csv")


# --- commands -----------------------------------------------------------------

def _check_line(name, value, err, ok, target):
    return {"quantity": name, "value": value, "err": err, "target": target, "verdict": "PASS" if ok else "FAIL"}


def cmd_reproduce(args) -> int:
    spec = QuadratureSpec(abs_tol=args.abs_tol, rel_tol=max(args.abs_tol * 10, 1e-13), max_subdivisions=4000)
    lines = []
    if args.target == "thm2":
        p = zd.SurfaceParams(args.upsilon if args.upsilon is not None else 0.48, args.theta)
        R = args.r if args.r is not None else 7.0
        rep = zd.realzero_proportion(p, R, spec=spec)
        c = rep.regions["central"]
        ref, tol = THM2_TARGETS["central"]
        lines.append(_check_line("central", c["bound"], c["err"], abs(c["bound"] - ref) <= tol, f"{ref} +- {tol}"))
        lines.append(_check_line("realzero proportion", rep.proportion, rep.proportion_err,
                                 rep.proportion >= THM2_PROPORTION_FLOOR, f">= {THM2_PROPORTION_FLOOR}"))
    else:
        p = zd.SurfaceParams(args.upsilon if args.upsilon is not None else 0.64, args.theta)
        R = args.r if args.r is not None else 4.6
        rep = zd.superpositivity_proportion(zd.LadderConfig(p, R), spec, threads=args.threads)
        for name, (ref, tol) in THM1_TARGETS.items():
            r = rep.regions[name]
            lines.append(_check_line(name, r["bound"], r["err"], abs(r["bound"] - ref) <= tol, f"{ref} +- {tol}"))
        mid = [rep.regions[f"ladder_{j}"] for j in range(4, 21)]
        s = math.fsum(r["bound"] for r in mid)
        se = math.fsum(r["err"] for r in mid)
        lines.append(_check_line("ladder 4..20", s, se, s <= THM1_LADDER_SUM_CAP, f"<= {THM1_LADDER_SUM_CAP:.5g}"))
        t = rep.regions["tail"]["bound"]
        lines.append(_check_line("tail 21..", t, 0.0, t <= THM1_TAIL_CAP, f"<= {THM1_TAIL_CAP}"))
        lines.append(_check_line("total", rep.total, rep.total_err, rep.total <= THM1_TOTAL_CAP, f"<= {THM1_TOTAL_CAP}"))
        lines.append(_check_line("superpositivity proportion", rep.proportion, rep.proportion_err,
                                 rep.proportion >= THM1_PROPORTION_FLOOR, f">= {THM1_PROPORTION_FLOOR}"))
    passed = all(line["verdict"] == "PASS" for line in lines)
    emit(args, {"target": args.target, "checks": lines, "report": rep.to_dict(), "passed": passed},
         lines, ("quantity", "value", "err", "target", "verdict"))
    return EXIT_OK if passed else EXIT_FAIL


def cmd_bound(args) -> int:
    p = zd.SurfaceParams(args.upsilon, args.theta)
    spec = _spec(args)
    lo, hi = _parse_range(args.ladder) if args.ladder else (0, 0)
    if lo < 0 or hi < lo:
        raise DomainError("--ladder expects a range lo..hi with 0 <= lo <= hi")
    if args.tail and hi < 4:
        raise DomainError("--tail needs the ladder to reach at least box 4")
    if args.ladder is None and not args.tail:
        rep = zd.realzero_proportion(p, args.r, args.s, spec)
    else:
        cfg = zd.LadderConfig(p, args.r, args.s, j_exact_max=max(hi, 4), tail_start=max(hi, 4) + 1)
        regions = {}
        if lo == 0:
            c = zd.central_bound(p, args.r, cfg.S, spec)
            regions["central"] = {"bound": c.bound, "err": c.err}
        for j in range(max(lo, 1), hi + 1):
            b = zd.ladder_bound(cfg, j, spec)
            regions[f"ladder_{j}"] = {"bound": b.bound, "err": b.err}
        if args.tail:
            regions["tail"] = {"bound": zd.tail_bound(cfg, hi + 1), "err": 0.0}
        total = math.fsum(r["bound"] for r in regions.values())
        err = math.fsum(r["err"] for r in regions.values())
        rep = zd.BoundReport("bound", {"upsilon": p.upsilon, "theta": p.theta, "R": args.r, "S": cfg.S,
                                       "ladder": args.ladder, "tail": bool(args.tail)},
                             regions, total, err, 1.0 - total, err)
    rows = [{"region": k, "bound": v["bound"], "err": v["err"]} for k, v in rep.regions.items()]
    emit(args, rep.to_dict(), rows, ("region", "bound", "err"))
    return EXIT_OK


def cmd_ladder(args) -> int:
    cfg = zd.LadderConfig(zd.SurfaceParams(args.upsilon, args.theta), args.r, args.s)
    lo, hi = _parse_range(args.j)
    rows = []
    for j in range(lo, hi + 1):
        b = zd.ladder_bound(cfg, j, _spec(args))
        rows.append({"j": j, "bound": b.bound, "err": b.err})
    emit(args, {"params": {"upsilon": args.upsilon, "theta": args.theta, "R": args.r, "S": cfg.S},
                "ladder": rows}, rows, ("j", "bound", "err"))
    return EXIT_OK


def cmd_tail(args) -> int:
    cfg = zd.LadderConfig(zd.SurfaceParams(args.upsilon, args.theta), args.r, args.s,
                          j_exact_max=args.j_from - 1, tail_start=args.j_from)
    value = zd.tail_bound(cfg, args.j_from, args.j_to)
    row = {"j_from": args.j_from, "j_to": "inf" if args.j_to is None else args.j_to, "bound": value}
    emit(args, row, [row], ("j_from", "j_to", "bound"))
    return EXIT_OK


def _parse_box(text):
    vals = [float(x) for x in text.split(",")]
    if len(vals) != 4:
        raise DomainError("--box expects upsilon_lo,upsilon_hi,R_lo,R_hi")
    return (vals[0], vals[1]), (vals[2], vals[3])


def cmd_sweep(args) -> int:
    res = zd.optimize(args.objective, _parse_box(args.box), args.budget,
                      start=None if args.start is None else tuple(float(x) for x in args.start.split(",")),
                      theta=args.theta, spec=_spec(args), threads=args.threads)
    rows = [{"upsilon": u, "R": r, "proportion": v if math.isfinite(v) else None} for u, r, v in res.history]
    payload = {"objective": res.objective, "upsilon": res.upsilon, "R": res.R, "value": res.value,
               "evaluations": res.evaluations, "budget_exhausted": res.budget_exhausted,
               "report": res.report.to_dict(), "history": rows}
    emit(args, payload, rows, ("upsilon", "R", "proportion"))
    return EXIT_OK


def _verify_petersson(args):
    rows = []
    for q in args.q:
        diag = moments.petersson_delta(1, 1, q)
        off = moments.petersson_delta(1, 2, q)
        ok = abs(diag.value - 1.0) <= 1e-2 and abs(off.value) <= 1e-2
        rows.append({"q": q, "delta_11": diag.value, "delta_12": off.value, "tail_bound": diag.tail_bound,
                     "c_max": diag.c_max, "verdict": "PASS" if ok else "FAIL"})
    return rows, ("q", "delta_11", "delta_12", "tail_bound", "c_max", "verdict")


def _verify_moment(args):
    rows = moments.moment_sweep(args.q, args.ell, args.delta, args.t)
    res = [abs(r["residual"]) for r in rows]
    decreasing = all(b < a for a, b in zip(res, res[1:]))
    for r in rows:
        r["verdict"] = "PASS" if decreasing else "FAIL"
    return rows, moments.SWEEP_COLUMNS + ("verdict",)


def _verify_afe(args):
    coeffs = afe.ingest_coefficients(args.coeffs or _default_coeffs())
    oracle = afe.central_value_oracle(coeffs)
    weight = afe.SpectralWeight()
    res = afe.afe_square(weight, coeffs, args.delta, 0.0)
    # the oracle sits at delta = 0; away from it the symmetric difference bounds the drift
    drift = 0.0
    if args.delta != 0:
        drift = abs(res.value - afe.afe_square(weight, coeffs, -args.delta, 0.0).value)
    budget = res.error + 2.0 * abs(oracle.value) * oracle.error + drift + 1e-12
    diff = res.value - oracle.value**2
    ok = abs(diff) <= budget
    return [{"delta": args.delta, "afe_square": res.value, "oracle_square": oracle.value**2,
             "difference": diff, "budget": budget, "verdict": "PASS" if ok else "FAIL"}], \
        ("delta", "afe_square", "oracle_square", "difference", "budget", "verdict")


def _verify_lemma63(args):
    cases = moments.random_eta_square_cases(args.samples, args.seed)
    rows = []
    for nu, l1, l2, s in cases:
        closed = moments.dirichlet_eta_square(nu, l1, l2, s)
        series = moments.dirichlet_eta_square_series(nu, l1, l2, s)
        diff = abs(closed - series.value)
        rows.append({"nu": str(nu), "ell1": l1, "ell2": l2, "s": str(s), "difference": diff,
                     "series_error": series.error, "verdict": "PASS" if diff <= 1e-8 else "FAIL"})
    return rows, ("nu", "ell1", "ell2", "s", "difference", "series_error", "verdict")


VERIFIERS = {"petersson": _verify_petersson, "moment": _verify_moment, "afe": _verify_afe,
             "lemma63": _verify_lemma63}


def cmd_verify(args) -> int:
    if args.kind in ("petersson", "moment") and args.q is None:
        args.q = [101, 199, 499]
    if args.delta is None:
        args.delta = 0.05 if args.kind == "moment" else 0.0
    rows, columns = VERIFIERS[args.kind](args)
    passed = all(r["verdict"] == "PASS" for r in rows)
    emit(args, {"kind": args.kind, "rows": rows, "passed": passed}, rows, columns)
    return EXIT_OK if passed else EXIT_FAIL


def cmd_scan(args) -> int:
    coeffs = afe.ingest_coefficients(args.coeffs or _default_coeffs())
    afe.validate_table(coeffs)
    rep = afe.triangle_scan(afe.SpectralWeight(), coeffs, args.grid, QuadratureSpec(abs_tol=args.abs_tol))
    payload = rep.to_dict()
    payload["verdict"] = "no dip" if not rep.dips and rep.min_value > 0 else "dip"
    rows = [{"beta": b, "gamma": g, "abs_L_sq": v} for b, g, v in rep.nodes]
    emit(args, payload, rows, ("beta", "gamma", "abs_L_sq"))
    return EXIT_OK


def cmd_identity(args) -> int:
    coeffs = afe.ingest_coefficients(args.coeffs or _default_coeffs())
    afe.validate_table(coeffs)
    p = zd.SurfaceParams(args.upsilon, args.theta)
    profile = MollifierProfile.from_level(coeffs.q, (1 - 5 * args.theta) / 2, args.upsilon, args.theta)
    window = zd.SelbergWindow.for_surface(p, args.r, args.s)
    res = zd.selberg_integrals(profile, afe.SpectralWeight(), coeffs, window,
                               QuadratureSpec(abs_tol=args.abs_tol, rel_tol=1e-8))
    ok = res.total >= res.floor - res.error
    row = {"q": coeffs.q, "parity": res.parity, "I1": res.I1, "I2": res.I2, "I3": res.I3,
           "total": res.total, "error": res.error, "floor": res.floor, "verdict": "PASS" if ok else "FAIL"}
    emit(args, row, [row], tuple(row))
    return EXIT_OK if ok else EXIT_FAIL


# --- parser -------------------------------------------------------------------

def _surface_opts(p, upsilon=None, r=None):
    p.add_argument("--upsilon", type=float, default=upsilon, help="taper fraction of the mollifier")
    p.add_argument("--r", type=float, default=r, help="left offset R of the Selberg window (log-q units)")
    p.add_argument("--s", type=float, default=None,
                   help="half-height S of the window; default pi/(2(1-upsilon)(1-20 theta))")
    p.add_argument("--theta", type=float, default=zd.THETA, help="level margin theta")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file with defaults for the long options")
    common.add_argument("--dump-config", action="store_true", help="print the resolved configuration first")
    common.add_argument("--format", choices=("json", "csv", "table"), default=None)
    common.add_argument("--output", help="write the result here instead of stdout")
    common.add_argument("--threads", type=int, default=1, help="cap on worker threads")

    parser = argparse.ArgumentParser(prog="superpositivity", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reproduce", parents=[common],
                       help="rerun a published bound and compare every constant",
                       description="thm2: density of zeros off the real line near the centre at "
                                   "upsilon=0.48, R=7 (expects 0.5041, proportion >= 0.4959). "
                                   "thm1: central box plus region ladder at upsilon=0.64, R=4.6 "
                                   "(expects 0.60934, 0.21032, 0.03758, 0.00995, total <= 0.88).")
    p.add_argument("target", choices=("thm1", "thm2"))
    _surface_opts(p)
    p.add_argument("--abs-tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_reproduce, default_format="table")

    p = sub.add_parser("bound", parents=[common], help="central and ladder density bounds",
                       description="Central-box bound, ladder boxes lo..hi and the trivial-bound tail.")
    _surface_opts(p, 0.64, 4.6)
    p.add_argument("--ladder", help="range lo..hi of boxes (0 is the central box)")
    p.add_argument("--tail", action="store_true", help="add the tail beyond the last ladder box")
    p.add_argument("--abs-tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_bound, default_format="json")

    p = sub.add_parser("ladder", parents=[common], help="ladder box bounds j or lo..hi")
    _surface_opts(p, 0.64, 4.6)
    p.add_argument("--j", default="1..3")
    p.add_argument("--abs-tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_ladder, default_format="table")

    p = sub.add_parser("tail", parents=[common], help="trivial-bound tail of the ladder")
    _surface_opts(p, 0.64, 4.6)
    p.add_argument("--j-from", type=int, default=21)
    p.add_argument("--j-to", type=int, default=None, help="last box; omitted means no limit")
    p.set_defaults(func=cmd_tail, default_format="table")

    p = sub.add_parser("sweep", parents=[common], help="optimise (upsilon, R) for a proportion",
                       description="Grid search followed by Nelder-Mead; deterministic for a fixed budget.")
    p.add_argument("--objective", choices=("realzero", "superpositivity"), default="realzero")
    p.add_argument("--box", default="0.4,0.6,5,9", help="upsilon_lo,upsilon_hi,R_lo,R_hi")
    p.add_argument("--budget", type=int, default=40)
    p.add_argument("--start", default=None, help="upsilon,R evaluated when budget is 1")
    p.add_argument("--theta", type=float, default=zd.THETA)
    p.add_argument("--abs-tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_sweep, default_format="table")

    p = sub.add_parser("verify", parents=[common], help="numerical identity checks",
                       description="petersson: harmonic-weight sums of lambda(1)^2 and lambda(1)lambda(2). "
                                   "moment: twisted second moment against its main term over q. "
                                   "afe: |L(1/2)|^2 against the direct series. "
                                   "lemma63: closed form of the eta-square Dirichlet series.")
    p.add_argument("kind", choices=tuple(VERIFIERS))
    p.add_argument("--q", type=int, nargs="+", default=None)
    p.add_argument("--ell", type=int, default=1)
    p.add_argument("--delta", type=float, default=None, help="shift; default 0.05 (moment) or 0 (afe)")
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--coeffs", default=None)
    p.add_argument("--samples", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify, default_format="table")

    p = sub.add_parser("scan", parents=[common], help="grid scan of |L|^2 over the triangle")
    p.add_argument("--coeffs", default=None, help="coefficient file (default: bundled level 11)")
    p.add_argument("--grid", type=float, default=0.05)
    p.add_argument("--abs-tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_scan, default_format="json")

    p = sub.add_parser("identity", parents=[common], help="Selberg-lemma boundary integrals for one form",
                       description="I1 + I2 + I3 of log LM over the window, compared with the floor "
                                   "forced by a central zero (odd forms).")
    p.add_argument("--coeffs", default=None)
    _surface_opts(p, 0.48, 1.0)
    p.add_argument("--abs-tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_identity, default_format="table")
    return parser


def read_config(path) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (x.strip() for x in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


_INTERNAL = {"func", "default_format", "config", "dump_config", "command", "output"}


def _apply_config(parser, argv):
    args = parser.parse_args(argv)
    if not args.config:
        return args
    values = read_config(args.config)
    sub = next(a for a in parser._subparsers._group_actions if isinstance(a, argparse._SubParsersAction))
    subparser = sub.choices[args.command]
    known = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, text in values.items():
        action = known.get(key)
        if action is None or key in _INTERNAL or not action.option_strings:
            raise ValidationError(f"unknown config key '{key}' for command {args.command}")
        if action.nargs == 0:
            defaults[key] = text.lower() in ("1", "true", "yes", "on")
        elif action.nargs == "+":
            defaults[key] = [action.type(x) for x in text.replace(",", " ").split()]
        else:
            defaults[key] = action.type(text) if action.type else text
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def resolved_config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _INTERNAL}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        if args.threads is not None and args.threads < 1:
            raise DomainError("--threads must be at least 1")
        if args.dump_config:
            print(f"# command = {args.command}")
            for k, v in resolved_config(args).items():
                print(f"{k} = {' '.join(map(str, v)) if isinstance(v, list) else v}")
        return args.func(args)
    except (DomainError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except AccuracyError as exc:
        print(f"accuracy: {exc}", file=sys.stderr)
        return EXIT_ACCURACY
    except (IncompleteDataError, FileNotFoundError) as exc:
        print(f"missing data: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
