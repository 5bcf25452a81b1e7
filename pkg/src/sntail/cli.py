"""Command-line front end: analyze, verify, fit, selftest.

Exit codes: 0 success, 1 verification or fit failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from decimal import Decimal, InvalidOperation

import numpy as np

from .classify import BOUNDARY_NAMES, Parameters, derive
from .conditional import log_dcdu_exact
from .errors import DomainError, SnTailError
from .tail_order import (RvForm, audit_against_printed, fit_log_curve, printed_case_values,
                         tail_dependence_asym)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
CSV_HEADER = ["u_log", "log_exact", "log_asym", "ratio", "summand1_log", "summand2_log"]
DEFAULT_FIT_GRID = "-40:-400:-40"
U_LOG_MIN, U_LOG_MAX = -1e6, -20.0


class UsageError(Exception):
    pass


def parse_grid(spec: str) -> list[float]:
    """'a:b:step' (inclusive of b when it lands on the lattice) or a comma list."""
    try:
        if ":" in spec:
            a, b, step = (float(t) for t in spec.split(":"))
            if step == 0 or (b - a) / step < 0:
                raise UsageError(f"grid {spec!r} is empty")
            n = int(math.floor((b - a) / step + 1e-9)) + 1
            return [a + i * step for i in range(n)]
        vals = [float(t) for t in spec.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse grid {spec!r}: {exc}") from None
    if not vals:
        raise UsageError("empty grid")
    return vals


def u_to_log(text: str) -> float:
    """log u for a decimal string; works far below the double range."""
    try:
        u = Decimal(text)
    except InvalidOperation:
        raise UsageError(f"--u expects a decimal number, got {text!r}") from None
    if not 0 < u < 1:
        raise UsageError("--u must lie in (0, 1)")
    return float(u.ln())


def _params(args) -> Parameters:
    try:
        return Parameters(float(args.alpha1), float(args.alpha2), float(args.rho))
    except (DomainError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False)


# ---------------------------------------------------------------------------
# analyze

def analyze_report(p: Parameters, boundary=()) -> dict:
    res = tail_dependence_asym(p, boundary)
    d = derive(p, boundary)
    f = res.dcdu
    report = {
        "params": {"alpha1": p.alpha1, "alpha2": p.alpha2, "rho": p.rho},
        "boundary": sorted(boundary),
        "case": {"octant": res.case.octant, "group": res.case.group, "thm3_case": res.case.thm3_case},
        "lambda1": d.lambda1, "lambda2": d.lambda2, "gamma1": d.gamma1,
        "beta1": d.beta1, "beta2": d.beta2,
        "theta": f.theta, "kappa": res.kappa, "tau2": f.tau2, "log_tau1": f.log_tau1,
        "lambdaL": res.lambdaL.as_dict(),
        "summand1": res.summand1.as_dict(), "summand2": res.summand2.as_dict(),
        "closed_form_path": p.alpha1 == 0 or p.alpha2 == 0,
        "formula": (f"dC(u,u)/du ~ {math.exp(f.log_tau1):.10g} * u^{f.theta:.10g}"
                    f" * (-log u)^{f.tau2:.10g}"),
        "warnings": list(res.warnings),
    }
    if p.alpha1 == 0 and p.alpha2 == 0:
        report["printed"] = None
    else:
        report["printed"] = audit_against_printed(p, boundary)
    return report


def _analyze_text(r: dict) -> str:
    lines = [
        f"alpha1={r['params']['alpha1']} alpha2={r['params']['alpha2']} rho={r['params']['rho']}",
        f"case {r['case']['thm3_case']}  octant {r['case']['octant']}  group {r['case']['group']}",
        f"lambda1={r['lambda1']:.12g} lambda2={r['lambda2']:.12g} gamma1={r['gamma1']:.12g}",
        f"beta1={r['beta1']:.12g} beta2={r['beta2']:.12g}",
        f"theta={r['theta']:.12g} kappa={r['kappa']:.12g} tau2={r['tau2']:.12g} log_tau1={r['log_tau1']:.12g}",
        r["formula"],
    ]
    if r["printed"] is not None:
        lines.append(f"closed-form table (case {r['printed']['case']}):")
        for key, row in r["printed"]["fields"].items():
            pv = "n/a" if row["printed"] is None else f"{row['printed']:.12g}"
            dv = "n/a" if row["delta"] is None else f"{row['delta']:.3g}"
            lines.append(f"  {key:9s} composed={row['composed']:.12g} printed={pv} delta={dv}")
    if r["closed_form_path"]:
        lines.append("note: closed-form path (a zero alpha)")
    for w in r["warnings"]:
        lines.append(f"warning: {w}")
    return "\n".join(lines)


def run_analyze(args, out) -> int:
    if args.batch:
        reports = []
        with open(args.batch) as fh:
            for line in fh:
                line = line.split("#")[0].strip()
                if not line:
                    continue
                try:
                    a1, a2, rho = (float(t) for t in line.replace(",", " ").split())
                    reports.append(analyze_report(Parameters(a1, a2, rho), args.boundary))
                except (ValueError, DomainError) as exc:
                    raise UsageError(f"bad batch line {line!r}: {exc}") from None
        out.write(_dump(reports) + "\n")
        return EXIT_OK
    r = analyze_report(_params(args), args.boundary)
    out.write((_dump(r) if args.format == "json" else _analyze_text(r)) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify

def verify_row(task) -> dict:
    (a1, a2, rho), boundary, u_log = task
    p = Parameters(a1, a2, rho)
    try:
        res = tail_dependence_asym(p, boundary)
        log_exact, s1, s2 = log_dcdu_exact(u_log, p)
        log_asym = res.dcdu.evaluate(u_log)
        row = {"u_log": u_log, "log_exact": log_exact, "log_asym": log_asym,
               "ratio": math.exp(log_asym - log_exact), "summand1_log": s1, "summand2_log": s2,
               "failed": False}
        if not all(math.isfinite(v) for v in (log_exact, log_asym, s1, s2)):
            raise SnTailError("non-finite value")
        return row
    except SnTailError as exc:
        return {"u_log": u_log, "failed": True, "error": f"{type(exc).__name__}: {exc}"}


def _map_rows(tasks, jobs: int):
    if jobs > 1 and len(tasks) > 1:
        try:
            with ProcessPoolExecutor(max_workers=jobs) as ex:
                return list(ex.map(verify_row, tasks))
        except (OSError, RuntimeError):
            pass  # no process support here; fall through to serial
    return [verify_row(t) for t in tasks]


def trend_summary(rows: list[dict]) -> dict:
    ok = [r for r in rows if not r["failed"]]
    ok.sort(key=lambda r: -r["u_log"])
    err = [abs(math.log(r["ratio"])) for r in ok]
    steps = sum(1 for x, y in zip(err, err[1:]) if y < x)
    return {
        "n_rows": len(rows), "n_failed": len(rows) - len(ok),
        "abs_log_ratio_first": err[0] if err else None,
        "abs_log_ratio_last": err[-1] if err else None,
        "decreasing_steps": steps, "steps": max(len(err) - 1, 0),
        "improving": bool(len(err) >= 2 and err[-1] < err[0]),
    }


def _grid_from_args(args) -> list[float]:
    grid = []
    if args.u_log_grid:
        grid += parse_grid(args.u_log_grid)
    if args.u_log is not None:
        grid += [float(x) for x in args.u_log]
    if args.u is not None:
        grid += [u_to_log(x) for x in args.u]
    if not grid:
        raise UsageError("empty grid: give --u-log-grid, --u-log or --u")
    for g in grid:
        if not (U_LOG_MIN <= g <= U_LOG_MAX):
            raise UsageError(f"u_log {g} outside [{U_LOG_MIN:g}, {U_LOG_MAX:g}]")
    return grid


def run_verify(args, out) -> int:
    p = _params(args)
    grid = _grid_from_args(args)
    tasks = [((p.alpha1, p.alpha2, p.rho), tuple(args.boundary), g) for g in grid]
    rows = _map_rows(tasks, args.jobs)
    summary = trend_summary(rows)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in rows:
            if r["failed"]:
                w.writerow([repr(r["u_log"])] + ["failed"] * (len(CSV_HEADER) - 1))
            else:
                w.writerow([repr(float(r[k])) for k in CSV_HEADER])
        out.write(buf.getvalue())
        out.write(f"# improving={summary['improving']} decreasing_steps="
                  f"{summary['decreasing_steps']}/{summary['steps']} failed={summary['n_failed']}\n")
    elif args.format == "json":
        out.write(_dump({"rows": rows, "summary": summary}) + "\n")
    else:
        for r in rows:
            if r["failed"]:
                out.write(f"u_log={r['u_log']:.6g}  FAILED  {r['error']}\n")
            else:
                out.write(f"u_log={r['u_log']:.6g}  ratio={r['ratio']:.8f}  "
                          f"log_exact={r['log_exact']:.10g}  log_asym={r['log_asym']:.10g}\n")
        out.write(f"improving={summary['improving']}  "
                  f"decreasing steps {summary['decreasing_steps']}/{summary['steps']}\n")
    return EXIT_FAIL if summary["n_failed"] else EXIT_OK


# ---------------------------------------------------------------------------
# fit

def run_fit(args, out) -> int:
    grid = parse_grid(args.u_log_grid or DEFAULT_FIT_GRID)
    if len(set(grid)) < 4:
        raise UsageError("fit needs at least four distinct grid points")
    if any(g > U_LOG_MAX for g in grid):
        raise UsageError("fit grid points must satisfy u_log <= -20")
    if args.inject_rvform:
        try:
            theta, log_tau1, tau2 = (float(t) for t in args.inject_rvform.split(","))
        except ValueError:
            raise UsageError("--inject-rvform expects 'theta,log_tau1,tau2'") from None
        target = RvForm(theta, log_tau1, tau2)
        vals = [target.evaluate(g) for g in grid]
        ref = {"theta": theta, "tau2": tau2, "source": "injected"}
    else:
        p = _params(args)
        res = tail_dependence_asym(p, args.boundary)
        vals = _map_fit_values(p, grid, args.jobs)
        ref = {"theta": res.dcdu.theta, "tau2": res.dcdu.tau2, "source": "composed"}
    theta_hat, tau2_hat, resid = fit_log_curve(grid, vals)
    rel = abs(theta_hat / ref["theta"] - 1.0) if ref["theta"] != 0 else abs(theta_hat)
    passed = rel <= args.tolerance
    report = {"theta_hat": theta_hat, "tau2_hat": tau2_hat, "resid": resid,
              "theta": ref["theta"], "tau2": ref["tau2"], "source": ref["source"],
              "theta_rel_error": rel, "tolerance": args.tolerance, "passed": passed,
              "grid": grid}
    if args.format == "json":
        out.write(_dump(report) + "\n")
    else:
        out.write(f"theta_hat={theta_hat:.10g} (analytic {ref['theta']:.10g}, rel err {rel:.3g})\n"
                  f"tau2_hat={tau2_hat:.10g} (analytic {ref['tau2']:.10g})\n"
                  f"resid={resid:.3g}  {'PASS' if passed else 'FAIL'} at tolerance {args.tolerance}\n")
    return EXIT_OK if passed else EXIT_FAIL


def _fit_value(task):
    (a1, a2, rho), u_log = task
    return log_dcdu_exact(u_log, Parameters(a1, a2, rho))[0]


def _map_fit_values(p: Parameters, grid, jobs: int):
    tasks = [((p.alpha1, p.alpha2, p.rho), g) for g in grid]
    if jobs > 1:
        try:
            with ProcessPoolExecutor(max_workers=jobs) as ex:
                return list(ex.map(_fit_value, tasks))
        except (OSError, RuntimeError):
            pass
    return [_fit_value(t) for t in tasks]


# ---------------------------------------------------------------------------
# selftest

def _selftest_checks():
    from .sn_special import log_norm_cdf, sn_log_cdf, sn_quantile

    def normal_tail():
        return abs(log_norm_cdf(-40.0) - (-800 - math.log(40) - 0.5 * math.log(2 * math.pi))) < 1e-3

    def round_trip():
        xs = np.linspace(-30, 5, 36)
        return all(abs(sn_quantile(sn_log_cdf(x, lam), lam) - x) <= 1e-10 * max(1, abs(x))
                   for lam in (-3.0, 0.5, 3.0) for x in xs)

    def equi_skew():
        a, rho = 1.0, 0.5
        b2 = (1 - rho) * (1 + 2 * a * a * (1 + rho)) / (1 + rho)
        lam = a * (1 + rho) / math.sqrt(1 + a * a * (1 - rho * rho))
        ref = b2 * math.log(2 * math.pi * lam) - 0.5 * math.log(math.pi) - 0.5 * math.log(b2) \
            - 2 * math.log(1 + b2)
        r = tail_dependence_asym(Parameters(a, a, rho)).lambdaL
        return abs(r.theta - b2) < 1e-12 and abs(r.log_tau1 - ref) < 1e-12

    def printed_case1():
        p = Parameters(-1.0, -0.5, 0.2)
        pr = printed_case_values(p)
        f = tail_dependence_asym(p).dcdu
        return all(abs(pr[k] - v) < 1e-12 for k, v in f.as_dict().items())

    def oracle_ratio():
        p = Parameters(1.0, 2.0, 0.3)
        r = math.exp(tail_dependence_asym(p).dcdu.evaluate(-200.0) - log_dcdu_exact(-200.0, p)[0])
        return 0.75 <= r <= 1.33

    return [("normal tail", normal_tail), ("quantile round trip", round_trip),
            ("equi-skew constant", equi_skew), ("case 1 table", printed_case1),
            ("case 5 oracle ratio", oracle_ratio)]


def run_selftest(args, out) -> int:
    failed = 0
    for name, fn in _selftest_checks():
        try:
            ok = bool(fn())
        except SnTailError as exc:
            ok = False
            name += f" ({exc})"
        failed += not ok
        out.write(f"{'PASS' if ok else 'FAIL'}  {name}\n")
    return EXIT_FAIL if failed else EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sntail",
                                 description="Lower-tail asymptotics of the bivariate skew-normal copula.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, need_params=True):
        sp.add_argument("--alpha1", type=float, required=need_params)
        sp.add_argument("--alpha2", type=float, required=need_params)
        sp.add_argument("--rho", type=float, required=need_params)
        sp.add_argument("--boundary", action="append", default=[], choices=BOUNDARY_NAMES,
                        help="force the zero branch of a classifier input (repeatable)")
        sp.add_argument("--format", choices=("json", "csv", "text"), default="text")

    sp = sub.add_parser("analyze", help="classify and print the tail-order result")
    common(sp, need_params=False)
    sp.add_argument("--batch", help="file with one 'alpha1 alpha2 rho' per line (JSON output)")

    sp = sub.add_parser("verify", help="compare the asymptotic form with quadrature on a grid")
    common(sp)
    sp.add_argument("--u-log-grid", help="'start:stop:step' or comma list of log u values")
    sp.add_argument("--u-log", action="append", type=float)
    sp.add_argument("--u", action="append", help="u as a decimal string, e.g. 1e-300")
    sp.add_argument("--jobs", type=int, default=1)

    sp = sub.add_parser("fit", help="least-squares exponent fit against quadrature")
    common(sp, need_params=False)
    sp.add_argument("--u-log-grid", default=None, help=f"default {DEFAULT_FIT_GRID}")
    sp.add_argument("--tolerance", type=float, default=0.05)
    sp.add_argument("--inject-rvform", help="'theta,log_tau1,tau2': fit synthetic values instead")
    sp.add_argument("--jobs", type=int, default=1)

    sub.add_parser("selftest", help="quick internal consistency checks")
    return ap


_VALUE_FLAGS = ("--alpha1", "--alpha2", "--rho", "--u-log", "--u-log-grid", "--inject-rvform")


def _glue_negative_values(argv):
    # argparse reads "-50,-100" or "-1e6" as an option; bind such values to their flag
    out, it = [], iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            if nxt is None:
                out.append(tok)
            elif nxt.startswith("-") and not nxt.startswith("--"):
                out.append(f"{tok}={nxt}")
            else:
                out += [tok, nxt]
        else:
            out.append(tok)
    return out


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_glue_negative_values(argv))
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.command == "analyze":
            if not args.batch and None in (args.alpha1, args.alpha2, args.rho):
                raise UsageError("analyze needs --alpha1, --alpha2 and --rho (or --batch)")
            return run_analyze(args, out)
        if args.command == "verify":
            return run_verify(args, out)
        if args.command == "fit":
            if not args.inject_rvform and None in (args.alpha1, args.alpha2, args.rho):
                raise UsageError("fit needs --alpha1, --alpha2 and --rho (or --inject-rvform)")
            return run_fit(args, out)
        return run_selftest(args, out)
    except UsageError as exc:
        sys.stderr.write(f"sntail: error: {exc}\n")
        return EXIT_USAGE
    except SnTailError as exc:
        sys.stderr.write(f"sntail: {type(exc).__name__}: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
