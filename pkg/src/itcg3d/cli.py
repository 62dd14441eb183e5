"""Command-line front end: ``run``, ``sweep``, ``bounds`` and ``cases``.

Exit codes: 0 success, 1 configuration error, 2 failed interception or impact
time outside the necessary window, 3 (``bounds`` only) impact time inside the
necessary window but outside the sufficient one.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import feasibility
from .errors import ConfigurationError, SimulationError
from .scenario_io import format_report, load_scenario, write_report, write_trace
from .sim_engine import feasibility_report, initial_state, run as run_scenario

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_FAILED = 2
EXIT_NECESSARY_ONLY = 3

SWEEP_PARAMS = ("phi", "k1", "k3", "k4", "tf", "headings")
CASES = ("A", "B", "C", "D")
DEFAULT_OUT = "itcg3d_out"


def _err(msg: str) -> None:
    print(f"itcg3d: {msg}", file=sys.stderr)


def _out_dir(arg) -> Path:
    return Path(arg or os.environ.get("ITCG3D_OUT_DIR") or DEFAULT_OUT)


def _label(value: str) -> str:
    return re.sub(r"[^0-9A-Za-z.+-]+", "_", value).strip("_") or "value"


def _window_violation(sc):
    """Diagnostic if ``tf`` lies outside the necessary window, else None."""
    r0 = initial_state(sc).r
    lo, hi = feasibility.necessary_window(r0, sc.vm, sc.sigma_max)
    if lo <= sc.tf <= hi:
        return None
    return (f"tf={sc.tf:g} s is outside the necessary window [{lo:.2f}, {hi:.2f}] s "
            f"(r0={r0:.1f} m, Vm={sc.vm:g} m/s, sigma_max={math.degrees(sc.sigma_max):g} deg); "
            "no admissible trajectory exists")


def execute(job: dict) -> dict:
    """One simulation job: parse, check, simulate, write; never raises.

    ``job`` holds ``path``, ``overrides`` and ``prefix`` (output path stem).
    Returns a summary with ``status`` (an exit code) and, when the run happened,
    the impact report and feasibility window.
    """
    out = {"label": job.get("label", ""), "status": EXIT_CONFIG, "error": job.get("error", ""),
           "report": None, "window": None}
    if out["error"]:
        return out
    try:
        sc = load_scenario(job["path"], job.get("overrides"))
        fr = feasibility_report(sc)
    except (ConfigurationError, OSError) as exc:
        out["error"] = str(exc)
        return out
    out["window"] = fr.t_sufficient
    msg = _window_violation(sc)
    if msg:
        out["status"], out["error"] = EXIT_FAILED, msg
        return out
    try:
        trace, report = run_scenario(sc)
    except SimulationError as exc:
        out["status"], out["error"] = EXIT_FAILED, f"simulation failed: {exc}"
        return out
    prefix = job["prefix"]
    write_trace(trace, f"{prefix}_trace.csv")
    write_report(report, f"{prefix}_report.txt")
    out["report"] = report
    out["status"] = EXIT_OK if report.success else EXIT_FAILED
    if not report.success:
        out["error"] = (f"interception failed: termination={report.termination}, "
                        f"miss={report.miss_distance:.3f} m at t={report.impact_time:.3f} s")
    return out


def _map_jobs(jobs: list, n: int) -> list:
    if n <= 1 or len(jobs) <= 1:
        return [execute(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(n, len(jobs))) as pool:
        return list(pool.map(execute, jobs))


def _overrides(args) -> dict:
    ov = {}
    for name in ("law", "case", "tf", "dt"):
        v = getattr(args, name, None)
        if v is not None:
            ov[name] = v
    return ov


def cmd_run(args) -> int:
    out = _out_dir(args.out)
    try:
        load_scenario(args.scenario, _overrides(args))
    except (ConfigurationError, OSError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    out.mkdir(parents=True, exist_ok=True)
    res = execute({"path": args.scenario, "overrides": _overrides(args),
                   "prefix": str(out / Path(args.scenario).stem)})
    if res["error"]:
        _err(res["error"])
    rep = res["report"]
    if rep is not None:
        print(f"impact_time={rep.impact_time:.4f} miss={rep.miss_distance:.4f} "
              f"sigma_peak_deg={math.degrees(rep.sigma_peak):.3f} success={str(rep.success).lower()}")
    return res["status"]


def _parse_values(param: str, raw: list) -> list:
    values = [v.strip() for chunk in raw for v in chunk.split(",") if v.strip()]
    if not values:
        raise ConfigurationError("--values needs at least one value")
    return values


def _sweep_overrides(param: str, value: str) -> dict:
    if param == "headings":
        parts = value.split(":")
        if len(parts) != 2:
            raise ConfigurationError(f"headings value {value!r} is not theta:psi")
        return {"theta_m0": parts[0], "psi_m0": parts[1]}
    return {param: value}


def cmd_sweep(args) -> int:
    try:
        values = _parse_values(args.param, args.values)
        load_scenario(args.scenario)
    except (ConfigurationError, OSError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    out = _out_dir(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.scenario).stem
    jobs = []
    for v in values:
        job = {"path": args.scenario, "label": v, "prefix": str(out / f"{stem}_{args.param}_{_label(v)}")}
        try:
            job["overrides"] = _sweep_overrides(args.param, v)
        except ConfigurationError as exc:
            job["error"] = str(exc)
        jobs.append(job)
    results = _map_jobs(jobs, args.jobs)

    agg = out / f"{stem}_sweep_{args.param}.csv"
    with open(agg, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["value", "status", "impact_time", "miss", "sigma_peak", "t_e1_converged", "t_e2_converged"])
        for res in results:
            rep = res["report"]
            if rep is None:
                w.writerow([res["label"], res["status"], "", "", "", "", ""])
                continue
            w.writerow([res["label"], res["status"], f"{rep.impact_time:.6f}", f"{rep.miss_distance:.6f}",
                        f"{math.degrees(rep.sigma_peak):.6f}", f"{rep.t_e1_converged:.6f}",
                        f"{rep.t_e2_converged:.6f}"])
    for res in results:
        if res["error"]:
            _err(f"{args.param}={res['label']}: {res['error']}")
    print(agg.read_text(encoding="utf-8"), end="")
    codes = {res["status"] for res in results}
    if EXIT_CONFIG in codes:
        return EXIT_CONFIG
    return EXIT_FAILED if EXIT_FAILED in codes else EXIT_OK


def cmd_bounds(args) -> int:
    try:
        sc = load_scenario(args.scenario)
        fr = feasibility_report(sc)
    except (ConfigurationError, OSError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    print(format_report(fr), end="")
    verdict = fr.classify()
    if verdict == "sufficient":
        return EXIT_OK
    if verdict == "necessary":
        _err(f"tf={sc.tf:g} s is inside the necessary window but outside the sufficient window "
             f"({fr.t_sufficient[0]:.3f}, {fr.t_sufficient[1]:.3f})")
        return EXIT_NECESSARY_ONLY
    _err(f"tf={sc.tf:g} s is outside the necessary window [{fr.t_necessary[0]:.3f}, {fr.t_necessary[1]:.3f}]")
    return EXIT_FAILED


CASE_COLUMNS = ("case", "t_min", "t_max", "impact_time", "miss", "sigma_peak")


def _fmt_num(x, digits=4) -> str:
    return "" if x is None or x != x else f"{x:.{digits}f}"


def cmd_cases(args) -> int:
    try:
        load_scenario(args.scenario)
    except (ConfigurationError, OSError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    out = _out_dir(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.scenario).stem
    # k1 left to its per-case default, k1_max - 0.001
    jobs = [{"path": args.scenario, "overrides": {"case": c, "k1": "auto", "law": "HeadingAngle"}, "label": c,
             "prefix": str(out / f"{stem}_case{c}")} for c in CASES]
    results = _map_jobs(jobs, args.jobs)

    rows = []
    for res in results:
        rep, win = res["report"], res["window"]
        lo, hi = win if win else (None, None)
        rows.append([res["label"], _fmt_num(lo, 3), _fmt_num(hi, 3),
                     _fmt_num(rep.impact_time if rep else None), _fmt_num(rep.miss_distance if rep else None),
                     _fmt_num(math.degrees(rep.sigma_peak) if rep else None, 3)])
    with open(out / f"{stem}_cases.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CASE_COLUMNS)
        w.writerows(rows)
    widths = [max(len(CASE_COLUMNS[j]), *(len(r[j]) for r in rows)) for j in range(len(CASE_COLUMNS))]
    print("  ".join(h.rjust(wd) for h, wd in zip(CASE_COLUMNS, widths)))
    for r in rows:
        print("  ".join(v.rjust(wd) for v, wd in zip(r, widths)))
    status = EXIT_OK
    for res in results:
        if res["status"] != EXIT_OK:
            _err(f"case {res['label']}: {res['error']}")
            status = max(status, res["status"])
    return status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="itcg3d", description="Impact-time-constrained 3D guidance simulator")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate one scenario")
    r.add_argument("scenario", help="scenario file")
    r.add_argument("--out", help="output directory (default $ITCG3D_OUT_DIR or ./itcg3d_out)")
    r.add_argument("--law", choices=("LeadAngle", "HeadingAngle"))
    r.add_argument("--case", choices=CASES)
    r.add_argument("--tf", type=float, help="impact time [s]")
    r.add_argument("--dt", type=float, help="integration step [s]")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="run one scenario over a list of parameter values")
    s.add_argument("scenario")
    s.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    s.add_argument("--values", required=True, action="append",
                   help="comma-separated values; headings as theta:psi in degrees (use --values=-30:30,...)")
    s.add_argument("--out")
    s.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    s.set_defaults(func=cmd_sweep)

    b = sub.add_parser("bounds", help="print the feasibility report and classify tf")
    b.add_argument("scenario")
    b.set_defaults(func=cmd_bounds)

    c = sub.add_parser("cases", help="compare the four virtual-input cases")
    c.add_argument("scenario")
    c.add_argument("--out")
    c.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    c.set_defaults(func=cmd_cases)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors, which would read as a failed interception here
        return EXIT_CONFIG if exc.code == 2 else (exc.code or EXIT_OK)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
