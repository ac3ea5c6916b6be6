"""Command-line front end: evaluate, optimize, scan, verify."""
from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

from .config import ConfigError, RunConfig, load_config
from .fluctuation import METHODS, NoEventsError
from .keyrate import evaluate
from .optimizer import optimize
from .sources import PAIRS

HEADER = "distance_km,method,R,mu_x,mu_y,p_x,p_y,pX_x,pX_y,pX_o,s11_lower,e11_upper,branch"
WORKERS_ENV = "MDIQKD_WORKERS"
EXIT_FAIL, EXIT_CONFIG, EXIT_NO_EVENTS = 1, 2, 3


def fmt(x) -> str:
    return format(float(x), ".17g")


def result_row(distance: float, method: str, R: float, proto, bounds_Z, bounds_X) -> str:
    s11 = bounds_Z.s11_lower if bounds_Z is not None else math.nan
    e11 = bounds_X.e11_upper if bounds_X is not None else math.nan
    branch = bounds_Z.branch_used if bounds_Z is not None else ""
    vals = [distance, R, proto.mu_x, proto.mu_y, proto.p_x, proto.p_y,
            proto.pX_given_x, proto.pX_given_y, proto.pX_given_o, s11, e11]
    out = [fmt(vals[0]), method] + [fmt(v) for v in vals[1:]] + [branch]
    return ",".join(out)


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    return max(1, n)


def parse_methods(text: str) -> list:
    methods = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise ConfigError(f"unknown methods {bad}; choose from {','.join(METHODS)}")
    return methods


def distance_grid(start: float, stop: float, step: float) -> list:
    if step <= 0 or stop < start:
        raise ConfigError("need --step > 0 and --to >= --from")
    n = int(math.floor((stop - start) / step + 1e-9))
    return [round(start + i * step, 10) for i in range(n + 1)]


def _optimize_job(args):
    cfg, distance, method = args
    ch = replace(cfg.channel, distance_km=distance)
    res = optimize(ch, cfg.N_t, method, cfg.fluct, cfg.optimizer, cfg.f_e, cfg.k_max)
    ev = res.evaluation
    row = result_row(distance, method, res.R, res.best,
                     ev.bounds_Z if ev else None, ev.bounds_X if ev else None)
    flags = list(ev.flags) if ev else []
    if res.zero_rate:
        flags.append("zero_rate_region")
    return row, flags


def _emit(rows: list, flags: list, out: str | None) -> None:
    text = HEADER + "\n" + "".join(r + "\n" for r in rows)
    report = "distance_km,method,flags\n" + "".join(f"{d},{m},{';'.join(f)}\n" for d, m, f in flags)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
        with open(out + ".flags", "w") as fh:
            fh.write(report)
    else:
        sys.stdout.write(text)
        if any(f for _, _, f in flags):
            sys.stderr.write(report)


def _run_jobs(jobs: list) -> list:
    n = min(worker_count(), len(jobs))
    if n > 1:
        with ProcessPoolExecutor(max_workers=n) as pool:
            return list(pool.map(_optimize_job, jobs))
    return [_optimize_job(j) for j in jobs]


def cmd_evaluate(cfg: RunConfig, args) -> int:
    ch = replace(cfg.channel, distance_km=args.distance)
    methods = parse_methods(args.methods)
    proto = cfg.point
    rows, flags, dump = [], [], []
    for method in methods:
        ev = evaluate(ch, proto, method, cfg.fluct, cfg.f_e, cfg.k_max)
        if not dump:
            for basis in ("Z", "X"):
                st = ev.stats[basis]
                dump += [f"{basis},{lr},{fmt(st.N[lr])},{fmt(st.S[lr])},{fmt(st.T[lr])},{fmt(st.E[lr])}"
                         for lr in PAIRS]
        rows.append(result_row(args.distance, method, ev.rate.R, proto, ev.bounds_Z, ev.bounds_X))
        flags.append((fmt(args.distance), method, list(ev.flags)))
    sys.stdout.write("basis,pair,N,S,T,E\n" + "".join(d + "\n" for d in dump) + "\n")
    _emit(rows, flags, args.out)
    return 0


def cmd_optimize(cfg: RunConfig, args) -> int:
    parse_methods(args.method)
    row, fl = _optimize_job((cfg, args.distance, args.method))
    _emit([row], [(fmt(args.distance), args.method, fl)], args.out)
    return 0


def cmd_scan(cfg: RunConfig, args) -> int:
    methods = parse_methods(args.methods)
    jobs = [(cfg, d, m) for d in distance_grid(args.start, args.stop, args.step) for m in methods]
    results = _run_jobs(jobs)
    rows = [r for r, _ in results]
    flags = [(fmt(d), m, fl) for (_, d, m), (_, fl) in zip(jobs, results)]
    _emit(rows, flags, args.out)
    return 0


def cmd_verify(cfg: RunConfig, args) -> int:
    from .verify import report, run_all

    checks = run_all()
    text = report(checks)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return 0 if all(c.passed for c in checks) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file with channel/protocol/fluctuation/optimizer sections")
    common.add_argument("--out", help="write CSV here instead of stdout (flag report goes to OUT.flags)")
    common.add_argument("--nt", type=float, help="total number of pulse pairs (overrides config)")
    common.add_argument("--seed", type=int, help="seed for the optimizer start-set selection")

    p = argparse.ArgumentParser(prog="mdiqkd", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("evaluate", parents=[common], help="statistics, bounds and R at fixed parameters")
    ev.add_argument("--distance", type=float, default=50.0)
    ev.add_argument("--methods", default="traditional,improved,lp")

    op = sub.add_parser("optimize", parents=[common], help="full parameter optimization at one distance")
    op.add_argument("--distance", type=float, required=True)
    op.add_argument("--method", default="improved")

    sc = sub.add_parser("scan", parents=[common], help="optimal R over a distance grid")
    sc.add_argument("--from", dest="start", type=float, default=0.0)
    sc.add_argument("--to", dest="stop", type=float, default=160.0)
    sc.add_argument("--step", type=float, default=5.0)
    sc.add_argument("--methods", default="traditional,improved,lp")

    sub.add_parser("verify", parents=[common], help="oracle-equivalence and invariant checks")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.nt is not None:
            if not args.nt > 0:
                raise ConfigError("--nt must be positive")
            cfg = replace(cfg, N_t=args.nt, point=replace(cfg.point, N_t=args.nt))
        if args.seed is not None:
            cfg = replace(cfg, optimizer=replace(cfg.optimizer, seed=args.seed))
        cmd = {"evaluate": cmd_evaluate, "optimize": cmd_optimize, "scan": cmd_scan, "verify": cmd_verify}
        return cmd[args.command](cfg, args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NoEventsError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NO_EVENTS


if __name__ == "__main__":
    sys.exit(main())
