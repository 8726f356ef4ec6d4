"""``noma-ee`` command line: simulate, ergodic, optimize, sweep.

Every output starts with a comment header holding the tool version, backend,
scenario hash, seed and the fully resolved scenario. Passing that output file
back as the scenario reproduces it byte for byte.
"""
from __future__ import annotations

import argparse
import io
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, scenario as scenario_mod
from ._accel import BACKEND
from .channel import make_rng, sample_realization
from .ee import check_constraints, maximize_ee
from .ergodic import asymptotic_rate, ergodic_sum_rate_gcq, ergodic_sum_rate_mc
from .errors import DomainError, NomaError
from .rates import sum_rate

ERGODIC_COLUMNS = ["K", "rho_dB", "gcq_rate", "mc_rate", "mc_stderr", "asymptotic_rate", "rel_gap"]
OPTIMIZE_COLUMNS = ["record", "iteration", "S_n", "residual", "P_n",
                    "P_star", "S_star", "converged", "C1", "C2", "C3", "C4"]


def fmt(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def _row(values):
    return ",".join(fmt(v) for v in values)


def header(command, sc):
    lines = [
        f"{scenario_mod.HEADER_MAGIC} {__version__}",
        f"# command: {command}",
        f"# backend: {BACKEND}",
        f"# scenario_sha256: {sc.digest()}",
        f"# seed: {sc.system.seed}",
        scenario_mod.CONFIG_BEGIN,
    ]
    lines += [scenario_mod.CONFIG_PREFIX + line for line in sc.to_yaml().splitlines()]
    lines.append(scenario_mod.CONFIG_END)
    return lines


def simulate_rows(sc):
    K = sc.system.K
    cols = ["realization_index", "seed"] + [f"R_{k + 1}" for k in range(K)] + ["sum_rate"]
    rows = [cols]
    totals = []
    per_user = []
    for i in range(sc.run.trials):
        real = sample_realization(sc.system, make_rng(sc.system.seed, i))
        rep = sum_rate(real, sc.system.rho, sc.allocation, sc.system.effective_gain)
        totals.append(rep.sum)
        per_user.append(rep.per_user)
        rows.append([i, sc.system.seed, *rep.per_user, rep.sum])
    totals = np.array(totals)
    per_user = np.array(per_user)
    n = len(totals)
    if n > 1:
        se_user = per_user.std(axis=0, ddof=1) / math.sqrt(n)
        se_sum = totals.std(ddof=1) / math.sqrt(n)
    else:
        se_user = np.full(K, float("nan"))
        se_sum = float("nan")
    rows.append(["mean", None, *per_user.mean(axis=0), totals.mean()])
    rows.append(["stderr", None, *se_user, se_sum])
    return rows


def ergodic_point(sc, key=()):
    gcq = ergodic_sum_rate_gcq(sc.system, sc.allocation, nodes=sc.run.gcq_nodes)
    mc = ergodic_sum_rate_mc(sc.system, sc.allocation, sc.run.trials, key=key,
                             partitions=sc.run.partitions, ordered=sc.run.ordered,
                             workers=sc.run.workers)
    try:
        asym = asymptotic_rate(sc.system.rho, sc.system.K)
    except DomainError:
        asym = None
    return [sc.system.K, sc.rho_dB, gcq, mc.mean, mc.stderr, asym, (gcq - mc.mean) / mc.mean]


def _points(sc, axes=None):
    sweep = sc.run.sweep
    if sweep is None or (axes is not None and sweep["axis"] not in axes):
        return [(None, sc)]
    return [(i, sc.at(sweep["axis"], v)) for i, v in enumerate(sweep["values"])]


def _map_points(func, points, workers):
    # results come back in point order whatever the completion order
    if workers > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda p: func(*p), points))
    return [func(*p) for p in points]


def ergodic_rows(sc):
    points = _points(sc, axes=("K", "rho"))

    def one(i, point):
        return ergodic_point(point, key=() if i is None else (i,))

    return [ERGODIC_COLUMNS] + _map_points(one, points, sc.run.workers)


def optimize_block(sc):
    sol = maximize_ee(sc.power, sc.budget, sc.system.K, tol=sc.run.tolerance,
                      max_iter=sc.run.max_iter, inner=sc.run.inner)
    rows = [["trace", n, S, F, P] + [None] * 7 for n, (S, F, P) in enumerate(sol.trace)]
    flags = check_constraints(sol.P_star, sc.power, sc.budget, sc.system.K)
    rows.append(["summary", sol.iterations, None, sol.residual, None, sol.P_star, sol.S_star,
                 sol.converged, flags.C1, flags.C2, flags.C3, flags.C4])
    return rows


def optimize_rows(sc):
    return [OPTIMIZE_COLUMNS] + optimize_block(sc)


def sweep_rows(sc):
    sweep = sc.run.sweep
    if sweep is None:
        raise scenario_mod.ConfigError("scenario declares no sweep", field="run.sweep")
    axis, mode = sweep["axis"], sweep["mode"]
    points = _points(sc)

    def one(i, point):
        value = sweep["values"][i]
        if mode == "ergodic":
            block = [ergodic_point(point, key=(i,))]
        else:
            block = optimize_block(point)
        return [[axis, value, *row] for row in block]

    cols = ["sweep_axis", "sweep_value"] + (ERGODIC_COLUMNS if mode == "ergodic" else OPTIMIZE_COLUMNS)
    rows = [cols]
    for block in _map_points(one, points, sc.run.workers):
        rows.extend(block)
    return rows


COMMANDS = {
    "simulate": simulate_rows,
    "ergodic": ergodic_rows,
    "optimize": optimize_rows,
    "sweep": sweep_rows,
}


def render(command, sc):
    out = io.StringIO()
    rows = COMMANDS[command](sc)
    for line in header(command, sc):
        out.write(line + "\n")
    for row in rows:
        out.write(_row(row) + "\n")
    return out.getvalue()


def build_parser():
    p = argparse.ArgumentParser(
        prog="noma-ee",
        description="NOMA rates, ergodic capacity and energy-efficiency optimization.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("scenario", help="scenario YAML, or a CSV previously written by noma-ee")
    p.add_argument("--out", help="output CSV path (default: stdout)")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--gcq-nodes", type=int, dest="gcq_nodes")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        sc = scenario_mod.load(args.scenario)
        sc = sc.with_overrides(seed=args.seed, trials=args.trials, gcq_nodes=args.gcq_nodes)
        if sc.run.trials < 1 or sc.run.gcq_nodes < 1 or sc.run.partitions < 1:
            raise scenario_mod.ConfigError("trials, gcq_nodes and partitions must be >= 1",
                                           field="run")
        text = render(args.command, sc)
    except NomaError as exc:
        print(f"noma-ee: error: {exc}", file=sys.stderr)
        return exc.exit_code
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
