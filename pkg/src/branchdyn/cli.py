"""Command-line driver.

    branchdyn <mode> --robot FILE [--amplitude A] [--frequency F] [--duration T]
              [--rate R] [--out DIR] [--gravity gx,gy,gz] [--sensors CSV]

Modes: dmc, monolithic, compare, control, graph.
Exit codes: 0 ok, 2 missing input file or bad arguments, 3 invalid robot
description, 4 the mode cannot run on this robot.
"""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys

import numpy as np

from . import composition, control, metrics, oracle
from .errors import BranchDynError, ParseError, ValidationError
from .robot import robot_from_dict, tomllib

log = logging.getLogger("branchdyn")

EXIT_MISSING = 2
EXIT_INVALID = 3
EXIT_UNSUPPORTED = 4


def _fmt(v):
    return format(float(v), ".17g")


def write_table(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([x if isinstance(x, str) else _fmt(x) for x in r])


def joint_labels(tree):
    out = []
    for i in tree.modeled_ids():
        for k in range(tree.subsystems[i].dof):
            out.append(f"s{i}_q{k + 1}")
    return out


def run_dmc(tree, t, Q, Qd, Qdd, sensors=None):
    out = np.zeros((len(t), len(joint_labels(tree))))
    for k in range(len(t)):
        src = sensors.at(t[k]) if sensors is not None else None
        res = composition.dmc(tree, tree.split(Q[k]), tree.split(Qd[k]), tree.split(Qdd[k]), src)
        out[k] = control.generalized_forces(tree, res.gammas)
    return out


def run_monolithic(tree, t, Q, Qd, Qdd):
    flat = oracle.flatten(tree)
    return np.array([oracle.monolithic_ne(flat, Q[k], Qd[k], Qdd[k]).generalized for k in range(len(t))])


def compare_metrics(a, b, labels):
    rows, r_all, c_all = [], [], []
    for j, name in enumerate(labels):
        r = metrics.rmse(a[:, j], b[:, j])
        try:
            c = metrics.cmc([a[:, j], b[:, j]])
        except BranchDynError:
            c = float("nan")
        rows.append([name, r, c])
        r_all.append(r)
        c_all.append(c)
    rs, cs = metrics.summarize(r_all), metrics.summarize(c_all)
    for stat in ("min", "max", "mean", "std"):
        rows.append([stat, rs[stat], cs[stat]])
    return rows


def build_parser():
    p = argparse.ArgumentParser(prog="branchdyn", description="Modular inverse dynamics of branched robots.")
    p.add_argument("mode", choices=["dmc", "monolithic", "compare", "control", "graph"])
    p.add_argument("--robot", required=True, help="robot description (TOML)")
    p.add_argument("--amplitude", type=float, default=0.01)
    p.add_argument("--frequency", type=float, default=1.0)
    p.add_argument("--duration", type=float, default=10.0)
    p.add_argument("--rate", type=float, default=100.0)
    p.add_argument("--out", default=".")
    p.add_argument("--gravity", default=None, help="gx,gy,gz")
    p.add_argument("--sensors", default=None, help="replay CSV for black-box boundaries")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def run(args) -> int:
    if not os.path.isfile(args.robot):
        log.error("robot file not found: %s", args.robot)
        return EXIT_MISSING
    if args.sensors and not os.path.isfile(args.sensors):
        log.error("sensor file not found: %s", args.sensors)
        return EXIT_MISSING
    try:
        with open(args.robot, "rb") as fh:
            doc = tomllib.load(fh)
        tree = robot_from_dict(doc)
        if args.gravity:
            g = tuple(float(v) for v in args.gravity.split(","))
            if len(g) != 3:
                raise ParseError("--gravity needs three comma-separated numbers")
            tree.gravity = g
    except (ParseError, ValidationError, tomllib.TOMLDecodeError, ValueError) as exc:
        log.error("invalid robot description: %s", exc)
        return EXIT_INVALID
    if args.duration <= 0 or args.rate <= 0:
        log.error("duration and rate must be positive")
        return EXIT_MISSING

    os.makedirs(args.out, exist_ok=True)
    try:
        if args.mode == "graph":
            with open(os.path.join(args.out, "topology.dot"), "w") as fh:
                fh.write(composition.export_graph_dot(tree))
            return 0
        if args.mode == "control":
            return _run_control(doc, tree, args)
        n = len(joint_labels(tree))
        t, Q, Qd, Qdd = metrics.gen_trajectory(n, args.amplitude, args.frequency, args.duration, args.rate)
        labels = joint_labels(tree)
        sensors = composition.ReplaySensor.from_csv(args.sensors) if args.sensors else None
        if args.mode == "monolithic":
            tau = run_monolithic(tree, t, Q, Qd, Qdd)
            write_table(os.path.join(args.out, "torques.csv"), ["time"] + labels, np.column_stack([t, tau]))
            return 0
        tau = run_dmc(tree, t, Q, Qd, Qdd, sensors)
        write_table(os.path.join(args.out, "torques.csv"), ["time"] + labels, np.column_stack([t, tau]))
        if args.mode == "compare":
            ref = run_monolithic(tree, t, Q, Qd, Qdd)
            write_table(os.path.join(args.out, "torques_monolithic.csv"), ["time"] + labels,
                        np.column_stack([t, ref]))
            write_table(os.path.join(args.out, "metrics.csv"), ["joint", "rmse", "cmc"],
                        compare_metrics(tau, ref, labels))
        return 0
    except (ParseError, ValidationError) as exc:
        log.error("%s", exc)
        return EXIT_INVALID
    except BranchDynError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_UNSUPPORTED


def _run_control(doc, tree, args) -> int:
    sc = control.parse_control(doc, tree)
    Q = {i: np.zeros(tree.subsystems[i].dof) for i in tree.modeled_ids()}
    x0, fp = control.initial_errors(tree, sc.targets, Q)
    xi0 = [control.ZERO] * len(x0)
    traj = control.integrate_error_dynamics(x0, xi0, sc.targets, sc.gains, sc.dt, sc.T, sc.realization)
    header = ["time"] + [f"leaf_{tg.leaf}" for tg in sc.targets] + ["total"]
    write_table(os.path.join(args.out, "errors.csv"), header,
                np.column_stack([traj.t, traj.per_leaf, traj.total]))
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
