"""Command-line entry point.

Exit codes: 0 success, 1 numerical failure or tolerance breach, 2 config error.
"""

import argparse
import csv
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, so3
from .config import load_config, schema_hash
from .conservation import convergence_order, default_flags, drift_report
from .errors import ConfigError, NumericalBlowup
from .simulation import Trajectory, run, write_csv

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2


def _prefix(cfg, config_path):
    return cfg.output_prefix or str(Path(config_path).with_suffix(""))


def cmd_simulate(args):
    cfg = load_config(args.config, args.set)
    cfg = cfg.with_(output_prefix=_prefix(cfg, args.config))
    t0 = time.perf_counter()
    traj = run(cfg, keep_fields=cfg.save_trajectory)
    last = traj.rows[-1]
    print(f"{cfg.n_steps} steps in {time.perf_counter() - t0:.2f} s; "
          f"wrote {cfg.output_prefix}_diagnostics.csv")
    print(f"t = {last.t:.6g}  energy = {last.energy:.12g}  gauss_residual = {last.gauss_residual:.3e}")
    return EXIT_OK


def cmd_check_conservation(args):
    cfg = load_config(args.config, args.set)
    cfg = cfg.with_(output_prefix=_prefix(cfg, args.config), snapshot_every=0, save_trajectory=False)
    flags = default_flags(cfg.external)
    reports, steps = [], []
    for level in range(args.refine + 1):
        c = cfg if level == 0 else cfg.with_(dt=cfg.dt / 2**level, stride=cfg.stride * 2**level,
                                              output_prefix=None)
        traj = run(c, keep_fields=False)
        reports.append(drift_report(traj.rows, flags))
        steps.append(c.dt)
    breach = False
    print(f"{'charge':<18}{'comp':>5}{'drift':>14}{'order':>9}  conserved")
    for i, entry in enumerate(reports[0]):
        comp = "" if entry["component"] is None else "xyz"[entry["component"]]
        drifts = [r[i]["drift"] for r in reports]
        order = ""
        if len(drifts) > 1 and all(d > 0 for d in drifts):
            order = f"{convergence_order(steps, drifts):.2f}"
        mark = "yes" if entry["conserved"] else "no"
        print(f"{entry['charge']:<18}{comp:>5}{entry['drift']:>14.3e}{order:>9}  {mark}")
        if entry["conserved"] and entry["drift"] >= args.tol:
            breach = True
    if breach:
        print(f"FAIL: a conserved charge drifted by {args.tol:g} or more", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_check_variational(args):
    from . import variational as V

    cfg = load_config(args.config, args.set)
    traj = Trajectory.load(args.trajectory, cfg)
    if len(traj.samples) < 7:
        raise ConfigError("trajectory needs at least 7 samples for the residual stencils")
    pots = V.trajectory_potentials(traj)
    t1, t2 = traj.times[0], traj.times[-1]
    classes = V.CLASSES if args.cls == "all" else (args.cls,)
    print(f"first variation, eps = {args.eps:g}, {args.eps / 2:g}, {args.eps / 4:g}")
    for kind in classes:
        pert = V.random_perturbation(kind, cfg.grid, t1, t2, seed=args.seed)
        fv = [V.first_variation(traj, pert, args.eps / 2**i, pots) for i in range(3)]
        inc = [V.action_increment(traj, pert, args.eps / 2**i, pots) for i in range(3)]
        print(f"  {kind:<12} dS = {fv[0]: .4e} {fv[1]: .4e} {fv[2]: .4e}  "
              f"ratios {fv[0] / fv[1]:.3f} {fv[1] / fv[2]:.3f}  "
              f"increment ratios {inc[0] / inc[1]:.3f} {inc[1] / inc[2]:.3f}")
    times, res = V.poincare_residual(traj, potentials=pots)
    _, ident = V.poincare_residual(traj, potentials=pots, method="analytic")
    _, balance = V.torque_balance(traj)
    el = V.euler_lagrange_residuals(traj, order=args.order)
    print(f"poincare residual max        {np.max(np.abs(res)):.3e}")
    print(f"identity |res - (I w' - T)|  {np.max(np.abs(ident - balance)):.3e}")
    print(f"gauss residual max           {el.max_gauss:.3e}")
    print(f"ampere residual max (rel)    {el.max_ampere:.3e}")
    print(f"force residual max           {el.max_force:.3e}")
    out = args.out or str(Path(args.trajectory).with_suffix("")) + "_residuals.csv"
    with open(out, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["t", "poincare_x", "poincare_y", "poincare_z"])
        for t, r in zip(times, res):
            wr.writerow([repr(float(t))] + [repr(float(x)) for x in r])
    print(f"wrote {out}")
    return EXIT_OK


def so3_selftest(n=200, seed=0):
    """Random-vector checks of the so(3) identities; returns a list of failures."""
    rng = np.random.default_rng(seed)
    c = so3.structure_constants()
    failures = []

    def check(name, err, scale, tol=1e-14):
        if err > tol * max(scale, 1.0):
            failures.append(f"{name}: error {err:.3e}")

    basis = np.eye(3)
    for i in range(3):
        for j in range(3):
            comm = so3.matrix_commutator(so3.hat(basis[i]), so3.hat(basis[j]))
            want = sum(c[k, i, j] * so3.hat(basis[k]) for k in range(3))
            check(f"structure constants ({i},{j})", np.max(np.abs(comm + want)), 1.0)
    for _ in range(n):
        a, b = rng.normal(size=3), rng.normal(size=3)
        check("vee(hat(a)) = a", np.max(np.abs(so3.vee(so3.hat(a)) - a)), np.max(np.abs(a)))
        ab = np.cross(a, b)
        check("hat(a) b = a x b", np.max(np.abs(so3.hat(a) @ b - ab)), np.max(np.abs(a)) * np.max(np.abs(b)))
        comm = so3.matrix_commutator(so3.hat(a), so3.hat(b))
        check("[hat a, hat b] = hat(a x b)", np.max(np.abs(comm - so3.hat(ab))),
              4 * np.max(np.abs(a)) * np.max(np.abs(b)))
        check("contraction = w x p", np.max(np.abs(so3.poincare_contraction(c, a, b) - ab)),
              np.max(np.abs(a)) * np.max(np.abs(b)))
    return failures


def cmd_so3_selftest(args):
    t0 = time.perf_counter()
    failures = so3_selftest(args.samples, args.seed)
    for f in failures:
        print(f"FAIL {f}", file=sys.stderr)
    print(f"so3 self-test: {len(failures)} failures in {time.perf_counter() - t0:.3f} s")
    return EXIT_NUMERIC if failures else EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="spinning-charge", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__} (config schema {schema_hash()})")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(p):
        p.add_argument("--config", required=True)
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config key; repeatable")
        return p

    p = with_config(sub.add_parser("simulate", help="integrate and write diagnostics"))
    p.set_defaults(func=cmd_simulate)

    p = with_config(sub.add_parser("check-conservation", help="drift of the conserved charges"))
    p.add_argument("--refine", type=int, default=0, help="extra dt halvings for the order fit")
    p.add_argument("--tol", type=float, default=1e-5)
    p.set_defaults(func=cmd_check_conservation)

    p = with_config(sub.add_parser("check-variational", help="stationarity and Poincare residuals"))
    p.add_argument("--trajectory", required=True)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--class", dest="cls", default="all", choices=("all",) + ("fields", "translation", "rotation"))
    p.add_argument("--order", type=int, default=6, choices=(2, 4, 6))
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_check_variational)

    p = sub.add_parser("so3-selftest", help="so(3) algebra identities")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_so3_selftest)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalBlowup, FloatingPointError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
