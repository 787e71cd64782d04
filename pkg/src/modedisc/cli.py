"""Command-line front end: single bounds, sweeps and cross-checks.

    modedisc bound --scenario channel --task prob --family two-mode --k 0.5 --nbar 1
    modedisc sweep --family phase --n-outcomes 3 --axis nbar --start 1e-3 --stop 10 --steps 20 --log
    modedisc validate
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from .fock import DEFAULT_NMAX, EnergyConstraint
from .gram import channel_bound
from .losses import LossChannel, heuristic_channel_lossy, source_lossy_bound
from .modes import (FamilyError, ModeFamily, load_family, make_comp_ft_family, make_dps_family,
                    make_phase_family, make_two_mode)
from .results import CHANNEL, SOURCE, TASKS, BoundResult
from .source import fock_table, lp_bound

JOBS_ENV = "MODEDISC_JOBS"
FAMILIES = ("two-mode", "phase", "comp-ft", "dps", "custom")
AXES = ("nbar", "mu", "k-polar", "t2")

_COMPLEX = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?([+-](\d+\.?\d*|\.\d+)?([eE][+-]?\d+)?[ij])?$"
                      r"|^[+-]?((\d+\.?\d*|\.\d+)([eE][+-]?\d+)?)?[ij]$")


def parse_complex(text: str) -> complex:
    """``0.5``, ``0.3+0.4i``, ``0.3-0.4i``, ``-i`` or ``2i``."""
    s = text.strip().replace(" ", "")
    if not _COMPLEX.match(s):
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r} (use a+bi)")
    return complex(s.replace("i", "j"))


def _jobs_default() -> int:
    try:
        return max(1, int(os.environ.get(JOBS_ENV, "1")))
    except ValueError:
        return 1


def build_family(args) -> ModeFamily:
    name = args.family
    if name == "two-mode":
        fam = make_two_mode(args.k if args.k is not None else 0.5)
    elif name == "phase":
        fam = make_phase_family(args.n_outcomes)
    elif name == "comp-ft":
        fam = make_comp_ft_family(args.d)
    elif name == "dps":
        fam = make_dps_family(args.ell)
    else:
        if not args.kfile:
            raise FamilyError("--family custom needs --kfile")
        fam = load_family(args.kfile)
    if args.priors:
        with open(args.priors) as fh:
            try:
                pri = json.load(fh)
            except json.JSONDecodeError as exc:
                raise FamilyError(f"cannot parse {args.priors}: {exc}") from None
        fam = replace(fam, priors=np.asarray(pri, dtype=float))
    return fam


def _family_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", choices=(CHANNEL, SOURCE), default=CHANNEL)
    p.add_argument("--task", choices=TASKS, default="prob")
    p.add_argument("--family", choices=FAMILIES, default="two-mode")
    p.add_argument("--k", type=parse_complex, help="two-mode commutation constant, a+bi")
    p.add_argument("--n-outcomes", type=int, default=2, help="phase family size")
    p.add_argument("--d", type=int, default=2, help="comp/FT dimension")
    p.add_argument("--ell", type=int, default=1, help="DPS pulse count minus one")
    p.add_argument("--kfile", help="JSON family file for --family custom")
    p.add_argument("--priors", help="JSON list of prior probabilities")
    p.add_argument("--nmax", type=int, default=DEFAULT_NMAX)
    p.add_argument("--t2", type=float, default=1.0, help="transmittivity (loss)")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--jobs", type=int, default=_jobs_default(),
                   help=f"worker processes (default from ${JOBS_ENV}, else 1)")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modedisc", description="Bounds on discriminating optical modes.")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bound", help="one bound")
    _family_args(b)
    b.add_argument("--nbar", type=float, required=True)
    b.add_argument("--format", choices=("json", "csv", "table"), default="json")

    s = sub.add_parser("sweep", help="CSV over a parameter grid")
    _family_args(s)
    s.add_argument("--axis", choices=AXES, default="nbar")
    s.add_argument("--nbar", type=float, default=1.0, help="fixed nbar for k-polar and t2 sweeps")
    s.add_argument("--start", type=float, default=0.1)
    s.add_argument("--stop", type=float, default=2.0)
    s.add_argument("--steps", type=int, default=10)
    s.add_argument("--log", action="store_true", help="logarithmic spacing")
    s.add_argument("--radii", type=int, default=5, help="k-polar: radii in (0, 1]")
    s.add_argument("--angles", type=int, default=8, help="k-polar: angles in [0, 2pi)")
    s.add_argument("--no-timing", action="store_true", help="leave wall_ms empty (byte-stable output)")
    s.add_argument("--output", "-o", help="write CSV here instead of stdout")

    v = sub.add_parser("validate", help="run the oracle cross-checks")
    v.add_argument("--seed", type=int, default=0)
    return parser


# single points ------------------------------------------------------------------

def evaluate(fam: ModeFamily, scenario: str, task: str, nbar: float, n_max: int, t2: float,
             tol: float, table=None, jobs: int = 1) -> BoundResult:
    ec = EnergyConstraint(nbar, n_max)
    if t2 < 1.0:
        ch = LossChannel(t2)
        if scenario == SOURCE:
            return source_lossy_bound(fam, ec, ch, task, table=table, jobs=jobs, tol=tol)
        return _heuristic(fam, task, nbar, ch)
    if scenario == CHANNEL:
        res = channel_bound(fam, ec, task, tol)
    else:
        if table is None:
            table = fock_table(fam, n_max, task, jobs=jobs, tol=tol)
        res = lp_bound(table, ec, tol, fam.name)
    res.family = fam.name
    return res


def _heuristic(fam: ModeFamily, task: str, nbar: float, ch: LossChannel) -> BoundResult:
    if fam.n_modes != 2 or task != "prob":
        raise ValueError("lossy channel estimates exist only for two modes and the prob task")
    h = heuristic_channel_lossy(complex(fam.k[0, 1]), nbar, ch, n_trunc=max(5, math.ceil(nbar) + 2))
    return BoundResult("channel-lossy", task, h.bound, "optimal" if h.converged else "not-converged",
                       nbar=nbar, n_max=h.n_trunc, weights=h.weights, primal=h.bound,
                       family=fam.name, details={"heuristic": True, "t2": ch.t2})


def _emit(res: BoundResult, fmt: str, out=None) -> None:
    out = out or sys.stdout
    d = res.to_dict()
    if fmt == "json":
        json.dump(d, out, indent=1)
        out.write("\n")
    elif fmt == "csv":
        keys = [k for k in d if k != "weights"]
        w = csv.writer(out, lineterminator="\n")
        w.writerow(keys)
        w.writerow([_fmt(d[k]) for k in keys])
    else:
        width = max(len(k) for k in d)
        for key, val in d.items():
            if key == "weights":
                val = " ".join(f"{x:.6g}" for x in val)
            out.write(f"{key:<{width}}  {_fmt(val)}\n")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def cmd_bound(args) -> int:
    fam = build_family(args)
    res = evaluate(fam, args.scenario, args.task, args.nbar, args.nmax, args.t2, args.tol, jobs=args.jobs)
    _emit(res, args.format)
    return 0 if res.ok else 1


# sweeps ---------------------------------------------------------------------------

def _grid(args) -> np.ndarray:
    if args.steps < 1:
        raise ValueError("--steps must be positive")
    if args.log:
        if args.start <= 0:
            raise ValueError("--log needs a positive --start")
        return np.geomspace(args.start, args.stop, args.steps)
    return np.linspace(args.start, args.stop, args.steps)


def sweep_points(args) -> tuple[list[str], list[dict]]:
    """Parameter columns and one dict of point settings per row, in output order."""
    if args.axis == "nbar":
        return ["nbar"], [{"nbar": float(x)} for x in _grid(args)]
    if args.axis == "mu":
        if args.family != "dps":
            raise ValueError("--axis mu applies to the dps family")
        return ["ell", "mu", "nbar"], [{"ell": args.ell, "mu": float(x), "nbar": float(x) * (args.ell + 1)}
                                       for x in _grid(args)]
    if args.axis == "t2":
        return ["t2", "nbar"], [{"t2": float(x), "nbar": args.nbar} for x in _grid(args)]
    if args.family != "two-mode":
        raise ValueError("--axis k-polar applies to the two-mode family")
    rows = []
    for r in np.linspace(0, 1, args.radii + 1)[1:]:
        for a in np.arange(args.angles) * 2 * math.pi / args.angles:
            rows.append({"k_abs": float(r), "k_arg": float(a), "nbar": args.nbar})
    return ["k_abs", "k_arg", "nbar"], rows


def _point(job) -> BoundResult:
    fam, scenario, task, pt, n_max, t2, tol, table = job
    if "k_abs" in pt:
        k = pt["k_abs"] * complex(math.cos(pt["k_arg"]), math.sin(pt["k_arg"]))
        # exact signs on the axes keep the family real where it should be
        k = complex(round(k.real, 15), round(k.imag, 15))
        fam = make_two_mode(k)
    return evaluate(fam, scenario, task, pt["nbar"], n_max, pt.get("t2", t2), tol, table=table)


def cmd_sweep(args) -> int:
    fam = build_family(args)
    cols, points = sweep_points(args)
    table = None
    if args.scenario == SOURCE and args.axis != "k-polar":
        table = fock_table(fam, args.nmax, args.task, jobs=args.jobs, tol=args.tol)
    jobs = [(fam, args.scenario, args.task, pt, args.nmax, args.t2, args.tol, table) for pt in points]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_point, jobs))
    else:
        results = [_point(j) for j in jobs]

    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["family", "scenario", "task", *cols, "bound", "status", "n_max", "tol", "wall_ms"])
        for pt, res in zip(points, results):
            wall = "" if args.no_timing else f"{res.wall_ms:.1f}"
            w.writerow([fam.name if "k_abs" not in pt else "two-mode", res.scenario, res.task,
                        *[_fmt(pt[c]) for c in cols], _fmt(res.bound), res.status, _fmt(res.n_max),
                        _fmt(res.tol), wall])
    finally:
        if args.output:
            out.close()
    return 0 if all(r.ok for r in results) else 1


# validation ----------------------------------------------------------------------

def _suite_channel() -> float:
    from .analytic import chi_two_mode, helstrom, idp
    worst = 0.0
    for k in (0.0, 0.5, 0.9):
        for nbar in (0.3, 1.0, 1.7):
            chi = chi_two_mode(k, nbar)
            ec = EnergyConstraint(nbar, 50)
            worst = max(worst, abs(channel_bound(make_two_mode(k), ec, "prob").bound - helstrom(chi)),
                        abs(channel_bound(make_two_mode(k), ec, "ud").bound - idp(chi)))
    return worst


def _suite_lp(rng) -> float:
    from .source import FockBoundTable, dual_geometric_solve, exact_lp_bound
    worst = 0.0
    for _ in range(20):
        n_max = int(rng.integers(3, 15))
        table = FockBoundTable(rng.uniform(0, 1, n_max + 1))
        nbar = float(rng.uniform(0.01, n_max - 0.01))
        worst = max(worst, abs(exact_lp_bound(table, nbar).bound - dual_geometric_solve(table, nbar).value))
    return worst


def _suite_loss(rng) -> float:
    from .fock import PhotonDistribution
    from .losses import loss_invert, loss_transform
    worst = 0.0
    for _ in range(20):
        w = rng.dirichlet(np.ones(int(rng.integers(2, 21))))
        ch = LossChannel(float(rng.uniform(0.3, 1.0)))
        p = PhotonDistribution(w)
        back = loss_invert(loss_transform(p, ch), ch).weights
        worst = max(worst, float(np.max(np.abs(back - w))))
    return worst


def _suite_pair() -> float:
    from .analytic import phase_orthogonal_pair
    return max(abs(phase_orthogonal_pair(x).mode_overlap()) for x in (0.5, 1.0, 1.25, 2.0, 3.7))


def cmd_validate(args) -> int:
    rng = np.random.default_rng(args.seed)
    suites = [
        ("two-mode channel SDP vs closed form", _suite_channel, 1e-4),
        ("source LP vs geometric dual", lambda: _suite_lp(rng), 1e-7),
        ("loss transform round trip", lambda: _suite_loss(rng), 1e-8),
        ("orthogonal phase probes", _suite_pair, 1e-12),
    ]
    failed = 0
    for name, fn, tol in suites:
        err = fn()
        ok = err <= tol
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'}  {name}: max error {err:.3g} (tol {tol:g})")
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    handler = {"bound": cmd_bound, "sweep": cmd_sweep, "validate": cmd_validate}[args.command]
    try:
        return handler(args)
    except (FamilyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
