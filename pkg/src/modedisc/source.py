"""Source discrimination: Fock-diagonal states, solved in two stages.

Stage one bounds the discrimination of ``|n_1>, ..., |n_N>`` for every
photon number ``n`` (a Gram SDP per ``n``). Stage two distributes the energy
budget over photon numbers with a linear program. The LP is solved twice,
by HiGHS and by a direct construction of its dual optimum, so the two can be
checked against each other.
"""
from __future__ import annotations

import csv
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .conic import FEAS_TOL, LinearProgram, solve_lp
from .fock import EnergyConstraint, PhotonDistribution
from .gram import build_fock, solve
from .modes import ModeFamily
from .results import PROB, SOURCE, UD, BoundResult, check_task

log = logging.getLogger(__name__)

TIE_TOL = 1e-12


@dataclass(frozen=True)
class FockBoundTable:
    """Per-photon-number bounds ``a_0 .. a_nmax`` for one family and task."""

    a: np.ndarray
    task: str = PROB
    fingerprint: str = ""

    def __post_init__(self):
        a = np.array(self.a, dtype=float).ravel()
        if a.size < 1:
            raise ValueError("empty table")
        if np.any(a < -1e-9) or np.any(a > 1 + 1e-9):
            raise ValueError("table entries must lie in [0, 1]")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @property
    def n_max(self) -> int:
        return self.a.size - 1

    def truncated(self, n_max: int) -> "FockBoundTable":
        if n_max > self.n_max:
            raise ValueError(f"table stops at n={self.n_max}, need {n_max}")
        return FockBoundTable(self.a[: n_max + 1], self.task, self.fingerprint)


@dataclass
class DualLpSolution:
    """Optimum of ``min x + nbar*y`` s.t. ``x + n*y >= a_n`` for every ``n``.

    ``(x, y)`` is the intercept and slope of the supporting line of the
    points ``(n, a_n)``; ``weights`` is a matching primal optimizer.
    """

    x: float
    y: float
    value: float
    active: tuple[int, ...]
    weights: np.ndarray
    degenerate: bool = False
    hull: tuple[int, ...] = field(default=(), repr=False)


# ---------------------------------------------------------------------------
# stage one


def _fock_entry(args):
    family, n, task, tol = args
    return solve(build_fock(family, n, task), tol)


def _default_jobs() -> int:
    return max(1, int(os.environ.get("MODEDISC_JOBS", "1")))


def fock_table(family: ModeFamily, n_max: int, task: str = PROB, *, jobs: int | None = None,
               cache_dir=None, tol: float = FEAS_TOL) -> FockBoundTable:
    """Solve the per-``n`` SDPs for ``n = 1..n_max``; ``a_0`` is filled in directly.

    Photon numbers whose overlap matrices ``k**n`` coincide (to 12 digits)
    share one solve, which makes phase families cheap.
    """
    check_task(task)
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    if cache_dir is not None:
        path = cache_path(cache_dir, family, task)
        if path.exists():
            cached = load_table(path, task, family.fingerprint())
            if cached.n_max >= n_max:
                return cached.truncated(n_max)

    a = np.empty(n_max + 1)
    a[0] = float(np.max(family.priors)) if task == PROB else 0.0

    first, rep = {}, {}
    for n in range(1, n_max + 1):
        kn = family.k ** n
        key = np.round(np.concatenate([kn.real.ravel(), kn.imag.ravel()]), 12).tobytes()
        rep[n] = first.setdefault(key, n)
    todo = sorted(set(rep.values()))

    jobs = jobs or _default_jobs()
    work = [(family, n, task, tol) for n in todo]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_fock_entry, work))
    else:
        results = [_fock_entry(w) for w in work]
    solved = {}
    for n, res in zip(todo, results):
        if not res.ok:
            raise RuntimeError(f"Fock SDP failed at n={n}: {res.status}")
        solved[n] = res.bound
    for n in range(1, n_max + 1):
        a[n] = solved[rep[n]]
    table = FockBoundTable(np.clip(a, 0.0, 1.0), task, family.fingerprint())
    if cache_dir is not None:
        save_table(table, cache_path(cache_dir, family, task))
    return table


def cache_path(cache_dir, family: ModeFamily, task: str) -> Path:
    return Path(cache_dir) / f"{family.fingerprint()}_{task}.csv"


def save_table(table: FockBoundTable, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "a_n"])
        for n, v in enumerate(table.a):
            w.writerow([n, repr(float(v))])


def load_table(path, task: str = PROB, fingerprint: str = "") -> FockBoundTable:
    with Path(path).open() as fh:
        rows = list(csv.DictReader(fh))
    ns = [int(r["n"]) for r in rows]
    if ns != list(range(len(ns))):
        raise ValueError(f"{path}: photon numbers must run 0, 1, 2, ...")
    return FockBoundTable(np.array([float(r["a_n"]) for r in rows]), task, fingerprint)


# ---------------------------------------------------------------------------
# stage two


def floor_ceil_state(nbar: float) -> PhotonDistribution:
    """Mixture of ``|floor(nbar)>`` and ``|floor(nbar) + 1>`` with mean ``nbar``."""
    if nbar < 0:
        raise ValueError("nbar must be nonnegative")
    lo = math.floor(nbar)
    w = np.zeros(lo + 2)
    w[lo] = 1 + lo - nbar
    w[lo + 1] = nbar - lo
    if w[-1] == 0:
        w = w[:-1]
    return PhotonDistribution(w, float(nbar))


def second_differences(table: FockBoundTable) -> np.ndarray:
    """``a_{n-1} - 2 a_n + a_{n+1}`` for ``n = 1 .. n_max - 1`` (index ``n - 1``)."""
    a = table.a
    return a[:-2] - 2 * a[1:-1] + a[2:]


def condition_check(table: FockBoundTable) -> np.ndarray:
    """Boolean array indexed by ``n``; entry ``n`` is True iff ``a_{n-1} - 2a_n + a_{n+1} < 0``.

    Entries ``0`` and ``n_max`` carry no condition and are reported True.
    Ties within ``TIE_TOL`` count as False; see :func:`degenerate_points`.
    """
    if table.a.size < 3:
        raise ValueError("need at least three table entries")
    out = np.ones(table.a.size, dtype=bool)
    out[1:-1] = second_differences(table) < -TIE_TOL
    return out


def degenerate_points(table: FockBoundTable) -> list[int]:
    sd = second_differences(table)
    return [n + 1 for n in np.flatnonzero(np.abs(sd) <= TIE_TOL)]


def _upper_hull(a: np.ndarray) -> tuple[list[int], bool]:
    hull, degenerate = [], False
    for n in range(a.size):
        while len(hull) >= 2:
            i, j = hull[-2], hull[-1]
            # cross < 0: j strictly above the chord i -> n
            cross = (j - i) * (a[n] - a[i]) - (a[j] - a[i]) * (n - i)
            if cross < -TIE_TOL:
                break
            if abs(cross) <= TIE_TOL:
                degenerate = True
            hull.pop()
        hull.append(n)
    return hull, degenerate


def dual_geometric_solve(table: FockBoundTable, nbar: float) -> DualLpSolution:
    """Exact optimum of ``max sum p_n a_n`` s.t. ``sum p_n = 1``, ``sum n p_n = nbar``, ``n <= n_max``.

    The dual feasible region is bounded below by the lines
    ``L_n: x + n*y = a_n``; a line contributes an edge of that boundary iff
    ``(n, a_n)`` is a vertex of the upper concave hull of the table, and two
    consecutive contributing lines meet at the dual point given by the hull
    edge between them. Walking the hull therefore walks the boundary, and
    the optimum is the boundary vertex where the slope passes ``-1/nbar``
    (or a whole edge of ``L_nbar`` when ``nbar`` is a hull vertex).
    """
    a = table.a
    if nbar < 0 or nbar > table.n_max:
        raise ValueError(f"nbar={nbar} outside [0, {table.n_max}]")
    hull, degenerate = _upper_hull(a)
    weights = np.zeros(a.size)

    if nbar in hull:
        u = int(nbar)
        pos = hull.index(u)
        # any supporting line through (u, a_u) works; keep the edge to the left
        if pos > 0:
            v = hull[pos - 1]
        elif len(hull) > 1:
            v = hull[pos + 1]
        else:
            v = u
        y = 0.0 if v == u else (a[u] - a[v]) / (u - v)
        x = a[u] - y * u
        weights[u] = 1.0
    else:
        pos = next(i for i in range(len(hull) - 1) if hull[i] < nbar < hull[i + 1])
        u, v = hull[pos], hull[pos + 1]
        y = (a[v] - a[u]) / (v - u)
        x = a[u] - y * u
        weights[u] = (v - nbar) / (v - u)
        weights[v] = (nbar - u) / (v - u)
    value = x + nbar * y
    slack = x + np.arange(a.size) * y - a
    active = tuple(int(n) for n in np.flatnonzero(np.abs(slack) <= 1e-10))
    return DualLpSolution(float(x), float(y), float(value), active, weights, degenerate, tuple(hull))


def _lp_vars(n_max):
    return tuple(f"p{n}" for n in range(n_max + 1))


def exact_lp(table: FockBoundTable, nbar: float) -> LinearProgram:
    """The LP with ``sum p_n = 1`` and ``sum n p_n = nbar`` over ``n <= n_max``."""
    names = _lp_vars(table.n_max)
    return LinearProgram(
        names,
        {p: float(v) for p, v in zip(names, table.a)},
        eq_rows=[({p: 1.0 for p in names}, 1.0),
                 ({p: float(n) for n, p in enumerate(names)}, float(nbar))],
    )


def relaxed_lp(table: FockBoundTable, ec: EnergyConstraint) -> LinearProgram:
    """Cutoff relaxation: the unassigned mass carries ``n_max + 1`` photons and a perfect score."""
    t = table.truncated(ec.n_max)
    names = _lp_vars(ec.n_max)
    top = ec.n_max + 1
    return LinearProgram(
        names,
        {p: float(v) - 1.0 for p, v in zip(names, t.a)},
        le_rows=[({p: 1.0 for p in names}, 1.0),
                 ({p: float(n - top) for n, p in enumerate(names)}, float(ec.nbar - top))],
        offset=1.0,
    )


def _lp_result(rep, names, nbar, n_max, tol, t0, **details) -> BoundResult:
    weights = np.array([rep.scalars[p] for p in names]) if rep.ok else None
    return BoundResult(
        scenario=SOURCE,
        task=details.pop("task"),
        bound=rep.safe_objective if rep.ok else float("nan"),
        status=rep.status,
        nbar=nbar,
        n_max=n_max,
        tol=tol,
        weights=weights,
        primal=rep.objective if rep.ok else None,
        dual=rep.dual_objective,
        family=details.pop("family", ""),
        wall_ms=1e3 * (time.perf_counter() - t0),
        details=details,
    )


def lp_bound(table: FockBoundTable, ec: EnergyConstraint, tol: float = FEAS_TOL,
             family: str = "") -> BoundResult:
    """Upper bound from the cutoff-relaxed LP, solved by HiGHS."""
    t0 = time.perf_counter()
    prog = relaxed_lp(table, ec)
    rep = solve_lp(prog, tol)
    res = _lp_result(rep, prog.variables, ec.nbar, ec.n_max, tol, t0, task=table.task,
                     family=family)
    if res.weights is not None:
        res.details["tail_mass"] = float(max(0.0, 1.0 - res.weights.sum()))
    return res


def exact_lp_bound(table: FockBoundTable, nbar: float, tol: float = FEAS_TOL) -> BoundResult:
    t0 = time.perf_counter()
    prog = exact_lp(table, nbar)
    rep = solve_lp(prog, tol)
    return _lp_result(rep, prog.variables, nbar, table.n_max, tol, t0, task=table.task)


def source_bound(family: ModeFamily, ec: EnergyConstraint, task: str = PROB, *,
                 table: FockBoundTable | None = None, jobs: int | None = None,
                 cache_dir=None, tol: float = FEAS_TOL) -> BoundResult:
    """Both stages for one family and energy budget."""
    t0 = time.perf_counter()
    if table is None:
        table = fock_table(family, ec.n_max, task, jobs=jobs, cache_dir=cache_dir, tol=tol)
    res = lp_bound(table, ec, tol, family.name)
    res.wall_ms = 1e3 * (time.perf_counter() - t0)
    return res

