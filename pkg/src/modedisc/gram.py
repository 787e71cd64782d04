"""Gram-matrix SDPs for discriminating states prepared in a family of modes.

The unknown is the Gram matrix of the vectors ``O |psi_j>`` where ``O`` runs
over the identity and the measurement operators (plus the inconclusive
element for unambiguous discrimination). Row ``(o, j)`` of ``G`` sits at
index ``o * N + j``; operator ``0`` is the identity.

Two flavours are built:

* channel programs, where the probe's photon-number weights ``p_n`` are
  variables and the identity block is tied to ``sum_n p_n k_ij**n`` up to the
  truncation slack;
* Fock programs, where every mode carries exactly ``n`` photons and the
  identity block is fixed to ``k_ij**n``.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .conic import FEAS_TOL, ConicProgram, solve_sdp
from .fock import EnergyConstraint
from .modes import ModeFamily
from .results import CHANNEL, PROB, UD, BoundResult, check_task

FOCK = "fock"


@dataclass
class GramProgram:
    """A built Gram program plus the bookkeeping needed to read it back.

    ``form="full"`` keeps one PSD matrix over all ``(operator, state)``
    vectors with the projectivity, orthogonality and completeness rows
    written out. ``form="reduced"`` uses the equivalent block structure
    those rows imply: one PSD block ``H_m`` per measurement operator with
    ``sum_m H_m`` equal to the state overlaps (for unambiguous tasks the
    conclusive blocks collapse to ``h_j e_j e_j^T``). The reduced form has
    the same optimum and, unlike the full form, strictly feasible points.
    """

    family: ModeFamily
    task: str
    scenario: str  # "channel" or "fock"
    program: ConicProgram
    form: str = "reduced"
    n_photons: int | None = None
    energy: EnergyConstraint | None = None

    @property
    def n_modes(self) -> int:
        return self.family.n_modes

    @property
    def operator_set_size(self) -> int:
        return self.n_modes + (2 if self.task == UD else 1)

    @property
    def gram_dim(self) -> int:
        return self.operator_set_size * self.n_modes

    def index(self, op: int, state: int) -> int:
        return op * self.n_modes + state

    def full_gram(self, matrices: dict, scalars: dict) -> np.ndarray:
        """Gram matrix of all ``O |psi_j>`` rebuilt from a solution."""
        if self.form == "full":
            return np.asarray(matrices["G"])
        n = self.n_modes
        g = np.zeros((self.gram_dim,) * 2, dtype=complex)
        for m, block in enumerate(_blocks(self, matrices, scalars), start=1):
            sel = np.zeros((n, self.gram_dim))
            sel[np.arange(n), np.arange(n)] = 1.0
            sel[np.arange(n), m * n + np.arange(n)] = 1.0
            g += sel.T @ block @ sel
        return g


def _blocks(g: GramProgram, matrices: dict, scalars: dict) -> list:
    n = g.n_modes
    if g.task == PROB:
        return [np.asarray(matrices[f"H{m}"]) for m in range(1, n + 1)]
    out = []
    for j in range(n):
        blk = np.zeros((n, n), dtype=complex)
        blk[j, j] = scalars[f"h{j}"]
        out.append(blk)
    out.append(np.asarray(matrices["H0"]))
    return out


def _entry(n: int, o: int, i: int, p: int, j: int):
    return ("G", o * n + i, p * n + j)


def _full(family: ModeFamily, task: str, prog: ConicProgram):
    """Single PSD Gram variable with every structural row written out."""
    n = family.n_modes
    n_ops = n + (2 if task == UD else 1)
    meas = range(1, n_ops)
    prog.add_matrix("G", n_ops * n, hermitian=not family.is_real)
    states = [(i, j) for i in range(n) for j in range(n)]

    for m in meas:
        for i, j in states:
            prog.add_eq({_entry(n, m, i, m, j): 1.0, _entry(n, 0, i, m, j): -1.0})
    for m in meas:
        for m2 in meas:
            if m2 <= m:
                continue
            for i, j in states:
                prog.add_eq({_entry(n, m, i, m2, j): 1.0})
    for o in range(n_ops):
        for i, j in states:
            row = {_entry(n, m, i, o, j): 1.0 for m in meas}
            key = _entry(n, 0, i, o, j)
            row[key] = row.get(key, 0.0) - 1.0
            prog.add_eq(row)

    pri = family.priors
    if task == PROB:
        prog.objective = {_entry(n, 0, j, j + 1, j): float(pri[j]) for j in range(n)}
    else:
        nul = n + 1
        prog.objective = {None: 1.0}
        prog.objective.update({_entry(n, 0, j, nul, j): -float(pri[j]) for j in range(n)})
        # zero error: <psi_j| M_i |psi_j> = 0 for conclusive i != j
        for j in range(n):
            for i in range(n):
                if i != j:
                    prog.add_eq({_entry(n, i + 1, j, i + 1, j): 1.0})

    def overlap(i, j):
        return {_entry(n, 0, i, 0, j): 1.0}

    return overlap


def _reduced(family: ModeFamily, task: str, prog: ConicProgram):
    n = family.n_modes
    herm = not family.is_real
    pri = family.priors
    if task == PROB:
        for m in range(1, n + 1):
            prog.add_matrix(f"H{m}", n, hermitian=herm)
        prog.objective = {(f"H{j + 1}", j, j): float(pri[j]) for j in range(n)}

        def overlap(i, j):
            return {(f"H{m}", i, j): 1.0 for m in range(1, n + 1)}
    else:
        for j in range(n):
            prog.add_scalar(f"h{j}", lo=0.0)
        prog.add_matrix("H0", n, hermitian=herm)
        prog.objective = {None: 1.0, **{("H0", j, j): -float(pri[j]) for j in range(n)}}

        def overlap(i, j):
            row = {("H0", i, j): 1.0}
            if i == j:
                row[f"h{j}"] = 1.0
            return row
    return overlap


def _start(family: ModeFamily, task: str, form: str):
    check_task(task)
    prog = ConicProgram(sense="max")
    if form == "full":
        overlap = _full(family, task, prog)
    elif form == "reduced":
        overlap = _reduced(family, task, prog)
    else:
        raise ValueError(f"unknown form {form!r}")
    for i in range(family.n_modes):
        prog.add_eq({**overlap(i, i), None: -1.0})
    return prog, overlap


def _powers(k: np.ndarray, n: int) -> np.ndarray:
    # 0**0 == 1: vacuum components always overlap
    return np.ones_like(k) if n == 0 else k ** n


def build_fock(family: ModeFamily, n: int, task: str = PROB, form: str = "reduced") -> GramProgram:
    """Program for states carrying exactly ``n`` photons in each mode."""
    if n < 0:
        raise ValueError("photon number must be nonnegative")
    prog, overlap = _start(family, task, form)
    kn = _powers(family.k, n)
    for i in range(family.n_modes):
        for j in range(i + 1, family.n_modes):
            prog.add_eq({**overlap(i, j), None: -complex(kn[i, j])})
    return GramProgram(family, task, FOCK, prog, form, n_photons=n)


def build_fock_prob(family: ModeFamily, n: int) -> GramProgram:
    return build_fock(family, n, PROB)


def build_fock_ud(family: ModeFamily, n: int) -> GramProgram:
    return build_fock(family, n, UD)


def build_channel(family: ModeFamily, ec: EnergyConstraint, task: str = PROB,
                  form: str = "reduced") -> GramProgram:
    """Program over pure probes ``sum_n c_n |n_j>`` with a relaxed mean-energy constraint."""
    prog, overlap = _start(family, task, form)
    size = family.n_modes
    nmax = ec.n_max
    pn = [prog.add_scalar(f"p{n}", lo=0.0) for n in range(nmax + 1)]
    prog.add_le({**{p: 1.0 for p in pn}, None: -1.0})
    prog.add_le({**{p: -float(nmax + 1 - n) for n, p in enumerate(pn)},
                 None: float(nmax + 1 - ec.nbar)})

    for i in range(size):
        for j in range(i + 1, size):
            kij = complex(family.k[i, j])
            # d = <psi_i|psi_j> - sum_n p_n k^n ;  eps = (1 - sum_n p_n) |k|^(nmax+1)
            diff = overlap(i, j)
            for n, p in enumerate(pn):
                c = kij ** n if n else 1.0
                if c != 0:
                    diff[p] = -c
            tail = abs(kij) ** (nmax + 1)
            if tail == 0.0:
                prog.add_eq(diff)
                continue
            eps = {None: tail, **{p: -tail for p in pn}}
            if family.is_real:
                diff = {key: complex(v).real for key, v in diff.items()}
                prog.add_le(_sub(diff, eps))
                prog.add_le(_sub(_neg(diff), eps))
            else:
                w = f"W{i}_{j}"
                prog.add_matrix(w, 2, hermitian=True)
                prog.add_eq(_sub({(w, 0, 0): 1.0}, eps))
                prog.add_eq(_sub({(w, 1, 1): 1.0}, eps))
                prog.add_eq(_sub({(w, 0, 1): 1.0}, diff))
    return GramProgram(family, task, CHANNEL, prog, form, energy=ec)


def build_channel_prob(family: ModeFamily, ec: EnergyConstraint) -> GramProgram:
    return build_channel(family, ec, PROB)


def build_channel_ud(family: ModeFamily, ec: EnergyConstraint) -> GramProgram:
    return build_channel(family, ec, UD)


def _neg(a: dict) -> dict:
    return {k: -v for k, v in a.items()}


def _sub(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0.0) - v
    return out


def solve(g: GramProgram, tol: float = FEAS_TOL) -> BoundResult:
    """Solve ``g`` and package the safe-side bound."""
    t0 = time.perf_counter()
    rep = solve_sdp(g.program, tol=tol)
    wall = 1e3 * (time.perf_counter() - t0)
    weights = None
    if rep.ok and g.energy is not None:
        weights = np.array([rep.scalars[f"p{n}"] for n in range(g.energy.n_max + 1)])
    details = {"gram": g.full_gram(rep.matrices, rep.scalars)} if rep.ok else {}
    if g.n_photons is not None:
        details["n_photons"] = g.n_photons
    return BoundResult(
        scenario=g.scenario,
        task=g.task,
        # a success probability never exceeds one
        bound=min(rep.safe_objective, 1.0) if rep.ok else float("nan"),
        status=rep.status,
        nbar=None if g.energy is None else g.energy.nbar,
        n_max=None if g.energy is None else g.energy.n_max,
        tol=tol,
        weights=weights,
        primal=rep.objective if rep.ok else None,
        dual=rep.dual_objective,
        family=g.family.name,
        wall_ms=wall,
        details=details,
    )


def channel_bound(family: ModeFamily, ec: EnergyConstraint, task: str = PROB,
                  tol: float = FEAS_TOL, form: str = "reduced") -> BoundResult:
    return solve(build_channel(family, ec, task, form), tol)


def fock_bound(family: ModeFamily, n: int, task: str = PROB, tol: float = FEAS_TOL,
               form: str = "reduced") -> BoundResult:
    return solve(build_fock(family, n, task, form), tol)
