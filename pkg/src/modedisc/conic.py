"""Solver-independent linear and semidefinite programs.

Programs are described with plain dictionaries of coefficients and compiled
at solve time: semidefinite programs to a real conic problem solved by
Clarabel through cvxpy, linear programs to HiGHS through
:func:`scipy.optimize.linprog`.

Affine expressions are ``dict`` objects mapping a variable key to a (possibly
complex) coefficient. A key is either a scalar name (``str``) or a matrix
entry ``(matrix_name, i, j)``; the key ``None`` holds the constant term.
For a Hermitian matrix variable ``G`` the entry ``(name, i, j)`` with
``i > j`` is read as ``conj(G[j, i])``.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Hashable

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

log = logging.getLogger(__name__)

FEAS_TOL = 1e-8
GAP_TOL = 1e-7

OPTIMAL = "optimal"
NEAR_OPTIMAL = "near-optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
FAILED = "numerical-failure"
OK_STATUSES = (OPTIMAL, NEAR_OPTIMAL)

Affine = dict


class ProgramError(ValueError):
    pass


@dataclass
class SolveReport:
    """Outcome of one solve.

    ``objective`` is the primal value; ``dual_objective`` the value of the
    dual function at the returned multipliers, when available.
    """

    status: str
    objective: float = float("nan")
    dual_objective: float | None = None
    scalars: dict = field(default_factory=dict)
    matrices: dict = field(default_factory=dict)
    tol: float = FEAS_TOL
    sense: str = "max"

    @property
    def ok(self) -> bool:
        return self.status in OK_STATUSES

    @property
    def gap(self) -> float:
        if self.dual_objective is None:
            return float("nan")
        return abs(self.objective - self.dual_objective)

    @property
    def safe_objective(self) -> float:
        """Objective rounded toward the loose side of the sense.

        For maximization this is an upper bound that survives small primal
        infeasibilities: the dual value when it is larger, otherwise the
        primal value plus the requested tolerance.
        """
        if self.dual_objective is not None and np.isfinite(self.dual_objective):
            pick = max if self.sense == "max" else min
            return pick(self.objective, self.dual_objective)
        return self.objective + (self.tol if self.sense == "max" else -self.tol)


# ---------------------------------------------------------------------------
# Hermitian embedding


@dataclass(frozen=True)
class HermitianEmbedding:
    """Real ``2d x 2d`` symmetric image ``[[Re H, -Im H], [Im H, Re H]]`` of a Hermitian ``H``.

    ``H`` is PSD iff the image is PSD; the image has the spectrum of ``H``
    with every eigenvalue doubled.
    """

    d: int

    def real_pos(self, i: int, j: int) -> tuple[int, int]:
        return (i, j)

    def imag_pos(self, i: int, j: int) -> tuple[int, int]:
        return (self.d + i, j)

    def links(self) -> list[tuple[tuple[int, int], tuple[int, int], float]]:
        """Rows ``X[a] - s * X[b] = 0`` that force the block structure on a symmetric ``X``."""
        d = self.d
        rows = []
        for i in range(d):
            for j in range(i, d):
                rows.append(((i, j), (d + i, d + j), 1.0))
                rows.append(((d + i, j), (d + j, i), -1.0))
        return rows

    def embed(self, h: np.ndarray) -> np.ndarray:
        h = np.asarray(h, dtype=complex)
        return np.block([[h.real, -h.imag], [h.imag, h.real]])

    def extract(self, x: np.ndarray) -> np.ndarray:
        d = self.d
        a = 0.5 * (x[:d, :d] + x[d:, d:])
        b = 0.5 * (x[d:, :d] - x[:d, d:])
        return a + 1j * b


def hermitian_to_real_psd(d: int) -> HermitianEmbedding:
    if d < 1:
        raise ProgramError("dimension must be positive")
    return HermitianEmbedding(d)


# ---------------------------------------------------------------------------
# Program containers


@dataclass(frozen=True)
class MatrixVar:
    name: str
    dim: int
    hermitian: bool = False  # complex Hermitian; otherwise real symmetric


@dataclass
class ConicProgram:
    """Scalars plus PSD matrix variables, tied by affine rows.

    Every matrix variable is constrained PSD. Equality rows with complex
    coefficients impose both real and imaginary parts; inequality rows
    ``expr <= 0`` act on the real part.
    """

    sense: str = "max"
    scalars: dict = field(default_factory=dict)  # name -> (lo, hi)
    matrices: dict = field(default_factory=dict)  # name -> MatrixVar
    objective: Affine = field(default_factory=dict)
    eq: list = field(default_factory=list)
    le: list = field(default_factory=list)

    def add_scalar(self, name: str, lo: float | None = None, hi: float | None = None) -> str:
        if name in self.scalars:
            raise ProgramError(f"duplicate scalar {name!r}")
        self.scalars[name] = (lo, hi)
        return name

    def add_matrix(self, name: str, dim: int, hermitian: bool = False) -> MatrixVar:
        if name in self.matrices:
            raise ProgramError(f"duplicate matrix {name!r}")
        self.matrices[name] = MatrixVar(name, dim, hermitian)
        return self.matrices[name]

    def add_eq(self, expr: Affine) -> None:
        self.eq.append(self._checked(expr))

    def add_le(self, expr: Affine) -> None:
        self.le.append(self._checked(expr))

    def _checked(self, expr: Affine) -> Affine:
        for key, c in expr.items():
            if not np.isfinite(c):
                raise ProgramError(f"non-finite coefficient on {key!r}")
            if key is None:
                continue
            if isinstance(key, tuple):
                name, i, j = key
                m = self.matrices.get(name)
                if m is None or not (0 <= i < m.dim and 0 <= j < m.dim):
                    raise ProgramError(f"matrix entry {key!r} out of range")
            elif key not in self.scalars:
                raise ProgramError(f"undeclared scalar {key!r}")
        return dict(expr)


@dataclass
class LinearProgram:
    """``sense  c @ x + offset`` over named scalars.

    ``eq_rows`` are ``(coeffs, b)`` meaning ``coeffs @ x == b``; ``le_rows``
    mean ``coeffs @ x <= b``. ``bounds`` defaults to ``(0, None)``.
    """

    variables: tuple
    objective: dict
    sense: str = "max"
    eq_rows: list = field(default_factory=list)
    le_rows: list = field(default_factory=list)
    bounds: dict = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self):
        names = set(self.variables)
        for row, _ in [(self.objective, 0)] + list(self.eq_rows) + list(self.le_rows):
            unknown = set(row) - names
            if unknown:
                raise ProgramError(f"row references undeclared variables {sorted(unknown)[:3]}")
            if not all(np.isfinite(v) for v in row.values()):
                raise ProgramError("non-finite coefficient")


# ---------------------------------------------------------------------------
# SDP compilation


class _Layout:
    """Column indices of every real unknown in the stacked vector."""

    def __init__(self, prog: ConicProgram):
        self.scalar_col = {name: i for i, name in enumerate(prog.scalars)}
        self.offsets = {}
        self.real_dim = {}
        col = len(self.scalar_col)
        for m in prog.matrices.values():
            dim = 2 * m.dim if m.hermitian else m.dim
            self.offsets[m.name] = col
            self.real_dim[m.name] = dim
            col += dim * dim
        self.size = col
        self.prog = prog

    def flat(self, name: str, r: int, c: int) -> int:
        # column-major position inside vec(X)
        return self.offsets[name] + c * self.real_dim[name] + r

    def split(self, expr: Affine):
        """Real and imaginary parts of ``expr`` as ({col: coef}, const) pairs."""
        re, im = {}, {}
        const = complex(expr.get(None, 0.0))

        def put(target, col, v):
            if v:
                target[col] = target.get(col, 0.0) + v

        for key, c in expr.items():
            if key is None:
                continue
            c = complex(c)
            if not isinstance(key, tuple):
                col = self.scalar_col[key]
                put(re, col, c.real)
                put(im, col, c.imag)
                continue
            name, i, j = key
            m = self.prog.matrices[name]
            conj = i > j
            if conj:
                i, j = j, i
            if not m.hermitian:
                col = self.flat(name, i, j)
                put(re, col, c.real)
                put(im, col, c.imag)
                continue
            emb = HermitianEmbedding(m.dim)
            a = self.flat(name, *emb.real_pos(i, j))
            b = self.flat(name, *emb.imag_pos(i, j))
            sb = -1.0 if conj else 1.0  # conj(G_ij) = A_ij - i B_ij
            put(re, a, c.real)
            put(re, b, -c.imag * sb)
            put(im, b, c.real * sb)
            put(im, a, c.imag)
        return (re, const.real), (im, const.imag)


def _stack(rows, ncols):
    data, ri, ci, rhs = [], [], [], []
    for r, (coefs, const) in enumerate(rows):
        for col, v in coefs.items():
            ri.append(r)
            ci.append(col)
            data.append(v)
        rhs.append(-const)
    mat = sp.csr_matrix((data, (ri, ci)), shape=(len(rows), ncols))
    return mat, np.array(rhs, dtype=float)


def compile_sdp(prog: ConicProgram):
    """Flatten ``prog`` into ``(layout, c, c0, A, b, F, h)``.

    The real problem reads ``sense c @ w + c0`` s.t. ``A w = b``, ``F w <= h``
    and every matrix block of ``w`` PSD.
    """
    lay = _Layout(prog)
    eq_rows, le_rows = [], []
    for expr in prog.eq:
        (re, cr), (im, ci) = lay.split(expr)
        eq_rows.append((re, cr))
        if im or abs(ci) > 0:
            eq_rows.append((im, ci))
    for expr in prog.le:
        le_rows.append(lay.split(expr)[0])
    for name, (lo, hi) in prog.scalars.items():
        col = lay.scalar_col[name]
        if lo is not None:
            le_rows.append(({col: -1.0}, lo))
        if hi is not None:
            le_rows.append(({col: 1.0}, -hi))
    for m in prog.matrices.values():
        if m.hermitian:
            for a, b, s in HermitianEmbedding(m.dim).links():
                row = {lay.flat(m.name, *a): 1.0}
                col = lay.flat(m.name, *b)
                row[col] = row.get(col, 0.0) - s
                eq_rows.append((row, 0.0))
    (obj, c0), _ = lay.split(prog.objective)
    c = np.zeros(lay.size)
    for col, v in obj.items():
        c[col] += v
    a_mat, b_vec = _stack(eq_rows, lay.size)
    f_mat, h_vec = _stack(le_rows, lay.size)
    return lay, c, c0, a_mat, b_vec, f_mat, h_vec


def _map_status(status: str) -> str:
    import cvxpy as cp

    if status == cp.OPTIMAL:
        return OPTIMAL
    if status == cp.OPTIMAL_INACCURATE:
        return NEAR_OPTIMAL
    if status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        return INFEASIBLE
    if status in (cp.UNBOUNDED, cp.UNBOUNDED_INACCURATE):
        return UNBOUNDED
    return FAILED


def solve_sdp(prog: ConicProgram, tol: float = FEAS_TOL, solver: str = "CLARABEL") -> SolveReport:
    """Solve a :class:`ConicProgram`; statuses other than optimal are reported, never raised."""
    import cvxpy as cp

    lay, c, c0, a_mat, b_vec, f_mat, h_vec = compile_sdp(prog)
    parts, psd = [], []
    if prog.scalars:
        parts.append(cp.Variable(len(prog.scalars)))
    blocks = {}
    for m in prog.matrices.values():
        x = cp.Variable((lay.real_dim[m.name],) * 2, symmetric=True)
        blocks[m.name] = x
        parts.append(cp.vec(x, order="F"))
        psd.append(x >> 0)
    w = cp.hstack(parts) if len(parts) > 1 else parts[0]
    cons = list(psd)
    eq_con = le_con = None
    if a_mat.shape[0]:
        eq_con = a_mat @ w == b_vec
        cons.append(eq_con)
    if f_mat.shape[0]:
        le_con = f_mat @ w <= h_vec
        cons.append(le_con)
    expr = c @ w + c0
    problem = cp.Problem(cp.Maximize(expr) if prog.sense == "max" else cp.Minimize(expr), cons)
    opts = {}
    if solver == "CLARABEL":
        opts = dict(tol_gap_abs=tol, tol_gap_rel=tol, tol_feas=tol, max_iter=500)
    try:
        with warnings.catch_warnings():
            # inaccuracy is reported through the status instead
            warnings.simplefilter("ignore", UserWarning)
            problem.solve(solver=solver, **opts)
    except cp.error.SolverError as exc:
        log.warning("solver error: %s", exc)
        return SolveReport(FAILED, tol=tol, sense=prog.sense)
    status = _map_status(problem.status)
    if status not in OK_STATUSES:
        return SolveReport(status, tol=tol, sense=prog.sense)

    dual = c0
    sign = 1.0 if prog.sense == "max" else -1.0
    if eq_con is not None and eq_con.dual_value is not None:
        dual += sign * float(np.asarray(eq_con.dual_value) @ b_vec)
    if le_con is not None and le_con.dual_value is not None:
        dual += float(np.asarray(le_con.dual_value) @ h_vec) * (1.0 if prog.sense == "max" else -1.0)

    scalars = {}
    if prog.scalars:
        vals = np.asarray(parts[0].value).ravel()
        scalars = {name: float(vals[i]) for name, i in lay.scalar_col.items()}
    mats = {}
    for m in prog.matrices.values():
        x = np.asarray(blocks[m.name].value)
        mats[m.name] = HermitianEmbedding(m.dim).extract(x) if m.hermitian else x
    return SolveReport(status, float(problem.value), dual, scalars, mats, tol, prog.sense)


# ---------------------------------------------------------------------------
# LP


def solve_lp(prog: LinearProgram, tol: float = FEAS_TOL) -> SolveReport:
    """Solve with HiGHS; the dual objective is rebuilt from the row and bound marginals."""
    names = list(prog.variables)
    col = {n: i for i, n in enumerate(names)}
    sign = -1.0 if prog.sense == "max" else 1.0
    c = np.zeros(len(names))
    for n, v in prog.objective.items():
        c[col[n]] = sign * v

    def dense(rows):
        if not rows:
            return None, None
        mat = np.zeros((len(rows), len(names)))
        for r, (coefs, _) in enumerate(rows):
            for n, v in coefs.items():
                mat[r, col[n]] += v
        return mat, np.array([b for _, b in rows], dtype=float)

    a_eq, b_eq = dense(prog.eq_rows)
    a_ub, b_ub = dense(prog.le_rows)
    bounds = [prog.bounds.get(n, (0.0, None)) for n in names]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=bounds,
                  method="highs", options={"primal_feasibility_tolerance": min(tol, 1e-7),
                                           "dual_feasibility_tolerance": min(tol, 1e-7)})
    if res.status == 2:
        return SolveReport(INFEASIBLE, tol=tol, sense=prog.sense)
    if res.status == 3:
        return SolveReport(UNBOUNDED, tol=tol, sense=prog.sense)
    if res.status != 0:
        return SolveReport(FAILED, tol=tol, sense=prog.sense)

    dual = 0.0
    if b_eq is not None:
        dual += res.eqlin.marginals @ b_eq
    if b_ub is not None:
        dual += res.ineqlin.marginals @ b_ub
    lo = np.array([np.nan if b[0] is None else b[0] for b in bounds], dtype=float)
    hi = np.array([np.nan if b[1] is None else b[1] for b in bounds], dtype=float)
    dual += np.nansum(res.lower.marginals * np.where(np.isnan(lo), 0.0, lo))
    dual += np.nansum(res.upper.marginals * np.where(np.isnan(hi), 0.0, hi))
    primal = sign * res.fun + prog.offset
    return SolveReport(OPTIMAL, primal, sign * dual + prog.offset,
                       {n: float(res.x[i]) for n, i in col.items()}, {}, tol, prog.sense)
