"""Closed forms for two modes and for binary phase discrimination.

These are used as oracles for the numerical programs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .conic import LinearProgram, solve_lp
from .results import PROB, UD, check_task


def _check_overlap(overlap):
    if abs(overlap) > 1 + 1e-12:
        raise ValueError(f"|overlap| = {abs(overlap):.6g} exceeds 1")
    return min(abs(overlap), 1.0)


def helstrom(overlap: complex) -> float:
    """Best guessing probability for two equiprobable pure states."""
    s = _check_overlap(overlap)
    return 0.5 * (1 + math.sqrt(1 - s * s))


def idp(overlap: complex) -> float:
    """Best unambiguous success probability for two equiprobable pure states."""
    return 1 - _check_overlap(overlap)


def floor_ceil_weights(nbar: float) -> tuple[int, float, float]:
    """``(floor(nbar), p_floor, p_floor_plus_one)``."""
    lo = math.floor(nbar)
    return lo, 1 + lo - nbar, nbar - lo


def chi_two_mode(k: float, nbar: float) -> float:
    """Smallest overlap ``|sum p_n k^n|`` at mean ``nbar`` for real ``0 <= k <= 1``."""
    if isinstance(k, complex) or np.iscomplexobj(k):
        if complex(k).imag != 0:
            raise ValueError("chi_two_mode needs a real k; use the SDP for complex k")
        k = complex(k).real
    if k < 0 or k > 1:
        raise ValueError("chi_two_mode needs 0 <= k <= 1; negative k goes through chi_lp or the SDP")
    if nbar < 0:
        raise ValueError("nbar must be nonnegative")
    lo, p_lo, p_hi = floor_ceil_weights(nbar)
    return p_lo * k ** lo + p_hi * k ** (lo + 1)


def chi_lp(k: float, nbar: float, n_max: int = 50) -> float:
    """Same minimum by linear programming over ``p_0..p_nmax``; also valid for ``k < 0``.

    For negative ``k`` the sign of ``sum p_n k^n`` at the optimum is unknown,
    so both signs are tried with the sign imposed as a constraint.
    """
    k = float(k)
    names = tuple(f"p{n}" for n in range(n_max + 1))
    powers = {p: k ** n for n, p in enumerate(names)}
    base = [({p: 1.0 for p in names}, 1.0), ({p: float(n) for n, p in enumerate(names)}, float(nbar))]
    best = math.inf
    for sign in ((1.0,) if k >= 0 else (1.0, -1.0)):
        obj = {p: sign * v for p, v in powers.items()}
        # sign * sum p_n k^n >= 0
        prog = LinearProgram(names, obj, "min", eq_rows=base, le_rows=[({p: -v for p, v in obj.items()}, 0.0)])
        rep = solve_lp(prog)
        if rep.ok:
            best = min(best, rep.objective)
    if not math.isfinite(best):
        raise RuntimeError(f"no feasible distribution for nbar={nbar} with n_max={n_max}")
    return max(best, 0.0)


def fock_bound_two_mode(k: complex, n: int, task: str = PROB) -> float:
    """Per-photon-number optimum for two modes."""
    s = abs(k)
    if task == PROB:
        return 0.5 * (1 + math.sqrt(max(0.0, 1 - s ** (2 * n))))
    return 1 - s ** n


def two_mode_source_bound(k: complex, nbar: float, task: str = PROB) -> float:
    """Exact two-mode optimum without a phase reference."""
    check_task(task)
    if abs(k) > 1 + 1e-12:
        raise ValueError("|k| exceeds 1")
    lo, p_lo, p_hi = floor_ceil_weights(nbar)
    return p_lo * fock_bound_two_mode(k, lo, task) + p_hi * fock_bound_two_mode(k, lo + 1, task)


def two_mode_channel_bound(k: float, nbar: float, task: str = PROB) -> float:
    """Exact two-mode optimum with a phase reference, for real ``0 <= k <= 1``."""
    chi = chi_two_mode(k, nbar)
    return helstrom(chi) if check_task(task) == PROB else idp(chi)


@dataclass(frozen=True)
class PhaseOrthogonalPair:
    """Two orthogonal probes for the modes ``a`` and ``-a`` at mean photon number ``m + delta/2``.

    ``plus`` and ``minus`` are amplitudes on the Fock states ``m-1, m, m+1``.
    """

    m: int
    delta: float
    plus: np.ndarray
    minus: np.ndarray

    @property
    def photon_numbers(self) -> np.ndarray:
        return np.arange(self.m - 1, self.m + 2)

    @property
    def nbar(self) -> float:
        return float(self.photon_numbers @ np.abs(self.plus) ** 2)

    def mode_overlap(self) -> float:
        """``<psi_a | psi_-a>`` from the weights alone, ``sum p_n (-1)^n``."""
        return float(np.sum(np.abs(self.plus) ** 2 * (-1.0) ** self.photon_numbers))


def phase_orthogonal_pair(nbar: float) -> PhaseOrthogonalPair:
    if nbar < 0.5:
        raise ValueError("orthogonal probes for a and -a need nbar >= 0.5")
    m = math.floor(nbar + 0.5)
    delta = 2 * (nbar - m)
    side = np.array([math.sqrt((1 - delta) / 4), 0.0, math.sqrt((1 + delta) / 4)])
    mid = np.array([0.0, 1 / math.sqrt(2), 0.0])
    return PhaseOrthogonalPair(m, delta, side + mid, side - mid)


__all__ = [
    "helstrom", "idp", "chi_two_mode", "chi_lp", "two_mode_source_bound",
    "two_mode_channel_bound", "fock_bound_two_mode", "phase_orthogonal_pair",
    "PhaseOrthogonalPair", "floor_ceil_weights", "PROB", "UD",
]
