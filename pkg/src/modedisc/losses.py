"""Mode-independent loss: photon-number downconversion, benchmarks and a lossy two-mode optimizer.

Loss is a beam splitter of transmittivity ``t2`` on every mode. On
phase-randomized states it acts on the photon-number weights alone; on the
pure probes of the channel scenario the output is mixed, so only a heuristic
lower estimate is available there.
"""
from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular
from scipy.optimize import brentq, minimize
from scipy.special import comb

from .analytic import floor_ceil_weights
from .conic import FEAS_TOL
from .fock import EnergyConstraint, PhotonDistribution
from .modes import ModeFamily
from .results import PROB, BoundResult
from .source import fock_table, lp_bound


@dataclass(frozen=True)
class LossChannel:
    t2: float

    def __post_init__(self):
        if not 0.0 <= self.t2 <= 1.0:
            raise ValueError(f"transmittivity t2={self.t2} outside [0, 1]")

    @property
    def r2(self) -> float:
        return 1.0 - self.t2


def loss_matrix(n_max: int, ch: LossChannel) -> np.ndarray:
    """Upper-triangular ``B`` with ``q = B @ p``; ``B[n, m] = C(m, n) t2^n r2^(m-n)``."""
    n = np.arange(n_max + 1)
    m, nn = np.meshgrid(n, n)
    # numpy takes 0**0 as 1, which covers the t2 = 0 and t2 = 1 edges
    b = comb(m, nn) * np.power(ch.t2, nn) * np.power(ch.r2, np.clip(m - nn, 0, None))
    return np.triu(b)


def loss_transform(p: PhotonDistribution, ch: LossChannel) -> PhotonDistribution:
    q = loss_matrix(p.n_max, ch) @ p.weights
    return PhotonDistribution(np.clip(q, 0.0, None))


@dataclass(frozen=True)
class Inversion:
    """Pre-loss weights for a target output distribution.

    ``weights`` is the raw solution of the triangular system and may hold
    negative entries; ``negative`` lists their indices. ``distribution`` is
    set only when the solution is physical.
    """

    weights: np.ndarray
    negative: tuple[int, ...]
    condition: float

    @property
    def physical(self) -> bool:
        return not self.negative

    @property
    def distribution(self) -> PhotonDistribution | None:
        return PhotonDistribution(np.clip(self.weights, 0.0, None)) if self.physical else None


def loss_invert(q: PhotonDistribution, ch: LossChannel, neg_tol: float = 1e-12) -> Inversion:
    if ch.t2 <= 0:
        raise ValueError("cannot invert a channel with t2 = 0")
    b = loss_matrix(q.n_max, ch)
    cond = float(np.linalg.cond(b))
    if not math.isfinite(cond) or cond > 1 / np.finfo(float).eps:
        raise np.linalg.LinAlgError(f"loss inversion is singular to working precision (cond ~ {cond:.3g})")
    p = solve_triangular(b, q.weights, lower=False)
    neg = tuple(int(i) for i in np.flatnonzero(p < -neg_tol))
    return Inversion(p, neg, cond)


def source_lossy_bound(family: ModeFamily, ec: EnergyConstraint, ch: LossChannel,
                       task: str = PROB, *, table=None, jobs: int | None = None,
                       tol: float = FEAS_TOL) -> BoundResult:
    """Source-scenario bound when the detected light has mean ``nbar * t2``.

    ``details["pre_loss"]`` holds the inversion of the LP optimizer back
    through the channel, when ``t2 > 0``.
    """
    if table is None:
        table = fock_table(family, ec.n_max, task, jobs=jobs, tol=tol)
    res = lp_bound(table, EnergyConstraint(ec.nbar * ch.t2, ec.n_max), tol, family.name)
    res.nbar = ec.nbar
    res.details["t2"] = ch.t2
    if res.ok and ch.t2 > 0 and res.weights is not None:
        try:
            inv = loss_invert(PhotonDistribution(np.clip(res.weights, 0.0, None)), ch)
            res.details["pre_loss"] = inv
            res.details["pre_loss_physical"] = inv.physical
        except np.linalg.LinAlgError as exc:
            res.details["pre_loss_error"] = str(exc)
    return res


def coherent_bound(k: float, nbar: float, ch: LossChannel) -> float:
    """Two coherent probes of equal amplitude in modes with real overlap ``k``."""
    if not 0.0 <= k <= 1.0:
        raise ValueError("coherent_bound needs 0 <= k <= 1")
    return 0.5 * (1 + math.sqrt(1 - math.exp(-2 * ch.t2 * nbar * (1 - k))))


def fock_bound_lossy(k: float, m: int, ch: LossChannel) -> float:
    """Send ``m`` photons, count what arrives, then run Helstrom on that sector."""
    if not 0.0 <= k <= 1.0:
        raise ValueError("fock_bound_lossy needs 0 <= k <= 1")
    if m < 0:
        raise ValueError("photon number must be nonnegative")
    total = 0.0
    for n in range(1, m + 1):
        total += comb(m, n) * ch.t2 ** n * ch.r2 ** (m - n) * math.sqrt(max(0.0, 1 - k ** (2 * n)))
    return 0.5 * (1 + total)


def estimate_floor(k: float, m: int, ch: LossChannel) -> float:
    return max(coherent_bound(k, m, ch), fock_bound_lossy(k, m, ch))


# two-mode lossy states -------------------------------------------------------

def two_mode_basis(n_trunc: int) -> dict[tuple[int, int], int]:
    """Index of ``|n_a, n_b>`` for ``n_a + n_b <= n_trunc``, ordered by total then ``n_a``."""
    idx = {}
    for tot in range(n_trunc + 1):
        for na in range(tot, -1, -1):
            idx[(na, tot - na)] = len(idx)
    return idx


def kraus_ops(n_trunc: int, ch: LossChannel) -> list[np.ndarray]:
    """Single-mode loss operators, ``<n-l|K_l|n> = sqrt(C(n, l)) t^(n-l) r^l``."""
    return list(_kraus(n_trunc, ch.t2))


@lru_cache(maxsize=64)
def _kraus(n_trunc: int, t2: float) -> tuple[np.ndarray, ...]:
    t, r = math.sqrt(t2), math.sqrt(1.0 - t2)
    ops = []
    for l in range(n_trunc + 1):
        op = np.zeros((n_trunc + 1, n_trunc + 1))
        for n in range(l, n_trunc + 1):
            op[n - l, n] = math.sqrt(comb(n, l)) * t ** (n - l) * r ** l
        op.setflags(write=False)
        ops.append(op)
    return tuple(ops)


def embedding(k: complex, n_trunc: int) -> tuple[np.ndarray, np.ndarray]:
    """Isometries placing single-mode Fock states of the two modes into one basis.

    The first mode is ``a``; the second is ``k a + sqrt(1 - |k|^2) a_perp``
    (as creation operators) so that one photon in each overlaps by ``k``.
    """
    return _embedding(complex(k), n_trunc)


@lru_cache(maxsize=64)
def _embedding(k: complex, n_trunc: int) -> tuple[np.ndarray, np.ndarray]:
    basis = two_mode_basis(n_trunc)
    s = math.sqrt(max(0.0, 1 - abs(k) ** 2))
    e1 = np.zeros((len(basis), n_trunc + 1), dtype=complex)
    e2 = np.zeros_like(e1)
    for n in range(n_trunc + 1):
        e1[basis[(n, 0)], n] = 1.0
        for m in range(n + 1):
            e2[basis[(m, n - m)], n] += math.sqrt(comb(n, m)) * k ** m * s ** (n - m)
    e1.setflags(write=False)
    e2.setflags(write=False)
    return e1, e2


def lossy_density(amps: np.ndarray, ch: LossChannel) -> np.ndarray:
    ops = np.stack(_kraus(amps.size - 1, ch.t2))
    vecs = ops @ amps
    return vecs.T @ vecs.conj()


def lossy_pair(amps: np.ndarray, k: complex, ch: LossChannel) -> tuple[np.ndarray, np.ndarray]:
    """Output states for the probe ``sum_n amps[n] |n>`` sent in each of the two modes."""
    amps = np.asarray(amps, dtype=complex)
    rho = lossy_density(amps, ch)
    e1, e2 = embedding(k, amps.size - 1)
    return e1 @ rho @ e1.conj().T, e2 @ rho @ e2.conj().T


def guessing_probability(rho1: np.ndarray, rho2: np.ndarray) -> float:
    """Helstrom probability for two equiprobable mixed states."""
    ev = np.linalg.eigvalsh(rho1 - rho2)
    return 0.5 * (1 + 0.5 * float(np.abs(ev).sum()))


def probe_probability(weights, k: complex, ch: LossChannel, phases=None) -> float:
    w = np.clip(np.asarray(weights, dtype=float), 0.0, None)
    amps = np.sqrt(w).astype(complex)
    if phases is not None:
        amps = amps * np.exp(1j * np.asarray(phases))
    return guessing_probability(*lossy_pair(amps, k, ch))


# heuristic optimizer -------------------------------------------------------------

def tilt_to_mean(logits: np.ndarray, nbar: float) -> np.ndarray:
    """Closest distribution (in relative entropy) to ``softmax(logits)`` with mean ``nbar``."""
    n = np.arange(logits.size)
    if not 0.0 < nbar < n[-1]:
        raise ValueError(f"nbar={nbar} must lie strictly inside (0, {n[-1]})")

    def dist(lam):
        z = logits + lam * n
        w = np.exp(z - z.max())
        return w / w.sum()

    def gap(lam):
        return dist(lam) @ n - nbar

    span = 60.0 + float(np.ptp(logits))
    while gap(-span) > 0 or gap(span) < 0:
        span *= 2
    lam = brentq(gap, -span, span, xtol=1e-14)
    return dist(lam)


@dataclass
class HeuristicResult:
    """Best lossy probe found; ``bound`` is achievable, hence a lower estimate."""

    bound: float
    weights: np.ndarray
    converged: bool
    restarts: int
    n_trunc: int
    phases: np.ndarray | None = None
    phase_bound: float | None = None
    history: list = field(default_factory=list, repr=False)


def _seeds(nbar: float, n_trunc: int, restarts: int, rng) -> list[np.ndarray]:
    floor = 1e-6
    n = np.arange(n_trunc + 1)
    fock = np.full(n_trunc + 1, floor)
    fock[min(round(nbar), n_trunc)] = 1.0
    pois = np.exp(-nbar + n * math.log(max(nbar, 1e-12)) - np.array([math.lgamma(x + 1) for x in n]))
    lo, p_lo, p_hi = floor_ceil_weights(nbar)
    fc = np.full(n_trunc + 1, floor)
    fc[lo] += p_lo
    if lo + 1 <= n_trunc:
        fc[lo + 1] += p_hi
    seeds = [np.log(x + floor) for x in (fock, pois, fc)]
    while len(seeds) < restarts:
        seeds.append(rng.normal(scale=2.0, size=n_trunc + 1))
    return seeds[:restarts]


def heuristic_channel_lossy(k: complex, nbar: float, ch: LossChannel, n_trunc: int = 5,
                            restarts: int = 20, optimize_phases: bool = False,
                            seed: int = 0, maxiter: int = 4000) -> HeuristicResult:
    """Multi-start direct search for the lossy two-mode probe with the best guessing probability.

    Amplitudes are real and nonnegative. With ``optimize_phases`` a second
    search over relative phases starts from the best real probe and is
    reported next to it.
    """
    if abs(k) > 1:
        raise ValueError("|k| exceeds 1")
    if n_trunc < math.ceil(nbar) + 2:
        raise ValueError(f"n_trunc must be at least ceil(nbar) + 2 = {math.ceil(nbar) + 2}")
    if nbar == 0:
        w = np.zeros(n_trunc + 1)
        w[0] = 1.0
        return HeuristicResult(0.5, w, True, 0, n_trunc)
    rng = np.random.default_rng(seed)

    def loss(theta):
        return -probe_probability(tilt_to_mean(theta, nbar), k, ch)

    best, history, converged = None, [], False
    for theta0 in _seeds(nbar, n_trunc, restarts, rng):
        res = minimize(loss, theta0, method="Nelder-Mead",
                       options={"maxiter": maxiter, "xatol": 1e-7, "fatol": 1e-11, "adaptive": True})
        history.append(-res.fun)
        if best is None or res.fun < best.fun:
            best, converged = res, bool(res.success)
    weights = tilt_to_mean(best.x, nbar)
    out = HeuristicResult(-best.fun, weights, converged, restarts, n_trunc, history=history)
    if optimize_phases:
        ph = minimize(lambda x: -probe_probability(weights, k, ch, np.r_[0.0, x]),
                      np.zeros(n_trunc), method="Nelder-Mead", options={"maxiter": maxiter})
        out.phases = np.r_[0.0, ph.x]
        out.phase_bound = -ph.fun
    return out


__all__ = [
    "LossChannel", "loss_matrix", "loss_transform", "loss_invert", "Inversion",
    "source_lossy_bound", "coherent_bound", "fock_bound_lossy", "estimate_floor",
    "two_mode_basis", "kraus_ops", "embedding", "lossy_density", "lossy_pair",
    "guessing_probability", "probe_probability", "tilt_to_mean", "heuristic_channel_lossy",
    "HeuristicResult",
]
