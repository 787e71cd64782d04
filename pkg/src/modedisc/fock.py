"""Photon-number distributions and the truncation bookkeeping."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_NMAX = 50
TWO_MODE_NMAX = 300


@dataclass(frozen=True)
class PhotonDistribution:
    """Weights ``p_0 .. p_nmax``; the mass may be below one (truncated tail).

    Only the weights ``|c_n|^2`` are stored. Every discrimination bound in this
    package depends on the amplitudes through these weights alone.
    """

    weights: np.ndarray
    declared_mean: float | None = None

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).ravel()
        if w.size == 0:
            raise ValueError("empty distribution")
        if np.any(w < 0):
            raise ValueError(f"negative weight at n={int(np.argmax(w < 0))}")
        if w.sum() > 1 + 1e-9:
            raise ValueError(f"total weight {w.sum():.12g} exceeds 1")
        if self.declared_mean is not None and abs(w.sum() - 1) <= 1e-12:
            mean = float(np.arange(w.size) @ w)
            if abs(mean - self.declared_mean) > 1e-9:
                raise ValueError(f"mean {mean:.12g} != declared {self.declared_mean:.12g}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n_max(self) -> int:
        return self.weights.size - 1

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    @property
    def mean(self) -> float:
        return float(np.arange(self.weights.size) @ self.weights)

    @classmethod
    def fock(cls, n: int, n_max: int | None = None) -> "PhotonDistribution":
        w = np.zeros((n if n_max is None else n_max) + 1)
        w[n] = 1.0
        return cls(w, float(n))

    @classmethod
    def coherent(cls, nbar: float, n_max: int) -> "PhotonDistribution":
        """Poisson weights truncated at ``n_max`` (sub-normalized)."""
        w = np.zeros(n_max + 1)
        if nbar == 0:
            w[0] = 1.0
        else:
            for n in range(n_max + 1):
                w[n] = math.exp(-nbar + n * math.log(nbar) - math.lgamma(n + 1))
        return cls(w)


@dataclass(frozen=True)
class EnergyConstraint:
    """Mean photon number ``nbar`` with a photon-number cutoff ``n_max``."""

    nbar: float
    n_max: int = DEFAULT_NMAX

    def __post_init__(self):
        if self.nbar < 0:
            raise ValueError("nbar must be nonnegative")
        if self.n_max < 1:
            raise ValueError("n_max must be at least 1")
        if self.nbar > self.n_max:
            raise ValueError(f"nbar={self.nbar} exceeds n_max={self.n_max}; relaxed set is empty")


def inner_product(p: PhotonDistribution, k: complex) -> complex:
    """Truncated overlap ``sum_n p_n k**n`` of two modes with constant ``k``."""
    return complex(np.polynomial.polynomial.polyval(complex(k), p.weights))


def truncation_epsilon(p: PhotonDistribution, k: complex) -> float:
    """Bound on the overlap carried by photon numbers above ``n_max``."""
    return max(0.0, 1.0 - p.mass) * abs(k) ** (p.n_max + 1)


def relaxed_energy_row(ec: EnergyConstraint) -> tuple[np.ndarray, float]:
    """Coefficients ``c`` and right side ``b`` of ``c @ p >= b``.

    The tail mass ``1 - sum p_n`` is charged ``n_max + 1`` photons.
    """
    n = np.arange(ec.n_max + 1)
    return (ec.n_max + 1 - n).astype(float), float(ec.n_max + 1 - ec.nbar)
