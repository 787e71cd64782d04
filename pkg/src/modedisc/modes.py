"""Families of optical modes described by their commutation constants.

A family of ``N`` modes ``a_1 ... a_N`` is fully specified, for discrimination
purposes, by the matrix ``k`` with ``[a_i, a_j^dagger] = k[i, j]``. Entry
``k[i, j]`` is the single-photon overlap ``<1_i|1_j>``, so ``k`` is a Gram
matrix: Hermitian, unit diagonal, PSD.
"""
from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

ABS_TOL = 1e-12
PSD_FLOOR = -1e-9
DPS_MAX_ELL = 6


class FamilyError(ValueError):
    """Raised when a commutation matrix violates a family invariant."""


@dataclass(frozen=True)
class ModeFamily:
    """Immutable set of modes.

    Parameters
    ----------
    k : (N, N) complex array
        Commutation constants ``k[i, j] = [a_i, a_j^dagger]``.
    labels : tuple of str, optional
        Display names, one per mode.
    priors : (N,) array, optional
        Prior probabilities; uniform when omitted.
    name : str
        Short description used in reports.
    """

    k: np.ndarray
    labels: tuple[str, ...] = ()
    priors: np.ndarray | None = None
    name: str = "custom"
    _fp: str = field(default="", init=False, repr=False, compare=False)

    def __post_init__(self):
        k = np.array(self.k, dtype=complex)
        if k.ndim != 2 or k.shape[0] != k.shape[1] or k.shape[0] < 1:
            raise FamilyError(f"k must be a square matrix, got shape {k.shape}")
        n = k.shape[0]
        _check_k(k)
        priors = np.full(n, 1.0 / n) if self.priors is None else np.asarray(self.priors, float)
        if priors.shape != (n,):
            raise FamilyError(f"priors must have length {n}")
        if np.any(priors < 0) or abs(priors.sum() - 1) > 1e-9:
            raise FamilyError("priors must be nonnegative and sum to 1")
        labels = tuple(self.labels) if self.labels else tuple(str(i) for i in range(n))
        if len(labels) != n:
            raise FamilyError(f"expected {n} labels, got {len(labels)}")
        k.setflags(write=False)
        priors.setflags(write=False)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "priors", priors)
        object.__setattr__(self, "labels", labels)

    @property
    def n_modes(self) -> int:
        return self.k.shape[0]

    @property
    def is_real(self) -> bool:
        return bool(np.max(np.abs(self.k.imag)) <= ABS_TOL)

    @property
    def uniform_priors(self) -> bool:
        return bool(np.allclose(self.priors, 1.0 / self.n_modes, atol=1e-15))

    def conjugate(self) -> "ModeFamily":
        return ModeFamily(self.k.conj(), self.labels, self.priors, self.name + "*")

    def fingerprint(self) -> str:
        """Stable hash of ``k`` and the priors (12 significant digits)."""
        if not self._fp:
            blob = np.round(np.concatenate([self.k.real.ravel(), self.k.imag.ravel(),
                                            self.priors]), 12) + 0.0
            object.__setattr__(self, "_fp", hashlib.sha256(blob.tobytes()).hexdigest()[:16])
        return self._fp

    def __eq__(self, other):
        if not isinstance(other, ModeFamily):
            return NotImplemented
        return (self.k.shape == other.k.shape and np.array_equal(self.k, other.k)
                and np.array_equal(self.priors, other.priors))

    def __hash__(self):
        return hash(self.fingerprint())


def _check_k(k: np.ndarray) -> None:
    n = k.shape[0]
    for i in range(n):
        if abs(k[i, i] - 1) > ABS_TOL:
            raise FamilyError(f"entry ({i},{i}) = {k[i, i]}: diagonal must equal 1")
    for i, j in itertools.product(range(n), repeat=2):
        if abs(k[i, j]) > 1 + ABS_TOL:
            raise FamilyError(f"entry ({i},{j}) has |k| = {abs(k[i, j]):.6g} > 1")
    for i, j in itertools.combinations(range(n), 2):
        if abs(k[j, i] - np.conj(k[i, j])) > ABS_TOL:
            raise FamilyError(f"k is not Hermitian: entry ({j},{i}) != conj of ({i},{j})")
    lam = np.linalg.eigvalsh(k).min()
    if lam < PSD_FLOOR:
        raise FamilyError(f"k is not positive semidefinite (smallest eigenvalue {lam:.3g})")


def make_two_mode(k: complex) -> ModeFamily:
    """Two modes with ``[a_1, a_2^dagger] = k``."""
    k = complex(k)
    if abs(k) > 1 + ABS_TOL:
        raise FamilyError(f"|k| = {abs(k):.6g} exceeds 1")
    mat = np.array([[1, k], [np.conj(k), 1]], dtype=complex)
    return ModeFamily(mat, ("a1", "a2"), name=f"two-mode(k={k:.6g})")


def make_phase_family(n_outcomes: int) -> ModeFamily:
    """Symmetric phase shifts ``a_j = exp(2 pi i j / N) a``.

    Entry ``(j, l)`` is ``exp(2 pi i (j - l) / N)``.
    """
    if n_outcomes < 2:
        raise FamilyError("phase family needs at least 2 outcomes")
    j = np.arange(n_outcomes)
    mat = np.exp(2j * np.pi * (j[:, None] - j[None, :]) / n_outcomes)
    return ModeFamily(mat, tuple(f"phi{i}" for i in j), name=f"phase(N={n_outcomes})")


def make_comp_ft_family(d: int) -> ModeFamily:
    """Computational modes ``a_0..a_{d-1}`` followed by their Fourier modes ``b_0..b_{d-1}``."""
    if d < 2:
        raise FamilyError("comp/FT family needs d >= 2")
    j = np.arange(d)
    cross = np.exp(-2j * np.pi * np.outer(j, j) / d) / np.sqrt(d)
    mat = np.block([[np.eye(d), cross], [cross.conj().T, np.eye(d)]])
    labels = tuple(f"a{i}" for i in j) + tuple(f"b{i}" for i in j)
    return ModeFamily(mat, labels, name=f"comp-ft(d={d})")


def dps_phases(bits: tuple[int, ...]) -> np.ndarray:
    """Pulse phases ``(0, phi_1, ..., phi_ell)`` for one bit string."""
    return np.concatenate([[0.0], np.pi * np.cumsum(bits)])


def make_dps_family(ell: int, max_ell: int = DPS_MAX_ELL) -> ModeFamily:
    """Differential-phase-shift modes over ``ell + 1`` orthogonal pulses, one per bit string."""
    if ell < 1:
        raise FamilyError("DPS family needs ell >= 1")
    if ell > max_ell:
        raise FamilyError(f"ell={ell} exceeds the cap {max_ell} (2**ell modes)")
    strings = list(itertools.product((0, 1), repeat=ell))
    ph = np.array([dps_phases(s) for s in strings])
    mat = np.exp(1j * (ph[:, None, :] - ph[None, :, :])).sum(axis=2) / (ell + 1)
    # phases are multiples of pi: kill rounding noise in the imaginary part
    mat = np.where(np.abs(mat.imag) < 1e-14, mat.real, mat)
    mat = np.round(mat.real, 15) + 1j * np.round(mat.imag, 15)
    labels = tuple("".join(map(str, s)) for s in strings)
    return ModeFamily(mat, labels, name=f"dps(ell={ell})")


def _parse_entry(v, where):
    if isinstance(v, dict):
        try:
            return complex(float(v.get("re", 0.0)), float(v.get("im", 0.0)))
        except (TypeError, ValueError) as exc:
            raise FamilyError(f"entry {where}: bad number ({exc})") from None
    if isinstance(v, (int, float)):
        return complex(v)
    raise FamilyError(f"entry {where}: expected {{'re','im'}} object or number")


def family_from_dict(data: dict) -> ModeFamily:
    if not isinstance(data, dict) or "k" not in data:
        raise FamilyError("family file must be an object with a 'k' field")
    rows = data["k"]
    n = data.get("n_modes", len(rows))
    if len(rows) != n or any(len(r) != n for r in rows):
        raise FamilyError(f"k must be {n}x{n}")
    mat = np.array([[_parse_entry(v, (i, j)) for j, v in enumerate(r)]
                    for i, r in enumerate(rows)], dtype=complex)
    return ModeFamily(mat, tuple(data.get("labels") or ()), data.get("priors"),
                      name=data.get("name", "custom"))


def load_family(path) -> ModeFamily:
    """Read a family from the JSON schema ``{"n_modes", "k", "labels", "priors"}``."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FamilyError(f"cannot parse {path}: {exc}") from None
    return family_from_dict(data)


def family_to_dict(fam: ModeFamily) -> dict:
    return {
        "n_modes": fam.n_modes,
        "k": [[{"re": float(v.real), "im": float(v.imag)} for v in row] for row in fam.k],
        "labels": list(fam.labels),
        "priors": [float(p) for p in fam.priors],
        "name": fam.name,
    }


def save_family(fam: ModeFamily, path) -> None:
    Path(path).write_text(json.dumps(family_to_dict(fam), indent=1))
