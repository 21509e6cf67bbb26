"""Aubry-Andre quasiperiodic chain in real space."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .echo import DEGENERACY_TOL, overlap_distribution, rate_function, spectral_average
from .errors import DegenerateError, ValidationError
from .linalg import HermitianMatrix, eig_hermitian

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class AAParams:
    """Open chain of ``L`` sites, hopping ``J``, potential ``Delta*cos(2 pi alpha j)``."""

    L: int
    Delta: float = 0.0
    J: float = 1.0
    alpha: float = GOLDEN

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 2:
            raise ValidationError(f"L must be an integer >= 2, got {self.L}")
        if not self.J > 0:
            raise ValidationError(f"J must be positive, got {self.J}")
        if not self.Delta >= 0:
            raise ValidationError(f"Delta must be non-negative, got {self.Delta}")
        if not 0 < self.alpha < 1:
            raise ValidationError(f"alpha must lie in (0, 1), got {self.alpha}")

    def with_delta(self, Delta: float) -> "AAParams":
        return dataclasses.replace(self, Delta=float(Delta))


def potential_profile(p: AAParams) -> np.ndarray:
    """``cos(2 pi alpha j)`` for ``j = 1..L``; the operator conjugate to Delta."""
    j = np.arange(1, p.L + 1)
    return np.cos(2.0 * np.pi * p.alpha * j)


def build_aa_hamiltonian(p: AAParams) -> HermitianMatrix:
    L = p.L
    H = np.zeros((L, L))
    idx = np.arange(L - 1)
    H[idx, idx + 1] = -p.J
    H[idx + 1, idx] = -p.J
    H[np.arange(L), np.arange(L)] = p.Delta * potential_profile(p)
    return HermitianMatrix(H)


@lru_cache(maxsize=64)
def _ground_state(p: AAParams) -> np.ndarray:
    spec = eig_hermitian(build_aa_hamiltonian(p))
    gap = spec.eigenvalues[1] - spec.eigenvalues[0]
    if gap <= DEGENERACY_TOL:
        raise DegenerateError(f"ground level of {p} is degenerate (gap {gap:.3e})")
    psi = spec.vector(0).copy()
    psi.flags.writeable = False
    return psi


def aa_ground_state(p: AAParams) -> np.ndarray:
    """Normalized lowest single-particle eigenvector of ``H(p)``."""
    return _ground_state(p).copy()


def aa_quench_average(p_i: AAParams, Delta_f: float, degeneracy_tol: float = DEGENERACY_TOL):
    """Long-time averaged echo after the quench ``Delta_i -> Delta_f``.

    Returns
    -------
    (L_bar, eta) : tuple of float
        The spectral long-time average and its rate ``-log(L_bar)/L``.
    """
    psi0 = _ground_state(p_i)
    final = eig_hermitian(build_aa_hamiltonian(p_i.with_delta(Delta_f)))
    L_bar = spectral_average(overlap_distribution(final, psi0), degeneracy_tol)
    return L_bar, rate_function(L_bar, p_i.L)


def inverse_participation_ratio(psi) -> float:
    return float(np.sum(np.abs(psi) ** 4))
