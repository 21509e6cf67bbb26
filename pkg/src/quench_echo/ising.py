"""Transverse-field Ising chain, one two-level problem per momentum.

Works directly with the rotated Bogoliubov-de Gennes block
``[[0, V(k)], [V*(k), 0]]`` with ``V(k) = h - J exp(-ik)``, i.e. the Bloch
vector ``(Re V, -Im V, 0)``. The constant energy shift of the fermionized
chain is dropped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .echo import two_band_log_echo
from .errors import DegenerateError, ValidationError
from .linalg import TwoBandState, eig_two_level, periodic_trapezoid

GAPLESS_TOL = 1e-12


@dataclass(frozen=True)
class IsingParams:
    """Exchange ``J``, transverse field ``h``; ``L`` is None for the continuum."""

    h: float
    J: float = 1.0
    L: int | None = None

    def __post_init__(self):
        if not self.J > 0:
            raise ValidationError(f"J must be positive, got {self.J}")
        if not self.h >= 0:
            raise ValidationError(f"h must be non-negative, got {self.h}")
        if self.L is not None and (int(self.L) != self.L or self.L < 2 or self.L % 2):
            raise ValidationError(f"L must be an even integer >= 2, got {self.L}")


def momentum_grid(n: int) -> np.ndarray:
    """``k_m = 2 pi (m + 1/2) / n - pi`` for ``m = 0..n-1``; never hits 0 or pi."""
    return 2.0 * np.pi * (np.arange(n) + 0.5) / n - np.pi


def ising_vk(p: IsingParams, k):
    return p.h - p.J * np.exp(-1j * np.asarray(k, dtype=float))


def ising_modes(p: IsingParams, k, tol: float = 0.0) -> TwoBandState:
    """Eigendata of the rotated BdG block at momenta ``k``."""
    v = ising_vk(p, k)
    return eig_two_level(0.0, v.real, -v.imag, 0.0, tol=tol)


def winding_number(p: IsingParams, n_k: int = 256) -> int:
    """Winding of ``V(k)`` around the origin as ``k`` runs over the zone.

    Computed as ``-(1/2 pi)`` times the accumulated phase of ``V`` on a
    closed midpoint grid. The grid must be fine enough that ``arg V`` moves by
    less than pi between neighbours, which holds for ``n_k >= 64`` unless the
    chain is within a few percent of criticality.
    """
    if abs(p.h - p.J) < GAPLESS_TOL:
        raise DegenerateError(f"winding number undefined at the critical field h = J = {p.J}")
    if n_k < 3:
        raise ValidationError("need at least 3 momenta")
    phase = np.angle(ising_vk(p, momentum_grid(n_k)))
    step = np.diff(np.append(phase, phase[0]))
    step = (step + np.pi) % (2.0 * np.pi) - np.pi
    total = -np.sum(step) / (2.0 * np.pi)
    nu = int(round(total))
    if abs(total - nu) > 1e-6:
        raise DegenerateError(f"accumulated phase {total} is not an integer; refine the grid")
    return nu


def ising_rate_discrete(h_i: float, h_f: float, L: int, J: float = 1.0) -> float:
    """Rate function of the finite chain as a product over momentum modes.

    ``eta = -(1/L) sum_k log sum_a |<phi_a(k)|psi_-(k)>|^4`` over the
    ``L`` momenta of :func:`momentum_grid`, each overlap taken from the
    closed-form two-level eigenvectors of the initial and final blocks.
    """
    if int(L) != L or L < 4 or L % 2:
        raise ValidationError(f"L must be an even integer >= 4, got {L}")
    k = momentum_grid(L)
    initial = ising_modes(IsingParams(h_i, J), k, tol=GAPLESS_TOL)
    initial.require_gapped("initial Ising block", where=k)
    final = ising_modes(IsingParams(h_f, J), k, tol=GAPLESS_TOL)
    return max(-float(np.sum(two_band_log_echo(initial, final))) / L, 0.0)


def _cos2_theta(h_i, h_f, J, k):
    num = J * (h_f - h_i) * np.sin(k)
    den = J * J + h_i * h_f - J * (h_i + h_f) * np.cos(k)
    return den * den / (den * den + num * num)


def ising_rate_closed(h_i: float, h_f: float, n_k: int = 4096, J: float = 1.0) -> float:
    """Thermodynamic-limit rate ``-(1/2 pi) int dk log((1 + cos^2 theta)/2)``.

    ``cos^2 theta`` is evaluated as ``D^2/(D^2 + N^2)`` with
    ``N = J (h_f - h_i) sin k`` and ``D = J^2 + h_i h_f - J (h_i + h_f) cos k``,
    which is symmetric under ``h_i <-> h_f`` and free of arctan branches.
    """
    if n_k < 64:
        raise ValidationError(f"n_k must be >= 64, got {n_k}")
    if h_i == h_f:
        return 0.0

    def integrand(k):
        num = J * (h_f - h_i) * np.sin(k)
        den = J * J + h_i * h_f - J * (h_i + h_f) * np.cos(k)
        bad = (num == 0) & (den == 0)
        if np.any(bad):
            raise DegenerateError(f"cos^2 theta is 0/0 at k = {k[np.argmax(bad)]!r}")
        return np.log1p(_cos2_theta(h_i, h_f, J, k)) - np.log(2.0)

    eta = -periodic_trapezoid(integrand, -np.pi, np.pi, n_k) / (2.0 * np.pi)
    return max(eta, 0.0)
