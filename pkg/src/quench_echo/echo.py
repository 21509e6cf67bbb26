"""Loschmidt amplitude, its long-time average, and the rate function.

The time-domain functions (:func:`loschmidt_amplitude`,
:func:`time_average_echo`) exist to cross-check the spectral formula
:func:`spectral_average`, which is what the model modules use.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError
from .linalg import SpectralDecomposition, TwoBandState

DEGENERACY_TOL = 1e-9
NORM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class OverlapDistribution:
    """Initial state expanded in the post-quench eigenbasis.

    Attributes
    ----------
    energies : ndarray
        Post-quench eigenvalues ``E_n``, ascending.
    amplitudes : ndarray
        Complex overlaps ``c_n = <psi_n|Psi(0)>``.
    """

    energies: np.ndarray
    amplitudes: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        """``p_n = |c_n|**2``."""
        return np.abs(self.amplitudes) ** 2

    @classmethod
    def from_weights(cls, energies, weights) -> "OverlapDistribution":
        """Build from real weights (phases are irrelevant to every observable here)."""
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0):
            raise ValidationError("weights must be non-negative")
        return cls(np.asarray(energies, dtype=float), np.sqrt(w).astype(complex))


def overlap_distribution(final: SpectralDecomposition, psi0) -> OverlapDistribution:
    """Expand a normalized state in the eigenbasis of the final Hamiltonian."""
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (final.dim,):
        raise ValidationError(f"state has shape {psi0.shape}, expected ({final.dim},)")
    norm = float(np.linalg.norm(psi0))
    if abs(norm - 1.0) > NORM_TOL:
        raise ValidationError(f"initial state is not normalized: |psi0| = {norm!r}")
    c = final.eigenvectors.conj().T @ psi0
    return OverlapDistribution(np.asarray(final.eigenvalues, dtype=float), c)


def loschmidt_amplitude(dist: OverlapDistribution, t):
    """``G(t) = sum_n |c_n|^2 exp(-i E_n t)``; vectorized over ``t``."""
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)):
        raise ValidationError("time must be finite")
    phase = np.exp(-1j * np.multiply.outer(t, dist.energies))
    return phase @ dist.weights


def time_average_echo(dist: OverlapDistribution, tau: float, n_samples: int, chunk: int = 8192) -> float:
    """Midpoint-rule estimate of ``(1/tau) int_0^tau |G(t)|^2 dt``.

    Sampling is uniform, so ``n_samples`` should be at least
    ``10 * tau * max|E_n|`` for the quasi-periodic integrand to be resolved.
    """
    if not tau > 0:
        raise ValidationError(f"tau must be positive, got {tau}")
    if n_samples < 1:
        raise ValidationError("n_samples must be >= 1")
    # Only levels with weight contribute; dropping the rest shrinks the work.
    keep = dist.weights > 0
    sub = OverlapDistribution(dist.energies[keep], dist.amplitudes[keep])
    dt = tau / n_samples
    total = 0.0
    for start in range(0, n_samples, chunk):
        t = (np.arange(start, min(start + chunk, n_samples)) + 0.5) * dt
        g = loschmidt_amplitude(sub, t)
        total += float(np.sum(g.real ** 2 + g.imag ** 2))
    return total / n_samples


def cluster_weights(energies, weights, degeneracy_tol: float = DEGENERACY_TOL) -> np.ndarray:
    """Sum weights over runs of ascending energies whose consecutive gaps are <= tol."""
    e = np.asarray(energies, dtype=float)
    w = np.asarray(weights, dtype=float)
    if e.size == 0:
        return w
    order = np.argsort(e, kind="stable")
    e, w = e[order], w[order]
    starts = np.concatenate(([0], np.nonzero(np.diff(e) > degeneracy_tol)[0] + 1))
    return np.add.reduceat(w, starts)


def spectral_average(dist: OverlapDistribution, degeneracy_tol: float = DEGENERACY_TOL) -> float:
    """Infinite-time average of the echo from the overlap distribution.

    For a nondegenerate spectrum this is the inverse participation ratio
    ``sum_n p_n**2``. Degenerate levels keep their cross terms in the time
    average, so weights are first summed within each degeneracy cluster.
    """
    q = cluster_weights(dist.energies, dist.weights, degeneracy_tol)
    return float(np.sum(q * q))


def spectral_deficit(dist: OverlapDistribution, degeneracy_tol: float = DEGENERACY_TOL) -> float:
    """``1 - L_bar`` for the normalized distribution, without cancellation.

    Uses ``1 - sum q_c**2 = sum_c q_c (1 - q_c)`` and forms ``1 - q_c`` of the
    dominant cluster as the sum of all other clusters, so small quenches keep
    full relative precision.
    """
    q = cluster_weights(dist.energies, dist.weights, degeneracy_tol)
    total = float(np.sum(q))
    rest = total - q
    top = int(np.argmax(q))
    rest[top] = float(np.sum(np.delete(q, top)))
    return float(np.sum(q * rest)) / (total * total)


def rate_function(L_bar: float, L_sites: int) -> float:
    """``-log(L_bar) / L_sites``.

    Raises
    ------
    DomainError
        If ``L_bar <= 0``. The exception's ``surrogate`` holds the rate
        obtained with the smallest positive double in place of ``L_bar``.
    """
    if L_sites < 1:
        raise ValidationError(f"system size must be positive, got {L_sites}")
    if not L_bar > 0:
        surrogate = -math.log(np.finfo(float).tiny) / L_sites
        raise DomainError(f"long-time average {L_bar!r} is not positive (vanished overlap)", surrogate)
    if L_bar > 1.0 + 1e-12:
        warnings.warn(f"long-time average {L_bar!r} exceeds one", RuntimeWarning, stacklevel=2)
    return max(-math.log(L_bar) / L_sites, 0.0)


def two_band_echo(initial: TwoBandState, final: TwoBandState):
    """Per-mode long-time average for a two-band quench from the lower band.

    Returns ``(L_bar_k, deficit_k)`` where ``L_bar_k = sum_a |<phi_a|psi_->|^4``
    and ``deficit_k = 1 - L_bar_k`` evaluated as ``2 p_+ p_-`` so it stays
    accurate when the quench is tiny. Final modes flagged degenerate collapse
    into one cluster, giving ``L_bar_k = 1``.
    """
    psi = initial.v_minus
    p_minus = np.abs(np.sum(final.v_minus.conj() * psi, axis=-1)) ** 2
    p_plus = np.abs(np.sum(final.v_plus.conj() * psi, axis=-1)) ** 2
    # renormalize away round-off so p_- + p_+ = 1 exactly up to one ulp
    s = p_minus + p_plus
    p_minus, p_plus = p_minus / s, p_plus / s
    deficit = np.where(final.degenerate, 0.0, 2.0 * p_minus * p_plus)
    L_bar = np.where(final.degenerate, 1.0, p_minus * p_minus + p_plus * p_plus)
    return L_bar, deficit


def two_band_log_echo(initial: TwoBandState, final: TwoBandState) -> np.ndarray:
    """``log L_bar_k`` per mode, via ``log1p(-deficit)`` for accuracy."""
    _, deficit = two_band_echo(initial, final)
    return np.log1p(-deficit)
