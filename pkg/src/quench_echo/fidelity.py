"""Small-quench limit: echo curvature versus ground-state fidelity susceptibility.

Two independent routes are provided for the curvature of the long-time
average at ``delta -> 0``:

* perturbation sums over the spectrum at ``lambda`` (:func:`chi_delta_pert`,
  :func:`fidelity_susceptibility_pert`), and
* a finite quench of size ``delta`` through the full echo machinery
  (:func:`chi_delta_numeric`).

For momentum-space models the per-mode quantities are averaged over the
Brillouin zone, so reported susceptibilities are intensive.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .aa import AAParams, build_aa_hamiltonian, potential_profile
from .echo import DEGENERACY_TOL, overlap_distribution, spectral_deficit, two_band_echo
from .errors import ConsistencyError, DegenerateError, ValidationError
from .haldane import GAPLESS_TOL, GEOMETRY, HaldaneParams, bz_grid, haldane_modes
from .ising import IsingParams, ising_modes, momentum_grid
from .linalg import PAULI, HermitianMatrix, SpectralDecomposition, TwoBandState, eig_hermitian

DEFAULT_DELTA = 1e-5
GAP_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class PerturbationSplit:
    """``H(lambda) = H0 + lambda * H1``."""

    H0: HermitianMatrix
    H1: HermitianMatrix
    lam: float

    def hamiltonian(self, lam: float | None = None) -> HermitianMatrix:
        lam = self.lam if lam is None else lam
        return HermitianMatrix(self.H0.entries + lam * self.H1.entries)


def aa_split(p: AAParams) -> PerturbationSplit:
    """Hopping part and on-site cosine profile of the Aubry-Andre chain."""
    H1 = HermitianMatrix(np.diag(potential_profile(p)))
    H0 = HermitianMatrix(build_aa_hamiltonian(p.with_delta(0.0)).entries)
    return PerturbationSplit(H0, H1, p.Delta)


def fidelity(psi_a, psi_b) -> float:
    a = np.asarray(psi_a, dtype=complex)
    b = np.asarray(psi_b, dtype=complex)
    for name, v in (("psi_a", a), ("psi_b", b)):
        n = np.linalg.norm(v)
        if abs(n - 1.0) > 1e-10:
            raise ValidationError(f"{name} is not normalized: norm {n!r}")
    return float(min(abs(np.vdot(a, b)), 1.0))


def _couplings(spec: SpectralDecomposition, H1):
    H1 = H1.entries if isinstance(H1, HermitianMatrix) else np.asarray(H1)
    if H1.shape != (spec.dim, spec.dim):
        raise ValidationError(f"H1 has shape {H1.shape}, expected {(spec.dim, spec.dim)}")
    E = spec.eigenvalues
    if spec.dim > 1 and E[1] - E[0] <= GAP_TOL:
        raise DegenerateError(f"ground state is degenerate (gap {E[1] - E[0]:.3e})")
    psi0 = spec.eigenvectors[:, 0]
    hm0 = spec.eigenvectors[:, 1:].conj().T @ (H1 @ psi0)
    return hm0, E[0] - E[1:]


def fidelity_susceptibility_pert(spec: SpectralDecomposition, H1) -> float:
    """``chi_F = sum_{m>0} |<m|H1|0>|^2 / (E_0 - E_m)^2``."""
    hm0, dE = _couplings(spec, H1)
    return float(np.sum(np.abs(hm0) ** 2 / dE ** 2))


def chi_delta_pert(spec: SpectralDecomposition, H1) -> float:
    """Echo curvature ``-d^2 L_delta / d delta^2`` from second-order perturbation theory."""
    hm0, dE = _couplings(spec, H1)
    return float(np.sum(4.0 * (hm0.real ** 2 + hm0.imag ** 2) / (dE * dE)))


def normalization_fidelity(spec: SpectralDecomposition, H1, delta: float) -> float:
    """``(1 + delta^2 sum |H_m0|^2/(E_0-E_m)^2)^(-1/2)``, the fidelity to second order."""
    return float((1.0 + delta * delta * fidelity_susceptibility_pert(spec, H1)) ** -0.5)


def chi_delta_numeric(closure: Callable[[float, float], float], lam: float, delta: float = DEFAULT_DELTA) -> float:
    """``2 (1 - L_delta) / delta^2`` with ``L_delta = closure(lam, lam + delta)``.

    Uses that the echo of the identity quench is exactly one, so only one
    finite quench is needed.
    """
    if not delta > 0:
        raise ValidationError(f"delta must be positive, got {delta}")
    L_delta = float(closure(lam, lam + delta))
    if L_delta > 1.0 + 1e-12:
        raise ConsistencyError(f"long-time average {L_delta!r} exceeds one")
    return 2.0 * (1.0 - L_delta) / (delta * delta)


def aa_echo_closure(p: AAParams, degeneracy_tol: float = DEGENERACY_TOL):
    """``(Delta_i, Delta_f) -> L_bar`` for the Aubry-Andre chain at fixed L, J, alpha.

    Evaluated as one minus the deficit so nearby quenches resolve ``1 - L_bar``
    to full relative precision.
    """

    def closure(lam_i, lam_f):
        psi0 = eig_hermitian(build_aa_hamiltonian(p.with_delta(lam_i))).vector(0)
        final = eig_hermitian(build_aa_hamiltonian(p.with_delta(lam_f)))
        return 1.0 - spectral_deficit(overlap_distribution(final, psi0), degeneracy_tol)

    return closure


# Two-band models: one 2x2 problem per momentum.

def two_band_couplings(modes: TwoBandState, h1) -> np.ndarray:
    """``<phi_+|H1|psi_->`` per mode; ``h1`` is a batch of 2x2 matrices."""
    h1v = np.einsum("...ij,...j->...i", h1, modes.v_minus)
    return np.sum(modes.v_plus.conj() * h1v, axis=-1)


def two_band_fidelity_susceptibility(modes: TwoBandState, h1) -> np.ndarray:
    if np.any(modes.gap <= GAP_TOL):
        raise DegenerateError("ground state is degenerate at some momentum")
    return np.abs(two_band_couplings(modes, h1)) ** 2 / modes.gap ** 2


def two_band_chi_delta(modes: TwoBandState, h1) -> np.ndarray:
    if np.any(modes.gap <= GAP_TOL):
        raise DegenerateError("ground state is degenerate at some momentum")
    c = two_band_couplings(modes, h1)
    return 4.0 * (c.real ** 2 + c.imag ** 2) / (modes.gap * modes.gap)


QUENCH_PARAMETERS = {"haldane": ("M", "phi"), "ising": ("h",), "aa": ("delta",)}


def haldane_h1(p: HaldaneParams, k, parameter: str) -> np.ndarray:
    """Analytic ``dH_k/d parameter`` (batched) for ``parameter`` in {"M", "phi"}."""
    k = np.asarray(k, dtype=float)
    out = np.zeros(k.shape[:-1] + (2, 2), dtype=complex)
    if parameter == "M":
        out[..., 0, 0] = 1.0
        out[..., 1, 1] = -1.0
    elif parameter == "phi":
        kn = k @ GEOMETRY.nu_vectors.T
        out[..., 0, 0] = 2.0 * p.t2 * np.sum(np.sin(kn + p.phi), axis=-1)
        out[..., 1, 1] = -2.0 * p.t2 * np.sum(np.sin(kn - p.phi), axis=-1)
    else:
        raise ValidationError(f"unknown Haldane quench parameter {parameter!r}")
    return out


def _haldane_at(p: HaldaneParams, parameter: str, value: float) -> HaldaneParams:
    if parameter not in ("M", "phi"):
        raise ValidationError(f"unknown Haldane quench parameter {parameter!r}")
    return p.replace(**{parameter: float(value)})


def haldane_susceptibilities(p: HaldaneParams, parameter: str, per_mode: bool = False):
    """``(chi_delta, chi_F)`` from perturbation sums, averaged over the zone.

    With ``per_mode`` the unaveraged ``(N, N)`` arrays are returned.
    """
    k = bz_grid(p.N)
    modes = haldane_modes(p, k, tol=GAPLESS_TOL)
    modes.require_gapped("Haldane Hamiltonian", where=k)
    h1 = haldane_h1(p, k, parameter)
    cd = two_band_chi_delta(modes, h1)
    cf = two_band_fidelity_susceptibility(modes, h1)
    if per_mode:
        return cd, cf
    return float(np.mean(cd)), float(np.mean(cf))


def haldane_echo_closure(p: HaldaneParams, parameter: str, product: bool = False):
    """``(lam_i, lam_f) -> L_bar`` for a Haldane quench in ``parameter``.

    By default returns the zone average of the per-mode long-time averages
    (evaluated as ``1 - mean(deficit)`` to keep small quenches accurate), so
    ``chi_delta_numeric`` yields the intensive curvature. With ``product`` it
    returns the many-body value ``prod_k L_bar_k``, whose curvature is the
    zone sum instead.
    """
    k = bz_grid(p.N)

    def closure(lam_i, lam_f):
        initial = haldane_modes(_haldane_at(p, parameter, lam_i), k, tol=GAPLESS_TOL)
        initial.require_gapped("initial Haldane Hamiltonian", where=k)
        final = haldane_modes(_haldane_at(p, parameter, lam_f), k)
        _, deficit = two_band_echo(initial, final)
        if product:
            return float(np.exp(np.sum(np.log1p(-deficit))))
        return 1.0 - float(np.mean(deficit))

    return closure


def ising_susceptibilities(p: IsingParams, L: int):
    """``(chi_delta, chi_F)`` per mode averaged over the ``L`` momenta, quench in h."""
    k = momentum_grid(L)
    modes = ising_modes(p, k)
    h1 = np.broadcast_to(PAULI[0], k.shape + (2, 2))  # dV/dh = 1 -> sigma_x
    return float(np.mean(two_band_chi_delta(modes, h1))), float(np.mean(two_band_fidelity_susceptibility(modes, h1)))


def ising_echo_closure(J: float, L: int):
    k = momentum_grid(L)

    def closure(h_i, h_f):
        initial = ising_modes(IsingParams(h_i, J), k, tol=GAPLESS_TOL)
        initial.require_gapped("initial Ising block", where=k)
        _, deficit = two_band_echo(initial, ising_modes(IsingParams(h_f, J), k))
        return 1.0 - float(np.mean(deficit))

    return closure
