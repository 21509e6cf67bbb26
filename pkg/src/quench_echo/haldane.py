"""Haldane model on the honeycomb lattice (lattice constant 1).

Conventions
-----------
The A-B block is ``-t1 * sum_j exp(-i k.e_j)``; the A diagonal is
``M - 2 t2 sum_j cos(k.nu_j + phi)`` and the B diagonal
``-M - 2 t2 sum_j cos(k.nu_j - phi)``, so the NNN hopping contributes both an
identity part and ``h_z = M + 2 t2 sin(phi) sum_j sin(k.nu_j)``. The gap closes
at ``|M| = 3 sqrt(3) t2 |sin(phi)|``.

The Brillouin zone is sampled as the reciprocal parallelogram spanned by
``b1, b2`` with an ``N x N`` midpoint grid; the finite lattice has
``L = 2 N**2`` sites. Rates are averages over the ``N**2`` momenta.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .echo import two_band_log_echo
from .errors import DegenerateError, ValidationError
from .linalg import HermitianMatrix, TwoBandState, eig_two_level, two_level_matrix

GAPLESS_TOL = 1e-10
SQRT3 = np.sqrt(3.0)


@dataclass(frozen=True, eq=False)
class HoneycombGeometry:
    e_vectors: np.ndarray   # A -> nearest B
    nu_vectors: np.ndarray  # A -> next-nearest A
    a_vectors: np.ndarray   # Bravais basis (nu_1, nu_2)
    b_vectors: np.ndarray   # reciprocal basis, b_i . a_j = 2 pi delta_ij

    @property
    def bz_area(self) -> float:
        b1, b2 = self.b_vectors
        return float(abs(b1[0] * b2[1] - b1[1] * b2[0]))


def _honeycomb() -> HoneycombGeometry:
    e = np.array([[0.0, 1.0], [-SQRT3 / 2, -0.5], [SQRT3 / 2, -0.5]])
    nu = np.array([[SQRT3, 0.0], [-SQRT3 / 2, 1.5], [-SQRT3 / 2, -1.5]])
    a = nu[:2].copy()
    b = 2.0 * np.pi * np.linalg.inv(a).T
    for arr in (e, nu, a, b):
        arr.flags.writeable = False
    return HoneycombGeometry(e, nu, a, b)


GEOMETRY = _honeycomb()


@dataclass(frozen=True)
class HaldaneParams:
    M: float = 0.0
    phi: float = np.pi / 2
    N: int = 64
    t1: float = 4.0
    t2: float = 1.0

    def __post_init__(self):
        if not self.t1 > 0 or not self.t2 > 0:
            raise ValidationError(f"hoppings must be positive, got t1={self.t1}, t2={self.t2}")
        if int(self.N) != self.N or self.N < 4:
            raise ValidationError(f"N must be an integer >= 4, got {self.N}")

    @property
    def sites(self) -> int:
        return 2 * self.N * self.N

    def replace(self, **changes) -> "HaldaneParams":
        return dataclasses.replace(self, **changes)


def critical_mass(phi: float, t2: float = 1.0) -> float:
    """``3 sqrt(3) t2 |sin(phi)|``, the |M| at which the gap closes."""
    return 3.0 * SQRT3 * t2 * abs(np.sin(phi))


def bz_grid(N: int, offset: float = 0.5) -> np.ndarray:
    """``(N, N, 2)`` wavevectors ``((m+offset)/N) b1 + ((n+offset)/N) b2``, row-major."""
    f = (np.arange(N) + offset) / N
    b1, b2 = GEOMETRY.b_vectors
    return f[:, None, None] * b1 + f[None, :, None] * b2


def bloch_vector(p: HaldaneParams, k, periodic_gauge: bool = False):
    """``(h0, hx, hy, hz)`` of ``H_k`` for an array of wavevectors ``k[..., 2]``.

    With ``periodic_gauge`` the B orbital is rephased by ``exp(i k.e_1)`` so
    that ``H_{k+b} = H_k`` exactly; this is a unitary change of basis that
    leaves spectra and gauge-invariant quantities untouched.
    """
    k = np.asarray(k, dtype=float)
    ke = k @ GEOMETRY.e_vectors.T
    kn = k @ GEOMETRY.nu_vectors.T
    if periodic_gauge:
        ke = ke - ke[..., :1]
    off = -p.t1 * np.sum(np.exp(-1j * ke), axis=-1)  # (A, B) entry = hx - i hy
    h0 = -2.0 * p.t2 * np.cos(p.phi) * np.sum(np.cos(kn), axis=-1)
    hz = p.M + 2.0 * p.t2 * np.sin(p.phi) * np.sum(np.sin(kn), axis=-1)
    return h0, off.real, -off.imag, hz


def haldane_bloch(p: HaldaneParams, k) -> HermitianMatrix:
    """The 2x2 Bloch Hamiltonian at a single wavevector."""
    return HermitianMatrix(two_level_matrix(*bloch_vector(p, np.asarray(k, dtype=float))))


def haldane_modes(p: HaldaneParams, k, tol: float = 0.0, periodic_gauge: bool = False) -> TwoBandState:
    return eig_two_level(*bloch_vector(p, k, periodic_gauge), tol=tol)


def chern_number(p: HaldaneParams) -> int:
    """Lower-band Chern number by the plaquette (link-variable) method.

    Each plaquette of the ``N x N`` grid contributes the phase of the product
    of normalized overlaps around its boundary; the sum over plaquettes is
    ``2 pi C`` up to round-off.
    """
    k = bz_grid(p.N)
    modes = haldane_modes(p, k, tol=GAPLESS_TOL, periodic_gauge=True)
    modes.require_gapped("Haldane Hamiltonian", where=k)
    u = modes.v_minus
    u1 = np.roll(u, -1, axis=0)
    u2 = np.roll(u, -1, axis=1)
    u12 = np.roll(u1, -1, axis=1)

    def link(a, b):
        z = np.sum(a.conj() * b, axis=-1)
        return z / np.abs(z)

    flux = np.angle(link(u, u1) * link(u1, u12) * link(u12, u2) * link(u2, u))
    total = float(np.sum(flux)) / (2.0 * np.pi)
    c = int(round(total))
    if abs(total - c) > 1e-6:
        raise DegenerateError(f"plaquette sum {total} is not an integer; grid too coarse")
    return c


def log_echo_per_mode(p_i: HaldaneParams, p_f: HaldaneParams, k=None, tol: float = 0.0) -> np.ndarray:
    """``log sum_a |<phi_a(k)|psi_-(k)>|^4`` on the grid (or on given ``k``)."""
    if p_i.N != p_f.N or p_i.t1 != p_f.t1 or p_i.t2 != p_f.t2:
        raise ValidationError("initial and final parameters must share N, t1 and t2")
    if k is None:
        k = bz_grid(p_i.N)
    initial = haldane_modes(p_i, k, tol=GAPLESS_TOL)
    initial.require_gapped("initial Haldane Hamiltonian", where=k)
    final = haldane_modes(p_f, k, tol=tol)
    return two_band_log_echo(initial, final)


def haldane_rate(p_i: HaldaneParams, p_f: HaldaneParams, tol: float = 0.0) -> float:
    """Momentum-averaged rate ``-(1/N^2) sum_k log sum_a |<phi_a|psi_->|^4``.

    This is the Brillouin-zone average; dividing by the site count ``2 N^2``
    instead would halve it.
    """
    return max(-float(np.mean(log_echo_per_mode(p_i, p_f, tol=tol))), 0.0)


def chi_lambda(eta_samples, h: float) -> float:
    """``-(eta(l+h) - 2 eta(l) + eta(l-h)) / h**2`` from ``(eta-, eta0, eta+)``."""
    if not h > 0:
        raise ValidationError(f"step must be positive, got {h}")
    lo, mid, hi = eta_samples
    return -(hi - 2.0 * mid + lo) / (h * h)
