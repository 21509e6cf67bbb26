"""Dense Hermitian linear algebra and periodic quadrature.

Everything downstream consumes either a full :class:`SpectralDecomposition`
(real-space models) or a batch of closed-form two-level eigenpairs
(:class:`TwoBandState`, momentum-space models).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateError, ValidationError

HERMITICITY_TOL = 1e-12

# Pauli matrices, index order x, y, z.
PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


@dataclass(frozen=True, eq=False)
class HermitianMatrix:
    """Dense complex Hermitian operator.

    The entries are copied and frozen on construction so instances can be
    shared between threads.
    """

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=complex, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValidationError(f"expected a square matrix, got shape {a.shape}")
        if a.shape[0] < 1:
            raise ValidationError("matrix dimension must be >= 1")
        dev = np.abs(a - a.conj().T)
        if dev.max() > HERMITICITY_TOL:
            i, j = np.unravel_index(np.argmax(dev), dev.shape)
            raise ValidationError(
                f"matrix is not Hermitian: |H[{i},{j}] - conj(H[{j},{i}])| = {dev[i, j]:.3e}"
            )
        a.flags.writeable = False
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.entries))

    def __matmul__(self, other):
        return self.entries @ other

    def __add__(self, other):
        return HermitianMatrix(self.entries + _entries(other))

    def __mul__(self, scalar):
        return HermitianMatrix(self.entries * scalar)

    __rmul__ = __mul__


def _entries(H) -> np.ndarray:
    return H.entries if isinstance(H, HermitianMatrix) else np.asarray(H)


def as_hermitian(H) -> HermitianMatrix:
    return H if isinstance(H, HermitianMatrix) else HermitianMatrix(np.asarray(H))


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Ascending eigenvalues with column eigenvectors ``eigenvectors[:, i]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def vector(self, i: int) -> np.ndarray:
        return self.eigenvectors[:, i]


def fix_phase(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude component is real positive.

    Ties (within 1e-12) go to the lowest index, which keeps the choice stable
    under round-off.
    """
    v = np.array(vectors, dtype=complex, copy=True)
    mag = np.abs(v)
    pivot = np.argmax(mag >= mag.max(axis=0, keepdims=True) - 1e-12, axis=0)
    cols = np.arange(v.shape[1])
    ref = v[pivot, cols]
    v *= (np.abs(ref) / ref)[np.newaxis, :]
    v[pivot, cols] = np.abs(ref)
    return v


def eig_hermitian(H) -> SpectralDecomposition:
    """Full eigendecomposition of a dense Hermitian matrix.

    Backed by LAPACK (``numpy.linalg.eigh``); eigenvector phases are fixed by
    :func:`fix_phase` so identical input gives identical output.

    Parameters
    ----------
    H : HermitianMatrix or array_like
        Square Hermitian matrix. Raw arrays are validated first.

    Returns
    -------
    SpectralDecomposition
    """
    H = as_hermitian(H)
    a = H.entries
    if not np.iscomplexobj(a) or not np.any(a.imag):
        w, v = np.linalg.eigh(a.real)
    else:
        w, v = np.linalg.eigh(a)
    v = fix_phase(v)
    w.flags.writeable = False
    v.flags.writeable = False
    return SpectralDecomposition(w, v)


@dataclass(frozen=True, eq=False)
class TwoBandState:
    """Closed-form eigendata of ``h0*I + h.sigma``, batched over leading axes.

    ``h`` has a trailing axis of length 3, ``v_minus``/``v_plus`` a trailing
    axis of length 2. ``degenerate`` marks points with ``|h| <= tol``, where
    the two levels coincide and the basis returned is just (e2, e1).
    """

    h0: np.ndarray
    h: np.ndarray
    e_minus: np.ndarray
    e_plus: np.ndarray
    v_minus: np.ndarray
    v_plus: np.ndarray
    degenerate: np.ndarray

    @property
    def gap(self) -> np.ndarray:
        return self.e_plus - self.e_minus

    def require_gapped(self, what="two-level Hamiltonian", where=None):
        """Raise :class:`DegenerateError` if any point is degenerate."""
        if np.any(self.degenerate):
            idx = np.unravel_index(np.argmax(self.degenerate), self.degenerate.shape)
            loc = f" at {where[idx]}" if where is not None else f" at index {idx}"
            raise DegenerateError(f"{what} is gapless{loc}")


def eig_two_level(h0, hx, hy, hz, tol: float = 0.0) -> TwoBandState:
    """Analytic eigenpairs of ``h0*I + hx*sx + hy*sy + hz*sz``.

    All arguments broadcast against each other. Eigenvalues are
    ``h0 -/+ |h|``; eigenvectors use the branch that avoids cancellation and
    carry the same phase convention as :func:`eig_hermitian`.
    """
    h0, hx, hy, hz = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (h0, hx, hy, hz)))
    r = np.sqrt(hx * hx + hy * hy + hz * hz)
    degenerate = r <= tol
    up = hz >= 0
    big = r + np.abs(hz)
    off = hx + 1j * hy
    rs = np.where(degenerate, 1.0, np.sqrt(2.0 * r * big))

    vp = np.empty(r.shape + (2,), dtype=complex)
    vm = np.empty(r.shape + (2,), dtype=complex)
    # hz >= 0: v+ ~ (r+hz, hx+i hy), v- ~ (-(hx-i hy), r+hz)
    # hz <  0: v+ ~ (hx-i hy, r-hz),  v- ~ (r-hz, -(hx+i hy))
    vp[..., 0] = np.where(up, big, off.conj())
    vp[..., 1] = np.where(up, off, big)
    vm[..., 0] = np.where(up, -off.conj(), big)
    vm[..., 1] = np.where(up, big, -off)
    vp /= rs[..., None]
    vm /= rs[..., None]
    if np.any(degenerate):
        vm[degenerate] = (0.0, 1.0)
        vp[degenerate] = (1.0, 0.0)
    # Exact ties |hz| == 0: both components have modulus 1/sqrt(2); pick the
    # first one real positive to match fix_phase.
    tie = (hz == 0) & ~degenerate
    if np.any(tie):
        for v in (vp, vm):
            ref = v[tie, 0]
            v[tie] *= (np.abs(ref) / ref)[:, None]
    h = np.stack([hx, hy, hz], axis=-1)
    return TwoBandState(h0, h, h0 - r, h0 + r, vm, vp, degenerate)


def two_level_matrix(h0, hx, hy, hz) -> np.ndarray:
    """Dense ``h0*I + h.sigma`` (batched); the inverse of the Bloch decomposition."""
    h0, hx, hy, hz = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (h0, hx, hy, hz)))
    m = np.empty(h0.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = h0 + hz
    m[..., 1, 1] = h0 - hz
    m[..., 0, 1] = hx - 1j * hy
    m[..., 1, 0] = hx + 1j * hy
    return m


def bloch_decompose(m) -> tuple:
    """Split a (batched) 2x2 Hermitian matrix into ``(h0, hx, hy, hz)``."""
    m = np.asarray(m)
    h0 = 0.5 * (m[..., 0, 0] + m[..., 1, 1]).real
    hz = 0.5 * (m[..., 0, 0] - m[..., 1, 1]).real
    hx = m[..., 1, 0].real
    hy = m[..., 1, 0].imag
    return h0, hx, hy, hz


def periodic_trapezoid(f: Callable, a: float, b: float, n: int) -> float:
    """Midpoint rule ``(b-a)/n * sum f(a + (m+1/2)(b-a)/n)`` for periodic ``f``.

    ``f`` must accept a numpy array of abscissae. For smooth periodic
    integrands the error decays faster than any power of ``1/n``; the offset
    grid never touches the endpoints.
    """
    if n < 2:
        raise ValidationError(f"need n >= 2 quadrature nodes, got {n}")
    step = (b - a) / n
    x = a + (np.arange(n) + 0.5) * step
    y = np.asarray(f(x), dtype=float)
    if y.shape != x.shape:
        y = np.broadcast_to(y, x.shape)
    bad = ~np.isfinite(y)
    if np.any(bad):
        xb = x[np.argmax(bad)]
        raise ValidationError(f"integrand is not finite at x = {xb!r}")
    return float(step * np.sum(y))
