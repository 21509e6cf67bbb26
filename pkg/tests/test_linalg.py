import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quench_echo.errors import ValidationError
from quench_echo.ising import IsingParams, ising_vk
from quench_echo.linalg import (
    HermitianMatrix,
    bloch_decompose,
    eig_hermitian,
    eig_two_level,
    periodic_trapezoid,
    two_level_matrix,
)


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


def assert_decomposition(H, spec, tol=1e-10):
    a = H.entries if isinstance(H, HermitianMatrix) else np.asarray(H)
    fro = np.linalg.norm(a)
    for i in range(spec.dim):
        v = spec.vector(i)
        assert np.linalg.norm(a @ v - spec.eigenvalues[i] * v) <= tol * fro
    gram = spec.eigenvectors.conj().T @ spec.eigenvectors
    assert np.max(np.abs(gram - np.eye(spec.dim))) <= tol
    assert np.all(np.diff(spec.eigenvalues) >= 0)


def test_pauli_x():
    spec = eig_hermitian([[0, 1], [1, 0]])
    np.testing.assert_allclose(spec.eigenvalues, [-1, 1], atol=1e-14)
    assert abs(abs(np.vdot(spec.vector(0), [1, -1])) / np.sqrt(2) - 1) < 1e-12
    assert abs(abs(np.vdot(spec.vector(1), [1, 1])) / np.sqrt(2) - 1) < 1e-12


def test_diagonal_is_permuted_basis():
    spec = eig_hermitian(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_allclose(spec.eigenvalues, [1, 2, 3])
    np.testing.assert_allclose(spec.eigenvectors, np.eye(3)[:, [1, 2, 0]])


def test_random_hermitian_invariants(rng):
    H = HermitianMatrix(random_hermitian(rng, 8))
    spec = eig_hermitian(H)
    assert_decomposition(H, spec)
    assert abs(spec.eigenvalues.sum() - np.trace(H.entries).real) <= 1e-10
    assert abs(np.sum(spec.eigenvalues ** 2) - H.frobenius_norm ** 2) <= 1e-10 * 8


@pytest.mark.parametrize("n", [1, 3, 17, 40])
def test_trace_and_frobenius_identities(rng, n):
    H = HermitianMatrix(random_hermitian(rng, n))
    w = eig_hermitian(H).eigenvalues
    assert abs(w.sum() - np.trace(H.entries).real) <= 1e-10 * n
    assert abs(np.sum(w ** 2) - H.frobenius_norm ** 2) <= 1e-10 * n * max(1.0, H.frobenius_norm ** 2)


def test_deterministic_phase(rng):
    a = random_hermitian(rng, 12)
    s1, s2 = eig_hermitian(a), eig_hermitian(a.copy())
    assert np.array_equal(s1.eigenvectors, s2.eigenvectors)
    # largest component of every eigenvector is real and positive
    v = s1.eigenvectors
    piv = v[np.argmax(np.abs(v), axis=0), np.arange(12)]
    assert np.all(piv.real > 0) and np.all(piv.imag == 0)


def test_non_hermitian_names_worst_pair():
    a = np.zeros((3, 3))
    a[0, 2] = 1.0
    with pytest.raises(ValidationError, match=r"H\[(0,2|2,0)\]"):
        HermitianMatrix(a)


def test_empty_matrix_rejected():
    with pytest.raises(ValidationError):
        HermitianMatrix(np.zeros((0, 0)))


def test_outputs_are_read_only(rng):
    spec = eig_hermitian(random_hermitian(rng, 4))
    with pytest.raises(ValueError):
        spec.eigenvalues[0] = 0.0


def test_two_level_pauli_z():
    st_ = eig_two_level(0, 0, 0, 1)
    assert (st_.e_minus, st_.e_plus) == (-1, 1)
    np.testing.assert_allclose(st_.v_minus, [0, 1])


def test_two_level_pauli_x():
    st_ = eig_two_level(0, 1, 0, 0)
    assert abs(abs(np.vdot(st_.v_minus, [1, -1])) / np.sqrt(2) - 1) < 1e-14


def test_two_level_ising_point():
    v = ising_vk(IsingParams(h=1.0, J=1.0), np.pi / 2)
    assert abs(v - (1 + 1j)) < 1e-15
    st_ = eig_two_level(0, v.real, -v.imag, 0)
    np.testing.assert_allclose([st_.e_minus, st_.e_plus], [-np.sqrt(2), np.sqrt(2)], atol=1e-14)
    oracle = eig_hermitian([[0, v], [np.conj(v), 0]])
    np.testing.assert_allclose(oracle.eigenvalues, [st_.e_minus, st_.e_plus], atol=1e-12)


def test_two_level_degenerate_flag():
    st_ = eig_two_level(0.3, 0, 0, 0)
    assert bool(st_.degenerate)
    assert st_.e_minus == st_.e_plus == 0.3


def test_two_level_matches_dense_on_seeded_batch(rng):
    h = rng.normal(size=(1000, 4))
    batch = eig_two_level(h[:, 0], h[:, 1], h[:, 2], h[:, 3])
    for i in range(1000):
        m = two_level_matrix(*h[i])
        spec = eig_hermitian(m)
        assert abs(spec.eigenvalues[0] - batch.e_minus[i]) <= 1e-10
        assert abs(spec.eigenvalues[1] - batch.e_plus[i]) <= 1e-10
        assert abs(abs(np.vdot(batch.v_minus[i], spec.vector(0))) - 1) <= 1e-10
        assert abs(abs(np.vdot(batch.v_plus[i], spec.vector(1))) - 1) <= 1e-10


finite = st.floats(-1e3, 1e3, allow_nan=False)


@settings(max_examples=300, deadline=None)
@given(finite, finite, finite, finite)
def test_two_level_eigen_equation(h0, hx, hy, hz):
    s = eig_two_level(h0, hx, hy, hz)
    if s.degenerate:
        return
    m = two_level_matrix(h0, hx, hy, hz)
    scale = max(1.0, abs(h0) + np.sqrt(hx * hx + hy * hy + hz * hz))
    for e, v in ((s.e_minus, s.v_minus), (s.e_plus, s.v_plus)):
        assert abs(np.linalg.norm(v) - 1) < 1e-12
        assert np.linalg.norm(m @ v - e * v) <= 1e-12 * scale
    assert abs(np.vdot(s.v_minus, s.v_plus)) < 1e-12


def test_bloch_roundtrip(rng):
    h = rng.normal(size=(5, 4))
    back = np.stack(bloch_decompose(two_level_matrix(*h.T)), axis=-1)
    np.testing.assert_allclose(back, h, atol=1e-15)


def test_trapezoid_cos():
    assert abs(periodic_trapezoid(np.cos, -np.pi, np.pi, 64)) < 1e-12


@pytest.mark.parametrize("n", [2, 7, 100])
def test_trapezoid_constant(n):
    assert periodic_trapezoid(lambda x: np.ones_like(x), 0.5, 3.0, n) == pytest.approx(2.5, abs=1e-14)


def test_trapezoid_log_closed_form():
    # (1/2pi) int log(a + b cos x) dx = log((a + sqrt(a^2 - b^2)) / 2), applied to
    # log((1 + cos^2 k)/2) = log(3 + cos 2k) - log 4
    exact = 2 * np.pi * np.log((3 + 2 * np.sqrt(2)) / 8)
    got = periodic_trapezoid(lambda k: np.log((1 + np.cos(k) ** 2) / 2), -np.pi, np.pi, 4096)
    assert abs(got - exact) < 1e-12


def test_trapezoid_spectral_convergence():
    from quench_echo.ising import ising_rate_closed

    assert abs(ising_rate_closed(0.3, 1.7, 512) - ising_rate_closed(0.3, 1.7, 1024)) < 1e-10


def test_trapezoid_reports_bad_abscissa():
    with np.errstate(divide="ignore"), pytest.raises(ValidationError, match="not finite at x"):
        periodic_trapezoid(lambda x: 1.0 / (x - x[3]), 0.0, 1.0, 8)


def test_trapezoid_needs_two_nodes():
    with pytest.raises(ValidationError):
        periodic_trapezoid(np.cos, 0, 1, 1)
