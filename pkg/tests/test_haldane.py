import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quench_echo.errors import DegenerateError, ValidationError
from quench_echo.haldane import (
    GEOMETRY,
    SQRT3,
    HaldaneParams,
    bloch_vector,
    bz_grid,
    chern_number,
    chi_lambda,
    critical_mass,
    haldane_bloch,
    haldane_rate,
    log_echo_per_mode,
)
from quench_echo.linalg import eig_hermitian

K_POINT = np.array([4 * np.pi / (3 * SQRT3), 0.0])


def test_geometry_invariants():
    g = GEOMETRY
    np.testing.assert_allclose(np.linalg.norm(g.e_vectors, axis=1), 1.0)
    np.testing.assert_allclose(np.linalg.norm(g.nu_vectors, axis=1), SQRT3)
    np.testing.assert_allclose(g.e_vectors.sum(axis=0), 0.0, atol=1e-15)
    np.testing.assert_allclose(g.nu_vectors.sum(axis=0), 0.0, atol=1e-15)
    np.testing.assert_allclose(g.b_vectors @ g.a_vectors.T, 2 * np.pi * np.eye(2), atol=1e-12)
    # next-nearest vectors are differences of nearest ones
    e = g.e_vectors
    np.testing.assert_allclose(g.nu_vectors[0], e[2] - e[1], atol=1e-15)


def test_bloch_at_gamma():
    p = HaldaneParams(M=0.8, phi=1.1)
    H = haldane_bloch(p, [0.0, 0.0]).entries
    assert H[0, 1] == pytest.approx(-3 * p.t1)
    h0, hx, hy, hz = bloch_vector(p, np.zeros(2))
    assert hz == pytest.approx(0.8, abs=1e-14)


def test_bloch_matches_explicit_entries(rng):
    p = HaldaneParams(M=1.3, phi=0.7, t1=4.0, t2=1.0)
    for k in rng.normal(size=(5, 2)) * 3:
        H = haldane_bloch(p, k).entries
        kn, ke = GEOMETRY.nu_vectors @ k, GEOMETRY.e_vectors @ k
        aa = p.M - 2 * p.t2 * np.sum(np.cos(kn + p.phi))
        bb = -p.M - 2 * p.t2 * np.sum(np.cos(kn - p.phi))
        ab = -p.t1 * np.sum(np.exp(-1j * ke))
        np.testing.assert_allclose(H, [[aa, ab], [np.conj(ab), bb]], atol=1e-12)


def test_time_reversal_symmetric_at_zero_phase():
    p = HaldaneParams(M=2.0, phi=0.0)
    h = np.stack(bloch_vector(p, bz_grid(8)), axis=-1)
    np.testing.assert_allclose(h[..., 3], 2.0)
    assert chern_number(p.replace(N=16)) == 0


def test_dirac_point_gap_closes_at_critical_mass():
    assert np.sum(np.sin(GEOMETRY.nu_vectors @ K_POINT)) == pytest.approx(-1.5 * SQRT3)
    p = HaldaneParams(M=3 * SQRT3, phi=np.pi / 2)
    h0, hx, hy, hz = bloch_vector(p, K_POINT)
    assert np.sqrt(hx ** 2 + hy ** 2 + hz ** 2) < 1e-12
    spec = eig_hermitian(haldane_bloch(p, K_POINT))
    assert spec.eigenvalues[1] - spec.eigenvalues[0] < 1e-12
    assert critical_mass(np.pi / 2) == pytest.approx(3 * SQRT3)


@pytest.mark.parametrize(
    "M,phi,c", [(0.0, np.pi / 2, -1), (3 * SQRT3, 0.0, 0), (0.0, -np.pi / 2, 1), (3.0, np.pi / 2, -1), (7.0, np.pi / 2, 0)]
)
def test_chern_values(M, phi, c):
    assert chern_number(HaldaneParams(M=M, phi=phi, N=48)) == c


@pytest.mark.parametrize("M,phi", [(0.0, np.pi / 2), (2.0, -1.0), (6.0, 0.5)])
def test_chern_grid_refinement(M, phi):
    assert chern_number(HaldaneParams(M=M, phi=phi, N=12)) == chern_number(HaldaneParams(M=M, phi=phi, N=24))


def test_chern_brackets_mass_boundary():
    step = 0.1
    Ms = np.arange(0.05, 8, step)
    cs = [chern_number(HaldaneParams(M=M, N=96)) for M in Ms]
    flips = [i for i in range(len(cs) - 1) if cs[i] != cs[i + 1]]
    assert len(flips) == 1
    i = flips[0]
    assert Ms[i] < 3 * SQRT3 < Ms[i + 1] and Ms[i + 1] - Ms[i] <= step + 1e-12


def test_chern_brackets_phase_boundary():
    step = 0.002 * np.pi
    phis = np.arange(0.001 * np.pi, 0.5 * np.pi, step)
    cs = [chern_number(HaldaneParams(M=3.0, phi=ph, N=96)) for ph in phis]
    flips = [i for i in range(len(cs) - 1) if cs[i] != cs[i + 1]]
    assert len(flips) == 1
    target = np.arcsin(3.0 / (3 * SQRT3))
    assert target / np.pi == pytest.approx(0.19591, abs=1e-5)
    assert phis[flips[0]] < target < phis[flips[0] + 1]


def _chern_switch(N):
    lo, hi = 4.5, 5.6
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if chern_number(HaldaneParams(M=mid, N=N)) == -1:
            lo = mid
        else:
            hi = mid
    return lo


def test_chern_switch_converges_to_gap_closing():
    # the plaquette sum flips slightly inside the topological side; the shift
    # shrinks like 1/N^2
    shifts = [3 * SQRT3 - _chern_switch(N) for N in (24, 48, 96)]
    assert all(s > 0 for s in shifts)
    assert 3.5 < shifts[0] / shifts[1] < 4.5
    assert 3.5 < shifts[1] / shifts[2] < 4.5


def test_gapless_mode_rejected():
    from quench_echo.haldane import haldane_modes

    modes = haldane_modes(HaldaneParams(M=3 * SQRT3), K_POINT[None, :], tol=1e-10)
    with pytest.raises(DegenerateError, match="gapless"):
        modes.require_gapped("Haldane Hamiltonian", where=K_POINT[None, :])


def test_rate_identity_quench():
    p = HaldaneParams(M=1.0, N=16)
    assert haldane_rate(p, p) == pytest.approx(0.0, abs=1e-15)


def test_rate_smooth_increase_in_mass():
    p = HaldaneParams(M=0.0, N=32)
    Ms = np.linspace(0, 8, 41)
    eta = np.array([haldane_rate(p, p.replace(M=M)) for M in Ms])
    assert np.all(np.diff(eta) > 0)
    # no visible kink: first differences change gradually
    d = np.diff(eta)
    assert np.max(np.abs(np.diff(d))) < 0.2 * np.max(d)


@settings(max_examples=60, deadline=None)
@given(
    st.floats(-8, 8), st.floats(-8, 8), st.floats(-np.pi, np.pi), st.floats(-np.pi, np.pi)
)
def test_rate_bounds(Mi, Mf, phi_i, phi_f):
    p_i = HaldaneParams(M=Mi, phi=phi_i, N=8)
    try:
        eta = haldane_rate(p_i, HaldaneParams(M=Mf, phi=phi_f, N=8))
    except DegenerateError:
        return
    assert 0.0 <= eta <= np.log(2) + 1e-15


def test_rate_invariant_under_k_reversal():
    p_i, p_f = HaldaneParams(M=0.5, phi=1.0, N=20), HaldaneParams(M=4.0, phi=2.0, N=20)
    k = bz_grid(20)
    a = -np.mean(log_echo_per_mode(p_i, p_f, k))
    b = -np.mean(log_echo_per_mode(p_i, p_f, -k[::-1, ::-1]))
    assert a == pytest.approx(b, abs=1e-13)
    assert a == pytest.approx(haldane_rate(p_i, p_f), abs=1e-15)


def test_rate_requires_shared_geometry():
    with pytest.raises(ValidationError):
        haldane_rate(HaldaneParams(N=8), HaldaneParams(N=16))


def test_chi_lambda_exact_for_quadratics():
    a, b, c, lam, h = 0.37, -1.2, 4.0, 0.8, 0.05
    f = lambda x: a * x * x + b * x + c
    assert chi_lambda((f(lam - h), f(lam), f(lam + h)), h) == pytest.approx(-2 * a, rel=1e-9)
    with pytest.raises(ValidationError):
        chi_lambda((0, 0, 0), 0.0)


def test_mass_peak_near_boundary():
    Ms = np.linspace(4.5, 6.0, 76)
    p = HaldaneParams(M=0.0, N=64)
    eta = np.array([haldane_rate(p, p.replace(M=M)) for M in Ms])
    h = Ms[1] - Ms[0]
    chi = [chi_lambda(eta[i - 1:i + 2], h) for i in range(1, 75)]
    peak = Ms[1 + int(np.argmax(chi))]
    assert abs(peak - 3 * SQRT3) <= h + 1e-12


def test_params_validation():
    with pytest.raises(ValidationError):
        HaldaneParams(N=3)
    with pytest.raises(ValidationError):
        HaldaneParams(t2=0.0)
    assert HaldaneParams(N=10).sites == 200
