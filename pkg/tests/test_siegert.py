import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import shooting_bound_states
from scatter1d import siegert as S
from scatter1d import transmission_scan
from scatter1d.errors import (OutOfBox, PoleProximityWarning, SupportExceedsBox, WindowUncovered,
                              ZeroEigenvalue)
from scatter1d.model import DEFAULT, Potential


def _well(x):
    return np.where(np.abs(x) < 3, -np.cos(np.pi * x / 6) ** 4, 0.0)


WELL = Potential(_well, 3.0, "well")


@pytest.fixture(scope="module")
def small_box(jolanta):
    # short box: the potential is cut off at |x| = 6, but every identity is well conditioned
    return S.siegert_spectrum(jolanta, 40, 6.0, range_tolerance=1.0)


@pytest.fixture(scope="module")
def well_spec():
    return S.siegert_spectrum(WELL, 20, 3.0)


@pytest.fixture(scope="module")
def converged(jolanta):
    return S.siegert_spectrum(jolanta, 80, 15.0)


@pytest.mark.parametrize("kind", ["legendre", "fourier"])
def test_basis_is_orthonormal(kind):
    b = S.build_basis(kind, 4.0, 24)
    assert np.max(np.abs(b.gram() - np.eye(24))) < 1e-12


def test_basis_derivatives_match_finite_differences():
    b = S.build_basis("legendre", 2.5, 12)
    x = np.linspace(-2.4, 2.4, 7)
    h = 1e-6
    fd = (b.values(x + h) - b.values(x - h)) / (2 * h)
    assert np.max(np.abs(fd - b.derivatives(x))) < 1e-6


def test_matrices_are_symmetric(jolanta):
    m = S.build_matrices(jolanta, S.build_basis("legendre", 15.0, 30))
    assert np.array_equal(m.A, m.A.T)
    assert np.allclose(m.B, m.B.T)
    assert np.linalg.matrix_rank(m.L) == 2


def test_box_must_hold_the_potential(jolanta):
    with pytest.raises(SupportExceedsBox):
        S.siegert_spectrum(jolanta, 20, 10.0)


def test_spectrum_shape_and_order(small_box):
    assert small_box.lam.size == 80
    key = list(zip(small_box.lam.real, small_box.lam.imag))
    assert key == sorted(key)
    # real A and B: eigenvalues come in conjugate pairs
    assert S.conjugation_asymmetry(small_box) < 1e-8


@pytest.mark.parametrize("spec_name", ["small_box", "well_spec"])
def test_algebraic_identities(spec_name, request):
    spec = request.getfixturevalue(spec_name)
    tol = 1e-8 if spec_name == "small_box" else 1e-3
    assert S.qep_residuals(spec).max() < 1e-8
    assert S.normalization_residual(spec) < tol
    for v in S.closure_residuals(spec).values():
        assert v < tol
    assert S.m_inverse_residual(spec, [0.3 + 0.2j, -0.7 + 0.4j, 1.1 - 0.5j]) < tol


def test_fourier_identities_hold_to_roundoff():
    spec = S.siegert_spectrum(WELL, 24, 3.0, "fourier")
    assert S.normalization_residual(spec) < 1e-10
    assert max(S.closure_residuals(spec).values()) < 1e-10


def test_identities_degrade_with_resolution(jolanta):
    # the deepest pseudostates get exponentially large inside the box as N/a grows
    r = [max(S.closure_residuals(S.siegert_spectrum(WELL, n, 3.0)).values()) for n in (16, 24, 32)]
    assert r[0] < r[1] < r[2]


def test_transmission_matches_fd_on_compact_well(well_spec):
    E = np.linspace(0.1, 2.0, 60)
    assert np.max(np.abs(S.siegert_transmission(well_spec, E) - transmission_scan(WELL, E).T)) < 1e-4


def test_bound_states_of_compact_well(well_spec):
    ref = shooting_bound_states(WELL, -0.99, -1e-3, X=8.0, xm=0.37, n_scan=60)
    cls = S.classify_spectrum(well_spec)
    got = np.sort(well_spec.E[cls.bound].real)
    assert got.size == len(ref) == 2
    assert np.max(np.abs(got - np.sort(ref))) < 1e-6


def test_fourier_basis_agrees_on_even_ground_state(well_spec):
    four = S.siegert_spectrum(WELL, 24, 3.0, "fourier")
    e_l = np.sort(well_spec.E[S.classify_spectrum(well_spec).bound].real)[0]
    e_f = np.sort(four.E[S.classify_spectrum(four).bound].real)[0]
    assert abs(e_l - e_f) < 1e-3


def test_siegert_green_matches_fd_green(well_spec):
    from scatter1d import green
    from scatter1d.fdsolver import solve_left_incident, solve_right_incident

    E = 0.7
    p, m = solve_right_incident(WELL, E), solve_left_incident(WELL, E)
    xs = np.array([-2.0, 3.0, -3.0])
    ys = np.array([1.0, -3.0, 2.0])
    gs = S.siegert_green(well_spec, E, xs, ys)
    gf = green.full_green_retarded(p, m, xs, ys)
    rel = np.abs(gs - gf) / np.abs(gf)
    assert rel[1:].max() < 1e-4
    assert rel[0] < 1e-2
    # on the diagonal the kink in G makes the pseudostate sum converge slowly
    g0 = green.full_green_retarded(p, m, 0.0, 0.0)
    d = [abs(S.siegert_green(S.siegert_spectrum(WELL, n, 3.0), E, 0.0, 0.0) - g0) for n in (12, 20, 28)]
    assert d[0] > d[1] > d[2]


def test_green_domain_and_pole_warning(well_spec):
    with pytest.raises(OutOfBox):
        S.siegert_green(well_spec, 0.5, 3.5, 0.0)
    i = S.classify_spectrum(well_spec).bound[0]
    with pytest.warns(PoleProximityWarning):
        S._pole_check(np.array([well_spec.k[i] + 1e-14]), well_spec.k)


def test_roundtrip_serialization(well_spec):
    back = S.SiegertSpectrum.from_dict(well_spec.to_dict())
    assert np.allclose(back.lam, well_spec.lam, rtol=0, atol=1e-14)
    assert np.allclose(back.c, well_spec.c, rtol=0, atol=1e-12)
    E = np.linspace(0.2, 1.5, 7)
    assert np.allclose(S.siegert_transmission(back, E), S.siegert_transmission(well_spec, E))


def test_resonance_classification(converged):
    cls = S.classify_spectrum(converged)
    i = S.find_resonance(converged, 0.621)
    assert cls.label(i) == "resonance"
    E = converged.E[i]
    assert E.real == pytest.approx(0.6209710, abs=1e-6)
    assert -2 * E.imag == pytest.approx(1.1653e-4, rel=1e-3)
    assert cls.bound.size == 1


def test_breit_wigner_report(converged, jolanta):
    from scatter1d.workflows import local_fd_curve

    i = S.find_resonance(converged, 0.621)
    E_n = converged.E[i]
    fe, ft = local_fd_curve(jolanta, E_n.real, -2 * E_n.imag, 1e-3, DEFAULT)
    rec = S.breit_wigner_report(converged, fe, ft, i)
    assert rec.Q == pytest.approx(1, abs=0.05)
    assert rec.fit_rms < 0.01
    with pytest.raises(WindowUncovered):
        S.breit_wigner_report(converged, np.linspace(0.1, 2, 2000), np.zeros(2000), i)


def test_lorentzian_peak():
    assert S.lorentzian(1.0, 1.0, 0.2) == 1.0
    assert S.lorentzian(1.1, 1.0, 0.2) == pytest.approx(0.5)


def test_zero_eigenvalue_is_rejected():
    b = S.build_basis("legendre", 1.0, 4)
    m = S.build_matrices(Potential(np.zeros_like, 1.0), b)
    # V = 0 with a constant basis function gives lambda = 0 exactly
    with pytest.raises(ZeroEigenvalue):
        S.solve_qep(m)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(3, 8))
def test_identities_for_random_symmetric_pencils(seed, n):
    rng = np.random.default_rng(seed)
    H = rng.normal(size=(n, n))
    H = H @ H.T + 0.5 * np.eye(n)
    b1, b2 = rng.normal(size=n), rng.normal(size=n)
    L = 0.5 * (np.outer(b1, b1) + np.outer(b2, b2))
    basis = S.build_basis("legendre", 1.0, n)
    m = S.SiegertMatrices(H, L, 2 * H, -2 * L, basis, DEFAULT)
    try:
        spec = S.solve_qep(m)
    except Exception:
        return  # accidentally degenerate draw
    scale = max(1.0, np.max(np.abs(spec.c)) ** 2)
    assert S.normalization_residual(spec) < 1e-9 * scale
    for v in S.closure_residuals(spec).values():
        assert v < 1e-8 * scale * max(1.0, np.abs(spec.lam).max())
