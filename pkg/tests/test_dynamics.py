import math
from dataclasses import replace

import numpy as np
import pytest
import scipy.linalg as sla
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from bimodal_cavity import numcore
from bimodal_cavity.dynamics import (
    DensityMatrix,
    evolve,
    expect,
    g2_zero,
    liouvillian,
    observables,
    pad_state,
    steady_state,
    unvec,
    vec,
)
from bimodal_cavity.errors import (
    DimensionMismatch,
    InvalidParameter,
    InvariantViolation,
    Singular,
    StabilityGuard,
    UnknownLabel,
)
from bimodal_cavity.model import TWO_PI, HilbertSpace, RateParams, SystemModel, annihilation, build
from bimodal_cavity.numcore import DEFAULT_SETTINGS


def mode_state(populations_or_amplitudes, coherent=False, N=40):
    """Density matrix on [QD, mode] with the QD in |g>."""
    space = HilbertSpace((2, N))
    rho_mode = np.zeros((N, N), dtype=complex)
    v = np.asarray(populations_or_amplitudes, dtype=complex)
    if coherent:
        rho_mode = np.outer(v, v.conj())
    else:
        rho_mode[np.diag_indices(len(v))] = v
    qd = np.diag([1.0, 0.0])
    return DensityMatrix(space, np.kron(qd, rho_mode))


def mode_a(N=40):
    return numcore.kron(sp.identity(2, format="csr"), annihilation(N))


def random_density(rng, d):
    X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = X @ X.conj().T
    return rho / np.trace(rho)


def lindblad_rhs(m, rho):
    """-i[H, rho] + sum r (D rho D^+ - {D^+ D, rho}/2), dense reference."""
    H = numcore.to_dense(m.hamiltonian)
    out = -1j * (H @ rho - rho @ H)
    for r, D in m.collapses:
        D = numcore.to_dense(D)
        DdD = D.conj().T @ D
        out += r * (D @ rho @ D.conj().T - 0.5 * (DdD @ rho + rho @ DdD))
    return out


def empty_cavity(kappa=20.0, E=1.0, delta=0.0, N=12):
    """Single-mode model with the QD decoupled: a driven, damped empty cavity."""
    return build("single", RateParams(g_a=0.0, kappa_a=kappa, drive_E=E, delta=delta, fock_trunc=N))


# --- vectorization and Liouvillian --------------------------------------

def test_vec_is_column_stacking():
    X = np.arange(6).reshape(2, 3)
    np.testing.assert_array_equal(vec(X), [0, 3, 1, 4, 2, 5])
    A, B, Y = np.random.default_rng(0).normal(size=(3, 3, 3))
    np.testing.assert_allclose(vec(A @ Y @ B), np.kron(B.T, A) @ vec(Y))
    np.testing.assert_array_equal(unvec(vec(Y), 3), Y)


def test_liouvillian_zero_without_dynamics():
    space = HilbertSpace((2, 3))
    zero = sp.csr_matrix((6, 6), dtype=complex)
    m = SystemModel(space, zero, (), {"a": zero}, {"a": 1.0}, 1.0)
    assert liouvillian(m).nnz == 0 or abs(liouvillian(m)).max() == 0


@pytest.mark.parametrize("system", ["single", "bimodal", "effective", "molecule"])
def test_liouvillian_matches_master_equation(system):
    m = build(system, RateParams(delta=3.0, fock_trunc=3))
    rng = np.random.default_rng(5)
    rho = random_density(rng, m.space.total)
    np.testing.assert_allclose(unvec(liouvillian(m) @ vec(rho), m.space.total), lindblad_rhs(m, rho), atol=1e-9)


@settings(max_examples=25, deadline=None)
@given(
    st.sampled_from(["single", "bimodal", "molecule"]),
    st.floats(0, 30), st.floats(0.1, 30), st.floats(0, 5), st.floats(-20, 20), st.integers(0, 2**32 - 1),
)
def test_liouvillian_preserves_trace_and_hermiticity(system, g, kappa, gamma, delta, seed):
    m = build(system, RateParams(g_a=g, g_b=g, kappa_a=kappa, kappa_b=kappa, gamma=gamma, delta=delta, fock_trunc=3))
    L = liouvillian(m)
    d = m.space.total
    rho = random_density(np.random.default_rng(seed), d)
    out = unvec(L @ vec(rho), d)
    scale = abs(L).max()
    assert abs(np.trace(out)) < 1e-10 * scale
    assert numcore.hermiticity_error(out) < 1e-10 * scale


# --- steady state -------------------------------------------------------

def test_undriven_steady_state_is_vacuum():
    m = build("bimodal", RateParams(drive_E=0.0, fock_trunc=4))
    rho = steady_state(m).matrix
    expected = np.zeros_like(rho)
    expected[0, 0] = 1.0
    np.testing.assert_allclose(rho, expected, atol=1e-12)
    obs = observables(m, steady_state(m), "a")
    assert obs.occupation == pytest.approx(0.0, abs=1e-14) and obs.g2 is None


def test_driven_empty_cavity():
    m = empty_cavity()
    obs = observables(m, steady_state(m), "a")
    assert obs.occupation == pytest.approx(0.0025, abs=1e-9)
    assert obs.transmission == pytest.approx(1.0**2 / 20.0, abs=1e-9)
    assert obs.g2 == pytest.approx(1.0, abs=1e-6)


def test_driven_empty_cavity_detuned():
    # Lorentzian: |alpha|^2 = E^2 / (kappa^2 + delta^2)
    m = empty_cavity(delta=15.0)
    assert observables(m, steady_state(m), "a").occupation == pytest.approx(1 / (400 + 225), rel=1e-8)


def test_steady_state_needs_dissipation():
    m = build("bimodal", RateParams(kappa_a=0, kappa_b=0, gamma=0, fock_trunc=3))
    with pytest.raises(Singular):
        steady_state(m)


def test_iterative_and_direct_paths_agree():
    m = build("bimodal", RateParams(fock_trunc=6))
    direct = steady_state(m, replace(DEFAULT_SETTINGS, direct_limit=10**6)).matrix
    iterative = steady_state(m, replace(DEFAULT_SETTINGS, direct_limit=0)).matrix
    np.testing.assert_allclose(iterative, direct, atol=1e-12)


def test_steady_state_is_liouvillian_null_vector():
    """Independent route: eigenvector of the dense Liouvillian for the eigenvalue nearest 0."""
    m = build("bimodal", RateParams(g_a=12, g_b=7, delta=4, fock_trunc=4))
    d = m.space.total
    w, V = sla.eig(liouvillian(m).toarray())
    null = unvec(V[:, np.argmin(np.abs(w))], d)
    null = null / np.trace(null)
    rho = steady_state(m, replace(DEFAULT_SETTINGS, direct_limit=0)).matrix
    np.testing.assert_allclose(rho, null, atol=1e-10)


def test_steady_state_warm_start_gives_same_state():
    small = steady_state(build("bimodal", RateParams(fock_trunc=6)))
    m = build("bimodal", RateParams(fock_trunc=8))
    np.testing.assert_allclose(steady_state(m, guess=small).matrix, steady_state(m).matrix, atol=1e-12)


def test_pad_state():
    rho = DensityMatrix.pure(HilbertSpace((2, 3)), (1, 2))
    big = pad_state(rho, HilbertSpace((2, 5)))
    assert big[7, 7] == 1 and np.count_nonzero(big) == 1
    with pytest.raises(DimensionMismatch):
        pad_state(rho, HilbertSpace((2, 2)))


@pytest.mark.parametrize("system", ["single", "bimodal", "effective", "molecule"])
def test_steady_state_invariants(system):
    m = build(system, RateParams())
    rho = steady_state(m)
    L = liouvillian(m)
    assert np.linalg.norm(L @ vec(rho.matrix)) <= 1e-8 * sp.linalg.norm(L)
    assert abs(np.trace(rho.matrix) - 1) < 1e-9
    assert numcore.hermiticity_error(rho.matrix) < 1e-9
    assert np.linalg.eigvalsh(rho.matrix).min() > -1e-8


def test_reference_point_values():
    # observed photon statistics at the default parameters, N = 8
    bimodal = build("bimodal", RateParams())
    rho = steady_state(bimodal)
    g2_a = observables(bimodal, rho, "a").g2
    g2_b = observables(bimodal, rho, "b").g2
    assert 0.3 <= g2_a <= 0.5
    assert g2_b < 1
    single = build("single", RateParams())
    assert observables(single, steady_state(single), "a").g2 > 1


def test_effective_model_matches_bimodal():
    for delta in (-14.0, 0.0, 6.5):
        p = RateParams(g_a=10, g_b=7, delta=delta)
        ref, eff = build("bimodal", p), build("effective", p)
        ra, rb = steady_state(ref), steady_state(eff)
        for label in ("a", "b"):
            o1, o2 = observables(ref, ra, label), observables(eff, rb, label)
            assert o2.occupation == pytest.approx(o1.occupation, rel=1e-6)
            assert o2.g2 == pytest.approx(o1.g2, rel=1e-6)


# --- time evolution -----------------------------------------------------

def test_evolve_zero_time():
    m = empty_cavity(N=4)
    rho0 = DensityMatrix.pure(m.space, (0, 1))
    assert evolve(m, rho0, 0.0, 1e-4) is rho0


def test_evolve_photon_decay_law():
    N = 4
    m = build("single", RateParams(g_a=0, drive_E=0, kappa_a=20, fock_trunc=N))
    kappa = TWO_PI * 20
    t = 1 / (2 * kappa)
    rho = evolve(m, DensityMatrix.pure(m.space, (0, 1)), t, 1e-5)
    n = observables(m, rho, "a").occupation
    assert n == pytest.approx(math.exp(-2 * kappa * t), abs=1e-6)
    for t in (0.5e-3, 2e-3):
        rho = evolve(m, DensityMatrix.pure(m.space, (0, 1)), t, 1e-5)
        assert observables(m, rho, "a").occupation == pytest.approx(math.exp(-2 * kappa * t), abs=1e-6)


def test_evolve_guards():
    m = empty_cavity(N=4)
    rho0 = DensityMatrix.pure(m.space, 0)
    with pytest.raises(StabilityGuard):
        evolve(m, rho0, 1.0, 1.0)
    with pytest.raises(InvalidParameter):
        evolve(m, rho0, 1.0, -1e-5)
    other = DensityMatrix.pure(HilbertSpace((2, 5)), 0)
    with pytest.raises(DimensionMismatch):
        evolve(m, other, 1e-3, 1e-5)


def test_steady_state_is_rk4_fixed_point():
    m = build("bimodal", RateParams())
    rho = steady_state(m)
    dt = 0.1 / m.rate_scale
    stepped = evolve(m, rho, dt, dt)
    assert np.abs(stepped.matrix - rho.matrix).max() < 1e-9


@pytest.mark.slow
def test_long_evolution_reaches_steady_state():
    m = build("bimodal", RateParams())
    t_final = 20 / 20.0  # 20 / kappa with kappa in GHz: 1 ns
    rho_t = evolve(m, DensityMatrix.pure(m.space, 0), t_final, 0.1 / m.rate_scale)
    rho_ss = steady_state(m)
    for label in ("a", "b"):
        a, b = observables(m, rho_t, label), observables(m, rho_ss, label)
        assert a.occupation == pytest.approx(b.occupation, abs=1e-6)
        assert a.transmission == pytest.approx(b.transmission, abs=1e-6)
        assert a.g2 == pytest.approx(b.g2, abs=1e-6)


# --- expectation values and g2 ------------------------------------------

def test_expect():
    rho = mode_state([0, 0, 1], N=5)
    a = mode_a(5)
    assert expect(sp.identity(10), rho) == pytest.approx(1)
    assert expect(numcore.dagger(a) @ a, rho) == pytest.approx(2)
    with pytest.raises(DimensionMismatch):
        expect(sp.identity(3), rho)
    m = build("bimodal", RateParams(fock_trunc=3))
    r = DensityMatrix(m.space, random_density(np.random.default_rng(2), m.space.total))
    assert abs(expect(m.hamiltonian, r).imag) < 1e-10


def test_g2_fock_states():
    assert g2_zero(mode_a(), mode_state([0, 1])) == pytest.approx(0.0, abs=1e-15)
    assert g2_zero(mode_a(), mode_state([0, 0, 1])) == pytest.approx(0.5, abs=1e-15)


@given(st.integers(1, 30))
def test_g2_fock_property(n):
    pops = np.zeros(n + 1)
    pops[n] = 1
    assert g2_zero(mode_a(), mode_state(pops)) == pytest.approx((n - 1) / n, abs=1e-12)


def test_g2_thermal():
    nbar, N = 0.1, 20
    k = np.arange(N)
    pops = nbar**k / (1 + nbar) ** (k + 1)
    pops /= pops.sum()
    assert g2_zero(mode_a(N), mode_state(pops, N=N)) == pytest.approx(2.0, abs=1e-3)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 2.0), st.floats(0, 2 * math.pi))
def test_g2_coherent(amplitude, phase):
    N = 40
    alpha = amplitude * np.exp(1j * phase)
    k = np.arange(N)
    log_fact = np.array([math.lgamma(j + 1) for j in k])
    coeffs = np.exp(-abs(alpha) ** 2 / 2 - 0.5 * log_fact) * alpha**k
    assert g2_zero(mode_a(N), mode_state(coeffs, coherent=True, N=N)) == pytest.approx(1.0, abs=1e-9)


def test_g2_undefined_for_vacuum():
    assert g2_zero(mode_a(), mode_state([1])) is None


def test_observables_unknown_label():
    m = build("single", RateParams(fock_trunc=3))
    with pytest.raises(UnknownLabel):
        observables(m, steady_state(m), "b")


# --- density matrix -----------------------------------------------------

def test_density_matrix_validation():
    space = HilbertSpace((2, 2))
    DensityMatrix.pure(space, (1, 1)).validate()
    with pytest.raises(InvariantViolation):
        DensityMatrix(space, 2 * np.eye(4) / 4).validate()
    with pytest.raises(InvariantViolation):
        DensityMatrix(space, np.diag([1.5, -0.5, 0, 0]).astype(complex)).validate()
    bad = np.eye(4, dtype=complex) / 4
    bad[0, 1] = 0.1
    with pytest.raises(InvariantViolation):
        DensityMatrix(space, bad).validate()
    with pytest.raises(DimensionMismatch):
        DensityMatrix(space, np.eye(3))
