"""Modal core: eigenvalues, norms, basis synthesis, kernels, histories."""

import math

import numpy as np
import pytest

from viscobeam.spectral import (
    LAMBDA_1,
    PI2,
    PI4,
    BeamParams,
    HistoryError,
    HistoryState,
    KernelError,
    MemoryKernel,
    ModalState,
    dissipation_functional,
    eigenvalue,
    evaluate_physical,
    memory_norm_sq,
    modal_norms,
)

PI = math.pi


def test_eigenvalues():
    assert eigenvalue(1) == pytest.approx(97.40909103400243, rel=1e-14)
    assert eigenvalue(2) == pytest.approx(16 * PI4, rel=1e-14)
    assert eigenvalue(3) == pytest.approx(81 * PI4, rel=1e-14)
    with pytest.raises(ValueError):
        eigenvalue(0)


def test_norms_frozen_values():
    # physical shape sin(pi x) has modal coefficient 1/sqrt(2); direct
    # integration of sin(pi x) and its derivatives on [0,1] gives the triple
    s = ModalState(np.array([1 / math.sqrt(2)]), np.array([0.0]))
    l2, h1, h2 = modal_norms(s)
    assert l2 == pytest.approx(0.5, rel=1e-14)
    assert h1 == pytest.approx(PI2 / 2, rel=1e-14)
    assert h2 == pytest.approx(PI4 / 2, rel=1e-14)

    assert modal_norms(ModalState.zero(4)) == (0.0, 0.0, 0.0)

    l2, h1, h2 = modal_norms(ModalState(np.array([1.0, 1.0]), np.zeros(2)))
    assert l2 == pytest.approx(2.0, rel=1e-14)
    assert h1 == pytest.approx(5 * PI2, rel=1e-14)
    assert h2 == pytest.approx(17 * PI4, rel=1e-14)


def test_norms_match_quadrature():
    # L2 norm of each basis function via evaluate_physical and a 1000-point
    # grid must match the modal value (orthonormality of the sine basis)
    x = np.linspace(0.0, 1.0, 1001)
    for n in range(1, 9):
        c = np.zeros(n)
        c[n - 1] = 1.0
        u = evaluate_physical(ModalState(c, np.zeros(n)), x)
        mass = np.trapz(u * u, x)
        assert mass == pytest.approx(1.0, abs=1e-6)
    # cross terms vanish
    u1 = evaluate_physical(ModalState(np.array([1.0, 0.0]), np.zeros(2)), x)
    u2 = evaluate_physical(ModalState(np.array([0.0, 1.0]), np.zeros(2)), x)
    assert abs(np.trapz(u1 * u2, x)) < 1e-6


def test_poincare_chain():
    rng = np.random.default_rng(42)
    for _ in range(50):
        n = rng.integers(1, 12)
        s = ModalState(rng.normal(size=n), rng.normal(size=n))
        l2, h1, h2 = modal_norms(s)
        slack = 1e-12 * (1.0 + h2)
        assert h2 + slack >= PI2 * h1
        assert h1 + slack >= PI2 * l2  # sqrt(lambda_1) = pi^2


def test_evaluate_physical():
    s = ModalState(np.array([1 / math.sqrt(2)]), np.zeros(1))
    assert evaluate_physical(s, 0.0) == 0.0
    assert evaluate_physical(s, 1.0) == pytest.approx(0.0, abs=1e-15)
    assert evaluate_physical(s, 0.5) == pytest.approx(1.0, rel=1e-14)
    s2 = ModalState(np.array([0.0, 1.0]), np.zeros(2))
    assert evaluate_physical(s2, 0.5) == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(ValueError):
        evaluate_physical(s, 1.2)
    with pytest.raises(ValueError):
        evaluate_physical(s, -0.1)


def test_beam_params_validation():
    with pytest.raises(ValueError):
        BeamParams(beta=0.0, k=-1.0)
    p = BeamParams(beta=1.0, k=2.0, f_modes=(1.0, 2.0))
    assert p.f_norm_sq() == pytest.approx(5.0)
    assert np.allclose(p.f_vector(4), [1.0, 2.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        p.f_vector(1)


class TestMemoryKernel:
    def test_exponential_mass_identity(self):
        # trapezoid mass on [0, s_max] plus the analytic tail recovers kappa
        kern = MemoryKernel.exponential(1.0, 0.5)
        s = np.linspace(0.0, 1.0, 100_001)
        mass = np.trapz(kern.mu_on_grid(s), s) + kern.tail_mass(1.0)
        assert abs(mass - kern.kappa) < 1e-12

    def test_tabulated_accepts_margin(self):
        # table decaying at rate 1 passes when the declared rate leaves room
        # for the forward-difference bias of a convex decreasing sample set
        ds = 0.01
        s = np.arange(0, 3000) * ds
        values = 0.5 * np.exp(-s)
        kern = MemoryKernel.tabulated(delta=0.9, kappa=0.5, ds=ds, values=values)
        assert kern.kind == "tabulated"
        assert kern.tail_mass(kern.s_end) == 0.0

    def test_tabulated_rejects_equal_rate(self):
        ds = 0.01
        s = np.arange(0, 3000) * ds
        values = 0.5 * np.exp(-s)
        with pytest.raises(KernelError):
            MemoryKernel.tabulated(delta=1.0, kappa=0.5, ds=ds, values=values)

    def test_tabulated_rejects_bad_tables(self):
        ds = 0.01
        s = np.arange(0, 1000) * ds
        good = 0.5 * np.exp(-s)
        with pytest.raises(KernelError):  # negative sample
            MemoryKernel.tabulated(0.5, 0.5, ds, good - 1.0)
        with pytest.raises(KernelError):  # increasing
            MemoryKernel.tabulated(0.5, 0.5, ds, good[::-1])
        with pytest.raises(KernelError):  # mass off by more than 1%
            MemoryKernel.tabulated(0.5, 0.5, ds, 3.0 * good)
        with pytest.raises(KernelError):
            MemoryKernel.exponential(-1.0, 0.5)


class TestHistory:
    def test_moment_invariants(self):
        with pytest.raises(HistoryError):
            HistoryState.moments(np.zeros(2), np.array([-1.0, 0.0]))
        h = HistoryState.zero_moments(3)
        assert h.n_modes == 3

    def test_moments_from_table_against_closed_form(self):
        # eta0(s) = 1 - exp(-s) on mode 1 with mu = kappa delta exp(-delta s):
        # w = kappa - kappa delta/(delta+1), m = kappa - 2 kappa delta/(delta+1)
        #     + kappa delta/(delta+2)
        kern = MemoryKernel.exponential(1.0, 0.5)
        ds = 1e-3
        s = np.arange(0, 25_001) * ds
        eta0 = (1.0 - np.exp(-s))[:, None]
        h = HistoryState.moments_from_table(eta0, ds, kern)
        assert h.w[0] == pytest.approx(0.25, abs=1e-6)
        assert h.m[0] == pytest.approx(0.5 - 0.5 + 0.5 / 3.0, abs=1e-6)

    def test_memory_norm_and_dissipation_moment_form(self):
        h = HistoryState.moments(np.array([0.1]), np.array([0.3]))
        kern = MemoryKernel.exponential(2.0, 0.5)
        assert memory_norm_sq(h, kern) == pytest.approx(PI4 * 0.3, rel=1e-14)
        assert dissipation_functional(h, kern) == pytest.approx(2.0 * PI4 * 0.3, rel=1e-14)
        zero = HistoryState.zero_moments(1)
        assert dissipation_functional(zero, kern) == 0.0

    def test_sampled_form_quadrature(self):
        # sampled history with known eta against dense-reference integrals
        kern = MemoryKernel.exponential(1.0, 0.5)
        ds = 1e-3
        s = np.arange(0, 20_001) * ds
        c_now = 0.7
        past = c_now - (1.0 - np.exp(-s))  # so eta(s) = 1 - exp(-s)
        h = HistoryState.sampled(ds, past[:, None])
        got = memory_norm_sq(h, kern)
        want = LAMBDA_1 * (0.5 - 1.0 + 0.5 / 3.0 + 0.5)  # lambda_1 * m from above
        assert got == pytest.approx(want, rel=1e-5)

    def test_tabulated_dissipation_inequality(self):
        # forward-difference -mu' inherits the decay inequality sample-wise,
        # so J >= delta * ||eta||_mu^2 discretely as well
        ds = 0.005
        s = np.arange(0, 4000) * ds
        table = 0.5 * np.exp(-s)
        kern = MemoryKernel.tabulated(delta=0.8, kappa=0.5, ds=ds, values=table)
        rng = np.random.default_rng(3)
        past = rng.normal(size=(s.size, 2)) * 0.1
        past[0] = 0.3
        h = HistoryState.sampled(ds, past)
        j = dissipation_functional(h, kern)
        bound = kern.delta * memory_norm_sq(h, kern)
        assert j >= bound * (1.0 - 1e-12)
