"""Steady states: thresholds, resonances, enumeration, residual oracles."""

import math

import numpy as np
import pytest

from viscobeam.spectral import PI2, PI4, BeamParams, ModalState
from viscobeam.statics import (
    bifurcation_sweep,
    branch_amplitude,
    buckled_mode_count,
    buckling_load,
    critical_load,
    critical_mode,
    enumerate_equilibria,
    resonance,
    resonance_from_ratio,
    resonant_pairs,
    static_residual,
)


def test_buckling_load_values():
    assert buckling_load(PI4, 1) == pytest.approx(2 * PI2, rel=1e-14)
    assert buckling_load(0.0, 2) == pytest.approx(4 * PI2, rel=1e-14)
    assert buckling_load(9 * PI4, 2) == pytest.approx(6.25 * PI2, rel=1e-14)
    assert buckling_load(9 * PI4, 2) == pytest.approx(61.6850275068, rel=1e-9)


def test_critical_mode_bracketing():
    assert critical_mode(0.0) == 1
    assert critical_mode(9 * PI4) == 2
    assert critical_mode(40 * PI4) == 3
    # brute-force minimizer agreement on a k sweep
    for k in np.linspace(0.0, 300 * PI4, 151):
        n_k = critical_mode(k)
        mus = [buckling_load(k, n) for n in range(1, 12)]
        assert buckling_load(k, n_k) == pytest.approx(min(mus), rel=1e-14)


def test_critical_load_values():
    assert critical_load(PI4) == pytest.approx(2 * PI2, rel=1e-14)
    assert critical_load(9 * PI4) == pytest.approx(6.25 * PI2, rel=1e-14)
    assert critical_load(30 * PI4) == pytest.approx(11.5 * PI2, rel=1e-14)
    assert critical_load(30 * PI4) == pytest.approx(113.500, abs=5e-3)


def test_critical_load_piecewise_junctions():
    # at k = n^2 (n+1)^2 pi^4 the two neighboring thresholds coincide
    for n in range(1, 5):
        k = n * n * (n + 1) * (n + 1) * PI4
        assert abs(buckling_load(k, n) - buckling_load(k, n + 1)) < 1e-9


def test_am_gm_lower_bound():
    # mu_n(k) >= 2 sqrt(k), equality exactly when n^2 pi^2 = sqrt(k)
    for k in np.linspace(0.1, 200 * PI4, 97):
        for n in range(1, 9):
            assert buckling_load(k, n) >= 2 * math.sqrt(k) - 1e-9
    k_tangent = (4 * PI2) ** 2  # sqrt(k) = 4 pi^2, i.e. mode 2
    assert buckling_load(k_tangent, 2) == pytest.approx(2 * math.sqrt(k_tangent), rel=1e-14)


def test_resonance_detection():
    assert resonance(4 * PI4) == pytest.approx((1, 2, 5 * PI2))
    assert resonance(9 * PI4) == pytest.approx((1, 3, 10 * PI2))
    assert resonance(PI4) is None
    # k = 36 pi^4 carries two coincidences; the smallest level wins: (2,3)
    i, j, mu = resonance(36 * PI4)
    assert (i, j) == (2, 3)
    assert mu == pytest.approx(13 * PI2, rel=1e-12)
    pairs = resonant_pairs(36 * PI4)
    assert [(p[0], p[1]) for p in pairs] == [(2, 3), (1, 6)]
    assert resonance_from_ratio(36)[:2] == (2, 3)
    assert resonance_from_ratio(7) is None


def test_buckled_mode_count():
    assert buckled_mode_count(-4 * PI2, PI4) == 1
    assert buckled_mode_count(0.0, 17.3) == 0
    assert buckled_mode_count(-8 * PI2, 9 * PI4) == 1  # only mu_2 < 8 pi^2
    assert buckled_mode_count(-120.0, PI4) == 3


def test_branch_amplitude_formula():
    # A_1 = (1/pi) sqrt(-2(beta + mu_1)) = 2 at beta = -4 pi^2, k = pi^4
    assert branch_amplitude(-4 * PI2, PI4, 1) == pytest.approx(2.0, rel=1e-14)
    assert branch_amplitude(-buckling_load(PI4, 1), PI4, 1) == 0.0  # branch root


class TestEnumeration:
    def test_simple_buckled_census(self):
        params = BeamParams(beta=-4 * PI2, k=PI4)
        st = enumerate_equilibria(params)
        assert st.classification == "finite"
        assert st.n_star == 1
        assert len(st.equilibria) == 3
        amps = sorted(eq.amplitude for eq in st.equilibria)
        assert amps == pytest.approx([-2.0, 0.0, 2.0], rel=1e-12)
        for eq in st.equilibria:
            assert static_residual(eq.state, params) <= 1e-10

    def test_null_only(self):
        st = enumerate_equilibria(BeamParams(beta=-PI2, k=PI4))
        assert st.classification == "null_only"
        assert len(st.equilibria) == 1
        # the threshold itself still gives only the straight state
        st2 = enumerate_equilibria(BeamParams(beta=-critical_load(PI4), k=PI4))
        assert st2.classification == "null_only"

    def test_resonant_census(self):
        params = BeamParams(beta=-11 * PI2, k=9 * PI4)
        st = enumerate_equilibria(params)
        assert st.classification == "infinite"
        assert len(st.families) == 1
        fam = st.families[0]
        assert (fam.i, fam.j) == (1, 3)
        assert fam.level == pytest.approx(PI2, rel=1e-12)
        buckled = sorted((eq.n, eq.sign) for eq in st.equilibria if eq.n > 0)
        assert buckled == [(2, -1), (2, 1)]
        for theta in np.linspace(0.0, 2 * math.pi, 17):
            member = fam.member(theta)
            assert static_residual(member, params) <= 1e-8

    def test_resonant_between_levels_is_finite(self):
        # resonant k but beta above the non-simple level: plain finite census
        st = enumerate_equilibria(BeamParams(beta=-7 * PI2, k=9 * PI4))
        assert st.classification == "finite"
        assert len(st.equilibria) == 2 * st.n_star + 1

    def test_census_count_matches_theorem(self):
        for beta in np.linspace(-120.0, 0.0, 41):
            st = enumerate_equilibria(BeamParams(beta=float(beta), k=PI4))
            if st.classification == "finite":
                assert len(st.equilibria) == 2 * st.n_star + 1
            else:
                assert st.classification == "null_only"

    def test_nonzero_load_rejected(self):
        with pytest.raises(ValueError):
            enumerate_equilibria(BeamParams(beta=-50.0, k=0.0, f_modes=(1.0,)))


class TestResidualOracle:
    def test_zero_state(self):
        assert static_residual(ModalState.zero(3), BeamParams(beta=0.0, k=0.0)) == 0.0

    def test_single_mode_frozen_value(self):
        # c_1 = 1 (physical sqrt(2) sin(pi x)), beta = k = f = 0:
        # ||u||_1^2 = pi^2, so r_1 = pi^4 + pi^2*pi^2 = 2 pi^4
        s = ModalState(np.array([1.0]), np.zeros(1))
        r = static_residual(s, BeamParams(beta=0.0, k=0.0))
        assert r == pytest.approx(2 * PI4, rel=1e-14)

    @staticmethod
    def _physical_space_residual(c, beta, k):
        """Independent oracle: assemble the residual on a fine x-grid with the
        stretching coefficient computed by quadrature of (u')^2."""
        x = np.linspace(0.0, 1.0, 4001)
        n = np.arange(1, c.size + 1)
        sin_arr = np.sin(np.outer(x, n) * math.pi)
        cos_arr = np.cos(np.outer(x, n) * math.pi)
        u = math.sqrt(2) * sin_arr @ c
        du = math.sqrt(2) * cos_arr @ (c * n * math.pi)
        d2u = -math.sqrt(2) * sin_arr @ (c * (n * math.pi) ** 2)
        d4u = math.sqrt(2) * sin_arr @ (c * (n * math.pi) ** 4)
        stretch = np.trapz(du * du, x)
        res = d4u - (beta + stretch) * d2u + k * u
        return math.sqrt(np.trapz(res * res, x))

    def test_against_physical_space_quadrature(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            c = rng.normal(size=3) * 0.5
            beta, k = float(rng.normal()), float(rng.random() * 50)
            modal = static_residual(ModalState(c, np.zeros(3)), BeamParams(beta=beta, k=k))
            physical = self._physical_space_residual(c, beta, k)
            assert modal == pytest.approx(physical, rel=2e-6, abs=1e-8)


class TestBifurcationSweep:
    def test_birth_points_and_symmetry(self):
        branch, families = bifurcation_sweep(PI4, -120.0, 0.0, 480)
        step = 120.0 / 480
        assert families == []
        betas_n1 = [b for b, n, _, _ in branch if n == 1]
        assert abs(max(betas_n1) - (-2 * PI2)) <= step
        for beta, n, ap, am in branch:
            assert ap == -am
        zero_rows = [(b, ap, am) for b, n, ap, am in branch if n == 0]
        assert len(zero_rows) == 481
        assert all(ap == 0.0 and am == 0.0 for _, ap, am in zero_rows)

    def test_amplitudes_monotone_in_compression(self):
        branch, _ = bifurcation_sweep(PI4, -120.0, 0.0, 480)
        rows_n1 = sorted((b, ap) for b, n, ap, _ in branch if n == 1)
        amps = [ap for _, ap in rows_n1]
        assert all(a1 >= a2 - 1e-12 for a1, a2 in zip(amps, amps[1:]))

    def test_resonant_sweep_structure(self):
        branch, families = bifurcation_sweep(9 * PI4, -120.0, 0.0, 480)
        step = 120.0 / 480
        # first live branch is mode 2 at -6.25 pi^2, before any mode-1 branch
        betas_n2 = [b for b, n, _, _ in branch if n == 2]
        assert abs(max(betas_n2) - (-6.25 * PI2)) <= step
        assert all(n in (0, 2) for _, n, _, _ in branch)  # modes 1,3 are resonant
        assert families, "resonant threshold must emit family markers"
        assert all((i, j) == (1, 3) for _, i, j, _ in families)
        first_beta = max(f[0] for f in families)
        assert abs(first_beta - (-10 * PI2)) <= step
        for beta, i, j, level in families:
            assert level == pytest.approx(-(beta + 10 * PI2), rel=1e-9, abs=1e-9)

    def test_branch_root_clamped(self):
        # amplitudes below the clamp threshold are written as exact zeros
        branch, _ = bifurcation_sweep(PI4, -2 * PI2 - 1e-13, -2 * PI2 + 1e-13, 2)
        for _, n, ap, am in branch:
            if n == 1:
                assert ap == 0.0 and am == 0.0

    def test_bad_range(self):
        with pytest.raises(ValueError):
            bifurcation_sweep(PI4, 0.0, -1.0, 10)
