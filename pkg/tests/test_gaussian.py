"""Tests for the Gaussian phase-space core."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clickqi.gaussian import (
    GaussianMixture,
    GaussianState,
    SymplecticMatrix,
    apply_symplectic,
    assert_physical,
    beamsplitter_symplectic,
    coherent_state,
    loss_channel,
    loss_channel_on_mode,
    mean_photon_number,
    overlap,
    partial_trace,
    symplectic_eigenvalues,
    symplectic_form,
    tensor,
    thermal_state,
    vacuum_state,
    wigner,
)
from clickqi.conditioning import TMSV


class TestSymplecticForm:
    def test_one_mode_literal(self):
        assert np.array_equal(symplectic_form(1), [[0, 1], [-1, 0]])

    def test_two_modes_block_diagonal(self):
        omega = symplectic_form(2)
        assert np.array_equal(omega[:2, :2], [[0, 1], [-1, 0]])
        assert np.array_equal(omega[2:, 2:], [[0, 1], [-1, 0]])
        assert np.count_nonzero(omega[:2, 2:]) == 0

    def test_squares_to_minus_identity(self):
        omega = symplectic_form(3)
        assert np.allclose(omega @ omega, -np.eye(6))

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            symplectic_form(0)


class TestBeamsplitter:
    def test_fully_transmissive_is_identity(self):
        assert np.allclose(beamsplitter_symplectic(1.0).matrix, np.eye(4))

    def test_fully_reflective_swaps_with_sign(self):
        s = beamsplitter_symplectic(0.0).matrix
        expected = np.block([[np.zeros((2, 2)), np.eye(2)],
                             [-np.eye(2), np.zeros((2, 2))]])
        assert np.allclose(s, expected)

    @pytest.mark.parametrize("eta", [0.0, 0.25, 0.5, 0.77, 1.0])
    def test_symplectic_invariants(self, eta):
        s = beamsplitter_symplectic(eta).matrix
        omega = symplectic_form(2)
        assert np.max(np.abs(s @ omega @ s.T - omega)) < 1e-10
        assert abs(np.linalg.det(s) - 1) < 1e-10

    def test_out_of_range_eta(self):
        with pytest.raises(ValueError):
            beamsplitter_symplectic(1.2)

    def test_invalid_matrix_rejected(self):
        with pytest.raises(ValueError):
            SymplecticMatrix(np.diag([2.0, 1.0]))


class TestStateConstructors:
    def test_thermal_zero_is_vacuum(self):
        t = thermal_state(0.0)
        assert np.array_equal(t.cov, 0.5 * np.eye(2))
        assert np.array_equal(t.mean, np.zeros(2))

    def test_thermal_one(self):
        assert np.allclose(thermal_state(1.0).cov, 1.5 * np.eye(2))

    def test_thermal_negative_rejected(self):
        with pytest.raises(ValueError):
            thermal_state(-0.1)

    def test_thermal_photon_statistics_are_geometric(self):
        # independent geometric oracle: p(k) = nbar^k / (1+nbar)^(k+1)
        from clickqi.fock import fock_thermal, number_distribution

        nbar = 3.0
        dist = number_distribution(fock_thermal(nbar, 140))
        k = np.arange(140)
        geometric = nbar ** k / (1 + nbar) ** (k + 1)
        assert np.max(np.abs(dist - geometric)) < 1e-15
        assert abs(dist.sum() - 1) < 1e-12  # truncation tail

    def test_coherent_zero_is_vacuum(self):
        c = coherent_state(0.0)
        assert np.array_equal(c.mean, np.zeros(2))
        assert np.array_equal(c.cov, 0.5 * np.eye(2))

    def test_coherent_mean(self):
        assert np.allclose(coherent_state(1.0).mean, [np.sqrt(2), 0.0])

    def test_coherent_mean_photon_readback(self):
        assert mean_photon_number(coherent_state(2.5)) == pytest.approx(2.5, abs=1e-12)

    def test_cov_symmetrized_on_construction(self):
        cov = np.array([[1.0, 0.3], [0.1, 1.0]])
        state = GaussianState(np.zeros(2), cov)
        assert np.array_equal(state.cov, state.cov.T)
        assert state.cov[0, 1] == pytest.approx(0.2)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            GaussianState(np.zeros(2), np.eye(4))


class TestLossChannel:
    def test_thermal_half_transmission(self):
        out = loss_channel(thermal_state(1.0), 0.5, 0.0)
        assert np.allclose(out.cov, np.eye(2), atol=1e-14)

    @pytest.mark.parametrize("nbar,eta,nbar_th", [(1.0, 0.5, 0.2), (3.0, 0.9, 2.0),
                                                  (0.0, 0.3, 2.0)])
    def test_thermal_closed_form(self, nbar, eta, nbar_th):
        out = loss_channel(thermal_state(nbar), eta, nbar_th)
        assert np.allclose(out.cov, (eta * nbar + nbar_th + 0.5) * np.eye(2),
                           atol=1e-14)

    def test_vacuum_becomes_background(self):
        out = loss_channel(vacuum_state(), 0.3, 2.0)
        assert np.allclose(out.cov, thermal_state(2.0).cov, atol=1e-14)

    def test_unit_eta_with_noise_rejected(self):
        with pytest.raises(ValueError):
            loss_channel(vacuum_state(), 1.0, 0.1)

    def test_unit_eta_without_noise_is_identity(self):
        state = coherent_state(1.3)
        out = loss_channel(state, 1.0, 0.0)
        assert np.allclose(out.mean, state.mean)
        assert np.allclose(out.cov, state.cov)

    @given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.0, 3.0))
    @settings(max_examples=30, deadline=None)
    def test_composition_law(self, eta1, eta2, nbar):
        state = coherent_state(nbar)
        once = loss_channel(loss_channel(state, eta2, 0.0), eta1, 0.0)
        direct = loss_channel(state, eta1 * eta2, 0.0)
        assert np.max(np.abs(once.mean - direct.mean)) < 1e-12
        assert np.max(np.abs(once.cov - direct.cov)) < 1e-12

    def test_mean_photon_map(self):
        nbar, eta, nbar_th = 2.0, 0.7, 0.4
        out = loss_channel(thermal_state(nbar), eta, nbar_th)
        assert mean_photon_number(out) == pytest.approx(eta * nbar + nbar_th,
                                                        abs=1e-12)

    @pytest.mark.parametrize("eta,nbar_th", [(0.5, 0.0), (0.3, 1.5), (0.9, 0.2)])
    def test_agrees_with_beamsplitter_dilation(self, eta, nbar_th):
        # dilate: mix with a thermal environment of mean nbar_th/(1-eta),
        # then trace the environment
        state = GaussianState([0.7, -0.4],
                              [[0.9, 0.2], [0.2, 1.4]])
        env = thermal_state(nbar_th / (1 - eta))
        joint = apply_symplectic(tensor(state, env), beamsplitter_symplectic(eta))
        dilated = partial_trace(joint, [0])
        direct = loss_channel(state, eta, nbar_th)
        assert np.max(np.abs(dilated.mean - direct.mean)) < 1e-12
        assert np.max(np.abs(dilated.cov - direct.cov)) < 1e-12


class TestWigner:
    def test_vacuum_at_origin(self):
        assert wigner(vacuum_state(), [0.0, 0.0]) == pytest.approx(1 / np.pi,
                                                                   abs=1e-15)

    def test_thermal_one_at_origin(self):
        assert wigner(thermal_state(1.0), [0.0, 0.0]) == pytest.approx(
            1 / (3 * np.pi), abs=1e-15)

    @pytest.mark.parametrize("state", [vacuum_state(), thermal_state(1.0),
                                       thermal_state(5.0), coherent_state(2.0)])
    def test_grid_normalization(self, state):
        sigma = np.sqrt(np.max(np.diag(state.cov)))
        lim = 8 * sigma + np.max(np.abs(state.mean))
        xs = np.linspace(-lim, lim, 401)
        grid = np.stack(np.meshgrid(xs, xs, indexing="ij"), axis=-1)
        values = wigner(state, grid)
        integral = np.trapezoid(np.trapezoid(values, xs, axis=1), xs)
        assert integral == pytest.approx(1.0, abs=1e-6)


class TestOverlap:
    def test_vacuum_self_overlap(self):
        assert overlap(vacuum_state(), vacuum_state()) == pytest.approx(1.0,
                                                                        abs=1e-15)

    @pytest.mark.parametrize("nbar", [0.2, 1.0, 4.0])
    def test_vacuum_thermal(self, nbar):
        assert overlap(vacuum_state(), thermal_state(nbar)) == pytest.approx(
            1 / (1 + nbar), abs=1e-13)

    def test_coherent_vacuum(self):
        assert overlap(coherent_state(1.0), vacuum_state()) == pytest.approx(
            np.exp(-1.0), abs=1e-14)

    @given(st.floats(0.0, 3.0), st.floats(0.0, 3.0), st.floats(-2.0, 2.0))
    @settings(max_examples=25, deadline=None)
    def test_symmetry_exact(self, na, nb, q):
        a = GaussianState([q, 0.1], thermal_state(na).cov)
        b = thermal_state(nb)
        assert overlap(a, b) == overlap(b, a)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            overlap(vacuum_state(1), vacuum_state(2))


class TestPartialTrace:
    def test_tmsv_arm_is_thermal(self):
        t = TMSV(1.5)
        arm = partial_trace(t.state, [1])
        assert np.allclose(arm.cov, thermal_state(1.5).cov, atol=1e-14)
        assert np.allclose(arm.mean, 0.0)

    def test_product_state_factor(self):
        a, b = thermal_state(0.7), coherent_state(1.2)
        joint = tensor(a, b)
        kept = partial_trace(joint, [1])
        assert np.array_equal(kept.mean, b.mean)
        assert np.array_equal(kept.cov, b.cov)
        first = partial_trace(joint, [0])
        assert np.array_equal(first.cov, a.cov)

    def test_three_mode_index_bookkeeping(self):
        rng = np.random.default_rng(11)
        cov = rng.normal(size=(6, 6))
        cov = cov @ cov.T + 3 * np.eye(6)
        mean = rng.normal(size=6)
        state = GaussianState(mean, cov)
        kept = partial_trace(state, [0, 2])
        idx = [0, 1, 4, 5]
        assert np.array_equal(kept.mean, mean[idx])
        assert np.allclose(kept.cov, 0.5 * (cov + cov.T)[np.ix_(idx, idx)])

    def test_empty_keep_rejected(self):
        with pytest.raises(ValueError):
            partial_trace(vacuum_state(2), [])


class TestSymplecticEigenvalues:
    def test_vacuum(self):
        assert np.allclose(symplectic_eigenvalues(vacuum_state()), [0.5])

    def test_thermal(self):
        assert np.allclose(symplectic_eigenvalues(thermal_state(2.0)), [2.5])

    def test_tmsv_is_pure(self):
        nus = symplectic_eigenvalues(TMSV(1.0).state)
        assert np.allclose(nus, [0.5, 0.5], atol=1e-10)

    def test_physicality_check(self):
        assert_physical(thermal_state(0.3))
        with pytest.raises(ValueError):
            assert_physical(GaussianState(np.zeros(2), 0.1 * np.eye(2)))


class TestMixture:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError):
            GaussianMixture((vacuum_state(), thermal_state(1.0)), (0.7, 0.4))

    def test_signed_weights_allowed(self):
        mix = GaussianMixture((thermal_state(1.0), vacuum_state()), (2.0, -1.0))
        assert mean_photon_number(mix) == pytest.approx(2.0)

    def test_mode_count_mismatch_rejected(self):
        with pytest.raises(ValueError):
            GaussianMixture((vacuum_state(1), vacuum_state(2)), (0.5, 0.5))
