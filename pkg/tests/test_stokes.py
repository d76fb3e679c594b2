import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from depolsim.stokes import (
    apply,
    dop_for_input,
    hwp_approx_matrix,
    qwp_approx_matrix,
    retarder_matrix,
    singular_values,
)
from oracles import power_iteration_sigma, random_unit_vectors, rodrigues

angles = st.floats(min_value=-20.0, max_value=20.0, allow_nan=False)


class TestRetarderMatrix:
    def test_zero_retardation_is_identity(self):
        for psi in (0.0, 0.3, 2.0, -5.0):
            np.testing.assert_allclose(retarder_matrix(0.0, psi), np.eye(3), atol=1e-15)

    def test_halfwave_at_zero_azimuth(self):
        np.testing.assert_allclose(retarder_matrix(np.pi, 0.0), np.diag([1.0, -1.0, -1.0]), atol=1e-15)

    def test_quarterwave_at_right_angle(self):
        expected = np.array([[0, 0, 1], [0, 1, 0], [-1, 0, 0]], float)
        np.testing.assert_allclose(retarder_matrix(np.pi / 2, np.pi / 2), expected, atol=1e-15)

    def test_matches_rodrigues_construction(self):
        rng = np.random.default_rng(3)
        d, p = rng.uniform(-10, 10, 500), rng.uniform(-10, 10, 500)
        np.testing.assert_allclose(retarder_matrix(d, p), rodrigues(d, p), atol=1e-14)

    def test_rotation_invariants_bulk(self):
        rng = np.random.default_rng(0)
        d, p = rng.uniform(-50, 50, 10_000), rng.uniform(-50, 50, 10_000)
        r = retarder_matrix(d, p)
        gram = np.swapaxes(r, -1, -2) @ r
        assert np.abs(gram - np.eye(3)).max() < 1e-12
        assert np.abs(np.linalg.det(r) - 1).max() < 1e-12

    @given(angles, angles, angles)
    def test_same_axis_composition(self, d1, d2, psi):
        lhs = retarder_matrix(d1, psi) @ retarder_matrix(d2, psi)
        np.testing.assert_allclose(lhs, retarder_matrix(d1 + d2, psi), atol=1e-12)

    @given(angles, angles)
    def test_transpose_is_inverse_rotation(self, d, psi):
        np.testing.assert_allclose(retarder_matrix(d, psi).T, retarder_matrix(-d, psi), atol=1e-12)

    @given(angles, angles)
    def test_two_pi_periodic(self, d, psi):
        r = retarder_matrix(d, psi)
        np.testing.assert_allclose(retarder_matrix(d + 2 * np.pi, psi), r, atol=1e-12)
        np.testing.assert_allclose(retarder_matrix(d, psi + 2 * np.pi), r, atol=1e-12)

    def test_azimuth_period_is_not_pi(self):
        # entries carry sin(psi) terms, so a shift by pi flips their sign
        assert not np.allclose(retarder_matrix(np.pi / 2, 0.4), retarder_matrix(np.pi / 2, 0.4 + np.pi))

    @given(angles, angles, arrays(np.float64, 3, elements=st.floats(-1, 1)))
    def test_preserves_length(self, d, psi, s):
        out = apply(retarder_matrix(d, psi), s)
        assert abs(np.linalg.norm(out) - np.linalg.norm(s)) < 1e-12


class TestLinearizedPlates:
    def test_ideal_qwp(self):
        expected = np.array([[1, 0, 0], [0, 0, -1], [0, 1, 0]], float)
        np.testing.assert_allclose(qwp_approx_matrix(0.0, 0.0), expected, atol=1e-15)

    def test_ideal_hwp(self):
        np.testing.assert_allclose(hwp_approx_matrix(0.0, 0.0), np.diag([1.0, -1.0, -1.0]), atol=1e-15)

    def test_qwp_bottom_right_is_minus_xi(self):
        assert qwp_approx_matrix(0.01, np.pi / 4)[2, 2] == -0.01

    def test_hwp_third_column_and_row(self):
        h = hwp_approx_matrix(0.02, np.pi / 2)
        assert h[0, 2] == pytest.approx(-0.02, abs=1e-17)
        assert h[2, 0] == pytest.approx(0.02, abs=1e-17)

    def test_qwp_near_exact_at_small_error(self):
        xi = 1e-3
        psi = np.linspace(0, 2 * np.pi, 97)
        diff = np.abs(retarder_matrix(np.pi / 2 + xi, psi) - qwp_approx_matrix(xi, psi)).max()
        assert diff <= 5e-7

    @pytest.mark.parametrize("xi", [-0.1, -0.05, -0.01, 0.003, 0.02, 0.07, 0.1])
    def test_second_order_agreement(self, xi):
        psi = np.linspace(0, 2 * np.pi, 181)
        q = np.abs(retarder_matrix(np.pi / 2 + xi, psi) - qwp_approx_matrix(xi, psi)).max()
        h = np.abs(retarder_matrix(np.pi + xi, psi) - hwp_approx_matrix(xi, psi)).max()
        assert q <= xi**2
        assert h <= xi**2

    def test_large_error_warns(self):
        with pytest.warns(RuntimeWarning):
            qwp_approx_matrix(0.4, 0.0)


class TestApply:
    def test_identity(self):
        np.testing.assert_array_equal(apply(np.eye(3), [1.0, 0, 0]), [1.0, 0, 0])

    def test_quarterwave_moves_s2_to_s3(self):
        np.testing.assert_allclose(apply(retarder_matrix(np.pi / 2, 0), [0, 1.0, 0]), [0, 0, 1.0], atol=1e-15)

    def test_halfwave_flips_circular(self):
        np.testing.assert_allclose(apply(retarder_matrix(np.pi, 0), [0, 0, 1.0]), [0, 0, -1.0], atol=1e-15)


class TestSingularValues:
    def test_identity(self):
        np.testing.assert_allclose(singular_values(np.eye(3)), [1, 1, 1], atol=1e-15)

    def test_single_nonzero_entry(self):
        np.testing.assert_allclose(singular_values(np.diag([0, 0, 0.01])), [0.01, 0, 0], atol=1e-16)

    def test_zero_matrix(self):
        np.testing.assert_array_equal(singular_values(np.zeros((3, 3))), [0, 0, 0])

    def test_against_power_iteration(self):
        rng = np.random.default_rng(7)
        m = rng.uniform(-1, 1, size=(200, 3, 3))
        np.testing.assert_allclose(singular_values(m), power_iteration_sigma(m), atol=1e-8)

    def test_rank_deficient_keeps_small_values(self):
        rng = np.random.default_rng(8)
        u, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        v, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        m = u @ np.diag([0.7, 3e-9, 0.0]) @ v.T
        np.testing.assert_allclose(singular_values(m), [0.7, 3e-9, 0.0], atol=1e-15)

    @settings(max_examples=200)
    @given(arrays(np.float64, (3, 3), elements=st.floats(-1, 1)))
    def test_sorted_and_norm_consistent(self, m):
        s = singular_values(m)
        assert s[0] >= s[1] >= s[2] >= 0
        # sum of squares equals the Frobenius norm squared
        assert abs(np.sum(s**2) - np.sum(m**2)) < 1e-12

    def test_largest_value_bounds_all_inputs(self):
        rng = np.random.default_rng(11)
        m = rng.uniform(-1, 1, (3, 3))
        s = random_unit_vectors(rng, 10_000)
        norms = np.linalg.norm(s @ m.T, axis=1)
        sigma1 = singular_values(m)[0]
        assert norms.max() <= sigma1 + 1e-12
        assert norms.max() >= 0.99 * sigma1

    def test_batched_shape(self):
        assert singular_values(np.zeros((4, 5, 3, 3))).shape == (4, 5, 3)

    def test_rejects_wrong_shape(self):
        with pytest.raises(ValueError):
            singular_values(np.zeros((2, 2)))


class TestDopForInput:
    def test_zero_matrix(self):
        assert dop_for_input(np.zeros((3, 3)), [0, 0.6, 0.8]) == 0

    def test_circular_input_sees_qwp_error(self):
        assert dop_for_input(np.diag([0, 0, 0.01]), [0, 0, 1]) == pytest.approx(0.01, rel=1e-15)

    def test_orthogonal_input(self):
        assert dop_for_input(np.diag([0, 0, 0.01]), [1, 0, 0]) == 0

    def test_rejects_non_unit(self):
        with pytest.raises(ValueError, match="unit"):
            dop_for_input(np.eye(3), [1, 1, 0])

    def test_bounded_by_sigma1(self):
        rng = np.random.default_rng(5)
        m = rng.uniform(-1, 1, (3, 3))
        top = singular_values(m)[0]
        for s in random_unit_vectors(rng, 200):
            assert dop_for_input(m, s) <= top + 1e-12
