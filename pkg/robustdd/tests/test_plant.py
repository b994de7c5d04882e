from unittest import TestCase
import warnings
import numpy as np

from robustdd.misc import DimensionError, ModelError, OracleUnavailableError
import robustdd.plant as plant_module
from robustdd.plant import (
    LtiPlant, DataSet, DifferenceOperatorModel, build_extended,
    collect_state_data, collect_output_data, cumulative_disturbance,
    undisturbed_data, lqr_gain, sample_disturbance)


def small_plant():
    return LtiPlant([[0.5, 0.2], [0., 0.3]], [[0.], [1.]], name="small")


def second_order_model():
    return DifferenceOperatorModel(
        a_coeffs=[[[0.2]], [[-0.5]]], b_coeffs=[[[0.3]], [[0.5]]], D=[[0.]])


class TestLtiPlant(TestCase):
    def test_dimensions(self):
        plant = small_plant()
        self.assertEqual((plant.n, plant.m, plant.p), (2, 1, 2))
        np.testing.assert_array_equal(plant.C, np.eye(2))

    def test_flat_b(self):
        plant = LtiPlant([[0.5, 0.2], [0., 0.3]], [[0., 1.]])
        self.assertTupleEqual(plant.B.shape, (2, 1))

    def test_uncontrollable_warns(self):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            LtiPlant(np.eye(2), [[1.], [0.]], name="uncontrollable")
        self.assertTrue(any("not controllable" in str(w.message) for w in caught))

    def test_non_square(self):
        with self.assertRaises(DimensionError):
            LtiPlant(np.ones((2, 3)), np.ones((2, 1)))

    def test_simulate_step(self):
        plant = small_plant()
        x_next, y = plant_module.simulate_step(plant, [1., 1.], [2.], [0.1, 0.])
        np.testing.assert_allclose(x_next, [0.8, 2.3])
        np.testing.assert_allclose(y, [1., 1.])

    def test_lqr_stabilizes(self):
        plant = LtiPlant([[1.1, 1.], [0., 1.2]], [[0.], [1.]])
        K = lqr_gain(plant)
        radius = np.max(np.abs(np.linalg.eigvals(plant.closed_loop(K))))
        self.assertLess(radius, 1.)

    def test_sample_disturbance(self):
        w = sample_disturbance(3, 100, 0.01, seed=4)
        self.assertTupleEqual(w.shape, (100, 3))
        self.assertLessEqual(np.max(np.abs(w)), 0.01)
        np.testing.assert_array_equal(w, sample_disturbance(3, 100, 0.01, seed=4))


class TestStateData(TestCase):
    def setUp(self):
        self.plant = small_plant()
        self.K = np.array([[-0.1, -0.2]])
        rng = np.random.default_rng(0)
        self.nu = rng.uniform(-1, 1, size=(20, 1))
        self.w = sample_disturbance(2, 20, 1e-2, seed=1)
        self.data = collect_state_data(self.plant, self.K, self.nu, self.w, w_max=1e-2)

    def test_lengths(self):
        self.assertEqual(self.data.length, 20)
        self.assertTupleEqual(self.data.state.shape, (21, 2))
        self.assertEqual(self.data.kind, "state")

    def test_recursion(self):
        x, A_K = self.data.state, self.plant.closed_loop(self.K)
        for k in range(20):
            np.testing.assert_allclose(
                x[k + 1], A_K @ x[k] + self.plant.B @ self.nu[k] + self.w[k])

    def test_undisturbed(self):
        A_K = self.plant.closed_loop(self.K)
        clean = collect_state_data(self.plant, self.K, self.nu, np.zeros((20, 2)))
        np.testing.assert_allclose(undisturbed_data(self.data, A_K), clean.state, atol=1e-14)
        np.testing.assert_allclose(
            self.data.state[7] - clean.state[7], cumulative_disturbance(A_K, self.w, 7),
            atol=1e-14)

    def test_undisturbed_needs_record(self):
        data = DataSet(self.data.nu, state=self.data.state)
        with self.assertRaises(OracleUnavailableError):
            undisturbed_data(data, np.eye(2))

    def test_window(self):
        window = self.data.window(5, 10)
        np.testing.assert_array_equal(window.nu, self.nu[5:15])
        np.testing.assert_array_equal(window.state, self.data.state[5:16])
        with self.assertRaises(DimensionError):
            self.data.window(15, 10)

    def test_disturbance_above_bound(self):
        with self.assertRaises(ValueError):
            DataSet(self.data.nu, state=self.data.state,
                    disturbance=self.w, w_max=1e-3)

    def test_state_and_output(self):
        with self.assertRaises(DimensionError):
            DataSet(self.data.nu)


class TestDifferenceOperatorModel(TestCase):
    def test_coefficient_count(self):
        with self.assertRaises(ModelError):
            DifferenceOperatorModel([[[0.1]]], [], D=[[0.]])

    def test_extended_matches_difference_equation(self):
        model = second_order_model()
        ext = build_extended(model)
        self.assertEqual(ext.dim, 4)
        rng = np.random.default_rng(2)
        u = rng.uniform(-1, 1, size=(30, 1))
        w = rng.uniform(-0.1, 0.1, size=(30, 1))
        data = collect_output_data(model, np.zeros((1, 4)), u, w)

        # direct evaluation with zero history
        u_hist = np.vstack([np.zeros((2, 1)), u])
        y_hist = np.zeros((32, 1))
        for k in range(30):
            y_hist[k + 2] = model.output(u_hist[k:k + 2], y_hist[k:k + 2], u[k], w[k])
        np.testing.assert_allclose(data.output, y_hist[2:], atol=1e-13)

    def test_state_from_history(self):
        ext = build_extended(second_order_model())
        xi = ext.state_from_history([[1.], [2.]], [[3.], [4.]])
        np.testing.assert_array_equal(xi, [1., 2., 3., 4.])

    def test_output_feedback_inputs(self):
        model = second_order_model()
        K_tilde = np.array([[0., 0.1, 0., -0.2]])
        nu = np.ones((10, 1))
        data = collect_output_data(model, K_tilde, nu, np.zeros((10, 1)),
                                   xi0=[0., 0., 1., 1.])
        self.assertTupleEqual(data.inputs.shape, (10, 1))
        self.assertAlmostEqual(data.inputs[0, 0], 1. - 0.2)
        self.assertEqual(data.order, 2)
