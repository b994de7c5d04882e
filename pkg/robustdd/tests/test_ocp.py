from unittest import TestCase
import numpy as np

from robustdd.misc import DimensionError, FeasibilityError
from robustdd.plant import (
    LtiPlant, DifferenceOperatorModel, collect_state_data, collect_output_data,
    sample_disturbance, build_extended)
from robustdd.signals import generate_pe_input
from robustdd.constants import oracle_constants, oracle_etas
from robustdd.tightening import prediction_error_constants, sf_coefficients
from robustdd.lib.plants import plants, TWO_MASS_SPRING_GAIN
from robustdd.ocp import (
    SfOcpSpec, OfOcpSpec, assemble_sf, assemble_of, solve_sf, solve_of, weight_matrix,
    hankel_reproduction_error)

SOLVER = {"tol": 1e-7, "max_iter": 50000}


def small_plant():
    return LtiPlant([[0.5, 0.2], [0., 0.3]], [[0.], [1.]], name="small")


def small_sf_spec(plant=None, L=4, N=30, w_max=1e-4, x_max=10., u_max=10., K=None,
                  seed=0, **kwargs):
    """ State feedback problem on data of the small plant, with oracle constants. """
    plant = small_plant() if plant is None else plant
    K = np.zeros((plant.m, plant.n)) if K is None else np.asarray(K, dtype=float)
    nu = generate_pe_input(plant.m, N, 1., L + plant.n + 1, seed)
    w = sample_disturbance(plant.n, N, w_max, seed + 1)
    data = collect_state_data(plant, K, nu, w, w_max=w_max)
    consts = oracle_constants(plant, K, L, N, w_max, nu=nu)
    pec = prediction_error_constants(consts, L, N)
    coeff = sf_coefficients(pec, consts, L, plant.n, x_max, w_max, N=N)
    weights = dict(Q=1., R=1., lambda_alpha=100., lambda_sigma=100.)
    weights.update(kwargs)
    return SfOcpSpec.from_data(data, L, coeff, pec, x_max=x_max, u_max=u_max, K=K,
                               **weights)


def second_order_model():
    return DifferenceOperatorModel(
        a_coeffs=[[[0.2]], [[-0.5]]], b_coeffs=[[[0.3]], [[0.5]]], D=[[0.]])


def small_of_spec(L=10, N=80, w_max=1e-3, K_tilde=None, y_max=1e4, u_max=1e4, model=None,
                  **kwargs):
    """ Output feedback problem on data of model, with oracle etas. """
    model = second_order_model() if model is None else model
    K_tilde = np.zeros((1, 4)) if K_tilde is None else np.asarray(K_tilde, dtype=float)
    nu = generate_pe_input(1, N, 1., L + 2 * model.n, seed=0)
    w = sample_disturbance(1, N, w_max, seed=1)
    data = collect_output_data(model, K_tilde, nu, w, w_max=w_max)
    weights = dict(Q=1., R=1., lambda_alpha=100., lambda_sigma=100.)
    weights.update(kwargs)
    return OfOcpSpec.from_data(data, L, oracle_etas(model, K_tilde), y_max=y_max, u_max=u_max,
                               K_tilde=K_tilde, **weights)


class TestWeights(TestCase):
    def test_scalar(self):
        np.testing.assert_array_equal(weight_matrix(2., "Q", 3), 2 * np.eye(3))

    def test_indefinite(self):
        with self.assertRaises(ValueError):
            weight_matrix([[1., 0.], [0., -1.]], "Q", 2)

    def test_semidefinite_r(self):
        with self.assertRaises(ValueError):
            weight_matrix(0., "R", 1, definite=True)

    def test_wrong_shape(self):
        with self.assertRaises(DimensionError):
            weight_matrix(np.eye(2), "Q", 3)


class TestWillems(TestCase):
    def test_noise_free_trajectories(self):
        # every trajectory of the plant is a combination of the data columns
        error = hankel_reproduction_error(small_plant(), None, 4, 30, trials=50, x0_bound=5.,
                                          seed=5)
        self.assertLessEqual(error, 1e-8)

    def test_two_mass_spring_with_gain(self):
        error = hankel_reproduction_error(plants["two_mass_spring"](), TWO_MASS_SPRING_GAIN,
                                          12, 50)
        self.assertLessEqual(error, 1e-8)

    def test_short_data(self):
        # no input of length 12 is persistently exciting of order L+n+1 = 7
        with self.assertRaises(DimensionError):
            hankel_reproduction_error(small_plant(), None, 4, 12)


class TestStateFeedbackProblem(TestCase):
    def test_variable_counts(self):
        plant = plants["two_mass_spring"]()
        spec = small_sf_spec(plant=plant, L=12, N=50, w_max=1e-3)
        qp = assemble_sf(spec, np.zeros(4))
        sizes = {name: slc.stop - slc.start for name, slc in qp.variables.items()}
        self.assertEqual(sizes["alpha"], 39)
        self.assertEqual(sizes["sigma"], 52)
        self.assertEqual(sizes["nu_bar"], 12)
        self.assertEqual(sizes["x_bar"], 52)
        self.assertEqual(spec.N, 50)

    def test_origin(self):
        spec = small_sf_spec()
        solution = solve_sf(spec, np.zeros(2), **SOLVER)
        self.assertEqual(solution.status, "optimal")
        self.assertLess(solution.J_star, 1e-8)
        np.testing.assert_allclose(solution.nu_bar, 0., atol=1e-6)

    def test_tightened_constraints_hold(self):
        spec = small_sf_spec()
        x_t = np.array([1., -1.])
        solution = solve_sf(spec, x_t, **SOLVER)
        coeff, L = spec.coefficients, spec.L
        np.testing.assert_allclose(solution.x_bar[0], x_t, atol=1e-6)
        np.testing.assert_allclose(solution.x_bar[L], 0., atol=1e-6)
        np.testing.assert_allclose(spec.hankel_nu @ solution.alpha,
                                   solution.nu_bar.reshape(-1), atol=1e-6)

        nu_norm = np.sum(np.abs(solution.nu_bar))
        alpha_norm = np.sum(np.abs(solution.alpha))
        for k in range(L):
            sigma_norm = np.max(np.abs(solution.sigma[k]))
            state = (np.max(np.abs(solution.x_bar[k])) + coeff.a_u[k] * nu_norm
                     + coeff.a_alpha[k] * alpha_norm + coeff.a_sigma[k] * sigma_norm)
            self.assertLessEqual(state, spec.x_max - coeff.a_c[k] + 1e-6)
            inputs = (np.max(np.abs(solution.nu_bar[k])) + coeff.b_u[k] * nu_norm
                      + coeff.b_alpha[k] * alpha_norm + coeff.b_sigma[k] * sigma_norm)
            self.assertLessEqual(inputs, spec.u_max - coeff.b_c[k] + 1e-6)

    def test_cost_monotone_in_regularization(self):
        x_t = np.array([1., -1.])
        for name in ("lambda_sigma", "lambda_alpha"):
            costs = [solve_sf(small_sf_spec(**{name: value}), x_t, **SOLVER).J_star
                     for value in (1000., 100., 10., 1.)]
            for heavier, lighter in zip(costs, costs[1:]):
                self.assertLessEqual(lighter, heavier + 1e-5 * max(1., heavier), msg=name)

    def test_state_weight_scaling(self):
        x_t = np.array([1., -1.])
        spec = small_sf_spec()
        solution = solve_sf(spec, x_t, **SOLVER)
        qp = assemble_sf(spec, x_t)
        qp_double = assemble_sf(small_sf_spec(Q=2.), x_t)
        z = solution.qp_solution.z
        state_cost = sum(x @ x for x in solution.x_bar[:spec.L])
        self.assertAlmostEqual(qp_double.objective(z) - qp.objective(z), state_cost, places=8)

    def test_infeasible(self):
        spec = small_sf_spec(x_max=1.)
        x_t = np.array([5., 5.])
        with self.assertRaises(FeasibilityError) as context:
            solve_sf(spec, x_t, tol=1e-7, max_iter=20000)
        np.testing.assert_array_equal(context.exception.x_t, x_t)
        self.assertIsNotNone(context.exception.violated_row)

    def test_wrong_state_size(self):
        with self.assertRaises(DimensionError):
            assemble_sf(small_sf_spec(), np.zeros(3))


class TestOutputFeedbackProblem(TestCase):
    def test_columns(self):
        spec = small_of_spec()
        self.assertEqual(spec.hankel_nu.shape, (12, 69))
        self.assertEqual(spec.N, 80)

    def test_origin(self):
        spec = small_of_spec()
        solution = solve_of(spec, np.zeros((2, 1)), np.zeros((2, 1)), np.zeros(4), **SOLVER)
        self.assertEqual(solution.status, "optimal")
        self.assertLess(solution.J_star, 1e-8)
        self.assertTupleEqual(solution.nu_bar.shape, (10, 1))
        self.assertTupleEqual(solution.y_bar.shape, (10, 1))

    def test_first_input_row(self):
        K_tilde = np.array([[0., 0.1, 0., -0.2]])
        spec = small_of_spec(K_tilde=K_tilde)
        xi_t = np.array([0., 0., 1., 1.])
        qp = assemble_of(spec, np.zeros((2, 1)), np.array([[1.], [1.]]), xi_t)
        rows = [i for i, label in enumerate(qp.in_labels) if label == "input_tightening_0[0]"]
        self.assertEqual(len(rows), 2)
        for i in rows:
            self.assertAlmostEqual(qp.b_in[i], 1e4 - 0.3)

    def test_delta_bar(self):
        spec = small_of_spec()
        eta_a = build_extended(second_order_model()).A
        self.assertAlmostEqual(spec.etas.A, np.linalg.norm(eta_a, np.inf))
        self.assertEqual(spec.delta_bar(0), 0.)
        self.assertAlmostEqual(spec.delta_bar(2), 1e-3 * (1 + spec.etas.A))

    def test_history_beyond_output_bound(self):
        # eta_C ||xi_t|| alone exceeds y_max at k = 0
        model = plants["second_order_output"]()
        xi_t = np.array([0., 0., 1., 1.])
        with self.assertRaises(FeasibilityError) as context:
            solve_of(small_of_spec(model=model, y_max=0.9, u_max=2.), np.zeros((2, 1)),
                     np.ones((2, 1)), xi_t, tol=1e-7, max_iter=20000)
        np.testing.assert_array_equal(context.exception.x_t, xi_t)
        self.assertIsNotNone(context.exception.violated_row)

        solution = solve_of(small_of_spec(model=model, y_max=2., u_max=2.), np.zeros((2, 1)),
                            np.ones((2, 1)), xi_t, **SOLVER)
        self.assertEqual(solution.status, "optimal")

    def test_output_rows_active(self):
        model = plants["second_order_output"]()
        history = (np.zeros((2, 1)), np.ones((2, 1)), np.array([0., 0., 1., 1.]))
        loose_spec = small_of_spec(model=model, Q=100.)
        loose = solve_of(loose_spec, *history, **SOLVER)
        k = loose_spec.L - loose_spec.n - 1
        spent = float(np.sum(np.abs(loose.nu_bar[:k])))
        self.assertGreater(spent, 1e-2)

        # eta_A = eta_B = eta_C = 1, so row k caps sum_{i<k} |nu_bar_i| at spent / 2
        spec = small_of_spec(model=model, Q=100., y_max=1. + loose_spec.delta_bar(k) + spent / 2)
        tight = solve_of(spec, *history, **SOLVER)
        self.assertGreaterEqual(tight.J_star, loose.J_star - 1e-6)
        self.assertLessEqual(np.sum(np.abs(tight.nu_bar[:k])), spent / 2 + 1e-5)

        qp = assemble_of(spec, *history)
        rows = [i for i, label in enumerate(qp.in_labels) if label.startswith("output_tightening")]
        self.assertEqual(len(rows), spec.L - spec.n)
        residuals = qp.A_in[rows] @ tight.qp_solution.z - qp.b_in[rows]
        self.assertGreaterEqual(np.max(residuals), -1e-5)
        self.assertLessEqual(np.max(residuals), 1e-5)
