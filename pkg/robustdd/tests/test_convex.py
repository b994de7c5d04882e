from unittest import TestCase
import os
import shutil
import unittest
import numpy as np

from robustdd.misc import ModelError
from robustdd.convex import (
    Expr, QpBuilder, QuadraticProgram, epigraph_abs, epigraph_inf,
    solve_qp, check_psd, kkt_residuals, random_box_qp, benchmark_box_qps)

try:
    import osqp
except ImportError:
    osqp = None


class TestExpr(TestCase):
    def setUp(self):
        self.builder = QpBuilder()
        self.a = self.builder.variable("a", 2)
        self.b = self.builder.variable("b", 3)

    def test_affine_value(self):
        expr = np.array([[1., 2.], [0., 1.], [3., 0.]]) @ self.a - 2 * self.b + 1.
        values = {"a": np.array([1., 1.]), "b": np.array([0., 1., 2.])}
        np.testing.assert_allclose(expr.value(values), [4., 0., 0.])

    def test_row_indexing(self):
        expr = self.b[1:]
        self.assertEqual(len(expr), 2)
        np.testing.assert_array_equal(expr.value({"b": np.array([5., 6., 7.])}), [6., 7.])

    def test_sum(self):
        self.assertEqual(self.b.sum().value({"b": np.array([1., 2., 3.])})[0], 6.)

    def test_row_mismatch(self):
        with self.assertRaises(ValueError):
            self.a + self.b

    def test_duplicate_variable(self):
        with self.assertRaises(ValueError):
            self.builder.variable("a", 1)

    def test_constant(self):
        expr = Expr.constant([1., 2.])
        np.testing.assert_array_equal(expr.value({}), [1., 2.])


class TestBuilder(TestCase):
    def test_cost_and_offset(self):
        builder = QpBuilder()
        z = builder.variable("z", 2)
        builder.add_quadratic(z - 1., weight=[1., 2.])
        builder.add_linear(z, weight=3.)
        qp = builder.build()
        point = np.array([2., -1.])
        # (1)^2 + 2 * (-2)^2 + 3 * 1
        self.assertAlmostEqual(qp.objective(point), 1. + 8. + 3.)

    def test_labels(self):
        builder = QpBuilder()
        z = builder.variable("z", 2)
        builder.equal(z.sum(), 1., label="total")
        builder.less_equal(z, 0.75, label="upper")
        qp = builder.build()
        self.assertListEqual(qp.eq_labels, ["total[0]"])
        self.assertListEqual(qp.in_labels, ["upper[0]", "upper[1]"])
        value, label = qp.violations(np.array([1., 0.]))
        self.assertAlmostEqual(value, 0.25)
        self.assertEqual(label, "upper[0]")

    def test_epigraph_abs(self):
        builder = QpBuilder()
        z = builder.variable("z", 3)
        builder.equal(z, [1., -2., 0.5])
        t = epigraph_abs(builder, z, "norm")
        builder.add_linear(t)
        solution = solve_qp(builder.build())
        self.assertEqual(solution.status, "optimal")
        self.assertAlmostEqual(solution.values["norm"][0], 3.5, places=5)

    def test_epigraph_inf(self):
        builder = QpBuilder()
        z = builder.variable("z", 3)
        builder.equal(z, [1., -2., 0.5])
        t = epigraph_inf(builder, z, "norm")
        builder.add_linear(t)
        solution = solve_qp(builder.build())
        self.assertAlmostEqual(solution.values["norm"][0], 2., places=5)

    def test_dump(self):
        folder = os.path.join(os.path.dirname(__file__), ".temp", "test_convex")
        os.makedirs(folder, exist_ok=True)
        try:
            builder = QpBuilder()
            z = builder.variable("z", 2)
            builder.add_quadratic(z)
            builder.less_equal(-z, -1.)
            file = os.path.join(folder, "qp.txt")
            builder.build().dump(file)
            with open(file) as f:
                content = f.read()
            self.assertIn("[H] 2 2", content)
            self.assertIn("[A_in] 2 2", content)
            self.assertIn("variables z:0:2", content)
        finally:
            shutil.rmtree(folder)


class TestAdmmSolver(TestCase):
    def test_random_box_qps(self):
        report = benchmark_box_qps(count=100, max_vars=50, seed=42)
        self.assertEqual(report.count, 100)
        self.assertTrue(report.all_optimal)
        self.assertLessEqual(report.max_kkt, 1e-7)
        self.assertLessEqual(report.max_objective_error, 1e-5)

    def test_equality_qp(self):
        rng = np.random.default_rng(1)
        M = rng.normal(size=(6, 6))
        H = M @ M.T + np.eye(6)
        f = rng.normal(size=6)
        A_eq = rng.normal(size=(2, 6))
        b_eq = rng.normal(size=2)
        kkt = np.block([[H, A_eq.T], [A_eq, np.zeros((2, 2))]])
        expected = np.linalg.solve(kkt, np.concatenate([-f, b_eq]))[:6]

        solution = solve_qp(QuadraticProgram(H, f, A_eq=A_eq, b_eq=b_eq))
        self.assertEqual(solution.status, "optimal")
        np.testing.assert_allclose(solution.z, expected, atol=1e-6)

    def test_infeasible(self):
        builder = QpBuilder()
        z = builder.variable("z", 1)
        builder.add_quadratic(z)
        builder.less_equal(-z, -1., label="above")
        builder.less_equal(z, -1., label="below")
        solution = solve_qp(builder.build(), max_iter=20000)
        self.assertNotEqual(solution.status, "optimal")

    def test_unconstrained(self):
        qp = QuadraticProgram(2 * np.eye(2), [-2., 4.])
        solution = solve_qp(qp)
        np.testing.assert_allclose(solution.z, [1., -2.], atol=1e-6)

    def test_indefinite(self):
        with self.assertRaises(ModelError):
            check_psd(np.diag([1., -1.]))

    def test_unknown_backend(self):
        qp = QuadraticProgram(np.eye(1), [0.])
        with self.assertRaises(KeyError):
            solve_qp(qp, backend="Simplex")

    def test_kkt_residuals_at_optimum(self):
        # min 1/2 x^2 - x s.t. x <= 0.5, optimum 0.5 with multiplier 0.5
        res = kkt_residuals(np.eye(1), np.array([-1.]), np.eye(1), np.array([-np.inf]),
                            np.array([0.5]), np.array([0.5]), np.array([0.5]), np.array([0.5]))
        self.assertLess(max(res), 1e-15)


@unittest.skipIf(osqp is None, "osqp is not installed")
class TestOsqpSolver(TestCase):
    def test_agrees_with_admm(self):
        rng = np.random.default_rng(7)
        qp, _, _ = random_box_qp(rng, 10)
        admm = solve_qp(qp)
        external = solve_qp(qp, backend="OsqpSolver")
        self.assertEqual(external.status, "optimal")
        np.testing.assert_allclose(external.objective, admm.objective, rtol=1e-5)
