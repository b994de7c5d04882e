from unittest import TestCase
import os
import shutil
import numpy as np
from matplotlib import use
use('Agg')

from robustdd.utilities.visualization import (
    get_ylims, skip_nans, plot_coefficients, plot_trace)
from robustdd.tightening import TighteningCoefficients, COEFFICIENT_NAMES
from robustdd.mpc import ClosedLoopTrace


class TestFunctions(TestCase):
    def setUp(self):
        self.y_data = np.linspace(1, 3, num=100)

    def test_get_ylims_frac_25(self):
        self.assertSequenceEqual(get_ylims(self.y_data), (0.5, 3.5))

    def test_get_ylims_frac_0(self):
        self.assertSequenceEqual(get_ylims(self.y_data, fraction=0), (1, 3))

    def test_get_ylims_asymmetric(self):
        self.assertSequenceEqual(get_ylims(self.y_data, fraction=[0., 0.5]), (1, 4))

    def test_get_ylims_one_point(self):
        self.assertSequenceEqual(get_ylims(np.array([2.]), fraction=1.), (1.8, 2.2))

    def test_get_ylims_no_finite_points(self):
        self.assertSequenceEqual(get_ylims(np.array([np.nan, np.inf])), (-1., 1.))

    def test_skip_nans(self):
        x, y = skip_nans((np.arange(4.), np.array([1., np.nan, 3., np.nan])))
        np.testing.assert_array_equal(x, [0., 2.])
        np.testing.assert_array_equal(y, [1., 3.])


class TestPlots(TestCase):
    def setUp(self):
        self.temp_dir = os.path.join(os.path.dirname(__file__), ".temp", "visualization")
        os.makedirs(self.temp_dir, exist_ok=True)

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def test_coefficients(self):
        coeff = TighteningCoefficients(
            **{name: np.linspace(0, i + 1, 6) for i, name in enumerate(COEFFICIENT_NAMES)})
        file = os.path.join(self.temp_dir, "coefficients_a.svg")
        plot_coefficients({"data": coeff, "oracle": coeff}, file, family="a", bound=10.)
        with open(file) as f:
            content = f.read()
        self.assertTrue(content.lstrip().startswith("<?xml"))
        for label in (">k<", ">value<", "a_c (data)", "a_c (oracle)", "x_max"):
            self.assertIn(label, content)
        self.assertNotIn("b_c", content)

    def test_reproducible(self):
        coeff = TighteningCoefficients(**{name: np.ones(4) for name in COEFFICIENT_NAMES})
        files = [os.path.join(self.temp_dir, f"plot_{i}.svg") for i in range(2)]
        for file in files:
            plot_coefficients({"data": coeff}, file, family="b", bound=1.)
        with open(files[0]) as f0, open(files[1]) as f1:
            self.assertEqual(f0.read(), f1.read())

    def test_trace(self):
        trace = ClosedLoopTrace("output", 1, 1, 2., 1., 2)
        for t in range(6):
            trace.record(t, [0.5 ** t], [0.1], [0.1], j_star=4. ** -t if t % 2 == 0 else None)
        file = os.path.join(self.temp_dir, "trace.svg")
        plot_trace(trace, file)
        with open(file) as f:
            content = f.read()
        for label in (">y<", ">u<", ">J*<", ">t<"):
            self.assertIn(label, content)
