from unittest import TestCase
import os
import shutil
import numpy as np

from robustdd.misc import DimensionError, HorizonError
from robustdd.constants import SystemConstants, dbar_from_rho, oracle_constants
from robustdd.tightening import (
    TighteningCoefficients, prediction_error_constants, sf_coefficients, COEFFICIENT_NAMES)
from robustdd.lib.plants import plants
from robustdd.core import stream_seeds


def hand_constants(w_max=0.1):
    rho = [1., 0.5, 0.25, 0.125]
    return SystemConstants(rho=rho, dbar=dbar_from_rho(rho, w_max)[:4],
                           c_pe=2., gamma=3., k_bar=0.5)


class TestPredictionErrorConstants(TestCase):
    def test_values(self):
        pec = prediction_error_constants(hand_constants(), L=2, N=3)
        np.testing.assert_allclose(pec.c_alpha, [0.2, 0.2, 0.2])
        np.testing.assert_allclose(pec.c_sigma, [2., 1.5, 1.25])

    def test_short_dbar(self):
        with self.assertRaises(DimensionError):
            prediction_error_constants(hand_constants(), L=2, N=5)

    def test_short_rho(self):
        with self.assertRaises(DimensionError):
            prediction_error_constants(hand_constants(), L=4, N=3)


class TestSfCoefficients(TestCase):
    def test_recursion_by_hand(self):
        consts = hand_constants()
        pec = prediction_error_constants(consts, L=2, N=3)
        coeff = sf_coefficients(pec, consts, L=2, n=1, x_max=10., w_max=0.1)
        self.assertEqual(coeff.horizon, 2)
        np.testing.assert_allclose(coeff.a_u, [0., 1.])
        np.testing.assert_allclose(coeff.a_alpha, [0.2, 0.8])
        np.testing.assert_allclose(coeff.a_sigma, [2., 6.])
        np.testing.assert_allclose(coeff.a_c, [0., 10.4])
        np.testing.assert_allclose(coeff.b_u, [0., 0.5])
        np.testing.assert_allclose(coeff.b_alpha, [0.1, 0.4])
        np.testing.assert_allclose(coeff.b_sigma, [1., 3.])
        np.testing.assert_allclose(coeff.b_c, [0., 5.2])

    def test_no_disturbance(self):
        plant = plants["two_mass_spring"]()
        consts = oracle_constants(plant, np.zeros((1, 4)), L=12, N=50, w_max=0.)
        pec = prediction_error_constants(consts, 12, 50)
        coeff = sf_coefficients(pec, consts, 12, 4, x_max=10., w_max=0.)
        for name in ("a_u", "a_alpha", "a_c", "b_u", "b_alpha", "b_sigma", "b_c"):
            np.testing.assert_array_equal(getattr(coeff, name), 0., err_msg=name)
        self.assertTrue(np.all(coeff.a_sigma > 0))

    def test_horizon_below_order(self):
        consts = hand_constants()
        pec = prediction_error_constants(consts, L=2, N=3)
        with self.assertRaises(HorizonError):
            sf_coefficients(pec, consts, L=2, n=3, x_max=10., w_max=0.1)

    def test_unstabilized_two_mass_spring(self):
        plant = plants["two_mass_spring"]()
        consts = oracle_constants(plant, np.zeros((1, 4)), L=12, N=50, w_max=1e-3,
                                  input_bound=1.75, seed=stream_seeds(0, 1)[0])
        pec = prediction_error_constants(consts, 12, 50)
        coeff = sf_coefficients(pec, consts, 12, 4, x_max=10., w_max=1e-3)
        self.assertGreaterEqual(coeff.a_c[4], 150.)
        self.assertLessEqual(coeff.a_c[4], 350.)


class TestCoefficientFile(TestCase):
    def setUp(self):
        self.temp_dir = os.path.join(os.path.dirname(__file__), ".temp", "test_tightening")
        os.makedirs(self.temp_dir, exist_ok=True)

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def test_csv(self):
        consts = hand_constants()
        pec = prediction_error_constants(consts, L=2, N=3)
        coeff = sf_coefficients(pec, consts, L=2, n=1, x_max=10., w_max=0.1)
        file = os.path.join(self.temp_dir, "coefficients.csv")
        coeff.to_csv(file)
        with open(file) as f:
            self.assertEqual(f.readline().strip(), ",".join(("k", ) + COEFFICIENT_NAMES))
        loaded = TighteningCoefficients.from_csv(file)
        for name in COEFFICIENT_NAMES:
            np.testing.assert_array_equal(getattr(loaded, name), getattr(coeff, name))

    def test_missing_coefficient(self):
        with self.assertRaises(ValueError):
            TighteningCoefficients(a_u=[0.])
