from unittest import TestCase
import numpy as np

import robustdd.misc as misc


class TestRegister(TestCase):
    def setUp(self):
        self.register = {
            "_func": _func,
            "_Cls": _Cls,
            "_made": misc.factory(_made),
        }

    def _parse_entry(self, toml_entry):
        return misc.from_register(toml_entry, self.register)

    def test_func_str(self):
        self.assertEqual(self._parse_entry("_func")(12), 12)

    def test_func_list(self):
        with self.assertRaises(TypeError):
            self._parse_entry(["_func", 5])

    def test_class_str(self):
        with self.assertRaises(TypeError):
            self._parse_entry("_Cls")

    def test_class_list(self):
        self.assertTupleEqual(self._parse_entry(["_Cls", 0])(12), (0, 12))

    def test_class_dict(self):
        self.assertTupleEqual(
            self._parse_entry({"name": "_Cls", "a": 0})(12), (0, 12))

    def test_class_dict_name_missing(self):
        with self.assertRaises(KeyError):
            self._parse_entry({"names": "_Cls", "a": 0})

    def test_class_list_dict(self):
        self.assertTupleEqual(
            self._parse_entry(["_Cls", {"a": 0}])(12), (0, 12))

    def test_factory_is_called(self):
        self.assertEqual(self._parse_entry("_made"), "made")

    def test_unknown_name(self):
        with self.assertRaises(KeyError):
            self._parse_entry("_nope")

    def test_get_register(self):
        saved, register = misc.get_register()

        @register
        def some_plant():
            return 1
        self.assertIs(saved["some_plant"], some_plant)


class TestExceptions(TestCase):
    def test_hierarchy(self):
        self.assertTrue(issubclass(misc.UnboundedConstantError, misc.EstimationError))
        self.assertTrue(issubclass(misc.ToleranceError, misc.EstimationError))
        self.assertTrue(issubclass(misc.ConfigurationError, ValueError))
        self.assertTrue(issubclass(misc.DimensionError, ValueError))

    def test_feasibility_error_payload(self):
        x_t = np.array([1., 2.])
        error = misc.FeasibilityError("infeasible", x_t=x_t, violated_row="state[0]")
        self.assertEqual(error.violated_row, "state[0]")
        np.testing.assert_array_equal(error.x_t, x_t)


def _func(a):
    return a


class _Cls:
    def __init__(self, a):
        self.a = a

    def __call__(self, b):
        return self.a, b


def _made():
    return "made"
