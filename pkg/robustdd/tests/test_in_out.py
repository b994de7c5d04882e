from unittest import TestCase
import os
import shutil
import numpy as np

from robustdd.core import Configuration
from robustdd.in_out import (
    IOHandler, get_subfolder, save_sequence, load_sequence, save_dataset, load_dataset)
from robustdd.plant import DataSet


class TestInOut(TestCase):
    def setUp(self):
        self.temp_dir = os.path.join(os.path.dirname(__file__), ".temp", "in_out")
        os.makedirs(self.temp_dir, exist_ok=True)
        self.io = IOHandler(Configuration(self.temp_dir))

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def test_get_subfolder(self):
        self.assertEqual(get_subfolder("out", "hankel"), "out/data/hankel")
        self.assertEqual(get_subfolder("out/", "record"), "out/data/constants")
        self.assertEqual(len(get_subfolder("out")), 7)

    def test_create_subfolder(self):
        folder = self.io.get_subfolder("plots", create=True)
        self.assertTrue(os.path.isdir(folder))

    def test_paths(self):
        self.assertTrue(self.io.get_constants_path("data").endswith("constants/constants_data.toml"))
        self.assertTrue(self.io.get_coefficients_path("oracle").endswith(
            "coefficients/coefficients_oracle.csv"))
        folder = self.io.get_run_folder(4, create=True)
        self.assertTrue(os.path.isdir(folder))
        self.assertTrue(folder.endswith("seed_4"))
        with self.assertRaises(NameError):
            self.io.get_dataset_folder("validation")

    def test_sequence(self):
        file = os.path.join(self.temp_dir, "seq.csv")
        z = np.array([[0.1, 1. / 3.], [2., -1e-17]])
        save_sequence(file, z, "x")
        with open(file) as f:
            self.assertEqual(f.readline().strip(), "x0,x1")
        np.testing.assert_array_equal(load_sequence(file), z)

    def test_single_row(self):
        file = os.path.join(self.temp_dir, "seq.csv")
        save_sequence(file, [[1., 2.]], "u")
        self.assertTupleEqual(load_sequence(file).shape, (1, 2))

    def test_missing_sequence(self):
        with self.assertRaises(FileNotFoundError):
            load_sequence(os.path.join(self.temp_dir, "nope.csv"))

    def test_dataset(self):
        nu = np.arange(6.).reshape(3, 2)
        state = np.ones((4, 1))
        data = DataSet(nu, state=state, gain=[[0.5], [0.1]], disturbance=[[0.1], [-0.1], [0.]],
                       w_max=0.1, seed=9)
        folder = os.path.join(self.temp_dir, "dataset")
        save_dataset(data, folder)
        loaded = load_dataset(folder)
        self.assertEqual(loaded.kind, "state")
        self.assertEqual(loaded.seed, 9)
        self.assertEqual(loaded.w_max, 0.1)
        np.testing.assert_array_equal(loaded.nu, nu)
        np.testing.assert_array_equal(loaded.state, state)
        np.testing.assert_array_equal(loaded.gain, [[0.5], [0.1]])

    def test_missing_dataset(self):
        with self.assertRaises(FileNotFoundError):
            self.io.load_datasets()

    def test_print_log(self):
        self.io.print_log(["first", "second"])
        self.io.print_log("third")
        with open(os.path.join(self.temp_dir, "log.txt")) as f:
            self.assertListEqual(f.read().splitlines(), ["first", "second", "third"])
