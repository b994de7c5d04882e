from unittest import TestCase
import os
import shutil

from robustdd import cli
from robustdd.misc import ConfigurationError

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


class TestCli(TestCase):
    def setUp(self):
        self.temp_dir = os.path.join(os.path.dirname(__file__), ".temp", "cli")
        os.makedirs(self.temp_dir, exist_ok=True)

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def _main(self, *args):
        return cli.main(list(args) + ["--out", self.temp_dir])

    def test_collect(self):
        code = self._main("collect", "--config", os.path.join(DATA_DIR, "config_small.toml"))
        self.assertEqual(code, cli.EXIT_OK)
        self.assertTrue(os.path.isfile(os.path.join(self.temp_dir, "data", "hankel", "nu.csv")))

    def test_seed_override(self):
        self._main("collect", "--config", os.path.join(DATA_DIR, "config_small.toml"),
                   "--seed", "17")
        with open(os.path.join(self.temp_dir, "data", "hankel", "meta.toml")) as f:
            self.assertIn("seed = 17", f.read())

    def test_bad_config(self):
        code = self._main("collect", "--config", os.path.join(DATA_DIR, "config_unknown_option.toml"))
        self.assertEqual(code, cli.EXIT_CONFIG)

    def test_missing_dataset(self):
        code = self._main("estimate", "--config", os.path.join(DATA_DIR, "config_small.toml"))
        self.assertEqual(code, cli.EXIT_CONFIG)

    def test_bad_integer(self):
        self.assertEqual(self._main("run", "--n-seeds", "many"), cli.EXIT_CONFIG)

    def test_unknown_scenario(self):
        self.assertEqual(self._main("collect", "--scenario", "three-mass-spring"),
                         cli.EXIT_CONFIG)

    def test_execute_unknown_command(self):
        with self.assertRaises(ConfigurationError):
            cli.execute("train", self.temp_dir)
