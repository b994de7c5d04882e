from unittest import TestCase
import io
import os
import shutil
import numpy as np
import toml

import robustdd.logging as logging
from robustdd.mpc import ClosedLoopTrace, Monitors


class TestTableLogger(TestCase):
    def test_table(self):
        target = io.StringIO()
        logger = logging.TableLogger(target, ["Criterion", "Value", "Passed"])
        logger.level_file()
        logger.write_line(["max b_c", 0.123456789, True])
        logger.write_line(["violations", 0, False])
        lines = target.getvalue().splitlines()
        self.assertListEqual(lines, [
            "Criterion   | Value       | Passed     ",
            "------------+-------------+------------",
            "max b_c     | 0.123457    | yes        ",
            "violations  | 0           | no         ",
        ])

    def test_write_before_level(self):
        logger = logging.TableLogger(io.StringIO(), ["a"])
        with self.assertRaises(ValueError):
            logger.write_line([1.])

    def test_wrong_length(self):
        logger = logging.TableLogger(io.StringIO(), ["a", "b"])
        logger.level_file()
        with self.assertRaises(ValueError):
            logger.write_line([1.])


class TestGenLine(TestCase):
    def test_cells(self):
        cells, widths = logging.gen_line_cells(["x", 1.5, np.nan, None, np.bool_(True)],
                                               minimum_cell_width=3)
        self.assertListEqual(cells, ["x  ", "1.5", "n/a", "n/a", "yes"])
        self.assertListEqual(widths, [3, 3, 3, 3, 3])

    def test_fixed_widths(self):
        line, _ = logging.gen_line_str([1., "ab"], widths=[4, 4], separator="|")
        self.assertEqual(line, "1   |ab  ")


class TestFileLoggers(TestCase):
    def setUp(self):
        self.temp_dir = os.path.join(os.path.dirname(__file__), ".temp", "logging")
        os.makedirs(self.temp_dir, exist_ok=True)
        self.trace = ClosedLoopTrace("state", 1, 1, 2., 1., 1)
        self.trace.record(0, [1.], [0.5], [0.5], j_star=2.)
        self.trace.record(1, [0.25], [0.], [0.])

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def test_log_trace(self):
        file = os.path.join(self.temp_dir, "trace_log.txt")
        logging.log_trace(self.trace, file)
        with open(file) as f:
            lines = f.read().splitlines()
        self.assertEqual(len(lines), 4)
        self.assertTrue(lines[0].startswith("t           | x0"))
        self.assertTrue(lines[0].rstrip().endswith("pred_err    | pred_bound"))
        self.assertIn("n/a", lines[3])

    def test_monitor_logger(self):
        file = os.path.join(self.temp_dir, "monitors.toml")
        logger = logging.MonitorLogger(file)
        logger.add("seed_0", Monitors.from_trace(self.trace))
        logger.write()
        content = toml.load(file)
        self.assertTrue(content["passed"])
        self.assertTrue(content["runs"]["seed_0"]["constraint_satisfaction"])
        self.assertNotIn("prediction_violations", content["runs"]["seed_0"])
