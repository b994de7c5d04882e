"""
Table and toml logs of the pipeline: the closed loop log of every run,
the reproduction report and the monitors summary.
"""

import numpy as np
import toml


def format_cell(entry, float_precision):
    """ Text of one cell: yes/no for booleans, n/a for None and nan. """
    if isinstance(entry, (bool, np.bool_)):
        return "yes" if entry else "no"
    if entry is None:
        return "n/a"
    if isinstance(entry, str):
        return entry
    value = float(entry)
    return "n/a" if np.isnan(value) else f"{value:.{float_precision}g}"


def gen_line_cells(data, widths=None, float_precision=4, minimum_cell_width=9):
    """
    Left aligned cells of one table line.

    Parameters
    ----------
    data : sequence
        Strings, numbers, booleans or None, one per column.
    widths : list or None
        Width of every column. If None, each column is as wide as its
        text, but at least minimum_cell_width. Text that is wider than a
        given width is not cut.
    float_precision : int
        Significant digits of numbers.
    minimum_cell_width : int

    Returns
    -------
    cells : list of str
    widths : list of int

    """
    texts = [format_cell(entry, float_precision) for entry in data]
    if widths is None:
        widths = [max(minimum_cell_width, len(text)) for text in texts]
    cells = [text.ljust(width) for text, width in zip(texts, widths)]
    return cells, widths


def gen_line_str(data, widths=None, separator=" | ", float_precision=4, minimum_cell_width=9):
    """ The cells of gen_line_cells joined by separator, and their widths. """
    cells, widths = gen_line_cells(data, widths, float_precision, minimum_cell_width)
    return separator.join(cells), widths


class TableLogger:
    """
    Writes rows of values as fixed width table to an opened file.

    Call level_file once for the header, then write_line per row.
    Column widths are taken from the header.

    Parameters
    ----------
    log_file : file object
    column_names : list of str
    float_precision : int
        Significant digits of numbers.
    minimum_cell_width : int

    """
    def __init__(self, log_file, column_names, float_precision=6, minimum_cell_width=11):
        self.log_file = log_file
        self.column_names = list(column_names)
        self.float_precision = float_precision
        self.minimum_cell_width = minimum_cell_width
        self._widths = None

    def _line(self, values, separator=" | "):
        return gen_line_str(values, self._widths, separator,
                            self.float_precision, self.minimum_cell_width)

    def level_file(self):
        """ Write the header and the rule below it. """
        header, self._widths = self._line(self.column_names)
        rule, _ = self._line(["-" * width for width in self._widths], separator="-+-")
        self.log_file.write(f"{header}\n{rule}\n")

    def write_line(self, values):
        if self._widths is None:
            raise ValueError("Can not log: .level_file has to be called first")
        if len(values) != len(self.column_names):
            raise ValueError(f"Can not log: Expected {len(self.column_names)} values, "
                             f"but got {len(values)}")
        self.log_file.write(self._line(values)[0] + "\n")


def log_trace(trace, file):
    """ Write a closed loop trace as table, one line per step. """
    with open(file, "w") as f:
        logger = TableLogger(f, trace.header())
        logger.level_file()
        for row in trace.rows:
            logger.write_line(
                [str(row["t"])] + list(row["signal"]) + list(row["u"])
                + [row["j_star"], row["feasible"], row["margin_x"], row["margin_u"],
                   row["pred_err"], row["pred_bound"]])


class MonitorLogger:
    """
    For writing the monitors of one or more closed loop runs as toml.

    Parameters
    ----------
    file : str
        Path of the toml file.

    """
    def __init__(self, file):
        self.file = file
        self.runs = {}

    def add(self, name, monitors):
        self.runs[name] = monitors.to_dict()

    @property
    def passed(self):
        return all(run["passed"] for run in self.runs.values())

    def write(self):
        content = {"passed": self.passed, "runs": self.runs}
        with open(self.file, "w") as f:
            toml.dump(content, f)
