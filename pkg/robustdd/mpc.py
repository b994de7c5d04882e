#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
The n-step receding horizon closed loop of both schemes, and the
monitors evaluated on its trace.

"""
from collections import namedtuple
import numpy as np

from robustdd.misc import FeasibilityError
from robustdd.ocp import solve_sf, solve_of
from robustdd.plant import build_extended, sample_disturbance, simulate_step

# relative drop of J* below which the loop counts as settled
SETTLE_DROP = 0.05
# slack of the prediction error check
PREDICTION_SLACK = 1e-9

SolveRecord = namedtuple("SolveRecord", ["t", "measured", "solution"])
StabilityReport = namedtuple(
    "StabilityReport", ["settled", "settling_time", "decay_rate", "decay_rate_per_step", "plateau"])
PredictionBoundReport = namedtuple(
    "PredictionBoundReport", ["checked", "violations", "values"])


class ClosedLoopTrace:
    """
    Time ordered records of one closed loop run.

    Parameters
    ----------
    kind : str
        'state' or 'output', i.e. which signal the rows hold.
    dim : int
        Dimension of the logged signal.
    m : int
        Input dimension.
    bound, u_max : float
        The signal and input constraint.
    block : int
        Steps between two solves, the order n.

    """
    def __init__(self, kind, dim, m, bound, u_max, block):
        self.kind = kind
        self.dim, self.m = dim, m
        self.bound, self.u_max = bound, u_max
        self.block = block
        self.rows = []
        self.solves = []

    def record(self, t, signal, u, nu, j_star=None, feasible=True):
        signal = np.asarray(signal, dtype=float).reshape(-1)
        u = np.full(self.m, np.nan) if u is None else np.asarray(u, dtype=float).reshape(-1)
        nu = np.full(self.m, np.nan) if nu is None else np.asarray(nu, dtype=float).reshape(-1)
        self.rows.append({
            "t": t, "signal": signal, "u": u, "nu": nu,
            "j_star": np.nan if j_star is None else float(j_star),
            "feasible": bool(feasible),
            "margin_x": self.bound - np.max(np.abs(signal)),
            "margin_u": self.u_max - np.max(np.abs(u)) if np.all(np.isfinite(u)) else np.nan,
            "pred_err": np.nan,
            "pred_bound": np.nan,
        })

    def set_prediction(self, t, error, bound):
        """ Store both sides of the prediction error bound for step t. """
        for row in self.rows:
            if row["t"] == t:
                row["pred_err"], row["pred_bound"] = float(error), float(bound)
                return
        raise KeyError(f"No step {t} in the trace")

    def __len__(self):
        return len(self.rows)

    @property
    def t(self):
        return np.array([row["t"] for row in self.rows], dtype=int)

    @property
    def signals(self):
        return np.array([row["signal"] for row in self.rows]).reshape(-1, self.dim)

    @property
    def inputs(self):
        return np.array([row["u"] for row in self.rows]).reshape(-1, self.m)

    @property
    def nus(self):
        return np.array([row["nu"] for row in self.rows]).reshape(-1, self.m)

    @property
    def margins(self):
        """ Columns margin_x and margin_u. """
        return np.array([[row["margin_x"], row["margin_u"]] for row in self.rows]).reshape(-1, 2)

    @property
    def predictions(self):
        """ Columns pred_err and pred_bound, nan where not checked. """
        return np.array([[row["pred_err"], row["pred_bound"]] for row in self.rows]).reshape(-1, 2)

    @property
    def j_star(self):
        """ Solve instants and J* there, as two arrays. """
        pairs = [(row["t"], row["j_star"]) for row in self.rows if np.isfinite(row["j_star"])]
        if not pairs:
            return np.zeros(0, dtype=int), np.zeros(0)
        times, values = zip(*pairs)
        return np.array(times, dtype=int), np.array(values)

    @property
    def feasible(self):
        return all(row["feasible"] for row in self.rows)

    def header(self):
        letter = "x" if self.kind == "state" else "y"
        return (["t"] + [f"{letter}{i}" for i in range(self.dim)]
                + [f"u{i}" for i in range(self.m)]
                + ["J_star", "feasible", "margin_x", "margin_u", "pred_err", "pred_bound"])

    def to_csv(self, file):
        """ One line per step, J_star and the prediction columns blank where not evaluated. """
        def fmt(value):
            return "" if not np.isfinite(value) else repr(float(value))

        with open(file, "w") as f:
            f.write(",".join(self.header()) + "\n")
            for row in self.rows:
                cells = ([str(row["t"])] + [fmt(v) for v in row["signal"]]
                         + [fmt(v) for v in row["u"]]
                         + [fmt(row["j_star"]), str(int(row["feasible"])),
                            fmt(row["margin_x"]), fmt(row["margin_u"]),
                            fmt(row["pred_err"]), fmt(row["pred_bound"])])
                f.write(",".join(cells) + "\n")


class Monitors:
    """
    Conclusions of the closed loop guarantees, checked on a trace.

    Attributes
    ----------
    recursive_feasibility : bool
    constraint_satisfaction : bool
    practical_stability : StabilityReport
    prediction_violations : int or None
        None if the prediction error bound was not checked.

    """
    def __init__(self, recursive_feasibility, constraint_satisfaction, practical_stability,
                 prediction_violations=None):
        self.recursive_feasibility = recursive_feasibility
        self.constraint_satisfaction = constraint_satisfaction
        self.practical_stability = practical_stability
        self.prediction_violations = prediction_violations

    @classmethod
    def from_trace(cls, trace, prediction_violations=None, tol=1e-9):
        margins = trace.margins
        satisfied = bool(np.all(margins[:, 0] >= -tol)) and bool(
            np.all(margins[np.isfinite(margins[:, 1]), 1] >= -tol))
        return cls(trace.feasible, satisfied, stability_summary(trace), prediction_violations)

    @property
    def passed(self):
        return (self.recursive_feasibility and self.constraint_satisfaction
                and not self.prediction_violations)

    def to_dict(self):
        stab = self.practical_stability
        out = {
            "recursive_feasibility": self.recursive_feasibility,
            "constraint_satisfaction": self.constraint_satisfaction,
            "practical_stability": {k: v for k, v in stab._asdict().items()
                                    if v is not None and not (isinstance(v, float) and np.isnan(v))},
            "passed": self.passed,
        }
        if self.prediction_violations is not None:
            out["prediction_violations"] = self.prediction_violations
        return out


def _disturbance(w, dim, length, w_max, seed):
    if w is not None:
        w = np.asarray(w, dtype=float).reshape(-1, dim)
        if w.shape[0] < length:
            raise ValueError(f"Need {length} disturbance samples, got {w.shape[0]}")
        return w
    return sample_disturbance(dim, length, w_max, seed)


def _padded(T_sim, n):
    return int(np.ceil(T_sim / n) * n)


def run_sf_closed_loop(plant, spec, x0, T_sim, w=None, w_max=None, seed=0,
                       check_prediction=False, **solver_kwargs):
    """
    Closed loop of the state feedback scheme.

    At t = 0, n, 2n, ... the problem is solved at the measured state and
    u = K x + nu_bar*_k applied for the next n steps.

    Parameters
    ----------
    plant : LtiPlant
        The true plant.
    spec : SfOcpSpec
    x0 : array_like
    T_sim : int
        Number of steps, padded to a multiple of n.
    w : array_like, optional
        Disturbance sequence. Drawn from the box with w_max and seed otherwise.
    w_max : float, optional
        Defaults to the bound of the spec.
    seed : int
    check_prediction : bool
        Evaluate the prediction error bound with the true plant.
    solver_kwargs
        tol, max_iter, backend of the qp solver.

    Returns
    -------
    trace : ClosedLoopTrace
    monitors : Monitors

    """
    n = plant.n
    steps = _padded(T_sim, n)
    w = _disturbance(w, n, steps, spec.w_max if w_max is None else w_max, seed)
    trace = ClosedLoopTrace("state", n, plant.m, spec.x_max, spec.u_max, n)
    x = np.asarray(x0, dtype=float).reshape(-1)

    for t in range(0, steps, n):
        try:
            solution = solve_sf(spec, x, **solver_kwargs)
        except FeasibilityError:
            trace.record(t, x, None, None, feasible=False)
            break
        trace.solves.append(SolveRecord(t, x.copy(), solution))
        for k in range(n):
            u = spec.K @ x + solution.nu_bar[k]
            trace.record(t + k, x, u, solution.nu_bar[k],
                         j_star=solution.J_star if k == 0 else None)
            x, _ = simulate_step(plant, x, u, w[t + k])

    violations = None
    if check_prediction:
        report = check_prediction_bound(trace, plant, spec)
        for t, k, lhs, rhs in report.values:
            if k < n:
                trace.set_prediction(t + k, lhs, rhs)
        violations = len(report.violations)
    return trace, Monitors.from_trace(trace, prediction_violations=violations)


def run_of_closed_loop(model, spec, T_sim, warmup=None, xi0=None, w=None, w_max=None, seed=0,
                       **solver_kwargs):
    """
    Closed loop of the output feedback scheme.

    A warm-up phase with nu = 0 provides the first input/output history,
    then u_{t+k} = K xi_{t+k} + nu_bar*_k(t) is applied for k = 0 .. n-1.

    Parameters
    ----------
    model : DifferenceOperatorModel
        The true plant.
    spec : OfOcpSpec
    T_sim : int
        Number of steps after the warm-up, padded to a multiple of n.
    warmup : int, optional
        Number of warm-up steps, at least n, default n.
    xi0 : array_like, optional
        Extended state before the warm-up, default 0.
    w, w_max, seed
        As in run_sf_closed_loop, w has T_sim + warmup rows.

    Returns
    -------
    trace : ClosedLoopTrace
        Rows from t = 0 on, after the warm-up.
    monitors : Monitors

    """
    ext = build_extended(model)
    n, m, p = ext.n, ext.m, ext.p
    warmup = n if warmup is None else max(int(warmup), n)
    steps = _padded(T_sim, n)
    w = _disturbance(w, p, steps + warmup, spec.w_max if w_max is None else w_max, seed)
    xi = np.zeros(ext.dim) if xi0 is None else np.asarray(xi0, dtype=float).reshape(-1)
    trace = ClosedLoopTrace("output", p, m, spec.y_max, spec.u_max, n)

    def step(xi, nu, w_k):
        u = spec.K_tilde @ xi + nu
        y = ext.C @ xi + ext.D @ u + w_k
        return ext.A @ xi + ext.B @ u + ext.E @ w_k, u, y

    nu_hist, y_hist = [], []
    for k in range(warmup):
        xi, _, y = step(xi, np.zeros(m), w[k])
        nu_hist.append(np.zeros(m))
        y_hist.append(y)

    for t in range(0, steps, n):
        nu_past, y_past = np.array(nu_hist[-n:]), np.array(y_hist[-n:])
        try:
            solution = solve_of(spec, nu_past, y_past, xi, **solver_kwargs)
        except FeasibilityError:
            trace.record(t, y_hist[-1], None, None, feasible=False)
            break
        trace.solves.append(SolveRecord(t, xi.copy(), solution))
        for k in range(n):
            nu = solution.nu_bar[k]
            xi, u, y = step(xi, nu, w[warmup + t + k])
            trace.record(t + k, y, u, nu, j_star=solution.J_star if k == 0 else None)
            nu_hist.append(nu)
            y_hist.append(y)

    return trace, Monitors.from_trace(trace)


def check_prediction_bound(trace, plant, spec):
    """
    Check ||x_hat*_{t+k} - x_bar*_k(t)||_inf <= c_alpha,k ||alpha*||_1 + c_sigma,k ||sigma*||_inf.

    x_hat* is the undisturbed open loop response of the true pre-stabilized
    plant to nu_bar*(t), for k = 0 .. L at every solve instant.

    Returns
    -------
    PredictionBoundReport
        Number of checked pairs, the list of (t, k, lhs, rhs) violations
        and the list of all (t, k, lhs, rhs).

    """
    a_k = plant.closed_loop(spec.K)
    c_alpha, c_sigma = spec.pec
    checked, violations, values = 0, [], []
    for record in trace.solves:
        sol = record.solution
        alpha_norm = np.sum(np.abs(sol.alpha))
        sigma_norm = np.max(np.abs(sol.sigma))
        x_hat = record.measured.copy()
        for k in range(spec.L + 1):
            lhs = np.max(np.abs(x_hat - sol.x_bar[k]))
            rhs = c_alpha[k] * alpha_norm + c_sigma[k] * sigma_norm
            checked += 1
            values.append((record.t, k, float(lhs), float(rhs)))
            if lhs > rhs + PREDICTION_SLACK:
                violations.append((record.t, k, float(lhs), float(rhs)))
            if k < spec.L:
                x_hat = a_k @ x_hat + plant.B @ sol.nu_bar[k]
    return PredictionBoundReport(checked, violations, values)


def stability_summary(trace):
    """
    Exponential decay of J* over the solve instants.

    The loop counts as settled at the first solve instant after which J*
    drops by less than 5 %. log J* is fitted by least squares over the
    solve instants up to there.

    Returns
    -------
    StabilityReport
        decay_rate is per solve (n steps), decay_rate_per_step per step,
        plateau the mean J* from the settling instant on.

    """
    times, values = trace.j_star
    if values.size == 0:
        return StabilityReport(False, None, float("nan"), float("nan"), float("nan"))
    if np.all(values <= 0):
        return StabilityReport(True, int(times[0]), float("nan"), float("nan"), 0.)

    settle = values.size - 1
    for j in range(values.size - 1):
        if values[j + 1] > (1 - SETTLE_DROP) * values[j]:
            settle = j
            break
    settled = settle < values.size - 1

    segment = np.arange(settle + 1)
    positive = values[segment] > 0
    rate = rate_step = float("nan")
    if np.sum(positive) >= 2:
        slope = np.polyfit(segment[positive], np.log(values[segment][positive]), 1)[0]
        rate = -slope
        rate_step = rate / (trace.block if trace.block else 1)
    return StabilityReport(settled, int(times[settle]), float(rate), float(rate_step),
                           float(np.mean(values[settle:])))


def settled_within(trace, settle_time, level):
    """ Whether ||signal_t||_inf <= level for all logged t >= settle_time. """
    late = trace.t >= settle_time
    if not np.any(late):
        return False
    return bool(np.max(np.abs(trace.signals[late])) <= level)
