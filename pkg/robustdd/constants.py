#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Estimation of the system constants of the constraint tightening.

rho_k and dbar_k bound the propagation of disturbances through the
pre-stabilized plant, c_pe measures the excitation of the Hankel data,
Gamma is the controllability constant and eta_A .. eta_D bound the
matrices of the non-minimal realization in the output feedback case.

The bounds of rho and eta come from an S-lemma feasibility problem

    P1(s) - tau P2 >= 0,  tau >= 0,

which is searched for the smallest s = sigma^2 by bisection.

"""
import itertools
import warnings
from collections import namedtuple
import numpy as np
import scipy.linalg
import scipy.optimize
import toml

from robustdd.misc import (
    ConfigurationError, EstimationError, ToleranceError, UnboundedConstantError,
    DimensionError, ExcitationError)
from robustdd.signals import build_hankel, pinv, pe_order_check, generate_pe_input
from robustdd.plant import (
    LtiPlant, collect_state_data, controllability_matrix, build_extended, sample_disturbance)
from robustdd.convex import QpBuilder, epigraph_abs, solve_qp

# largest state dimension for the vertex enumeration of estimate_gamma
MAX_VERTEX_DIM = 12
# relative psd slack of the S-lemma test
PSD_SLACK = 1e-9
# upper end of the multiplier search
TAU_LIMIT = 1e15

EtaConstants = namedtuple("EtaConstants", ["A", "B", "C", "D"])
ScalarBoundCheck = namedtuple("ScalarBoundCheck", ["sigma", "energies", "sweep"])


class SystemConstants:
    """
    The constants entering the tightening, with their provenance.

    Parameters
    ----------
    rho : array_like, optional
        rho_0 .. rho_N, rho_k >= ||A_K^k||_inf.
    dbar : array_like, optional
        dbar_0 .. dbar_N.
    c_pe : float, optional
    gamma : float, optional
    k_bar : float
        ||K||_inf.
    eta : EtaConstants, optional
        Output feedback constants.
    provenance : dict, optional
        Constant name -> 'data' or 'oracle'.

    """
    fields = ("rho", "dbar", "c_pe", "gamma", "k_bar", "eta")

    def __init__(self, rho=None, dbar=None, c_pe=None, gamma=None, k_bar=0.,
                 eta=None, provenance=None):
        self.rho = None if rho is None else np.asarray(rho, dtype=float)
        self.dbar = None if dbar is None else np.asarray(dbar, dtype=float)
        self.c_pe = None if c_pe is None else float(c_pe)
        self.gamma = None if gamma is None else float(gamma)
        self.k_bar = float(k_bar)
        self.eta = None if eta is None else EtaConstants(*(float(e) for e in eta))
        self.provenance = {} if provenance is None else dict(provenance)

        if self.rho is not None and not np.isclose(self.rho[0], 1.):
            raise ValueError(f"rho_0 must be 1, got {self.rho[0]}")
        if self.dbar is not None:
            if self.dbar[0] != 0:
                raise ValueError(f"dbar_0 must be 0, got {self.dbar[0]}")
            if np.any(np.diff(self.dbar) < 0):
                raise ValueError("dbar must be nondecreasing")

    def to_dict(self):
        out = {}
        for field in self.fields:
            value = getattr(self, field)
            if value is None:
                continue
            if isinstance(value, np.ndarray):
                value = value.tolist()
            elif isinstance(value, EtaConstants):
                value = dict(value._asdict())
            out[field] = value
        out["provenance"] = {k: v for k, v in self.provenance.items() if k in out}
        return out

    def to_toml(self, file):
        """ Save as toml, one key per constant plus a provenance table. """
        with open(file, "w") as f:
            toml.dump(self.to_dict(), f)

    @classmethod
    def from_toml(cls, file):
        with open(file) as f:
            content = toml.load(f)
        eta = content.get("eta")
        if eta is not None:
            eta = EtaConstants(eta["A"], eta["B"], eta["C"], eta["D"])
        return cls(rho=content.get("rho"), dbar=content.get("dbar"),
                   c_pe=content.get("c_pe"), gamma=content.get("gamma"),
                   k_bar=content.get("k_bar", 0.), eta=eta,
                   provenance=content.get("provenance"))

    def __repr__(self):
        return (f"SystemConstants(c_pe={self.c_pe}, gamma={self.gamma}, "
                f"k_bar={self.k_bar}, eta={self.eta})")


class SLemmaProblem:
    """
    Find the smallest s with P1(s) - tau P2 >= 0 for some tau >= 0.

    P1(s) = p1_const + s * p1_slope.

    Parameters
    ----------
    p1_const, p1_slope : ndarray
        Symmetric matrices.
    p2 : ndarray
        Symmetric matrix.
    label : str
        Name of the bounded quantity, for messages.

    """
    def __init__(self, p1_const, p1_slope, p2, label=""):
        self.p1_const = np.asarray(p1_const, dtype=float)
        self.p1_slope = np.asarray(p1_slope, dtype=float)
        p2 = np.asarray(p2, dtype=float)
        self.p2 = 0.5 * (p2 + p2.T)
        self.label = label

    def p1(self, s):
        return self.p1_const + s * self.p1_slope

    @classmethod
    def from_data(cls, regressors, targets, noise, block, label=""):
        """
        Bound a block of the unknown Z in targets = Z' regressors + noise.

        Every Z consistent with noise noise' <= Phi satisfies
        Z_b' Z_b <= s I for the rows Z_b of the block.

        Parameters
        ----------
        regressors : ndarray
            Shape (r, M).
        targets : ndarray
            Shape (q, M).
        noise : ndarray
            The bound Phi on the noise energy, q x q.
        block : slice
            Rows of Z, i.e. of the regressors, to bound.

        """
        regressors = np.atleast_2d(regressors)
        targets = np.atleast_2d(targets)
        r, q = regressors.shape[0], targets.shape[0]
        gram = np.block([[regressors @ regressors.T, -regressors @ targets.T],
                         [-targets @ regressors.T, targets @ targets.T]])
        p2 = -gram
        p2[r:, r:] += noise
        p1_const = np.zeros((r + q, r + q))
        rows = np.arange(r)[block]
        p1_const[rows, rows] = -1.
        p1_slope = np.zeros((r + q, r + q))
        p1_slope[r:, r:] = np.eye(q)
        return cls(p1_const, p1_slope, p2, label=label)


def _lambda_min(matrix):
    return scipy.linalg.eigvalsh(matrix, subset_by_index=[0, 0])[0]


def _best_lambda_min(p1, p2, threshold, tau_tol):
    """
    Maximize lambda_min(p1 - tau p2) over tau >= 0 by golden section.

    Stops early as soon as the value reaches the threshold.

    """
    def value(tau):
        return _lambda_min(p1 - tau * p2)

    best = value(0.)
    if best >= threshold or not np.any(p2):
        return best

    # double the upper end until the concave function decreases
    lower, upper = 0., 1.
    f_upper = value(upper)
    while f_upper < threshold:
        f_next = value(2 * upper)
        if f_next <= f_upper or upper > TAU_LIMIT:
            break
        lower, upper, f_upper = upper, 2 * upper, f_next
    best = max(best, f_upper)
    if best >= threshold:
        return best

    a, b = lower, 2 * upper
    ratio = (np.sqrt(5) - 1) / 2
    c, d = b - ratio * (b - a), a + ratio * (b - a)
    f_c, f_d = value(c), value(d)
    for _ in range(500):
        if max(f_c, f_d) >= threshold or b - a <= tau_tol * max(1., upper):
            return max(best, f_c, f_d)
        if f_c >= f_d:
            b, d, f_d = d, c, f_c
            c = b - ratio * (b - a)
            f_c = value(c)
        else:
            a, c, f_c = c, d, f_d
            d = a + ratio * (b - a)
            f_d = value(d)
    raise ToleranceError("Line search over the S-lemma multiplier did not converge")


def _is_feasible(problem, p2, s, tau_tol):
    p1 = problem.p1(s)
    threshold = -PSD_SLACK * np.linalg.norm(p1)
    return _best_lambda_min(p1, p2, threshold, tau_tol) >= threshold


def slemma_min_sigma(problem, tol=1e-6, cap=1e6, tau_tol=1e-8):
    """
    Smallest sigma^2 of an S-lemma problem.

    Parameters
    ----------
    problem : SLemmaProblem
    tol : float
        Relative tolerance of the bisection on sigma^2.
    cap : float
        Largest sigma^2 that is tried.
    tau_tol : float
        Tolerance of the line search over tau.

    Returns
    -------
    float
        sigma^2, on the feasible side of the bisection.

    """
    p2 = problem.p2
    scale = np.linalg.norm(p2)
    if scale > 0:
        p2 = p2 / scale

    if _is_feasible(problem, p2, 0., tau_tol):
        return 0.
    upper = 1.
    while not _is_feasible(problem, p2, upper, tau_tol):
        if upper >= cap:
            raise UnboundedConstantError(
                f"S-lemma problem {problem.label} infeasible up to sigma^2 = {cap}")
        upper = min(2 * upper, cap)
    lower = upper / 2 if upper > 1 else 0.

    for _ in range(200):
        if upper - lower <= tol * upper:
            return upper
        mid = 0.5 * (lower + upper)
        if _is_feasible(problem, p2, mid, tau_tol):
            upper = mid
        else:
            lower = mid
    raise ToleranceError(f"Bisection for {problem.label} did not converge")


def dbar_from_rho(rho, w_max):
    """ dbar_k = w_max * sum_{j<k} rho_j, for k up to len(rho). """
    return w_max * np.concatenate([[0.], np.cumsum(rho)])


def _submultiplicative(bounds, horizon):
    """
    Extend 2-norm bounds s_0 .. s_K of A^k to k <= horizon.

    Uses ||A^k|| <= ||A^j|| ||A^(k-j)||, also to improve the given entries.

    """
    known = len(bounds) - 1
    s = np.full(horizon + 1, np.inf)
    s[:min(known, horizon) + 1] = bounds[:horizon + 1]
    for k in range(2, horizon + 1):
        for j in range(1, min(k, known + 1)):
            s[k] = min(s[k], s[j] * s[k - j])
    return s


def estimate_rho_dbar(data, horizon, method="power", sigma_cap=1e6, tol=1e-6, max_step=None):
    """
    Data-driven overbounds rho_k >= ||A_K^k||_inf and dbar_k.

    Parameters
    ----------
    data : DataSet
        State dataset.
    horizon : int
        rho and dbar are returned for k = 0 .. horizon.
    method : str
        'power' uses rho_k = sqrt(n) sigma_A^k of the one step bound sigma_A.
        'multistep' bounds ||A_K^k||_2 directly for k <= max_step by
        regressing x_{i+k} on x_i and nu_i .. nu_{i+k-1}, using the
        already certified dbar_k as bound on the noise.
    sigma_cap : float
        Cap of the S-lemma bisection.
    tol : float
        Relative tolerance of the bisection.
    max_step : int, optional
        Largest k of the multistep bounds, default min(horizon, 12).

    Returns
    -------
    rho : ndarray
    dbar : ndarray
        Both of length horizon + 1.

    """
    if data.kind != "state":
        raise DimensionError("estimate_rho_dbar needs a state dataset")
    if method not in ("power", "multistep"):
        raise ValueError(f"Unknown method {method}, must be 'power' or 'multistep'")
    x, nu, w_max = data.state, data.nu, data.w_max
    n, length = x.shape[1], data.length

    def sigma_sq(regressors, targets, energy, label):
        problem = SLemmaProblem.from_data(
            regressors, targets, energy * np.eye(n), slice(0, n), label=label)
        return slemma_min_sigma(problem, tol=tol, cap=sigma_cap)

    sigma_a = np.sqrt(sigma_sq(np.vstack([x[:-1].T, nu.T]), x[1:].T,
                               n * w_max ** 2 * length, "rho_1"))
    bounds = [1., sigma_a]

    if method == "multistep":
        max_step = min(horizon, 12) if max_step is None else min(max_step, horizon)
        for k in range(2, max_step + 1):
            columns = length - k + 1
            if columns < n + k * nu.shape[1]:
                break
            rho = np.sqrt(n) * _submultiplicative(np.array(bounds), k - 1)
            rho[0] = 1.
            dbar_k = dbar_from_rho(rho, w_max)[k]
            regressors = np.vstack(
                [x[:columns].T] + [nu[j:j + columns].T for j in range(k)])
            s_k = np.sqrt(sigma_sq(regressors, x[k:k + columns].T,
                                   n * dbar_k ** 2 * columns, f"rho_{k}"))
            bounds.append(min(s_k, sigma_a ** k))
        s = _submultiplicative(np.array(bounds), horizon)
    else:
        s = sigma_a ** np.arange(horizon + 1)

    rho = np.sqrt(n) * s
    rho[0] = 1.
    return rho, dbar_from_rho(rho, w_max)[:horizon + 1]


def scalar_bound_check(a=0.5, w_max=1e-6, length=500, energies=(1e-10, 1e-4, 1.), seed=0,
                       sigma_cap=1e6, tol=1e-6):
    """
    The one step bound sigma_A on data of the scalar plant x+ = a x + nu + w.

    Returns
    -------
    ScalarBoundCheck
        sigma for the true noise bound w_max, and sweep with one bound
        per assumed noise energy.

    """
    plant = LtiPlant([[a]], [[1.]], name="scalar")
    nu = generate_pe_input(1, length, 1., 2, seed)
    w = sample_disturbance(1, length, w_max, seed + 1)
    data = collect_state_data(plant, np.zeros((1, 1)), nu, w, w_max=w_max)
    rho, _ = estimate_rho_dbar(data, horizon=1, sigma_cap=sigma_cap, tol=tol)

    regressors = np.vstack([data.state[:-1].T, data.nu.T])
    sweep = []
    for energy in energies:
        problem = SLemmaProblem.from_data(regressors, data.state[1:].T, energy * np.eye(1),
                                          slice(0, 1), label=f"energy {energy:g}")
        sweep.append(np.sqrt(slemma_min_sigma(problem, tol=tol, cap=sigma_cap)))
    return ScalarBoundCheck(float(rho[1]), tuple(energies), np.array(sweep))


def cpe_matrix(nu, state, L):
    length = nu.shape[0]
    if length < L + 1:
        raise DimensionError(f"Need N >= L+1 samples, got N={length}, L={L}")
    return np.vstack([build_hankel(nu, L), state[:length - L + 1].T])


def pinv_one_norm(matrix):
    """ Maximum absolute column sum of the pseudoinverse. """
    return float(np.max(np.sum(np.abs(pinv(matrix)), axis=0)))


def estimate_cpe(data, L):
    """
    c_pe = ||[H_L(nu^d); H_1(x^d_[0,N-L])]^+||_1 of a state dataset.

    Raises
    ------
    EstimationError
        If the data is all zero.

    """
    stacked = cpe_matrix(data.nu, data.state, L)
    if not np.any(stacked):
        raise EstimationError("Can not estimate c_pe from all-zero data")
    return pinv_one_norm(stacked)


def select_hankel_window(data, length, L, order):
    """
    Cut the Hankel dataset with the smallest c_pe out of a long record.

    Windows of the given length are taken at stride length, only those
    with an input persistently exciting of the given order are scored.

    Returns
    -------
    window : DataSet
    c_pe : float
    start : int
        Index of the first sample of the window in the record.

    """
    best = None
    for start in range(0, data.length - length + 1, length):
        window = data.window(start, length)
        if not pe_order_check(window.nu, order):
            continue
        c_pe = estimate_cpe(window, L)
        if best is None or c_pe < best[1]:
            best = (window, c_pe, start)
    if best is None:
        raise ExcitationError(
            f"No window of length {length} is persistently exciting of order {order}")
    return best


def vertex_input_norm(data, vertex, w_max=None, lambda_alpha=1., lambda_sigma=1.,
                      tol=1e-7, max_iter=200000, backend="AdmmSolver"):
    """
    ||nu_bar*||_1 of the n step steering problem from one initial state.

    The data based problem is regularized like the optimal control problem,
    with slack sigma on the state prediction.

    """
    w_max = data.w_max if w_max is None else w_max
    w_eff = max(w_max, 1e-12)
    n, m = data.state.shape[1], data.nu.shape[1]
    hankel_nu = build_hankel(data.nu, n)
    hankel_x = build_hankel(data.state, n + 1)

    qp = QpBuilder()
    alpha = qp.variable("alpha", hankel_nu.shape[1])
    sigma = qp.variable("sigma", (n + 1) * n)
    nu_bar = qp.variable("nu_bar", n * m)
    x_bar = qp.variable("x_bar", (n + 1) * n)
    t_nu = epigraph_abs(qp, nu_bar, "nu_norm")
    qp.add_linear(t_nu)
    qp.add_quadratic(alpha, lambda_alpha * w_eff)
    qp.add_quadratic(sigma, lambda_sigma / w_eff)
    qp.equal(hankel_nu @ alpha - nu_bar, label="hankel_nu")
    qp.equal(hankel_x @ alpha - x_bar - sigma, label="hankel_x")
    qp.equal(x_bar[:n], np.asarray(vertex, dtype=float), label="initial")
    qp.equal(x_bar[n * n:], label="terminal")

    solution = solve_qp(qp.build(), tol=tol, max_iter=max_iter, backend=backend)
    if solution.status != "optimal":
        raise EstimationError(
            f"Steering problem from vertex {vertex} ended with status {solution.status}")
    return float(np.sum(np.abs(solution.values["nu_bar"])))


def estimate_gamma(data, x_max, w_max=None, lambda_alpha=1., lambda_sigma=1., **kwargs):
    """
    Controllability constant Gamma from data.

    The worst case over the vertices of the state box of ||nu_bar*||_1,
    divided by x_max.

    Parameters
    ----------
    data : DataSet
        State dataset, input persistently exciting of order 2n+1.
    x_max : float
    w_max : float, optional
        Defaults to the bound of the dataset.
    lambda_alpha, lambda_sigma : float
        Regularization weights.
    kwargs
        Passed to the qp solver.

    """
    n = data.state.shape[1]
    if n > MAX_VERTEX_DIM:
        raise ConfigurationError(
            f"Vertex enumeration is limited to n <= {MAX_VERTEX_DIM}, got n={n}")
    if not pe_order_check(data.nu, 2 * n + 1):
        warnings.warn(f"Input is not persistently exciting of order {2 * n + 1}")
    worst = 0.
    for signs in itertools.product((-1., 1.), repeat=n):
        vertex = x_max * np.array(signs)
        worst = max(worst, vertex_input_norm(
            data, vertex, w_max=w_max, lambda_alpha=lambda_alpha,
            lambda_sigma=lambda_sigma, **kwargs))
    return worst / x_max


def extended_data_matrices(data):
    """
    X+, X, Y, U of an output dataset.

    xi^d_k is built from the recorded inputs and outputs for k = n .. N,
    X holds xi^d_n .. xi^d_{N-1} and Y, U the samples aligned with X.

    """
    if data.kind != "output":
        raise DimensionError("Extended data matrices need an output dataset")
    n, length = data.order, data.length
    inputs = data.nu if data.inputs is None else data.inputs
    if length < n + 2:
        raise DimensionError(f"Need more than n+1 samples, got N={length}")
    xi = np.array([np.concatenate([inputs[k - n:k].reshape(-1), data.output[k - n:k].reshape(-1)])
                   for k in range(n, length + 1)]).T
    return xi[:, 1:], xi[:, :-1], data.output[n:].T, data.nu[n:].T


def estimate_etas(data, w_max=None, sigma_cap=1e6, tol=1e-6):
    """
    eta_A >= ||A_K||_inf, eta_B >= ||B||_inf, eta_C >= ||C_K||_inf, eta_D >= ||D||_inf
    of the non-minimal realization, from an output dataset.

    Returns
    -------
    EtaConstants

    """
    w_max = data.w_max if w_max is None else w_max
    x_next, x_now, y_now, u_now = extended_data_matrices(data)
    dim, columns = x_now.shape
    m, p = u_now.shape[0], y_now.shape[0]
    energy = max(data.order, p) * w_max ** 2 * columns
    routing = np.zeros((dim, p))
    routing[dim - p:] = np.eye(p)
    regressors = np.vstack([x_now, u_now])

    def eta(targets, noise, block, label, width):
        problem = SLemmaProblem.from_data(regressors, targets, noise, block, label=label)
        return np.sqrt(width) * np.sqrt(slemma_min_sigma(problem, tol=tol, cap=sigma_cap))

    state_block, input_block = slice(0, dim), slice(dim, dim + m)
    state_noise = energy * routing @ routing.T
    output_noise = energy * np.eye(p)
    return EtaConstants(
        A=eta(x_next, state_noise, state_block, "eta_A", dim),
        B=eta(x_next, state_noise, input_block, "eta_B", m),
        C=eta(y_now, output_noise, state_block, "eta_C", dim),
        D=eta(y_now, output_noise, input_block, "eta_D", m),
    )


def oracle_etas(model, K_tilde):
    """ The true infinity norms of the closed loop non-minimal realization. """
    ext = build_extended(model)
    a_k, c_k = ext.closed_loop(K_tilde)
    return EtaConstants(*(float(np.linalg.norm(mat, np.inf)) for mat in (a_k, ext.B, c_k, ext.D)))


def oracle_gamma(plant, K, x_max=1.):
    """ Gamma from the n step steering LP with the true matrices. """
    a_k = plant.closed_loop(K)
    n, m = plant.n, plant.m
    # columns act on nu_0 .. nu_{n-1}
    ctrb = controllability_matrix(a_k, plant.B)
    steering = np.hstack([ctrb[:, (n - 1 - i) * m:(n - i) * m] for i in range(n)])
    a_n = np.linalg.matrix_power(a_k, n)
    worst = 0.
    for signs in itertools.product((-1., 1.), repeat=n):
        vertex = x_max * np.array(signs)
        result = scipy.optimize.linprog(
            np.ones(2 * n * m), A_eq=np.hstack([steering, -steering]), b_eq=-a_n @ vertex,
            bounds=(0, None), method="highs")
        if result.status != 0:
            raise EstimationError(f"Steering LP from vertex {vertex} failed: {result.message}")
        worst = max(worst, float(result.fun))
    return worst / x_max


def oracle_constants(plant, K, L, N, w_max, nu=None, x0=None, horizon=None,
                     input_bound=1., seed=0):
    """
    Constants from the true model.

    Parameters
    ----------
    plant : LtiPlant
    K : array_like
    L, N : int
        Horizon and number of Hankel samples.
    w_max : float
    nu : array_like, optional
        Input of the noise free data used for c_pe. Drawn persistently
        exciting of order L+n+1 if not given.
    x0 : array_like, optional
        Initial state of that data.
    horizon : int, optional
        rho and dbar up to this index, default N.
    input_bound : float
        Amplitude of the drawn input.
    seed : int
        Seed of the drawn input.

    Returns
    -------
    SystemConstants

    """
    K = np.atleast_2d(np.asarray(K, dtype=float)).reshape(plant.m, plant.n)
    horizon = N if horizon is None else horizon
    a_k = plant.closed_loop(K)
    rho, power = [], np.eye(plant.n)
    for _ in range(horizon + 1):
        rho.append(np.linalg.norm(power, np.inf))
        power = a_k @ power
    rho = np.array(rho)
    dbar = dbar_from_rho(rho, w_max)[:horizon + 1]

    if nu is None:
        nu = generate_pe_input(plant.m, N, input_bound, L + plant.n + 1, seed)
    clean = collect_state_data(plant, K, nu, np.zeros((len(nu), plant.n)), x0=x0, w_max=0.)
    c_pe = estimate_cpe(clean, L)
    provenance = {name: "oracle" for name in ("rho", "dbar", "c_pe", "gamma", "k_bar")}
    return SystemConstants(rho=rho, dbar=dbar, c_pe=c_pe, gamma=oracle_gamma(plant, K),
                           k_bar=np.linalg.norm(K, np.inf), provenance=provenance)
