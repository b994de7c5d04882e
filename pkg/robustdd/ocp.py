#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
The tightened optimal control problems of the state feedback and the
output feedback scheme, assembled as quadratic programs.

"""
import numpy as np

from robustdd.misc import DimensionError, FeasibilityError
from robustdd.signals import build_hankel, generate_pe_input, pinv
from robustdd.plant import collect_state_data
from robustdd.convex import QpBuilder, epigraph_abs, epigraph_inf, solve_qp

# weight floor of lambda * w_max and lambda / w_max
W_FLOOR = 1e-12


def weight_matrix(mat, name, dim, definite=False):
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    if mat.shape == (1, 1) and dim > 1:
        mat = mat[0, 0] * np.eye(dim)
    if mat.shape != (dim, dim):
        raise DimensionError(f"{name} must be {dim} x {dim}, got {mat.shape}")
    mat = 0.5 * (mat + mat.T)
    eig_min = np.linalg.eigvalsh(mat)[0]
    if eig_min < 0 or (definite and eig_min <= 0):
        raise ValueError(f"{name} must be positive {'definite' if definite else 'semidefinite'}")
    return mat


class OcpSolution:
    """
    Optimizer of an optimal control problem.

    Attributes
    ----------
    nu_bar : ndarray
        Predicted inputs k = 0 .. L-1, shape (L, m).
    x_bar : ndarray or None
        Predicted states k = 0 .. L, shape (L+1, n). State feedback only.
    y_bar : ndarray or None
        Predicted outputs k = 0 .. L-1, shape (L, p). Output feedback only.
    alpha : ndarray
    sigma : ndarray
        One row per slack block.
    J_star : float
    status : str
    qp_solution : QpSolution

    """
    def __init__(self, nu_bar, alpha, sigma, J_star, status, x_bar=None, y_bar=None,
                 qp_solution=None):
        self.nu_bar = nu_bar
        self.x_bar = x_bar
        self.y_bar = y_bar
        self.alpha = alpha
        self.sigma = sigma
        self.J_star = J_star
        self.status = status
        self.qp_solution = qp_solution

    def __repr__(self):
        return f"OcpSolution(status={self.status}, J_star={self.J_star:.6g})"


class SfOcpSpec:
    """
    Data and parameters of the state feedback problem.

    Parameters
    ----------
    hankel_nu : ndarray
        H_L(nu^d).
    hankel_x : ndarray
        H_{L+1}(x^d), same number of columns.
    L : int
    Q, R : array_like
        Weights, Q psd and R pd.
    lambda_alpha, lambda_sigma : float
    w_max, x_max, u_max : float
    coefficients : TighteningCoefficients
    pec : PredictionErrorConstants
    K : array_like
        Pre-stabilizing gain, m x n.

    """
    def __init__(self, hankel_nu, hankel_x, L, Q, R, lambda_alpha, lambda_sigma,
                 w_max, x_max, u_max, coefficients, pec, K):
        self.hankel_nu = np.asarray(hankel_nu, dtype=float)
        self.hankel_x = np.asarray(hankel_x, dtype=float)
        self.L = int(L)
        self.m = self.hankel_nu.shape[0] // self.L
        self.n = self.hankel_x.shape[0] // (self.L + 1)
        if self.hankel_nu.shape[1] != self.hankel_x.shape[1]:
            raise DimensionError(
                f"Hankel blocks have {self.hankel_nu.shape[1]} and "
                f"{self.hankel_x.shape[1]} columns")
        if self.hankel_nu.shape[0] != self.L * self.m or self.hankel_x.shape[0] != (self.L + 1) * self.n:
            raise DimensionError("Hankel depths do not fit L and L+1")
        # the number of input samples of the data
        self.N = self.hankel_nu.shape[1] + self.L - 1
        self.Q = weight_matrix(Q, "Q", self.n)
        self.R = weight_matrix(R, "R", self.m, definite=True)
        if not (lambda_alpha > 0 and lambda_sigma > 0):
            raise ValueError("lambda_alpha and lambda_sigma must be positive")
        self.lambda_alpha = float(lambda_alpha)
        self.lambda_sigma = float(lambda_sigma)
        self.w_max, self.x_max, self.u_max = float(w_max), float(x_max), float(u_max)
        if coefficients.horizon != self.L:
            raise DimensionError(f"Coefficients are given for L={coefficients.horizon}")
        self.coefficients = coefficients
        self.pec = pec
        self.K = np.atleast_2d(np.asarray(K, dtype=float)).reshape(self.m, self.n)

    @classmethod
    def from_data(cls, data, L, coefficients, pec, **kwargs):
        """ Build the Hankel pair from a state dataset, kwargs as in __init__. """
        if data.kind != "state":
            raise DimensionError("The state feedback problem needs a state dataset")
        kwargs.setdefault("K", data.gain)
        kwargs.setdefault("w_max", data.w_max)
        return cls(build_hankel(data.nu, L), build_hankel(data.state, L + 1), L,
                   coefficients=coefficients, pec=pec, **kwargs)


def assemble_sf(spec, x_t):
    """
    The state feedback problem at the measured state x_t as QuadraticProgram.

    Variables alpha, sigma ((L+1) blocks of n), nu_bar (L blocks of m),
    x_bar ((L+1) blocks of n) and the epigraph variables of the norms in
    the tightened constraints.

    """
    L, n, m = spec.L, spec.n, spec.m
    x_t = np.asarray(x_t, dtype=float).reshape(-1)
    if x_t.size != n:
        raise DimensionError(f"x_t must have size {n}, got {x_t.size}")
    w_eff = max(spec.w_max, W_FLOOR)
    coeff = spec.coefficients

    qp = QpBuilder()
    alpha = qp.variable("alpha", spec.hankel_nu.shape[1])
    sigma = qp.variable("sigma", (L + 1) * n)
    nu_bar = qp.variable("nu_bar", L * m)
    x_bar = qp.variable("x_bar", (L + 1) * n)

    qp.add_quadratic(nu_bar, np.kron(np.eye(L), spec.R))
    qp.add_quadratic(x_bar[:L * n], np.kron(np.eye(L), spec.Q))
    qp.add_quadratic(alpha, spec.lambda_alpha * w_eff)
    qp.add_quadratic(sigma, spec.lambda_sigma / w_eff)

    qp.equal(spec.hankel_nu @ alpha - nu_bar, label="hankel_nu")
    qp.equal(spec.hankel_x @ alpha - x_bar - sigma, label="hankel_x")
    qp.equal(x_bar[:n], x_t, label="initial")
    qp.equal(x_bar[L * n:], label="terminal")

    t_nu = epigraph_abs(qp, nu_bar, "nu_norm")
    t_alpha = epigraph_abs(qp, alpha, "alpha_norm")
    use_gain = np.any(spec.K)
    ones_n, ones_m = np.ones((n, 1)), np.ones((m, 1))
    for k in range(L):
        x_k = x_bar[k * n:(k + 1) * n]
        nu_k = nu_bar[k * m:(k + 1) * m]
        t_sigma = epigraph_inf(qp, sigma[k * n:(k + 1) * n], f"sigma_norm_{k}")

        state_margin = (coeff.a_u[k] * t_nu + coeff.a_alpha[k] * t_alpha
                        + coeff.a_sigma[k] * t_sigma)
        qp.less_equal(x_k + ones_n @ state_margin, spec.x_max - coeff.a_c[k],
                      label=f"state_tightening_{k}")
        qp.less_equal(-x_k + ones_n @ state_margin, spec.x_max - coeff.a_c[k],
                      label=f"state_tightening_{k}")

        input_margin = (coeff.b_u[k] * t_nu + coeff.b_alpha[k] * t_alpha
                        + coeff.b_sigma[k] * t_sigma)
        if use_gain:
            input_margin = input_margin + epigraph_inf(qp, spec.K @ x_k, f"gain_norm_{k}")
        qp.less_equal(nu_k + ones_m @ input_margin, spec.u_max - coeff.b_c[k],
                      label=f"input_tightening_{k}")
        qp.less_equal(-nu_k + ones_m @ input_margin, spec.u_max - coeff.b_c[k],
                      label=f"input_tightening_{k}")
    return qp.build()


def _solve(qp, x_t, name, tol, max_iter, backend, x0):
    solution = solve_qp(qp, tol=tol, max_iter=max_iter, backend=backend, x0=x0)
    if solution.status != "optimal":
        _, row = qp.violations(solution.z)
        raise FeasibilityError(
            f"{name} problem at {np.array2string(np.asarray(x_t), precision=4)} "
            f"ended with status {solution.status}, most violated row {row}",
            x_t=x_t, violated_row=row)
    return solution


def solve_sf(spec, x_t, tol=1e-7, max_iter=200000, backend="AdmmSolver", x0=None):
    """
    Solve the state feedback problem at x_t.

    Raises
    ------
    FeasibilityError
        If the solver does not report an optimum.

    """
    qp = assemble_sf(spec, x_t)
    solution = _solve(qp, x_t, "State feedback", tol, max_iter, backend, x0)
    values = solution.values
    return OcpSolution(
        nu_bar=values["nu_bar"].reshape(spec.L, spec.m),
        x_bar=values["x_bar"].reshape(spec.L + 1, spec.n),
        alpha=values["alpha"],
        sigma=values["sigma"].reshape(spec.L + 1, spec.n),
        J_star=solution.objective, status=solution.status, qp_solution=solution)


class OfOcpSpec:
    """
    Data and parameters of the output feedback problem.

    Parameters
    ----------
    hankel_nu : ndarray
        H_{L+n}(nu^d).
    hankel_y : ndarray
        H_{L+n}(y^d), same number of columns.
    L, n : int
        Horizon and order of the difference operator model.
    Q, R : array_like
        Output and input weights.
    lambda_alpha, lambda_sigma : float
    w_max, y_max, u_max : float
    etas : EtaConstants
    K_tilde : array_like
        Gain on the extended state, m x n(m+p).

    """
    def __init__(self, hankel_nu, hankel_y, L, n, Q, R, lambda_alpha, lambda_sigma,
                 w_max, y_max, u_max, etas, K_tilde):
        self.hankel_nu = np.asarray(hankel_nu, dtype=float)
        self.hankel_y = np.asarray(hankel_y, dtype=float)
        self.L, self.n = int(L), int(n)
        depth = self.L + self.n
        self.m = self.hankel_nu.shape[0] // depth
        self.p = self.hankel_y.shape[0] // depth
        if self.hankel_nu.shape[1] != self.hankel_y.shape[1]:
            raise DimensionError("Hankel blocks differ in their number of columns")
        if self.L < self.n:
            raise DimensionError(f"Horizon L={self.L} must be at least n={self.n}")
        self.N = self.hankel_nu.shape[1] + depth - 1
        self.Q = weight_matrix(Q, "Q", self.p)
        self.R = weight_matrix(R, "R", self.m, definite=True)
        if not (lambda_alpha > 0 and lambda_sigma > 0):
            raise ValueError("lambda_alpha and lambda_sigma must be positive")
        self.lambda_alpha = float(lambda_alpha)
        self.lambda_sigma = float(lambda_sigma)
        self.w_max, self.y_max, self.u_max = float(w_max), float(y_max), float(u_max)
        self.etas = etas
        self.K_tilde = np.atleast_2d(np.asarray(K_tilde, dtype=float)).reshape(
            self.m, self.n * (self.m + self.p))

    @classmethod
    def from_data(cls, data, L, etas, **kwargs):
        """ Build the Hankel pair from an output dataset, kwargs as in __init__. """
        if data.kind != "output":
            raise DimensionError("The output feedback problem needs an output dataset")
        kwargs.setdefault("K_tilde", data.gain)
        kwargs.setdefault("w_max", data.w_max)
        depth = L + data.order
        return cls(build_hankel(data.nu, depth), build_hankel(data.output, depth), L,
                   data.order, etas=etas, **kwargs)

    def delta_bar(self, k):
        """ sum_{i<k} eta_A^(k-1-i) w_max. """
        return self.w_max * sum(self.etas.A ** j for j in range(k))


def assemble_of(spec, nu_past, y_past, xi_t):
    """
    The output feedback problem as QuadraticProgram.

    Trajectory index k = -n .. L-1, the first n entries are pinned to the
    past inputs nu_past and outputs y_past, the last n to zero.

    Parameters
    ----------
    spec : OfOcpSpec
    nu_past : array_like
        nu of the previous n steps, shape (n, m).
    y_past : array_like
        Outputs of the previous n steps, shape (n, p).
    xi_t : array_like
        Extended state at time t.

    """
    L, n, m, p = spec.L, spec.n, spec.m, spec.p
    depth = L + n
    nu_past = np.asarray(nu_past, dtype=float).reshape(n, m)
    y_past = np.asarray(y_past, dtype=float).reshape(n, p)
    xi_norm = float(np.max(np.abs(xi_t)))
    w_eff = max(spec.w_max, W_FLOOR)
    k_norm = float(np.linalg.norm(spec.K_tilde, np.inf))
    eta = spec.etas

    qp = QpBuilder()
    alpha = qp.variable("alpha", spec.hankel_nu.shape[1])
    sigma = qp.variable("sigma", depth * p)
    nu_bar = qp.variable("nu_bar", depth * m)
    y_bar = qp.variable("y_bar", depth * p)

    qp.add_quadratic(nu_bar[n * m:], np.kron(np.eye(L), spec.R))
    qp.add_quadratic(y_bar[n * p:], np.kron(np.eye(L), spec.Q))
    qp.add_quadratic(alpha, spec.lambda_alpha * w_eff)
    qp.add_quadratic(sigma, spec.lambda_sigma / w_eff)

    qp.equal(spec.hankel_nu @ alpha - nu_bar, label="hankel_nu")
    qp.equal(spec.hankel_y @ alpha - y_bar - sigma, label="hankel_y")
    qp.equal(nu_bar[:n * m], nu_past.reshape(-1), label="initial_nu")
    qp.equal(y_bar[:n * p], y_past.reshape(-1), label="initial_y")
    qp.equal(nu_bar[L * m:], label="terminal_nu")
    qp.equal(y_bar[L * p:], label="terminal_y")

    def nu_k(k):
        return nu_bar[(k + n) * m:(k + n + 1) * m]

    # epigraphs of ||nu_bar_k||_inf, k = 0 .. L-n-1
    t_nu = [epigraph_inf(qp, nu_k(k), f"nu_norm_{k}") for k in range(L - n)]
    ones_m = np.ones((m, 1))
    for k in range(L - n):
        propagated = None
        for i in range(k):
            term = eta.A ** (k - 1 - i) * eta.B * t_nu[i]
            propagated = term if propagated is None else propagated + term
        delta = spec.delta_bar(k)

        bound_u = spec.u_max - k_norm * eta.A ** k * xi_norm - k_norm * delta
        input_row = nu_k(k) if propagated is None else nu_k(k) + ones_m @ (k_norm * propagated)
        qp.less_equal(input_row, bound_u, label=f"input_tightening_{k}")
        neg_row = -nu_k(k) if propagated is None else -nu_k(k) + ones_m @ (k_norm * propagated)
        qp.less_equal(neg_row, bound_u, label=f"input_tightening_{k}")

        bound_y = spec.y_max - eta.C * eta.A ** k * xi_norm - eta.C * delta
        output_row = eta.D * t_nu[k]
        if propagated is not None:
            output_row = output_row + eta.C * propagated
        qp.less_equal(output_row, bound_y, label=f"output_tightening_{k}")
    return qp.build()


def solve_of(spec, nu_past, y_past, xi_t, tol=1e-7, max_iter=200000, backend="AdmmSolver",
             x0=None):
    """
    Solve the output feedback problem.

    Raises
    ------
    FeasibilityError
        If the solver does not report an optimum.

    """
    qp = assemble_of(spec, nu_past, y_past, xi_t)
    solution = _solve(qp, xi_t, "Output feedback", tol, max_iter, backend, x0)
    values, n, L = solution.values, spec.n, spec.L
    return OcpSolution(
        nu_bar=values["nu_bar"].reshape(L + n, spec.m)[n:],
        y_bar=values["y_bar"].reshape(L + n, spec.p)[n:],
        alpha=values["alpha"],
        sigma=values["sigma"].reshape(L + n, spec.p),
        J_star=solution.objective, status=solution.status, qp_solution=solution)


def hankel_reproduction_error(plant, K, L, N, trials=50, bound=1., x0_bound=None, seed=0):
    """
    Largest deviation of random noise free trajectories of the
    pre-stabilized plant from their Hankel parametrization.

    The data has length N with an input persistently exciting of order
    L+n+1. Per trial x_0 and nu_0 .. nu_{L-1} are drawn, alpha solves
    the input and initial state rows, and H_{L+1}(x) alpha is compared
    with the simulated states.

    Parameters
    ----------
    plant : LtiPlant
    K : array_like or None
        Gain, None for K = 0.
    L, N : int
    trials : int
    bound : float
        Amplitude of the data input and of the drawn inputs.
    x0_bound : float, optional
        Amplitude of the drawn initial states, default bound.
    seed : int

    Returns
    -------
    float

    """
    n, m = plant.n, plant.m
    K = np.zeros((m, n)) if K is None else np.asarray(K, dtype=float)
    x0_bound = bound if x0_bound is None else x0_bound
    nu = generate_pe_input(m, N, bound, L + n + 1, seed)
    data = collect_state_data(plant, K, nu, np.zeros((N, n)))
    hankel_x = build_hankel(data.state, L + 1)
    inverse = pinv(np.vstack([build_hankel(data.nu, L), hankel_x[:n]]))

    rng = np.random.default_rng(seed + 1)
    worst = 0.
    for _ in range(trials):
        x0 = rng.uniform(-x0_bound, x0_bound, size=n)
        inputs = rng.uniform(-bound, bound, size=(L, m))
        alpha = inverse @ np.concatenate([inputs.reshape(-1), x0])
        states = collect_state_data(plant, K, inputs, np.zeros((L, n)), x0=x0).state
        worst = max(worst, float(np.max(np.abs(hankel_x @ alpha - states.reshape(-1)))))
    return worst
