#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Ground truth simulation of the disturbed LTI plant.

The true matrices are only used for simulating and as a test oracle,
never by the controller itself.

"""
import warnings
import numpy as np
import scipy.linalg

from robustdd.misc import DimensionError, ModelError, OracleUnavailableError
from robustdd.signals import as_sequence, numerical_rank


def _as_matrix(mat, name, shape=None):
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    if mat.ndim != 2:
        raise DimensionError(f"{name} must be a matrix, got shape {mat.shape}")
    if shape is not None and mat.shape != shape:
        raise DimensionError(f"{name} must have shape {shape}, got {mat.shape}")
    return mat


def controllability_matrix(A, B, steps=None):
    """ [B, AB, ..., A^(steps-1) B], steps defaults to n. """
    steps = A.shape[0] if steps is None else steps
    blocks, block = [], B
    for _ in range(steps):
        blocks.append(block)
        block = A @ block
    return np.hstack(blocks)


class LtiPlant:
    """
    Disturbed LTI plant x+ = Ax + Bu + w, y = Cx + Du.

    Parameters
    ----------
    A : array_like
        n x n.
    B : array_like
        n x m.
    C : array_like, optional
        p x n, defaults to the identity (the state is measured).
    D : array_like, optional
        p x m, defaults to zero.
    name : str, optional
        Used in logs.

    """
    def __init__(self, A, B, C=None, D=None, name=None):
        self.A = _as_matrix(A, "A")
        self.n = self.A.shape[0]
        if self.A.shape != (self.n, self.n):
            raise DimensionError(f"A must be square, got shape {self.A.shape}")
        self.B = _as_matrix(B, "B")
        if self.B.shape[0] != self.n:
            # allow a flat list for single input plants
            if self.B.shape == (1, self.n):
                self.B = self.B.T
            else:
                raise DimensionError(
                    f"B must have {self.n} rows, got shape {self.B.shape}")
        self.m = self.B.shape[1]
        self.C = np.eye(self.n) if C is None else _as_matrix(C, "C")
        self.p = self.C.shape[0]
        if self.C.shape[1] != self.n:
            raise DimensionError(f"C must have {self.n} columns, got shape {self.C.shape}")
        self.D = np.zeros((self.p, self.m)) if D is None else _as_matrix(D, "D", (self.p, self.m))
        self.name = name

        if numerical_rank(controllability_matrix(self.A, self.B)) < self.n:
            warnings.warn(f"Plant {name} is not controllable")
        if numerical_rank(controllability_matrix(self.A.T, self.C.T)) < self.n:
            warnings.warn(f"Plant {name} is not observable")

    def closed_loop(self, K):
        """ A_K = A + BK. """
        return self.A + self.B @ _as_matrix(K, "K", (self.m, self.n))

    def __repr__(self):
        return f"LtiPlant(name={self.name}, n={self.n}, m={self.m}, p={self.p})"


def simulate_step(plant, x, u, w):
    """
    One step of the plant.

    Returns
    -------
    x_next : ndarray
        Ax + Bu + w.
    y : ndarray
        Cx + Du.

    """
    x, u, w = (np.asarray(v, dtype=float).reshape(-1) for v in (x, u, w))
    if x.size != plant.n or u.size != plant.m or w.size != plant.n:
        raise DimensionError(
            f"Expected x, u, w of sizes {plant.n}, {plant.m}, {plant.n}, "
            f"got {x.size}, {u.size}, {w.size}")
    return plant.A @ x + plant.B @ u + w, plant.C @ x + plant.D @ u


def closed_loop_matrix(plant, K):
    """ A_K = A + BK of the pre-stabilized plant. """
    return plant.closed_loop(K)


def sample_disturbance(dim, length, w_max, seed):
    """ Disturbance drawn uniformly from the box [-w_max, w_max]^dim, shape (length, dim). """
    rng = np.random.default_rng(seed)
    return rng.uniform(-w_max, w_max, size=(length, dim))


def lqr_gain(plant, Q=None, R=None):
    """
    Model based LQR gain, u = Kx. Only meant for test fixtures.

    """
    Q = np.eye(plant.n) if Q is None else _as_matrix(Q, "Q")
    R = np.eye(plant.m) if R is None else _as_matrix(R, "R")
    P = scipy.linalg.solve_discrete_are(plant.A, plant.B, Q, R)
    return -np.linalg.solve(R + plant.B.T @ P @ plant.B, plant.B.T @ P @ plant.A)


class DataSet:
    """
    Recorded data of one experiment.

    Exactly one of state and output is given.

    Parameters
    ----------
    nu : ndarray
        Applied nu^d, shape (N, m).
    state : ndarray, optional
        x^d, shape (N+1, n).
    output : ndarray, optional
        y^d, shape (N, p).
    gain : ndarray
        The pre-stabilizing gain used during collection.
    disturbance : ndarray, optional
        The true disturbance realization. Oracle only.
    w_max : float
        Bound of the disturbance.
    inputs : ndarray, optional
        The applied u^d = K xi + nu (output datasets).
    order : int, optional
        Order n of the difference operator model (output datasets).
    seed : int, optional
        Seed used for the collection.

    """
    def __init__(self, nu, state=None, output=None, gain=None, disturbance=None,
                 w_max=0., inputs=None, order=None, seed=None):
        if (state is None) == (output is None):
            raise DimensionError("Exactly one of state and output must be given")
        self.nu = as_sequence(nu, "nu")
        self.state = None if state is None else as_sequence(state, "state")
        self.output = None if output is None else as_sequence(output, "output")
        self.disturbance = None if disturbance is None else as_sequence(disturbance, "disturbance")
        self.inputs = None if inputs is None else as_sequence(inputs, "inputs")
        self.gain = None if gain is None else np.atleast_2d(np.asarray(gain, dtype=float))
        self.w_max = float(w_max)
        self.order = order
        self.seed = seed

        length = self.nu.shape[0]
        if self.state is not None and self.state.shape[0] != length + 1:
            raise DimensionError(
                f"state must have {length + 1} samples, got {self.state.shape[0]}")
        if self.output is not None and self.output.shape[0] != length:
            raise DimensionError(
                f"output must have {length} samples, got {self.output.shape[0]}")
        if self.disturbance is not None:
            if self.disturbance.shape[0] != length:
                raise DimensionError("disturbance must have as many samples as nu")
            if np.max(np.abs(self.disturbance), initial=0.) > self.w_max * (1 + 1e-12):
                raise ValueError("disturbance exceeds w_max")

    @property
    def kind(self):
        """ 'state' or 'output'. """
        return "state" if self.state is not None else "output"

    @property
    def length(self):
        """ Number N of input samples. """
        return self.nu.shape[0]

    def window(self, start, length):
        """
        A state dataset cut to nu[start:start+length], state[start:start+length+1].
        """
        if self.kind != "state":
            raise DimensionError("Windows are only supported for state datasets")
        if start < 0 or start + length > self.length:
            raise DimensionError(
                f"Window [{start}, {start + length}) out of range for length {self.length}")
        disturbance = None
        if self.disturbance is not None:
            disturbance = self.disturbance[start:start + length]
        return DataSet(self.nu[start:start + length],
                       state=self.state[start:start + length + 1],
                       gain=self.gain, disturbance=disturbance,
                       w_max=self.w_max, seed=self.seed)

    def __repr__(self):
        return f"DataSet(kind={self.kind}, N={self.length}, w_max={self.w_max})"


def collect_state_data(plant, K, nu, w, x0=None, w_max=None, seed=None):
    """
    Record a trajectory of the pre-stabilized plant u = Kx + nu.

    Parameters
    ----------
    plant : LtiPlant
    K : array_like
        Gain, m x n.
    nu : array_like
        Shape (N, m).
    w : array_like
        Disturbance, shape (N, n).
    x0 : array_like, optional
        Initial state, defaults to 0.
    w_max : float, optional
        Disturbance bound to record. Defaults to max |w|.
    seed : int, optional
        Recorded in the dataset.

    Returns
    -------
    DataSet
        With a state sequence of length N+1.

    """
    K = _as_matrix(K, "K", (plant.m, plant.n))
    nu = as_sequence(nu, "nu")
    w = as_sequence(w, "w")
    if nu.shape[1] != plant.m or w.shape[1] != plant.n or nu.shape[0] != w.shape[0]:
        raise DimensionError(
            f"nu and w must have shapes (N, {plant.m}) and (N, {plant.n}), "
            f"got {nu.shape} and {w.shape}")
    x = np.zeros(plant.n) if x0 is None else np.asarray(x0, dtype=float).reshape(-1)
    states = [x]
    for nu_k, w_k in zip(nu, w):
        x, _ = simulate_step(plant, x, K @ x + nu_k, w_k)
        states.append(x)
    if w_max is None:
        w_max = float(np.max(np.abs(w), initial=0.))
    return DataSet(nu, state=np.array(states), gain=K, disturbance=w,
                   w_max=w_max, seed=seed)


def cumulative_disturbance(A_K, w, k):
    """ d_k = sum_{i<k} A_K^(k-1-i) w_i, with d_0 = 0. """
    w = as_sequence(w, "w")
    if k > w.shape[0]:
        raise DimensionError(f"k={k} exceeds the {w.shape[0]} disturbance samples")
    d = np.zeros(w.shape[1])
    for i in range(k):
        d = A_K @ d + w[i]
    return d


def undisturbed_data(data, A_K):
    """
    The state data with the propagated disturbance removed, x^d - d^d.

    Needs the true disturbance realization in the dataset.

    """
    if data.disturbance is None:
        raise OracleUnavailableError("Dataset has no disturbance record")
    if data.kind != "state":
        raise DimensionError("undisturbed_data needs a state dataset")
    d = np.zeros(data.state.shape[1])
    x_hat = [data.state[0]]
    for k in range(data.length):
        d = A_K @ d + data.disturbance[k]
        x_hat.append(data.state[k + 1] - d)
    return np.array(x_hat)


class DifferenceOperatorModel:
    """
    y_k = -A_n y_{k-1} - ... - A_1 y_{k-n} + D u_k + B_n u_{k-1} + ... + B_1 u_{k-n} + w_k.

    Parameters
    ----------
    a_coeffs : list
        A_1, ..., A_n, each p x p.
    b_coeffs : list
        B_1, ..., B_n, each p x m.
    D : array_like
        p x m.
    name : str, optional

    """
    def __init__(self, a_coeffs, b_coeffs, D, name=None):
        self.a_coeffs = [_as_matrix(a, "A_i") for a in a_coeffs]
        self.b_coeffs = [_as_matrix(b, "B_i") for b in b_coeffs]
        self.D = _as_matrix(D, "D")
        self.n = len(self.a_coeffs)
        self.p, self.m = self.D.shape
        self.name = name
        if self.n < 1 or len(self.b_coeffs) != self.n:
            raise ModelError(
                f"Need n >= 1 coefficients A_i and B_i each, got "
                f"{len(self.a_coeffs)} and {len(self.b_coeffs)}")
        for a in self.a_coeffs:
            if a.shape != (self.p, self.p):
                raise DimensionError(f"A_i must be {self.p} x {self.p}, got {a.shape}")
        for b in self.b_coeffs:
            if b.shape != (self.p, self.m):
                raise DimensionError(f"B_i must be {self.p} x {self.m}, got {b.shape}")

    def output(self, u_past, y_past, u_k, w_k):
        """
        Direct evaluation of the difference equation.

        Parameters
        ----------
        u_past : ndarray
            u_{k-n}, ..., u_{k-1}, shape (n, m).
        y_past : ndarray
            y_{k-n}, ..., y_{k-1}, shape (n, p).
        u_k, w_k : ndarray

        """
        y = self.D @ np.asarray(u_k, dtype=float).reshape(-1) + np.asarray(w_k, dtype=float).reshape(-1)
        for i in range(self.n):
            # slot i holds time k-n+i
            y = y - self.a_coeffs[i] @ y_past[i] + self.b_coeffs[i] @ u_past[i]
        return y

    def __repr__(self):
        return f"DifferenceOperatorModel(name={self.name}, n={self.n}, m={self.m}, p={self.p})"


class ExtendedRealization:
    """
    Non-minimal state space form of a difference operator model.

    xi_k = (u_{k-n}, ..., u_{k-1}, y_{k-n}, ..., y_{k-1}), input block first.

    xi+ = A xi + B u + E w, y = C xi + D u + w.

    """
    def __init__(self, A, B, E, C, D, n, m, p):
        self.A, self.B, self.E, self.C, self.D = A, B, E, C, D
        self.n, self.m, self.p = n, m, p

    @property
    def dim(self):
        """ Dimension n(m+p) of the extended state. """
        return self.n * (self.m + self.p)

    def state_from_history(self, u_past, y_past):
        """ Assemble xi_k from the last n inputs and outputs (oldest first). """
        u_past = np.asarray(u_past, dtype=float).reshape(self.n, self.m)
        y_past = np.asarray(y_past, dtype=float).reshape(self.n, self.p)
        return np.concatenate([u_past.reshape(-1), y_past.reshape(-1)])

    def closed_loop(self, K_tilde):
        """ A_K = A + B K and C_K = C + D K of u = K xi + nu. """
        K_tilde = _as_matrix(K_tilde, "K_tilde", (self.m, self.dim))
        return self.A + self.B @ K_tilde, self.C + self.D @ K_tilde


def build_extended(model):
    """
    Build the non-minimal realization of a difference operator model.

    Returns
    -------
    ExtendedRealization

    """
    n, m, p = model.n, model.m, model.p
    nu_, ny_ = n * m, n * p
    dim = nu_ + ny_
    C = np.hstack(model.b_coeffs + [-a for a in model.a_coeffs])

    A = np.zeros((dim, dim))
    # shift of the input history, newest input enters through B
    A[:nu_ - m, m:nu_] = np.eye(nu_ - m)
    # shift of the output history, newest output is C xi + D u + w
    A[nu_:dim - p, nu_ + p:dim] = np.eye(ny_ - p)
    A[dim - p:, :] = C

    B = np.zeros((dim, m))
    B[nu_ - m:nu_] = np.eye(m)
    B[dim - p:] = model.D

    E = np.zeros((dim, p))
    E[dim - p:] = np.eye(p)
    return ExtendedRealization(A, B, E, C, model.D.copy(), n, m, p)


def collect_output_data(model, K_tilde, nu, w, xi0=None, w_max=None, seed=None):
    """
    Record an input/output trajectory under u = K_tilde xi + nu.

    Parameters
    ----------
    model : DifferenceOperatorModel
    K_tilde : array_like
        m x n(m+p).
    nu : array_like
        Shape (N, m).
    w : array_like
        Output disturbance, shape (N, p).
    xi0 : array_like, optional
        Initial extended state, defaults to 0.
    w_max : float, optional
        Disturbance bound to record, defaults to max |w|.
    seed : int, optional

    Returns
    -------
    DataSet
        With an output sequence of length N and the applied inputs.

    """
    ext = build_extended(model)
    K_tilde = _as_matrix(K_tilde, "K_tilde", (ext.m, ext.dim))
    nu = as_sequence(nu, "nu")
    w = as_sequence(w, "w")
    if nu.shape[1] != ext.m or w.shape[1] != ext.p or nu.shape[0] != w.shape[0]:
        raise DimensionError(
            f"nu and w must have shapes (N, {ext.m}) and (N, {ext.p}), "
            f"got {nu.shape} and {w.shape}")
    xi = np.zeros(ext.dim) if xi0 is None else np.asarray(xi0, dtype=float).reshape(-1)
    inputs, outputs = [], []
    for nu_k, w_k in zip(nu, w):
        u = K_tilde @ xi + nu_k
        y = ext.C @ xi + ext.D @ u + w_k
        xi = ext.A @ xi + ext.B @ u + ext.E @ w_k
        inputs.append(u)
        outputs.append(y)
    if w_max is None:
        w_max = float(np.max(np.abs(w), initial=0.))
    return DataSet(nu, output=np.array(outputs), gain=K_tilde, disturbance=w,
                   w_max=w_max, inputs=np.array(inputs), order=model.n, seed=seed)
