#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Prediction error constants and the coefficients of the state and input
constraint tightening of the state feedback scheme.

"""
from collections import namedtuple
import numpy as np

from robustdd.misc import DimensionError, HorizonError

PredictionErrorConstants = namedtuple("PredictionErrorConstants", ["c_alpha", "c_sigma"])

COEFFICIENT_NAMES = ("a_u", "a_alpha", "a_sigma", "a_c", "b_u", "b_alpha", "b_sigma", "b_c")


class TighteningCoefficients:
    """
    The eight coefficient lists a_* and b_*, indexed k = 0 .. L-1.

    Attributes
    ----------
    a_u, a_alpha, a_sigma, a_c : ndarray
        State tightening.
    b_u, b_alpha, b_sigma, b_c : ndarray
        Input tightening.

    """
    def __init__(self, **coefficients):
        missing = set(COEFFICIENT_NAMES) - set(coefficients)
        if missing:
            raise ValueError(f"Missing coefficients {sorted(missing)}")
        lengths = set()
        for name in COEFFICIENT_NAMES:
            values = np.asarray(coefficients[name], dtype=float)
            setattr(self, name, values)
            lengths.add(values.size)
        if len(lengths) != 1:
            raise DimensionError(f"Coefficient lists differ in length: {sorted(lengths)}")

    @property
    def horizon(self):
        return self.a_u.size

    def as_array(self):
        """ Columns k, a_u, ..., b_c. """
        return np.column_stack(
            [np.arange(self.horizon)] + [getattr(self, name) for name in COEFFICIENT_NAMES])

    def to_csv(self, file):
        np.savetxt(file, self.as_array(), delimiter=",", fmt="%.17g",
                   header=",".join(("k", ) + COEFFICIENT_NAMES), comments="")

    @classmethod
    def from_csv(cls, file):
        table = np.atleast_1d(np.genfromtxt(file, delimiter=",", names=True))
        return cls(**{name: np.atleast_1d(table[name]) for name in COEFFICIENT_NAMES})


def prediction_error_constants(consts, L, N):
    """
    c_alpha,k = rho_k dbar_{N-L} + dbar_{N-L+k} and c_sigma,k = rho_k + 1, k = 0 .. L.

    Parameters
    ----------
    consts : SystemConstants
        Needs rho up to L and dbar up to N.
    L, N : int

    Returns
    -------
    PredictionErrorConstants

    """
    if consts.rho is None or consts.rho.size < L + 1:
        raise DimensionError(f"rho is needed up to index {L}")
    if consts.dbar is None or consts.dbar.size < N + 1:
        raise DimensionError(f"dbar is needed up to index {N}")
    if N < L:
        raise DimensionError(f"N={N} must not be smaller than L={L}")
    rho = consts.rho[:L + 1]
    c_alpha = rho * consts.dbar[N - L] + consts.dbar[N - L:N + 1]
    return PredictionErrorConstants(c_alpha=c_alpha, c_sigma=rho + 1)


def sf_coefficients(pec, consts, L, n, x_max, w_max, N=None):
    """
    Tightening coefficients of the state and input constraints.

    For k < n the base values, for k >= n the n step recursion.

    Parameters
    ----------
    pec : PredictionErrorConstants
    consts : SystemConstants
        Uses dbar, c_pe, gamma and k_bar.
    L, n : int
        Horizon and state dimension, L >= n.
    x_max, w_max : float
    N : int, optional
        Number of Hankel samples, default len(dbar) - 1.

    Returns
    -------
    TighteningCoefficients

    """
    if L < n:
        raise HorizonError(f"Horizon L={L} must be at least the system order n={n}")
    N = consts.dbar.size - 1 if N is None else N
    dbar = np.zeros(N + 1) if w_max == 0 else consts.dbar[:N + 1]
    c_alpha = np.zeros(L + 1) if w_max == 0 else pec.c_alpha
    c_sigma, c_pe, gamma, k_bar = pec.c_sigma, consts.c_pe, consts.gamma, consts.k_bar
    d_n, d_last = dbar[n], dbar[N - 1]
    # worst case state influence over one n step block
    reach = c_pe * (n * x_max + n * d_n)

    coeff = {name: np.zeros(L) for name in COEFFICIENT_NAMES}
    for k in range(min(n, L)):
        coeff["a_alpha"][k] = c_alpha[k]
        coeff["a_sigma"][k] = c_sigma[k]
        coeff["a_c"][k] = dbar[k]
        coeff["b_alpha"][k] = k_bar * c_alpha[k]
        coeff["b_sigma"][k] = k_bar * c_sigma[k]
        coeff["b_c"][k] = k_bar * dbar[k]

    for k in range(L - n):
        for prefix, factor in (("a", 1.), ("b", k_bar)):
            u, al, sg, c = (coeff[f"{prefix}_{s}"] for s in ("u", "alpha", "sigma", "c"))
            u[k + n] = u[k] + al[k] * c_pe + sg[k] * c_pe * d_last
            al[k + n] = u[k + n] * gamma * c_alpha[L - 1] + factor * c_alpha[k + n]
            sg[k + n] = u[k + n] * gamma * c_sigma[L - 1] + factor * c_sigma[k + n]
            c[k + n] = c[k] + al[k] * reach + sg[k] * (d_last * reach + d_n) + factor * d_n
    return TighteningCoefficients(**coeff)
