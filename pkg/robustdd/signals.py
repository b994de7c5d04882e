#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Hankel matrices, stacked windows and persistency of excitation.

Vector sequences are plain 2d numpy arrays of shape (T, d): one row per
time step. One dimensional input is read as a scalar sequence.

"""
import numpy as np
import scipy.linalg

from robustdd.misc import DimensionError, ExcitationError

# relative threshold for the numerical rank, see numerical_rank
RANK_RTOL = 1e-8
# resampling attempts of generate_pe_input
MAX_PE_ATTEMPTS = 100


def as_sequence(z, name="z"):
    """
    Bring a sequence into the (T, d) float array layout.

    Parameters
    ----------
    z : array_like
        Shape (T, ) or (T, d).
    name : str
        Used in the error message.

    Returns
    -------
    ndarray
        Shape (T, d), T >= 1, d >= 1.

    """
    z = np.asarray(z, dtype=float)
    if z.ndim == 1:
        z = z[:, np.newaxis]
    if z.ndim != 2 or z.shape[0] < 1 or z.shape[1] < 1:
        raise DimensionError(
            f"Sequence {name} needs shape (T, d) with T, d >= 1, got {z.shape}")
    return z


def build_hankel(z, depth):
    """
    Hankel matrix of the given depth.

    Column j is the stacked window z[j], ..., z[j+depth-1].

    Parameters
    ----------
    z : array_like
        Sequence of shape (T, d).
    depth : int
        Depth L of the Hankel matrix, 1 <= L <= T.

    Returns
    -------
    ndarray
        Shape (d*L, T-L+1).

    """
    z = as_sequence(z)
    length, dim = z.shape
    if depth < 1 or length < depth:
        raise DimensionError(
            f"Can not build Hankel matrix of depth {depth} from a "
            f"sequence of length {length}")
    windows = np.lib.stride_tricks.sliding_window_view(z, (depth, dim))
    return np.ascontiguousarray(
        windows.reshape(length - depth + 1, depth * dim).T)


def stack_window(z, a, b):
    """ Stack z[a], ..., z[b] (both inclusive) into one vector. """
    z = as_sequence(z)
    if not 0 <= a <= b < z.shape[0]:
        raise DimensionError(
            f"Window [{a}, {b}] out of range for sequence of length {z.shape[0]}")
    return z[a:b+1].reshape(-1)


def _rank_threshold(sv, shape):
    if sv.size == 0:
        return 0.
    return RANK_RTOL * sv[0] * max(shape)


def numerical_rank(matrix):
    """
    Numerical rank via singular values.

    A singular value counts if it exceeds 1e-8 * sigma_max * max(rows, cols).

    """
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    if matrix.size == 0:
        return 0
    sv = scipy.linalg.svdvals(matrix)
    if sv[0] == 0:
        return 0
    return int(np.sum(sv > _rank_threshold(sv, matrix.shape)))


def pinv(matrix):
    """ Moore-Penrose pseudoinverse with the rank threshold of numerical_rank. """
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    u, sv, vh = scipy.linalg.svd(matrix, full_matrices=False)
    if sv.size == 0 or sv[0] == 0:
        return np.zeros(matrix.shape[::-1])
    keep = sv > _rank_threshold(sv, matrix.shape)
    return (vh[keep].T / sv[keep]) @ u[:, keep].T


def pe_order_check(u, order):
    """
    Check if the input sequence is persistently exciting of the given order.

    Parameters
    ----------
    u : array_like
        Input sequence of shape (N, m).
    order : int
        The order L.

    Returns
    -------
    bool
        True iff H_L(u) has full row rank m*L. False if the sequence is
        shorter than L.

    """
    u = as_sequence(u, "u")
    if order < 1 or u.shape[0] < order:
        return False
    hankel = build_hankel(u, order)
    return numerical_rank(hankel) == hankel.shape[0]


def min_pe_length(m, order):
    """ Shortest input sequence that can be persistently exciting of this order. """
    return (m + 1) * order - 1


def generate_pe_input(m, length, bound, order, seed):
    """
    Draw a persistently exciting input sequence.

    Entries are uniform on [-bound, bound]. If the draw is not persistently
    exciting, the seed is shifted by one and the draw repeated.

    Parameters
    ----------
    m : int
        Input dimension.
    length : int
        Number of samples N.
    bound : float
        Amplitude of the input.
    order : int
        Required order of persistency of excitation.
    seed : int
        Seed of the first draw.

    Returns
    -------
    ndarray
        Shape (N, m).

    """
    if length < min_pe_length(m, order):
        raise DimensionError(
            f"A sequence of length {length} can not be persistently exciting "
            f"of order {order} (need at least {min_pe_length(m, order)})")
    if not bound > 0:
        raise ValueError(f"Input bound must be positive, got {bound}")

    for attempt in range(MAX_PE_ATTEMPTS):
        rng = np.random.default_rng(seed + attempt)
        u = rng.uniform(-bound, bound, size=(length, m))
        if pe_order_check(u, order):
            return u
    raise ExcitationError(
        f"No input of length {length} persistently exciting of order {order} "
        f"found after {MAX_PE_ATTEMPTS} attempts")
