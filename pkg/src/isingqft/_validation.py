"""Input validation helpers shared by the public functions."""

from __future__ import annotations

import numbers

import numpy as np

UNITARY_ATOL = 1e-10


def check_int(value, name, low=None, high=None):
    """Return ``value`` as int, enforcing optional inclusive bounds."""
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if low is not None and value < low:
        raise ValueError(f"{name} must be >= {low}, got {value}")
    if high is not None and value > high:
        raise ValueError(f"{name} must be <= {high}, got {value}")
    return value


def check_finite(value, name):
    value = float(value)
    if not np.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value}")
    return value


def check_square(matrix, name="matrix"):
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {matrix.shape}")
    return matrix


def is_unitary(matrix, atol=UNITARY_ATOL):
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return False
    eye = np.eye(matrix.shape[0])
    return bool(np.max(np.abs(matrix.conj().T @ matrix - eye)) < atol)


def check_unitary(matrix, name="matrix", atol=UNITARY_ATOL):
    matrix = check_square(matrix, name)
    if not is_unitary(matrix, atol):
        dev = np.max(np.abs(matrix.conj().T @ matrix - np.eye(matrix.shape[0])))
        raise ValueError(f"{name} is not unitary (max deviation {dev:.3e})")
    return np.asarray(matrix, dtype=complex)


def check_coupling_matrix(J, n=None, positive=False, name="J"):
    """Validate a symmetric coupling matrix and return it as a float array.

    Accepts a plain array or any object carrying the matrix in ``values``
    (such as :class:`isingqft.trap.CouplingMatrix`).
    """
    J = np.asarray(getattr(J, "values", J), dtype=float)
    check_square(J, name)
    if n is not None and J.shape[0] != n:
        raise ValueError(f"{name} must be {n}x{n}, got {J.shape}")
    if not np.all(np.isfinite(J)):
        raise ValueError(f"{name} has non-finite entries")
    if not np.allclose(J, J.T, rtol=1e-12, atol=0.0):
        raise ValueError(f"{name} must be symmetric")
    if positive:
        off = J[~np.eye(J.shape[0], dtype=bool)]
        if np.any(off <= 0):
            raise ValueError(f"{name} must have strictly positive off-diagonal couplings")
    return J
