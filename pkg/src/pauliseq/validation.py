"""Input validation helpers shared by every module."""

import os
import warnings

import numpy as np

from .exceptions import DenseLimitError, DimensionError, InvalidInputError

DEFAULT_DENSE_LIMIT = 10
DENSE_LIMIT_ENV = "PAULISEQ_DENSE_LIMIT"


def dense_limit():
    """Largest qubit count for which dense 2^n x 2^n matrices are built."""
    raw = os.environ.get(DENSE_LIMIT_ENV)
    if raw is None:
        return DEFAULT_DENSE_LIMIT
    try:
        value = int(raw)
    except ValueError:
        raise DenseLimitError(f"{DENSE_LIMIT_ENV}={raw!r} is not an integer") from None
    if value < 1:
        raise DenseLimitError(f"{DENSE_LIMIT_ENV} must be positive, got {value}")
    return value


def check_qubits(n):
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DimensionError(f"qubit count must be a positive integer, got {n!r}")
    limit = dense_limit()
    if n > limit:
        raise DenseLimitError(f"{n} qubits exceeds dense limit {limit}")
    return int(n)


def check_operator(U):
    """Validate a square complex matrix of power-of-two size.

    Returns
    -------
    U : ndarray of complex128
    n : int
        Number of qubits.
    """
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {U.shape}")
    dim = U.shape[0]
    if dim < 2 or dim & (dim - 1):
        raise DimensionError(f"dimension {dim} is not a power of two >= 2")
    n = dim.bit_length() - 1
    check_qubits(n)
    return U, n


def unitarity_residual(U):
    return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))


def check_unitary(U, atol=1e-8, strict=False):
    """Like :func:`check_operator`, and also test unitarity.

    Non-unitary input only warns unless ``strict`` is set.
    """
    U, n = check_operator(U)
    res = unitarity_residual(U)
    if res > atol:
        msg = f"matrix is not unitary (max |U^H U - 1| = {res:.3e} > {atol:.1e})"
        if strict:
            raise InvalidInputError(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return U, n


def check_state(psi, dim=None, atol=1e-10):
    psi = np.asarray(psi, dtype=complex).ravel()
    if dim is not None and psi.shape[0] != dim:
        raise DimensionError(f"state has length {psi.shape[0]}, expected {dim}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > atol:
        raise InvalidInputError(f"state is not normalized (norm {norm:.12g})")
    return psi
