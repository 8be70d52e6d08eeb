"""Reconfigurable-surface architectures and the reactance-to-scattering map.

A lossless reciprocal N-port impedance network has a scattering matrix that
is unitary and symmetric. Both constraints are enforced structurally by
parameterizing with a real reactance matrix X:

    theta = (jX + Z0 I)^-1 (jX - Z0 I)

Fully connected networks use a full symmetric X (N(N+1)/2 free parameters,
stored packed); single connected networks use a diagonal X (N parameters),
which makes theta diagonal with unit-modulus entries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

ARCHITECTURES = ("fully", "single", "none")

# reciprocal condition estimate below this means the input was broken (NaNs);
# jX + Z0 I is provably nonsingular for any real X
_RCOND_FLOOR = 1e-14


class IllConditionedReactance(ValueError):
    """jX + Z0 I reported as numerically singular; inputs are corrupt."""


def n_from_packed_length(length: int) -> int:
    """Port count N such that N(N+1)/2 == length."""
    n = int((np.sqrt(8 * length + 1) - 1) / 2)
    if n * (n + 1) // 2 != length:
        raise ValueError(f"{length} is not a triangular number")
    return n


def pack_reactance(X: np.ndarray) -> np.ndarray:
    """Pack a symmetric matrix into its upper triangle, row-major."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {X.shape}")
    iu = np.triu_indices(X.shape[0])
    return X[iu].copy()


def unpack_reactance(v: np.ndarray, n: int | None = None) -> np.ndarray:
    """Inverse of pack_reactance; the result is symmetric by construction."""
    v = np.asarray(v, dtype=float)
    if n is None:
        n = n_from_packed_length(v.size)
    elif v.size != n * (n + 1) // 2:
        raise ValueError(f"packed vector has length {v.size}, expected {n * (n + 1) // 2}")
    X = np.zeros((n, n))
    iu = np.triu_indices(n)
    X[iu] = v
    X.T[iu] = v
    return X


def theta_fully(X: np.ndarray, z0: float = 50.0) -> np.ndarray:
    """Scattering matrix of a fully connected network with reactance matrix X."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValueError(f"X must be square, got shape {X.shape}")
    if not np.array_equal(X, X.T):
        raise ValueError("X must be exactly symmetric")
    if z0 <= 0:
        raise ValueError("reference impedance must be positive")
    n = X.shape[0]
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    A = 1j * X + z0 * np.eye(n)
    B = 1j * X - z0 * np.eye(n)
    lu, piv = scipy.linalg.lu_factor(A)
    _check_rcond(lu, piv, A)
    return scipy.linalg.lu_solve((lu, piv), B)


def _check_rcond(lu, piv, A) -> None:
    (gecon,) = scipy.linalg.get_lapack_funcs(("gecon",), (lu,))
    anorm = np.linalg.norm(A, 1)
    rcond, info = gecon(lu, anorm, norm="1")
    if info != 0 or not rcond >= _RCOND_FLOOR:
        raise IllConditionedReactance(
            f"reciprocal condition estimate {rcond:g}; reactance inputs are likely NaN/Inf")


def theta_single(x: np.ndarray, z0: float = 50.0) -> np.ndarray:
    """Diagonal scattering matrix of a single connected network.

    Entry n is (j x_n - z0)/(j x_n + z0), always unit modulus; identical to
    theta_fully(diag(x), z0).
    """
    if z0 <= 0:
        raise ValueError("reference impedance must be positive")
    x = np.asarray(x, dtype=float)
    return np.diag(theta_single_entries(x, z0))


def theta_single_entries(x: np.ndarray, z0: float) -> np.ndarray:
    jx = 1j * np.asarray(x, dtype=float)
    return (jx - z0) / (jx + z0)


def validate_scattering(theta: np.ndarray) -> tuple[float, float]:
    """Frobenius residuals (unitarity, reciprocity) of a scattering matrix."""
    theta = np.asarray(theta)
    if theta.ndim != 2 or theta.shape[0] != theta.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {theta.shape}")
    n = theta.shape[0]
    unitarity = np.linalg.norm(theta.conj().T @ theta - np.eye(n))
    symmetry = np.linalg.norm(theta - theta.T)
    return float(unitarity), float(symmetry)


@dataclass(frozen=True)
class ScatteringNetwork:
    """A surface architecture with its packed reactance parameters.

    v holds the upper triangle of X for "fully", the diagonal for "single",
    and None for "none" (no surface; theta is None too).
    """

    architecture: str
    v: np.ndarray | None
    z0: float
    theta: np.ndarray | None

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise ValueError(f"unknown architecture {self.architecture!r}")
        if self.z0 <= 0:
            raise ValueError("reference impedance must be positive")

    @property
    def X(self) -> np.ndarray | None:
        """Full reactance matrix reconstructed from the packed parameters."""
        if self.architecture == "fully":
            return unpack_reactance(self.v)
        if self.architecture == "single":
            return np.diag(self.v)
        return None

    @property
    def n_ports(self) -> int:
        if self.architecture == "fully":
            return n_from_packed_length(self.v.size)
        if self.architecture == "single":
            return self.v.size
        return 0


def fully_network(X: np.ndarray, z0: float = 50.0) -> ScatteringNetwork:
    """Build a fully connected network from a symmetric X or a packed vector."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        v = X.copy()
        X = unpack_reactance(v)
    else:
        if not np.array_equal(X, X.T):
            raise ValueError("X must be exactly symmetric")
        v = pack_reactance(X)
    return ScatteringNetwork("fully", v, z0, theta_fully(X, z0))


def single_network(x: np.ndarray, z0: float = 50.0) -> ScatteringNetwork:
    """Build a single connected network from the per-port reactances."""
    x = np.asarray(x, dtype=float).ravel()
    return ScatteringNetwork("single", x.copy(), z0, theta_single(x, z0))


def no_network(z0: float = 50.0) -> ScatteringNetwork:
    """Placeholder for schemes that run without a surface."""
    return ScatteringNetwork("none", None, z0, None)
