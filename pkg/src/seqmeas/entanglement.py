"""Two-qubit entanglement measures: Wootters concurrence and a negativity cross-check."""

from __future__ import annotations

import numpy as np

from .qcore import (
    EIGEN_FLOOR,
    SIGMA_Y,
    InvalidStateError,
    check_density_matrix,
    check_hermitian_unit_trace,
    hermitian_eigensystem,
    partial_transpose,
    singular_values,
)

YY = np.kron(SIGMA_Y, SIGMA_Y)


def spin_flip(rho: np.ndarray) -> np.ndarray:
    """Return (sigma_y x sigma_y) rho* (sigma_y x sigma_y)."""
    rho = check_density_matrix(rho, dim=4)
    return YY @ rho.conj() @ YY


def _clamped_spectrum(rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mu, v = hermitian_eigensystem(rho)
    if mu[0] < EIGEN_FLOOR:
        raise InvalidStateError(f"state has eigenvalue {mu[0]:.3e} below {EIGEN_FLOOR:g}")
    return np.clip(mu, 0.0, None), v


def wootters_lambdas(rho: np.ndarray) -> np.ndarray:
    """Decreasing square roots of the eigenvalues of rho * spin_flip(rho).

    With rho = W W^dag (columns of W are eigenvectors scaled by sqrt of the
    eigenvalues), the nonzero eigenvalues of rho rho~ equal those of
    tau^dag tau for the symmetric matrix tau = W^dag YY W*. Its singular values
    are therefore the lambdas, and they come out without a square root of a
    possibly round-off-sized eigenvalue.
    """
    rho = check_hermitian_unit_trace(rho, dim=4)
    mu, v = _clamped_spectrum(rho)
    keep = mu > 0.0
    lambdas = np.zeros(4)
    if not np.any(keep):
        return lambdas
    w = v[:, keep] * np.sqrt(mu[keep])
    tau = w.conj().T @ YY @ w.conj()
    sv = singular_values(tau)
    lambdas[: len(sv)] = sv
    return lambdas


def concurrence(rho: np.ndarray) -> float:
    """Wootters concurrence max(0, l1 - l2 - l3 - l4) of a two-qubit state."""
    lam = wootters_lambdas(rho)
    return max(0.0, float(lam[0] - lam[1] - lam[2] - lam[3]))


def concurrence_sqrt_form(rho: np.ndarray) -> float:
    """Concurrence from the spectrum of sqrt(rho) rho~ sqrt(rho).

    Textbook route kept for cross-checks. It square-roots eigenvalues that
    are zero in exact arithmetic, so on rank-deficient states it is only
    accurate to roughly 1e-8.
    """
    rho = check_hermitian_unit_trace(rho, dim=4)
    mu, v = _clamped_spectrum(rho)
    sqrt_rho = (v * np.sqrt(mu)) @ v.conj().T
    r = sqrt_rho @ (YY @ rho.conj() @ YY) @ sqrt_rho
    r = 0.5 * (r + r.conj().T)
    ev, _ = hermitian_eigensystem(r, tol=1e-12)
    lam = np.sqrt(np.clip(ev, 0.0, None))[::-1]
    return max(0.0, float(lam[0] - lam[1] - lam[2] - lam[3]))


def negativity(rho: np.ndarray) -> float:
    """Sum of |negative eigenvalues| of the partial transpose over qubit B.

    Uses LAPACK rather than the in-house Jacobi solver so that it stays an
    independent check on :func:`concurrence`.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"negativity expects a 4x4 matrix, got {rho.shape}")
    ev = np.linalg.eigvalsh(partial_transpose(rho, "B"))
    return float(-ev[ev < 0].sum())
