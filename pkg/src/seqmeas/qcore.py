"""Small fixed-dimension complex linear algebra for one- and two-qubit states.

Basis ordering is {|00>, |01>, |10>, |11>} with qubit A as the leftmost
(most significant) index. States and operators are plain ``numpy`` arrays.
"""

from __future__ import annotations

import math

import numpy as np

SUPPORTED_DIMS = (2, 4)

SIGMA_I = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
EIGEN_FLOOR = -1e-10


class NonHermitianError(ValueError):
    """Raised when a matrix handed to the eigensolver is not Hermitian."""

    def __init__(self, asymmetry: float, tol: float):
        super().__init__(f"matrix is not Hermitian: max|h - h^dag| = {asymmetry:.3e} > {tol:.1e}")
        self.asymmetry = asymmetry


class InvalidStateError(ValueError):
    """Raised when an array fails the density-matrix invariants."""


class ConvergenceError(RuntimeError):
    pass


def ket(*bits: int) -> np.ndarray:
    """Computational basis ket, e.g. ``ket(0, 1)`` is |01>."""
    index = 0
    for b in bits:
        if b not in (0, 1):
            raise ValueError(f"basis label must be 0 or 1, got {b!r}")
        index = 2 * index + b
    out = np.zeros(2 ** len(bits), dtype=complex)
    out[index] = 1.0
    return out


def projector(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    return np.outer(vec, vec.conj())


def _check_dim(n: int) -> None:
    if n not in SUPPORTED_DIMS:
        raise ValueError(f"unsupported dimension {n}; expected one of {SUPPORTED_DIMS}")


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two single-qubit vectors or operators (a is qubit A)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != b.ndim or a.ndim not in (1, 2):
        raise ValueError("tensor_product needs two vectors or two square matrices")
    if a.shape[0] != 2 or b.shape[0] != 2:
        raise ValueError(
            f"tensor_product composes two 2-dim factors only; got dims {a.shape[0]} and {b.shape[0]}"
        )
    if a.ndim == 2 and (a.shape != (2, 2) or b.shape != (2, 2)):
        raise ValueError("operators must be 2x2")
    return np.kron(a, b)


def partial_trace(rho: np.ndarray, keep: str = "A") -> np.ndarray:
    """Reduced state of the kept qubit of a two-qubit density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"partial_trace expects a 4x4 matrix, got {rho.shape}")
    r = rho.reshape(2, 2, 2, 2)  # (a, b, a', b')
    if keep == "A":
        return np.einsum("ijkj->ik", r)
    if keep == "B":
        return np.einsum("ijil->jl", r)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def partial_transpose(rho: np.ndarray, qubit: str = "B") -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    r = rho.reshape(2, 2, 2, 2)
    if qubit == "B":
        return r.transpose(0, 3, 2, 1).reshape(4, 4)
    if qubit == "A":
        return r.transpose(2, 1, 0, 3).reshape(4, 4)
    raise ValueError(f"qubit must be 'A' or 'B', got {qubit!r}")


def conjugate_map(rho: np.ndarray, m: np.ndarray) -> tuple[np.ndarray, float]:
    """Return ``(m rho m^dag, trace)`` for one Kraus branch."""
    rho = np.asarray(rho, dtype=complex)
    m = np.asarray(m, dtype=complex)
    if rho.shape != m.shape:
        raise ValueError(f"dimension mismatch: state {rho.shape} vs operator {m.shape}")
    out = m @ rho @ m.conj().T
    return out, float(np.trace(out).real)


def _offdiag_norm(a: list[list[complex]]) -> float:
    n = len(a)
    total = 0.0
    for i in range(n):
        row = a[i]
        for j in range(n):
            if i != j:
                z = row[j]
                total += z.real * z.real + z.imag * z.imag
    return math.sqrt(total)


def _rotate(a: list[list[complex]], v: list[list[complex]], p: int, q: int) -> None:
    """Apply the unitary Jacobi rotation zeroing a[p][q], in place on a and v."""
    apq = a[p][q]
    mag = abs(apq)
    if mag == 0.0:
        return
    phase = apq / mag
    pc = phase.conjugate()
    theta = (a[q][q].real - a[p][p].real) / (2.0 * mag)
    t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
    if theta < 0.0:
        t = -t
    c = 1.0 / math.sqrt(t * t + 1.0)
    s = t * c
    spc = s * pc
    cpc = c * pc
    # a <- a J, v <- v J with J = [[c, s], [-s conj(phase), c conj(phase)]] on (p, q)
    for row in a:
        x, y = row[p], row[q]
        row[p] = c * x - spc * y
        row[q] = s * x + cpc * y
    for row in v:
        x, y = row[p], row[q]
        row[p] = c * x - spc * y
        row[q] = s * x + cpc * y
    # a <- J^dag a
    sp = s * phase
    cp = c * phase
    rp, rq = a[p], a[q]
    for k in range(len(rp)):
        x, y = rp[k], rq[k]
        rp[k] = c * x - sp * y
        rq[k] = s * x + cp * y
    rp[q] = rq[p] = 0j
    rp[p] = complex(rp[p].real, 0.0)
    rq[q] = complex(rq[q].real, 0.0)


def hermitian_eigensystem(
    h: np.ndarray, tol: float = 1e-13, max_sweeps: int = 100
) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decompose a Hermitian matrix by cyclic complex Jacobi rotations.

    Returns eigenvalues in ascending order and the matching orthonormal
    eigenvectors as the columns of a unitary matrix. Each eigenvector's
    largest component is made real and positive, so the output is fully
    determined by the input.

    Sweeps visit the pairs ``(p, q)``, ``p < q``, in row-major order and
    stop once the off-diagonal Frobenius norm is at most ``tol * ||h||``.
    """
    arr = np.array(h, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    n = arr.shape[0]
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    scale = float(np.linalg.norm(arr))
    asymmetry = float(np.max(np.abs(arr - arr.conj().T))) if n else 0.0
    if asymmetry > tol * max(1.0, scale):
        raise NonHermitianError(asymmetry, tol * max(1.0, scale))
    if scale == 0.0:
        return np.zeros(n), np.eye(n, dtype=complex)

    a = (0.5 * (arr + arr.conj().T)).tolist()
    v = np.eye(n, dtype=complex).tolist()
    threshold = tol * scale
    for _ in range(max_sweeps):
        if _offdiag_norm(a) <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                _rotate(a, v, p, q)
    else:
        if _offdiag_norm(a) > threshold:
            raise ConvergenceError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")

    w = np.array([a[i][i].real for i in range(n)])
    vecs = np.array(v, dtype=complex)
    order = np.argsort(w, kind="stable")
    w = w[order]
    vecs = vecs[:, order]
    for k in range(n):
        col = vecs[:, k]
        mags = np.abs(col)
        big = int(np.argmax(mags >= mags.max() * (1 - 1e-12)))
        vecs[:, k] = col * (mags[big] / col[big])
    return w, vecs


def singular_values(m: np.ndarray, tol: float = 1e-15, max_sweeps: int = 100) -> np.ndarray:
    """Singular values (descending) by one-sided Jacobi orthogonalization of the columns.

    Equivalent to the two-sided rotation above applied to ``m^dag m`` without
    forming it, so small singular values keep absolute accuracy ~eps*||m||
    instead of the sqrt(eps) lost by square-rooting eigenvalues of ``m^dag m``.
    """
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2:
        raise ValueError("expected a matrix")
    n = arr.shape[1]
    g = arr.T.tolist()  # g[k] is column k
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            gp = g[p]
            for q in range(p + 1, n):
                gq = g[q]
                alpha = sum(z.real * z.real + z.imag * z.imag for z in gp)
                beta = sum(z.real * z.real + z.imag * z.imag for z in gq)
                gamma = sum(x.conjugate() * y for x, y in zip(gp, gq))
                mag = abs(gamma)
                if mag == 0.0 or mag <= tol * math.sqrt(alpha * beta):
                    continue
                rotated = True
                phase = gamma / mag
                theta = (beta - alpha) / (2.0 * mag)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                spc = s * phase.conjugate()
                cpc = c * phase.conjugate()
                for k in range(len(gp)):
                    x, y = gp[k], gq[k]
                    gp[k] = c * x - spc * y
                    gq[k] = s * x + cpc * y
        if not rotated:
            break
    else:
        raise ConvergenceError(f"one-sided Jacobi did not converge in {max_sweeps} sweeps")
    sv = np.array([math.sqrt(sum(z.real * z.real + z.imag * z.imag for z in col)) for col in g])
    return np.sort(sv)[::-1]


def check_hermitian_unit_trace(rho: np.ndarray, dim: int | None = None) -> np.ndarray:
    """Shape, Hermiticity and trace checks; the spectrum is left to the caller."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidStateError(f"density matrix must be square, got {rho.shape}")
    n = rho.shape[0]
    if n not in SUPPORTED_DIMS:
        raise InvalidStateError(f"unsupported dimension {n}; expected one of {SUPPORTED_DIMS}")
    if dim is not None and n != dim:
        raise InvalidStateError(f"expected a {dim}-dim state, got {n}")
    if not np.all(np.isfinite(rho)):
        raise InvalidStateError("density matrix has non-finite entries")
    asym = float(np.max(np.abs(rho - rho.conj().T)))
    if asym > HERMITIAN_TOL:
        raise InvalidStateError(f"not Hermitian (asymmetry {asym:.2e})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidStateError(f"trace {tr.real:.15g} != 1")
    return rho


def check_density_matrix(rho: np.ndarray, dim: int | None = None) -> np.ndarray:
    """Validate and return ``rho`` as a complex array, raising InvalidStateError."""
    rho = check_hermitian_unit_trace(rho, dim)
    w, _ = hermitian_eigensystem(rho)
    if w[0] < EIGEN_FLOOR:
        raise InvalidStateError(f"negative eigenvalue {w[0]:.3e}")
    return rho


def is_density_matrix(rho: np.ndarray) -> bool:
    try:
        check_density_matrix(rho)
    except InvalidStateError:
        return False
    return True


def normalize(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    norm = np.linalg.norm(vec)
    if norm == 0:
        raise ValueError("cannot normalize the zero vector")
    return vec / norm


def random_density_matrix(rng: np.random.Generator, dim: int = 4, rank: int | None = None) -> np.ndarray:
    """Ginibre-distributed random state; ``rank`` limits the number of columns."""
    _check_dim(dim)
    k = dim if rank is None else rank
    g = rng.normal(size=(dim, k)) + 1j * rng.normal(size=(dim, k))
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def random_pure_state(rng: np.random.Generator, dim: int = 4) -> np.ndarray:
    _check_dim(dim)
    return normalize(rng.normal(size=dim) + 1j * rng.normal(size=dim))


def random_unitary(rng: np.random.Generator, dim: int = 2) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
