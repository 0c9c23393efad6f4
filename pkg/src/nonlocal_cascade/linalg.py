"""Dense complex matrix helpers.

Matrices are plain square ``numpy.ndarray`` objects of dtype ``complex128``.
Composite indices follow numpy's row-major ``kron`` convention: for a
product of spaces with dimensions ``(d1, d2)`` the basis ket ``|i>|j>`` sits
at flat index ``i * d2 + j``.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, NotHermitian, NotPsd

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10


def as_matrix(a) -> np.ndarray:
    """Return ``a`` as a square complex128 array, raising on bad shapes."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {m.shape}")
    return m


def identity(dim: int) -> np.ndarray:
    if dim < 1:
        raise DimensionMismatch(f"dimension must be positive, got {dim}")
    return np.eye(dim, dtype=np.complex128)


_PAULI = {
    0: np.array([[1, 0], [0, 1]], dtype=np.complex128),
    1: np.array([[0, 1], [1, 0]], dtype=np.complex128),
    2: np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    3: np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def pauli(i: int) -> np.ndarray:
    """Pauli matrix ``sigma_i`` for ``i`` in 1..3 (0 gives the 2x2 identity)."""
    try:
        return _PAULI[i].copy()
    except KeyError:
        raise ValueError(f"pauli index must be 0..3, got {i}") from None


def kron(*factors) -> np.ndarray:
    """Kronecker product of one or more square matrices, left to right."""
    if not factors:
        raise ValueError("kron needs at least one factor")
    out = as_matrix(factors[0])
    for f in factors[1:]:
        out = np.kron(out, as_matrix(f))
    return out


def trace(a) -> complex:
    return complex(np.trace(as_matrix(a)))


def dagger(a) -> np.ndarray:
    return np.conj(a).T


def hermitian_defect(a) -> float:
    """Largest entrywise modulus of ``a - a^dagger``."""
    m = as_matrix(a)
    return float(np.max(np.abs(m - dagger(m))))


def check_hermitian(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    m = as_matrix(a)
    defect = hermitian_defect(m)
    if defect > tol:
        raise NotHermitian(f"matrix is not Hermitian (max |a - a^dagger| = {defect:.3e})")
    return m


def eigen_hermitian(a, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns ascending real eigenvalues and a unitary whose columns are the
    matching eigenvectors, so that ``a == V @ diag(w) @ V^dagger``.
    """
    m = check_hermitian(a, tol)
    # symmetrize so rounding in the lower triangle cannot leak into the result
    w, v = np.linalg.eigh(0.5 * (m + dagger(m)))
    return w, v


def is_psd(a, tol: float = PSD_TOL) -> bool:
    try:
        w, _ = eigen_hermitian(a)
    except NotHermitian:
        return False
    return bool(w[0] >= -tol)


def psd_sqrt(a, tol: float = PSD_TOL) -> np.ndarray:
    """Principal square root of a Hermitian positive semidefinite matrix.

    Eigenvalues in ``[-tol, 0)`` are treated as rounding noise and clamped to
    zero; anything more negative raises :class:`NotPsd`. Eigenvalues within
    round-off of zero are snapped to zero as well, since the square root
    would otherwise amplify ``1e-17`` noise into ``3e-9`` entries.
    """
    w, v = eigen_hermitian(a)
    if w[0] < -tol:
        raise NotPsd(f"matrix has negative eigenvalue {w[0]:.3e}")
    noise = 4 * len(w) * np.finfo(float).eps * max(float(np.max(np.abs(w))), 1.0)
    root = np.sqrt(np.where(w > noise, w, 0.0))
    r = (v * root) @ dagger(v)
    return 0.5 * (r + dagger(r))


def expectation(operator, rho) -> float:
    """Real part of ``Tr(operator @ rho)``; the imaginary residue must vanish.

    Both arguments are expected to be Hermitian, so a residue above 1e-10
    signals corrupted input and raises :class:`NotHermitian`.
    """
    op = as_matrix(operator)
    r = as_matrix(rho)
    if op.shape != r.shape:
        raise DimensionMismatch(f"operator {op.shape} and state {r.shape} differ in shape")
    # Tr(AB) = sum_ij A_ij B_ji without forming the product
    value = complex(np.sum(op * r.T))
    if abs(value.imag) >= 1e-10:
        raise NotHermitian(f"expectation has imaginary residue {value.imag:.3e}")
    return value.real
