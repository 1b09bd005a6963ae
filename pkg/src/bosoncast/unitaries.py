"""Target unitaries: named families and Haar-random matrices."""

import numpy as np

from .errors import UnsupportedDimensionError

UNITARY_TOL = 1e-12

NAMED_KINDS = ("transfer", "swap", "hadamard", "complex_beamsplitter")


def check_unitary(u, tol=UNITARY_TOL):
    """Validate that ``u`` is square and unitary to within ``tol`` (max norm)."""
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {u.shape}")
    n = u.shape[0]
    defect = np.max(np.abs(u.conj().T @ u - np.eye(n)))
    if defect > tol:
        raise ValueError(f"matrix is not unitary: max |U^dag U - I| = {defect:.3e}")
    return u


def named_unitary(kind, n):
    """Return one of the named n x n target unitaries.

    ``transfer`` is the identity (plain state transfer) for any n. ``swap``
    is the order-reversing permutation (for n = 2 this exchanges the two
    modes). ``hadamard`` is the k-fold tensor power of the 2 x 2 Hadamard
    and requires n = 2**k. ``complex_beamsplitter`` is the symmetric 50/50
    splitter with imaginary cross terms and is defined for n = 2 only.
    """
    if kind not in NAMED_KINDS:
        raise ValueError(f"unknown unitary kind {kind!r}; choose from {NAMED_KINDS}")
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    if kind == "transfer":
        return np.eye(n, dtype=complex)
    if kind == "swap":
        return np.eye(n, dtype=complex)[::-1].copy()
    if kind == "complex_beamsplitter":
        if n != 2:
            raise UnsupportedDimensionError(
                f"complex_beamsplitter is defined for n = 2 only, got {n}")
        return np.array([[1, 1j], [1j, 1]], dtype=complex) / np.sqrt(2)
    # hadamard
    k = n.bit_length() - 1
    if n < 1 or 2 ** k != n:
        raise UnsupportedDimensionError(
            f"hadamard requires a power-of-two dimension, got {n}")
    h2 = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    u = np.eye(1, dtype=complex)
    for _ in range(k):
        u = np.kron(u, h2)
    return u


def haar_random_unitary(n, seed):
    """Draw a Haar-distributed n x n unitary, deterministic per (n, seed).

    QR factorization of a complex standard-Gaussian matrix; each column of Q
    is divided by the phase of the corresponding diagonal entry of R, which
    makes the distribution exactly Haar rather than QR-convention dependent.
    """
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d)).conj()
