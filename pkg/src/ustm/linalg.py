"""Small dense complex linear algebra.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  The routines
here are thin, validated wrappers around LAPACK (via numpy/scipy); sizes in
this package are tiny (M, T <= 16), so accuracy and input checking matter
more than raw speed.  Most functions also accept a stack of matrices
``(..., m, n)``.
"""

from typing import NamedTuple

import numpy as np
import scipy.linalg

from . import tolerances


class UnitaryEig(NamedTuple):
    """Eigendecomposition ``u = basis @ diag(exp(1j*angles)) @ basis^*``."""

    basis: np.ndarray
    angles: np.ndarray

    def power(self, k):
        """``u**k`` for integer (or real) ``k``."""
        phase = np.exp(1j * k * self.angles)
        return (self.basis * phase) @ self.basis.conj().T

    def powers(self, ks):
        """Stack of ``u**k`` for every ``k`` in ``ks``; shape ``(len(ks), m, m)``."""
        ks = np.asarray(ks, dtype=float)
        phase = np.exp(1j * ks[:, None] * self.angles[None, :])
        return np.einsum("ij,kj,lj->kil", self.basis, phase, self.basis.conj())


def as_matrix(a, name="matrix"):
    """Coerce to a finite complex 2-D array."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def mat_mul(a, b):
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} @ {b.shape}")
    return a @ b


def adjoint(a):
    """Conjugate transpose; works on stacks."""
    return np.conj(np.swapaxes(np.asarray(a), -1, -2))


def frobenius_norm(a):
    a = np.asarray(a)
    return np.sqrt(np.sum(a.real ** 2 + a.imag ** 2, axis=(-2, -1)))


def determinant(a):
    """Determinant of a square matrix (or stack).

    2x2 inputs use the closed form ``ad - bc``; larger ones use LAPACK's
    partially pivoted LU.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"determinant needs a square matrix, got shape {a.shape}")
    if a.shape[-1] == 1:
        return a[..., 0, 0]
    if a.shape[-1] == 2:
        return a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]
    return np.linalg.det(a)


def singular_values(a, frame_product=False):
    """Singular values in descending order.

    With ``frame_product=True`` the input is known to be ``Φ_a^* Φ_b`` for two
    unitary frames, and the values are clamped into ``[0, 1]`` so that
    ``1 - δ²`` never goes negative from roundoff.
    """
    s = np.linalg.svd(np.asarray(a, dtype=complex), compute_uv=False)
    if frame_product:
        return np.clip(s, 0.0, 1.0)
    return np.maximum(s, 0.0)


def is_unitary(u, tol=None):
    u = np.asarray(u)
    if u.ndim < 2 or u.shape[-1] != u.shape[-2]:
        return False
    tol = tolerances.get().unitary if tol is None else tol
    eye = np.eye(u.shape[-1])
    err = frobenius_norm(adjoint(u) @ u - eye)
    return bool(np.all(err <= tol))


def unitary_eig(u, check=True):
    """Eigen-angles and an orthonormal eigenbasis of a unitary matrix.

    Uses the complex Schur form, which for a normal matrix is diagonal and
    comes with an exactly unitary basis even for repeated eigenvalues.
    """
    u = as_matrix(u, "u")
    if check and not is_unitary(u):
        raise ValueError("unitary_eig: input is not unitary to tolerance")
    t, z = scipy.linalg.schur(u, output="complex")
    angles = np.mod(np.angle(np.diag(t)), 2 * np.pi)
    eig = UnitaryEig(z, angles)
    if check and frobenius_norm(eig.power(1) - u) > tolerances.get().eig_reconstruct:
        raise ValueError("unitary_eig: Schur form not diagonal (input not normal)")
    return eig


def qr_unitary(g, return_r=False):
    """Unitary factor of QR with the phase fix ``diag(R) > 0``.

    Without the fix LAPACK's sign convention biases the distribution of Q,
    so Gaussian inputs would not give Haar-distributed outputs.
    """
    g = as_matrix(g, "g")
    if g.shape[0] != g.shape[1]:
        raise ValueError("qr_unitary needs a square matrix")
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    scale = np.abs(d)
    if np.min(scale) <= 1e-12 * max(np.max(scale), 1e-300):
        raise ValueError("qr_unitary: input is rank deficient")
    ph = d / scale
    q = q * ph
    if return_r:
        return q, ph.conj()[:, None] * r
    return q


def polar_unitary(a):
    """Nearest unitary matrix in Frobenius norm (polar factor)."""
    w, _, vh = np.linalg.svd(np.asarray(a, dtype=complex))
    return w @ vh
