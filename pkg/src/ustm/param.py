"""Parameterizations of the unitary group: Cayley transform, Haar sampling and
Gaussian neighborhoods used by the annealing search."""

import numpy as np

from . import tolerances
from .linalg import as_matrix, qr_unitary
from .metrics import SquareConstellation


def rng_from(seed_or_rng):
    """Accept a seed, ``None`` or an existing ``numpy.random.Generator``."""
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def complex_normal(rng, shape, var=1.0):
    """CN(0, var): real and imaginary parts each N(0, var/2)."""
    s = np.sqrt(var / 2.0)
    return s * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def is_skew_hermitian(y, tol=1e-12):
    y = np.asarray(y)
    return y.ndim == 2 and y.shape[0] == y.shape[1] and \
        np.linalg.norm(y + y.conj().T) <= tol


def cayley(y):
    """``(I + Y)^{-1} (I - Y)``.

    Maps skew-Hermitian matrices to unitaries without eigenvalue -1 and back;
    the map is an involution.
    """
    y = as_matrix(y, "Y")
    if y.shape[0] != y.shape[1]:
        raise ValueError("cayley needs a square matrix")
    eye = np.eye(y.shape[0])
    lhs = eye + y
    if np.linalg.cond(lhs) > tolerances.get().cayley_cond:
        raise ValueError("cayley: I + Y is numerically singular")
    return np.linalg.solve(lhs, eye - y)


def random_skew_hermitian(m, sigma, rng):
    """Skew-Hermitian matrix with CN(0, σ²) strictly-upper entries and
    i·N(0, σ²) on the diagonal."""
    rng = rng_from(rng)
    upper = np.triu(complex_normal(rng, (m, m), sigma ** 2), 1)
    diag = 1j * sigma * rng.standard_normal(m)
    return upper - upper.conj().T + np.diag(diag)


def haar_unitary(m, rng=None):
    """Haar-distributed ``m x m`` unitary from the phase-fixed QR of a
    complex Gaussian matrix."""
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = rng_from(rng)
    while True:
        try:
            return qr_unitary(complex_normal(rng, (m, m)))
        except ValueError:  # rank-deficient draw, probability zero
            continue


def random_constellation(m, L, rng=None):
    """``L`` independent Haar unitaries; fully diverse with probability one."""
    if L < 2:
        raise ValueError("L must be >= 2")
    rng = rng_from(rng)
    return SquareConstellation(np.array([haar_unitary(m, rng) for _ in range(L)]))


def perturb(u, sigma, rng=None):
    """Random unitary near ``u``: ``u @ cayley(S)`` with ``S`` a random
    skew-Hermitian of scale ``sigma``.

    ``sigma = 0`` returns ``u`` unchanged.  Right multiplication keeps the
    result exactly unitary (to roundoff) without re-orthogonalization.
    """
    u = as_matrix(u, "u")
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0:
        return u.copy()
    s = random_skew_hermitian(u.shape[1], sigma, rng)
    # I + S is always invertible for skew-Hermitian S
    eye = np.eye(u.shape[1])
    return u @ np.linalg.solve(eye + s, eye - s)
