"""Diversity measures of unitary constellations.

A constellation is a set of ``L`` unitary frames ``Φ`` of shape ``T x M``
(``Φ^* Φ = I_M``).  For a pair of frames let ``δ_m`` be the singular values
of ``Φ_a^* Φ_b``.  Then

* diversity product (DP):  ``min_pairs  prod_m (1 - δ_m²) ** (1 / 2M)``
* diversity sum (DS):      ``min_pairs  sqrt(1 - ‖Φ_a^* Φ_b‖_F² / M)``
* diversity function:      ``max_pairs  ½ prod_m [1 + ρ̃ (1 - δ_m²)] ** -N``
  with ``ρ̃ = (ρT/M)² / (4 (1 + ρT/M))``  (Chernoff bound on the pairwise
  error probability), and its exact counterpart which replaces the bound by
  the pairwise error integral.

Square constellations ``Ψ_k`` (``M x M`` unitaries, lifted to
``Φ_k = (√2/2)[I; Ψ_k]``) get the closed forms
``DP = ½ min |det(Ψ_a - Ψ_b)| ** (1/M)`` and
``DS = min ‖Ψ_a - Ψ_b‖_F / (2√M)``, which are used whenever a
:class:`SquareConstellation` is passed.
"""

import warnings
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import tolerances
from .linalg import adjoint, determinant, frobenius_norm


class ConstellationError(ValueError):
    """A constellation violates one of its invariants.

    ``invariant`` names the violated property (``"shape"``, ``"unitarity"``,
    ``"distinctness"``, ...).
    """

    def __init__(self, invariant, message):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


class QuadratureError(RuntimeError):
    """Adaptive quadrature hit its depth limit before reaching tolerance."""

    def __init__(self, message, estimate):
        super().__init__(message)
        self.estimate = estimate


def _pair_indices(n):
    return np.triu_indices(n, 1)


def _min_pairwise_distance(elements):
    i, j = _pair_indices(len(elements))
    if len(i) == 0:
        return np.inf, None
    d = frobenius_norm(elements[i] - elements[j])
    k = int(np.argmin(d))
    return float(d[k]), (int(i[k]), int(j[k]))


@dataclass(frozen=True)
class Constellation:
    """``L`` unitary frames of shape ``T x M``, stored as an ``(L, T, M)`` array."""

    elements: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.elements, dtype=complex)
        if e.ndim != 3:
            raise ConstellationError("shape", f"expected (L, T, M) array, got {e.shape}")
        object.__setattr__(self, "elements", e)

    @property
    def L(self):
        return self.elements.shape[0]

    @property
    def T(self):
        return self.elements.shape[1]

    @property
    def M(self):
        return self.elements.shape[2]

    @property
    def rate(self):
        return np.log2(self.L) / self.T

    def __len__(self):
        return self.L

    def duplicate_pair(self):
        """Indices of a pair closer than the distinctness tolerance, or None."""
        d, pair = _min_pairwise_distance(self.elements)
        return pair if d < tolerances.get().distinct else None

    def validate(self, distinct=True):
        tol = tolerances.get()
        if not np.all(np.isfinite(self.elements)):
            raise ConstellationError("finite", "non-finite entries")
        if self.T < self.M:
            raise ConstellationError("shape", f"T={self.T} < M={self.M}")
        if self.L < 2:
            raise ConstellationError("size", f"L={self.L} < 2")
        err = frobenius_norm(adjoint(self.elements) @ self.elements - np.eye(self.M))
        bad = np.flatnonzero(err > tol.frame)
        if bad.size:
            raise ConstellationError(
                "unitarity", f"element {bad[0]} has ‖Φ*Φ - I‖ = {err[bad[0]]:.3g}")
        if distinct:
            pair = self.duplicate_pair()
            if pair is not None:
                raise ConstellationError(
                    "distinctness", f"elements {pair[0]} and {pair[1]} coincide")
        return self


@dataclass(frozen=True)
class SquareConstellation:
    """``L`` unitary ``M x M`` matrices ``Ψ_k``.

    ``spec`` optionally records the structure that generated the elements
    (used by the fast decoder).
    """

    elements: np.ndarray
    spec: Optional[object] = field(default=None, compare=False)

    def __post_init__(self):
        e = np.asarray(self.elements, dtype=complex)
        if e.ndim != 3 or e.shape[1] != e.shape[2]:
            raise ConstellationError("shape", f"expected (L, M, M) array, got {e.shape}")
        object.__setattr__(self, "elements", e)

    @property
    def L(self):
        return self.elements.shape[0]

    @property
    def M(self):
        return self.elements.shape[1]

    @property
    def T(self):
        return 2 * self.M

    @property
    def rate(self):
        """Differential rate ``log2(L) / M``."""
        return np.log2(self.L) / self.M

    def __len__(self):
        return self.L

    def lift(self):
        """Frames ``(√2/2) [I; Ψ_k]`` with ``T = 2M``."""
        top = np.broadcast_to(np.eye(self.M), self.elements.shape)
        return Constellation(np.sqrt(0.5) * np.concatenate([top, self.elements], axis=1))

    def duplicate_pair(self):
        d, pair = _min_pairwise_distance(self.elements)
        return pair if d < tolerances.get().distinct else None

    def validate(self, distinct=True):
        tol = tolerances.get()
        if not np.all(np.isfinite(self.elements)):
            raise ConstellationError("finite", "non-finite entries")
        if self.L < 2:
            raise ConstellationError("size", f"L={self.L} < 2")
        err = frobenius_norm(adjoint(self.elements) @ self.elements - np.eye(self.M))
        bad = np.flatnonzero(err > tol.unitary)
        if bad.size:
            raise ConstellationError(
                "unitarity", f"element {bad[0]} has ‖Ψ*Ψ - I‖ = {err[bad[0]]:.3g}")
        if distinct:
            pair = self.duplicate_pair()
            if pair is not None:
                raise ConstellationError(
                    "distinctness", f"elements {pair[0]} and {pair[1]} coincide")
        return self


@dataclass(frozen=True)
class SnrPoint:
    """Linear SNR ``ρ`` per receive antenna."""

    rho: float

    def __post_init__(self):
        if not (np.isfinite(self.rho) and self.rho > 0):
            raise ValueError(f"SNR must be positive and finite, got {self.rho}")

    @classmethod
    def from_db(cls, db):
        return cls(10.0 ** (db / 10.0))

    @property
    def db(self):
        return 10.0 * np.log10(self.rho)

    def tilde(self, T, M):
        """``ρ̃ = (ρT/M)² / (4(1 + ρT/M))``."""
        r = self.rho * T / M
        return r * r / (4.0 * (1.0 + r))


def as_snr(snr):
    return snr if isinstance(snr, SnrPoint) else SnrPoint(float(snr))


@dataclass
class DiversityReport:
    dp: float
    ds: float
    dp_argmin: tuple
    ds_argmin: tuple
    spectrum_dp: list
    spectrum_ds: list
    pair_count: int
    flags: list = field(default_factory=list)


# -- pair quantities ---------------------------------------------------------

def _check_pair(phi_a, phi_b):
    phi_a = np.asarray(phi_a, dtype=complex)
    phi_b = np.asarray(phi_b, dtype=complex)
    if phi_a.shape != phi_b.shape or phi_a.ndim != 2:
        raise ValueError(f"frame shapes differ or are not 2-D: {phi_a.shape} vs {phi_b.shape}")
    return phi_a, phi_b


def _gaps_from_delta(delta):
    """``1 - δ²`` with δ clamped into [0, 1] and tiny values snapped to 0."""
    delta = np.clip(delta, 0.0, 1.0)
    g = 1.0 - delta * delta
    g[g < tolerances.get().one_minus_delta_sq] = 0.0
    return g


def pair_gaps(phi_a, phi_b):
    """``1 - δ_m²(Φ_a^* Φ_b)`` for one pair of frames."""
    phi_a, phi_b = _check_pair(phi_a, phi_b)
    delta = np.linalg.svd(phi_a.conj().T @ phi_b, compute_uv=False)
    return _gaps_from_delta(delta)


def pair_dp_distance(phi_a, phi_b):
    g = pair_gaps(phi_a, phi_b)
    return float(np.prod(g) ** (1.0 / (2 * len(g))))


def pair_ds_distance(phi_a, phi_b):
    phi_a, phi_b = _check_pair(phi_a, phi_b)
    M = phi_a.shape[1]
    c = frobenius_norm(phi_a.conj().T @ phi_b) ** 2
    return float(np.sqrt(max(0.0, 1.0 - c / M)))


def _all_pairs(v):
    """Per-pair gap vectors ``1 - δ²`` for every pair, shape ``(P, M)``."""
    e = v.elements
    i, j = _pair_indices(len(e))
    if isinstance(v, SquareConstellation):
        # 1 - δ_m² = σ_m²(Ψ_a - Ψ_b) / 4
        s = np.linalg.svd(e[i] - e[j], compute_uv=False)
        g = np.clip(s * s / 4.0, 0.0, 1.0)
        g[g < tolerances.get().one_minus_delta_sq] = 0.0
        return i, j, g
    delta = np.linalg.svd(adjoint(e[i]) @ e[j], compute_uv=False)
    return i, j, _gaps_from_delta(delta)


def pair_distances(v):
    """All pairwise DP and DS distances, in ``np.triu_indices`` order.

    Returns ``(i, j, dp, ds)``.
    """
    e = v.elements
    M = v.M
    i, j = _pair_indices(len(e))
    if isinstance(v, SquareConstellation):
        d = e[i] - e[j]
        dp = 0.5 * np.abs(determinant(d)) ** (1.0 / M)
        ds = frobenius_norm(d) / (2.0 * np.sqrt(M))
        return i, j, dp, np.minimum(ds, 1.0)
    cross = adjoint(e[i]) @ e[j]
    delta = np.linalg.svd(cross, compute_uv=False)
    dp = np.prod(_gaps_from_delta(delta), axis=1) ** (1.0 / (2 * M))
    ds = np.sqrt(np.clip(1.0 - frobenius_norm(cross) ** 2 / M, 0.0, 1.0))
    return i, j, dp, ds


def _argmin(i, j, vals):
    k = int(np.argmin(vals))
    return float(vals[k]), (int(i[k]), int(j[k]))


def diversity_product(v):
    """``(DP, (i, j))`` where ``(i, j)`` is the first pair attaining the minimum."""
    v.validate()
    i, j, dp, _ = pair_distances(v)
    return _argmin(i, j, dp)


def diversity_sum(v):
    v.validate()
    i, j, _, ds = pair_distances(v)
    return _argmin(i, j, ds)


def chernoff_terms(gaps, rho_t, n_rx):
    return 0.5 * np.prod(1.0 + rho_t * gaps, axis=-1) ** (-float(n_rx))


def _warn_duplicates(v):
    if v.duplicate_pair() is not None:
        warnings.warn("constellation has coinciding elements; diversity function "
                      "degenerates to 1/2", RuntimeWarning, stacklevel=3)


def diversity_function(v, n_rx, snr):
    """Chernoff-bound diversity function ``D(V, ρ)``."""
    if n_rx < 1:
        raise ValueError("n_rx must be >= 1")
    v.validate(distinct=False)
    _warn_duplicates(v)
    _, _, g = _all_pairs(v)
    rho_t = as_snr(snr).tilde(v.T, v.M)
    return float(np.max(chernoff_terms(g, rho_t, n_rx)))


# -- exact pairwise error probability ---------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


def _gauss_panel(f, a, b):
    half = 0.5 * (b - a)
    return half * np.dot(_GL_WEIGHTS, f(0.5 * (a + b) + half * _GL_NODES))


def _adaptive_gl(f, a, b, tol, max_depth):
    """Dyadically refined 64-point Gauss-Legendre.

    Returns ``(value, converged)``; a panel is accepted when it agrees with
    the sum of its two halves to within its share of ``tol``.
    """
    total = 0.0
    converged = True
    stack = [(a, b, _gauss_panel(f, a, b), 0)]
    while stack:
        lo, hi, whole, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left = _gauss_panel(f, lo, mid)
        right = _gauss_panel(f, mid, hi)
        share = tol * (hi - lo) / (b - a)
        if abs(left + right - whole) <= share:
            total += left + right
        elif depth >= max_depth:
            total += left + right
            converged = False
        else:
            stack.append((lo, mid, left, depth + 1))
            stack.append((mid, hi, right, depth + 1))
    return total, converged


def exact_pep_from_gaps(gaps, rho_t, n_rx):
    """Exact pairwise error probability from the gaps ``1 - δ_m²``.

    With ``2w = tan θ`` the improper integral over ``w`` becomes
    ``(1/π) ∫_0^{π/2} prod_m [cos²θ / (cos²θ + ρ̃ g_m)]^N dθ``.
    """
    gaps = np.asarray(gaps, dtype=float)
    a = rho_t * gaps[gaps > 0.0]
    if a.size == 0:
        return 0.5
    tol = tolerances.get()

    def integrand(theta):
        c2 = np.cos(theta) ** 2
        return np.prod((c2[:, None] / (c2[:, None] + a[None, :])) ** n_rx, axis=1)

    val, ok = _adaptive_gl(integrand, 0.0, 0.5 * np.pi, np.pi * tol.quad_abs,
                           tol.quad_max_depth)
    val /= np.pi
    if not ok:
        raise QuadratureError("exact_pep: quadrature did not converge", val)
    return float(val)


def exact_pep(phi_a, phi_b, n_rx, snr):
    """Pairwise probability of confusing ``Φ_a`` with ``Φ_b`` under ML decoding."""
    if n_rx < 1:
        raise ValueError("n_rx must be >= 1")
    phi_a, phi_b = _check_pair(phi_a, phi_b)
    T, M = phi_a.shape
    return exact_pep_from_gaps(pair_gaps(phi_a, phi_b), as_snr(snr).tilde(T, M), n_rx)


def chernoff_pep(phi_a, phi_b, n_rx, snr):
    phi_a, phi_b = _check_pair(phi_a, phi_b)
    T, M = phi_a.shape
    return float(chernoff_terms(pair_gaps(phi_a, phi_b), as_snr(snr).tilde(T, M), n_rx))


def exact_diversity_function(v, n_rx, snr):
    """Worst-pair exact error probability ``D_e(V, ρ)``."""
    if n_rx < 1:
        raise ValueError("n_rx must be >= 1")
    v.validate(distinct=False)
    _warn_duplicates(v)
    _, _, g = _all_pairs(v)
    rho_t = as_snr(snr).tilde(v.T, v.M)
    # identical gap vectors give identical integrals
    uniq = np.unique(np.round(g, 14), axis=0)
    return max(exact_pep_from_gaps(row, rho_t, n_rx) for row in uniq)


# -- spectra -----------------------------------------------------------------

def _spectrum(values):
    counts = Counter(np.round(values, 4).tolist())
    return sorted((float(d), int(n)) for d, n in counts.items())


def distance_spectrum(v):
    """DP and DS distance spectra (distances rounded to 4 decimals)."""
    v.validate()
    i, j, dp, ds = pair_distances(v)
    dp_min, dp_arg = _argmin(i, j, dp)
    ds_min, ds_arg = _argmin(i, j, ds)
    return DiversityReport(
        dp=dp_min, ds=ds_min, dp_argmin=dp_arg, ds_argmin=ds_arg,
        spectrum_dp=_spectrum(dp), spectrum_ds=_spectrum(ds),
        pair_count=len(i),
    )
