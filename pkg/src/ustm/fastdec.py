"""Fast differential demodulation for structured constellations.

For ``A = U diag(e^{iα}) U^*`` and ``B = V diag(e^{iβ}) V^*`` the squared
residual of candidate ``A^k B^l`` is

    ‖Y_τ - A^k B^l Y_{τ-1}‖²
        = ‖Y_τ‖² + ‖Y_{τ-1}‖² - 2 Re Σ_{m,n} c_{mn} e^{i(kα_m + lβ_n)}

with ``c_{mn} = (U^*V)_{mn} (V^* Y_{τ-1} Y_τ^* U)_{nm}``.  Once ``c`` is
known (three small matrix products per block), each candidate costs
``O(M²)`` scalar work instead of a full matrix product.

For ``A^k B^l`` the search visits outer exponents ``k`` in order of the
bound ``Σ_n |d_n(k)|`` with ``d_n(k) = Σ_m c_{mn} e^{ikα_m}`` and stops once
the bound cannot beat the best score.  Without a radius the result is the
exhaustive ML argmin, ties going to the smallest element index.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .linalg import UnitaryEig, adjoint, unitary_eig

FAST_KINDS = ("cyclic", "weak_group", "geometric2", "product2")


@dataclass
class DecodeCounter:
    """Work done by decode calls.

    ``products`` counts dense matrix products, ``candidates`` counts
    ``O(M²)`` candidate evaluations.
    """

    decodes: int = 0
    products: int = 0
    candidates: int = 0

    def products_per_decode(self):
        return self.products / max(self.decodes, 1)

    def candidates_per_decode(self):
        return self.candidates / max(self.decodes, 1)


@dataclass(frozen=True)
class DecoderTables:
    """Eigendecompositions of the generators plus per-exponent phase tables.

    Attributes
    ----------
    kind : str
        ``"cyclic"``, ``"weak_group"`` or ``"product2"``.
    sizes : tuple
        ``(L,)`` or ``(p, q)``.
    eig_a, eig_b : UnitaryEig
        Decompositions of ``A`` and ``B`` (``eig_b`` is ``None`` for cyclic).
    uv : ndarray
        ``U^* V`` (``None`` for cyclic).
    phase_a, phase_b : ndarray
        ``e^{ikα}`` for ``k = 0..`` (rows) and likewise for ``β``.
    """

    kind: str
    sizes: tuple
    eig_a: UnitaryEig
    eig_b: Optional[UnitaryEig]
    uv: Optional[np.ndarray]
    phase_a: np.ndarray
    phase_b: Optional[np.ndarray] = field(default=None)

    @property
    def L(self):
        if self.kind == "product2":
            return (self.sizes[0] + 1) * (self.sizes[1] + 1)
        return self.sizes[0]

    @property
    def M(self):
        return self.eig_a.basis.shape[0]

    def index(self, k, l=None):
        """Element index of exponents ``(k, l)`` in expansion order."""
        if self.kind == "product2":
            return k * (self.sizes[1] + 1) + l
        return k

    def exponents(self, z):
        if self.kind == "product2":
            return divmod(int(z), self.sizes[1] + 1)
        return (int(z),)

    def element(self, k, l=None):
        """``A^k B^l`` (``A^k B^k`` for weak groups, ``A^k`` for cyclic)."""
        ak = self.eig_a.power(k)
        if self.kind == "cyclic":
            return ak
        return ak @ self.eig_b.power(k if l is None else l)

    def correlation(self, y_prev, y_curr, counter=None):
        """Coefficients ``c``: vector ``(M,)`` for cyclic, ``(M, M)`` otherwise."""
        u = self.eig_a.basis
        g = y_prev @ adjoint(y_curr)
        if self.kind == "cyclic":
            c = np.einsum("...mi,...ij,...jm->...m", adjoint(u), g, u)
            n_prod = 3
        else:
            v = self.eig_b.basis
            w = adjoint(v) @ g @ u
            c = self.uv * np.swapaxes(w, -1, -2)
            n_prod = 3
        if counter is not None:
            counter.products += n_prod
        return c

    def scores(self, c):
        """``Re Σ c e^{i(...)}`` for every element, in index order.

        Works on a stack of coefficient arrays; the last axis of the result
        runs over element indices.
        """
        if self.kind == "cyclic":
            return np.real(c @ self.phase_a.T)
        if self.kind == "weak_group":
            ph = self.phase_a[:, :, None] * self.phase_b[:, None, :]
            flat = ph.reshape(ph.shape[0], -1)
            return np.real(c.reshape(c.shape[:-2] + (-1,)) @ flat.T)
        d = np.einsum("...mn,km->...kn", c, self.phase_a)
        s = np.real(d @ self.phase_b.T)
        return s.reshape(s.shape[:-2] + (-1,))


def build_tables(spec):
    """Precompute decoder tables for a structured constellation."""
    kind = "weak_group" if spec.kind == "geometric2" else spec.kind
    if kind not in ("cyclic", "weak_group", "product2"):
        raise ValueError(f"fast decoding supports {FAST_KINDS}, got {spec.kind!r}")
    eig_a = unitary_eig(spec.generators[0])
    if kind == "product2":
        p, q = spec.sizes
        na, nb = p + 1, q + 1
    else:
        na = nb = spec.L
    phase_a = np.exp(1j * np.outer(np.arange(na), eig_a.angles))
    if kind == "cyclic":
        return DecoderTables(kind, tuple(spec.sizes), eig_a, None, None, phase_a)
    eig_b = unitary_eig(spec.generators[1])
    uv = adjoint(eig_a.basis) @ eig_b.basis
    phase_b = np.exp(1j * np.outer(np.arange(nb), eig_b.angles))
    return DecoderTables(kind, tuple(spec.sizes), eig_a, eig_b, uv, phase_a, phase_b)


def default_radius(m, n, rho):
    """Squared residual threshold ``C = M N (1 + 2/√ρ)`` for radius mode."""
    return m * n * (1.0 + 2.0 / np.sqrt(rho))


def _better(score, z, best, best_z):
    return score > best or (score == best and z < best_z)


def fast_decode(tables, y_prev, y_curr, radius=None, counter=None):
    """Exponents of the ML candidate for one pair of received blocks.

    Parameters
    ----------
    tables : DecoderTables
    y_prev, y_curr : ndarray, shape (M, N)
        Consecutive received blocks.
    radius : float, optional
        Squared-residual threshold.  When given, the first visited candidate
        inside it is returned; if none is, the exhaustive answer is.
    counter : DecodeCounter, optional
        Accumulates matrix products and candidate evaluations.

    Returns
    -------
    tuple
        ``(k,)`` for cyclic and weak-group tables, ``(k, l)`` for product2.
    """
    y_prev = np.asarray(y_prev, dtype=complex)
    y_curr = np.asarray(y_curr, dtype=complex)
    if y_prev.shape != y_curr.shape or y_prev.ndim != 2 or y_prev.shape[0] != tables.M:
        raise ValueError(f"blocks must both be {tables.M} x N, got "
                         f"{y_prev.shape} and {y_curr.shape}")
    if counter is not None:
        counter.decodes += 1
    c = tables.correlation(y_prev, y_curr, counter)
    energy = np.vdot(y_prev, y_prev).real + np.vdot(y_curr, y_curr).real
    # residual <= radius  <=>  score >= (energy - radius) / 2
    target = None if radius is None else 0.5 * (energy - radius)

    if tables.kind != "product2":
        # one exponent: every candidate has the same bound, so scan in order
        s = tables.scores(c)
        if counter is not None:
            counter.candidates += len(s)
        if target is not None:
            hit = np.flatnonzero(s >= target)
            if hit.size:
                return (int(hit[0]),)
        return (int(np.argmax(s)),)

    # d[k, n] = Σ_m c_mn e^{ikα_m}; score(k, l) = Re Σ_n d[k, n] e^{ilβ_n}
    d = tables.phase_a @ c
    bound = np.abs(d).sum(axis=1)
    order = np.lexsort((np.arange(len(bound)), -bound))
    q1 = tables.sizes[1] + 1
    best, best_z = -np.inf, -1
    for k in order:
        if bound[k] < best:
            break
        row = np.real(tables.phase_b @ d[k])
        if counter is not None:
            counter.candidates += q1
        if target is not None:
            hit = np.flatnonzero(row >= target)
            if hit.size:
                return (int(k), int(hit[0]))
        l = int(np.argmax(row))
        z = int(k) * q1 + l
        if _better(row[l], z, best, best_z):
            best, best_z = row[l], z
    return tables.exponents(best_z)


def fast_decode_batch(tables, y_prev, y_curr):
    """Element indices for a stack of block pairs ``(..., M, N)``.

    Scores every candidate without pruning; used by the simulator.
    """
    c = tables.correlation(y_prev, y_curr)
    return np.argmax(tables.scores(c), axis=-1)
