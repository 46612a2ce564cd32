"""Structured constellation families and the published catalog.

Families (``StructureSpec.kind``):

``cyclic``        ``{A^k : k = 0..L-1}``
``weak_group``    ``{A^k B^k : k = 0..L-1}``
``product2``      ``{A^k B^l : k = 0..p, l = 0..q}``, lexicographic, ``L = (p+1)(q+1)``
``product3``      ``{A^k B^l C^m : k = 0..p, l = 0..q, m = 0..r}``
``geometric2``    weak group with ``A = diag(e^{ix}, e^{iy})`` and ``B`` the
                  planar rotation by ``z``
``geometric3``    3-D weak group with angle parameters ``x, y, z, w``
``general_form``  ``{A^k [I_M; 0] : k = 0..L-1}``, ``A`` a ``T x T`` unitary

For every family except ``product3`` the diversity can be read off a small
set of representative differences instead of all ``L(L-1)/2`` pairs; see
:func:`representatives`.
"""

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .linalg import adjoint, as_matrix, determinant, frobenius_norm, is_unitary, \
    polar_unitary, unitary_eig
from .metrics import Constellation, SquareConstellation, as_snr, chernoff_terms

KINDS = ("cyclic", "weak_group", "product2", "product3", "geometric2", "geometric3",
         "general_form")
REDUCED_KINDS = ("cyclic", "weak_group", "product2", "geometric2", "geometric3",
                 "general_form")


def rotation(z):
    c, s = np.cos(z), np.sin(z)
    return np.array([[c, s], [-s, c]], dtype=complex)


@dataclass(frozen=True)
class StructureSpec:
    kind: str
    generators: tuple
    sizes: tuple
    angles: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown structure kind {self.kind!r}")
        gens = tuple(as_matrix(g, "generator") for g in self.generators)
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        need = {"cyclic": (1, 1), "weak_group": (2, 1), "product2": (2, 2),
                "product3": (3, 3), "geometric2": (2, 1), "geometric3": (2, 1),
                "general_form": (2, 1)}[self.kind]
        if len(gens) != need[0] or len(self.sizes) != need[1]:
            raise ValueError(f"{self.kind} needs {need[0]} generators and {need[1]} sizes")
        if self.kind == "general_form":
            a, b = gens
            if not is_unitary(a):
                raise ValueError("general_form: A must be unitary")
            if b.shape[0] != a.shape[0] or b.shape[1] > b.shape[0]:
                raise ValueError("general_form: B must be T x M with M <= T")
        else:
            m = gens[0].shape[0]
            for g in gens:
                if g.shape != (m, m) or not is_unitary(g):
                    raise ValueError(f"{self.kind}: generators must be unitary {m}x{m}")
        if any(s < (1 if self.kind in ("product2", "product3") else 2) for s in self.sizes):
            raise ValueError(f"invalid sizes {self.sizes}")

    @classmethod
    def _trusted(cls, kind, generators, sizes, angles=None):
        """Build without validation; callers guarantee unitary generators."""
        obj = object.__new__(cls)
        for name, val in (("kind", kind), ("generators", tuple(generators)),
                          ("sizes", tuple(sizes)), ("angles", angles)):
            object.__setattr__(obj, name, val)
        return obj

    # -- constructors --
    @classmethod
    def cyclic(cls, a, L):
        return cls("cyclic", (a,), (L,))

    @classmethod
    def weak_group(cls, a, b, L):
        return cls("weak_group", (a, b), (L,))

    @classmethod
    def product2(cls, a, b, p, q):
        """``A^k B^l`` with ``k = 0..p`` and ``l = 0..q``."""
        return cls("product2", (a, b), (p, q))

    @classmethod
    def product3(cls, a, b, c, p, q, r):
        return cls("product3", (a, b, c), (p, q, r))

    @classmethod
    def geometric2(cls, x, y, z, L):
        a = np.diag([np.exp(1j * x), np.exp(1j * y)])
        return cls("geometric2", (a, rotation(z)), (L,), (x, y, z))

    @classmethod
    def geometric3(cls, x, y, z, w, L):
        a = np.zeros((3, 3), dtype=complex)
        a[:2, :2] = rotation(x)
        a[2, 2] = np.exp(1j * y)
        b = np.zeros((3, 3), dtype=complex)
        b[0, 0] = np.exp(1j * z)
        b[1:, 1:] = rotation(w)
        return cls("geometric3", (a, b), (L,), (x, y, z, w))

    @classmethod
    def general_form(cls, a, L, M):
        a = as_matrix(a, "A")
        b = np.zeros((a.shape[0], M), dtype=complex)
        b[:M, :M] = np.eye(M)
        return cls("general_form", (a, b), (L,))

    # -- derived --
    @property
    def L(self):
        if self.kind == "product2":
            return (self.sizes[0] + 1) * (self.sizes[1] + 1)
        if self.kind == "product3":
            return int(np.prod([s + 1 for s in self.sizes]))
        return self.sizes[0]

    @property
    def M(self):
        if self.kind == "general_form":
            return self.generators[1].shape[1]
        return self.generators[0].shape[0]

    @property
    def is_weak_group(self):
        return self.kind in ("weak_group", "geometric2", "geometric3")

    def exponents(self):
        """Exponent tuple of every element, in expansion order."""
        if self.kind in ("product2", "product3"):
            grids = np.meshgrid(*[np.arange(s + 1) for s in self.sizes], indexing="ij")
            return np.stack([g.ravel() for g in grids], axis=1)
        return np.arange(self.L)[:, None]


def powers(a, n):
    """``a^0, ..., a^n``; shape ``(n+1, m, m)``.

    Short runs use repeated products, long ones the eigendecomposition so
    that roundoff does not grow with the exponent.
    """
    if n <= 12:
        out = np.empty((n + 1,) + a.shape, dtype=complex)
        out[0] = np.eye(a.shape[0])
        for k in range(1, n + 1):
            out[k] = out[k - 1] @ a
        return out
    return unitary_eig(a, check=False).powers(np.arange(n + 1))


def expand(spec):
    """Element list of a structured family.

    Square families give a :class:`SquareConstellation` carrying ``spec``;
    ``general_form`` gives a :class:`Constellation` of ``T x M`` frames.
    Coinciding elements are kept but trigger a ``RuntimeWarning``.
    """
    gens = spec.generators
    if spec.kind == "cyclic":
        elems = powers(gens[0], spec.L - 1)
    elif spec.is_weak_group:
        elems = powers(gens[0], spec.L - 1) @ powers(gens[1], spec.L - 1)
    elif spec.kind == "product2":
        p, q = spec.sizes
        pa, pb = powers(gens[0], p), powers(gens[1], q)
        elems = (pa[:, None] @ pb[None, :]).reshape(-1, spec.M, spec.M)
    elif spec.kind == "product3":
        p, q, r = spec.sizes
        pa, pb, pc = powers(gens[0], p), powers(gens[1], q), powers(gens[2], r)
        elems = (pa[:, None, None] @ pb[None, :, None] @ pc[None, None, :])
        elems = elems.reshape(-1, spec.M, spec.M)
    else:  # general_form
        elems = powers(gens[0], spec.L - 1) @ gens[1]
        out = Constellation(elems)
        if out.duplicate_pair() is not None:
            warnings.warn("structure produced coinciding elements", RuntimeWarning,
                          stacklevel=2)
        return out
    out = SquareConstellation(elems, spec=spec)
    if out.duplicate_pair() is not None:
        warnings.warn("structure produced coinciding elements", RuntimeWarning,
                      stacklevel=2)
    return out


def lift(sq):
    return sq.lift()


def representatives(spec):
    """Representative matrices covering every pairwise distance.

    For square families this is a stack of differences ``D`` such that every
    ``Ψ_i - Ψ_j`` equals ``U D V`` for unitaries ``U, V``:

    * cyclic:      ``I - A^d``,            ``d = 1..L-1``
    * weak group:  ``I - A^d B^d``         (``Ψ_i^{-1}Ψ_j`` is conjugate to ``Ψ_{j-i}``)
    * product2:    ``I - B^b``, ``I - A^a``, ``I - A^a B^b``, ``A^a - B^b``
      (``2pq + p + q`` matrices)

    For ``general_form`` it is the stack of cross products
    ``B^* A^d B``, ``d = 1..L-1``: ``Φ_i^* Φ_j`` depends only on ``j - i``.
    """
    if spec.kind not in REDUCED_KINDS:
        raise ValueError(f"no reduced representation for kind {spec.kind!r}")
    gens = spec.generators
    eye = np.eye(gens[0].shape[0])
    if spec.kind == "cyclic":
        return eye - powers(gens[0], spec.L - 1)[1:]
    if spec.is_weak_group:
        n = spec.L - 1
        return eye - (powers(gens[0], n) @ powers(gens[1], n))[1:]
    if spec.kind == "product2":
        p, q = spec.sizes
        pa, pb = powers(gens[0], p)[1:], powers(gens[1], q)[1:]
        mixed = (pa[:, None] @ pb[None, :]).reshape(-1, spec.M, spec.M)
        cross = (pa[:, None] - pb[None, :]).reshape(-1, spec.M, spec.M)
        return np.concatenate([eye - pb, eye - pa, eye - mixed, cross])
    a, b = gens
    return adjoint(b) @ powers(a, spec.L - 1)[1:] @ b


class ReducedDiversity(NamedTuple):
    dp: float
    ds: float
    evaluations: int


def representative_gaps(spec):
    """Gap vectors ``1 - δ_m²`` for each representative, shape ``(n, M)``."""
    reps = representatives(spec)
    s = np.linalg.svd(reps, compute_uv=False)
    if spec.kind == "general_form":
        g = 1.0 - np.clip(s, 0.0, 1.0) ** 2
    else:
        g = np.clip(s * s / 4.0, 0.0, 1.0)
    g[g < 1e-15] = 0.0
    return g


def reduced_diversity(spec):
    """DP and DS from the representative set (equal to the all-pairs values)."""
    reps = representatives(spec)
    M = spec.M
    if spec.kind == "general_form":
        delta = np.clip(np.linalg.svd(reps, compute_uv=False), 0.0, 1.0)
        g = 1.0 - delta ** 2
        g[g < 1e-15] = 0.0
        dp = np.prod(g, axis=1) ** (1.0 / (2 * M))
        ds = np.sqrt(np.clip(1.0 - frobenius_norm(reps) ** 2 / M, 0.0, 1.0))
    else:
        dp = 0.5 * np.abs(determinant(reps)) ** (1.0 / M)
        ds = np.minimum(frobenius_norm(reps) / (2.0 * np.sqrt(M)), 1.0)
    return ReducedDiversity(float(dp.min()), float(ds.min()), len(reps))


def reduced_divfn(spec, n_rx, snr):
    """Chernoff diversity function from the representative set."""
    T = spec.generators[1].shape[0] if spec.kind == "general_form" else 2 * spec.M
    rho_t = as_snr(snr).tilde(T, spec.M)
    return float(np.max(chernoff_terms(representative_gaps(spec), rho_t, n_rx)))


# -- catalog -----------------------------------------------------------------

@dataclass
class CatalogEntry:
    name: str
    constellation: object
    spec: Optional[StructureSpec] = None
    published_dp: Optional[float] = None
    published_ds: Optional[float] = None
    tolerance: float = 5e-4
    note: str = ""
    extra: dict = field(default_factory=dict)


def _orthogonal_design():
    w = lambda t: np.exp(1j * t)
    elems = [np.sqrt(0.5) * np.array([[w(2 * m * np.pi / 11), w(2 * n * np.pi / 11)],
                                      [-w(-2 * n * np.pi / 11), w(-2 * m * np.pi / 11)]])
             for m in range(11) for n in range(11)]
    return SquareConstellation(np.array(elems))


SL2F5_WORDS = ("", "P", "Q", "QP", "QPQ", "QPQP", "QPQQ", "QPQPQ", "QPQPQQ",
               "QPQPQQP", "QPQPQQPQ", "QPQPQQPQP")


def sl2f5_generators():
    eta = np.exp(2j * np.pi / 5)
    p = np.array([[eta ** 2 - eta ** 3, eta - eta ** 4],
                  [eta - eta ** 4, eta ** 3 - eta ** 2]]) / np.sqrt(5)
    # the constant terms are eta**0
    q = np.array([[eta - eta ** 2, eta ** 2 - 1],
                  [1 - eta ** 3, eta ** 4 - eta ** 3]]) / np.sqrt(5)
    return p, q


def _sl2f5():
    p, q = sl2f5_generators()
    words = []
    for w in SL2F5_WORDS:
        x = np.eye(2, dtype=complex)
        for c in w:
            x = x @ (p if c == "P" else q)
        words.append(x)
    pq = p @ q
    elems, acc = [], np.eye(2, dtype=complex)
    for _ in range(10):
        elems.extend(acc @ x for x in words)
        acc = acc @ pq
    return SquareConstellation(np.array(elems))


NUMERICAL_121_A = np.array([[-0.9049 + 0.3265j, 0.1635 + 0.2188j],
                            [0.0364 + 0.2707j, -0.8748 + 0.4002j]])
NUMERICAL_121_B = np.array([[-0.1596 + 0.9767j, -0.1038 + 0.0994j],
                            [0.0833 - 0.1171j, -0.9432 + 0.2995j]])


def g21_4_generators():
    eta = np.exp(2j * np.pi / 21)
    a = np.diag([eta, eta ** 4, eta ** 16])
    b = np.array([[0, 1, 0], [0, 0, 1], [eta ** 7, 0, 0]])
    return a, b


def _from_spec(spec):
    return expand(spec), spec


def catalog(name):
    """Concrete constellations printed in the literature this package reproduces."""
    pi = np.pi
    if name == "orthogonal_design_121":
        return CatalogEntry(name, _orthogonal_design(), None, 0.1992, 0.1992, 5e-4)
    if name == "sl2f5_120":
        exact = 0.5 * np.sqrt((3 - np.sqrt(5)) / 2)
        return CatalogEntry(name, _sl2f5(), None, exact, exact, 1e-4)
    if name == "numerical_121":
        spec = StructureSpec.product2(polar_unitary(NUMERICAL_121_A),
                                      polar_unitary(NUMERICAL_121_B), 10, 10)
        return CatalogEntry(name, *_from_spec(spec), 0.0278, 0.3886, 1e-3,
                            note="generators printed to 4 decimals; projected to unitary")
    if name == "geometric_120":
        spec = StructureSpec.geometric2(17 * pi / 60, 13 * pi / 60, 22 * pi / 60, 120)
        return CatalogEntry(name, *_from_spec(spec), 0.1464, 0.4156, 5e-4)
    if name == "weakgroup_120_best_ds":
        spec = StructureSpec.geometric2(pi / 10, pi / 6, 5 * pi / 4, 120)
        return CatalogEntry(name, *_from_spec(spec), None, 0.4156, 5e-5)
    if name == "weakgroup_120_best_dp":
        spec = StructureSpec.geometric2(pi / 30, 11 * pi / 30, pi / 4, 120)
        return CatalogEntry(name, *_from_spec(spec), 0.3090, 0.3090, 5e-5)
    if name == "g21_4":
        spec = StructureSpec.product2(*g21_4_generators(), 20, 2)
        return CatalogEntry(name, *_from_spec(spec), 0.3851, None, 1e-4)
    raise ValueError(f"unknown catalog entry {name!r}; choose from {', '.join(CATALOG_NAMES)}")


CATALOG_NAMES = ("orthogonal_design_121", "sl2f5_120", "numerical_121", "geometric_120",
                 "weakgroup_120_best_ds", "weakgroup_120_best_dp", "g21_4")


# Published weak-group rows whose angles are multiples of π: (L, x/π, y/π, z/π, value).
DP_TABLE = (
    (2, 1, 1, 0, 1.0),
    (3, 2 / 3, 2 / 3, 0, np.sqrt(3) / 2),
    (5, 2 / 5, 8 / 5, 4 / 5, np.sqrt(5 / 8)),
    (16, 1 / 4, 5 / 4, 13 / 8, 2 ** 0.25 / 2),
    (37, 2 / 37, 6 / 37, 12 / 37, 0.4461),
    (120, 1 / 30, 11 / 30, 1 / 4, 0.3090),
)
DS_TABLE = (
    (9, 10 / 9, 4 / 3, 4 / 9, 0.75),
    (16, 1 / 4, 5 / 4, 13 / 8, np.sqrt(2) / 2),
    (60, 1 / 15, 4 / 15, 3 / 10, 0.5000),
    (120, 1 / 10, 1 / 6, 5 / 4, 0.4156),
)

# DP spectrum of the weak-group code (π/30, 11π/30, π/4), L = 120.
WEAK_GROUP_120_DP_SPECTRUM = (
    (0.3090, 360), (0.3136, 480), (0.3895, 480), (0.3931, 1440), (0.4402, 240),
    (0.5000, 120), (0.5878, 120), (0.6360, 1440), (0.6787, 480), (0.7071, 600),
    (0.8090, 360), (0.8430, 480), (0.8660, 120), (0.8979, 240), (0.9511, 120),
    (1.0, 60),
)
SL2F5_SPECTRUM = (
    (0.3090, 720), (0.5000, 1200), (0.5878, 720), (0.7071, 1800), (0.8090, 720),
    (0.8660, 1200), (0.9511, 720), (1.0, 60),
)
