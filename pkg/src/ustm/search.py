"""Design-space search over structured constellations.

Two strategies are provided:

* :func:`grid_search_geometric` scans the angle family ``A^k B^k`` with
  ``A = diag(e^{ix}, e^{iy})`` and ``B`` a rotation by ``z``, either over
  multiples of ``2π/L`` or over a uniform step grid.
* :func:`simulated_annealing` walks over generator matrices, proposing
  ``G -> G · cayley(S)`` with a random skew-Hermitian ``S`` whose scale
  shrinks with the temperature, and accepting by the Metropolis rule.
"""

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import tolerances
from .metrics import SnrPoint, as_snr, chernoff_terms, diversity_function, \
    pair_distances
from .param import haar_unitary, perturb, rng_from
from .structures import REDUCED_KINDS, StructureSpec, expand, reduced_diversity, \
    representative_gaps

OBJECTIVES = ("maximize_dp", "maximize_ds", "minimize_divfn")


@dataclass(frozen=True)
class Objective:
    kind: str
    snr: Optional[SnrPoint] = None
    n_rx: Optional[int] = None

    def __post_init__(self):
        if self.kind not in OBJECTIVES:
            raise ValueError(f"unknown objective {self.kind!r}")
        if self.kind == "minimize_divfn":
            if self.snr is None or self.n_rx is None:
                raise ValueError("minimize_divfn needs snr and n_rx")
            object.__setattr__(self, "snr", as_snr(self.snr))

    @classmethod
    def parse(cls, name, snr_db=None, n_rx=None):
        """Build from short names ``dp``, ``ds``, ``divfn``."""
        kind = {"dp": "maximize_dp", "ds": "maximize_ds", "divfn": "minimize_divfn"}.get(
            name, name)
        snr = None if snr_db is None else SnrPoint.from_db(snr_db)
        return cls(kind, snr, n_rx)

    @property
    def maximize(self):
        return self.kind != "minimize_divfn"

    def evaluate(self, spec):
        """Objective value of a structure, via the reduced representative set
        where the family has one."""
        if spec.kind in REDUCED_KINDS:
            if self.kind == "minimize_divfn":
                T = spec.generators[1].shape[0] if spec.kind == "general_form" else 2 * spec.M
                rho_t = self.snr.tilde(T, spec.M)
                return float(np.max(chernoff_terms(representative_gaps(spec), rho_t,
                                                   self.n_rx)))
            r = reduced_diversity(spec)
            return r.dp if self.kind == "maximize_dp" else r.ds
        return self.evaluate_constellation(expand(spec))

    def evaluate_constellation(self, v):
        if self.kind == "minimize_divfn":
            return diversity_function(v, self.n_rx, self.snr)
        _, _, dp, ds = pair_distances(v)
        return float(np.min(dp if self.kind == "maximize_dp" else ds))


@dataclass(frozen=True)
class SaConfig:
    max_iters: int = 20000
    epoch_len: int = 200
    t0: float = 0.05
    alpha: float = 0.97
    sigma0: float = 0.3
    sigma_floor: float = 1e-4
    stall_epochs: int = 50
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.sigma_floor <= 0:
            raise ValueError("sigma_floor must be positive")
        if self.sigma0 < 0 or self.t0 <= 0:
            raise ValueError("sigma0 must be >= 0 and t0 > 0")
        if self.max_iters < 1 or self.epoch_len < 1 or self.stall_epochs < 1:
            raise ValueError("iteration counts must be >= 1")


@dataclass
class SearchResult:
    spec: StructureSpec
    constellation: object
    value: float
    objective: Objective
    trace: list = field(default_factory=list)
    seed: Optional[int] = None
    wall_clock: float = 0.0
    evaluations: int = 0
    config: Optional[dict] = None


# -- grid search -------------------------------------------------------------

def _geometric_scores(x, ys, zs, L, objective):
    """Objective for fixed ``x`` over the grid ``ys x zs``; shape ``(ny, nz)``.

    Closed form of the weak-group representatives ``I - A^k B^k``:
    ``det = (1 - e^{ikx}c)(1 - e^{iky}c) + e^{ik(x+y)} s²`` and
    ``‖·‖_F² = 4 - 2c(cos kx + cos ky)`` with ``c, s = cos kz, sin kz``.
    """
    k = np.arange(1, L, dtype=float)
    ex = np.exp(1j * k * x)[None, None, :]
    ey = np.exp(1j * np.multiply.outer(ys, k))[:, None, :]
    c = np.cos(np.multiply.outer(zs, k))[None, :, :]
    s2 = 1.0 - c * c
    det = (1 - ex * c) * (1 - ey * c) + ex * ey * s2
    fro2 = np.maximum(4.0 - 2.0 * c * (ex.real + ey.real), 0.0)
    if objective.kind == "maximize_dp":
        return 0.5 * np.sqrt(np.abs(det)).min(axis=-1)
    if objective.kind == "maximize_ds":
        return np.minimum(np.sqrt(fro2).min(axis=-1) / (2 * np.sqrt(2)), 1.0)
    # singular values of the 2x2 difference from trace and determinant
    adet = np.abs(det)
    disc = np.sqrt(np.maximum(fro2 * fro2 - 4 * adet * adet, 0.0))
    g1 = (fro2 + disc) / 8.0
    g2 = np.where(fro2 + disc > 0, adet * adet / (2 * np.maximum(fro2 + disc, 1e-300)), 0.0)
    rho_t = objective.snr.tilde(4, 2)
    terms = 0.5 * ((1 + rho_t * g1) * (1 + rho_t * g2)) ** (-float(objective.n_rx))
    return terms.max(axis=-1)


def grid_search_geometric(L, objective, mode="multiples", step=None):
    """Exhaustive scan of ``(x, y, z)`` for the 2-D angle family.

    ``mode="multiples"`` uses ``{2πj/L}``; ``mode="step"`` a uniform grid of
    spacing ``step`` on ``[0, 2π)``.  Ties within ``tolerances.grid_tie`` go
    to the lexicographically smallest ``(x, y, z)``.
    """
    if L < 2:
        raise ValueError("L must be >= 2")
    if mode == "multiples":
        grid = 2 * np.pi * np.arange(L) / L
    elif mode == "step":
        if step is None or step <= 0:
            raise ValueError("mode='step' needs step > 0")
        grid = np.arange(0.0, 2 * np.pi, step)
    else:
        raise ValueError(f"unknown grid mode {mode!r}")
    start = time.perf_counter()
    sign = 1.0 if objective.maximize else -1.0
    scores = np.empty((len(grid), len(grid), len(grid)))
    for a, x in enumerate(grid):
        scores[a] = sign * _geometric_scores(x, grid, grid, L, objective)
    best = scores.max()
    flat = int(np.flatnonzero(scores.ravel() >= best - tolerances.get().grid_tie)[0])
    ia, ib, ic = np.unravel_index(flat, scores.shape)
    spec = StructureSpec.geometric2(grid[ia], grid[ib], grid[ic], L)
    return SearchResult(
        spec=spec, constellation=expand(spec), value=objective.evaluate(spec),
        objective=objective, trace=[(scores.size, float(sign * best))],
        wall_clock=time.perf_counter() - start, evaluations=scores.size,
        config={"mode": mode, "step": step, "grid_points": len(grid)},
    )


# -- simulated annealing -----------------------------------------------------

def _random_spec(m, kind, sizes, rng):
    if kind == "cyclic":
        return StructureSpec.cyclic(haar_unitary(m, rng), *sizes)
    if kind in ("weak_group", "geometric2", "geometric3"):
        return StructureSpec.weak_group(haar_unitary(m, rng), haar_unitary(m, rng), *sizes)
    if kind == "product2":
        return StructureSpec.product2(haar_unitary(m, rng), haar_unitary(m, rng), *sizes)
    if kind == "product3":
        return StructureSpec.product3(*(haar_unitary(m, rng) for _ in range(3)), *sizes)
    if kind == "general_form":
        return StructureSpec.general_form(haar_unitary(2 * m, rng), sizes[0], m)
    raise ValueError(f"unknown structure kind {kind!r}")


def _as_search_spec(spec):
    # angle families are searched as unconstrained weak groups
    if spec.kind in ("geometric2", "geometric3"):
        return StructureSpec.weak_group(*spec.generators, spec.L)
    return spec


def _propose(spec, sigma, rng):
    gens = list(spec.generators)
    n_free = 1 if spec.kind == "general_form" else len(gens)
    for i in range(n_free):
        gens[i] = perturb(gens[i], sigma, rng)
    return StructureSpec._trusted(spec.kind, gens, spec.sizes)


def simulated_annealing(m, structure_kind, sizes, objective, cfg=SaConfig(), init=None):
    """Anneal the generators of a structured constellation.

    Every generator is perturbed at each step with scale
    ``σ = max(sigma0 · T/t0, sigma_floor)`` (``σ = 0`` when ``sigma0 = 0``).
    Worse proposals are accepted with probability ``exp(-|Δ|/T)``; the
    temperature is multiplied by ``alpha`` after every ``epoch_len``
    iterations.  The run stops after ``max_iters`` iterations or
    ``stall_epochs`` epochs without a new best, and always returns the best
    structure seen.
    """
    sizes = tuple(sizes)
    rng = rng_from(cfg.seed)
    start = time.perf_counter()
    if init is None:
        current = _random_spec(m, structure_kind, sizes, rng)
    else:
        current = _as_search_spec(init)
        if current.M != m:
            raise ValueError(f"init has M={current.M}, expected {m}")
    sign = 1.0 if objective.maximize else -1.0
    cur_score = sign * objective.evaluate(current)
    best, best_score = current, cur_score
    trace = [(0, sign * best_score)]
    temp = cfg.t0
    stall = 0
    it = 0
    tie = tolerances.get().tie
    while it < cfg.max_iters:
        improved = False
        sigma = 0.0 if cfg.sigma0 == 0 else max(cfg.sigma0 * temp / cfg.t0, cfg.sigma_floor)
        for _ in range(min(cfg.epoch_len, cfg.max_iters - it)):
            it += 1
            cand = _propose(current, sigma, rng)
            score = sign * objective.evaluate(cand)
            delta = score - cur_score
            if delta >= -tie or rng.random() < math.exp(delta / temp):
                current, cur_score = cand, score
                if cur_score > best_score:
                    best, best_score = current, cur_score
                    improved = True
        trace.append((it, sign * best_score))
        stall = 0 if improved else stall + 1
        if stall >= cfg.stall_epochs:
            break
        temp *= cfg.alpha
    return SearchResult(
        spec=best, constellation=expand(best), value=sign * best_score,
        objective=objective, trace=trace, seed=cfg.seed,
        wall_clock=time.perf_counter() - start, evaluations=it + 1, config=asdict(cfg),
    )


def optimize_at_snr(m, structure_kind, sizes, snr_db, n_rx, cfg=SaConfig(), init=None):
    """Anneal to minimize the diversity function at ``snr_db``."""
    objective = Objective("minimize_divfn", SnrPoint.from_db(snr_db), n_rx)
    return simulated_annealing(m, structure_kind, sizes, objective, cfg, init)
