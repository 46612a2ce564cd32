"""Monte-Carlo simulation of noncoherent Rayleigh flat fading.

Differential link: the channel ``H`` (``M x N``, CN(0, 1) entries) is held
fixed for a frame.  The transmitter starts from ``S_0 = I`` and sends
``S_τ = Ψ_{z_τ} S_{τ-1}``; the receiver sees ``Y_τ = √ρ S_τ H + W_τ`` and
decodes ``ẑ_τ = argmin_z ‖Y_τ - Ψ_z Y_{τ-1}‖_F`` without knowing ``H``.

Frames are simulated in fixed-size chunks, each with its own seed spawned
from the run seed, so results do not depend on the number of threads.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .fastdec import DecodeCounter, build_tables, fast_decode, fast_decode_batch
from .linalg import adjoint, frobenius_norm
from .metrics import ConstellationError, SnrPoint, as_snr
from .param import complex_normal

DECODERS = ("ml_exhaustive", "fast")
WILSON_Z = 1.959963984540054  # 97.5% standard normal quantile
CHUNK_FRAMES = 64
REORTHO_EVERY = 512


@dataclass(frozen=True)
class ChannelConfig:
    m_tx: int
    n_rx: int
    snr_db: float
    frame_blocks: int
    trials: int
    seed: int = 0

    def __post_init__(self):
        if min(self.m_tx, self.n_rx, self.frame_blocks, self.trials) < 1:
            raise ValueError("m_tx, n_rx, frame_blocks and trials must be >= 1")
        if not math.isfinite(self.snr_db):
            raise ValueError("snr_db must be finite")

    @property
    def rho(self):
        return SnrPoint.from_db(self.snr_db).rho


@dataclass(frozen=True)
class SimResult:
    block_errors: int
    blocks_total: int
    bler: float
    lo: float
    hi: float
    config: ChannelConfig
    decoder: str = "ml_exhaustive"
    max_drift: float = 0.0  # largest ‖S*S - I‖_F seen before re-orthogonalization

    def csv_row(self):
        """Values for the columns ``snr_db, decoder, blocks, errors, bler, lo, hi, seed``."""
        c = self.config
        return [c.snr_db, self.decoder, self.blocks_total, self.block_errors,
                self.bler, self.lo, self.hi, c.seed]


CSV_COLUMNS = ("snr_db", "decoder", "blocks", "errors", "bler", "lo", "hi", "seed")


def wilson_interval(errors, total, z=WILSON_Z):
    """Wilson score interval for a binomial proportion."""
    if total < 1:
        raise ValueError("total must be >= 1")
    p = errors / total
    denom = 1.0 + z * z / total
    centre = (p + z * z / (2 * total)) / denom
    half = z * math.sqrt(p * (1 - p) / total + z * z / (4 * total * total)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def ml_exhaustive_decode(elements, y_prev, y_curr, counter=None):
    """Index minimizing ``‖Y_curr - Ψ_z Y_prev‖_F``; ties go to the smallest index.

    Works on stacks: ``y_prev, y_curr`` of shape ``(..., M, N)`` give indices
    of shape ``(...)``.
    """
    y_prev = np.asarray(y_prev, dtype=complex)
    y_curr = np.asarray(y_curr, dtype=complex)
    pred = elements @ y_prev[..., None, :, :]
    resid = frobenius_norm(y_curr[..., None, :, :] - pred)
    if counter is not None:
        counter.decodes += 1
        counter.products += len(elements)
        counter.candidates += len(elements)
    return np.argmin(resid, axis=-1)


def _polar(s):
    w, _, vh = np.linalg.svd(s)
    return w @ vh


def _run_chunk(elements, tables, rho, n_rx, blocks, frames, seed_seq):
    rng = np.random.default_rng(seed_seq)
    L, M, _ = elements.shape
    amp = math.sqrt(rho)
    h = complex_normal(rng, (frames, M, n_rx))
    z = rng.integers(L, size=(frames, blocks))
    s = np.broadcast_to(np.eye(M, dtype=complex), (frames, M, M)).copy()
    y_prev = amp * h + complex_normal(rng, (frames, M, n_rx))
    errors, drift = 0, 0.0
    eye = np.eye(M)
    for tau in range(1, blocks + 1):
        s = elements[z[:, tau - 1]] @ s
        if tau % REORTHO_EVERY == 0:
            drift = max(drift, float(np.max(frobenius_norm(adjoint(s) @ s - eye))))
            s = _polar(s)
        y = amp * (s @ h) + complex_normal(rng, (frames, M, n_rx))
        if tables is None:
            zhat = ml_exhaustive_decode(elements, y_prev, y)
        else:
            zhat = fast_decode_batch(tables, y_prev, y)
        errors += int(np.count_nonzero(zhat != z[:, tau - 1]))
        y_prev = y
    drift = max(drift, float(np.max(frobenius_norm(adjoint(s) @ s - eye))))
    return errors, drift


def simulate_differential(sq, cfg, decoder="ml_exhaustive", threads=1):
    """Block error rate of differential transmission with ``sq``.

    Parameters
    ----------
    sq : SquareConstellation
        Must satisfy ``sq.M == cfg.m_tx``.  The ``fast`` decoder also needs
        ``sq.spec`` of a kind supported by :mod:`ustm.fastdec`.
    cfg : ChannelConfig
    decoder : {"ml_exhaustive", "fast"}
    threads : int
        Worker threads; the result does not depend on it.
    """
    if decoder not in DECODERS:
        raise ValueError(f"decoder must be one of {DECODERS}")
    if sq.M != cfg.m_tx:
        raise ConstellationError("shape", f"constellation has M={sq.M}, config m_tx={cfg.m_tx}")
    tables = None
    if decoder == "fast":
        if sq.spec is None:
            raise ValueError("fast decoder needs a constellation with a structure spec")
        tables = build_tables(sq.spec)
    elements = np.ascontiguousarray(sq.elements)
    n_chunks = -(-cfg.trials // CHUNK_FRAMES)
    seeds = np.random.SeedSequence(cfg.seed).spawn(n_chunks)
    sizes = [min(CHUNK_FRAMES, cfg.trials - i * CHUNK_FRAMES) for i in range(n_chunks)]

    def work(i):
        return _run_chunk(elements, tables, cfg.rho, cfg.n_rx, cfg.frame_blocks,
                          sizes[i], seeds[i])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, range(n_chunks)))
    else:
        parts = [work(i) for i in range(n_chunks)]
    errors = sum(p[0] for p in parts)
    total = cfg.trials * cfg.frame_blocks
    lo, hi = wilson_interval(errors, total)
    return SimResult(errors, total, errors / total, lo, hi, cfg, decoder,
                     max(p[1] for p in parts))


@dataclass(frozen=True)
class DecoderBench:
    blocks: int
    agreement: float
    fast_products_per_block: float
    fast_candidates_per_block: float
    exhaustive_products_per_block: float
    mismatches: int


def decoder_benchmark(sq, n_rx, snr_db, blocks, seed=0, radius=None):
    """Compare :func:`fastdec.fast_decode` with exhaustive ML block by block.

    Each block pair uses a fresh channel, a random reference ``S`` drawn from
    the constellation and a random data index.
    """
    if sq.spec is None:
        raise ValueError("decoder benchmark needs a constellation with a structure spec")
    tables = build_tables(sq.spec)
    rng = np.random.default_rng(seed)
    amp = math.sqrt(SnrPoint.from_db(snr_db).rho)
    e = sq.elements
    L, M, _ = e.shape
    fast_cnt, ml_cnt = DecodeCounter(), DecodeCounter()
    mismatches = 0
    for _ in range(blocks):
        h = complex_normal(rng, (M, n_rx))
        s = e[rng.integers(L)]
        z = rng.integers(L)
        y_prev = amp * (s @ h) + complex_normal(rng, (M, n_rx))
        y_curr = amp * (e[z] @ s @ h) + complex_normal(rng, (M, n_rx))
        zf = tables.index(*fast_decode(tables, y_prev, y_curr, radius, fast_cnt))
        zm = int(ml_exhaustive_decode(e, y_prev, y_curr, ml_cnt))
        mismatches += zf != zm
    return DecoderBench(blocks, 1.0 - mismatches / blocks, fast_cnt.products_per_decode(),
                        fast_cnt.candidates_per_decode(), ml_cnt.products_per_decode(),
                        mismatches)


def pairwise_error_empirical(phi_a, phi_b, n_rx, snr, trials, seed=0):
    """Empirical probability of deciding ``Φ_b`` when ``Φ_a`` is sent.

    One-shot noncoherent model ``R = √(ρT/M) Φ_a H + W`` with the ML rule
    ``argmax ‖R^* Φ‖_F`` over the two candidates; exact ties count as an
    error with probability ½.

    Parameters
    ----------
    phi_a, phi_b : ndarray, shape (T, M)
        Unitary frames.
    snr : SnrPoint or float
        Linear SNR ``ρ`` if a float.
    """
    phi_a = np.asarray(phi_a, dtype=complex)
    phi_b = np.asarray(phi_b, dtype=complex)
    if phi_a.shape != phi_b.shape or phi_a.ndim != 2:
        raise ValueError("frames must share a 2-D shape")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    T, M = phi_a.shape
    amp = math.sqrt(as_snr(snr).rho * T / M)
    rng = np.random.default_rng(seed)
    errors = 0.0
    done = 0
    while done < trials:
        n = min(100_000, trials - done)
        h = complex_normal(rng, (n, M, n_rx))
        r = amp * (phi_a @ h) + complex_normal(rng, (n, T, n_rx))
        ga = frobenius_norm(adjoint(r) @ phi_a)
        gb = frobenius_norm(adjoint(r) @ phi_b)
        ties = ga == gb
        errors += np.count_nonzero(gb > ga)
        if np.any(ties):
            errors += np.count_nonzero(rng.random(int(ties.sum())) < 0.5)
        done += n
    return errors / trials


__all__ = ["ChannelConfig", "SimResult", "CSV_COLUMNS", "DECODERS", "wilson_interval",
           "ml_exhaustive_decode", "simulate_differential", "pairwise_error_empirical",
           "DecoderBench", "decoder_benchmark"]
