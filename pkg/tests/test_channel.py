import numpy as np
import pytest
from statsmodels.stats.proportion import proportion_confint

from ustm.channel import (ChannelConfig, decoder_benchmark, ml_exhaustive_decode,
                          pairwise_error_empirical, simulate_differential, wilson_interval)
from ustm.metrics import SnrPoint, SquareConstellation, chernoff_pep, exact_pep
from ustm.param import haar_unitary
from ustm.structures import StructureSpec, catalog, expand


def lifted(psi):
    return np.sqrt(0.5) * np.vstack([np.eye(psi.shape[0]), psi])


@pytest.mark.parametrize("k,n", [(0, 10), (3, 10), (50, 100), (999, 1000), (1, 200000)])
def test_wilson_matches_statsmodels(k, n):
    lo, hi = wilson_interval(k, n)
    ref = proportion_confint(k, n, alpha=0.05, method="wilson")
    assert lo == pytest.approx(ref[0], abs=1e-12)
    assert hi == pytest.approx(ref[1], abs=1e-12)


def test_config_validation():
    with pytest.raises(ValueError):
        ChannelConfig(2, 0, 10, 10, 10)
    with pytest.raises(ValueError):
        ChannelConfig(2, 1, float("nan"), 10, 10)


def test_exhaustive_decoder_noiseless():
    v = catalog("sl2f5_120").constellation
    rng = np.random.default_rng(0)
    y0 = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    assert int(ml_exhaustive_decode(v.elements, y0, v.elements[77] @ y0)) == 77


def test_seed_determinism_and_thread_independence():
    sq = catalog("weakgroup_120_best_dp").constellation
    cfg = ChannelConfig(2, 2, 8, 20, 150, seed=4)
    a = simulate_differential(sq, cfg)
    b = simulate_differential(sq, cfg, threads=3)
    assert a == b
    assert a.blocks_total == 3000 and a.bler == a.block_errors / 3000
    assert 0 <= a.lo <= a.bler <= a.hi <= 1


def test_fast_and_exhaustive_give_identical_results():
    sq = catalog("weakgroup_120_best_dp").constellation
    cfg = ChannelConfig(2, 2, 6, 30, 100, seed=5)
    a = simulate_differential(sq, cfg, "ml_exhaustive")
    b = simulate_differential(sq, cfg, "fast")
    assert a.block_errors == b.block_errors


def test_chance_level_at_minus_40_db():
    sq = catalog("orthogonal_design_121").constellation
    r = simulate_differential(sq, ChannelConfig(2, 1, -40, 50, 100, seed=1))
    assert r.lo <= 1 - 1 / 121 <= r.hi


def test_high_snr_antipodal():
    sq = expand(StructureSpec.geometric2(np.pi, np.pi, 0.0, 2))
    r = simulate_differential(sq, ChannelConfig(2, 1, 60, 100, 100, seed=2))
    assert r.bler < 1e-3


def test_unitarity_drift_over_long_frames():
    sq = catalog("sl2f5_120").constellation
    r = simulate_differential(sq, ChannelConfig(2, 1, 10, 10_000, 2, seed=3))
    assert r.max_drift < 1e-8


def test_simulate_rejections():
    sq = catalog("sl2f5_120").constellation
    with pytest.raises(ValueError):
        simulate_differential(sq, ChannelConfig(3, 1, 10, 10, 10))
    with pytest.raises(ValueError, match="structure"):
        simulate_differential(sq, ChannelConfig(2, 1, 10, 10, 10), "fast")
    with pytest.raises(ValueError):
        simulate_differential(sq, ChannelConfig(2, 1, 10, 10, 10), "viterbi")


def test_csv_row():
    sq = SquareConstellation(np.array([np.eye(2), -np.eye(2)]))
    r = simulate_differential(sq, ChannelConfig(2, 1, 0, 5, 2, seed=9))
    assert r.csv_row() == [0, "ml_exhaustive", 10, r.block_errors, r.bler, r.lo, r.hi, 9]


def test_pairwise_identical_is_half():
    a = lifted(haar_unitary(2, np.random.default_rng(4)))
    p = pairwise_error_empirical(a, a, 1, 10.0, 10_000, seed=1)
    lo, hi = wilson_interval(round(p * 10_000), 10_000)
    assert lo <= 0.5 <= hi


def test_pairwise_matches_exact_integral():
    rng = np.random.default_rng(5)
    a, b = lifted(haar_unitary(2, rng)), lifted(haar_unitary(2, rng))
    snr = SnrPoint.from_db(6)
    n = 200_000
    p = pairwise_error_empirical(a, b, 2, snr, n, seed=2)
    # 99.9% interval keeps the false-alarm rate of this unit check low
    lo, hi = wilson_interval(round(p * n), n, z=3.2905267314919255)
    assert lo <= exact_pep(a, b, 2, snr) <= hi
    assert p <= chernoff_pep(a, b, 2, snr) + (hi - lo)


def test_pairwise_rejections():
    a = lifted(np.eye(2))
    with pytest.raises(ValueError):
        pairwise_error_empirical(a, a[:3], 1, 1.0, 10)
    with pytest.raises(ValueError):
        pairwise_error_empirical(a, a, 1, 1.0, 0)


def test_decoder_benchmark():
    b = decoder_benchmark(catalog("g21_4").constellation, 2, 6, 300, seed=1)
    assert b.agreement == 1.0 and b.mismatches == 0
    assert b.fast_products_per_block == 3
    assert b.exhaustive_products_per_block == 63
