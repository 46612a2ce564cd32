"""Block error rate of differential transmission over Rayleigh fading."""
from ustm.channel import ChannelConfig, simulate_differential
from ustm.structures import catalog

names = ("orthogonal_design_121", "numerical_121", "sl2f5_120", "weakgroup_120_best_dp")
print("SNR(dB) " + " ".join(f"{n:>22s}" for n in names))
for db in (5, 10, 15):
    cells = []
    for n in names:
        cfg = ChannelConfig(m_tx=2, n_rx=2, snr_db=db, frame_blocks=100, trials=200, seed=1)
        r = simulate_differential(catalog(n).constellation, cfg)
        cells.append(f"{r.bler:10.4f} [{r.lo:.3f},{r.hi:.3f}]")
    print(f"{db:7d} " + " ".join(cells))
