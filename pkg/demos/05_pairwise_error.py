"""Chernoff bound, exact integral and Monte-Carlo for one pair."""
import numpy as np

from ustm.channel import pairwise_error_empirical, wilson_interval
from ustm.metrics import SnrPoint, chernoff_pep, exact_pep
from ustm.param import haar_unitary

rng = np.random.default_rng(0)
lift = lambda psi: np.sqrt(0.5) * np.vstack([np.eye(2), psi])
a, b = lift(haar_unitary(2, rng)), lift(haar_unitary(2, rng))

trials = 200_000
print(" SNR   Chernoff    exact     Monte-Carlo (95% interval)")
for db in (0, 3, 6, 9, 12):
    snr = SnrPoint.from_db(db)
    mc = pairwise_error_empirical(a, b, 2, snr, trials, seed=db)
    lo, hi = wilson_interval(round(mc * trials), trials)
    print(f"{db:4d}  {chernoff_pep(a, b, 2, snr):.3e}  {exact_pep(a, b, 2, snr):.3e}"
          f"  {mc:.3e} ({lo:.3e}, {hi:.3e})")
