"""Simulated annealing over generator matrices."""
from ustm.search import Objective, SaConfig, optimize_at_snr, simulated_annealing
from ustm.structures import catalog

# three-element weak group for two antennas, from a random start
r = simulated_annealing(2, "weak_group", (3,), Objective.parse("dp"), SaConfig(seed=1))
print(f"weak group L=3: DP={r.value:.4f} after {r.evaluations} evaluations, {r.wall_clock:.1f} s")
for it, best in r.trace[::20]:
    print(f"  iteration {it:6d}  best {best:.4f}")

# start from a known good design; the best value can only improve
init = catalog("g21_4").spec
r = simulated_annealing(3, "product2", (20, 2), Objective.parse("dp"),
                        SaConfig(max_iters=2000, seed=0), init)
print(f"g21_4 refined: DP {r.trace[0][1]:.6f} -> {r.value:.6f}")

# minimize the Chernoff-bound error at 10 dB instead
r = optimize_at_snr(2, "weak_group", (8,), 10.0, 2, SaConfig(max_iters=3000, seed=2))
print(f"weak group L=8 at 10 dB: worst pairwise bound {r.value:.3e}")
