"""Exhaustive scan of the two-dimensional angle family."""
import numpy as np

from ustm.search import Objective, grid_search_geometric

# angles restricted to multiples of 2π/L
for L, kind in ((9, "ds"), (16, "ds"), (16, "dp"), (37, "dp")):
    r = grid_search_geometric(L, Objective.parse(kind))
    x, y, z = (a / np.pi for a in r.spec.angles)
    print(f"L={L:3d} best {kind}={r.value:.4f} at (x, y, z)/π = ({x:.4f}, {y:.4f}, {z:.4f})"
          f"  [{r.evaluations} points, {r.wall_clock:.2f} s]")

# a uniform step grid instead
r = grid_search_geometric(4, Objective.parse("dp"), mode="step", step=0.1)
print(f"L=4 step 0.1: DP={r.value:.4f} at {tuple(round(float(a), 1) for a in r.spec.angles)}")
