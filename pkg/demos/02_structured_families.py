"""Weak-group and product structures, and why the reduced evaluation is cheap."""
import time

import numpy as np

from ustm.metrics import diversity_product
from ustm.structures import StructureSpec, catalog, expand, reduced_diversity

# A = diag(e^{ix}, e^{iy}), B = rotation by z, elements A^k B^k
spec = StructureSpec.geometric2(np.pi / 30, 11 * np.pi / 30, np.pi / 4, 120)

t = time.perf_counter()
fast = reduced_diversity(spec)
t_fast = time.perf_counter() - t

t = time.perf_counter()
slow = diversity_product(expand(spec))[0]
t_slow = time.perf_counter() - t

print(f"reduced: DP={fast.dp:.6f} from {fast.evaluations} matrices in {t_fast * 1e3:.1f} ms")
print(f"all pairs: DP={slow:.6f} from {120 * 119 // 2} pairs in {t_slow * 1e3:.1f} ms")

# product structure A^k B^l with k = 0..20, l = 0..2 (63 elements)
g = catalog("g21_4").spec
print("g21_4 DP:", round(reduced_diversity(g).dp, 6), "with", g.L, "elements")
