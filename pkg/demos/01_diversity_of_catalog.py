"""Diversity product and sum of the built-in constellations."""
import numpy as np

from ustm.metrics import distance_spectrum
from ustm.structures import CATALOG_NAMES, catalog

# every catalog entry is a set of unitary matrices used differentially
for name in CATALOG_NAMES:
    entry = catalog(name)
    rep = distance_spectrum(entry.constellation)
    print(f"{name:24s} L={entry.constellation.L:4d}  DP={rep.dp:.4f}  DS={rep.ds:.4f}")

# the pair distances of SL2(F5) take only eight values
rep = distance_spectrum(catalog("sl2f5_120").constellation)
for d, n in rep.spectrum_dp:
    print(f"  distance {d:.4f}  pairs {n}")
print("pairs in total:", sum(n for _, n in rep.spectrum_dp))
