"""Central numerical tolerances.

Every threshold used for validation or degeneracy detection lives here so
that a run can override them in one place (the CLI ``--tol`` flag does this).
"""

from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    unitary: float = 1e-8          # ‖U*U - I‖_F accepted as unitary
    frame: float = 1e-8            # ‖Φ*Φ - I‖_F accepted as a frame
    distinct: float = 1e-10        # two elements equal below this Frobenius distance
    eig_reconstruct: float = 1e-9
    cayley_cond: float = 1e12      # max condition number of I + Y
    one_minus_delta_sq: float = 1e-15
    quad_abs: float = 1e-10
    quad_max_depth: int = 12
    tie: float = 1e-14             # Metropolis treats |Δ| below this as a tie
    grid_tie: float = 1e-12


_current = Tolerances()


def get() -> Tolerances:
    return _current


def configure(**overrides) -> Tolerances:
    """Replace selected tolerances process-wide and return the new record."""
    global _current
    known = {f.name for f in fields(Tolerances)}
    bad = set(overrides) - known
    if bad:
        raise ValueError(f"unknown tolerance(s): {', '.join(sorted(bad))}")
    _current = replace(_current, **overrides)
    return _current


def reset() -> Tolerances:
    global _current
    _current = Tolerances()
    return _current
