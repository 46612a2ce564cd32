"""Plain-text constellation files (UCON).

Layout::

    UCON 1
    T M L
    <L blocks of T lines, each with 2M fields "re im re im ...">

Lines starting with ``#`` are comments.  Numbers are written with 17
significant digits, which round-trips IEEE doubles exactly, so
write -> read -> write is byte-identical.

Square (differential) constellations are stored as their ``M x M``
unitaries, i.e. with ``T = M``; reading such a file gives a
:class:`SquareConstellation`.  A ``T = 2M`` file whose frames all have the
lifted form ``(√2/2)[I; Ψ]`` is also recognized by :func:`to_square`.
"""

import numpy as np

from .metrics import Constellation, ConstellationError, SquareConstellation

MAGIC = "UCON 1"


class UconFormatError(ValueError):
    """Malformed UCON text (bad header, field count or number)."""


def _fmt(x):
    return f"{x:.16e}"


def format_ucon(v, comments=()):
    """Serialize a constellation to UCON text."""
    e = np.asarray(v.elements, dtype=complex)
    L, T, M = e.shape
    lines = [MAGIC]
    lines.extend(f"# {c}" for c in comments)
    lines.append(f"{T} {M} {L}")
    for k in range(L):
        for t in range(T):
            row = e[k, t]
            lines.append(" ".join(f"{_fmt(z.real)} {_fmt(z.imag)}" for z in row))
    return "\n".join(lines) + "\n"


def write_ucon(path, v, comments=()):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_ucon(v, comments))


def parse_ucon(text):
    """Parse UCON text; ``T = M`` files give a :class:`SquareConstellation`."""
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or lines[0] != MAGIC:
        raise UconFormatError(f"first line must be {MAGIC!r}")
    if len(lines) < 2:
        raise UconFormatError("missing 'T M L' header")
    try:
        T, M, L = (int(f) for f in lines[1].split())
    except ValueError:
        raise UconFormatError(f"bad header line {lines[1]!r}") from None
    if min(T, M, L) < 1 or M > T:
        raise UconFormatError(f"invalid dimensions T={T} M={M} L={L}")
    body = lines[2:]
    if len(body) != L * T:
        raise UconFormatError(f"expected {L * T} data lines, found {len(body)}")
    data = np.empty((L * T, 2 * M))
    for n, ln in enumerate(body):
        fields = ln.split()
        if len(fields) != 2 * M:
            raise UconFormatError(f"data line {n + 1}: expected {2 * M} fields, "
                                  f"found {len(fields)}")
        try:
            data[n] = [float(f) for f in fields]
        except ValueError:
            raise UconFormatError(f"data line {n + 1}: non-numeric field") from None
    # assign parts separately; re + 1j*im would turn -0.0 into 0.0
    elems = np.empty((L * T, M), dtype=complex)
    elems.real = data[:, 0::2]
    elems.imag = data[:, 1::2]
    elems = elems.reshape(L, T, M)
    if T == M:
        return SquareConstellation(elems)
    return Constellation(elems)


def read_ucon(path):
    with open(path, encoding="ascii") as fh:
        return parse_ucon(fh.read())


def to_square(v, tol=1e-12):
    """Square form of a constellation, or ``None`` if it has none.

    Accepts a :class:`SquareConstellation` unchanged and converts lifted
    ``T = 2M`` frames ``(√2/2)[I; Ψ]`` back to ``Ψ``.
    """
    if isinstance(v, SquareConstellation):
        return v
    e = v.elements
    L, T, M = e.shape
    if T != 2 * M:
        return None
    top = e[:, :M, :]
    if np.max(np.abs(top - np.sqrt(0.5) * np.eye(M))) > tol:
        return None
    return SquareConstellation(np.sqrt(2.0) * e[:, M:, :])


__all__ = ["MAGIC", "UconFormatError", "ConstellationError", "format_ucon", "write_ucon",
           "parse_ucon", "read_ucon", "to_square"]
