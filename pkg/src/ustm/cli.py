"""Command-line interface: ``ustm <command> [options]``.

Commands
--------
gen        write a constellation (catalog entry or angle family) as UCON
eval       diversity product/sum and diversity-function samples of a UCON file
spectrum   DP and DS distance spectra
search     grid search over the angle family, or simulated annealing
simulate   differential Monte-Carlo BLER
decbench   fast decoder against exhaustive ML

Every run writes a ``key=value`` manifest (to ``--manifest``, to
``<out>.manifest`` when ``--out`` is set, otherwise to stderr).

Exit codes: 0 success, 2 usage, 3 validation, 4 numerical failure.
"""

import argparse
import csv
import hashlib
import io
import json
import math
import os
import re
import sys
from datetime import datetime, timezone
from importlib import metadata

import numpy as np

from . import tolerances
from .channel import CSV_COLUMNS, ChannelConfig, decoder_benchmark, simulate_differential
from .fastdec import default_radius
from .metrics import (ConstellationError, QuadratureError, SnrPoint, distance_spectrum,
                      diversity_function, exact_diversity_function, pair_distances)
from .search import Objective, SaConfig, grid_search_geometric, simulated_annealing
from .structures import CATALOG_NAMES, StructureSpec, catalog, expand
from .ucon import UconFormatError, format_ucon, read_ucon, to_square

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3, 4

_ANGLE = re.compile(r"^([+-]?)(\d*\.?\d*)\s*\*?\s*pi(?:\s*/\s*(\d+\.?\d*))?$")


class UsageError(Exception):
    pass


def parse_angle(text):
    """Radians from ``"0.5"``, ``"pi"``, ``"-pi/4"``, ``"11pi/30"`` or ``"2*pi/37"``."""
    s = text.strip().lower()
    m = _ANGLE.match(s)
    if m:
        sign, num, den = m.groups()
        val = (float(num) if num not in ("", ".") else 1.0) * math.pi
        if den is not None:
            if float(den) == 0:
                raise argparse.ArgumentTypeError(f"zero denominator in angle {text!r}")
            val /= float(den)
        return -val if sign == "-" else val
    try:
        val = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse angle {text!r}") from None
    if not math.isfinite(val):
        raise argparse.ArgumentTypeError(f"angle must be finite, got {text!r}")
    return val


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return f"{x:.10g}"
    return str(x)


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


class Run:
    """Collects inputs/outputs of one command for the manifest."""

    def __init__(self, args):
        self.args = args
        self.inputs, self.outputs = [], []
        self.started = datetime.now(timezone.utc).isoformat()
        # human-readable report goes to stderr when stdout carries data
        self.info = sys.stdout

    def write(self, path, text):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        self.outputs.append(path)

    def emit(self, text):
        """Write the main product to ``--out`` or stdout."""
        if self.args.out:
            self.write(self.args.out, text)
        else:
            self.info = sys.stderr
            sys.stdout.write(text)

    def manifest(self, code):
        try:
            version = metadata.version("artifact")
        except metadata.PackageNotFoundError:
            version = "unknown"
        echo = {k: v for k, v in vars(self.args).items() if k != "func"}
        lines = [f"command={self.args.command}",
                 f"args={json.dumps(echo, sort_keys=True, default=str)}",
                 f"seed={self.args.seed}", f"version={version}",
                 f"started={self.started}",
                 f"finished={datetime.now(timezone.utc).isoformat()}",
                 f"exit_code={code}"]
        lines += [f"input.{p}={_sha256(p) if os.path.isfile(p) else 'missing'}"
                  for p in self.inputs]
        lines += [f"output.{p}={_sha256(p)}" for p in self.outputs]
        text = "\n".join(lines) + "\n"
        path = self.args.manifest or (self.args.out + ".manifest" if self.args.out else None)
        if path:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        else:
            sys.stderr.write(text)


def _say(run, msg):
    print(msg, file=run.info)


def _need_seed(args):
    if args.seed is None:
        raise UsageError(f"{args.command} is stochastic and requires --seed")


def _load(run, path):
    run.inputs.append(path)
    v = read_ucon(path)
    sq = to_square(v)
    return sq if sq is not None else v


def _angle_spec(args):
    missing = [f"--{k}" for k in ("L", "x", "y", "z") if getattr(args, k) is None]
    if missing:
        raise UsageError(f"angle family needs {' '.join(missing)}")
    if args.L < 2:
        raise UsageError("--L must be >= 2")
    return StructureSpec.geometric2(args.x, args.y, args.z, args.L)


def _constellation_from_args(args):
    """Catalog entry or angle family named on the command line."""
    if args.catalog:
        return catalog(args.catalog).constellation
    if args.geometric2 or args.weak_group:
        return expand(_angle_spec(args))
    return None


# -- commands ----------------------------------------------------------------

def cmd_gen(args, run):
    v = _constellation_from_args(args)
    if v is None:
        raise UsageError("gen needs --catalog, --geometric2 or --weak-group")
    comment = [f"generated by ustm gen ({args.catalog or 'angle family'})"]
    run.emit(format_ucon(v, comment))
    T = v.elements.shape[1]
    _say(run, f"L={v.L} T={T} M={v.M} rate={math.log2(v.L) / T:.10g}")
    return EXIT_OK


def cmd_eval(args, run):
    v = _load(run, args.path)
    v.validate()
    i, j, dp, ds = pair_distances(v)
    kdp, kds = int(np.argmin(dp)), int(np.argmin(ds))
    rows = [("dp", float(dp[kdp]), int(i[kdp]), int(j[kdp])),
            ("ds", float(ds[kds]), int(i[kds]), int(j[kds]))]
    for db in args.snr_db or ():
        snr = SnrPoint.from_db(db)
        rows.append((f"divfn@{_fmt(float(db))}dB", diversity_function(v, args.n_rx, snr), "", ""))
        if args.exact:
            rows.append((f"exact_divfn@{_fmt(float(db))}dB",
                         exact_diversity_function(v, args.n_rx, snr), "", ""))
    run.emit(_csv_text(("metric", "value", "i", "j"), rows))
    _say(run, f"DP={_fmt(rows[0][1])} at ({rows[0][2]}, {rows[0][3]})  "
              f"DS={_fmt(rows[1][1])} at ({rows[1][2]}, {rows[1][3]})")
    return EXIT_OK


def cmd_spectrum(args, run):
    v = _load(run, args.path)
    rep = distance_spectrum(v)
    rows = [("dp", d, n) for d, n in rep.spectrum_dp]
    rows += [("ds", d, n) for d, n in rep.spectrum_ds]
    run.emit(_csv_text(("kind", "distance", "multiplicity"), rows))
    _say(run, f"pairs={rep.pair_count} DP={_fmt(rep.dp)} DS={_fmt(rep.ds)}")
    return EXIT_OK


def cmd_search(args, run):
    if args.objective == "divfn" and args.snr_db is None:
        raise UsageError("--objective divfn needs --snr-db")
    objective = Objective.parse(args.objective, args.snr_db, args.n_rx)
    if args.grid:
        if args.L is None or args.L < 2:
            raise UsageError("grid search needs --L >= 2")
        if args.step is not None:
            if args.step <= 0 or args.step > 2 * math.pi:
                raise UsageError("--step must lie in (0, 2π]")
            res = grid_search_geometric(args.L, objective, "step", args.step)
        elif args.multiples:
            res = grid_search_geometric(args.L, objective, "multiples")
        else:
            raise UsageError("--grid needs --multiples or --step")
    elif args.sa:
        _need_seed(args)
        if args.iters < 1:
            raise UsageError("--iters must be >= 1")
        if not args.sizes:
            raise UsageError("--sa needs --sizes")
        init = catalog(args.init_catalog).spec if args.init_catalog else None
        cfg = SaConfig(max_iters=args.iters, seed=args.seed)
        res = simulated_annealing(args.m, args.kind, args.sizes, objective, cfg, init)
    else:
        raise UsageError("search needs --grid or --sa")
    run.emit(format_ucon(res.constellation, [f"search objective={objective.kind} "
                                             f"value={res.value:.17g}"]))
    if args.out:
        meta = {"objective": objective.kind, "value": f"{res.value:.17g}",
                "seed": res.seed, "kind": res.spec.kind, "sizes": list(res.spec.sizes),
                "angles": None if res.spec.angles is None else
                [f"{a:.17g}" for a in res.spec.angles],
                "evaluations": res.evaluations, "config": json.dumps(res.config, sort_keys=True)}
        run.write(args.out + ".meta", "".join(f"{k}={v}\n" for k, v in meta.items()))
    _say(run, f"{objective.kind} value={_fmt(res.value)} evaluations={res.evaluations}")
    return EXIT_OK


def cmd_simulate(args, run):
    _need_seed(args)
    v = _load(run, args.path) if args.path else _constellation_from_args(args)
    if v is None:
        raise UsageError("simulate needs a UCON path, --catalog or an angle family")
    sq = to_square(v)
    if sq is None:
        raise ConstellationError("shape", "differential simulation needs a square constellation")
    sq.validate()
    if args.decoder == "fast" and sq.spec is None:
        raise UsageError("--decoder fast needs a structured source (--catalog or angle family)")
    if min(args.frame_blocks, args.trials, args.n_rx) < 1:
        raise UsageError("--frame-blocks, --trials and --n-rx must be >= 1")
    rows = []
    for db in args.snr_db:
        cfg = ChannelConfig(sq.M, args.n_rx, db, args.frame_blocks, args.trials, args.seed)
        res = simulate_differential(sq, cfg, args.decoder, threads=args.threads)
        rows.append(res.csv_row())
        _say(run, f"snr={_fmt(float(db))} dB bler={_fmt(res.bler)} "
                  f"[{_fmt(res.lo)}, {_fmt(res.hi)}]")
    run.emit(_csv_text(CSV_COLUMNS, rows))
    return EXIT_OK


def cmd_decbench(args, run):
    _need_seed(args)
    v = _constellation_from_args(args) or catalog("weakgroup_120_best_dp").constellation
    if args.blocks < 1:
        raise UsageError("--blocks must be >= 1")
    radius = default_radius(v.M, args.n_rx, SnrPoint.from_db(args.snr_db).rho) \
        if args.radius else None
    b = decoder_benchmark(v, args.n_rx, args.snr_db, args.blocks, args.seed, radius)
    rows = [("fast", b.blocks, b.agreement, b.fast_products_per_block,
             b.fast_candidates_per_block),
            ("ml_exhaustive", b.blocks, 1.0, b.exhaustive_products_per_block,
             b.exhaustive_products_per_block)]
    run.emit(_csv_text(("decoder", "blocks", "agreement", "products_per_block",
                        "candidates_per_block"), rows))
    _say(run, f"agreement={_fmt(b.agreement)} mismatches={b.mismatches} "
              f"products/block fast={_fmt(b.fast_products_per_block)} "
              f"exhaustive={_fmt(b.exhaustive_products_per_block)}")
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def _add_source(p):
    p.add_argument("--catalog", choices=CATALOG_NAMES)
    p.add_argument("--geometric2", action="store_true",
                   help="A = diag(e^{ix}, e^{iy}), B = rotation(z), elements A^k B^k")
    p.add_argument("--weak-group", action="store_true", help="same family as --geometric2")
    p.add_argument("--L", type=int)
    p.add_argument("--x", type=parse_angle)
    p.add_argument("--y", type=parse_angle)
    p.add_argument("--z", type=parse_angle)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE",
                        help="override a tolerance, e.g. --tol unitary=1e-6")
    common.add_argument("--manifest", help="manifest path")

    parser = argparse.ArgumentParser(prog="ustm", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="write a constellation")
    _add_source(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("eval", parents=[common], help="diversity metrics of a UCON file")
    p.add_argument("path")
    p.add_argument("--snr-db", type=float, nargs="+")
    p.add_argument("--n-rx", type=int, default=1)
    p.add_argument("--exact", action="store_true", help="also the exact diversity function")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("spectrum", parents=[common], help="DP and DS distance spectra")
    p.add_argument("path")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("search", parents=[common], help="constellation search")
    p.add_argument("--grid", action="store_true")
    p.add_argument("--multiples", action="store_true", help="angles 2πj/L")
    p.add_argument("--step", type=float, help="uniform angle step on [0, 2π)")
    p.add_argument("--sa", action="store_true", help="simulated annealing")
    p.add_argument("--kind", default="weak_group",
                   choices=("cyclic", "weak_group", "product2", "product3", "general_form"))
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--sizes", type=int, nargs="+")
    p.add_argument("--iters", type=int, default=20000)
    p.add_argument("--init-catalog", choices=CATALOG_NAMES)
    p.add_argument("--L", type=int)
    p.add_argument("--objective", choices=("dp", "ds", "divfn"), default="dp")
    p.add_argument("--snr-db", type=float)
    p.add_argument("--n-rx", type=int, default=1)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("simulate", parents=[common], help="differential BLER simulation")
    p.add_argument("path", nargs="?")
    _add_source(p)
    p.add_argument("--snr-db", type=float, nargs="+", required=True)
    p.add_argument("--n-rx", type=int, default=2)
    p.add_argument("--frame-blocks", type=int, default=100)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--decoder", choices=("ml_exhaustive", "fast"), default="ml_exhaustive")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("decbench", parents=[common], help="fast decoder vs exhaustive ML")
    _add_source(p)
    p.add_argument("--blocks", type=int, default=10000)
    p.add_argument("--snr-db", type=float, default=6.0)
    p.add_argument("--n-rx", type=int, default=2)
    p.add_argument("--radius", action="store_true", help="enable radius early exit")
    p.set_defaults(func=cmd_decbench)
    return parser


def _apply_tolerances(items):
    over = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--tol expects NAME=VALUE, got {item!r}")
        try:
            over[name.strip()] = int(value) if name.strip() == "quad_max_depth" \
                else float(value)
        except ValueError:
            raise UsageError(f"--tol {name}: bad value {value!r}") from None
    try:
        tolerances.configure(**over)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    run = Run(args)
    code = EXIT_OK
    try:
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        _apply_tolerances(args.tol)
        code = args.func(args, run)
    except UsageError as exc:
        print(f"ustm {args.command}: usage error: {exc}", file=sys.stderr)
        code = EXIT_USAGE
    except OSError as exc:
        print(f"ustm {args.command}: {exc}", file=sys.stderr)
        code = EXIT_USAGE
    except (QuadratureError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"ustm {args.command}: numerical failure: {exc}", file=sys.stderr)
        code = EXIT_NUMERICAL
    except (ConstellationError, UconFormatError, ValueError) as exc:
        print(f"ustm {args.command}: validation error: {exc}", file=sys.stderr)
        code = EXIT_VALIDATION
    finally:
        tolerances.reset()
    run.manifest(code)
    return code
