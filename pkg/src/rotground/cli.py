"""Command-line interface.

Every subcommand prints a JSON record on stdout. With ``--out DIR`` it also
writes CSV tables (and SVG figures with ``--svg``) into ``DIR``. Exit codes:
0 on success, 2 for parse or configuration errors, 3 when a numerical
procedure fails to converge.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .annealing import AnnealOptions, ground_state, verify_face_limit
from .files import (
    PotentialFileError,
    csv_header,
    fmt,
    label_vertices,
    polygon_csv,
    polygon_svg,
    read_potential,
    trace_csv,
)
from .geometry import EntropySearch, OutsideInteriorError, localized_entropy, rotation_polytope_periodic
from .polygon_example import (
    PRESETS,
    check_symmetry,
    check_vertex_monotonicity,
    example1_potential,
    hull_hypotheses,
    predicted_vertices,
    preset,
    truncation_bound,
    vertex_formula,
    vertex_slope,
)
from .symbolic import Word
from .transfer import (
    ScalarPotential,
    TransferConvergenceError,
    measure_entropy,
    measure_integral,
    solve_transfer,
    unit_direction,
)

EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGENCE = 0, 2, 3
CACHE_VERSION = "1"


class ConfigError(ValueError):
    """Invalid combination of command-line options."""


class NonConvergence(RuntimeError):
    """A run finished but did not meet its convergence criterion."""


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def dumps(record) -> str:
    return json.dumps(_jsonable(record), indent=2) + "\n"


def _floats(text: str, what: str) -> np.ndarray:
    try:
        vals = np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise ConfigError(f"{what} must be comma-separated numbers, got {text!r}") from None
    if not np.isfinite(vals).all():
        raise ConfigError(f"{what} must be finite")
    return vals


def _load(args):
    """Return ``(table, params)``; ``params`` is set only for presets."""
    if args.potential and args.preset:
        raise ConfigError("give either --potential or --preset, not both")
    if args.preset:
        if args.preset not in PRESETS:
            raise ConfigError(f"unknown preset {args.preset!r} (known: {', '.join(PRESETS)})")
        params = preset(args.preset, args.depth)
        return example1_potential(params), params
    if not args.potential:
        raise ConfigError("one of --potential or --preset is required")
    return read_potential(args.potential), None


def _direction(args, table) -> np.ndarray:
    if args.direction is None:
        if table.dim != 1:
            raise ConfigError(f"--direction is required for a {table.dim}-d potential")
        return np.ones(1)
    alpha = _floats(args.direction, "--direction")
    if alpha.shape != (table.dim,):
        raise ConfigError(f"--direction has {alpha.size} component(s), potential has {table.dim}")
    if not alpha.any():
        raise ConfigError("--direction must be non-zero")
    return unit_direction(alpha)


def _out_dir(args) -> Path | None:
    if args.out is None:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _require_positive(**values):
    for name, val in values.items():
        if not val > 0:
            raise ConfigError(f"{name} must be positive")


def cmd_pressure(args, equilibrium: bool = False) -> dict:
    table, _ = _load(args)
    alpha = _direction(args, table)
    if args.t < 0:
        raise ConfigError("--t must be non-negative")
    _require_positive(**{"--tol": args.tol})
    sol = solve_transfer(ScalarPotential.from_table(table, alpha, scale=args.t), tol=args.tol,
                         partition=table.bisimulation)
    rv = measure_integral(sol.markov, table)
    entropy = measure_entropy(sol.markov)
    record = {
        "command": "equilibrium" if equilibrium else "pressure",
        "alphabet_size": table.q,
        "range": table.r,
        "direction": alpha,
        "t": args.t,
        "pressure": sol.pressure,
        "entropy": entropy,
        "rv": rv,
        "residual": sol.residual,
        "flags": list(sol.flags),
    }
    out = _out_dir(args)
    if equilibrium:
        masses = sol.markov.cylinder_masses()
        words = [str(Word.from_code(c, table.q, table.r)) for c in range(table.q**table.r)]
        trans = sol.markov.transition.reshape(-1)
        if len(words) <= 256:
            record["chain"] = {w: {"mass": m, "transition": p}
                               for w, m, p in zip(words, masses, trans)}
        if out is not None:
            lines = [csv_header("equilibrium", alphabet_size=table.q, range=table.r),
                     "word,mass,transition"]
            lines += [f"{w},{fmt(m)},{fmt(p)}" for w, m, p in zip(words, masses, trans)]
            (out / "equilibrium.csv").write_text("\n".join(lines) + "\n")
    elif out is not None:
        cols = ["t", *[f"rv{k + 1}" for k in range(table.dim)], "entropy", "pressure"]
        row = [args.t, *rv, entropy, sol.pressure]
        (out / "pressure.csv").write_text(
            "\n".join([csv_header("pressure", dim=table.dim), ",".join(cols),
                       ",".join(fmt(x) for x in row)]) + "\n")
    return record


def _polygon(table, params, max_period):
    if table.dim != 2:
        raise ConfigError(f"rotation polygons need a 2-d potential, got dim {table.dim}")
    poly = rotation_polytope_periodic(table, max_period)
    named = predicted_vertices(params, max_period) if params is not None else {}
    labels = label_vertices(poly, named) if named else [f"p{k}" for k in range(len(poly))]
    return poly, named, labels


def cmd_rotset(args) -> dict:
    table, params = _load(args)
    poly, named, labels = _polygon(table, params, args.max_period)
    out = _out_dir(args)
    if out is not None:
        (out / "rotset.csv").write_text(polygon_csv(poly, labels))
        if args.svg:
            (out / "rotset.svg").write_text(polygon_svg(poly, labels, overlay=named))
    record = {
        "command": "rotset",
        "max_period": args.max_period,
        "degenerate": poly.degenerate,
        "vertices": [{"label": lab, "x": v[0], "y": v[1]} for lab, v in zip(labels, poly.vertices)],
    }
    if named:
        record["unmatched_predictions"] = sorted(set(named) - set(labels))
    return record


def _cache_key(table, config: dict) -> str:
    h = hashlib.sha256()
    h.update(f"{CACHE_VERSION}|{table.q}|{table.r}|{table.values.shape}|".encode())
    h.update(np.ascontiguousarray(table.values, dtype="<f8").tobytes())
    h.update(json.dumps(config, sort_keys=True).encode())
    return h.hexdigest()


def cmd_anneal(args) -> dict:
    table, params = _load(args)
    alpha = _direction(args, table)
    _require_positive(**{"--t0": args.t0, "--t-max": args.t_max, "--tol": args.tol})
    if args.t_growth <= 1:
        raise ConfigError("--t-growth must exceed 1")
    if args.t_max < args.t0:
        raise ConfigError("--t-max must be at least --t0")
    opts = AnnealOptions(t0=args.t0, growth=args.t_growth, t_max=args.t_max, transfer_tol=args.tol)
    out = _out_dir(args)
    config = {"direction": alpha.tolist(), "t0": args.t0, "growth": args.t_growth,
              "t_max": args.t_max, "tol": args.tol, "max_period": args.max_period}

    cache_file = None
    if out is not None:
        cache_file = out / ".cache" / f"{_cache_key(table, config)}.json"
        if cache_file.is_file():
            try:
                cached = json.loads(cache_file.read_text())
                (out / "anneal.csv").write_text(cached["csv"])
                if args.svg and cached.get("svg"):
                    (out / "anneal.svg").write_text(cached["svg"])
                (out / "report.json").write_text(dumps(cached["record"]))
                print(f"using cached result {cache_file.name}", file=sys.stderr)
                if not cached["record"]["converged"]:
                    raise NonConvergence("annealing did not converge (cached)")
                return cached["record"]
            except (ValueError, KeyError, OSError):
                pass  # stale or corrupt entry: recompute

    poly, named, labels = None, {}, None
    if table.dim == 2:
        poly, named, labels = _polygon(table, params, args.max_period)
    report = ground_state(table, alpha, opts, poly)
    check = verify_face_limit(report, table, poly)
    csv_text = trace_csv(report.trace, check.distances)
    svg_text = polygon_svg(poly, labels, overlay=named, path=report.trace.rvs) \
        if poly is not None else ""
    record = {
        "command": "anneal",
        "direction": alpha,
        "schedule_length": len(report.trace.entries),
        "final_t": report.trace.entries[-1].t,
        "converged": report.converged,
        "limit_rv": report.limit_rv,
        "limit_entropy": report.limit_entropy,
        "closed_class_weights": report.closed_class_weights,
        "closed_class_sizes": [len(c.states) for c in report.closed_classes],
        "accumulation_rvs": list(report.accumulation_rvs),
        "face": None if report.face is None else
        {"kind": report.face.kind, "points": report.face.points},
        "checks": {f.name: {"passed": f.passed, "value": f.value, "tol": f.tol}
                   for f in check.findings},
        "flags": list(report.flags),
    }
    record = _jsonable(record)
    if out is not None:
        (out / "anneal.csv").write_text(csv_text)
        if args.svg and svg_text:
            (out / "anneal.svg").write_text(svg_text)
        (out / "report.json").write_text(dumps(record))
        cache_file.parent.mkdir(exist_ok=True)
        cache_file.write_text(json.dumps({"csv": csv_text, "svg": svg_text, "record": record}))
    if not report.converged:
        print(dumps(record), end="")
        raise NonConvergence("annealing did not converge before --t-max")
    return record


def cmd_localized_entropy(args) -> dict:
    table, _ = _load(args)
    if args.point is None:
        raise ConfigError("--point is required")
    w = _floats(args.point, "--point")
    if w.shape != (table.dim,):
        raise ConfigError(f"--point has {w.size} component(s), potential has {table.dim}")
    _require_positive(**{"--tol": args.tol})
    res = localized_entropy(table, w, EntropySearch(max_period=args.max_period))
    return {
        "command": "localized-entropy",
        "point": w,
        "value": res.value,
        "multiplier": res.multiplier,
        "residual": res.residual,
        "measure_entropy": res.entropy,
        "solves": res.solves,
    }


def cmd_example1(args) -> dict:
    name = args.preset or "prop55"
    if args.potential:
        raise ConfigError("example1 works on presets only")
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r} (known: {', '.join(PRESETS)})")
    params = preset(name, args.depth)
    table = example1_potential(params)
    mono = check_vertex_monotonicity(params)
    j_max = min(args.max_period, params.depth - 1)
    slope_js = [5, 10, 20, 100, 1000, 10_000, 100_000]
    slopes = vertex_slope(1, np.array(slope_js), params)
    record = {
        "command": "example1",
        "preset": name,
        "depth": params.depth,
        "a": params.a,
        "lam": params.lam,
        "hypotheses": hull_hypotheses(params),
        "monotone": mono.monotone,
        "sufficient_condition": mono.sufficient_condition,
        "symmetric": check_symmetry(table),
        "truncation_bound": truncation_bound(params),
        "vertices": {f"w{i}({j})": vertex_formula(i, j, params)
                     for i in (1, 2) for j in range(params.lam, j_max + 1)},
        "slopes_w1": dict(zip(map(str, slope_js), slopes)),
        "slope_exceeds_100": bool((slopes > 100).any()),
    }
    out = _out_dir(args)
    if out is not None:
        lines = [csv_header("example1", preset=name, depth=params.depth), "label,x,y"]
        lines += [f"{k},{fmt(v[0])},{fmt(v[1])}" for k, v in record["vertices"].items()]
        (out / "example1.csv").write_text("\n".join(lines) + "\n")
        if args.svg:
            poly, named, labels = _polygon(table, params, args.max_period)
            (out / "example1.svg").write_text(polygon_svg(poly, labels, overlay=named))
    return record


COMMANDS = {
    "pressure": cmd_pressure,
    "equilibrium": lambda args: cmd_pressure(args, equilibrium=True),
    "rotset": cmd_rotset,
    "anneal": cmd_anneal,
    "localized-entropy": cmd_localized_entropy,
    "example1": cmd_example1,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_argument_group("potential")
    src.add_argument("--potential", metavar="PATH", help="JSON potential file")
    src.add_argument("--preset", metavar="NAME", help=f"built-in example ({', '.join(PRESETS)})")
    src.add_argument("--depth", type=int, default=10, metavar="K",
                     help="truncation depth of presets (default 10)")
    common.add_argument("--direction", metavar="A,B",
                        help="direction vector, normalized to unit length")
    common.add_argument("--t", type=float, default=1.0, help="inverse temperature (default 1)")
    common.add_argument("--t0", type=float, default=1.0, help="first annealing point")
    common.add_argument("--t-max", type=float, default=400.0, help="last annealing point")
    common.add_argument("--t-growth", type=float, default=1.5, help="geometric schedule ratio")
    common.add_argument("--tol", type=float, default=1e-13, help="transfer-operator residual")
    common.add_argument("--max-period", type=int, default=9, metavar="P",
                        help="longest periodic orbit used for polygons (default 9)")
    common.add_argument("--point", metavar="W", help="target rotation vector")
    common.add_argument("--out", metavar="DIR", help="directory for CSV/SVG output")
    common.add_argument("--svg", action="store_true", help="also write SVG figures")

    parser = argparse.ArgumentParser(
        prog="rotground",
        description="Pressure, rotation sets and zero-temperature limits "
                    "for finite-range potentials on full shifts.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "pressure": "pressure, entropy and rotation vector of t * direction . Phi",
        "equilibrium": "equilibrium Markov chain of t * direction . Phi",
        "rotset": "rotation polygon from periodic orbits",
        "anneal": "zero-temperature annealing in a direction",
        "localized-entropy": "maximal entropy at a rotation vector",
        "example1": "diagnostics of the infinite-polygon presets",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


def _join_signed(argv):
    """Let ``--direction -1,0`` through argparse's option detection."""
    out, it = [], iter(argv)
    for tok in it:
        if tok in ("--direction", "--point"):
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(_join_signed(sys.argv[1:] if argv is None else argv))
    if args.depth < 1 or args.max_period < 1:
        print("error: --depth and --max-period must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        record = COMMANDS[args.command](args)
    except OutsideInteriorError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PotentialFileError, ConfigError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergence as exc:
        print(f"not converged: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (TransferConvergenceError, RuntimeError) as exc:
        print(f"not converged: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    print(dumps(record), end="")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
