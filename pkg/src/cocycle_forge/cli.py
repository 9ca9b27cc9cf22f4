"""Command-line front end.

Every invocation prints one report (JSON by default, CSV for bulk data) and
exits with 0 on success, 2 when the request is infeasible, 3 on malformed
input and 4 on an internal error.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import time
from dataclasses import asdict
from typing import Any, Callable, Sequence

import numpy as np

from . import records
from .chain import build_chain_graph, class_count_across_epsilon, ChainGraph
from .cocycle import DEFAULT_TOL, PeriodicCocycle, Tolerances
from .decomposition import invariant_decomposition
from .domination import DEFAULT_KMAX, check_chain_domination, domination_scan
from .errors import CocycleError, Infeasible, InternalError, InvalidArgument
from .maps import read_samples_csv, zoo_map
from .paths import (DEFAULT_GRID, CocyclePath, blend_exponents, collapse_to_sink_or_source, realify,
                    verify_contract, weaken_exponent)
from .properties import check_named_property, check_sectional_dissipativity
from .spectrum import lyapunov_spectrum
from .strong_connection import (DIRECTION_TOL, CenterKind, classify_center, normalized_iteration_limit)
from .two_loop import build_two_loop_cocycle, central_orientation_sign, make_complex, sft_domination_scan

EXIT_OK, EXIT_INFEASIBLE, EXIT_INPUT, EXIT_INTERNAL = 0, 2, 3, 4
TOL_ENV = "COCYCLE_FORGE_TOL"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class Context:
    """Per-run state: options, tolerances and the bytes of every input read."""

    def __init__(self, args: argparse.Namespace, tol: Tolerances):
        self.args = args
        self.tol = tol
        self.grid = getattr(args, "grid", None) or DEFAULT_GRID
        self.inputs: list[bytes] = []
        self.csv_rows: list[list[Any]] | None = None
        self.csv_text: str | None = None

    def read(self, path: str) -> bytes:
        data = records.read_bytes(path)
        self.inputs.append(data)
        return data

    def cocycles(self, path: str) -> list[PeriodicCocycle]:
        return records.cocycles_from_json(records.load_json(self.read(path), "cocycle file"))

    def cocycle(self, path: str) -> PeriodicCocycle:
        cs = self.cocycles(path)
        if len(cs) != 1:
            raise InvalidArgument("this command takes a single cocycle")
        return cs[0]


# ------------------------------------------------------------------ helpers

def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _csv(rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _blocks(c: PeriodicCocycle, tol: Tolerances) -> list[dict]:
    dec = invariant_decomposition(c, tol)
    return [{"kind": b.kind, "positions": [p + 1 for p in b.positions]} for b in dec.blocks]


def _path_result(ctx: Context, p: CocyclePath) -> dict:
    verdict = verify_contract(p, p.contract, ctx.tol)
    curves = p.exponent_curves()
    d = curves.shape[1]
    ctx.csv_rows = [["t"] + [f"chi_{k + 1}" for k in range(d)]]
    ctx.csv_rows += [[t, *row] for t, row in zip(p.grid, curves)]
    endpoint = getattr(ctx.args, "endpoint", None)
    if endpoint:
        with open(endpoint, "w") as fh:
            fh.write(records.dump_cocycle(p.endpoint) + "\n")
    meta = {k: v for k, v in p.meta.items() if isinstance(v, (int, float, str, bool))}
    return {
        "contract": p.contract.to_record(),
        "verdict": verdict.to_record(),
        "radius": p.radius,
        "grid_points": len(p.grid),
        "meta": meta,
        "endpoint_spectrum": p.spectra[-1].to_record(),
        "curves": {"t": p.grid.tolist(), "exponents": curves.tolist()},
    }


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InvalidArgument(f"{what} must be a comma-separated list of numbers") from None


def _ints(text: str, what: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InvalidArgument(f"{what} must be a comma-separated list of integers") from None


# ------------------------------------------------------------------ commands

def cmd_spectrum(ctx: Context) -> dict:
    c = ctx.cocycle(ctx.args.file)
    s = lyapunov_spectrum(c, ctx.tol)
    ctx.csv_rows = [["k", "re", "im", "exponent"]]
    ctx.csv_rows += [[k + 1, z.real, z.imag, x] for k, (z, x) in enumerate(zip(s.multipliers, s.exponents))]
    return {"spectrum": s.to_record(), "blocks": _blocks(c, ctx.tol),
            "sectional_dissipativity": check_sectional_dissipativity([s]).to_record()}


def cmd_dominate(ctx: Context) -> dict:
    a = ctx.args
    c = ctx.cocycle(a.file)
    if a.kmax < 1:
        raise InvalidArgument("--kmax must be positive")
    dec = invariant_decomposition(c, ctx.tol)
    report = domination_scan(c, a.kmax, ctx.tol, dec)
    out = {"domination": report.to_record()}
    ctx.csv_rows = [["index", "k", "reason"]] + [[r.index, "" if r.k is None else r.k, r.reason or ""]
                                                 for r in report.indices]
    if a.chain:
        k = a.k or a.kmax
        chain = check_chain_domination(c, _ints(a.chain, "--chain"), k, ctx.tol, dec)
        out["chain"] = {"k": k, "dims": _ints(a.chain, "--chain"), "dominated": all(v.dominated for v in chain),
                        "interfaces": [v.to_record() for v in chain]}
    return out


def cmd_blend(ctx: Context) -> dict:
    a = ctx.args
    return _path_result(ctx, blend_exponents(ctx.cocycle(a.file), a.j, a.eps, ctx.grid, ctx.tol))


def cmd_realify(ctx: Context) -> dict:
    return _path_result(ctx, realify(ctx.cocycle(ctx.args.file), ctx.args.eps, ctx.grid, ctx.tol))


def cmd_weaken(ctx: Context) -> dict:
    a = ctx.args
    return _path_result(ctx, weaken_exponent(ctx.cocycle(a.file), a.i, a.delta, a.eps, ctx.grid, ctx.tol))


def cmd_collapse(ctx: Context) -> dict:
    a = ctx.args
    return _path_result(ctx, collapse_to_sink_or_source(ctx.cocycle(a.file), a.target, a.eps, ctx.grid, ctx.tol))


def cmd_twoloop(ctx: Context) -> dict:
    a = ctx.args
    spec = records.twoloop_from_record(records.load_json(ctx.read(a.spec), "two-loop spec"), a.n)
    c = build_two_loop_cocycle(spec, ctx.tol)
    dec = invariant_decomposition(c, ctx.tol)
    s = dec.spectrum
    signs = []
    for j in range(1, c.dim):
        try:
            signs.append({"j": j, "sign": central_orientation_sign(c, j, ctx.tol, dec), "reason": None})
        except Infeasible as exc:
            signs.append({"j": j, "sign": None, "reason": f"{exc.reason}: {exc}"})
    out = {
        "n": spec.n, "r": spec.r, "period": c.period,
        "spectrum": s.to_record(),
        "domination": domination_scan(c, DEFAULT_KMAX, ctx.tol, dec).to_record(),
        "orientation": signs,
    }
    ctx.csv_rows = [["k", "re", "im", "exponent"]]
    ctx.csv_rows += [[k + 1, z.real, z.imag, x] for k, (z, x) in enumerate(zip(s.multipliers, s.exponents))]
    if a.complexify:
        if a.j is None or a.eps is None:
            raise InvalidArgument("--complexify needs --j and --eps")
        p = make_complex(c, a.j, a.eps, ctx.grid, ctx.tol, sites=spec.fixed_sites())
        out["complexify"] = _path_result(ctx, p)
    return out


def cmd_sft_scan(ctx: Context) -> dict:
    a = ctx.args
    sft = records.sft_from_record(records.load_json(ctx.read(a.file), "SFT file"))
    report = sft_domination_scan(sft, a.k, a.max_period, ctx.tol)
    ctx.csv_rows = [["word", "index", "dominated", "max_ratio", "reason"]]
    ctx.csv_rows += [[v.word, v.index, v.dominated, v.max_ratio, v.reason or ""] for v in report.verdicts]
    return report.to_record(details=a.details)


def cmd_strongconn(ctx: Context) -> dict:
    a = ctx.args
    model = records.model_from_record(records.load_json(ctx.read(a.file), "model file"))
    if a.steps < 1:
        raise InvalidArgument("--steps must be positive")
    if not a.angle_tol > 0:
        raise InvalidArgument("--angle-tol must be positive")
    kind = classify_center(model)
    out: dict = {"classification": kind.value, "scope": "model-level", "angle_tolerance": a.angle_tol}
    if kind is CenterKind.COMPLEX:
        out.update(limit=None, direction_within_tolerance=None)
        ctx.csv_rows = [["steps", "angle"]]
        return out
    lim = normalized_iteration_limit(model, a.steps)
    out.update(limit=lim.to_record(), direction_within_tolerance=bool(lim.angle < a.angle_tol))
    marks = sorted({int(x) for x in np.unique(np.geomspace(1, a.steps, num=min(a.steps, 60)).round())})
    ctx.csv_rows = [["steps", "angle"]] + [[s, normalized_iteration_limit(model, s).angle] for s in marks]
    return out


def cmd_chain(ctx: Context) -> dict:
    a = ctx.args
    if (a.map is None) == (a.samples is None):
        raise InvalidArgument("give exactly one of --map and --samples")
    periodic = [bool(int(x)) for x in a.periodic.split(",")] if a.periodic else []
    if a.map is not None:
        fmap = zoo_map(a.map)
        ctx.inputs.append(a.map.encode())
    else:
        ctx.read(a.samples)
        fmap = read_samples_csv(a.samples, periodic)
    graph: ChainGraph = build_chain_graph(fmap, a.res, a.eps)
    out = {"map": fmap.name, "graph": graph.to_record()}
    if a.sweep:
        sweep = class_count_across_epsilon(fmap, a.res, _floats(a.sweep, "--sweep"))
        out["sweep"] = sweep.to_record()
    if a.edges:
        with open(a.edges, "w") as fh:
            fh.write(graph.edges_csv())
    ctx.csv_text = graph.nodes_csv()
    return out


def _property_arg(text: str) -> tuple[str, float | None]:
    name, _, rest = text.partition(":")
    if name == "pid":
        if not rest:
            raise InvalidArgument("pid needs a delta: --property pid:DELTA")
        return name, float(rest)
    if rest:
        raise InvalidArgument(f"property {name} takes no parameter")
    return name, None


def cmd_check(ctx: Context) -> dict:
    a = ctx.args
    name, delta = _property_arg(a.property)
    cs = ctx.cocycles(a.file)
    spectra = [lyapunov_spectrum(c, ctx.tol) for c in cs]
    verdict = check_named_property(name, spectra if name == "vprime" else spectra[0],
                                   index=a.index, delta=delta, tol=ctx.tol)
    ctx.csv_rows = [["clause", "holds"]] + [[k, v] for k, v in verdict.clauses.items()]
    return {"points": len(cs), "verdict": verdict.to_record(),
            "spectra": [s.to_record() for s in spectra]}


COMMANDS: dict[str, Callable[[Context], dict]] = {
    "spectrum": cmd_spectrum, "dominate": cmd_dominate, "blend": cmd_blend, "realify": cmd_realify,
    "weaken": cmd_weaken, "collapse": cmd_collapse, "twoloop": cmd_twoloop, "sft-scan": cmd_sft_scan,
    "strongconn": cmd_strongconn, "chain": cmd_chain, "check": cmd_check,
}


# ------------------------------------------------------------------ parser

def _common(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("global options")
    g.add_argument("--tol", type=float, default=argparse.SUPPRESS,
                   help=f"equality tolerance for moduli and exponents (env {TOL_ENV})")
    g.add_argument("--grid", type=int, default=argparse.SUPPRESS, help="path grid points (default 101)")
    fmt = g.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json", default=argparse.SUPPRESS)
    fmt.add_argument("--csv", dest="fmt", action="store_const", const="csv", default=argparse.SUPPRESS)
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="recorded only; core paths are deterministic")
    g.add_argument("--timing", action="store_true", default=argparse.SUPPRESS, help="add wall time to the report")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cocycle-forge", description=__doc__.splitlines()[0])
    _common(p)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help_text)
        _common(sp)
        return sp

    sp = add("spectrum", "multipliers and Lyapunov exponents")
    sp.add_argument("file")
    sp = add("dominate", "minimal domination strength per index")
    sp.add_argument("file")
    sp.add_argument("--kmax", type=int, default=DEFAULT_KMAX)
    sp.add_argument("--chain", help="bundle dimensions d1,d2,... of a dominated chain")
    sp.add_argument("--k", type=int, help="strength for --chain (default kmax)")
    for name, text in (("blend", "merge exponents j and j+1"), ("realify", "make every multiplier real"),
                       ("weaken", "push exponent i into (-delta, 0)"), ("collapse", "reach a sink or a source")):
        sp = add(name, text)
        sp.add_argument("file")
        sp.add_argument("--eps", type=float, required=True)
        sp.add_argument("--endpoint", help="write the endpoint cocycle to this file")
        if name == "blend":
            sp.add_argument("--j", type=int, required=True)
        if name == "weaken":
            sp.add_argument("--i", type=int, required=True)
            sp.add_argument("--delta", type=float, required=True)
        if name == "collapse":
            sp.add_argument("--target", choices=("sink", "source"), required=True)
    sp = add("twoloop", "two-loop cocycle around a fixed matrix")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--n", type=int)
    sp.add_argument("--complexify", action="store_true")
    sp.add_argument("--j", type=int)
    sp.add_argument("--eps", type=float)
    sp.add_argument("--endpoint", help="write the complexified endpoint cocycle to this file")
    sp = add("sft-scan", "domination over all periodic words of a subshift")
    sp.add_argument("file")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--max-period", type=int, required=True)
    sp.add_argument("--details", action="store_true", help="list the verdict of every word")
    sp = add("strongconn", "centre-stable affine model")
    sp.add_argument("file")
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("--angle-tol", type=float, default=DIRECTION_TOL,
                    help="angle below which the iterate counts as on the invariant line")
    sp = add("chain", "chain-recurrence classes of a sampled map")
    sp.add_argument("--map")
    sp.add_argument("--samples")
    sp.add_argument("--periodic", help="per-axis 0/1 flags for --samples, e.g. 1,0")
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--res", type=int, required=True)
    sp.add_argument("--sweep", help="descending epsilons e1,e2,...")
    sp.add_argument("--edges", help="write the edge list CSV to this file")
    sp = add("check", "named spectral property")
    sp.add_argument("file")
    sp.add_argument("--property", required=True)
    sp.add_argument("--index", type=int)
    return p


def resolve_tolerances(args: argparse.Namespace, environ=os.environ) -> Tolerances:
    tol = getattr(args, "tol", None)
    if tol is None and environ.get(TOL_ENV):
        try:
            tol = float(environ[TOL_ENV])
        except ValueError:
            raise InvalidArgument(f"{TOL_ENV} must be a number") from None
    if tol is None:
        return DEFAULT_TOL
    if not tol > 0:
        raise InvalidArgument("tolerance must be positive")
    return DEFAULT_TOL.with_tol(tol)


# ------------------------------------------------------------------ driver

def _report(argv: Sequence[str], command: str | None, ctx: Context | None, status: str,
            result: dict | None, reason: str | None, message: str | None, started: float) -> dict:
    tol = ctx.tol if ctx else DEFAULT_TOL
    rep = {
        "format_version": records.FORMAT_VERSION,
        "command": {"name": command, "argv": list(argv)},
        "input_digest": records.digest(*ctx.inputs) if ctx and ctx.inputs else None,
        "status": status,
        "reason": reason,
        "message": message,
        "tolerances": asdict(tol),
        "options": {"grid": ctx.grid if ctx else DEFAULT_GRID,
                    "seed": getattr(ctx.args, "seed", None) if ctx else None},
        "result": result,
    }
    if ctx is not None and getattr(ctx.args, "timing", False):
        rep["wall_time"] = time.perf_counter() - started
    return rep


def run(argv: Sequence[str], stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(argv)
    started = time.perf_counter()
    ctx: Context | None = None
    command = None
    try:
        try:
            args = build_parser().parse_args(argv)
        except SystemExit as exc:  # --help
            return int(exc.code or 0)
        command = args.command
        ctx = Context(args, resolve_tolerances(args))
        result = COMMANDS[command](ctx)
        report = _report(argv, command, ctx, "ok", result, None, None, started)
        try:
            records.validate(records.plain(report), "report")
        except InvalidArgument as exc:
            raise InternalError(f"report does not match its schema: {exc}") from None
        if getattr(args, "fmt", "json") == "csv":
            stdout.write(ctx.csv_text if ctx.csv_text is not None else _csv(ctx.csv_rows or []))
        else:
            stdout.write(records.dumps(report) + "\n")
        return EXIT_OK
    except Infeasible as exc:
        code, status, reason, msg = EXIT_INFEASIBLE, "infeasible", exc.reason, str(exc)
    except (UsageError, CocycleError) as exc:
        code, status, msg = EXIT_INPUT, "error", str(exc)
        reason = "UsageError" if isinstance(exc, UsageError) else exc.reason
    except (InternalError, Exception) as exc:  # anything else is a bug
        code, status, reason, msg = EXIT_INTERNAL, "error", "InternalError", f"{type(exc).__name__}: {exc}"
    report = _report(argv, command, ctx, status, None, reason, msg, started)
    stdout.write(records.dumps(report) + "\n")
    stderr.write(f"cocycle-forge: {reason}: {msg}\n")
    return code


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
