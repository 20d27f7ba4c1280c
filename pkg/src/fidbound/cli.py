"""Command-line entry point.

Exit status: 0 success, 1 usage error, 2 validation failure (bad input
files, infeasible parameters, non-CPTP channels), 3 a verification sweep
found a violation.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bounds as bnd
from . import figures, rb, verify, zoo
from .channels import ChannelError, channel_to_json, load_channel, validate_cptp
from .metrics import ChannelMetrics

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_VIOLATION = 0, 1, 2, 3
DEFAULT_SEED = 1
DEFAULT_TOL = 1e-9


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


# -- output helpers ----------------------------------------------------------

def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _kv_text(d: dict) -> str:
    width = max(len(k) for k in d)
    lines = []
    for k, v in d.items():
        val = f"{v:.12g}" if isinstance(v, float) else str(v)
        lines.append(f"{k:<{width}}  {val}")
    return "\n".join(lines) + "\n"


def _emit_record(args, record: dict) -> None:
    fmt = args.format
    if fmt == "text":
        flat = {k: (", ".join(v) if isinstance(v, list) else v) for k, v in record.items()}
        _emit(args, _kv_text(flat))
    elif fmt == "csv":
        _emit(args, figures.rows_to_csv(list(record), [list(record.values())]))
    else:
        _emit(args, _dump(record))


def _load_valid(path: str, tol: float):
    if not Path(path).is_file():
        raise ChannelError(f"no such file: {path}")
    ch = load_channel(path)
    report = validate_cptp(ch, tol)
    if not report.ok:
        raise ChannelError(
            f"{path}: not CPTP within {tol:g} (TP deviation {report.tp_deviation:.3g}, "
            f"min Choi eigenvalue {report.min_choi_eigenvalue:.3g})"
        )
    return ch


# -- subcommands ----------------------------------------------------------------

def cmd_metrics(args) -> int:
    ch = _load_valid(args.channel, args.tol)
    _emit_record(args, ChannelMetrics.from_channel(ch).as_dict())
    return EXIT_OK


def cmd_bounds(args) -> int:
    if args.kind == "pair":
        if len(args.chi00) != 2:
            raise UsageError("bounds pair needs exactly two --chi00 values")
        iv = bnd.chi00_pair_bounds(*args.chi00)
    elif args.kind == "seq":
        if not args.chi00:
            raise UsageError("bounds seq needs at least one --chi00 value")
        iv = bnd.chi00_seq_lower(args.chi00)
    else:
        iv = bnd.interleaved_decay_bounds(args.p_composite, args.u_ref, args.theta_ref)
    out = iv.as_dict()
    out["kind"] = iv.kind.value
    _emit_record(args, {k: out[k] for k in ("kind", "lower", "upper", "source", "assumptions")})
    return EXIT_OK


_MAKERS = {
    "identity": lambda a: zoo.identity(a.d),
    "depolarizing": lambda a: zoo.depolarizing(a.p, a.d),
    "pauli": lambda a: zoo.pauli_channel(a.probs),
    "z-rotation": lambda a: zoo.z_rotation(a.theta),
    "phase-unitary": lambda a: zoo.phase_unitary(a.phi, a.d),
    "amplitude-damping": lambda a: zoo.amplitude_damping_qubit(a.gamma, a.theta or 0.0),
    "rotation-damping": lambda a: zoo.rotation_damping_qubit(a.gamma, a.lam, a.theta or 0.0),
}

_NEEDS = {
    "depolarizing": ("p",),
    "pauli": ("probs",),
    "z-rotation": ("theta",),
    "phase-unitary": ("phi",),
    "amplitude-damping": ("gamma",),
    "rotation-damping": ("gamma", "lam"),
}


def cmd_zoo(args) -> int:
    if args.action == "make":
        missing = [f"--{n}" for n in _NEEDS.get(args.kind, ()) if getattr(args, n) is None]
        if missing:
            raise UsageError(f"zoo make --kind {args.kind} needs {', '.join(missing)}")
        ch = _MAKERS[args.kind](args)
    else:
        if args.fidelity is not None:
            spec = zoo.EnsembleSpec(args.d, args.fidelity, args.unitarity, args.tol, args.kraus_rank, args.seed)
            ch = zoo.random_with_targets(spec)
        elif args.unitarity is not None:
            raise UsageError("--unitarity needs --fidelity")
        elif args.kind == "unitary":
            ch = zoo.random_unitary(args.d, args.seed)
        elif args.kind == "unital":
            ch = zoo.random_unital(args.d, seed=args.seed)
        elif args.kind == "near-identity":
            ch = zoo.random_near_identity(args.d, seed=args.seed, kraus_rank=args.kraus_rank)
        else:
            ch = zoo.random_cptp(args.d, args.kraus_rank, args.seed)
    _emit(args, _dump(channel_to_json(ch)))
    return EXIT_OK


def _gate_index(gs: rb.GateSet, name: str) -> int:
    named = {"I": np.eye(2), "X": rb._X, "Y": rb._Y, "Z": rb._Z, "H": rb._H, "S": rb._S}
    if name.upper() in named:
        try:
            return gs.index_of(named[name.upper()])
        except KeyError:
            raise ChannelError(f"gate {name} is not in {gs.name}") from None
    try:
        idx = int(name)
    except ValueError:
        raise UsageError(f"unknown gate {name!r}") from None
    if not 0 <= idx < len(gs):
        raise UsageError(f"gate index {idx} out of range for {gs.name}")
    return idx


def cmd_rb(args) -> int:
    if args.action == "fit":
        if not Path(args.input).is_file():
            raise ChannelError(f"no such file: {args.input}")
        points = rb.RBRun.points_from_csv(Path(args.input).read_text())
        fit = rb.fit_decay((m, p) for m, p, _ in points)
        _emit_record(args, {k: v for k, v in fit.as_dict().items()})
        return EXIT_OK
    gs = rb.GATESETS[args.gateset]()
    noise = _load_valid(args.noise, args.tol) if args.noise else zoo.identity(2)
    if noise.dim != 2:
        raise ChannelError("gate sets act on a single qubit; noise must have dim 2")
    gs = gs.with_noise(noise)
    inter = None
    if args.mode == "interleaved":
        gate_noise = _load_valid(args.gate_noise, args.tol) if args.gate_noise else None
        inter = rb.Interleave(_gate_index(gs, args.gate), gate_noise)
    if args.nseqs < 1:
        raise UsageError("--nseqs must be >= 1")
    run = rb.run_rb(gs, args.lengths, args.method, args.nseqs, args.seed, inter, fit=False)
    _emit(args, run.to_csv())
    return EXIT_OK


def _sidecar(args, summary: dict) -> None:
    if args.out:
        Path(args.out).with_suffix(".json").write_text(_dump(summary))
    else:
        sys.stderr.write(_dump(summary))


def cmd_figure(args) -> int:
    if args.which == "irb":
        rows, summary = figures.figure_irb(args.lengths, args.nseqs, args.seed, args.method, args.noiseless)
        _emit(args, figures.rows_to_csv(("scenario", "m", "p_surv", "std_error"), rows))
    else:
        if args.n < 1:
            raise UsageError("--n must be >= 1")
        rows, summary = figures.figure_scatter(args.n, args.seed)
        _emit(args, figures.rows_to_csv(figures.SCATTER_COLUMNS, rows))
    _sidecar(args, summary)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    shrink = 0.5 if args.fault_halve_halfwidth else 1.0
    results = []
    if args.suite in ("bounds", "all"):
        dims = args.dims or (2, 3, 4)
        results += verify.run_bounds(args.trials, dims, args.seed, args.tol, shrink)
    if args.suite in ("appendix", "all"):
        dims = args.dims or (2, 3, 4, 5, 6)
        results += verify.run_appendix(args.trials, dims, args.seed, args.tol)
    ok = all(r.ok for r in results)
    report = {
        "ok": ok,
        "results": [
            {k: r.as_dict()[k] for k in ("inequality", "dim", "trials", "min_slack", "max_violation", "ok")}
            for r in results
        ],
    }
    if args.format == "text":
        lines = [
            f"{r.inequality:<18} d={r.dim}  trials={r.trials:<7d} max_violation={r.max_violation:.3g}"
            f"  {'ok' if r.ok else 'VIOLATED'}"
            for r in results
        ]
        _emit(args, "\n".join(lines) + "\n")
    else:
        _emit(args, _dump(report))
    return EXIT_OK if ok else EXIT_VIOLATION


# -- parser --------------------------------------------------------------------

def _common(defaults: bool) -> argparse.ArgumentParser:
    # The global flags are accepted both before and after the subcommand.
    sup = argparse.SUPPRESS
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED if defaults else sup)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL if defaults else sup)
    p.add_argument("--format", choices=("json", "text", "csv"), default="json" if defaults else sup)
    p.add_argument("--out", default=None if defaults else sup)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common(False)
    parser = _Parser(prog="fidbound", description=__doc__.splitlines()[0], parents=[_common(True)])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("metrics", parents=[common], help="metrics of a channel file")
    p.add_argument("--channel", required=True)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("bounds", help="evaluate a composite-error bound")
    bsub = p.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    for kind in ("pair", "seq"):
        q = bsub.add_parser(kind, parents=[common])
        q.add_argument("--chi00", type=float, nargs="+", required=True)
        q.set_defaults(func=cmd_bounds)
    q = bsub.add_parser("interleaved", parents=[common])
    q.add_argument("--p-composite", type=float, required=True)
    q.add_argument("--u-ref", type=float, required=True)
    q.add_argument("--theta-ref", type=float, required=True)
    q.set_defaults(func=cmd_bounds)

    p = sub.add_parser("zoo", help="build or sample channels")
    zsub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    q = zsub.add_parser("make", parents=[common])
    q.add_argument("--kind", required=True, choices=sorted(_MAKERS))
    q.add_argument("--d", type=int, default=2)
    for name in ("p", "theta", "phi", "gamma", "lam"):
        q.add_argument(f"--{name}", type=float)
    q.add_argument("--probs", type=float, nargs="+")
    q.set_defaults(func=cmd_zoo)
    q = zsub.add_parser("random", parents=[common])
    q.add_argument("--d", type=int, default=2)
    q.add_argument("--kind", choices=("cptp", "unitary", "unital", "near-identity"), default="cptp")
    q.add_argument("--fidelity", type=float)
    q.add_argument("--unitarity", type=float)
    q.add_argument("--kraus-rank", type=int)
    q.set_defaults(func=cmd_zoo)

    p = sub.add_parser("rb", help="simulate or fit randomized benchmarking")
    rsub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    q = rsub.add_parser("simulate", parents=[common])
    q.add_argument("--mode", choices=("standard", "interleaved"), default="standard")
    q.add_argument("--gateset", choices=sorted(rb.GATESETS), default="clifford24")
    q.add_argument("--noise", help="channel JSON applied after every gate")
    q.add_argument("--gate", default="Z", help="interleaved gate: I, X, Y, Z, H, S or an index")
    q.add_argument("--gate-noise", help="channel JSON for the interleaved gate's own error")
    q.add_argument("--lengths", type=_int_list, default=list(rb.DEFAULT_LENGTHS))
    q.add_argument("--nseqs", type=int, default=rb.DEFAULT_NSEQS)
    q.add_argument("--method", choices=("sampled", "exact"), default="sampled")
    q.set_defaults(func=cmd_rb)
    q = rsub.add_parser("fit", parents=[common])
    q.add_argument("--in", dest="input", required=True)
    q.set_defaults(func=cmd_rb)

    p = sub.add_parser("figure", help="emit a figure dataset as CSV")
    fsub = p.add_subparsers(dest="which", required=True, parser_class=_Parser)
    q = fsub.add_parser("irb", parents=[common])
    q.add_argument("--lengths", type=_int_list, default=list(rb.DEFAULT_LENGTHS))
    q.add_argument("--nseqs", type=int, default=rb.DEFAULT_NSEQS)
    q.add_argument("--method", choices=("sampled", "exact"), default="sampled")
    q.add_argument("--noiseless", action="store_true")
    q.set_defaults(func=cmd_figure)
    q = fsub.add_parser("scatter", parents=[common])
    q.add_argument("--n", type=int, default=1000, help="random pairs per panel")
    q.set_defaults(func=cmd_figure)

    p = sub.add_parser("verify", parents=[common], help="Monte-Carlo soundness sweeps")
    p.add_argument("suite", nargs="?", choices=("all", "bounds", "appendix"), default="all")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--dims", type=_int_list)
    p.add_argument("--fault-halve-halfwidth", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return int(exc.code or 0)
    if args.out and not Path(args.out).resolve().parent.is_dir():
        print(f"fidbound: error: output directory does not exist: {args.out}", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"fidbound: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ChannelError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"fidbound: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
