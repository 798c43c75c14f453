"""``pauliseq`` command line.

Every command resolves its settings as flags > ``--config`` JSON > defaults,
and embeds the resolved settings in the artifact it writes.  Artifacts go to
``--output`` (stdout when omitted); human-readable summaries go to stderr.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 I/O error.
"""

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .decomposer import Decomposition, decompose, verify
from .exceptions import InvalidInputError, PauliseqError, ResidualError, StagnationError
from .expansion import DEFAULT_TOLERANCE, expand
from .gates import GateProgram, lower
from .hamiltonian import ChainSpec, evolve
from .qst import ProtocolRun, prepared_qubit, robustness_sweep, run_protocol
from .sequences import generate
from .serialization import artifact, dumps, load_matrix, read_json, tool_version, unwrap

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

DEFAULTS = {
    "spec": None,
    "matrix": None,
    "n": 3,
    "J": 1.0,
    "delta": 0.0,
    "t": None,
    "tolerance": DEFAULT_TOLERANCE,
    "residual_tol": 1e-8,
    "max_steps": 500,
    "top": 8,
    "trace": None,
    "phi": None,
    "phi_points": 32,
    "deltas": [0.0, 0.05, 0.1, 0.2],
    "plot": None,
    "input": None,
    "artifact": None,
    "threshold": 1e-9,
    "format": "json",
    "output": None,
}


def _floats(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    parts = [p for p in str(text).split(",") if p.strip()]
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise InvalidInputError(f"bad number list {text!r}") from exc


def resolve(args, keys):
    """Merge defaults, the optional config file, and explicit flags."""
    cfg = {k: DEFAULTS[k] for k in keys}
    if args.config:
        data = read_json(args.config)
        if not isinstance(data, dict):
            raise InvalidInputError(f"{args.config}: config must be a JSON object")
        unknown = set(data) - set(keys)
        if unknown:
            raise InvalidInputError(f"unknown config keys for {args.command}: {sorted(unknown)}")
        cfg.update(data)
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    for k in ("tolerance", "residual_tol", "threshold"):
        if k in cfg and not (float(cfg[k]) > 0):
            raise InvalidInputError(f"{k} must be positive, got {cfg[k]}")
    return cfg


def _chain(cfg):
    if cfg.get("spec"):
        spec = ChainSpec.from_dict(unwrap(read_json(cfg["spec"])))
    else:
        spec = ChainSpec.ideal_chain(int(cfg["n"]), float(cfg["J"]), float(cfg["delta"]))
    return spec


def _target(cfg):
    """Target unitary from a matrix file or a chain description."""
    if cfg.get("matrix"):
        return load_matrix(cfg["matrix"])
    return evolve(_chain(cfg), cfg.get("t"))


def _phi_grid(cfg):
    if cfg.get("phi") is not None:
        grid = _floats(cfg["phi"])
    else:
        k = int(cfg["phi_points"])
        grid = [2 * math.pi * j / k for j in range(k)] if k > 0 else []
    if not grid:
        raise InvalidInputError("phi grid is empty")
    return grid


def _emit(cfg, text):
    if cfg.get("output"):
        Path(cfg["output"]).write_text(text)
    else:
        sys.stdout.write(text)


def _note(msg):
    print(msg, file=sys.stderr)


SOURCE = ("spec", "matrix", "n", "J", "delta", "t")


def cmd_expand(args):
    cfg = resolve(args, SOURCE + ("tolerance", "top", "output"))
    e = expand(_target(cfg), float(cfg["tolerance"]))
    _emit(cfg, dumps(artifact("expansion", cfg, e.to_dict())))
    _note(f"support size {len(e)}, total norm {e.total_norm:.12g}")
    for p, c in e.top(int(cfg["top"])):
        _note(f"  {p.to_label('product'):>16}  {c.real:+.12f} {c.imag:+.12f}i")
    return EXIT_OK


def cmd_decompose(args):
    cfg = resolve(args, SOURCE + ("tolerance", "residual_tol", "max_steps", "trace", "output"))
    U = _target(cfg)
    try:
        d, trace = decompose(U, float(cfg["tolerance"]), float(cfg["residual_tol"]),
                             int(cfg["max_steps"]), return_trace=True)
    except StagnationError as exc:
        if cfg["trace"] and exc.trace is not None:
            Path(cfg["trace"]).write_text(exc.trace.to_jsonl())
            _note(f"partial trace written to {cfg['trace']}")
        raise
    if cfg["trace"]:
        Path(cfg["trace"]).write_text(trace.to_jsonl())
    _emit(cfg, dumps(artifact("decomposition", cfg, d.to_dict())))
    _note(f"factors {len(d)}, fidelity {verify(d, U).fidelity:.15f}, residual {d.residual:.3e}")
    return EXIT_OK


def cmd_gen_qst(args):
    cfg = resolve(args, ("n", "J", "output"))
    n = int(cfg["n"])
    seq = generate(n)
    d = seq.to_decomposition(evolve(ChainSpec.ideal_chain(n, float(cfg["J"]))))
    _emit(cfg, dumps(artifact("decomposition", cfg, d.to_dict())))
    _note(f"n={n}: {len(seq)} factors, residual {d.residual:.3e}")
    return EXIT_OK


def cmd_qst(args):
    cfg = resolve(args, ("spec", "n", "J", "delta", "t", "phi", "phi_points", "format", "output"))
    spec = _chain(cfg)
    U = evolve(spec, cfg.get("t"))
    grid = _phi_grid(cfg)
    rows = []
    for phi in grid:
        r = run_protocol(ProtocolRun(prepared_qubit(phi), U))
        rows.append({
            "phi": phi, "signal": r.signal, "sin_phi": math.sin(phi),
            "fidelity_branch0": r.fidelity_branch0, "fidelity_branch1": r.fidelity_branch1,
            "prob_branch0": r.prob_branch0, "prob_branch1": r.prob_branch1,
            "phase_error": r.phase_error,
        })
    if cfg["format"] == "csv":
        cols = list(rows[0])
        text = ",".join(cols) + "\n" + "".join(
            ",".join(format(row[c], ".17g") for c in cols) + "\n" for row in rows
        )
    else:
        text = dumps(artifact("qst", cfg, {"chain": spec.to_dict(), "rows": rows}))
    _emit(cfg, text)
    _note(f"n={spec.n}: peak signal {max(r['signal'] for r in rows):.12f}, "
          f"min branch fidelity {min(min(r['fidelity_branch0'], r['fidelity_branch1']) for r in rows):.12f}")
    return EXIT_OK


def cmd_sweep(args):
    cfg = resolve(args, ("spec", "n", "J", "deltas", "phi", "phi_points", "plot", "output"))
    cfg["deltas"] = _floats(cfg["deltas"])
    if not cfg["deltas"]:
        raise InvalidInputError("deltas list is empty")
    base = _chain({**cfg, "delta": 0.0})
    table = robustness_sweep(base, cfg["deltas"], _phi_grid(cfg))
    _emit(cfg, table.to_csv())
    if cfg["plot"]:
        Path(cfg["plot"]).write_text(dumps(artifact("sweep-plot", cfg, table.to_plot_data())))
    for s in table.summary:
        _note(f"deltaJ={s.delta_j:+.6g}  peak {s.peak_signal:.12f}  phase error {s.phase_error:.6e}")
    return EXIT_OK


def cmd_lower(args):
    cfg = resolve(args, ("input", "format", "output"))
    if not cfg["input"]:
        raise InvalidInputError("lower needs --input DECOMPOSITION.json")
    d = Decomposition.from_dict(unwrap(read_json(cfg["input"])))
    prog = lower(d)
    text = prog.to_text() if cfg["format"] == "text" else dumps(artifact("gate-program", cfg, prog.to_dict()))
    _emit(cfg, text)
    _note(f"{len(prog)} gates, certified residual {prog.certified_residual:.3e}")
    return EXIT_OK


def _load_artifact(path):
    data = unwrap(read_json(path))
    if isinstance(data, dict) and "gates" in data:
        prog = GateProgram.from_dict(data)
        return prog.n, prog.to_matrix(include_phase=True)
    d = Decomposition.from_dict(data)
    return d.n, d.to_matrix()


def cmd_verify(args):
    cfg = resolve(args, SOURCE + ("artifact", "threshold", "output"))
    if not cfg["artifact"]:
        raise InvalidInputError("verify needs --artifact FILE")
    _, V = _load_artifact(cfg["artifact"])
    U = _target(cfg)
    if U.shape != V.shape:
        raise InvalidInputError(f"artifact is {V.shape[0]}-dimensional, target {U.shape[0]}")
    fidelity = float(abs(np.vdot(V, U)) / U.shape[0])
    residual = float(np.max(np.abs(V - U)))
    passed = fidelity >= 1 - float(cfg["threshold"])
    result = {"fidelity": fidelity, "residual": residual, "passed": passed}
    _emit(cfg, dumps(artifact("verification", cfg, result)))
    _note(f"fidelity {fidelity:.15f}, residual {residual:.3e}: {'PASS' if passed else 'FAIL'}")
    if not passed:
        raise ResidualError(f"fidelity {fidelity:.12g} below 1 - {cfg['threshold']}")
    return EXIT_OK


def _source_flags(p):
    p.add_argument("--spec", help="chain spec JSON")
    p.add_argument("--matrix", help="unitary as .npy or JSON {real, imag}")
    _chain_flags(p)
    p.add_argument("--t", type=float, help="evolution time (default pi/4J)")


def _chain_flags(p):
    p.add_argument("--n", type=int, help="chain length")
    p.add_argument("--J", type=float, help="base coupling")
    p.add_argument("--delta", type=float, help="error added to every bond")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pauliseq",
        description="Synthesize and check Pauli-exponential sequences for spin-chain transfer.",
    )
    parser.add_argument("--version", action="store_true", help="print version and exit")
    sub = parser.add_subparsers(dest="command")

    def command(name, func, help):
        p = sub.add_parser(name, help=help)
        p.set_defaults(func=func)
        p.add_argument("--config", help="JSON file of settings; flags override it")
        p.add_argument("-o", "--output", help="artifact path (default stdout)")
        return p

    p = command("expand", cmd_expand, "Pauli expansion of a unitary")
    _source_flags(p)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--top", type=int, help="terms to print")

    p = command("decompose", cmd_decompose, "factor a unitary into Pauli exponentials")
    _source_flags(p)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--residual-tol", dest="residual_tol", type=float)
    p.add_argument("--max-steps", dest="max_steps", type=int)
    p.add_argument("--trace", help="write the reduction trace as JSON lines")

    p = command("gen-qst", cmd_gen_qst, "closed-form transfer sequence")
    p.add_argument("--n", type=int)
    p.add_argument("--J", type=float)

    p = command("qst", cmd_qst, "simulate the transfer protocol over a phi grid")
    p.add_argument("--spec")
    _chain_flags(p)
    p.add_argument("--t", type=float)
    p.add_argument("--phi", help="comma-separated input angles")
    p.add_argument("--phi-points", dest="phi_points", type=int)
    p.add_argument("--format", choices=("json", "csv"))

    p = command("sweep", cmd_sweep, "readout robustness against coupling errors")
    p.add_argument("--spec")
    p.add_argument("--n", type=int)
    p.add_argument("--J", type=float)
    p.add_argument("--deltas", help="comma-separated bond errors")
    p.add_argument("--phi", help="comma-separated input angles")
    p.add_argument("--phi-points", dest="phi_points", type=int)
    p.add_argument("--plot", help="also write plot data JSON here")

    p = command("lower", cmd_lower, "lower a decomposition to primitive gates")
    p.add_argument("--input")
    p.add_argument("--format", choices=("json", "text"))

    p = command("verify", cmd_verify, "check an artifact against a target unitary")
    p.add_argument("--artifact")
    _source_flags(p)
    p.add_argument("--threshold", type=float, help="pass iff fidelity >= 1 - threshold")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.version:
        print(tool_version())
        return EXIT_OK
    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except PauliseqError as exc:
        _note(f"error: {exc}")
        return exc.exit_code
    except OSError as exc:
        _note(f"I/O error: {exc}")
        return EXIT_IO
    except json.JSONDecodeError as exc:
        _note(f"error: {exc}")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
