"""Command line entry point: ``qforge demo|export-qasm|stats``."""

from __future__ import annotations

import argparse
import json
import sys

from qforge.simulator import SimulatorCapError

EXIT_OK = 0
EXIT_UNKNOWN_DEMO = 2
EXIT_SIM_CAP = 3
EXIT_UNWRITABLE = 4


def _build(name, args):
    from qforge.demos import run_demo

    params = {}
    if getattr(args, "n", None) is not None:
        params["n"] = args.n
    return run_demo(name, **params)


def stats_record(demo_name, session, workspace, mcx_recompilation=True):
    """Transpiled statistics of a compiled demo session (the JSON schema)."""
    qc = session.compile(workspace=workspace, mcx_recompilation=mcx_recompilation)
    st = qc.stats(transpiled=True)
    return {
        "demo": demo_name,
        "qubits": qc.num_qubits,
        "depth": st["depth"],
        "counts": st["counts"],
        "workspace": workspace,
        "mcx_recompilation": mcx_recompilation,
    }


def _print_table(table, out):
    out.write("label\tprobability\n")
    for label, prob in sorted(table.items(), key=lambda kv: (-kv[1], str(kv[0]))):
        out.write(f"{label}\t{prob:.10f}\n")


def cmd_demo(args, out):
    demo = _build(args.name, args)
    out.write(f"demo: {demo.name}\n")
    _print_table(demo.table, out)
    for key, value in demo.extra.items():
        if key == "factors":
            out.write(f"factors: {' '.join(str(f) for f in value)}\n")
        else:
            out.write(f"{key}: {value}\n")
    out.write("compile stats (transpiled):\n")
    for flag in (True, False):
        rec = stats_record(demo.name, demo.session, 0, flag)
        out.write(f"  mcx_recompilation={str(flag).lower()}: qubits={rec['qubits']} "
                  f"depth={rec['depth']} cx={rec['counts'].get('cx', 0)}\n")
    return EXIT_OK


def cmd_export_qasm(args, out):
    from qforge.circuit.qasm import to_qasm

    demo = _build(args.name, args)
    if args.raw:
        qc, _ = demo.session.to_circuit()
    else:
        qc = demo.session.compile()
    text = to_qasm(qc)
    try:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        sys.stderr.write(f"error: cannot write {args.output}: {exc.strerror or exc}\n")
        return EXIT_UNWRITABLE
    out.write(f"wrote {args.output} ({len(text.encode('utf-8'))} bytes)\n")
    return EXIT_OK


def cmd_stats(args, out):
    demo = _build(args.name, args)
    widths = [0] if args.workspace == 0 else [0, args.workspace]
    records = [stats_record(demo.name, demo.session, w) for w in widths]
    if args.json:
        out.write(json.dumps(records, indent=2, sort_keys=True) + "\n")
        return EXIT_OK
    for rec in records:
        cx = rec["counts"].get("cx", 0)
        out.write(f"workspace={rec['workspace']}: qubits={rec['qubits']} depth={rec['depth']} "
                  f"cx={cx}\n")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="qforge", description="Run and inspect built-in demos.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("demo", help="simulate a demo and print its outcome table")
    p.add_argument("name")
    p.add_argument("--n", type=int, default=None, help="number to factor (shor)")
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("export-qasm", help="write a demo circuit as OpenQASM 2.0")
    p.add_argument("name")
    p.add_argument("output")
    p.add_argument("--n", type=int, default=None)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--compiled", dest="raw", action="store_false",
                      help="compiled circuit with qubit reuse (default)")
    mode.add_argument("--raw", dest="raw", action="store_true",
                      help="uncompiled circuit, one qubit per logical qubit")
    p.set_defaults(func=cmd_export_qasm, raw=False)

    p = sub.add_parser("stats", help="compile statistics with and without workspace")
    p.add_argument("name")
    p.add_argument("--workspace", type=int, default=0)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None, out=None):
    from qforge.demos import DEMOS, EXTRA_DEMOS

    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    known = set(DEMOS) | (set(EXTRA_DEMOS) if args.command == "export-qasm" else set())
    if args.name not in known:
        sys.stderr.write(f"error: unknown demo {args.name!r}; choose from {', '.join(DEMOS)}\n")
        return EXIT_UNKNOWN_DEMO
    if getattr(args, "workspace", 0) < 0:
        sys.stderr.write("error: workspace must be non-negative\n")
        return EXIT_UNKNOWN_DEMO
    try:
        return args.func(args, out)
    except SimulatorCapError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_SIM_CAP


if __name__ == "__main__":
    sys.exit(main())
