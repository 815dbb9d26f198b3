"""laymat: pick low-error qubit layouts for routed circuits.

Exit codes: 0 success, 2 unreadable or malformed input, 3 no embedding.
JSON output is key-sorted so identical inputs give identical bytes.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .bench import rows_to_csv, run_bench
from .calibration import CalibrationError, LookupMiss, dumps_exact, error_map, synth_calibration
from .circuit import CircuitError, serialize_circuit, load_circuit
from .interaction import MODES, build_interaction_graph
from .noise import NoiseModel, simulate_fidelity
from .scoring import COST_FUNCTIONS, DEFAULT_TOL
from .selector import (DeviceCandidate, NoEmbeddingError, device_to_json, load_device,
                       ranked_layouts, remap, select_device)
from .subiso import ORDERINGS, SearchBudget
from .topology import TopologyError, heavy_hex, line, nairobi

__all__ = ["main", "build_parser"]

EXIT_INPUT = 2
EXIT_NO_EMBEDDING = 3


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _dump(obj) -> str:
    return dumps_exact(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _finite(x: float):
    return x if math.isfinite(x) else None


def _table(rows: list[dict], columns: list[str]) -> str:
    cells = [[str(r.get(c, "")) for c in columns] for r in rows]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths))]
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


def _budget(args) -> SearchBudget:
    return SearchBudget(args.max_visits, args.max_layouts)


def _devices(args) -> list[DeviceCandidate]:
    if not args.device:
        raise InputError("at least one --device is required")
    return [load_device(_read(p), default_name=Path(p).stem) for p in args.device]


def _single_device(args) -> DeviceCandidate:
    devs = _devices(args)
    if len(devs) != 1:
        raise InputError("this command takes exactly one --device")
    return devs[0]


def _scored_json(s, num_qubits: int) -> dict:
    return {"layout": s.layout.to_list(num_qubits), "score": s.score,
            "fidelity_estimate": s.fidelity_estimate, "tied_with": s.tied_with}


# ---------------------------------------------------------------------------
# commands

def cmd_graph(args, out) -> int:
    circuit = load_circuit(_read(args.circuit))
    out.write(_dump(build_interaction_graph(circuit, args.mode).to_json()))
    return 0


def cmd_find_layouts(args, out) -> int:
    circuit = load_circuit(_read(args.circuit))
    dev = _single_device(args)
    ranked, search = ranked_layouts(circuit, dev, args.mode, args.cost, _budget(args),
                                    args.ordering, args.tol)
    if args.plot:
        from .plotting import plot_scores
        plot_scores(ranked, args.plot, title=dev.name)
    rows = [_scored_json(s, circuit.num_qubits) for s in ranked]
    if args.format == "table":
        out.write(_table([{"rank": i, **r} for i, r in enumerate(rows)],
                         ["rank", "layout", "score", "tied_with"]))
    else:
        out.write(_dump({"device": dev.name, "mode": args.mode, "cost": args.cost,
                         "exhausted": search.exhausted, "visits_used": search.visits_used,
                         "num_layouts": len(rows), "layouts": rows}))
    if not ranked:
        why = "no embedding exists" if search.exhausted else "budget ran out before any embedding"
        print(f"laymat: {dev.name}: {why}", file=sys.stderr)
        return EXIT_NO_EMBEDDING
    return 0


def cmd_remap(args, out) -> int:
    circuit = load_circuit(_read(args.circuit))
    dev = _single_device(args)
    ranked, search = ranked_layouts(circuit, dev, args.mode, args.cost, _budget(args),
                                    args.ordering, args.tol)
    if not ranked:
        raise NoEmbeddingError(f"{dev.name}: no embedding", search.exhausted, search.visits_used)
    best = ranked[0]
    text = serialize_circuit(remap(circuit, best.layout, dev.coupling_map.num_qubits),
                             args.output_format)
    report = {"device": dev.name, **_scored_json(best, circuit.num_qubits)}
    if args.output:
        Path(args.output).write_text(text)
        report["output"] = args.output
    else:
        report["circuit"] = text
    if args.format == "table":
        out.write(_table([report], ["device", "layout", "score"]))
    else:
        out.write(_dump(report))
    return 0


def cmd_select_device(args, out) -> int:
    circuit = load_circuit(_read(args.circuit))
    report = select_device(circuit, _devices(args), args.mode, args.cost, _budget(args),
                           args.ordering, args.tol, workers=args.workers)
    data = report.to_json(circuit.num_qubits)
    if args.format == "table":
        rows = [{"device": d["device"],
                 "score": d["best"]["score"] if d["best"] else "-",
                 "layout": d["best"]["layout"] if d["best"] else "-",
                 "note": d["skip_reason"] or ""} for d in data["devices"]]
        out.write(_table(rows, ["device", "score", "layout", "note"]))
        out.write(f"winner: {data['winner']['device']}\n")
    else:
        out.write(_dump(data))
    return 0


def cmd_validate(args, out) -> int:
    circuit = load_circuit(_read(args.circuit))
    dev = _single_device(args)
    ranked, search = ranked_layouts(circuit, dev, args.mode, args.cost, _budget(args),
                                    args.ordering, args.tol)
    if not ranked:
        raise NoEmbeddingError(f"{dev.name}: no embedding", search.exhausted, search.visits_used)
    noise = NoiseModel(error_map(dev.calibration, args.mode), args.seed)
    n_phys = dev.coupling_map.num_qubits
    results = []
    for s in ranked:
        est = simulate_fidelity(remap(circuit, s.layout, n_phys), noise, args.shots, args.workers)
        results.append({"layout": s.layout.to_list(circuit.num_qubits), "score": s.score,
                        "sim_fidelity": est.fidelity, "stderr": est.stderr})
    rho = None
    if len(results) >= 3:
        from scipy.stats import spearmanr
        rho = _finite(float(spearmanr([-r["score"] for r in results],
                                      [r["sim_fidelity"] for r in results]).statistic))
    if args.plot:
        from .plotting import plot_validation
        plot_validation([r["score"] for r in results], [r["sim_fidelity"] for r in results],
                        [r["stderr"] for r in results], args.plot)
    if args.format == "table":
        out.write(_table(results, ["layout", "score", "sim_fidelity", "stderr"]))
    else:
        out.write(_dump({"device": dev.name, "shots": args.shots, "seed": args.seed,
                         "spearman": rho, "results": results}))
    return 0


def cmd_bench(args, out) -> int:
    rows = run_bench(args.widths, args.distance, args.depth, args.runs, args.seed)
    text = rows_to_csv(rows)
    if args.csv:
        Path(args.csv).write_text(text)
    else:
        out.write(text)
    if args.plot:
        from .plotting import plot_bench
        plot_bench(rows, args.plot)
    for r in rows:
        if r.regression and r.ordering == "vf2pp":
            print(f"laymat: regression: vf2pp slower than vf2 at width {r.width}", file=sys.stderr)
    return 0


def _topology(spec: str):
    kind, _, arg = spec.partition(":")
    try:
        if kind == "nairobi" and not arg:
            return nairobi()
        if kind == "line":
            return line(int(arg))
        if kind == "heavy-hex":
            return heavy_hex(int(arg))
    except ValueError as exc:
        raise InputError(f"bad topology {spec!r}: {exc}") from None
    raise InputError(f"bad topology {spec!r}; use nairobi, line:N or heavy-hex:D")


def cmd_device(args, out) -> int:
    cm = _topology(args.topology)
    snap = synth_calibration(cm, args.seed, args.profile, args.name, args.scale)
    out.write(_dump(device_to_json(DeviceCandidate(args.name or snap.device_name, cm, snap), exact=True)))
    return 0


# ---------------------------------------------------------------------------
# parser

def _positive_int(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _widths(text: str) -> list[int]:
    try:
        return [_positive_int(w) for w in text.split(",") if w]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated widths") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="laymat", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def search_opts(sp, devices=True):
        sp.add_argument("circuit", help="routed circuit (QASM subset or JSON)")
        if devices:
            sp.add_argument("--device", action="append", default=[],
                            help="device bundle JSON (repeatable for select-device)")
        sp.add_argument("--mode", choices=MODES, default="loose")
        sp.add_argument("--cost", choices=sorted(COST_FUNCTIONS), default="default")
        sp.add_argument("--max-visits", type=_positive_int, default=None)
        sp.add_argument("--max-layouts", type=_positive_int, default=None)
        sp.add_argument("--tol", type=float, default=DEFAULT_TOL)
        sp.add_argument("--ordering", choices=ORDERINGS, default="vf2pp")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--format", choices=("json", "table"), default="json")

    g = sub.add_parser("graph", help="print the interaction graph")
    g.add_argument("circuit")
    g.add_argument("--mode", choices=MODES, default="loose")
    g.set_defaults(func=cmd_graph)

    f = sub.add_parser("find-layouts", help="rank every embedding on one device")
    search_opts(f)
    f.add_argument("--plot", help="write a PNG of the sorted scores")
    f.set_defaults(func=cmd_find_layouts)

    r = sub.add_parser("remap", help="rewrite the circuit onto the best layout")
    search_opts(r)
    r.add_argument("-o", "--output", help="write the remapped circuit here")
    r.add_argument("--output-format", choices=("qasm", "json"), default="qasm")
    r.set_defaults(func=cmd_remap)

    s = sub.add_parser("select-device", help="best device and layout across a fleet")
    search_opts(s)
    s.add_argument("--workers", type=_positive_int, default=1)
    s.set_defaults(func=cmd_select_device)

    v = sub.add_parser("validate", help="simulate every ranked layout under calibrated noise")
    search_opts(v)
    v.add_argument("--shots", type=_positive_int, default=10_000)
    v.add_argument("--workers", type=_positive_int, default=1)
    v.add_argument("--plot", help="write a PNG of score against simulated fidelity")
    v.set_defaults(func=cmd_validate)

    b = sub.add_parser("bench", help="time vf2 and vf2pp orderings on heavy-hex")
    b.add_argument("--widths", type=_widths, default=[5, 10, 15])
    b.add_argument("--distance", type=int, default=23, help="heavy-hex distance (23 gives 1299 qubits)")
    b.add_argument("--depth", type=_positive_int, default=5)
    b.add_argument("--runs", type=_positive_int, default=10)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--csv", help="write CSV here instead of stdout")
    b.add_argument("--plot", help="write a PNG timing plot")
    b.set_defaults(func=cmd_bench)

    d = sub.add_parser("device", help="emit a synthetic device bundle")
    d.add_argument("--topology", default="nairobi", help="nairobi, line:N or heavy-hex:D")
    d.add_argument("--profile", choices=("uniform", "gradient", "hotspot"), default="uniform")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--scale", type=float, default=1.0)
    d.add_argument("--name")
    d.set_defaults(func=cmd_device)
    return p


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except NoEmbeddingError as exc:
        print(f"laymat: {exc}", file=sys.stderr)
        return EXIT_NO_EMBEDDING
    except (InputError, CircuitError, CalibrationError, TopologyError, LookupMiss,
            json.JSONDecodeError) as exc:
        print(f"laymat: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
