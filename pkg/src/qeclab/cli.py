"""Command-line surface for the lab.

Subcommands:

    verify-code      codeword, correction-condition and syndrome-table report
    compile          lower a circuit file to laser pulses and count them
    simulate-pulses  run a pulse file on the trap model and report residuals
    noise            coherence of a protection scheme at given times (CSV)
    figure5          full coherence-curve CSV for all schemes
    search           randomized hunt for cheap valid encoders

Exit codes: 0 success, 2 validation failure, 3 I/O error. The environment
variable QECC_SEED provides the default seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import codes as codes_mod
from .circuits import CircuitFormatError, circuit_to_dict, parse_circuit, serialize_circuit
from .codes import (
    build_syndrome_table,
    check_knill_laflamme,
    decode_and_correct,
    encode,
    apply_error,
    encoder_alignment_error,
    five_qubit_code,
    three_qubit_phase_code,
    two_qubit_zeno_code,
)
from .iontrap import (
    compile_circuit,
    per_gate_costs,
    pulses_from_json,
    pulses_to_json,
    simulate_pulse_sequence,
    verify_compilation,
)
from .noise import (
    IPLUS,
    PLUS,
    Scheme,
    coherence,
    curves_to_csv,
    figure5_data,
    mc_coherence,
    run_scheme,
    scheme_coherence,
)
from .search import SearchConfig, is_valid_perfect_code, search
from .states import PureState, fidelity

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3

_CODES = {
    "five-qubit": five_qubit_code,
    "phase3": three_qubit_phase_code,
    "zeno2": two_qubit_zeno_code,
}


def _default_seed() -> int:
    return int(os.environ.get("QECC_SEED", "0"))


def _read_text(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise _IOFailure(f"cannot read {path}: {exc}") from None


def _write_text(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise _IOFailure(f"cannot write {path}: {exc}") from None


class _IOFailure(Exception):
    pass


def _emit(doc: dict) -> None:
    print(json.dumps(doc, indent=2, sort_keys=True))


def cmd_verify_code(args) -> int:
    factory = _CODES[args.code]
    if args.encoder is not None:
        if args.code != "five-qubit":
            raise ValueError("--encoder is only supported for the five-qubit code")
        encoder = parse_circuit(_read_text(args.encoder))
        try:
            code = five_qubit_code(encoder=encoder)
        except ValueError as exc:
            # still report what went wrong at the codeword level
            validity = is_valid_perfect_code(encoder)
            _emit({
                "code": args.code,
                "valid": False,
                "reason": str(exc),
                "kl_ok": bool(validity.valid),
                "worst_violation": validity.violation,
            })
            return EXIT_VALIDATION
    else:
        code = factory()

    report = {"code": args.code, "n_physical": code.n_physical}
    if code.encoder is not None:
        report["encoder_alignment_error"] = encoder_alignment_error(code)
        report["encoder_ops"] = len(code.encoder.ops)
        report["encoder_pulse_cost"] = compile_circuit(code.encoder).cost

    kl = check_knill_laflamme(code, code.error_classes)
    report["knill_laflamme"] = {
        "ok": bool(kl.ok),
        "worst_violation": kl.worst_violation,
        "error_classes": [e.label() for e in code.error_classes],
    }

    if code.detection_only:
        report["detection_only"] = True
        report["note"] = ("this code only detects errors; decoding applies no "
                          "correction, so no syndrome table is produced")
        report["valid"] = bool(kl.ok)
        _emit(report)
        return EXIT_OK

    table = build_syndrome_table(code)
    report["syndrome_table"] = table.to_dict()["corrections"]

    rng = np.random.default_rng(args.seed)
    fidelities = {}
    worst = 1.0
    for error in code.error_classes:
        f_min = 1.0
        for _ in range(args.trials):
            raw = rng.normal(size=2) + 1j * rng.normal(size=2)
            psi = PureState(1, raw / np.linalg.norm(raw))
            corrupted = apply_error(encode(code, psi), error)
            recovered, _ = decode_and_correct(code, table, corrupted, rng=rng)
            f_min = min(f_min, fidelity(recovered, psi))
        fidelities[error.label()] = f_min
        worst = min(worst, f_min)
    report["error_fidelities"] = fidelities
    report["worst_fidelity"] = worst
    report["valid"] = bool(kl.ok) and worst >= 1.0 - 1e-10
    _emit(report)
    return EXIT_OK if report["valid"] else EXIT_VALIDATION


def cmd_compile(args) -> int:
    circuit = parse_circuit(_read_text(args.circuit))
    seq = compile_circuit(circuit)
    doc = {"n_qubits": circuit.n_qubits, "total_pulses": seq.cost}
    if args.report == "full":
        doc["per_gate"] = [
            {"kind": op.kind, "controls": list(op.controls),
             "targets": list(op.targets), "pulses": cost}
            for op, cost in per_gate_costs(circuit)
        ]
        check = verify_compilation(circuit, seq)
        doc["verified"] = bool(check.ok)
        doc["max_deviation"] = check.max_deviation
        doc["leakage"] = check.leakage
        doc["phonon_residual"] = check.phonon_residual
        doc["pulses"] = pulses_to_json(seq)
    if args.out is not None:
        _write_text(args.out, json.dumps(pulses_to_json(seq), indent=2))
        doc["pulse_file"] = args.out
    _emit(doc)
    return EXIT_OK


def cmd_simulate_pulses(args) -> int:
    docs = json.loads(_read_text(args.pulses))
    seq = pulses_from_json(docs)
    result = simulate_pulse_sequence(seq, args.ions)
    doc = {
        "n_ions": args.ions,
        "n_pulses": seq.cost,
        "leakage": result.leakage,
        "phonon_residual": result.phonon_residual,
    }
    if args.unitary:
        doc["unitary"] = [[[float(v.real), float(v.imag)] for v in row] for row in result.unitary]
    _emit(doc)
    return EXIT_OK


def _psi_from_args(args) -> PureState:
    if args.psi == "plus":
        return PLUS
    if args.psi == "iplus":
        return IPLUS
    if args.alpha is None or args.beta is None:
        raise ValueError("--psi custom needs --alpha and --beta")
    amps = np.array([complex(args.alpha), complex(args.beta)])
    norm = np.linalg.norm(amps)
    if norm < 1e-12:
        raise ValueError("custom state has zero norm")
    psi = PureState(1, amps / norm)
    if abs(psi.amplitudes[0]) < 1e-9 or abs(psi.amplitudes[1]) < 1e-9:
        raise ValueError(
            "basis states have no off-diagonal coherence to track; "
            "pick a superposition input"
        )
    return psi


def cmd_noise(args) -> int:
    psi = _psi_from_args(args)
    scheme = Scheme(args.scheme, args.n)
    lines = ["t,scheme,n,C_exact,C_mc,mc_stderr"]
    for t in args.t:
        if t < 0:
            raise ValueError("time must be nonnegative")
        c_exact = scheme_coherence(scheme, psi, t)
        mc = se = ""
        if args.shots is not None:
            c_mc, stderr = mc_coherence(scheme, psi, t, args.shots, seed=args.seed)
            mc, se = f"{c_mc:.12g}", f"{stderr:.12g}"
        lines.append(f"{t:.12g},{scheme.kind},{scheme.repetitions},{c_exact:.12g},{mc},{se}")
    print("\n".join(lines))
    return EXIT_OK


def cmd_figure5(args) -> int:
    curves = figure5_data(args.tmax, args.steps, shots=args.shots, seed=args.seed)
    csv_text = curves_to_csv(curves)
    _write_text(args.out, csv_text)
    print(f"wrote {args.out}: {sum(len(c.samples) for c in curves)} rows")
    return EXIT_OK


def cmd_search(args) -> int:
    start = None
    if args.start == "reference":
        start = five_qubit_code().encoder
    elif args.start is not None:
        start = parse_circuit(_read_text(args.start))
    alphabet = tuple(args.alphabet.split(",")) if args.alphabet else SearchConfig().alphabet
    cfg = SearchConfig(
        alphabet=alphabet,
        max_ops=args.max_ops,
        budget=args.budget,
        restarts=args.restarts,
        seed=args.seed,
        start=start,
        validity_mode=args.mode,
    )
    result = search(cfg)
    doc = result.to_dict()
    if result.best is not None and args.out is not None:
        _write_text(args.out, serialize_circuit(result.best.circuit))
        doc["circuit_file"] = args.out
    _emit(doc)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qeclab", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-code", help="validate a code and print its report")
    p.add_argument("--code", choices=sorted(_CODES), required=True)
    p.add_argument("--encoder", help="alternative encoder circuit (.qc.json)")
    p.add_argument("--trials", type=int, default=5, help="random inputs per error class")
    p.add_argument("--seed", type=int, default=_default_seed())
    p.set_defaults(func=cmd_verify_code)

    p = sub.add_parser("compile", help="lower a circuit to laser pulses")
    p.add_argument("--circuit", required=True, help="circuit file (.qc.json)")
    p.add_argument("--report", choices=("count", "full"), default="count")
    p.add_argument("--out", help="write the pulse program to this JSON file")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("simulate-pulses", help="run a pulse program on the trap model")
    p.add_argument("--pulses", required=True, help="pulse program JSON file")
    p.add_argument("--ions", type=int, required=True)
    p.add_argument("--unitary", action="store_true", help="include the induced operator")
    p.set_defaults(func=cmd_simulate_pulses)

    p = sub.add_parser("noise", help="coherence of a scheme under phase diffusion")
    p.add_argument("--scheme", choices=("uncoded", "zeno2", "phase3"), required=True)
    p.add_argument("--t", type=float, nargs="+", required=True)
    p.add_argument("--n", type=int, default=1, help="evenly spaced repetitions")
    p.add_argument("--psi", choices=("plus", "iplus", "custom"), default="iplus")
    p.add_argument("--alpha", help="custom amplitude for |0>, e.g. 0.6")
    p.add_argument("--beta", help="custom amplitude for |1>, e.g. 0.8j")
    p.add_argument("--shots", type=int, help="add a Monte-Carlo column with this many trajectories")
    p.add_argument("--seed", type=int, default=_default_seed())
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("figure5", help="write the coherence-curve CSV")
    p.add_argument("--tmax", type=float, default=3.0)
    p.add_argument("--steps", type=int, default=60)
    p.add_argument("--out", required=True)
    p.add_argument("--shots", type=int)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.set_defaults(func=cmd_figure5)

    p = sub.add_parser("search", help="randomized search for cheap encoders")
    p.add_argument("--budget", type=int, default=2000)
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--max-ops", type=int, default=40)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--start", help="'reference' or a circuit file to seed the climb")
    p.add_argument("--alphabet", help="comma-separated gate kinds")
    p.add_argument("--mode", choices=("auto", "exact", "kl"), default="auto")
    p.add_argument("--out", help="write the best valid circuit here (.qc.json)")
    p.set_defaults(func=cmd_search)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _IOFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (CircuitFormatError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
