"""Randomized search for cheap encoder circuits.

Hill climbing with random restarts over op-level moves (insert, delete,
replace, swap two ops). A candidate is scored lexicographically: validity
first, then pulse cost (via the ion-trap compiler) for valid circuits or the
worst correction-condition violation for invalid ones, then op count, then a
stable textual encoding. The best *valid* candidate can only improve over the
run, and every reported-valid candidate is re-checked independently.

Restarts are keyed by (seed, restart index), so a run is reproducible and
restarts could execute in any order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .circuits import Circuit, GateOp, SINGLE_QUBIT_KINDS, apply_circuit, serialize_circuit
from .codes import CodeSpec, check_knill_laflamme, five_qubit_codewords, single_qubit_error_classes
from .iontrap import compile_circuit
from .states import PureState

DEFAULT_ALPHABET = SINGLE_QUBIT_KINDS + ("CNOT", "CPHASE")


@dataclass(frozen=True)
class ValidityResult:
    valid: bool
    mode: Optional[str]        # "exact" | "kl" | None
    violation: float           # 0 when valid; worst violation otherwise

    def __bool__(self) -> bool:
        return self.valid


def circuit_codewords(circuit: Circuit) -> tuple:
    """Images of |0>|0...0> and |1>|0...0> under the circuit."""
    n = circuit.n_qubits
    w0 = apply_circuit(circuit, PureState.basis(n, 0))
    w1 = apply_circuit(circuit, PureState.basis(n, 1 << (n - 1)))
    return w0, w1


def is_valid_perfect_code(circuit: Circuit, mode: str = "auto") -> ValidityResult:
    """Does the circuit encode a code correcting every single-qubit error?

    ``mode="exact"`` also demands the generated codewords match the reference
    five-qubit codewords up to one common global phase; ``"kl"`` accepts any
    distance-3 code; ``"auto"`` reports the strongest property that holds.
    """
    if circuit.n_qubits != 5:
        raise ValueError("the perfect-code check applies to 5-qubit circuits")
    w0, w1 = circuit_codewords(circuit)
    overlap = abs(np.vdot(w0.amplitudes, w1.amplitudes))
    if overlap > 1e-10:
        return ValidityResult(False, None, float(overlap))

    exact = _matches_reference(w0, w1)
    if mode == "exact":
        if exact:
            return ValidityResult(True, "exact", 0.0)
        return ValidityResult(False, None, _exact_mismatch(w0, w1))

    candidate = CodeSpec("candidate", 5, w0, w1)
    kl = check_knill_laflamme(candidate, single_qubit_error_classes(5))
    if not kl.ok:
        return ValidityResult(False, None, kl.worst_violation)
    return ValidityResult(True, "exact" if exact else "kl", 0.0)


def _matches_reference(w0: PureState, w1: PureState, atol: float = 1e-10) -> bool:
    ref0, ref1 = five_qubit_codewords()
    z0 = np.vdot(ref0.amplitudes, w0.amplitudes)
    z1 = np.vdot(ref1.amplitudes, w1.amplitudes)
    return abs(abs(z0) - 1) < atol and abs(z0 - z1) < atol


def _exact_mismatch(w0: PureState, w1: PureState) -> float:
    ref0, ref1 = five_qubit_codewords()
    z0 = np.vdot(ref0.amplitudes, w0.amplitudes)
    z1 = np.vdot(ref1.amplitudes, w1.amplitudes)
    return float(max(abs(abs(z0) - 1), abs(z0 - z1)))


def pulse_cost(circuit: Circuit) -> int:
    return compile_circuit(circuit).cost


@dataclass(frozen=True)
class SearchConfig:
    n_qubits: int = 5
    alphabet: tuple = DEFAULT_ALPHABET
    max_ops: int = 40
    budget: int = 2000
    restarts: int = 4
    seed: int = 0
    start: Optional[Circuit] = None
    validity_mode: str = "auto"

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if not self.alphabet:
            raise ValueError("alphabet must be nonempty")
        bad = [k for k in self.alphabet if k not in DEFAULT_ALPHABET]
        if bad:
            raise ValueError(f"unknown gate kinds in alphabet: {bad}")


@dataclass(frozen=True)
class Candidate:
    circuit: Circuit
    cost: int
    valid: bool
    mode: Optional[str]
    violation: float = 0.0


@dataclass(frozen=True)
class HistoryEntry:
    restart: int
    iteration: int
    cost: int
    valid: bool
    best_valid_cost: Optional[int]


@dataclass(frozen=True)
class SearchResult:
    best: Optional[Candidate]          # best valid candidate, if any found
    best_invalid: Optional[Candidate]  # diagnostic when nothing valid was found
    history: tuple
    seed: int
    iterations: int

    def to_dict(self) -> dict:
        doc = {
            "seed": self.seed,
            "iterations": self.iterations,
            "found_valid": self.best is not None,
        }
        if self.best is not None:
            doc["best_cost"] = self.best.cost
            doc["best_ops"] = len(self.best.circuit.ops)
            doc["validity_mode"] = self.best.mode
        if self.best_invalid is not None:
            doc["best_invalid_violation"] = self.best_invalid.violation
        doc["cost_trace"] = [
            {"restart": h.restart, "iteration": h.iteration,
             "cost": h.cost, "valid": h.valid, "best_valid_cost": h.best_valid_cost}
            for h in self.history
        ]
        return doc


def random_op(n_qubits: int, alphabet: Sequence[str], rng: np.random.Generator) -> GateOp:
    if n_qubits < 2:
        alphabet = [k for k in alphabet if k in SINGLE_QUBIT_KINDS]
        if not alphabet:
            raise ValueError("alphabet has no single-qubit kinds for a 1-qubit register")
    kind = alphabet[rng.integers(len(alphabet))]
    if kind in SINGLE_QUBIT_KINDS:
        return GateOp(kind, (int(rng.integers(n_qubits)),))
    if kind == "CNOT":
        c, t = rng.choice(n_qubits, size=2, replace=False)
        return GateOp("CNOT", (int(t),), (int(c),))
    # CPHASE: random split of 2..n qubits into controls and targets
    size = int(rng.integers(2, n_qubits + 1))
    chosen = rng.choice(n_qubits, size=size, replace=False)
    cut = int(rng.integers(1, size))
    return GateOp("CPHASE", tuple(int(q) for q in sorted(chosen[cut:])),
                  tuple(int(q) for q in sorted(chosen[:cut])))


def random_circuit(n_qubits: int, n_ops: int, rng: np.random.Generator,
                   alphabet: Sequence[str] = DEFAULT_ALPHABET) -> Circuit:
    return Circuit(n_qubits, tuple(random_op(n_qubits, alphabet, rng) for _ in range(n_ops)))


def mutate(circuit: Circuit, cfg: SearchConfig, rng: np.random.Generator) -> Circuit:
    ops = list(circuit.ops)
    moves = ["insert", "replace", "swap", "delete"]
    move = moves[rng.integers(len(moves))]
    if move == "insert" and len(ops) < cfg.max_ops:
        ops.insert(int(rng.integers(len(ops) + 1)), random_op(cfg.n_qubits, cfg.alphabet, rng))
    elif move == "delete" and ops:
        ops.pop(int(rng.integers(len(ops))))
    elif move == "replace" and ops:
        ops[int(rng.integers(len(ops)))] = random_op(cfg.n_qubits, cfg.alphabet, rng)
    elif move == "swap" and len(ops) >= 2:
        i, j = rng.choice(len(ops), size=2, replace=False)
        ops[i], ops[j] = ops[j], ops[i]
    else:
        ops.append(random_op(cfg.n_qubits, cfg.alphabet, rng))
    return Circuit(cfg.n_qubits, tuple(ops))


def _evaluate(circuit: Circuit, cfg: SearchConfig,
              validator: Callable[[Circuit], ValidityResult]) -> Candidate:
    res = validator(circuit)
    return Candidate(circuit, pulse_cost(circuit), res.valid, res.mode, res.violation)


def _score(cand: Candidate):
    lex = json.dumps([[op.kind, list(op.controls), list(op.targets)] for op in cand.circuit.ops])
    penalty = float(cand.cost) if cand.valid else 1e6 + cand.violation
    return (0 if cand.valid else 1, penalty, len(cand.circuit.ops), lex)


def _accept_key(cand: Candidate):
    """Acceptance ignores the textual tie-breaker so equal-quality proposals
    are taken; walking plateaus is what gets the climb off flat regions."""
    penalty = float(cand.cost) if cand.valid else 1e6 + cand.violation
    return (0 if cand.valid else 1, penalty, len(cand.circuit.ops))


def search(cfg: SearchConfig,
           validator: Optional[Callable[[Circuit], ValidityResult]] = None) -> SearchResult:
    """Hill-climb from the start circuit (or a random one per restart).

    Returns the cheapest valid candidate found, plus the full cost trace.
    When the budget runs out without a valid candidate the result carries the
    least-violating circuit as a diagnostic instead.
    """
    if validator is None:
        validator = lambda c: is_valid_perfect_code(c, cfg.validity_mode)

    best_valid: Optional[Candidate] = None
    best_invalid: Optional[Candidate] = None
    history = []
    iterations = 0
    per_restart = max(1, cfg.budget // max(1, cfg.restarts))

    for restart in range(cfg.restarts):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=cfg.seed, spawn_key=(restart,)))
        if cfg.start is not None:
            current = _evaluate(cfg.start, cfg, validator)
        else:
            n_ops = int(rng.integers(1, cfg.max_ops + 1))
            current = _evaluate(random_circuit(cfg.n_qubits, n_ops, rng, cfg.alphabet), cfg, validator)

        for it in range(per_restart):
            iterations += 1
            proposal = _evaluate(mutate(current.circuit, cfg, rng), cfg, validator)
            if _accept_key(proposal) <= _accept_key(current):
                current = proposal
            if current.valid and (best_valid is None or current.cost < best_valid.cost):
                best_valid = current
                history.append(HistoryEntry(restart, it, current.cost, True,
                                            best_valid.cost))
            elif not current.valid and best_valid is None and (
                    best_invalid is None or current.violation < best_invalid.violation):
                best_invalid = current
                history.append(HistoryEntry(restart, it, current.cost, False, None))

    if best_valid is not None:
        recheck = validator(best_valid.circuit)
        if not recheck.valid:
            raise AssertionError("search bookkeeping reported an invalid circuit as valid")
        best_invalid = None
    return SearchResult(best_valid, best_invalid, tuple(history), cfg.seed, iterations)


def exhaustive_search(cfg: SearchConfig,
                      validator: Optional[Callable[[Circuit], ValidityResult]] = None) -> SearchResult:
    """Enumerate every circuit up to ``max_ops`` ops over the alphabet.

    Only feasible for tiny alphabets and very short circuits; used as an
    oracle to sanity-check the randomized search on toy problems.
    """
    if validator is None:
        validator = lambda c: is_valid_perfect_code(c, cfg.validity_mode)
    if cfg.max_ops > 4:
        raise ValueError("exhaustive search is limited to max_ops <= 4")

    all_ops = []
    n = cfg.n_qubits
    for kind in cfg.alphabet:
        if kind in SINGLE_QUBIT_KINDS:
            all_ops += [GateOp(kind, (q,)) for q in range(n)]
        elif kind == "CNOT":
            all_ops += [GateOp("CNOT", (t,), (c,)) for c in range(n) for t in range(n) if c != t]
        else:
            all_ops += [GateOp("CPHASE", (t,), (c,)) for c in range(n) for t in range(n) if c != t]

    import itertools

    best_valid = None
    count = 0
    for length in range(cfg.max_ops + 1):
        for combo in itertools.product(all_ops, repeat=length):
            count += 1
            cand = _evaluate(Circuit(n, combo), cfg, validator)
            if cand.valid and (best_valid is None or _score(cand) < _score(best_valid)):
                best_valid = cand
    history = ()
    if best_valid is not None:
        history = (HistoryEntry(0, count, best_valid.cost, True, best_valid.cost),)
    return SearchResult(best_valid, None, history, cfg.seed, count)
