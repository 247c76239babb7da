"""Gate-level circuit IR shared by the codes, the pulse compiler and the search.

The gate alphabet is deliberately small: the one-qubit rotations U, V, W (and
daggers), the Paulis X and Z, CNOT, and a first-class multi-control
multi-target conditional sign flip (CPHASE). CPHASE is kept as a single node
rather than sugar for a product of two-qubit gates because the pulse backend
lowers it more cheaply as one unit.

Circuits serialize to JSON documents of the form
``{"n": 2, "ops": [{"kind": "CNOT", "controls": [0], "targets": [1]}]}``
(file extension ``.qc.json``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .states import (
    U, UDAG, V, VDAG, W, WDAG, X, Z,
    PureState,
    _apply_gate_array,
    cnot_permutation,
    controlled_phase_signs,
)

SINGLE_QUBIT_KINDS = ("U", "Udag", "V", "Vdag", "W", "Wdag", "X", "Z")
KINDS = SINGLE_QUBIT_KINDS + ("CNOT", "CPHASE")

GATE_MATRICES = {
    "U": U, "Udag": UDAG, "V": V, "Vdag": VDAG,
    "W": W, "Wdag": WDAG, "X": X, "Z": Z,
}

INVERSE_KIND = {
    "U": "Udag", "Udag": "U",
    "V": "Vdag", "Vdag": "V",
    "W": "Wdag", "Wdag": "W",
    "X": "X", "Z": "Z", "CNOT": "CNOT", "CPHASE": "CPHASE",
}


class CircuitFormatError(ValueError):
    """Raised for malformed circuit documents or ill-formed ops."""


@dataclass(frozen=True)
class GateOp:
    kind: str
    targets: tuple
    controls: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(q) for q in self.targets))
        object.__setattr__(self, "controls", tuple(int(q) for q in self.controls))
        if self.kind not in KINDS:
            raise CircuitFormatError(f"unknown gate kind {self.kind!r}")
        if self.kind in SINGLE_QUBIT_KINDS:
            if len(self.targets) != 1 or self.controls:
                raise CircuitFormatError(f"{self.kind} takes exactly one target and no controls")
        elif self.kind == "CNOT":
            if len(self.controls) != 1 or len(self.targets) != 1:
                raise CircuitFormatError("CNOT takes exactly one control and one target")
        else:  # CPHASE
            if not self.controls or not self.targets:
                raise CircuitFormatError("CPHASE needs at least one control and one target")
        touched = self.controls + self.targets
        if len(set(touched)) != len(touched):
            raise CircuitFormatError(f"overlapping control/target in {self.kind} op")

    def qubits(self) -> tuple:
        return self.controls + self.targets

    def inverse(self) -> "GateOp":
        return GateOp(INVERSE_KIND[self.kind], self.targets, self.controls)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    ops: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        for i, op in enumerate(self.ops):
            for q in op.qubits():
                if not 0 <= q < self.n_qubits:
                    raise CircuitFormatError(
                        f"qubit index {q} out of range at op {i} ({op.kind})"
                    )

    def __len__(self) -> int:
        return len(self.ops)


def _apply_op_array(amps: np.ndarray, op: GateOp, n: int) -> np.ndarray:
    if op.kind in SINGLE_QUBIT_KINDS:
        return _apply_gate_array(amps, GATE_MATRICES[op.kind], op.targets, n)
    if op.kind == "CNOT":
        perm = cnot_permutation(n, op.controls[0], op.targets[0])
        return amps[perm]
    signs = controlled_phase_signs(n, op.controls, op.targets)
    if amps.ndim == 1:
        return amps * signs
    return amps * signs.reshape((-1,) + (1,) * (amps.ndim - 1))


def apply_circuit(circuit: Circuit, state: PureState) -> PureState:
    """Run the circuit on a state, op by op in list order."""
    if state.n_qubits != circuit.n_qubits:
        raise ValueError(
            f"state has {state.n_qubits} qubits but circuit expects {circuit.n_qubits}"
        )
    amps = state.amplitudes
    for op in circuit.ops:
        amps = _apply_op_array(amps, op, circuit.n_qubits)
    return PureState(circuit.n_qubits, amps)


def circuit_to_unitary(circuit: Circuit) -> np.ndarray:
    """Full ``2**n x 2**n`` matrix: the product of op matrices in application order."""
    if circuit.n_qubits > 6:
        raise ValueError("dense unitary construction is limited to 6 qubits")
    mat = np.eye(2**circuit.n_qubits, dtype=complex)
    for op in circuit.ops:
        mat = _apply_op_array(mat, op, circuit.n_qubits)
    return mat


def invert_circuit(circuit: Circuit) -> Circuit:
    """Reverse the op order and replace each op by its inverse kind."""
    return Circuit(circuit.n_qubits, tuple(op.inverse() for op in reversed(circuit.ops)))


def op_to_dict(op: GateOp) -> dict:
    doc = {"kind": op.kind, "targets": list(op.targets)}
    if op.controls:
        doc["controls"] = list(op.controls)
    return doc


def circuit_to_dict(circuit: Circuit) -> dict:
    return {"n": circuit.n_qubits, "ops": [op_to_dict(op) for op in circuit.ops]}


def serialize_circuit(circuit: Circuit) -> str:
    return json.dumps(circuit_to_dict(circuit), indent=2)


def _op_from_dict(doc: dict, position: int) -> GateOp:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise CircuitFormatError(f"op {position} is not an object with a 'kind'")
    kind = doc["kind"]
    targets = doc.get("targets", [])
    controls = doc.get("controls", [])
    try:
        return GateOp(kind, tuple(targets), tuple(controls))
    except CircuitFormatError as exc:
        raise CircuitFormatError(f"{exc} at op {position}") from None


def circuit_from_dict(doc: dict) -> Circuit:
    if not isinstance(doc, dict) or "n" not in doc or "ops" not in doc:
        raise CircuitFormatError("circuit document needs top-level 'n' and 'ops'")
    n = int(doc["n"])
    ops = [_op_from_dict(op_doc, i) for i, op_doc in enumerate(doc["ops"])]
    try:
        return Circuit(n, tuple(ops))
    except CircuitFormatError:
        # re-raise with the offending position
        for i, op in enumerate(ops):
            for q in op.qubits():
                if not 0 <= q < n:
                    raise CircuitFormatError(
                        f"qubit index {q} out of range at op {i} ({op.kind})"
                    ) from None
        raise


def parse_circuit(text: str) -> Circuit:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitFormatError(f"invalid JSON: {exc}") from None
    return circuit_from_dict(doc)
