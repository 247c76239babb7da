"""Pulse-level model of a linear ion trap and a circuit-to-pulse compiler.

Each ion has three internal levels: ground g, excited e (these two hold the
qubit, |0> = g and |1> = e) and an auxiliary excited level e' used only as
parking space during multi-control gates. All ions share one center-of-mass
phonon mode, truncated to occupations {0, 1}; valid pulse programs start and
end with the phonon in |0> and never populate e' at the end.

Pulse primitives (everything not listed is left fixed):

    WPhon(i)     |g,1> -> -i|e,0>     |e,0> -> -i|g,1>
    VPulse(j)    |g,1> -> -|g,1>
    VPhon(j)     |g,1> -> -i|e',0>    |e',0> -> -i|g,1>
    OneQubit(R)  R acts on {g,e} of one ion, independent of the phonon

WPhonDag / VPhonDag are the inverses (+i in place of -i); VPulse is its own
inverse. The conditional sign flip with c controls and k targets compiles to
2c + k pulses: WPhon on the first control, VPhon on the remaining controls,
VPulse on every target, then the control pulses again in reverse order --
daggered exactly when k is even, which cancels the phases the control pulses
leave behind.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .circuits import (
    Circuit,
    GateOp,
    GATE_MATRICES,
    SINGLE_QUBIT_KINDS,
    circuit_to_unitary,
)
from .states import U, UDAG, is_unitary

LEVELS = 3          # g, e, e'
G, E, EPRIME = 0, 1, 2
PHONON_DIM = 2

PULSE_KINDS = ("WPhon", "WPhonDag", "VPulse", "VPhon", "VPhonDag", "OneQubit")
_DAGGER = {"WPhon": "WPhonDag", "WPhonDag": "WPhon",
           "VPhon": "VPhonDag", "VPhonDag": "VPhon",
           "VPulse": "VPulse"}


@dataclass(frozen=True)
class Pulse:
    kind: str
    ion: int
    matrix: Optional[np.ndarray] = None   # 2x2 rotation, OneQubit only
    label: Optional[str] = None

    def __post_init__(self):
        if self.kind not in PULSE_KINDS:
            raise ValueError(f"unknown pulse kind {self.kind!r}")
        if self.kind == "OneQubit":
            if self.matrix is None:
                raise ValueError("OneQubit pulse needs a 2x2 matrix")
            mat = np.asarray(self.matrix, dtype=complex)
            if mat.shape != (2, 2) or not is_unitary(mat):
                raise ValueError("OneQubit pulse matrix must be a 2x2 unitary")
            mat = mat.copy()
            mat.flags.writeable = False
            object.__setattr__(self, "matrix", mat)
        elif self.matrix is not None:
            raise ValueError(f"{self.kind} pulse carries no matrix")

    def dagger(self) -> "Pulse":
        if self.kind == "OneQubit":
            label = None
            if self.label is not None:
                from .circuits import INVERSE_KIND
                label = INVERSE_KIND.get(self.label)
            return Pulse("OneQubit", self.ion, self.matrix.conj().T, label)
        return Pulse(_DAGGER[self.kind], self.ion)


@dataclass(frozen=True)
class PulseSequence:
    pulses: tuple

    def __post_init__(self):
        object.__setattr__(self, "pulses", tuple(self.pulses))

    @property
    def cost(self) -> int:
        return len(self.pulses)

    def __len__(self) -> int:
        return len(self.pulses)

    def __add__(self, other: "PulseSequence") -> "PulseSequence":
        return PulseSequence(self.pulses + other.pulses)


def trap_dim(n_ions: int) -> int:
    return PHONON_DIM * LEVELS**n_ions


@lru_cache(maxsize=None)
def _trap_index_tables(n_ions: int):
    """Per-basis-index arrays: ion level digits (big-endian) and phonon bit."""
    dim = trap_dim(n_ions)
    idx = np.arange(dim)
    phonon = idx % PHONON_DIM
    level_code = idx // PHONON_DIM
    levels = np.zeros((dim, n_ions), dtype=np.int8)
    for q in range(n_ions):
        levels[:, q] = (level_code // LEVELS ** (n_ions - 1 - q)) % LEVELS
    levels.flags.writeable = False
    phonon.flags.writeable = False
    return levels, phonon


def qubit_basis_trap_index(bits: Sequence[int]) -> int:
    """Trap-space index of a qubit-subspace basis state (phonon 0)."""
    n = len(bits)
    code = 0
    for b in bits:
        code = code * LEVELS + int(b)
    return code * PHONON_DIM


@dataclass(frozen=True)
class TrapState:
    n_ions: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (trap_dim(self.n_ions),):
            raise ValueError(f"expected {trap_dim(self.n_ions)} amplitudes")
        if abs(np.linalg.norm(amps) - 1) > 1e-9:
            raise ValueError("trap state is not normalized")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_qubits(cls, bits: Sequence[int]) -> "TrapState":
        amps = np.zeros(trap_dim(len(bits)), dtype=complex)
        amps[qubit_basis_trap_index(bits)] = 1.0
        return cls(len(bits), amps)


def _pulse_apply_array(amps: np.ndarray, pulse: Pulse, n_ions: int) -> np.ndarray:
    """Apply a pulse to an array whose leading axis is the trap basis index."""
    levels, phonon = _trap_index_tables(n_ions)
    ion = pulse.ion
    if not 0 <= ion < n_ions:
        raise ValueError(f"ion index {ion} out of range for {n_ions} ions")
    out = amps.copy()
    lv = levels[:, ion]
    step = LEVELS ** (n_ions - 1 - ion) * PHONON_DIM

    if pulse.kind in ("WPhon", "WPhonDag"):
        factor = -1j if pulse.kind == "WPhon" else 1j
        src_g1 = np.nonzero((lv == G) & (phonon == 1))[0]
        dst_e0 = src_g1 + step - 1          # g,1 -> e,0
        out[dst_e0] = factor * amps[src_g1]
        out[src_g1] = factor * amps[dst_e0]
    elif pulse.kind == "VPulse":
        mask = (lv == G) & (phonon == 1)
        out[mask] = -amps[mask]
    elif pulse.kind in ("VPhon", "VPhonDag"):
        factor = -1j if pulse.kind == "VPhon" else 1j
        src_g1 = np.nonzero((lv == G) & (phonon == 1))[0]
        dst_ep0 = src_g1 + 2 * step - 1     # g,1 -> e',0
        out[dst_ep0] = factor * amps[src_g1]
        out[src_g1] = factor * amps[dst_ep0]
    else:  # OneQubit
        rot = pulse.matrix
        idx_g = np.nonzero(lv == G)[0]
        idx_e = idx_g + step
        a_g, a_e = amps[idx_g], amps[idx_e]
        out[idx_g] = rot[0, 0] * a_g + rot[0, 1] * a_e
        out[idx_e] = rot[1, 0] * a_g + rot[1, 1] * a_e
    return out


def apply_pulse(state: TrapState, pulse: Pulse) -> TrapState:
    return TrapState(state.n_ions, _pulse_apply_array(state.amplitudes, pulse, state.n_ions))


def compile_cphase(controls: Sequence[int], targets: Sequence[int]) -> PulseSequence:
    """Conditional sign flip on the targets, conditioned on all controls.

    Cost is 2*len(controls) + len(targets); the second pass over the control
    ions is daggered exactly when the number of targets is even.
    """
    controls = tuple(sorted(int(c) for c in controls))
    targets = tuple(sorted(int(t) for t in targets))
    if not controls or not targets:
        raise ValueError("need at least one control and one target")
    if set(controls) & set(targets):
        raise ValueError(f"controls {controls} and targets {targets} overlap")
    opening = [Pulse("WPhon", controls[0])]
    opening += [Pulse("VPhon", c) for c in controls[1:]]
    body = [Pulse("VPulse", t) for t in targets]
    closing = list(reversed(opening))
    if len(targets) % 2 == 0:
        closing = [p.dagger() for p in closing]
    return PulseSequence(tuple(opening + body + closing))


def _one_qubit_pulse(kind: str, ion: int) -> Pulse:
    return Pulse("OneQubit", ion, GATE_MATRICES[kind], label=kind)


def compile_op(op: GateOp) -> PulseSequence:
    if op.kind in SINGLE_QUBIT_KINDS:
        return PulseSequence((_one_qubit_pulse(op.kind, op.targets[0]),))
    if op.kind == "CNOT":
        target = op.targets[0]
        inner = compile_cphase(op.controls, op.targets)
        return PulseSequence(
            (Pulse("OneQubit", target, UDAG, label="Udag"),)
            + inner.pulses
            + (Pulse("OneQubit", target, U, label="U"),)
        )
    return compile_cphase(op.controls, op.targets)


def compile_circuit(circuit: Circuit) -> PulseSequence:
    """Lower a circuit to pulses: 1 per one-qubit gate, 2c+k per CPHASE,
    5 per CNOT (basis change + 3-pulse sign flip + basis change back)."""
    seq = PulseSequence(())
    for op in circuit.ops:
        seq = seq + compile_op(op)
    return seq


def per_gate_costs(circuit: Circuit) -> list:
    """(op, pulse count) for each op, in circuit order."""
    return [(op, compile_op(op).cost) for op in circuit.ops]


@dataclass(frozen=True)
class PulseSimResult:
    unitary: np.ndarray       # induced operator on the qubit subspace
    leakage: float            # worst-case amplitude outside {g,e}^n (x) |0>_cm
    phonon_residual: float    # worst-case amplitude left in phonon |1>


def simulate_pulse_sequence(seq: PulseSequence, n_ions: int) -> PulseSimResult:
    """Run the sequence on every qubit-subspace basis state (phonon in |0>).

    Returns the induced 2**n x 2**n operator together with the worst residual
    amplitude outside the qubit subspace and the worst phonon excitation.
    """
    dim = trap_dim(n_ions)
    nq = 2**n_ions
    cols = np.zeros((dim, nq), dtype=complex)
    sub_idx = np.zeros(nq, dtype=np.int64)
    for j in range(nq):
        bits = [(j >> (n_ions - 1 - q)) & 1 for q in range(n_ions)]
        sub_idx[j] = qubit_basis_trap_index(bits)
        cols[sub_idx[j], j] = 1.0
    for pulse in seq.pulses:
        cols = _pulse_apply_array(cols, pulse, n_ions)

    unitary = cols[sub_idx, :]
    levels, phonon = _trap_index_tables(n_ions)
    outside = np.ones(dim, dtype=bool)
    outside[sub_idx] = False
    leakage = float(np.sqrt(np.max(np.sum(np.abs(cols[outside, :]) ** 2, axis=0), initial=0.0)))
    excited = phonon == 1
    phonon_residual = float(np.sqrt(np.max(np.sum(np.abs(cols[excited, :]) ** 2, axis=0), initial=0.0)))
    return PulseSimResult(unitary, leakage, phonon_residual)


@dataclass(frozen=True)
class CompilationReport:
    ok: bool
    max_deviation: float
    leakage: float
    phonon_residual: float

    def __bool__(self) -> bool:
        return self.ok


def verify_compilation(circuit: Circuit, seq: PulseSequence,
                       atol: float = 1e-10, leak_atol: float = 1e-12) -> CompilationReport:
    """Check that the pulse program implements the circuit on the qubit
    subspace up to a global phase, with no leakage or phonon residue."""
    target = circuit_to_unitary(circuit)
    sim = simulate_pulse_sequence(seq, circuit.n_qubits)
    tr = np.trace(target.conj().T @ sim.unitary)
    if abs(tr) < 1e-12:
        deviation = float(np.abs(sim.unitary - target).max())
    else:
        phase = tr / abs(tr)
        deviation = float(np.abs(sim.unitary - phase * target).max())
    ok = deviation < atol and sim.leakage < leak_atol and sim.phonon_residual < leak_atol
    return CompilationReport(ok, deviation, sim.leakage, sim.phonon_residual)


def pulses_to_json(seq: PulseSequence) -> list:
    """JSON form: base kind plus a ``dag`` flag, e.g.
    ``{"kind": "WPhon", "ion": 0, "dag": false}``."""
    docs = []
    for p in seq.pulses:
        base = p.kind
        dag = False
        if base.endswith("Dag"):
            base, dag = base[:-3], True
        doc = {"kind": base, "ion": p.ion, "dag": dag}
        if p.kind == "OneQubit":
            doc["matrix"] = [[[float(v.real), float(v.imag)] for v in row] for row in p.matrix]
            if p.label is not None:
                doc["label"] = p.label
        docs.append(doc)
    return docs


def pulses_from_json(docs: Sequence[dict]) -> PulseSequence:
    pulses = []
    for i, doc in enumerate(docs):
        try:
            kind = doc["kind"]
            ion = int(doc["ion"])
            dag = bool(doc.get("dag", False))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed pulse entry at position {i}: {exc}") from None
        if kind == "OneQubit":
            mat = np.array([[complex(re, im) for re, im in row] for row in doc["matrix"]])
            if dag:
                mat = mat.conj().T
            pulses.append(Pulse("OneQubit", ion, mat, label=doc.get("label")))
        else:
            full = kind + "Dag" if dag and kind != "VPulse" else kind
            if full not in PULSE_KINDS:
                raise ValueError(f"unknown pulse kind {kind!r} at position {i}")
            pulses.append(Pulse(full, ion))
    return PulseSequence(tuple(pulses))
