import numpy as np
import pytest

from qeclab.circuits import Circuit, GateOp, circuit_to_unitary
from qeclab.codes import five_qubit_code
from qeclab.iontrap import (
    Pulse,
    PulseSequence,
    TrapState,
    apply_pulse,
    compile_cphase,
    compile_circuit,
    per_gate_costs,
    pulses_from_json,
    pulses_to_json,
    qubit_basis_trap_index,
    simulate_pulse_sequence,
    trap_dim,
    verify_compilation,
)
from qeclab.search import random_circuit
from qeclab.states import U


def single_ion_state(level: int, phonon: int) -> TrapState:
    amps = np.zeros(trap_dim(1), dtype=complex)
    amps[level * 2 + phonon] = 1.0
    return TrapState(1, amps)


class TestPulsePrimitives:
    """Exact action tables of the three pulse types."""

    def test_wphon_g1(self):
        out = apply_pulse(single_ion_state(0, 1), Pulse("WPhon", 0))
        assert abs(out.amplitudes[2] + 1j) < 1e-15     # -i |e,0>

    def test_wphon_e0(self):
        out = apply_pulse(single_ion_state(1, 0), Pulse("WPhon", 0))
        assert abs(out.amplitudes[1] + 1j) < 1e-15     # -i |g,1>

    def test_wphon_fixed_points(self):
        for level, phonon in ((0, 0), (1, 1), (2, 0), (2, 1)):
            out = apply_pulse(single_ion_state(level, phonon), Pulse("WPhon", 0))
            assert abs(out.amplitudes[level * 2 + phonon] - 1) < 1e-15

    def test_vpulse_sign(self):
        out = apply_pulse(single_ion_state(0, 1), Pulse("VPulse", 0))
        assert abs(out.amplitudes[1] + 1) < 1e-15      # -|g,1>
        for level, phonon in ((0, 0), (1, 0), (1, 1)):
            out = apply_pulse(single_ion_state(level, phonon), Pulse("VPulse", 0))
            assert abs(out.amplitudes[level * 2 + phonon] - 1) < 1e-15

    def test_vphon_g1(self):
        out = apply_pulse(single_ion_state(0, 1), Pulse("VPhon", 0))
        assert abs(out.amplitudes[4] + 1j) < 1e-15     # -i |e',0>

    def test_vphon_unitary_completion(self):
        out = apply_pulse(single_ion_state(2, 0), Pulse("VPhon", 0))
        assert abs(out.amplitudes[1] + 1j) < 1e-15     # -i |g,1>

    def test_daggers_invert(self):
        for kind in ("WPhon", "VPhon", "VPulse"):
            for level in range(3):
                for phonon in range(2):
                    state = single_ion_state(level, phonon)
                    pulse = Pulse(kind, 0)
                    back = apply_pulse(apply_pulse(state, pulse), pulse.dagger())
                    np.testing.assert_allclose(back.amplitudes, state.amplitudes, atol=1e-15)

    def test_one_qubit_acts_on_both_phonon_sectors(self):
        pulse = Pulse("OneQubit", 0, U, label="U")
        for phonon in range(2):
            out = apply_pulse(single_ion_state(0, phonon), pulse)
            assert abs(out.amplitudes[0 * 2 + phonon] - 1 / np.sqrt(2)) < 1e-15
            assert abs(out.amplitudes[1 * 2 + phonon] - 1 / np.sqrt(2)) < 1e-15

    def test_one_qubit_leaves_eprime_alone(self):
        pulse = Pulse("OneQubit", 0, U, label="U")
        out = apply_pulse(single_ion_state(2, 0), pulse)
        assert abs(out.amplitudes[4] - 1) < 1e-15


class TestCphaseCompilation:
    def test_cost_law(self):
        """Sequence length is 2c + k; the three worked examples give 4, 8, 7."""
        assert len(compile_cphase((0,), (1, 2))) == 4
        assert len(compile_cphase((0, 1, 2), (3, 4))) == 8
        assert len(compile_cphase((0, 1), (2, 3, 4))) == 7
        for c in range(1, 4):
            for k in range(1, 4):
                controls = tuple(range(c))
                targets = tuple(range(c, c + k))
                assert len(compile_cphase(controls, targets)) == 2 * c + k

    def test_four_pulse_sequence_layout(self):
        kinds = [(p.kind, p.ion) for p in compile_cphase((0,), (1, 2)).pulses]
        assert kinds == [("WPhon", 0), ("VPulse", 1), ("VPulse", 2), ("WPhonDag", 0)]

    def test_eight_pulse_sequence_layout(self):
        kinds = [(p.kind, p.ion) for p in compile_cphase((0, 1, 2), (3, 4)).pulses]
        assert kinds == [
            ("WPhon", 0), ("VPhon", 1), ("VPhon", 2),
            ("VPulse", 3), ("VPulse", 4),
            ("VPhonDag", 2), ("VPhonDag", 1), ("WPhonDag", 0),
        ]

    def test_seven_pulse_sequence_layout(self):
        kinds = [(p.kind, p.ion) for p in compile_cphase((0, 1), (2, 3, 4)).pulses]
        assert kinds == [
            ("WPhon", 0), ("VPhon", 1),
            ("VPulse", 2), ("VPulse", 3), ("VPulse", 4),
            ("VPhon", 1), ("WPhon", 0),
        ]

    def test_dagger_parity_law(self):
        """Second-half control pulses are daggered exactly for even target counts."""
        for k in range(1, 5):
            seq = compile_cphase((0,), tuple(range(1, 1 + k)))
            closing = seq.pulses[-1]
            if k % 2 == 0:
                assert closing.kind == "WPhonDag"
            else:
                assert closing.kind == "WPhon"

    def test_both_parities_realize_the_sign_flip(self):
        """Even and odd target counts both land on the target gate exactly."""
        for k in range(1, 5):
            targets = tuple(range(1, 1 + k))
            circ = Circuit(1 + k, (GateOp("CPHASE", targets, (0,)),))
            assert verify_compilation(circ, compile_cphase((0,), targets)).ok

    def test_rejects_overlap_and_empty(self):
        with pytest.raises(ValueError):
            compile_cphase((0,), (0,))
        with pytest.raises(ValueError):
            compile_cphase((), (1,))


class TestPulseSimulation:
    def test_empty_sequence_is_identity(self):
        result = simulate_pulse_sequence(PulseSequence(()), 2)
        np.testing.assert_allclose(result.unitary, np.eye(4), atol=1e-15)
        assert result.leakage == 0 and result.phonon_residual == 0

    def test_three_pulse_conditional_sign_flip(self):
        """[WPhon, VPulse, WPhon] realizes the conditional sign flip exactly."""
        seq = compile_cphase((0,), (1,))
        result = simulate_pulse_sequence(seq, 2)
        np.testing.assert_allclose(result.unitary, np.diag([1, 1, 1, -1]), atol=1e-15)
        assert result.leakage < 1e-15 and result.phonon_residual < 1e-15

    def test_four_pulse_phase_table(self):
        """diag phases (-1)^(eps*eta1) (-1)^(eps*eta2) on all 8 basis states."""
        result = simulate_pulse_sequence(compile_cphase((0,), (1, 2)), 3)
        for j in range(8):
            eps, eta1, eta2 = (j >> 2) & 1, (j >> 1) & 1, j & 1
            expected = (-1.0) ** (eps * eta1) * (-1.0) ** (eps * eta2)
            assert abs(result.unitary[j, j] - expected) < 1e-12
        off = result.unitary - np.diag(np.diag(result.unitary))
        assert np.abs(off).max() < 1e-12

    def test_eight_pulse_phase_table(self):
        result = simulate_pulse_sequence(compile_cphase((0, 1, 2), (3, 4)), 5)
        for j in range(32):
            b = [(j >> (4 - q)) & 1 for q in range(5)]
            expected = (-1.0) ** ((b[3] + b[4]) * b[0] * b[1] * b[2])
            assert abs(result.unitary[j, j] - expected) < 1e-12
        assert result.leakage < 1e-12 and result.phonon_residual < 1e-12

    def test_seven_pulse_phase_table(self):
        result = simulate_pulse_sequence(compile_cphase((0, 1), (2, 3, 4)), 5)
        for j in range(32):
            b = [(j >> (4 - q)) & 1 for q in range(5)]
            expected = (-1.0) ** ((b[2] + b[3] + b[4]) * b[0] * b[1])
            assert abs(result.unitary[j, j] - expected) < 1e-12
        assert result.leakage < 1e-12 and result.phonon_residual < 1e-12

    def test_no_leakage_on_random_compilations(self, rng):
        for _ in range(10):
            circ = random_circuit(3, int(rng.integers(1, 7)), rng)
            result = simulate_pulse_sequence(compile_circuit(circ), 3)
            assert result.leakage < 1e-12
            assert result.phonon_residual < 1e-12


class TestCircuitCompilation:
    def test_one_pulse_per_single_qubit_gate(self):
        circ = Circuit(2, (GateOp("U", (0,)),))
        assert compile_circuit(circ).cost == 1

    def test_two_qubit_sign_flip_costs_three(self):
        circ = Circuit(2, (GateOp("CPHASE", (1,), (0,)),))
        assert compile_circuit(circ).cost == 3

    def test_cnot_costs_five(self):
        circ = Circuit(2, (GateOp("CNOT", (1,), (0,)),))
        assert compile_circuit(circ).cost == 5

    def test_empty_circuit_costs_zero(self):
        assert compile_circuit(Circuit(3)).cost == 0

    def test_total_is_sum_of_per_gate_costs(self, rng):
        circ = random_circuit(4, 9, rng)
        assert compile_circuit(circ).cost == sum(c for _, c in per_gate_costs(circ))

    def test_fusion_advantage_four_vs_six(self):
        """One fused two-target gate needs 4 pulses; split in two it needs 6."""
        fused = Circuit(3, (GateOp("CPHASE", (1, 2), (0,)),))
        split = Circuit(3, (GateOp("CPHASE", (1,), (0,)), GateOp("CPHASE", (2,), (0,))))
        assert compile_circuit(fused).cost == 4
        assert compile_circuit(split).cost == 6
        np.testing.assert_allclose(circuit_to_unitary(fused), circuit_to_unitary(split), atol=1e-14)
        assert verify_compilation(fused, compile_circuit(fused)).ok
        assert verify_compilation(split, compile_circuit(split)).ok


class TestVerifyCompilation:
    def test_round_trip_on_random_circuits(self, rng):
        for _ in range(8):
            circ = random_circuit(3, 8, rng)
            report = verify_compilation(circ, compile_circuit(circ))
            assert report.ok, report

    def test_identity_circuit_vs_empty_sequence(self):
        assert verify_compilation(Circuit(2), PulseSequence(())).ok

    def test_mutated_sequence_fails(self):
        circ = Circuit(2, (GateOp("CPHASE", (1,), (0,)),))
        seq = compile_circuit(circ)
        dropped = PulseSequence(tuple(p for p in seq.pulses if p.kind != "VPulse"))
        report = verify_compilation(circ, dropped)
        assert not report.ok

    def test_encoder_reproduces_codewords_at_pulse_level(self):
        code = five_qubit_code()
        seq = compile_circuit(code.encoder)
        result = simulate_pulse_sequence(seq, 5)
        reference = code.isometry()
        images = result.unitary[:, [0, 0b10000]]
        phase = np.vdot(reference[:, 0], images[:, 0])
        assert abs(abs(phase) - 1) < 1e-10
        assert np.abs(images - phase * reference).max() < 1e-10
        assert result.leakage < 1e-12 and result.phonon_residual < 1e-12

    def test_reference_encoder_cost(self):
        assert compile_circuit(five_qubit_code().encoder).cost == 59


class TestPulseJson:
    def test_round_trip(self, rng):
        circ = random_circuit(3, 6, rng)
        seq = compile_circuit(circ)
        docs = pulses_to_json(seq)
        back = pulses_from_json(docs)
        assert len(back) == len(seq)
        a = simulate_pulse_sequence(seq, 3)
        b = simulate_pulse_sequence(back, 3)
        np.testing.assert_allclose(a.unitary, b.unitary, atol=1e-14)

    def test_dag_flag(self):
        docs = pulses_to_json(compile_cphase((0,), (1, 2)))
        assert docs[0] == {"kind": "WPhon", "ion": 0, "dag": False}
        assert docs[-1] == {"kind": "WPhon", "ion": 0, "dag": True}

    def test_malformed_entry_reports_position(self):
        with pytest.raises(ValueError, match="position 1"):
            pulses_from_json([{"kind": "WPhon", "ion": 0}, {"ion": 1}])


class TestTrapState:
    def test_qubit_subspace_index(self):
        assert qubit_basis_trap_index([0, 0]) == 0
        assert qubit_basis_trap_index([0, 1]) == 2
        assert qubit_basis_trap_index([1, 0]) == 6
        assert qubit_basis_trap_index([1, 1]) == 8

    def test_norm_validation(self):
        with pytest.raises(ValueError, match="normalized"):
            TrapState(1, np.ones(6))

    def test_pulse_needs_valid_ion(self):
        with pytest.raises(ValueError, match="out of range"):
            apply_pulse(TrapState.from_qubits([0]), Pulse("WPhon", 1))
