"""Phase-diffusion noise and the protection schemes measured against it.

Noise model: each qubit's relative phase performs an independent random walk;
after time t the accumulated phase is Gaussian with mean 0 and variance 2t
(time units absorb the diffusion rate). Averaging e^{i phi} over that Gaussian
gives exp(-t), so the exact single-qubit channel multiplies off-diagonal
density-matrix elements by exp(-t) -- equivalently the Kraus pair
{sqrt(p) I, sqrt(1-p) Z} with p = (1 + exp(-t))/2.

Three schemes are run against this channel:

* ``uncoded``  -- the bare qubit.
* ``zeno2``    -- two-qubit detection-only code; decoding keeps both ancilla
                  branches (no post-selection, no correction).
* ``phase3``   -- three-qubit phase-flip code with majority-vote correction.

A scheme with n repetitions encodes, exposes each physical qubit for t/n,
decodes and corrects, and repeats n times. Coherence is measured as
C = |<1|rho|0> / <1|rho_0|0>|. Both an exact density-matrix route and a
seeded Monte-Carlo trajectory route are provided; trajectories are keyed by
(seed, trajectory index) so results do not depend on execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .circuits import circuit_to_unitary, invert_circuit
from .codes import (
    CORRECTION_MATRICES,
    build_syndrome_table,
    three_qubit_phase_code,
    two_qubit_zeno_code,
)
from .states import DensityMatrix, I2, PureState, Z, basis_bits

SCHEME_KINDS = ("uncoded", "zeno2", "phase3")

PLUS = PureState(1, np.array([1, 1], dtype=complex) / np.sqrt(2))
IPLUS = PureState(1, np.array([1, 1j], dtype=complex) / np.sqrt(2))


@dataclass(frozen=True)
class Scheme:
    kind: str
    repetitions: int = 1

    def __post_init__(self):
        if self.kind not in SCHEME_KINDS:
            raise ValueError(f"unknown scheme {self.kind!r}; pick one of {SCHEME_KINDS}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")


# --- the exact channel --------------------------------------------------------

def dephasing_kraus(t: float):
    """Kraus pair {sqrt(p) I, sqrt(1-p) Z} with p = (1 + exp(-t))/2."""
    if t < 0:
        raise ValueError("exposure time must be nonnegative")
    p = 0.5 * (1.0 + math.exp(-t))
    return np.sqrt(p) * I2, np.sqrt(1.0 - p) * Z


@lru_cache(maxsize=None)
def _qubit_flip_mask(n_qubits: int, qubit: int) -> np.ndarray:
    bits = basis_bits(n_qubits)[:, qubit].astype(float)
    mask = (bits[:, None] != bits[None, :]).astype(float)
    mask.flags.writeable = False
    return mask


def _dephase_array(mat: np.ndarray, n_qubits: int, qubit: int, t: float) -> np.ndarray:
    gamma = math.exp(-t)
    mask = _qubit_flip_mask(n_qubits, qubit)
    return mat * (1.0 - (1.0 - gamma) * mask)


def dephase_channel(rho: DensityMatrix, qubit: int, t: float) -> DensityMatrix:
    """Exact Gaussian-averaged dephasing of one qubit for time t."""
    if t < 0:
        raise ValueError("exposure time must be nonnegative")
    if not 0 <= qubit < rho.n_qubits:
        raise ValueError(f"qubit index {qubit} out of range")
    return DensityMatrix(rho.n_qubits, _dephase_array(rho.matrix, rho.n_qubits, qubit, t))


@lru_cache(maxsize=None)
def _hamming_mask(n_qubits: int) -> np.ndarray:
    bits = basis_bits(n_qubits).astype(np.int64)
    ham = (bits[:, None, :] != bits[None, :, :]).sum(axis=2)
    ham.flags.writeable = False
    return ham


def _dephase_all(mat: np.ndarray, n_qubits: int, t: float) -> np.ndarray:
    return mat * math.exp(-t) ** _hamming_mask(n_qubits)


# --- stochastic trajectories ---------------------------------------------------

def trajectory_rng(seed, index: int) -> np.random.Generator:
    """Generator for one trajectory, independent of all others."""
    if isinstance(seed, np.random.SeedSequence):
        ss = np.random.SeedSequence(entropy=seed.entropy,
                                    spawn_key=tuple(seed.spawn_key) + (index,))
    else:
        ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return np.random.default_rng(ss)


def sample_trajectory_phases(n_qubits: int, t: float, seed=None) -> np.ndarray:
    """One draw of the accumulated phases: Gaussian, mean 0, variance 2t each."""
    if t < 0:
        raise ValueError("exposure time must be nonnegative")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return rng.normal(0.0, math.sqrt(2.0 * t), size=n_qubits)


# --- scheme execution -----------------------------------------------------------

@dataclass(frozen=True)
class _SchemeModel:
    n_physical: int
    isometry: np.ndarray          # (2**n, 2), columns are codewords
    decode_unitary: np.ndarray    # (2**n, 2**n)
    corrections: tuple            # 2x2 matrix per ancilla outcome, in outcome order
    recovery: tuple               # (2, 2**n) operators combining decode+read+correct


def _build_model(kind: str) -> _SchemeModel:
    if kind == "uncoded":
        eye = np.eye(2, dtype=complex)
        return _SchemeModel(1, eye.copy(), eye.copy(), (eye.copy(),), (eye.copy(),))
    if kind == "zeno2":
        code = two_qubit_zeno_code()
        table = None
    else:
        code = three_qubit_phase_code()
        table = build_syndrome_table(code)
    n = code.n_physical
    decode = circuit_to_unitary(invert_circuit(code.encoder))
    n_anc = n - 1
    corrections = []
    recovery = []
    for s in range(2**n_anc):
        if table is None:
            corr = I2
        else:
            syndrome = format(s, f"0{n_anc}b")
            corr = CORRECTION_MATRICES[table.lookup(syndrome)]
        # rows of the full space belonging to ancilla outcome s
        selector = np.zeros((2, 2**n), dtype=complex)
        selector[0, s] = 1.0
        selector[1, (1 << (n - 1)) + s] = 1.0
        corrections.append(corr)
        recovery.append(corr @ selector @ decode)
    return _SchemeModel(n, code.isometry(), decode, tuple(corrections), tuple(recovery))


@lru_cache(maxsize=None)
def _model(kind: str) -> _SchemeModel:
    return _build_model(kind)


def _run_exact(scheme: Scheme, psi: PureState, t: float) -> np.ndarray:
    model = _model(scheme.kind)
    n_reps = scheme.repetitions
    step = t / n_reps
    rho = np.outer(psi.amplitudes, psi.amplitudes.conj())
    for _ in range(n_reps):
        full = model.isometry @ rho @ model.isometry.conj().T
        full = _dephase_all(full, model.n_physical, step)
        rho = sum(A @ full @ A.conj().T for A in model.recovery)
    return rho


def _run_trajectories(scheme: Scheme, psi: PureState, t: float, shots: int, seed) -> np.ndarray:
    """Final one-qubit pure states, one row per trajectory."""
    if shots <= 0:
        raise ValueError("shots must be positive")
    model = _model(scheme.kind)
    n = model.n_physical
    n_reps = scheme.repetitions
    step = t / n_reps

    phases = np.empty((shots, n_reps, n))
    draws = np.empty((shots, n_reps))
    for i in range(shots):
        rng = trajectory_rng(seed, i)
        phases[i] = rng.normal(0.0, math.sqrt(2.0 * step), size=(n_reps, n))
        draws[i] = rng.uniform(size=n_reps)

    bits = basis_bits(n).astype(float)
    n_anc = n - 1
    corr = np.stack(model.corrections)               # (2**n_anc, 2, 2)
    states = np.tile(psi.amplitudes, (shots, 1))     # (shots, 2)
    for rep in range(n_reps):
        full = states @ model.isometry.T             # (shots, 2**n)
        full = full * np.exp(1j * phases[:, rep, :] @ bits.T)
        full = full @ model.decode_unitary.T
        if n_anc == 0:
            states = full
            continue
        # Born sampling of the ancilla outcome, then collapse and correct
        cols = np.stack([full[:, 0:2**n_anc], full[:, 2**n_anc:2**n_anc + 2**n_anc]], axis=2)
        probs = (np.abs(cols) ** 2).sum(axis=2)      # (shots, 2**n_anc)
        cum = np.cumsum(probs, axis=1)
        chosen = (cum > draws[:, rep, None] * cum[:, -1:]).argmax(axis=1)
        rows = np.arange(shots)
        branch = cols[rows, chosen, :]               # (shots, 2)
        branch /= np.linalg.norm(branch, axis=1, keepdims=True)
        states = np.einsum("sij,sj->si", corr[chosen], branch)
    return states


def run_scheme(scheme: Scheme, psi: PureState, t: float, mode: str = "exact",
               shots: Optional[int] = None, seed=None) -> DensityMatrix:
    """Final reduced one-qubit density matrix after the full protection cycle.

    ``mode`` is ``"exact"`` (deterministic channel propagation) or ``"mc"``
    (average of ``shots`` seeded trajectories).
    """
    if psi.n_qubits != 1:
        raise ValueError("schemes protect a single qubit")
    if t < 0:
        raise ValueError("exposure time must be nonnegative")
    mode = {"exact-channel": "exact", "monte-carlo": "mc"}.get(mode, mode)
    if mode == "exact":
        return DensityMatrix(1, _run_exact(scheme, psi, t))
    if mode != "mc":
        raise ValueError(f"unknown mode {mode!r}")
    if shots is None:
        raise ValueError("monte-carlo mode needs a shot count")
    states = _run_trajectories(scheme, psi, t, shots, seed)
    rho = np.einsum("si,sj->ij", states, states.conj()) / states.shape[0]
    rho = (rho + rho.conj().T) / 2.0
    return DensityMatrix(1, rho)


def coherence(rho: DensityMatrix, rho0: DensityMatrix) -> float:
    """C = |<1|rho|0> / <1|rho_0|0>|; undefined for basis-state inputs."""
    z0 = rho0.matrix[1, 0]
    if abs(z0) < 1e-12:
        raise ValueError(
            "initial state has no off-diagonal element; pick a superposition input"
        )
    return float(abs(rho.matrix[1, 0] / z0))


def scheme_coherence(scheme: Scheme, psi: PureState, t: float) -> float:
    """Exact-mode coherence of the scheme at time t."""
    return coherence(run_scheme(scheme, psi, t), psi.density())


def mc_coherence(scheme: Scheme, psi: PureState, t: float, shots: int, seed=None):
    """Monte-Carlo coherence estimate and its standard error.

    The standard error of the mean off-diagonal element is propagated through
    the absolute value.
    """
    z0 = psi.density().matrix[1, 0]
    if abs(z0) < 1e-12:
        raise ValueError(
            "initial state has no off-diagonal element; pick a superposition input"
        )
    states = _run_trajectories(scheme, psi, t, shots, seed)
    z = states[:, 1] * states[:, 0].conj()
    mean = z.mean()
    se_re = z.real.std(ddof=1) / math.sqrt(shots)
    se_im = z.imag.std(ddof=1) / math.sqrt(shots)
    if abs(mean) < 1e-300:
        se_abs = math.hypot(se_re, se_im)
    else:
        se_abs = math.hypot(mean.real * se_re, mean.imag * se_im) / abs(mean)
    return float(abs(mean) / abs(z0)), float(se_abs / abs(z0))


def n_shot_coherence(scheme: Scheme, t: float, n: int, psi: PureState = IPLUS) -> float:
    """Exact coherence of n evenly spaced repetitions within total time t."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return scheme_coherence(Scheme(scheme.kind, n), psi, t)


# --- closed forms (used as cross-checks against the simulated routes) -----------

def uncoded_coherence_closed_form(t: float) -> float:
    return math.exp(-t)


def zeno2_coherence_closed_form(t: float) -> float:
    """The detection-only two-qubit scheme gains nothing: C(t) = exp(-t)."""
    return math.exp(-t)


def phase3_mixture_coefficients(t: float):
    """Weights (a, b) of the majority-vote output a*rho + b*X rho X."""
    g = math.exp(-t)
    a = (2.0 + 3.0 * g - g**3) / 4.0
    b = (2.0 + g**3 - 3.0 * g) / 4.0
    return a, b


def phase3_worst_coherence_closed_form(t: float) -> float:
    """Lower bound over inputs, attained at psi = (|0> + i|1>)/sqrt(2)."""
    g = math.exp(-t)
    return (3.0 * g - g**3) / 2.0


# --- curve generation ------------------------------------------------------------

CSV_HEADER = "t,scheme,n,C_exact,C_mc,mc_stderr"

DEFAULT_CURVES = (("uncoded", 1), ("zeno2", 1), ("phase3", 1), ("phase3", 10))


@dataclass(frozen=True)
class CurveSample:
    t: float
    c_exact: float
    c_mc: Optional[float] = None
    mc_stderr: Optional[float] = None


@dataclass(frozen=True)
class CoherenceCurve:
    scheme: str
    repetitions: int
    samples: tuple


def figure5_data(t_max: float, steps: int, schemes: Sequence[tuple] = DEFAULT_CURVES,
                 shots: Optional[int] = None, seed=0, psi: PureState = IPLUS):
    """Coherence curves on a uniform grid of ``steps + 1`` points in [0, t_max].

    With ``shots`` set, each grid point also carries a Monte-Carlo estimate
    and standard error; point (curve, t) gets its own deterministic seed.
    """
    if steps < 2:
        raise ValueError("need at least 2 steps")
    grid = np.linspace(0.0, t_max, steps + 1)
    curves = []
    for curve_idx, (kind, reps) in enumerate(schemes):
        scheme = Scheme(kind, reps)
        samples = []
        for t_idx, t in enumerate(grid):
            c_exact = scheme_coherence(scheme, psi, float(t))
            c_mc = stderr = None
            if shots is not None:
                point_seed = np.random.SeedSequence(entropy=seed, spawn_key=(curve_idx, t_idx))
                c_mc, stderr = mc_coherence(scheme, psi, float(t), shots, seed=point_seed)
            samples.append(CurveSample(float(t), c_exact, c_mc, stderr))
        curves.append(CoherenceCurve(kind, reps, tuple(samples)))
    return curves


def curves_to_csv(curves: Sequence[CoherenceCurve]) -> str:
    """Rows ordered by curve then by t; empty MC columns when not sampled."""
    lines = [CSV_HEADER]
    for curve in curves:
        for s in curve.samples:
            mc = "" if s.c_mc is None else f"{s.c_mc:.12g}"
            se = "" if s.mc_stderr is None else f"{s.mc_stderr:.12g}"
            lines.append(f"{s.t:.12g},{curve.scheme},{curve.repetitions},{s.c_exact:.12g},{mc},{se}")
    return "\n".join(lines) + "\n"
