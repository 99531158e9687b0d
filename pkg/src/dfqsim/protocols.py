"""End-to-end protocol simulations: initialization, readout, RF repumping and
single-qubit gates by actuator-level switching.

Pair states here live in the labeled eigenbasis ordered |S0>, |T0>, |T+1>,
|T-1> (the "protocol basis"). RF driving uses the ladder form of the
collective-drive Hamiltonian, which has no singlet matrix element, so the
singlet is exactly invariant under RF pulses. The drive is integrated with
the full cosine carrier (no rotating-wave approximation).

The quoted RF Rabi strength is the effective on-resonance rate of the
T <-> T0 transition: a pi pulse lasts 1 / (2 * rabi), so 5 kHz gives the
100 us pulse used by the initialization protocol.
"""

import time
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .constants import PHASE_PER_KHZ_US, PhysicalConstants
from .dynamics import (
    NO_NOISE,
    NoiseModel,
    PulseSequence,
    QuantumState,
    actuator_reset,
    expm_hermitian,
    sequence_unitary,
)
from .geometry import CouplingSet
from .logical import IL_X, IL_Y, IL_Z, RotationAxes, pair_operator_4
from .operators import (
    HilbertSpaceLayout,
    actuator_two_level_ops,
    kron_all,
    pair_state_matrix,
)

PAIR_LABELS = ("S0", "T0", "T+1", "T-1")


class ProtocolError(RuntimeError):
    pass


# --- pair spectrum and RF pulses ---------------------------------------------

@dataclass(frozen=True)
class PairSpectrum:
    """Pair level energies (kHz) in the protocol ordering S0, T0, T+1, T-1."""

    energies_khz: tuple[float, float, float, float]

    @property
    def delta1_khz(self) -> float:
        return self.energies_khz[2] - self.energies_khz[1]

    @property
    def delta2_khz(self) -> float:
        return self.energies_khz[1] - self.energies_khz[3]


def pair_spectrum_from_couplings(
    couplings: CouplingSet, constants: PhysicalConstants = PhysicalConstants()
) -> PairSpectrum:
    """Reduced-model energies: S0 at 0, T0 at A, T+-1 at +-omega_i - A/2."""
    a = couplings.A
    wi = constants.omega_i_khz
    return PairSpectrum(energies_khz=(0.0, a, wi - 0.5 * a, -wi - 0.5 * a))


def labeled_pair_eigensystem(pair_h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Diagonalize a 4x4 pair Hamiltonian and label the eigenstates.

    Returns:
        (energies, vectors): energies ordered S0, T0, T+1, T-1; vectors are
        the matching eigenvector columns in the product basis.

    Raises:
        ProtocolError: if eigenstates cannot be matched one-to-one to the
            ideal singlet/triplet states (near-degenerate spectrum).
    """
    vals, vecs = np.linalg.eigh(np.asarray(pair_h))
    ideal = pair_state_matrix()
    overlaps = np.abs(ideal.conj().T @ vecs) ** 2  # (label, eigenindex)
    order = np.argmax(overlaps, axis=1)
    if len(set(order.tolist())) != 4 or overlaps.max(axis=1).min() < 0.5:
        raise ProtocolError("pair spectrum too degenerate to label singlet/triplet states")
    return vals[order], vecs[:, order]


def rf_transition_frequencies(pair_h: np.ndarray) -> tuple[float, float]:
    """Triplet transition splittings (Delta_1, Delta_2) from exact diagonalization.

    Delta_1 = E(T+1) - E(T0), Delta_2 = E(T0) - E(T-1), both in kHz.
    """
    energies, _ = labeled_pair_eigensystem(pair_h)
    return float(energies[2] - energies[1]), float(energies[1] - energies[3])


def pair_spectrum_from_hamiltonian(pair_h: np.ndarray) -> PairSpectrum:
    energies, _ = labeled_pair_eigensystem(pair_h)
    return PairSpectrum(energies_khz=tuple(float(e) for e in energies))


@dataclass(frozen=True)
class RFPulse:
    """A resonant RF pulse on the nuclear pair.

    Attributes:
        frequency_khz: Carrier frequency nu (kHz), resonant with Delta_1 or Delta_2.
        rabi_khz: Effective on-resonance Rabi rate (kHz); pi time = 1/(2 rabi).
        duration_us: Pulse length (us).
    """

    frequency_khz: float
    rabi_khz: float
    duration_us: float

    def __post_init__(self):
        if self.duration_us <= 0.0:
            raise ValueError("pulse duration must be positive")
        if self.rabi_khz <= 0.0:
            raise ValueError("rabi strength must be positive")

    @staticmethod
    def pi_pulse(frequency_khz: float, rabi_khz: float = 5.0) -> "RFPulse":
        return RFPulse(
            frequency_khz=frequency_khz,
            rabi_khz=rabi_khz,
            duration_us=1.0 / (2.0 * rabi_khz) * 1e3,
        )


def _rf_ladder() -> np.ndarray:
    # (|T+1><T0| + |T-1><T0| + h.c.) / 2 in the protocol ordering.
    k = np.zeros((4, 4), dtype=complex)
    k[2, 1] = k[1, 2] = 0.5
    k[3, 1] = k[1, 3] = 0.5
    return k


def _check_rf_pulse(pulse: RFPulse, spectrum: PairSpectrum):
    split = abs(spectrum.delta1_khz - spectrum.delta2_khz)  # = 3|A|
    if split > 0.0 and pulse.rabi_khz > split / 5.0:
        warnings.warn(
            f"RF rabi {pulse.rabi_khz:.2f} kHz above the selectivity bound "
            f"{split / 5.0:.2f} kHz (|Delta1 - Delta2|/5)",
            stacklevel=3,
        )
    detunings = [
        abs(pulse.frequency_khz - spectrum.delta1_khz),
        abs(pulse.frequency_khz - spectrum.delta2_khz),
    ]
    if min(detunings) > 10.0 * pulse.rabi_khz:
        warnings.warn(
            "RF pulse is far off-resonant from both triplet transitions; "
            "no population transfer expected",
            stacklevel=3,
        )


def rf_unitary(
    pulse: RFPulse,
    spectrum: PairSpectrum,
    steps_per_period: int = 20,
) -> np.ndarray:
    """Propagator of the RF pulse over the 4-dim protocol basis.

    Integrates H(t) = diag(E) + 2 rabi cos(2 pi nu t) K with midpoint
    sampling at a step of at most 1/(steps_per_period * nu); the cosine
    carrier is kept (no rotating-wave approximation).
    """
    _check_rf_pulse(pulse, spectrum)
    diag = np.diag(np.asarray(spectrum.energies_khz, dtype=complex))
    ladder = _rf_ladder()
    nu = pulse.frequency_khz
    dt = 1e3 / (steps_per_period * nu)  # us per step
    n_steps = max(1, int(np.ceil(pulse.duration_us / dt)))
    dt = pulse.duration_us / n_steps
    u = np.eye(4, dtype=complex)
    for k in range(n_steps):
        t_mid = (k + 0.5) * dt
        drive = 2.0 * pulse.rabi_khz * np.cos(PHASE_PER_KHZ_US * nu * t_mid)
        u = expm_hermitian(diag + drive * ladder, PHASE_PER_KHZ_US * dt) @ u
    return u


def simulate_rf_pi(
    pair_state: np.ndarray,
    pulse: RFPulse,
    spectrum: PairSpectrum,
    steps_per_period: int = 20,
) -> np.ndarray:
    """Evolve a pair density matrix (protocol basis) under the RF pulse."""
    u = rf_unitary(pulse, spectrum, steps_per_period)
    rho = np.asarray(pair_state, dtype=complex)
    return u @ rho @ u.conj().T


def rf_population_trace(
    pulse: RFPulse,
    spectrum: PairSpectrum,
    initial_index: int,
    steps_per_period: int = 20,
) -> tuple[np.ndarray, np.ndarray]:
    """Populations of all four levels along the pulse, for selectivity checks.

    Returns:
        (times_us, populations) with populations of shape (n_steps + 1, 4).
    """
    _check_rf_pulse(pulse, spectrum)
    diag = np.diag(np.asarray(spectrum.energies_khz, dtype=complex))
    ladder = _rf_ladder()
    nu = pulse.frequency_khz
    dt = 1e3 / (steps_per_period * nu)
    n_steps = max(1, int(np.ceil(pulse.duration_us / dt)))
    dt = pulse.duration_us / n_steps
    psi = np.zeros(4, dtype=complex)
    psi[initial_index] = 1.0
    times = [0.0]
    pops = [np.abs(psi) ** 2]
    for k in range(n_steps):
        t_mid = (k + 0.5) * dt
        drive = 2.0 * pulse.rabi_khz * np.cos(PHASE_PER_KHZ_US * nu * t_mid)
        psi = expm_hermitian(diag + drive * ladder, PHASE_PER_KHZ_US * dt) @ psi
        times.append((k + 1) * dt)
        pops.append(np.abs(psi) ** 2)
    return np.array(times), np.array(pops)


# --- initialization and readout ----------------------------------------------

class StepKind(Enum):
    LASER_RESET = "laser-reset"
    MW_PULSE = "mw-pulse"
    SWAP = "swap"
    RF1 = "rf1"
    RF2 = "rf2"


@dataclass(frozen=True)
class PlanStep:
    kind: StepKind
    rotation_angle: float = 0.0  # MW_PULSE only
    axis_phase: float = 0.0


@dataclass(frozen=True)
class InitializationPlan:
    """Ordered protocol steps; must end with a laser reset."""

    steps: tuple[PlanStep, ...]

    def __post_init__(self):
        if not self.steps or self.steps[-1].kind is not StepKind.LASER_RESET:
            raise ValueError("initialization plan must end with a laser reset")

    @staticmethod
    def default() -> "InitializationPlan":
        """Laser + SWAP round per population branch: the DF-subspace branch
        first, then the RF1-repumped |T+1> branch, then the RF2-repumped
        |T-1> branch."""
        s = StepKind
        kinds = (
            s.LASER_RESET, s.SWAP,
            s.RF1, s.LASER_RESET, s.SWAP,
            s.RF2, s.LASER_RESET, s.SWAP,
            s.LASER_RESET,
        )
        return InitializationPlan(steps=tuple(PlanStep(kind=k) for k in kinds))


PROTOCOL_LAYOUT = HilbertSpaceLayout(factor_dims=(2, 4), labels=("actuator", "pair"))


def _extended_free_hamiltonian(couplings: CouplingSet) -> np.ndarray:
    """Reduced free Hamiltonian on actuator(2) x pair(4, protocol basis).

    The logical operators annihilate |T+-1>, so triplet +-1 populations are
    exactly preserved by SWAP blocks; their internal Zeeman phases are
    irrelevant to the protocol fidelities and are not tracked here.
    """
    _, _, sz = actuator_two_level_ops()
    sz1 = sz + 0.5 * np.eye(2)
    return couplings.A * kron_all(np.eye(2), pair_operator_4(IL_X)) + 2.0 * couplings.B * kron_all(
        sz1, pair_operator_4(IL_Z)
    )


def swap_block_unitary(
    couplings: CouplingSet, swap_sequence: PulseSequence, noise: NoiseModel = NO_NOISE
) -> np.ndarray:
    """The optimized SWAP sequence extended over actuator x full pair space."""
    return sequence_unitary(_extended_free_hamiltonian(couplings), swap_sequence, noise)


def fully_mixed_pair() -> np.ndarray:
    return np.eye(4, dtype=complex) / 4.0


@dataclass(frozen=True)
class InitializationReport:
    final_pair_state: np.ndarray
    fidelity: float
    step_fidelities: tuple[tuple[str, float], ...]
    wall_clock_s: float


def run_initialization(
    couplings: CouplingSet,
    swap_sequence: PulseSequence,
    initial_pair_state: Optional[np.ndarray] = None,
    plan: Optional[InitializationPlan] = None,
    spectrum: Optional[PairSpectrum] = None,
    rf_rabi_khz: float = 5.0,
    noise: NoiseModel = NO_NOISE,
    constants: PhysicalConstants = PhysicalConstants(),
) -> InitializationReport:
    """Drive the pair from (by default) the fully mixed state into |S0>.

    Applies the plan's blocks in order on actuator x pair; the reported
    fidelity is <S0| rho_pair |S0> after each step and at the end.
    """
    t0 = time.perf_counter()
    if plan is None:
        plan = InitializationPlan.default()
    if spectrum is None:
        spectrum = pair_spectrum_from_couplings(couplings, constants)
    rho_pair = fully_mixed_pair() if initial_pair_state is None else np.asarray(
        initial_pair_state, dtype=complex
    )
    e0 = np.zeros((2, 1), dtype=complex)
    e0[0] = 1.0
    state = QuantumState(
        density_matrix=kron_all(e0 @ e0.conj().T, rho_pair), layout=PROTOCOL_LAYOUT
    )

    u_swap = swap_block_unitary(couplings, swap_sequence, noise)
    rf1 = RFPulse.pi_pulse(spectrum.delta1_khz, rf_rabi_khz)
    rf2 = RFPulse.pi_pulse(spectrum.delta2_khz, rf_rabi_khz)
    sx, sy, _ = actuator_two_level_ops()

    step_fids = []
    for idx, step in enumerate(plan.steps):
        if step.kind is StepKind.LASER_RESET:
            state = actuator_reset(state)
        elif step.kind is StepKind.SWAP:
            rho = u_swap @ state.density_matrix @ u_swap.conj().T
            state = QuantumState(density_matrix=rho, layout=PROTOCOL_LAYOUT)
        elif step.kind is StepKind.MW_PULSE:
            gen = np.cos(step.axis_phase) * sx + np.sin(step.axis_phase) * sy
            u2 = expm_hermitian(gen, step.rotation_angle)
            u = kron_all(u2, np.eye(4))
            state = QuantumState(
                density_matrix=u @ state.density_matrix @ u.conj().T, layout=PROTOCOL_LAYOUT
            )
        else:
            pulse = rf1 if step.kind is StepKind.RF1 else rf2
            u = kron_all(np.eye(2), rf_unitary(pulse, spectrum))
            state = QuantumState(
                density_matrix=u @ state.density_matrix @ u.conj().T, layout=PROTOCOL_LAYOUT
            )
        fid = _singlet_population(state)
        step_fids.append((f"{idx + 1}:{step.kind.value}", fid))

    final_pair = _pair_reduced(state)
    return InitializationReport(
        final_pair_state=final_pair,
        fidelity=float(np.real(final_pair[0, 0])),
        step_fidelities=tuple(step_fids),
        wall_clock_s=time.perf_counter() - t0,
    )


def _pair_reduced(state: QuantumState) -> np.ndarray:
    rho = state.density_matrix.reshape(2, 4, 2, 4)
    return np.trace(rho, axis1=0, axis2=2)


def _singlet_population(state: QuantumState) -> float:
    return float(np.real(_pair_reduced(state)[0, 0]))


@dataclass(frozen=True)
class ReadoutResult:
    p0: float
    p1: float


def run_readout(
    pair_state: np.ndarray,
    couplings: CouplingSet,
    swap_sequence: PulseSequence,
    noise: NoiseModel = NO_NOISE,
) -> ReadoutResult:
    """Map the DF qubit onto the actuator with the SWAP and read it out.

    The actuator is laser-reset to |0> first; after the SWAP the Born
    probabilities of the actuator levels |0> / |1> report the logical
    |0_L> / |1_L> populations.
    """
    rho_pair = np.asarray(pair_state, dtype=complex)
    e0 = np.zeros((2, 1), dtype=complex)
    e0[0] = 1.0
    rho = kron_all(e0 @ e0.conj().T, rho_pair)
    u = swap_block_unitary(couplings, swap_sequence, noise)
    rho = u @ rho @ u.conj().T
    pops = np.real(np.einsum("abab->a", rho.reshape(2, 4, 2, 4)))
    return ReadoutResult(p0=float(pops[0]), p1=float(pops[1]))


# --- single-qubit gates by actuator-level switching ---------------------------

@dataclass(frozen=True)
class DwellStep:
    """Park the actuator at one level for a while to rotate the DF qubit."""

    actuator_level: int  # 0, +1 or -1
    dwell_time_us: float

    def __post_init__(self):
        if self.actuator_level not in (0, 1, -1):
            raise ValueError("actuator level must be 0, +1 or -1")
        if self.dwell_time_us < 0.0:
            raise ValueError("dwell time must be nonnegative")


_IL_VEC = (IL_X, IL_Y, IL_Z)


def _axis_rotation(axis: np.ndarray, angle: float) -> np.ndarray:
    gen = sum(a * op for a, op in zip(axis, _IL_VEC))
    return expm_hermitian(gen, angle)


def compose_dwell_steps(steps: Sequence[DwellStep], axes: RotationAxes) -> np.ndarray:
    """2x2 logical unitary realized by a dwell-step list (later steps left)."""
    u = np.eye(2, dtype=complex)
    for s in steps:
        axis, rate = axes.axis_and_rate(s.actuator_level)
        angle = PHASE_PER_KHZ_US * rate * s.dwell_time_us
        u = _axis_rotation(np.asarray(axis), angle) @ u
    return u


_DWELL_PATTERNS = (
    (0,), (1,), (-1,),
    (1, -1, 1), (-1, 1, -1), (0, 1, 0), (1, 0, 1), (0, -1, 0), (-1, 0, -1),
    (1, -1, 1, -1, 1), (-1, 1, -1, 1, -1),
)


def synthesize_single_qubit(
    target: np.ndarray,
    axes: RotationAxes,
    fidelity_goal: float = 0.999,
) -> list[DwellStep]:
    """Decompose a 2x2 target into at most 5 dwell steps.

    Tries single-axis solutions first, then alternating three- and five-step
    patterns, solving for the rotation angles numerically. Deterministic.

    Raises:
        ValueError: for a non-unitary target or collinear axes (B = 0).
    """
    t = np.asarray(target, dtype=complex)
    if t.shape != (2, 2) or np.abs(t.conj().T @ t - np.eye(2)).max() > 1e-9:
        raise ValueError("target must be a 2x2 unitary")
    if abs(np.trace(t)) / 2.0 > 1.0 - 1e-12:
        return []
    if np.linalg.norm(np.cross(axes.n0, axes.n_plus1)) < 1e-9:
        raise ValueError("rotation axes are collinear (B = 0); universality lost")

    def infidelity(angles: np.ndarray, pattern: tuple[int, ...]) -> float:
        u = np.eye(2, dtype=complex)
        for level, angle in zip(pattern, angles):
            axis, _ = axes.axis_and_rate(level)
            u = _axis_rotation(np.asarray(axis), float(angle)) @ u
        return 1.0 - abs(np.trace(t.conj().T @ u)) / 2.0

    rng = np.random.default_rng(7)
    for pattern in _DWELL_PATTERNS:
        n = len(pattern)
        starts = [np.full(n, np.pi / 2), np.full(n, np.pi), np.full(n, 3 * np.pi / 2)]
        starts += [rng.uniform(0.0, 2.0 * np.pi, n) for _ in range(6)]
        for x0 in starts:
            res = minimize(
                infidelity,
                x0,
                args=(pattern,),
                method="L-BFGS-B",
                bounds=[(0.0, 2.0 * np.pi)] * n,
            )
            if res.fun <= 1.0 - fidelity_goal:
                steps = []
                for level, angle in zip(pattern, res.x):
                    _, rate = axes.axis_and_rate(level)
                    dwell = float(angle) / (PHASE_PER_KHZ_US * rate)
                    if dwell > 1e-6:
                        steps.append(DwellStep(actuator_level=level, dwell_time_us=dwell))
                return steps
    raise ProtocolError("no dwell decomposition reached the fidelity goal")
