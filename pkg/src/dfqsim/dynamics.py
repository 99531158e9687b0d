"""Piecewise-constant time evolution, fidelity metrics and parametric noise.

Propagators are built as ``U = exp(-i * 2pi * 1e-3 * H * t)`` with H in kHz
and t in microseconds, via eigendecomposition of the Hermitian generator.
The drive amplitude error delta1 scales only the control term; coupling
jitter shifts every B of the free Hamiltonian (quasi-static, one value per
run).
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .constants import PHASE_PER_KHZ_US
from .logical import LogicalHamiltonian
from .operators import (
    HilbertSpaceLayout,
    actuator_two_level_ops,
    is_hermitian,
    kron_all,
    trace_out_slot,
)


@dataclass(frozen=True)
class ControlSegment:
    """One piecewise-constant drive segment.

    Attributes:
        duration_us: Segment length (us), > 0.
        axis_phase: Drive phase phi in rad (0 = x, pi/2 = y).
        amplitude_khz: Signed Rabi amplitude omega_1 (kHz).
    """

    duration_us: float
    axis_phase: float
    amplitude_khz: float

    def __post_init__(self):
        if self.duration_us <= 0.0:
            raise ValueError("segment duration must be positive")


@dataclass(frozen=True)
class PulseSequence:
    """Ordered control segments in the electron-rotating frame."""

    segments: tuple[ControlSegment, ...]

    @property
    def total_duration_us(self) -> float:
        return sum(s.duration_us for s in self.segments)

    @property
    def amplitudes_khz(self) -> np.ndarray:
        return np.array([s.amplitude_khz for s in self.segments])


def alternating_xy_sequence(amplitudes_khz: Sequence[float], segment_duration_us: float) -> PulseSequence:
    """Segments of equal duration with phases alternating x, y, x, y, ..."""
    segs = tuple(
        ControlSegment(
            duration_us=segment_duration_us,
            axis_phase=0.0 if k % 2 == 0 else 0.5 * np.pi,
            amplitude_khz=float(a),
        )
        for k, a in enumerate(amplitudes_khz)
    )
    return PulseSequence(segments=segs)


@dataclass(frozen=True)
class NoiseModel:
    """Static control-field error and coupling jitter.

    Attributes:
        delta1: Fractional Rabi-amplitude error (drive term only).
        coupling_jitter_khz: Additive perturbation of every B coupling.
    """

    delta1: float = 0.0
    coupling_jitter_khz: float = 0.0

    def __post_init__(self):
        if abs(self.delta1) > 0.2:
            raise ValueError("delta1 outside the supported +-0.2 range")
        if not np.isfinite(self.coupling_jitter_khz):
            raise ValueError("coupling jitter must be finite")


NO_NOISE = NoiseModel()


@dataclass(frozen=True)
class QuantumState:
    """Density matrix with its tensor-product layout."""

    density_matrix: np.ndarray
    layout: HilbertSpaceLayout

    def __post_init__(self):
        rho = self.density_matrix
        if rho.shape != (self.layout.dim,) * 2:
            raise ValueError("density matrix does not match layout")
        if abs(np.trace(rho) - 1.0) > 1e-10:
            raise ValueError("density matrix trace differs from 1")
        if not is_hermitian(rho, rtol=1e-10):
            raise ValueError("density matrix is not Hermitian")
        if np.linalg.eigvalsh(rho).min() < -1e-10:
            raise ValueError("density matrix has a negative eigenvalue")


def expm_hermitian(h: np.ndarray, angle_scale: float) -> np.ndarray:
    """exp(-1j * angle_scale * h) for Hermitian h, via eigendecomposition."""
    vals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(-1j * angle_scale * vals)) @ vecs.conj().T


def _drive_operators_for(h_free: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Raw-matrix convention: the actuator is the first factor with dim 2.
    dim = h_free.shape[0]
    if dim % 2 != 0:
        raise ValueError("cannot infer a two-level actuator from an odd dimension")
    sx, sy, _ = actuator_two_level_ops()
    rest = np.eye(dim // 2, dtype=complex)
    return kron_all(sx, rest), kron_all(sy, rest)


def _resolve_free(
    h_free: Union[np.ndarray, LogicalHamiltonian], noise: NoiseModel
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if isinstance(h_free, LogicalHamiltonian):
        dx, dy = h_free.drive_operators()
        return h_free.h_free(noise.coupling_jitter_khz), dx, dy
    h = np.asarray(h_free, dtype=complex)
    if not is_hermitian(h, rtol=1e-9):
        raise ValueError("free Hamiltonian is not Hermitian")
    if noise.coupling_jitter_khz != 0.0:
        raise ValueError("coupling jitter needs a structured LogicalHamiltonian")
    dx, dy = _drive_operators_for(h)
    return h, dx, dy


def propagate_segment(
    h_free: Union[np.ndarray, LogicalHamiltonian],
    segment: ControlSegment,
    noise: NoiseModel = NO_NOISE,
) -> np.ndarray:
    """Unitary of one segment under free + (1 + delta1)-scaled drive Hamiltonian."""
    h, dx, dy = _resolve_free(h_free, noise)
    h_seg = h + (1.0 + noise.delta1) * segment.amplitude_khz * (
        np.cos(segment.axis_phase) * dx + np.sin(segment.axis_phase) * dy
    )
    return expm_hermitian(h_seg, PHASE_PER_KHZ_US * segment.duration_us)


def sequence_unitary(
    h_free: Union[np.ndarray, LogicalHamiltonian],
    sequence: PulseSequence,
    noise: NoiseModel = NO_NOISE,
) -> np.ndarray:
    """Ordered product of segment propagators (later segments on the left)."""
    if isinstance(h_free, LogicalHamiltonian):
        dim = h_free.dim
    else:
        dim = np.asarray(h_free).shape[0]
    u = np.eye(dim, dtype=complex)
    for seg in sequence.segments:
        u = propagate_segment(h_free, seg, noise) @ u
    return u


def evolve_state(state: QuantumState, unitary: np.ndarray) -> QuantumState:
    rho = unitary @ state.density_matrix @ unitary.conj().T
    return QuantumState(density_matrix=rho, layout=state.layout)


def actuator_reset(state: QuantumState) -> QuantumState:
    """Replace the actuator factor by |0><0|, preserving the nuclear factors.

    The actuator must be the first layout factor. Its |0> level is index 0
    for the two-level ordering |0>, |1> and index 1 for the spin-1 ordering
    |+1>, |0>, |-1>.
    """
    layout = state.layout
    slot = layout.slot("actuator") if "actuator" in layout.labels else 0
    d_act = layout.factor_dims[slot]
    if slot != 0:
        raise ValueError("actuator_reset expects the actuator at slot 0")
    ground_index = 1 if d_act == 3 else 0
    rest = trace_out_slot(state.density_matrix, layout, slot)
    ket = np.zeros((d_act, 1), dtype=complex)
    ket[ground_index] = 1.0
    rho = kron_all(ket @ ket.conj().T, rest)
    return QuantumState(density_matrix=rho, layout=layout)


def gate_fidelity(
    u: np.ndarray,
    target: np.ndarray,
    subspace_projector: Optional[np.ndarray] = None,
) -> float:
    """Phase-insensitive overlap |Tr(target^dag P u P)| / d on the projected block.

    ``d`` is the rank of the projector (full dimension when absent). The
    metric is symmetric in its two arguments.
    """
    u = np.asarray(u, dtype=complex)
    t = np.asarray(target, dtype=complex)
    if u.shape != t.shape:
        raise ValueError("dimension mismatch between unitary and target")
    if subspace_projector is None:
        d = u.shape[0]
        return float(abs(np.trace(t.conj().T @ u)) / d)
    p = np.asarray(subspace_projector, dtype=complex)
    d = int(round(np.real(np.trace(p))))
    if d == 0:
        raise ValueError("zero-dimensional projector")
    return float(abs(np.trace((p @ t @ p).conj().T @ (p @ u @ p))) / d)


@dataclass(frozen=True)
class FidelityTable:
    """Gate fidelity over a (delta1, jitter) grid."""

    delta1_values: np.ndarray
    jitter_values_khz: np.ndarray
    fidelity: np.ndarray  # shape (len(delta1), len(jitter))

    def rows(self):
        for i, d1 in enumerate(self.delta1_values):
            for j, jit in enumerate(self.jitter_values_khz):
                yield float(d1), float(jit), float(self.fidelity[i, j])


def noise_sweep(
    model: LogicalHamiltonian,
    sequence: PulseSequence,
    target: np.ndarray,
    delta1_grid: Sequence[float],
    jitter_grid_khz: Sequence[float],
    subspace_projector: Optional[np.ndarray] = None,
) -> FidelityTable:
    """Evaluate the sequence fidelity at every grid point; deterministic."""
    d1s = np.atleast_1d(np.asarray(delta1_grid, dtype=float))
    jits = np.atleast_1d(np.asarray(jitter_grid_khz, dtype=float))
    if d1s.size == 0 or jits.size == 0:
        raise ValueError("noise grids must be nonempty")
    out = np.zeros((d1s.size, jits.size))
    for i, d1 in enumerate(d1s):
        for j, jit in enumerate(jits):
            noise = NoiseModel(delta1=float(d1), coupling_jitter_khz=float(jit))
            u = sequence_unitary(model, sequence, noise)
            out[i, j] = gate_fidelity(u, target, subspace_projector)
    return FidelityTable(delta1_values=d1s, jitter_values_khz=jits, fidelity=out)


DEFAULT_DELTA1_GRID = tuple(np.round(np.arange(-0.05, 0.0501, 0.005), 4))
