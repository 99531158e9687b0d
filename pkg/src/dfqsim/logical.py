"""Reduction onto the decoherence-free subspace and the logical model.

Basis conventions
-----------------
The pair's "protocol basis" is the ordered set |S0>, |T0>, |T+1>, |T-1>,
with the logical qubit |0_L> = |S0>, |1_L> = |T0>. The logical spin
operators of the reduced model act on the first two slots and annihilate
|T+-1>; in the logical basis they read

    I^L_x = diag(-1/2, +1/2),   I^L_y = [[0, -i/2], [i/2, 0]],
    I^L_z = [[0, 1/2], [1/2, 0]].

The reduced Hamiltonian of one driven actuator and n DF qubits is

    H = w1 (cos(phi) s_x + sin(phi) s_y)
        + sum_q [ A_q I^L_x(q) + 2 B_q (s_z + 1/2) I^L_z(q) ],

all in kHz, over the kron layout actuator(2) x qubit_1(2) x ... The constant
-D^pq_zz / 4 of the exact reduction only contributes a global phase and is
dropped.
"""

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .geometry import CouplingSet
from .operators import (
    HilbertSpaceLayout,
    actuator_two_level_ops,
    embed,
    kron_all,
    pair_state_matrix,
)

# Logical spin-1/2 operators in the ordered basis |0_L>, |1_L>.
IL_X = np.diag([-0.5, 0.5]).astype(complex)
IL_Y = np.array([[0.0, -0.5j], [0.5j, 0.0]], dtype=complex)
IL_Z = np.array([[0.0, 0.5], [0.5, 0.0]], dtype=complex)


@dataclass(frozen=True)
class LogicalBasis:
    """Ordered DF-subspace basis vectors in the pair's 4-dim product space."""

    basis_map: np.ndarray  # columns: |S0>, |T0>, |T+1>, |T-1>

    @staticmethod
    def default() -> "LogicalBasis":
        return LogicalBasis(basis_map=pair_state_matrix())

    @property
    def subspace_projector(self) -> np.ndarray:
        v = self.basis_map[:, :2]
        return v @ v.conj().T

    def logical_operator(self, which: str) -> np.ndarray:
        """I^L_x / I^L_y / I^L_z over the full 4-dim pair space (zero on |T+-1>)."""
        small = {"x": IL_X, "y": IL_Y, "z": IL_Z}[which]
        v = self.basis_map[:, :2]
        return v @ small @ v.conj().T


def pair_operator_4(op2: np.ndarray) -> np.ndarray:
    """Extend a logical-basis 2x2 operator to the 4-dim protocol basis
    [S0, T0, T+1, T-1] (zero action on the triplet +-1 slots)."""
    out = np.zeros((4, 4), dtype=complex)
    out[:2, :2] = op2
    return out


@dataclass(frozen=True)
class LogicalHamiltonian:
    """Reduced actuator + DF-qubit model; couplings and drive in kHz / rad.

    ``b_list`` holds one B per DF qubit sharing the actuator; ``a_list`` the
    matching intra-pair couplings.
    """

    a_list: tuple[float, ...]
    b_list: tuple[float, ...]
    rabi_omega1: float = 0.0
    phase_phi: float = 0.0

    def __post_init__(self):
        if len(self.a_list) != len(self.b_list) or not self.a_list:
            raise ValueError("need one (A, B) per DF qubit")

    @property
    def n_qubits(self) -> int:
        return len(self.a_list)

    @property
    def layout(self) -> HilbertSpaceLayout:
        labels = ("actuator",) + tuple(f"df-{q + 1}" for q in range(self.n_qubits))
        return HilbertSpaceLayout(factor_dims=(2,) * (1 + self.n_qubits), labels=labels)

    @property
    def dim(self) -> int:
        return 2 ** (1 + self.n_qubits)

    def drive_operators(self) -> tuple[np.ndarray, np.ndarray]:
        sx, sy, _ = actuator_two_level_ops()
        layout = self.layout
        return embed(sx, 0, layout), embed(sy, 0, layout)

    def h_free(self, jitter_khz: float = 0.0) -> np.ndarray:
        """Free part A I^L_x + 2(B + jitter)(s_z + 1/2) I^L_z, drive excluded."""
        _, _, sz = actuator_two_level_ops()
        layout = self.layout
        sz1 = embed(sz + 0.5 * np.eye(2), 0, layout)
        h = np.zeros((self.dim,) * 2, dtype=complex)
        for q, (a, b) in enumerate(zip(self.a_list, self.b_list)):
            h += a * embed(IL_X, 1 + q, layout)
            h += 2.0 * (b + jitter_khz) * (sz1 @ embed(IL_Z, 1 + q, layout))
        return h

    def matrix(self, jitter_khz: float = 0.0, delta1: float = 0.0) -> np.ndarray:
        """Full reduced Hamiltonian including the (1 + delta1)-scaled drive."""
        dx, dy = self.drive_operators()
        drive = (
            (1.0 + delta1)
            * self.rabi_omega1
            * (np.cos(self.phase_phi) * dx + np.sin(self.phase_phi) * dy)
        )
        return self.h_free(jitter_khz) + drive

    def with_drive(self, rabi_omega1: float, phase_phi: float) -> "LogicalHamiltonian":
        return replace(self, rabi_omega1=rabi_omega1, phase_phi=phase_phi)


def reduce_to_logical(
    couplings: CouplingSet | Sequence[CouplingSet],
    drive: tuple[float, float] = (0.0, 0.0),
) -> LogicalHamiltonian:
    """Reduced model for one or more DF qubits sharing the actuator.

    Args:
        couplings: a CouplingSet per DF qubit (a single set for one qubit).
        drive: (rabi kHz, phase rad) of the resonant actuator drive.
    """
    if isinstance(couplings, CouplingSet):
        couplings = [couplings]
    if not couplings:
        raise ValueError("need at least one coupling set")
    return LogicalHamiltonian(
        a_list=tuple(c.A for c in couplings),
        b_list=tuple(c.B for c in couplings),
        rabi_omega1=drive[0],
        phase_phi=drive[1],
    )


@dataclass(frozen=True)
class RotationAxes:
    """Conditional rotation axes of the DF qubit in the (x, y, z) I^L frame."""

    n0: np.ndarray
    n_plus1: np.ndarray
    n_minus1: np.ndarray
    omega0_khz: float
    omega_pm1_khz: float

    def axis_and_rate(self, level: int) -> tuple[np.ndarray, float]:
        if level == 0:
            return self.n0, self.omega0_khz
        if level == 1:
            return self.n_plus1, self.omega_pm1_khz
        if level == -1:
            return self.n_minus1, self.omega_pm1_khz
        raise ValueError("actuator level must be 0, +1 or -1")


def rotation_axes(couplings: CouplingSet) -> RotationAxes:
    """Axes n_0 = sign(A) x and n_+-1 = (A x +- 2B z)/Omega, with
    Omega_0 = |A| and Omega_+-1 = sqrt(A^2 + 4 B^2)."""
    a, b = couplings.A, couplings.B
    if a == 0.0 and b == 0.0:
        raise ValueError("rotation axes undefined for A = B = 0")
    omega0 = abs(a)
    omega_pm = float(np.hypot(a, 2.0 * b))
    n0 = np.array([np.sign(a) if a != 0.0 else 1.0, 0.0, 0.0])
    n_plus = np.array([a / omega_pm, 0.0, 2.0 * b / omega_pm])
    n_minus = np.array([a / omega_pm, 0.0, -2.0 * b / omega_pm])
    return RotationAxes(
        n0=n0,
        n_plus1=n_plus,
        n_minus1=n_minus,
        omega0_khz=omega0,
        omega_pm1_khz=omega_pm,
    )


def leakage(unitary: np.ndarray, subspace_projector: np.ndarray) -> float:
    """Worst-case population sent out of the subspace by ``unitary``.

    Computed as ||(1 - P) U P||^2 (squared operator norm), the maximum over
    subspace inputs of the transferred population.

    Raises:
        ValueError: if ``unitary`` is not unitary to 1e-9.
    """
    u = np.asarray(unitary)
    d = u.shape[0]
    if np.abs(u.conj().T @ u - np.eye(d)).max() > 1e-9:
        raise ValueError("input is not unitary to 1e-9")
    p = np.asarray(subspace_projector)
    out = (np.eye(d) - p) @ u @ p
    return float(np.linalg.norm(out, ord=2) ** 2)
