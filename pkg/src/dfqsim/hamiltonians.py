"""Hamiltonians of the actuator / nuclear-spin-pair system, in kHz.

The full layout is ``actuator (spin-1) x pair-1-P x pair-1-Q x ...`` with
spin-1/2 nuclear factors. Inter-pair nuclear couplings are dropped (they are
at the hertz level for 2 nm spacing).
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .constants import PhysicalConstants
from .geometry import SceneGeometry, actuator_tensor, pair_tensor
from .operators import HilbertSpaceLayout, embed, is_hermitian, spin_operators


class Frame(Enum):
    LAB = "lab"
    ELECTRON_ROTATING = "electron-rotating"


@dataclass(frozen=True)
class HamiltonianTerm:
    """A Hermitian operator over a declared layout, elements in kHz."""

    matrix: np.ndarray
    label: str
    layout: HilbertSpaceLayout
    frame: Frame = Frame.LAB

    def __post_init__(self):
        if self.matrix.shape != (self.layout.dim,) * 2:
            raise ValueError("matrix dimension does not match layout")
        if not is_hermitian(self.matrix, rtol=1e-12):
            raise ValueError(f"{self.label}: matrix is not Hermitian")


def scene_layout(scene: SceneGeometry) -> HilbertSpaceLayout:
    labels = ["actuator"]
    dims = [3]
    for m, _ in enumerate(scene.pairs, start=1):
        labels += [f"pair-{m}-P", f"pair-{m}-Q"]
        dims += [2, 2]
    return HilbertSpaceLayout(factor_dims=tuple(dims), labels=tuple(labels))


def build_h_nv(
    constants: PhysicalConstants = PhysicalConstants(),
    layout: HilbertSpaceLayout | None = None,
) -> HamiltonianTerm:
    """Actuator Hamiltonian D Sz^2 + omega_e Sz over the |+1>, |0>, |-1> basis."""
    if layout is None:
        layout = HilbertSpaceLayout(factor_dims=(3,), labels=("actuator",))
    _, _, sz = spin_operators(1.0)
    h3 = constants.d_khz * (sz @ sz) + constants.omega_e_khz * sz
    slot = layout.slot("actuator")
    return HamiltonianTerm(
        matrix=embed(h3, slot, layout), label="H_NV", layout=layout, frame=Frame.LAB
    )


def _pair_slots(layout: HilbertSpaceLayout, pair_number: int) -> tuple[int, int]:
    return layout.slot(f"pair-{pair_number}-P"), layout.slot(f"pair-{pair_number}-Q")


def build_h_pairs(
    scene: SceneGeometry,
    constants: PhysicalConstants = PhysicalConstants(),
    layout: HilbertSpaceLayout | None = None,
) -> HamiltonianTerm:
    """Nuclear Zeeman terms plus the full intra-pair dipolar coupling I.D^pq.I."""
    if layout is None:
        layout = scene_layout(scene)
    ops = spin_operators(0.5)
    h = np.zeros((layout.dim,) * 2, dtype=complex)
    for m, pair in enumerate(scene.pairs, start=1):
        slot_p, slot_q = _pair_slots(layout, m)
        iz_p = embed(ops[2], slot_p, layout)
        iz_q = embed(ops[2], slot_q, layout)
        h += constants.omega_i_khz * (iz_p + iz_q)
        tensor = pair_tensor(pair, constants)
        for i in range(3):
            op_i = embed(ops[i], slot_p, layout)
            for j in range(3):
                h += tensor[i, j] * (op_i @ embed(ops[j], slot_q, layout))
    return HamiltonianTerm(matrix=h, label="H_pairs", layout=layout, frame=Frame.LAB)


def build_h_nv_pairs_full(
    scene: SceneGeometry,
    constants: PhysicalConstants = PhysicalConstants(),
    layout: HilbertSpaceLayout | None = None,
) -> HamiltonianTerm:
    """Full (non-secular) actuator-nucleus interaction sum_j S.D.I."""
    if layout is None:
        layout = scene_layout(scene)
    s_ops = spin_operators(1.0)
    i_ops = spin_operators(0.5)
    act = layout.slot("actuator")
    h = np.zeros((layout.dim,) * 2, dtype=complex)
    for m, pair in enumerate(scene.pairs, start=1):
        for slot, pos in zip(_pair_slots(layout, m), (pair.position_p, pair.position_q)):
            tensor = actuator_tensor(scene.actuator_position, pos, constants)
            for i in range(3):
                s_i = embed(s_ops[i], act, layout)
                for j in range(3):
                    h += tensor[i, j] * (s_i @ embed(i_ops[j], slot, layout))
    return HamiltonianTerm(matrix=h, label="H_NV-pairs", layout=layout, frame=Frame.LAB)


def build_h_nv_pairs_secular(
    scene: SceneGeometry,
    constants: PhysicalConstants = PhysicalConstants(),
    layout: HilbertSpaceLayout | None = None,
) -> HamiltonianTerm:
    """Secular actuator-nucleus interaction: only Sz (D_zx Ix + D_zy Iy + D_zz Iz).

    Block-diagonal in the actuator Sz sectors; the large zero-field splitting
    justifies dropping the Sx, Sy rows of the tensor.
    """
    if layout is None:
        layout = scene_layout(scene)
    s_ops = spin_operators(1.0)
    i_ops = spin_operators(0.5)
    act = layout.slot("actuator")
    sz = embed(s_ops[2], act, layout)
    h = np.zeros((layout.dim,) * 2, dtype=complex)
    for m, pair in enumerate(scene.pairs, start=1):
        for slot, pos in zip(_pair_slots(layout, m), (pair.position_p, pair.position_q)):
            tensor = actuator_tensor(scene.actuator_position, pos, constants)
            for j in range(3):
                h += tensor[2, j] * (sz @ embed(i_ops[j], slot, layout))
    return HamiltonianTerm(
        matrix=h, label="H_NV-pairs secular", layout=layout, frame=Frame.LAB
    )


def build_total(
    scene: SceneGeometry,
    constants: PhysicalConstants = PhysicalConstants(),
    secular: bool = False,
) -> HamiltonianTerm:
    """H_NV + H_pairs + interaction (full or secular) on the scene layout."""
    layout = scene_layout(scene)
    interaction = build_h_nv_pairs_secular if secular else build_h_nv_pairs_full
    h = (
        build_h_nv(constants, layout).matrix
        + build_h_pairs(scene, constants, layout).matrix
        + interaction(scene, constants, layout).matrix
    )
    label = "H_total secular" if secular else "H_total"
    return HamiltonianTerm(matrix=h, label=label, layout=layout, frame=Frame.LAB)


def pair_hamiltonian(
    scene: SceneGeometry,
    pair_index: int = 0,
    constants: PhysicalConstants = PhysicalConstants(),
) -> np.ndarray:
    """4x4 Hamiltonian of a single pair (Zeeman + intra-pair dipolar), in kHz.

    Product basis |uu>, |ud>, |du>, |dd>; the actuator is absent (state |0>).
    """
    pair = scene.pairs[pair_index]
    single = SceneGeometry(actuator=scene.actuator, pairs=(pair,))
    layout = HilbertSpaceLayout(factor_dims=(2, 2), labels=("pair-1-P", "pair-1-Q"))
    return build_h_pairs(single, constants, layout).matrix
