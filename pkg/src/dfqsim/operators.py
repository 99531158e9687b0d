"""Spin operators, Hilbert-space layouts and tensor-product plumbing.

Basis conventions
-----------------
* Spin-1 (actuator) basis order: ``|+1>, |0>, |-1>``.
* Spin-1/2 basis order: ``|up>, |down>``.
* The two-level actuator subspace is ordered ``|0>, |1>`` where ``|1>`` is
  the driven Zeeman level (``|+1>`` or ``|-1>``).
* Two-spin pair product basis order: ``|uu>, |ud>, |du>, |dd>``; singlet and
  triplet combinations are built from it.
"""

from dataclasses import dataclass, field

import numpy as np

SQRT2 = np.sqrt(2.0)


def spin_operators(spin_magnitude: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cartesian spin matrices (Sx, Sy, Sz) for spin 1/2 or 1.

    Basis is ordered by decreasing magnetic quantum number, so
    ``Sz = diag(s, s-1, ..., -s)``.

    Raises:
        ValueError: for any spin magnitude other than 1/2 or 1.
    """
    if spin_magnitude == 0.5:
        sx = np.array([[0.0, 0.5], [0.5, 0.0]], dtype=complex)
        sy = np.array([[0.0, -0.5j], [0.5j, 0.0]], dtype=complex)
        sz = np.diag([0.5, -0.5]).astype(complex)
        return sx, sy, sz
    if spin_magnitude == 1.0:
        sx = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex) / SQRT2
        sy = np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex) / SQRT2
        sz = np.diag([1.0, 0.0, -1.0]).astype(complex)
        return sx, sy, sz
    raise ValueError(f"unsupported spin magnitude: {spin_magnitude!r}")


def actuator_two_level_ops() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Effective spin-1/2 operators (s_x, s_y, s_z) of the driven actuator.

    Defined on the ordered basis ``|0>, |1>``:
    ``s_x = (|1><0| + |0><1|)/2``, ``s_y = (-i|1><0| + i|0><1|)/2``,
    ``s_z = (|1><1| - |0><0|)/2``.
    """
    sx = np.array([[0.0, 0.5], [0.5, 0.0]], dtype=complex)
    sy = np.array([[0.0, 0.5j], [-0.5j, 0.0]], dtype=complex)
    sz = np.diag([-0.5, 0.5]).astype(complex)
    return sx, sy, sz


@dataclass(frozen=True)
class HilbertSpaceLayout:
    """Ordered tensor-product structure of the simulated Hilbert space.

    Attributes:
        factor_dims: Dimension of each subsystem, in kron order.
        labels: Subsystem names, e.g. ("actuator", "pair-1-P", "pair-1-Q").
    """

    factor_dims: tuple[int, ...]
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.factor_dims:
            raise ValueError("layout needs at least one factor")
        if any(d < 1 for d in self.factor_dims):
            raise ValueError("factor dimensions must be positive")
        if self.labels and len(self.labels) != len(self.factor_dims):
            raise ValueError("labels and factor_dims length mismatch")

    @property
    def dim(self) -> int:
        return int(np.prod(self.factor_dims))

    def slot(self, label: str) -> int:
        return self.labels.index(label)


def embed(op: np.ndarray, slot: int, layout: HilbertSpaceLayout) -> np.ndarray:
    """Kronecker-embed ``op`` at ``slot`` with identities on every other factor."""
    op = np.asarray(op, dtype=complex)
    if not 0 <= slot < len(layout.factor_dims):
        raise ValueError(f"slot {slot} outside layout")
    if op.shape != (layout.factor_dims[slot],) * 2:
        raise ValueError(
            f"operator shape {op.shape} does not match factor dim "
            f"{layout.factor_dims[slot]} at slot {slot}"
        )
    out = np.eye(1, dtype=complex)
    for k, d in enumerate(layout.factor_dims):
        out = np.kron(out, op if k == slot else np.eye(d, dtype=complex))
    return out


def kron_all(*ops: np.ndarray) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for op in ops:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def is_hermitian(m: np.ndarray, rtol: float = 1e-12) -> bool:
    m = np.asarray(m)
    scale = max(np.abs(m).max(), 1.0)
    return bool(np.abs(m - m.conj().T).max() <= rtol * scale)


def partial_trace(rho: np.ndarray, layout: HilbertSpaceLayout, keep_slot: int) -> np.ndarray:
    """Trace out every factor except ``keep_slot``."""
    dims = layout.factor_dims
    rho = np.asarray(rho).reshape(dims + dims)
    n = len(dims)
    for k in reversed(range(n)):
        if k == keep_slot:
            continue
        rho = np.trace(rho, axis1=k, axis2=k + rho.ndim // 2)
    return rho


def trace_out_slot(rho: np.ndarray, layout: HilbertSpaceLayout, drop_slot: int) -> np.ndarray:
    """Trace out a single factor, keeping the rest in original order."""
    dims = layout.factor_dims
    rho = np.asarray(rho).reshape(dims + dims)
    rho = np.trace(rho, axis1=drop_slot, axis2=drop_slot + len(dims))
    rest = int(np.prod(dims)) // dims[drop_slot]
    return rho.reshape(rest, rest)


# Two-spin pair states in the product basis |uu>, |ud>, |du>, |dd>.
def singlet_state() -> np.ndarray:
    return np.array([0.0, 1.0, -1.0, 0.0], dtype=complex) / SQRT2


def triplet_zero_state() -> np.ndarray:
    return np.array([0.0, 1.0, 1.0, 0.0], dtype=complex) / SQRT2


def triplet_plus_state() -> np.ndarray:
    return np.array([1.0, 0.0, 0.0, 0.0], dtype=complex)


def triplet_minus_state() -> np.ndarray:
    return np.array([0.0, 0.0, 0.0, 1.0], dtype=complex)


def pair_state_matrix() -> np.ndarray:
    """Columns are |S0>, |T0>, |T+1>, |T-1> expressed in the product basis."""
    return np.column_stack(
        [singlet_state(), triplet_zero_state(), triplet_plus_state(), triplet_minus_state()]
    )
