"""3-D spin placement, dipolar tensors and the reduced couplings A, B, B'.

Coordinate system: z is the actuator symmetry axis (perpendicular to the
qubit base plane), x and y run along the qubit array. A pair is described
by its midpoint and an axis vector; spins sit at ``midpoint -+ axis/2`` so
that ``Q - P`` equals the axis vector. Actuator-relative scenes place spin P
at ``actuator + r * n(theta, phi)``.

Sign convention of the point-dipole tensor: ``D_ij = b (delta_ij - 3 n_i n_j)``
with ``b = mu0 g1 g2 hbar / (4 pi r^3) / (2 pi)`` in kHz. This reproduces the
reference couplings A = -12.7 kHz (theta = 0.45 pi) and B = -6.0 kHz for the
standard scene.
"""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .constants import PhysicalConstants

PROTON_PAIR_SEPARATION_NM = 0.1635
DEFAULT_LATTICE_SPACING_NM = 2.0


class GeometryError(ValueError):
    """Invalid spin geometry (zero separations, coincident spins, ...)."""


@dataclass(frozen=True)
class SphericalPlacement:
    """A displacement in spherical coordinates.

    Attributes:
        r: Radial distance (nm), > 0.
        theta: Polar angle from the z axis (rad), in [0, pi].
        phi: Azimuth from the x axis in the xy plane (rad).
    """

    r: float
    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if self.r <= 0.0:
            raise GeometryError("radial distance must be positive")
        if not 0.0 <= self.theta <= np.pi:
            raise GeometryError("theta must lie in [0, pi]")

    def to_vector(self) -> np.ndarray:
        st, ct = np.sin(self.theta), np.cos(self.theta)
        return self.r * np.array([st * np.cos(self.phi), st * np.sin(self.phi), ct])


@dataclass(frozen=True)
class SpinPair:
    """A homonuclear spin pair: midpoint position plus pair-axis placement."""

    midpoint: tuple[float, float, float]
    axis: SphericalPlacement

    @property
    def position_p(self) -> np.ndarray:
        return np.asarray(self.midpoint, dtype=float) - 0.5 * self.axis.to_vector()

    @property
    def position_q(self) -> np.ndarray:
        return np.asarray(self.midpoint, dtype=float) + 0.5 * self.axis.to_vector()

    @staticmethod
    def from_actuator_relative(
        actuator: np.ndarray, p_placement: SphericalPlacement, axis: SphericalPlacement
    ) -> "SpinPair":
        """Build a pair from the placement of spin P relative to the actuator."""
        p = np.asarray(actuator, dtype=float) + p_placement.to_vector()
        mid = p + 0.5 * axis.to_vector()
        return SpinPair(midpoint=tuple(mid), axis=axis)


@dataclass(frozen=True)
class SceneGeometry:
    """Actuator position plus the spin pairs it interacts with."""

    actuator: tuple[float, float, float]
    pairs: tuple[SpinPair, ...]
    lattice_spacing_nm: float = DEFAULT_LATTICE_SPACING_NM

    def __post_init__(self):
        if not self.pairs:
            raise GeometryError("scene needs at least one pair")
        if self.lattice_spacing_nm <= 0.0:
            raise GeometryError("lattice spacing must be positive")
        act = np.asarray(self.actuator, dtype=float)
        for pair in self.pairs:
            for pos in (pair.position_p, pair.position_q):
                if np.linalg.norm(pos - act) < 1e-9:
                    raise GeometryError("actuator coincides with a nuclear spin")

    @property
    def actuator_position(self) -> np.ndarray:
        return np.asarray(self.actuator, dtype=float)


@dataclass(frozen=True)
class CouplingSet:
    """Reduced couplings of the logical model, all in kHz."""

    A: float
    B: float
    B_prime: Optional[float] = None

    def __post_init__(self):
        values = [self.A, self.B] + ([] if self.B_prime is None else [self.B_prime])
        if not all(np.isfinite(values)):
            raise ValueError("couplings must be finite")


def dipole_tensor(
    separation_nm: np.ndarray,
    gamma1: float,
    gamma2: float,
    constants: PhysicalConstants = PhysicalConstants(),
) -> np.ndarray:
    """Point-dipole interaction tensor ``b (delta_ij - 3 n_i n_j)`` in kHz.

    Args:
        separation_nm: 3-vector between the two spins (nm).
        gamma1, gamma2: Gyromagnetic ratios (rad s^-1 T^-1).

    Returns:
        Symmetric traceless 3x3 matrix (kHz).

    Raises:
        GeometryError: if the separation is zero.
    """
    sep = np.asarray(separation_nm, dtype=float)
    r = np.linalg.norm(sep)
    if r < 1e-12:
        raise GeometryError("zero separation between spins")
    n = sep / r
    b = constants.dipolar_prefactor_khz(gamma1, gamma2, r)
    return b * (np.eye(3) - 3.0 * np.outer(n, n))


def pair_tensor(pair: SpinPair, constants: PhysicalConstants = PhysicalConstants()) -> np.ndarray:
    """Intra-pair nuclear dipolar tensor D^pq (kHz)."""
    sep = pair.position_q - pair.position_p
    return dipole_tensor(sep, constants.gamma_proton, constants.gamma_proton, constants)


def actuator_tensor(
    actuator: np.ndarray, spin_pos: np.ndarray, constants: PhysicalConstants = PhysicalConstants()
) -> np.ndarray:
    """Actuator-nucleus dipolar tensor (kHz)."""
    sep = np.asarray(spin_pos, dtype=float) - np.asarray(actuator, dtype=float)
    return dipole_tensor(sep, constants.gamma_electron, constants.gamma_proton, constants)


def coupling_A(
    pair_axis: SphericalPlacement, constants: PhysicalConstants = PhysicalConstants()
) -> float:
    """Intra-pair coupling A = (D^pq_xx + D^pq_yy) / 2 in kHz; phi-invariant."""
    tensor = dipole_tensor(
        pair_axis.to_vector(), constants.gamma_proton, constants.gamma_proton, constants
    )
    return 0.5 * (tensor[0, 0] + tensor[1, 1])


def coupling_B(
    actuator: np.ndarray, pair: SpinPair, constants: PhysicalConstants = PhysicalConstants()
) -> float:
    """Actuator-pair coupling B = (D^p_zz - D^q_zz) / 2 in kHz."""
    dzz_p = actuator_tensor(actuator, pair.position_p, constants)[2, 2]
    dzz_q = actuator_tensor(actuator, pair.position_q, constants)[2, 2]
    return 0.5 * (dzz_p - dzz_q)


def couplings_for(
    scene: SceneGeometry,
    pair_index: int = 0,
    neighbor_index: Optional[int] = None,
    constants: PhysicalConstants = PhysicalConstants(),
) -> CouplingSet:
    """A and B of one pair of a scene, plus B' to a neighbor pair if given."""
    pair = scene.pairs[pair_index]
    a = coupling_A(pair.axis, constants)
    b = coupling_B(scene.actuator_position, pair, constants)
    b_prime = None
    if neighbor_index is not None:
        b_prime = coupling_B(scene.actuator_position, scene.pairs[neighbor_index], constants)
    return CouplingSet(A=a, B=b, B_prime=b_prime)


# --- reference scenes -------------------------------------------------------

def standard_scene(case: int = 1) -> SceneGeometry:
    """Single-pair scenes used throughout: case 1 gives A = -12.7, B = -6.0 kHz,
    case 2 gives A = -5.2, B = -6.7 kHz."""
    if case == 1:
        p_placement = SphericalPlacement(r=1.3, theta=0.05 * np.pi, phi=0.2 * np.pi)
        axis = SphericalPlacement(r=PROTON_PAIR_SEPARATION_NM, theta=0.45 * np.pi, phi=0.0)
    elif case == 2:
        p_placement = SphericalPlacement(r=1.4, theta=0.07 * np.pi, phi=0.1 * np.pi)
        axis = SphericalPlacement(r=PROTON_PAIR_SEPARATION_NM, theta=0.35 * np.pi, phi=0.0)
    else:
        raise ValueError("case must be 1 or 2")
    actuator = np.zeros(3)
    pair = SpinPair.from_actuator_relative(actuator, p_placement, axis)
    return SceneGeometry(actuator=(0.0, 0.0, 0.0), pairs=(pair,))


def two_qubit_scene(
    displacement_nm: float = 0.85,
    height_nm: float = 1.0,
    spacing_nm: float = DEFAULT_LATTICE_SPACING_NM,
) -> SceneGeometry:
    """Two pairs ``spacing_nm`` apart with the actuator between them.

    Pair 1 sits at the origin with axis angle 0.45 pi, pair 2 at
    ``(spacing, 0, 0)`` with axis angle 0.35 pi; the actuator is at
    ``(displacement, 0, height)``. The reference displacement 0.85 nm gives
    B1 = 8.0 kHz and B2 = -3.7 kHz.
    """
    pair1 = SpinPair(
        midpoint=(0.0, 0.0, 0.0),
        axis=SphericalPlacement(PROTON_PAIR_SEPARATION_NM, 0.45 * np.pi, 0.0),
    )
    pair2 = SpinPair(
        midpoint=(spacing_nm, 0.0, 0.0),
        axis=SphericalPlacement(PROTON_PAIR_SEPARATION_NM, 0.35 * np.pi, 0.0),
    )
    return SceneGeometry(
        actuator=(displacement_nm, 0.0, height_nm),
        pairs=(pair1, pair2),
        lattice_spacing_nm=spacing_nm,
    )


def two_qubit_profile(
    d_values_nm: np.ndarray,
    height_nm: float = 1.0,
    spacing_nm: float = DEFAULT_LATTICE_SPACING_NM,
    constants: PhysicalConstants = PhysicalConstants(),
) -> np.ndarray:
    """Couplings B1, B2 versus actuator displacement for the two-pair scene.

    Returns:
        Array of rows (d_nm, B1_khz, B2_khz).
    """
    rows = []
    for d in np.atleast_1d(d_values_nm):
        scene = two_qubit_scene(float(d), height_nm, spacing_nm)
        b1 = coupling_B(scene.actuator_position, scene.pairs[0], constants)
        b2 = coupling_B(scene.actuator_position, scene.pairs[1], constants)
        rows.append((float(d), b1, b2))
    return np.array(rows)


# --- orientation-averaged coupling maps (Fig.-S1-style histograms) ----------

@dataclass(frozen=True)
class CouplingHistogram:
    """Histogram over |coupling| values: bin edges (kHz) and probability mass."""

    bin_edges: np.ndarray
    mass: np.ndarray

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def mode_khz(self) -> float:
        return float(self.bin_centers[int(np.argmax(self.mass))])


@dataclass(frozen=True)
class CouplingMaps:
    """Sampled distributions of |A|, |B| and |B'| plus the raw samples."""

    a_hist: CouplingHistogram
    b_hist: CouplingHistogram
    b_prime_hist: CouplingHistogram
    a_samples: np.ndarray
    b_samples: np.ndarray
    b_prime_samples: np.ndarray


def _histogram(samples: np.ndarray, bin_width_khz: float) -> CouplingHistogram:
    top = max(samples.max(), bin_width_khz)
    edges = np.arange(0.0, top + bin_width_khz, bin_width_khz)
    mass, edges = np.histogram(samples, bins=edges)
    return CouplingHistogram(bin_edges=edges, mass=mass / samples.size)


def _uniform_sphere(rng: np.random.Generator, n: int) -> np.ndarray:
    u = rng.uniform(-1.0, 1.0, size=n)
    phi = rng.uniform(0.0, 2.0 * np.pi, size=n)
    st = np.sqrt(1.0 - u**2)
    return np.column_stack([st * np.cos(phi), st * np.sin(phi), u])


def coupling_maps(
    h_range_nm: tuple[float, float] = (1.2, 1.5),
    d_max_nm: float = 0.4,
    orientation_samples: int = 20000,
    seed: int = 0,
    bin_width_khz: float = 0.5,
    neighbor_distance_nm: float = DEFAULT_LATTICE_SPACING_NM,
    fixed_orientation: Optional[SphericalPlacement] = None,
    constants: PhysicalConstants = PhysicalConstants(),
) -> CouplingMaps:
    """Distributions of |A|, |B|, |B'| over pair orientations and actuator offsets.

    The pair orientation is sampled uniformly on the sphere; the actuator is
    sampled uniformly over height ``h_range_nm`` and horizontal offset up to
    ``d_max_nm`` (uniform radius, uniform azimuth). The neighbor pair sits
    ``neighbor_distance_nm`` away along x with its own random orientation.
    Deterministic for a fixed seed.

    Args:
        fixed_orientation: evaluate a single fixed pair axis instead of
            sampling (``orientation_samples`` may then be 0); the |A| map
            degenerates to a single occupied bin.
    """
    if fixed_orientation is not None:
        a = abs(coupling_A(fixed_orientation, constants))
        samples = np.array([a])
        hist = _histogram(samples, bin_width_khz)
        return CouplingMaps(hist, hist, hist, samples, samples, samples)

    if orientation_samples < 1:
        raise ValueError("orientation_samples must be >= 1 without a fixed orientation")
    h_lo, h_hi = h_range_nm
    if not (0.0 < h_lo <= h_hi) or d_max_nm < 0.0:
        raise ValueError("empty actuator sampling box")

    rng = np.random.default_rng(seed)
    n = orientation_samples
    axes = _uniform_sphere(rng, n) * PROTON_PAIR_SEPARATION_NM
    neighbor_axes = _uniform_sphere(rng, n) * PROTON_PAIR_SEPARATION_NM
    h = rng.uniform(h_lo, h_hi, size=n)
    d = rng.uniform(0.0, d_max_nm, size=n)
    az = rng.uniform(0.0, 2.0 * np.pi, size=n)
    actuators = np.column_stack([d * np.cos(az), d * np.sin(az), h])

    b_pref = constants.dipolar_prefactor_khz(constants.gamma_proton, constants.gamma_proton, 1.0)
    # |A| depends only on the axis polar angle: A = b(r) (3 cos^2 theta - 1) / 2
    cos_t = axes[:, 2] / PROTON_PAIR_SEPARATION_NM
    a_samples = np.abs(
        0.5 * b_pref / PROTON_PAIR_SEPARATION_NM**3 * (3.0 * cos_t**2 - 1.0)
    )

    e_pref = constants.dipolar_prefactor_khz(constants.gamma_electron, constants.gamma_proton, 1.0)

    def dzz(sep: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(sep, axis=1)
        nz = sep[:, 2] / r
        return e_pref / r**3 * (1.0 - 3.0 * nz**2)

    def b_of(midpoints: np.ndarray, axes_: np.ndarray) -> np.ndarray:
        p = midpoints - 0.5 * axes_
        q = midpoints + 0.5 * axes_
        return 0.5 * (dzz(p - actuators) - dzz(q - actuators))

    b_samples = np.abs(b_of(np.zeros((n, 3)), axes))
    neighbor_mid = np.tile([neighbor_distance_nm, 0.0, 0.0], (n, 1))
    b_prime_samples = np.abs(b_of(neighbor_mid, neighbor_axes))

    return CouplingMaps(
        a_hist=_histogram(a_samples, bin_width_khz),
        b_hist=_histogram(b_samples, bin_width_khz),
        b_prime_hist=_histogram(b_prime_samples, bin_width_khz),
        a_samples=a_samples,
        b_samples=b_samples,
        b_prime_samples=b_prime_samples,
    )


def dilate_scene(scene: SceneGeometry, factor: float) -> SceneGeometry:
    """Uniformly scale every position about the origin (couplings go as 1/factor^3)."""
    pairs = tuple(
        SpinPair(
            midpoint=tuple(np.asarray(p.midpoint) * factor),
            axis=replace(p.axis, r=p.axis.r * factor),
        )
        for p in scene.pairs
    )
    return SceneGeometry(
        actuator=tuple(scene.actuator_position * factor),
        pairs=pairs,
        lattice_spacing_nm=scene.lattice_spacing_nm * factor,
    )
