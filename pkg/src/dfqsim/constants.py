"""Physical constants and the unit conventions used across the package.

Conventions
-----------
* Hamiltonian matrix elements are ordinary frequencies in kHz; the factor
  2*pi enters only when a propagator is built.
* Times are microseconds, lengths nanometres, magnetic fields Gauss.
* ``PHASE_PER_KHZ_US`` converts a (kHz * us) product into the dimensionless
  angle that appears in ``exp(-1j * angle)``.
"""

from dataclasses import dataclass

import numpy as np

# 2*pi * 1e3 Hz * 1e-6 s
PHASE_PER_KHZ_US = 2.0 * np.pi * 1e-3

GHZ_TO_KHZ = 1e6
MHZ_TO_KHZ = 1e3
GAUSS_TO_TESLA = 1e-4
NM_TO_M = 1e-9


@dataclass(frozen=True)
class PhysicalConstants:
    """Constants of the actuator/nuclear-spin system.

    Attributes:
        zero_field_splitting_ghz: Ground-state zero-field splitting of the
            actuator spin (GHz). Default 2.87 GHz.
        static_field_gauss: Static field along the actuator symmetry axis
            (Gauss). Default 500 G.
        gamma_electron: Electron gyromagnetic ratio (rad s^-1 T^-1).
        gamma_proton: Proton gyromagnetic ratio (rad s^-1 T^-1).
        mu0: Vacuum permeability (T m A^-1).
        hbar: Reduced Planck constant (J s).
    """

    zero_field_splitting_ghz: float = 2.87
    static_field_gauss: float = 500.0
    gamma_electron: float = 1.76085963023e11
    gamma_proton: float = 2.6752218744e8
    mu0: float = 1.25663706212e-6
    hbar: float = 1.054571817e-34

    def __post_init__(self):
        for name in (
            "zero_field_splitting_ghz",
            "static_field_gauss",
            "gamma_electron",
            "gamma_proton",
            "mu0",
            "hbar",
        ):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be strictly positive")

    @property
    def d_khz(self) -> float:
        """Zero-field splitting in kHz."""
        return self.zero_field_splitting_ghz * GHZ_TO_KHZ

    @property
    def omega_e_khz(self) -> float:
        """Electron Zeeman frequency gamma_e * B0 / (2 pi) in kHz."""
        b_tesla = self.static_field_gauss * GAUSS_TO_TESLA
        return self.gamma_electron * b_tesla / (2.0 * np.pi) / 1e3

    @property
    def omega_i_khz(self) -> float:
        """Nuclear (proton) Zeeman frequency gamma_p * B0 / (2 pi) in kHz."""
        b_tesla = self.static_field_gauss * GAUSS_TO_TESLA
        return self.gamma_proton * b_tesla / (2.0 * np.pi) / 1e3

    def dipolar_prefactor_khz(self, gamma1: float, gamma2: float, r_nm: float) -> float:
        """Point-dipole coupling prefactor mu0 g1 g2 hbar / (4 pi r^3) / (2 pi), in kHz.

        Args:
            gamma1, gamma2: Gyromagnetic ratios (rad s^-1 T^-1).
            r_nm: Separation (nm), must be positive.
        """
        if r_nm <= 0.0:
            raise ValueError("separation must be positive")
        r_m = r_nm * NM_TO_M
        rad_per_s = self.mu0 / (4.0 * np.pi) * gamma1 * gamma2 * self.hbar / r_m**3
        return rad_per_s / (2.0 * np.pi) / 1e3
