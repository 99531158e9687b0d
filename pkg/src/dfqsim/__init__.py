"""Simulation and control synthesis for NV-actuated nuclear-spin-pair
decoherence-free qubits: geometry-derived couplings, reduced logical models,
GRAPE pulse synthesis, initialization/readout/RF protocols and actuator
scheduling."""

from .constants import PHASE_PER_KHZ_US, PhysicalConstants
from .dynamics import (
    ControlSegment,
    NoiseModel,
    PulseSequence,
    QuantumState,
    actuator_reset,
    gate_fidelity,
    noise_sweep,
    propagate_segment,
    sequence_unitary,
)
from .geometry import (
    CouplingSet,
    SceneGeometry,
    SphericalPlacement,
    SpinPair,
    coupling_A,
    coupling_B,
    coupling_maps,
    couplings_for,
    dipole_tensor,
    standard_scene,
    two_qubit_profile,
    two_qubit_scene,
)
from .grape import (
    GrapeProblem,
    GrapeResult,
    cnot_target,
    gradient,
    make_cnot_problem,
    make_swap_problem,
    optimize,
    swap_target,
    synthesize_cnot,
    synthesize_swap,
)
from .hamiltonians import (
    HamiltonianTerm,
    build_h_nv,
    build_h_nv_pairs_full,
    build_h_nv_pairs_secular,
    build_h_pairs,
    pair_hamiltonian,
)
from .logical import (
    LogicalBasis,
    LogicalHamiltonian,
    RotationAxes,
    leakage,
    reduce_to_logical,
    rotation_axes,
)
from .operators import HilbertSpaceLayout, embed, spin_operators
from .protocols import (
    DwellStep,
    InitializationPlan,
    RFPulse,
    rf_transition_frequencies,
    run_initialization,
    run_readout,
    simulate_rf_pi,
    synthesize_single_qubit,
)
from .scheduler import (
    ActuatorItinerary,
    CircuitGate,
    LogicalCircuit,
    compile_circuit,
    time_budget,
)

__version__ = "0.1.0"
