import numpy as np
import pytest

from dfqsim.dynamics import gate_fidelity
from dfqsim.geometry import (
    CouplingSet,
    SceneGeometry,
    SphericalPlacement,
    SpinPair,
    couplings_for,
    standard_scene,
)
from dfqsim.hamiltonians import pair_hamiltonian
from dfqsim.logical import IL_X, rotation_axes
from dfqsim.constants import PhysicalConstants
from dfqsim.dynamics import expm_hermitian
from dfqsim.protocols import (
    InitializationPlan,
    PlanStep,
    ProtocolError,
    RFPulse,
    StepKind,
    compose_dwell_steps,
    fully_mixed_pair,
    pair_spectrum_from_couplings,
    pair_spectrum_from_hamiltonian,
    rf_population_trace,
    rf_transition_frequencies,
    rf_unitary,
    run_initialization,
    run_readout,
    simulate_rf_pi,
    synthesize_single_qubit,
)

from conftest import random_unitary

CONSTANTS = PhysicalConstants()


@pytest.fixture(scope="module")
def case1_spectrum():
    return pair_spectrum_from_hamiltonian(pair_hamiltonian(standard_scene(1)))


def test_transition_splitting_matches_3a(case1_spectrum):
    cs = couplings_for(standard_scene(1))
    split = case1_spectrum.delta1_khz - case1_spectrum.delta2_khz
    assert abs(split - 3 * abs(cs.A)) < 0.01 * 3 * abs(cs.A)
    assert abs(split - 38.2) < 2.0  # "about 40 kHz"


def test_reduced_spectrum_matches_diagonalization(case1_spectrum):
    cs = couplings_for(standard_scene(1))
    reduced = pair_spectrum_from_couplings(cs)
    assert reduced.delta1_khz == pytest.approx(case1_spectrum.delta1_khz, abs=0.5)
    assert reduced.delta2_khz == pytest.approx(case1_spectrum.delta2_khz, abs=0.5)


def test_zero_tensor_gives_equal_zeeman_transitions():
    pair = SpinPair(midpoint=(0.0, 0.0, 900.0), axis=SphericalPlacement(400.0, 0.2, 0.0))
    scene = SceneGeometry(actuator=(0.0, 0.0, 0.0), pairs=(pair,))
    d1, d2 = rf_transition_frequencies(pair_hamiltonian(scene))
    assert d1 == pytest.approx(CONSTANTS.omega_i_khz, abs=1e-3)
    assert d2 == pytest.approx(CONSTANTS.omega_i_khz, abs=1e-3)


def test_degenerate_spectrum_rejected_at_low_field():
    # with B0 so small the Zeeman term is buried under the dipolar coupling,
    # the triplet labels lose their meaning
    weak = PhysicalConstants(static_field_gauss=1e-3)
    h = pair_hamiltonian(standard_scene(1), constants=weak)
    with pytest.raises(ProtocolError):
        rf_transition_frequencies(h)


def test_rf_pi_transfer(case1_spectrum):
    pulse = RFPulse.pi_pulse(case1_spectrum.delta1_khz, 5.0)
    assert pulse.duration_us == pytest.approx(100.0)
    _, pops = rf_population_trace(pulse, case1_spectrum, initial_index=2)
    assert pops[-1, 1] >= 0.99  # |T+1> -> |T0>


def test_rf_selectivity(case1_spectrum):
    pulse = RFPulse.pi_pulse(case1_spectrum.delta1_khz, 5.0)
    _, pops = rf_population_trace(pulse, case1_spectrum, initial_index=3)
    assert pops[-1, 1] <= 0.01  # |T-1> barely disturbed at the pulse end


def test_singlet_exactly_invariant(case1_spectrum):
    pulse = RFPulse.pi_pulse(case1_spectrum.delta1_khz, 5.0)
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = 1.0
    out = simulate_rf_pi(rho, pulse, case1_spectrum)
    assert abs(out[0, 0] - 1.0) < 1e-10
    pulse2 = RFPulse.pi_pulse(case1_spectrum.delta2_khz, 5.0)
    out = simulate_rf_pi(rho, pulse2, case1_spectrum)
    assert abs(out[0, 0] - 1.0) < 1e-10


def test_selectivity_improves_as_rabi_decreases(case1_spectrum):
    worst = []
    for rabi in (5.0, 2.5, 1.25):
        pulse = RFPulse.pi_pulse(case1_spectrum.delta1_khz, rabi)
        _, pops = rf_population_trace(pulse, case1_spectrum, initial_index=3)
        worst.append(pops[:, 1].max())
    assert worst[0] > worst[1] > worst[2]


def test_rf_warnings(case1_spectrum):
    strong = RFPulse.pi_pulse(case1_spectrum.delta1_khz, 20.0)
    with pytest.warns(UserWarning, match="selectivity"):
        rf_unitary(strong, case1_spectrum)
    detuned = RFPulse.pi_pulse(case1_spectrum.delta1_khz + 500.0, 5.0)
    with pytest.warns(UserWarning, match="off-resonant"):
        rf_unitary(detuned, case1_spectrum)


def test_initialization_from_mixed_state(case1_couplings, swap_result):
    report = run_initialization(case1_couplings, swap_result.sequence)
    assert report.fidelity > 0.99
    # fidelities climb branch by branch: 1/4 -> 1/2 -> 3/4 -> ~1
    fids = [f for _, f in report.step_fidelities]
    assert fids[0] == pytest.approx(0.25, abs=1e-9)
    assert np.all(np.diff(fids) > -1e-6)


def test_initialization_fixed_point(case1_couplings, swap_result):
    s0 = np.zeros((4, 4), dtype=complex)
    s0[0, 0] = 1.0
    report = run_initialization(case1_couplings, swap_result.sequence, initial_pair_state=s0)
    assert report.fidelity > 1.0 - 3 * (1.0 - swap_result.fidelity) - 1e-3


def test_initialization_from_t_plus(case1_couplings, swap_result):
    tp = np.zeros((4, 4), dtype=complex)
    tp[2, 2] = 1.0
    report = run_initialization(case1_couplings, swap_result.sequence, initial_pair_state=tp)
    assert report.fidelity > 0.98


def test_plan_must_end_with_laser():
    with pytest.raises(ValueError):
        InitializationPlan(steps=(PlanStep(kind=StepKind.SWAP),))


def test_readout_distinguishes_logical_states(case1_couplings, swap_result):
    results = {}
    for idx in (0, 1):
        ket = np.zeros((4, 4), dtype=complex)
        ket[idx, idx] = 1.0
        results[idx] = run_readout(ket, case1_couplings, swap_result.sequence)
    contrast = abs(results[1].p1 - results[0].p1)
    assert contrast >= 0.99 * (2 * swap_result.fidelity - 1.0)


def test_readout_mixed_logical_is_fifty_fifty(case1_couplings, swap_result):
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = rho[1, 1] = 0.5
    res = run_readout(rho, case1_couplings, swap_result.sequence)
    assert abs(res.p0 - 0.5) < 0.01
    assert abs(res.p1 - 0.5) < 0.01


def test_readout_after_initialization(case1_couplings, swap_result):
    report = run_initialization(case1_couplings, swap_result.sequence)
    res = run_readout(report.final_pair_state, case1_couplings, swap_result.sequence)
    assert res.p0 > 0.98


def test_dwell_identity_is_empty(case1_couplings):
    axes = rotation_axes(case1_couplings)
    assert synthesize_single_qubit(np.eye(2), axes) == []


def test_dwell_x_pi_single_step(case1_couplings):
    axes = rotation_axes(case1_couplings)
    target = expm_hermitian(IL_X, np.pi)
    steps = synthesize_single_qubit(target, axes)
    assert len(steps) == 1
    assert steps[0].actuator_level == 0
    assert steps[0].dwell_time_us == pytest.approx(1e3 / (2 * abs(case1_couplings.A)), rel=1e-3)


def test_dwell_hadamard(case1_couplings):
    axes = rotation_axes(case1_couplings)
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    steps = synthesize_single_qubit(h, axes)
    assert 1 <= len(steps) <= 5
    assert gate_fidelity(compose_dwell_steps(steps, axes), h) >= 0.999


def test_dwell_haar_targets(case1_couplings):
    axes = rotation_axes(case1_couplings)
    rng = np.random.default_rng(21)
    for _ in range(100):
        target = random_unitary(rng, 2)
        steps = synthesize_single_qubit(target, axes)
        assert len(steps) <= 5
        assert gate_fidelity(compose_dwell_steps(steps, axes), target) >= 0.999


def test_dwell_collinear_axes_rejected():
    axes = rotation_axes(CouplingSet(A=-12.7, B=0.0))
    with pytest.raises(ValueError):
        synthesize_single_qubit(np.array([[0, 1], [1, 0]], dtype=complex), axes)
