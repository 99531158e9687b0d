import numpy as np
import pytest

from dfqsim.constants import PHASE_PER_KHZ_US
from dfqsim.dynamics import (
    ControlSegment,
    NoiseModel,
    PulseSequence,
    QuantumState,
    actuator_reset,
    alternating_xy_sequence,
    expm_hermitian,
    gate_fidelity,
    noise_sweep,
    propagate_segment,
    sequence_unitary,
)
from dfqsim.geometry import CouplingSet
from dfqsim.logical import IL_X, reduce_to_logical
from dfqsim.operators import HilbertSpaceLayout, kron_all

from conftest import random_unitary

CASE1 = CouplingSet(A=-12.7, B=-6.0)


def test_free_pi_rotation_closed_form():
    # omega1 = 0, H = A I^L_x on the 4-dim space, t = 1/(2|A|):
    # the logical block rotates by pi about sign(A) x.
    a = -12.7
    h = a * kron_all(np.eye(2), IL_X)
    t_us = 1.0 / (2 * abs(a)) * 1e3
    seg = ControlSegment(duration_us=t_us, axis_phase=0.0, amplitude_khz=0.0)
    u = propagate_segment(h, seg)
    # closed-form single-axis rotation oracle: exp(-i theta n.I) with theta=pi
    angle = PHASE_PER_KHZ_US * a * t_us
    oracle = np.cos(angle / 2) * np.eye(2) - 2j * np.sin(angle / 2) * IL_X
    assert np.abs(u - kron_all(np.eye(2), oracle)).max() < 1e-10


def test_zero_duration_limit_is_identity():
    model = reduce_to_logical(CASE1)
    seg = ControlSegment(duration_us=1e-12, axis_phase=0.0, amplitude_khz=100.0)
    assert np.abs(propagate_segment(model, seg) - np.eye(4)).max() < 1e-6


def test_delta1_scales_only_drive():
    model = reduce_to_logical(CASE1)
    seg = ControlSegment(duration_us=2.0, axis_phase=0.3, amplitude_khz=50.0)
    u_noisy = propagate_segment(model, seg, NoiseModel(delta1=0.02))
    scaled = ControlSegment(duration_us=2.0, axis_phase=0.3, amplitude_khz=51.0)
    assert np.abs(u_noisy - propagate_segment(model, scaled)).max() < 1e-12
    # zero drive: delta1 has no effect at all
    free = ControlSegment(duration_us=2.0, axis_phase=0.3, amplitude_khz=0.0)
    assert np.abs(
        propagate_segment(model, free, NoiseModel(delta1=0.1)) - propagate_segment(model, free)
    ).max() < 1e-14


def test_propagators_unitary_random():
    rng = np.random.default_rng(5)
    model = reduce_to_logical(CASE1)
    for _ in range(20):
        seg = ControlSegment(
            duration_us=float(rng.uniform(0.1, 10.0)),
            axis_phase=float(rng.uniform(0, 2 * np.pi)),
            amplitude_khz=float(rng.uniform(-500, 500)),
        )
        u = propagate_segment(model, seg, NoiseModel(delta1=float(rng.uniform(-0.05, 0.05))))
        assert np.abs(u.conj().T @ u - np.eye(4)).max() < 1e-9


def test_sequence_is_ordered_product():
    model = reduce_to_logical(CASE1)
    seq = alternating_xy_sequence([30.0, -70.0, 110.0], 1.5)
    u = sequence_unitary(model, seq)
    expected = np.eye(4, dtype=complex)
    for seg in seq.segments:
        expected = propagate_segment(model, seg) @ expected
    assert np.abs(u - expected).max() < 1e-12
    single = PulseSequence(segments=seq.segments[:1])
    assert np.abs(sequence_unitary(model, single) - propagate_segment(model, seq.segments[0])).max() < 1e-12


def test_empty_sequence_is_identity():
    model = reduce_to_logical(CASE1)
    assert np.abs(sequence_unitary(model, PulseSequence(segments=())) - np.eye(4)).max() == 0.0


def test_inverse_sequence_gives_identity_without_free_term():
    # with no free Hamiltonian the reversed, negated sequence undoes the gate
    h0 = np.zeros((4, 4), dtype=complex)
    seq = alternating_xy_sequence([40.0, -90.0, 25.0, 60.0], 2.0)
    inv_segments = tuple(
        ControlSegment(s.duration_us, s.axis_phase, -s.amplitude_khz)
        for s in reversed(seq.segments)
    )
    u = sequence_unitary(h0, PulseSequence(segments=inv_segments)) @ sequence_unitary(h0, seq)
    assert np.abs(u - np.eye(4)).max() < 1e-10


def test_fine_step_integration_oracle():
    # brute-force substepping (<= 10 ns) of the same piecewise Hamiltonian
    model = reduce_to_logical(CASE1)
    rng = np.random.default_rng(6)
    seq = alternating_xy_sequence(rng.uniform(-200, 200, 12), 1.5)
    u_fast = sequence_unitary(model, seq)
    u_slow = np.eye(4, dtype=complex)
    for seg in seq.segments:
        n_sub = int(np.ceil(seg.duration_us / 0.01))
        h = model.matrix() + seg.amplitude_khz * (
            np.cos(seg.axis_phase) * model.drive_operators()[0]
            + np.sin(seg.axis_phase) * model.drive_operators()[1]
        )
        step = expm_hermitian(h, PHASE_PER_KHZ_US * seg.duration_us / n_sub)
        for _ in range(n_sub):
            u_slow = step @ u_slow
    assert np.linalg.norm(u_fast - u_slow) < 1e-6


PROTO_LAYOUT = HilbertSpaceLayout(factor_dims=(2, 4), labels=("actuator", "pair"))


def test_actuator_reset_fixed_point_and_mixed():
    e0 = np.zeros((2, 2), dtype=complex)
    e0[0, 0] = 1.0
    rho = kron_all(e0, np.eye(4) / 4.0)
    state = QuantumState(density_matrix=rho, layout=PROTO_LAYOUT)
    assert np.abs(actuator_reset(state).density_matrix - rho).max() < 1e-14

    mixed = QuantumState(density_matrix=np.eye(8, dtype=complex) / 8.0, layout=PROTO_LAYOUT)
    after = actuator_reset(mixed).density_matrix
    assert np.abs(after - kron_all(e0, np.eye(4) / 4.0)).max() < 1e-14


def test_actuator_reset_preserves_trace_random():
    rng = np.random.default_rng(7)
    for _ in range(10):
        z = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        rho = z @ z.conj().T
        rho /= np.trace(rho)
        state = QuantumState(density_matrix=rho, layout=PROTO_LAYOUT)
        after = actuator_reset(state)
        assert abs(np.trace(after.density_matrix) - 1.0) < 1e-10
        # nuclear factor preserved exactly
        pair_before = np.einsum("aiaj->ij", rho.reshape(2, 4, 2, 4))
        pair_after = np.einsum("aiaj->ij", after.density_matrix.reshape(2, 4, 2, 4))
        assert np.abs(pair_before - pair_after).max() < 1e-12


def test_gate_fidelity_basics():
    rng = np.random.default_rng(8)
    t = random_unitary(rng, 4)
    other = random_unitary(rng, 4)
    assert gate_fidelity(t, t) == pytest.approx(1.0, abs=1e-12)
    assert gate_fidelity(np.exp(0.71j) * t, t) == pytest.approx(1.0, abs=1e-12)
    assert gate_fidelity(t, other) == pytest.approx(gate_fidelity(other, t), abs=1e-12)


def test_gate_fidelity_z_error_trace_relation():
    # logical pi/2 rotation about the computational z axis after the target:
    # F = |Tr(exp(-i pi/4 sigma_z))| / 2 = cos(pi/4), and matches a direct trace
    rng = np.random.default_rng(9)
    t = random_unitary(rng, 2)
    err = np.diag(np.exp([-1j * np.pi / 4, 1j * np.pi / 4]))
    f = gate_fidelity(err @ t, t)
    direct = abs(np.trace(t.conj().T @ err @ t)) / 2
    assert f == pytest.approx(direct, abs=1e-12)
    assert f == pytest.approx(np.cos(np.pi / 4), abs=1e-12)


def test_gate_fidelity_symmetry_property():
    rng = np.random.default_rng(10)
    for _ in range(5):
        u, t = random_unitary(rng, 4), random_unitary(rng, 4)
        assert gate_fidelity(u, t) == pytest.approx(gate_fidelity(t, u), abs=1e-12)


def test_gate_fidelity_projector_errors():
    with pytest.raises(ValueError):
        gate_fidelity(np.eye(4), np.eye(4), np.zeros((4, 4)))
    with pytest.raises(ValueError):
        gate_fidelity(np.eye(4), np.eye(2))


def test_noise_sweep_origin_matches_noiseless():
    model = reduce_to_logical(CASE1)
    seq = alternating_xy_sequence([40.0, -90.0, 25.0], 1.5)
    target = sequence_unitary(model, seq)  # the sequence's own gate
    table = noise_sweep(model, seq, target, [0.0, 0.01], [0.0, 0.2])
    assert table.fidelity[0, 0] == pytest.approx(1.0, abs=1e-12)
    table2 = noise_sweep(model, seq, target, [0.0, 0.01], [0.0, 0.2])
    assert np.array_equal(table.fidelity, table2.fidelity)
    with pytest.raises(ValueError):
        noise_sweep(model, seq, target, [], [0.0])


def test_quantum_state_validation():
    with pytest.raises(ValueError):
        QuantumState(density_matrix=np.eye(8, dtype=complex), layout=PROTO_LAYOUT)
    bad = np.diag([1.5, -0.5, 0, 0, 0, 0, 0, 0]).astype(complex)
    with pytest.raises(ValueError):
        QuantumState(density_matrix=bad, layout=PROTO_LAYOUT)


def test_jitter_requires_structured_hamiltonian():
    seg = ControlSegment(duration_us=1.0, axis_phase=0.0, amplitude_khz=10.0)
    with pytest.raises(ValueError):
        propagate_segment(np.zeros((4, 4)), seg, NoiseModel(coupling_jitter_khz=0.1))
    with pytest.raises(ValueError):
        propagate_segment(np.array([[0.0, 1.0], [0.5, 0.0]]), seg)
