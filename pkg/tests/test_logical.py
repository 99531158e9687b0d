import numpy as np
import pytest

from dfqsim.constants import PHASE_PER_KHZ_US, PhysicalConstants
from dfqsim.dynamics import expm_hermitian
from dfqsim.geometry import CouplingSet, pair_tensor, standard_scene
from dfqsim.hamiltonians import build_total
from dfqsim.logical import (
    IL_X,
    IL_Z,
    LogicalBasis,
    leakage,
    pair_operator_4,
    reduce_to_logical,
    rotation_axes,
)
from dfqsim.operators import kron_all, pair_state_matrix

CASE1 = CouplingSet(A=-12.7, B=-6.0)


def test_logical_operators_su2_and_annihilate_triplets():
    basis = LogicalBasis.default()
    ops = {w: basis.logical_operator(w) for w in "xyz"}
    assert np.abs(ops["x"] @ ops["y"] - ops["y"] @ ops["x"] - 1j * ops["z"]).max() < 1e-14
    for w in "xyz":
        for col in (2, 3):  # |T+1>, |T-1>
            assert np.abs(ops[w] @ basis.basis_map[:, col]).max() < 1e-14


def test_reduce_block_structure():
    model = reduce_to_logical(CASE1)
    h = model.h_free().reshape(2, 2, 2, 2)
    assert np.allclose(h[0, :, 0, :], CASE1.A * IL_X)
    assert np.allclose(h[1, :, 1, :], CASE1.A * IL_X + 2 * CASE1.B * IL_Z)
    assert np.abs(h[0, :, 1, :]).max() < 1e-14


def test_reduce_b_zero_actuator_independent():
    model = reduce_to_logical(CouplingSet(A=-12.7, B=0.0))
    h = model.h_free().reshape(2, 2, 2, 2)
    assert np.allclose(h[0, :, 0, :], h[1, :, 1, :])


def test_drive_commutes_with_reduction():
    with_drive = reduce_to_logical(CASE1, drive=(30.0, 0.7)).matrix()
    after = reduce_to_logical(CASE1).with_drive(30.0, 0.7).matrix()
    assert np.abs(with_drive - after).max() < 1e-14


def test_projection_of_full_model_matches_reduction():
    constants = PhysicalConstants()
    scene = standard_scene(1)
    from dfqsim.geometry import couplings_for

    cs = couplings_for(scene)
    h12 = build_total(scene, secular=True).matrix
    # isometry onto {|0>, |+1>} x {S0, T0}; spin-1 basis order is |+1>,|0>,|-1>
    act = np.zeros((3, 2), dtype=complex)
    act[1, 0] = 1.0
    act[0, 1] = 1.0
    iso = np.kron(act, pair_state_matrix()[:, :2])
    block = iso.conj().T @ h12 @ iso

    const = -0.25 * pair_tensor(scene.pairs[0])[2, 2]
    nv_diag = np.kron(np.diag([0.0, constants.d_khz + constants.omega_e_khz]), np.eye(2))
    expected = reduce_to_logical(cs).h_free() + const * np.eye(4) + nv_diag
    assert np.abs(block - expected).max() < 1e-6  # kHz, vs GHz-scale entries


def test_rotation_axes_reference_values():
    axes = rotation_axes(CouplingSet(A=-12.7, B=-6.0))
    assert axes.omega0_khz == pytest.approx(12.7)
    assert axes.omega_pm1_khz == pytest.approx(17.5, abs=0.1)
    assert np.allclose(axes.n0, [-1.0, 0.0, 0.0])
    assert np.linalg.norm(axes.n_plus1) == pytest.approx(1.0)
    assert np.linalg.norm(axes.n_minus1) == pytest.approx(1.0)


def test_rotation_axes_limits():
    axes = rotation_axes(CouplingSet(A=-5.0, B=0.0))
    assert np.allclose(axes.n_plus1, axes.n0)
    assert axes.omega_pm1_khz == pytest.approx(5.0)
    axes = rotation_axes(CouplingSet(A=0.0, B=4.0))
    assert np.allclose(axes.n_plus1, [0.0, 0.0, 1.0])
    assert np.allclose(axes.n_minus1, [0.0, 0.0, -1.0])
    assert axes.omega_pm1_khz == pytest.approx(8.0)
    with pytest.raises(ValueError):
        rotation_axes(CouplingSet(A=0.0, B=0.0))


def test_omega_identity_property():
    rng = np.random.default_rng(4)
    for _ in range(20):
        a, b = rng.normal(scale=20.0, size=2)
        if a == 0 and b == 0:
            continue
        axes = rotation_axes(CouplingSet(A=a, B=b))
        assert axes.omega_pm1_khz**2 == pytest.approx(a**2 + 4 * b**2, rel=1e-12)


def test_leakage_identity_and_secular():
    p = np.diag([1.0, 1.0, 0.0, 0.0]).astype(complex)
    assert leakage(np.eye(4, dtype=complex), p) < 1e-30
    # propagator generated by the reduced model extended over the pair space
    h4 = CASE1.A * pair_operator_4(IL_X) + 2 * CASE1.B * pair_operator_4(IL_Z)
    u = expm_hermitian(h4, PHASE_PER_KHZ_US * 137.0)
    assert leakage(u, p) < 1e-10


def test_leakage_full_nonsecular_below_1e3():
    scene = standard_scene(1)
    h12 = build_total(scene, secular=False).matrix
    u = expm_hermitian(h12, PHASE_PER_KHZ_US * 150.0)
    pair_df = pair_state_matrix()[:, :2]
    proj = kron_all(np.eye(3), pair_df @ pair_df.conj().T)
    leak = leakage(u, proj)
    assert leak < 1e-3
    assert leak > 1e-8  # the suppression is physical, not an artifact of zeros


def test_leakage_rejects_non_unitary():
    with pytest.raises(ValueError):
        leakage(np.diag([1.0, 0.5, 1.0, 1.0]).astype(complex), np.eye(4))
