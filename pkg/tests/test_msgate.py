import numpy as np
import pytest

from isingqft.compiler import oracle_distances, parallel_sequence, tailor_couplings
from isingqft.gates import HADAMARD
from isingqft.msgate import (
    BichromaticDrive,
    FockTruncationError,
    drive_for_target,
    fit_spin_phases,
    fock_fidelities,
    magnus_propagator,
    min_loops,
    propagate_numeric,
    purity_deficit,
    to_xx_basis,
    verify_drive,
)
from isingqft.simulator import phase_invariant_distance


def test_zero_drive_is_identity():
    drive = BichromaticDrive([0.0, 0.0], 1.0, n_max=10)
    U = propagate_numeric(drive, drive.tau)
    assert np.allclose(U, np.eye(U.shape[0]), atol=1e-12)


def test_single_ion_conserves_sx_populations():
    drive = BichromaticDrive([0.1], 1.0, n_max=12)
    U = propagate_numeric(drive, 0.37 * drive.tau)
    # projector on sx = +1 for the spin, identity on the mode
    P = np.kron(np.outer(HADAMARD[:, 0], HADAMARD[:, 0]), np.eye(12))
    assert np.allclose(U @ P, P @ U, atol=1e-10)


def test_numeric_propagator_is_unitary():
    drive = BichromaticDrive([0.05, -0.03], 2.0, n_max=15)
    U = propagate_numeric(drive, 0.8 * drive.tau)
    assert np.allclose(U.conj().T @ U, np.eye(U.shape[0]), atol=1e-8)


def test_displacement_vanishes_after_one_loop():
    drive = BichromaticDrive([0.05, 0.02, 0.04], 1.3)
    mp = magnus_propagator(drive, drive.tau)
    assert max(abs(a) for a in mp.displacements.values()) < 1e-15


def test_half_loop_displacement():
    g = np.array([0.05, 0.02])
    delta = 1.0
    mp = magnus_propagator(BichromaticDrive(g, delta), np.pi / delta)
    for sector, amp in mp.displacements.items():
        assert amp == pytest.approx(2 / delta * np.dot(g, sector))


def test_closed_form_phases_at_tau():
    g = np.array([0.05, 0.03, 0.04])
    delta = 0.8
    mp = magnus_propagator(BichromaticDrive(g, delta), 2 * np.pi / delta)
    assert mp.pair_phases[0, 1] == pytest.approx(4 * np.pi * g[0] * g[1] / delta**2, rel=1e-12)
    assert mp.pair_phases[1, 2] == pytest.approx(4 * np.pi * g[1] * g[2] / delta**2, rel=1e-12)
    assert mp.global_phase == pytest.approx(2 * np.pi * np.sum(g**2) / delta**2, rel=1e-12)


def test_closed_form_off_loop_matches_numeric():
    drive = BichromaticDrive([0.05, 0.05], 1.0, n_max=20)
    t = 0.63 * drive.tau
    U = propagate_numeric(drive, t)
    fid = fock_fidelities(U, magnus_propagator(drive, t).unitary(), 2, 20, range(3))
    assert min(fid.values()) > 1 - 1e-8


@pytest.mark.parametrize("g", [(0.05, 0.05), (0.1, -0.04)])
def test_two_ion_verification(g):
    delta = 1.0
    drive = BichromaticDrive(np.array(g) * delta, delta, n_max=25)
    m = verify_drive(drive)
    assert m["min_fidelity"] >= 1 - 1e-4
    assert m["purity_deficit"] < 1e-4
    assert m["pair_phase_rel_error"] < 1e-6
    assert m["global_phase_error"] < 1e-4


def test_three_ion_thermal_components():
    drive = BichromaticDrive([0.1, 0.06, -0.08], 1.5, n_max=20)
    m = verify_drive(drive, levels=range(4))
    assert len(m["fidelity_by_fock"]) == 4
    assert m["min_fidelity"] >= 1 - 1e-4
    assert m["purity_deficit"] < 1e-4


def test_fit_spin_phases_recovers_closed_form():
    drive = BichromaticDrive([0.05, 0.08], 1.0, n_max=12)
    mp = magnus_propagator(drive, drive.tau)
    base, pair = fit_spin_phases(mp.unitary(), 2, 12)
    assert pair[0, 1] == pytest.approx(mp.pair_phases[0, 1], rel=1e-12)
    assert base == pytest.approx(mp.global_phase, abs=1e-12)


def test_purity_deficit_detects_entanglement():
    drive = BichromaticDrive([0.15, 0.15], 1.0, n_max=20)
    zero = np.eye(4)[0]  # superposition of sx sectors with different displacements
    U_half = magnus_propagator(drive, drive.tau / 2).unitary()
    assert purity_deficit(U_half, 2, 20, zero) > 1e-2
    assert purity_deficit(magnus_propagator(drive, drive.tau).unitary(), 2, 20, zero) < 1e-12


def test_truncation_leakage_raises():
    drive = BichromaticDrive([0.2] * 4, 1.0, n_max=10)
    with pytest.raises(FockTruncationError):
        propagate_numeric(drive, drive.tau / 2, steps=64)


@pytest.mark.parametrize("kwargs", [dict(g=[0.3], delta=1.0), dict(g=[0.1], delta=1.0, n_max=5),
                                    dict(g=[0.1], delta=0.0), dict(g=[0.1, 0.1], delta=1.0, phase_plus=[0.0])])
def test_drive_validation(kwargs):
    with pytest.raises(ValueError):
        BichromaticDrive(**kwargs)


def test_closed_form_needs_sx_coupling():
    with pytest.raises(ValueError):
        magnus_propagator(BichromaticDrive([0.1, 0.1], 1.0, phase_plus=[0.0, 0.5]), 1.0)


def test_drive_for_target_ratios_n4():
    tc = tailor_couplings(4, 1)
    loops = min_loops(tc)
    drive = drive_for_target(tc, 1.0, loops=loops)
    a = np.array([1 / np.sqrt(128), 2 * np.sqrt(2), np.sqrt(2), np.sqrt(2) / 2])
    assert np.allclose(drive.g / drive.g[0], a / a[0])
    with pytest.raises(ValueError):
        drive_for_target(tc, 1.0, loops=1)


@pytest.mark.parametrize("n, step", [(3, 1), (3, 2), (4, 2)])
def test_drive_round_trip(n, step):
    tc = tailor_couplings(n, step, alpha=1.7)
    loops = min_loops(tc)
    drive = drive_for_target(tc, 2.0, loops=loops, n_max=10)
    mp = magnus_propagator(drive, loops * drive.tau)
    # phases the tailored evolution applies during its 1/alpha window
    target = np.triu(tc.J / tc.alpha / 2, 1)
    assert np.max(np.abs(np.exp(1j * mp.pair_phases) - np.exp(1j * target))) < 1e-10


def test_zero_target_gives_zero_drive():
    tc = tailor_couplings(3, 1)
    tc.a[:] = 0.0
    assert np.all(drive_for_target(tc, 1.0).g == 0)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_xx_rewrite_preserves_unitary(n):
    circ = parallel_sequence(n)
    xx = to_xx_basis(circ)
    assert all(g.params.get("basis", "z") == "x" for g in xx.gates if g.kind == "tailored")
    assert phase_invariant_distance(xx.unitary(), circ.unitary()) < 1e-12
    assert oracle_distances(xx)["bit_reversed"] < 1e-10
