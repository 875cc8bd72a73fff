import numpy as np
import pytest

from isingqft.circuit import Circuit
from isingqft.gates import (
    HADAMARD,
    SX,
    SY,
    SZ,
    Gate,
    cphase,
    cphase_decompose,
    cphase_matrix,
    couple_sequence,
    gate_matrix,
    hadamard_from_rotations,
    ising,
    phase_matrix,
    phased_rotation,
    pipulse,
    rotation,
    rotation_matrix,
    sequence_matrix,
    tailored,
    tailored_matrix,
    uncouple_sequence,
)
from isingqft.simulator import compose, phase_invariant_distance
from scipy.linalg import expm


@pytest.mark.parametrize("theta, phi", [(0.3, 0.0), (np.pi, 1.1), (2.0, -0.4), (np.pi / 2, -np.pi / 2)])
def test_rotation_is_exponential(theta, phi):
    gen = SX * np.cos(phi) + SY * np.sin(phi)
    assert np.allclose(rotation_matrix(theta, phi), expm(-0.5j * theta * gen))


def test_rotation_half_pi_minus_half_pi():
    expected = np.array([[1, 1], [-1, 1]]) / np.sqrt(2)
    assert np.allclose(rotation_matrix(np.pi / 2, -np.pi / 2), expected)


def test_phase_and_ising_conventions():
    phi = 0.37
    assert np.allclose(phase_matrix(phi), expm(-1j * phi * SZ))
    assert np.allclose(gate_matrix(ising(1, 2, phi)), expm(1j * phi * np.kron(SZ, SZ)))
    assert np.allclose(cphase_matrix(phi), np.diag([1, 1, 1, np.exp(1j * phi)]))


def test_cphase_identity_random(rng):
    for phi in rng.uniform(-2 * np.pi, 2 * np.pi, 100):
        gamma, gates = cphase_decompose(phi)
        U = np.exp(1j * gamma) * compose(Circuit(2, gates=gates))
        assert np.max(np.abs(U - cphase_matrix(phi))) < 1e-12


def test_hadamard_from_two_pulses():
    U = sequence_matrix(hadamard_from_rotations())
    assert phase_invariant_distance(U, HADAMARD) < 1e-12
    assert np.allclose(U, -1j * HADAMARD)


@pytest.mark.parametrize("theta, phi", [(np.pi, 3 * np.pi / 16), (0.654 * np.pi, 3 * np.pi / 4), (1.0, -2.0)])
def test_phased_rotation_rule(theta, phi):
    U = sequence_matrix(phased_rotation(1, theta, phi))
    assert np.max(np.abs(U - rotation_matrix(theta, phi))) < 1e-12


def test_tailored_matrix_pair_phase():
    J = np.array([[0, 0.4, 0.0], [0.4, 0, 0.2], [0.0, 0.2, 0]])
    U = tailored_matrix(J, duration=1.5)
    def ZZ(k, l):
        ops = [SZ if s in (k, l) else np.eye(2) for s in range(3)]
        return np.kron(np.kron(ops[0], ops[1]), ops[2])

    H = 0.5 * 1.5 * (0.4 * ZZ(0, 1) + 0.2 * ZZ(1, 2))
    assert np.allclose(U, expm(1j * H))


def test_tailored_x_basis_is_conjugated():
    J = np.array([[0, 0.7], [0.7, 0]])
    Ux = tailored_matrix(J, basis="x")
    assert np.allclose(Ux, expm(0.5j * 0.7 * np.kron(SX, SX)))


def test_uncouple_maps_plus_one_to_zero():
    # levels (0', +1, 0)
    U = sequence_matrix(uncouple_sequence(), site_dim=3)
    assert abs(U[2, 1]) == pytest.approx(1.0)
    assert abs(U[0, 0]) == pytest.approx(1.0)
    V = sequence_matrix(couple_sequence(), site_dim=3)
    assert np.allclose(V @ U, np.eye(3))


def test_uncouple_phased_variant_round_trip():
    U = sequence_matrix(uncouple_sequence(phased_second=True), site_dim=3)
    V = sequence_matrix(couple_sequence(phased_second=True), site_dim=3)
    assert np.allclose(V @ U, np.eye(3))


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate("bogus", (1,))
    with pytest.raises(ValueError):
        cphase(1, 1, 0.3)
    with pytest.raises(ValueError):
        rotation(1, np.inf)
    with pytest.raises(ValueError):
        gate_matrix(pipulse(1, "0'-0"), site_dim=2)
    with pytest.raises(ValueError):
        tailored(np.array([[0, 1], [2, 0]]))


def test_gate_dict_round_trip():
    J = np.array([[0, 0.5], [0.5, 0]])
    for g in (rotation(2, 0.1, 0.2, label="x"), tailored(J, 0.3, basis="x"), pipulse(1, "0'-+1", np.pi)):
        assert Gate.from_dict(g.to_dict()) == g
