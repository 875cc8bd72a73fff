import numpy as np
import pytest

from isingqft.circuit import Circuit
from isingqft.gates import HADAMARD, SX, SZ, hadamard, rotation
from isingqft.simulator import (
    apply_local,
    basis_state,
    bit_reversal_permutation,
    compose,
    embed_local,
    global_phase,
    phase_invariant_distance,
)

from conftest import random_unitary


def test_site_one_is_most_significant():
    I2 = np.eye(2)
    assert np.allclose(embed_local(SX, [1], 2), np.kron(SX, I2))
    assert np.allclose(embed_local(SX, [2], 2), np.kron(I2, SX))
    # |00> -> |10> is index 0 -> 2 when site 1 flips
    assert np.allclose(embed_local(SX, [1], 2) @ basis_state(0, 4), basis_state(2, 4))


def test_two_site_operator_target_order():
    cnot = np.eye(4)[[0, 1, 3, 2]]
    # control on site 3, target on site 1: |001> -> |101>
    U = embed_local(cnot, [3, 1], 3)
    assert np.allclose(U @ basis_state(0b001, 8), basis_state(0b101, 8))
    assert np.allclose(U @ basis_state(0b100, 8), basis_state(0b100, 8))


@pytest.mark.parametrize("site_dim, n_sites, targets", [
    (2, 3, [2]), (2, 4, [4, 1]), (3, 3, [3, 2]), (3, 2, [1]),
])
def test_apply_local_matches_embedding(rng, site_dim, n_sites, targets):
    op = random_unitary(rng, site_dim ** len(targets))
    psi = rng.normal(size=site_dim**n_sites) + 1j * rng.normal(size=site_dim**n_sites)
    expected = embed_local(op, targets, n_sites, site_dim) @ psi
    assert np.allclose(apply_local(op, targets, psi, n_sites, site_dim), expected)


def test_embed_errors():
    with pytest.raises(ValueError, match="repeated"):
        embed_local(np.eye(4), [1, 1], 2)
    with pytest.raises(ValueError, match="dimension"):
        embed_local(np.eye(4), [1], 2)
    with pytest.raises(ValueError):
        embed_local(np.eye(2), [3], 2)


def test_compose_first_gate_acts_first():
    circ = Circuit(1, gates=[rotation(1, np.pi), hadamard(1)])
    R = -1j * SX
    assert np.allclose(compose(circ), HADAMARD @ R)


def test_empty_circuit_is_identity():
    assert np.allclose(compose(Circuit(3)), np.eye(8))


def test_phase_invariant_distance():
    U = random_unitary(np.random.default_rng(1), 4)
    assert phase_invariant_distance(U, np.exp(0.7j) * U) < 1e-15
    assert phase_invariant_distance(np.eye(2), SX) == pytest.approx(1.0)
    assert phase_invariant_distance(np.eye(2), SZ) == pytest.approx(1.0)
    assert global_phase(np.exp(0.7j) * U, U) == pytest.approx(0.7)
    with pytest.raises(ValueError):
        phase_invariant_distance(np.eye(2), np.eye(4))


def test_bit_reversal_permutation():
    P = bit_reversal_permutation(3)
    assert np.allclose(P @ basis_state(0b001, 8), basis_state(0b100, 8))
    assert np.allclose(P @ basis_state(0b110, 8), basis_state(0b011, 8))
    assert np.allclose(P @ P, np.eye(8))
