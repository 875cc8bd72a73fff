import numpy as np
import pytest

from isingqft.circuit import Circuit
from isingqft.compiler import (
    consecutive_phases,
    consecutive_sequence,
    cooley_tukey_circuit,
    default_tailoring,
    dft_matrix,
    oracle_distances,
    parallel_sequence,
    phase_residues,
    spectator_ledger,
    tailor_couplings,
    wrapped,
)
from isingqft.simulator import compose, phase_invariant_distance


def reference_dft(n):
    dim = 2**n
    return np.array([[np.exp(2j * np.pi * j * k / dim) for k in range(dim)]
                     for j in range(dim)]) / np.sqrt(dim)


@pytest.mark.parametrize("n", range(1, 7))
def test_dft_matrix_definition(n):
    F = dft_matrix(n)
    assert np.allclose(F, reference_dft(n), atol=1e-13)
    assert np.allclose(F.conj().T @ F, np.eye(2**n), atol=1e-12)


def test_dft_single_qubit_is_hadamard():
    assert np.allclose(dft_matrix(1), np.array([[1, 1], [1, -1]]) / np.sqrt(2))


@pytest.mark.parametrize("n", range(1, 7))
def test_cooley_tukey(n):
    assert phase_invariant_distance(compose(cooley_tukey_circuit(n)), reference_dft(n)) < 1e-10


@pytest.mark.parametrize("n", range(1, 7))
def test_consecutive_sequence(n):
    circ = consecutive_sequence(n, include_final_swaps=True)
    assert phase_invariant_distance(compose(circ), reference_dft(n)) < 1e-10


@pytest.mark.parametrize("n", range(3, 6))
def test_swapped_phase_assignment_fails(n):
    d = oracle_distances(consecutive_sequence(n, assignment="swapped"))
    assert d["bit_reversed"] > 1e-3


@pytest.mark.parametrize("n", range(2, 6))
def test_parallel_sequence_default(n):
    d = oracle_distances(parallel_sequence(n))
    assert d["bit_reversed"] < 1e-10


@pytest.mark.parametrize("alpha", [0.3, 1.0, 4.0])
def test_parallel_sequence_alpha_independent(alpha):
    circ = parallel_sequence(4, default_tailoring(4, alpha=alpha))
    assert oracle_distances(circ)["bit_reversed"] < 1e-10


def test_parallel_with_integer_freedom():
    c = np.zeros((3, 4), dtype=int)
    c[0, 2] = 1
    c[0, 3] = -2
    tail = default_tailoring(4, q=[1, 1, 2, 3], c=c)
    assert oracle_distances(parallel_sequence(4, tail))["bit_reversed"] < 1e-10


def test_consecutive_phases_small():
    ph = consecutive_phases(2)
    assert ph.phi1 == pytest.approx(np.pi / 4)
    assert ph.initial == pytest.approx([0.0, np.pi / 8])
    assert ph.final == pytest.approx([np.pi / 8, 0.0])


def test_consecutive_structure():
    circ = consecutive_sequence(4)
    labels = [g.label for g in circ.gates]
    assert circ.count("hadamard") == 4
    assert {lab for lab in labels if lab and lab.startswith("P")} == {"P1", "P2", "P3"}
    assert labels.count("P1") == 3
    assert "T_I" in labels and "T_F" in labels


def test_tailored_coefficients_n4():
    tc = tailor_couplings(4, 1)
    a = [1 / np.sqrt(128), 2 * np.sqrt(2), np.sqrt(2), np.sqrt(2) / 2]
    assert np.allclose(tc.a, a)
    J = tc.J
    assert J[0, 1] == pytest.approx(np.pi / 4, abs=1e-12)
    assert J[0, 2] == pytest.approx(np.pi / 8, abs=1e-12)
    assert J[0, 3] == pytest.approx(np.pi / 16, abs=1e-12)
    assert wrapped(J[1, 2]) < 1e-10
    assert wrapped(J[1, 3]) < 1e-10


def test_phase_residues_vanish():
    for tc in default_tailoring(6):
        assert max(phase_residues(tc).values()) < 1e-10


def test_spectator_pairs_give_global_signs():
    ledger = spectator_ledger(default_tailoring(4))
    total, residue, sign = ledger[(3, 4)]
    assert residue < 1e-10
    assert sign == -1
    for total, residue, sign in ledger.values():
        assert residue < 1e-10 and sign in (1, -1)


def test_tailoring_errors():
    with pytest.raises(ValueError):
        tailor_couplings(4, 4)
    with pytest.raises(ValueError):
        tailor_couplings(3, 1, q=[1, 1])
    with pytest.raises(ValueError, match="constraint"):
        tailor_couplings(3, 1, q=[2, 1, 1])  # 2 q_2 == q_1
    with pytest.raises(ValueError):
        tailor_couplings(3, 2, q=[3, 1, 1])  # weight 2*1 - 3 < 0
    with pytest.raises(ValueError):
        tailor_couplings(3, 1, alpha=0.0)


def test_circuit_json_round_trip():
    circ = parallel_sequence(3)
    back = Circuit.from_json(circ.to_json())
    assert np.array_equal(compose(back), compose(circ))
    with pytest.raises(ValueError):
        Circuit.from_json('{"gates": []}')


@pytest.mark.parametrize("n", [0, 9])
def test_qubit_range(n):
    with pytest.raises(ValueError):
        cooley_tukey_circuit(n)
