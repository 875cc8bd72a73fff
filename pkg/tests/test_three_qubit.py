import numpy as np
import pytest

from isingqft.schedule import total_time_consecutive
from isingqft.three_qubit import (
    NoRootError,
    assemble_sequence,
    canonical,
    continue_solution,
    free_evolution_time,
    oracle_report,
    residual_vector,
    solve_transcendental,
    timings,
)
from isingqft.trap import coupling_matrix, reference_config


def sym(J12, J13, J23):
    return np.array([[0, J12, J13], [J12, 0, J23], [J13, J23, 0]], dtype=float)


@pytest.fixture(scope="module")
def reference():
    J = coupling_matrix(reference_config()).values
    return J, solve_transcendental(J)


def test_timings_substitution():
    # J12 = J13 = pi/8 rad/ms
    T1, T2 = timings(sym(np.pi / 8, np.pi / 8, 1.0))
    assert T1 == pytest.approx(1.5)
    assert T2 == pytest.approx(0.5)


def test_timings_cancellation_and_sum():
    T1, T2 = timings(sym(2.0, 1.0, 1.0))
    assert T2 == pytest.approx(0.0, abs=1e-16)
    T1, T2 = timings(sym(1.3, 0.9, 0.7))
    assert T1 + T2 == pytest.approx(np.pi / (4 * 1.3), rel=1e-15)


def test_timings_errors():
    with pytest.raises(ValueError):
        timings(sym(3.0, 1.0, 1.0))
    with pytest.raises(ValueError):
        timings(sym(1.0, 0.0, 1.0))
    with pytest.raises(ValueError):
        timings(np.zeros((2, 2)))


def test_reference_solution(reference):
    J, sol = reference
    assert sol.residual < 1e-10
    assert np.max(np.abs(residual_vector([sol.X, sol.A1, sol.A2], sol.alpha))) < 1e-10
    assert sol.A1 / np.pi == pytest.approx(0.654, rel=0.02)
    assert sol.A2 / np.pi == pytest.approx(0.771, rel=0.02)
    assert sol.T3 == pytest.approx(4.478e-3, rel=0.05)
    assert sol.total_time == pytest.approx(8.3e-3, rel=0.05)
    assert sol.total_time < total_time_consecutive(3, J)
    assert 0 < sol.A1 < 2 * np.pi and 0 < sol.A2 < 2 * np.pi


def test_solver_deterministic(reference):
    J, sol = reference
    assert solve_transcendental(J.copy()) == sol


def test_continuation_tracks_branch(reference):
    J, sol = reference
    J2 = J.copy()
    J2[1, 2] = J2[2, 1] = 1.01 * J[1, 2]
    path = continue_solution(sol, J, J2)
    steps = np.array([[p.X, p.A1, p.A2] for p in path])
    assert np.max(np.abs(np.diff(steps, axis=0))) < 1e-2
    direct = solve_transcendental(J2)
    assert path[-1].A1 == pytest.approx(direct.A1, abs=1e-9)
    assert path[-1].T3 == pytest.approx(direct.T3, rel=1e-9)


def test_residual_symmetries():
    x = np.array([1.1, 2.0, 2.5])
    r = residual_vector(x, 1.3)
    assert np.allclose(residual_vector(x + [4 * np.pi, 0, 0], 1.3), r)
    assert np.allclose(residual_vector(x + [0, 2 * np.pi, 2 * np.pi], 1.3), r)
    assert canonical(x + [0, 2 * np.pi, 2 * np.pi]) == pytest.approx(tuple(x))


def test_tunability_random_couplings(rng):
    for _ in range(50):
        J13 = rng.uniform(0.2, 5.0)
        J23 = J13 * rng.uniform(0.1, 10.0)
        J12 = J13 * rng.uniform(0.5, 2.0)
        sol = solve_transcendental(sym(J12, J13, J23))
        assert sol.residual < 1e-10
        assert sol.T3 > 0


def test_assembled_sequence(reference):
    J, sol = reference
    circ = assemble_sequence(sol, J)
    assert free_evolution_time(circ) == pytest.approx(sol.T1 + sol.T2 + sol.T3)
    assert circ.count("tailored") == 3
    assert circ.gates[0].kind == "hadamard"


def test_assembled_sequence_oracle(reference):
    J, sol = reference
    report = oracle_report(sol, J)
    assert report["all"]["bit_reversed"] < 1e-8
    assert report["12,13"]["bit_reversed"] > 1e-3


def test_oracle_sensitive_to_pulse_area(reference):
    J, sol = reference
    from dataclasses import replace
    report = oracle_report(replace(sol, A1=sol.A1 + 1e-2), J)
    assert report["all"]["bit_reversed"] > 1e-6


def test_no_root_error_reports_residual():
    with pytest.raises(NoRootError) as info:
        solve_transcendental(sym(1.0, 1.0, 1.0), tol=0.0)
    assert info.value.best_residual >= 0.0
