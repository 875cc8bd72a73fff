"""Quantum Fourier transform on Ising-coupled qubits.

Modules
-------
simulator   dense state/unitary simulation on qubit and qutrit chains
gates       gate algebra, decomposition identities and the Circuit gate type
compiler    QFT circuits: Cooley-Tukey, consecutive Ising and parallel tailored forms
trap        ion-chain equilibrium and gradient-induced couplings
schedule    timed pulse schedules and their qutrit-level simulation
msgate      bichromatic (Molmer-Sorensen type) realisation of tailored couplings
three_qubit rearranged three-qubit sequence and its calibration equations
"""

from .circuit import Circuit
from .compiler import (
    consecutive_sequence,
    cooley_tukey_circuit,
    dft_matrix,
    oracle_distances,
    parallel_sequence,
    tailor_couplings,
)
from .gates import Gate
from .simulator import compose, phase_invariant_distance

__version__ = "0.1.0"

__all__ = [
    "Circuit",
    "Gate",
    "compose",
    "consecutive_sequence",
    "cooley_tukey_circuit",
    "dft_matrix",
    "oracle_distances",
    "parallel_sequence",
    "phase_invariant_distance",
    "tailor_couplings",
]
