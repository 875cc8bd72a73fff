"""QFT oracle and its lowering to Hadamards, phase gates and Ising evolution.

Three constructions are provided, all checked against :func:`dft_matrix`:

* :func:`cooley_tukey_circuit` - Hadamards and CPHASE gates.
* :func:`consecutive_sequence` - CPHASE gates rewritten as Ising pair gates,
  with the leftover single-qubit phases merged into one layer of phase gates
  at each end of the circuit.
* :func:`parallel_sequence` - every block of Ising gates between two
  Hadamards runs as one evolution under a tailored, factorised coupling
  matrix (:func:`tailor_couplings`).

A tailored evolution ``U(J)`` acquires the pair phase ``J_kl / 2`` (time
``t = 1``), i.e. ``U(J) = prod_{k<l} exp(i J_kl/2 sz_k sz_l)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from ._validation import check_finite, check_int
from .circuit import Circuit
from .gates import cphase, hadamard, ising, phase, swap, tailored
from .simulator import bit_reversal_permutation, compose, phase_invariant_distance

MAX_QUBITS = 8
TWO_PI = 2 * np.pi


def dft_matrix(n_qubits: int) -> np.ndarray:
    """Unitary DFT on ``n_qubits`` qubits, ``F[k, m] = exp(2 pi i m k / 2**n) / 2**(n/2)``."""
    n_qubits = check_int(n_qubits, "n_qubits", low=1, high=MAX_QUBITS)
    dim = 2**n_qubits
    k = np.arange(dim)
    # reduce the exponent modulo dim before scaling to keep the phases exact
    return np.exp(2j * np.pi * (np.outer(k, k) % dim) / dim) / np.sqrt(dim)


def bit_reversal_swaps(n_qubits: int, label="swap"):
    return [swap(k, n_qubits + 1 - k, label) for k in range(1, n_qubits // 2 + 1)]


def cooley_tukey_circuit(n_qubits: int, include_final_swaps: bool = True) -> Circuit:
    """Textbook QFT: ``H_1, C_12(pi/2), ..., C_1N(pi/2**(N-1)), H_2, ...``."""
    n = check_int(n_qubits, "n_qubits", low=1, high=MAX_QUBITS)
    circ = Circuit(n)
    for k in range(1, n + 1):
        circ.append(hadamard(k))
        for l in range(k + 1, n + 1):
            circ.append(cphase(k, l, np.pi / 2 ** (l - k)))
    if include_final_swaps:
        circ.extend(bit_reversal_swaps(n))
    return circ


class ConsecutivePhases(NamedTuple):
    phi1: float
    phis: list  # phi_2 .. phi_N
    initial: list  # T_I angle per qubit 1..N
    final: list  # T_F angle per qubit 1..N


PHASE_ASSIGNMENTS = ("prose", "swapped")


def consecutive_phases(n_qubits: int, assignment: str = "prose") -> ConsecutivePhases:
    """Phases of the consecutive sequence.

    ``assignment='prose'`` gives ``T_I`` angles ``pi/4 (1 - 2**(1-k))`` and
    ``T_F`` angles ``pi/4 (1 - 2**(k-N))``; this is the assignment that
    reproduces the DFT.  ``'swapped'`` exchanges the two exponent patterns
    and is kept only for comparison.
    """
    n = check_int(n_qubits, "n_qubits", low=1)
    if assignment not in PHASE_ASSIGNMENTS:
        raise ValueError(f"assignment must be one of {PHASE_ASSIGNMENTS}")
    phi1 = np.pi / 2 * (1 - 2.0 ** (-n + 1))
    phis = [np.pi / 2 ** (l - 1) for l in range(2, n + 1)]
    early = [np.pi / 4 * (1 - 2.0 ** (-k + 1)) for k in range(1, n + 1)]
    late = [np.pi / 4 * (1 - 2.0 ** (k - n)) for k in range(1, n + 1)]
    if assignment == "swapped":
        early, late = late, early
    return ConsecutivePhases(phi1, phis, early, late)


def _phase_layer(angles, label):
    return [phase(k, a, label) for k, a in enumerate(angles, start=1) if a != 0.0]


def consecutive_sequence(
    n_qubits: int, assignment: str = "prose", include_final_swaps: bool = False
) -> Circuit:
    """``T_F H_N P_{N-1} ... P_1 H_1 T_I`` with ``P_n`` emitted as Ising pair gates.

    ``P_n`` holds ``U_nl((pi/4) 2**(n-l))`` for ``l = n+1 .. N``, labelled ``"P<n>"``.
    """
    n = check_int(n_qubits, "n_qubits", low=1, high=MAX_QUBITS)
    ph = consecutive_phases(n, assignment)
    circ = Circuit(n)
    circ.extend(_phase_layer(ph.initial, "T_I"))
    for m in range(1, n + 1):
        circ.append(hadamard(m))
        for l in range(m + 1, n + 1):
            circ.append(ising(m, l, np.pi / 4 * 2.0 ** (m - l), label=f"P{m}"))
    circ.extend(_phase_layer(ph.final, "T_F"))
    if include_final_swaps:
        circ.extend(bit_reversal_swaps(n))
    return circ


@dataclass
class TailoredCoupling:
    """Factorised coupling ``J_kl = pi * alpha * a_k * a_l`` for one parallel step.

    ``J`` is in phase units (evolution time 1): pair ``(k, l)`` acquires
    ``J_kl / 2``.
    """

    n_qubits: int
    step: int
    a: np.ndarray
    alpha: float
    q: tuple
    c: np.ndarray

    @property
    def J(self) -> np.ndarray:
        J = np.pi * self.alpha * np.outer(self.a, self.a)
        np.fill_diagonal(J, 0.0)
        return J

    def required(self) -> dict:
        """Target couplings ``pi / 2**(l-n+1)`` for the active pairs ``(n, l)``."""
        n = self.step
        return {(n, l): np.pi / 2 ** (l - n + 1) for l in range(n + 1, self.n_qubits + 1)}


def check_q(q, n_qubits):
    q = tuple(int(v) for v in q)
    if len(q) != n_qubits:
        raise ValueError(f"q must list q_1..q_{n_qubits}")
    prev = 0
    for k, qk in enumerate(q, start=1):
        if 2 * qk == prev:
            raise ValueError(f"q constraint violated: 2*q_{k} == q_{k - 1}")
        prev = qk
    return q


def tailor_couplings(
    n_qubits: int, step: int, q: Sequence[int] | None = None,
    c: Sequence[int] | None = None, alpha: float = 1.0,
) -> TailoredCoupling:
    """Coefficients ``a_k`` of the factorised coupling for parallel step ``step``.

    ``a_k = 0`` for ``k < n``, ``a_n = ((2 q_n - q_{n-1}) 2**(N-n+3))**-1/2`` and
    ``a_k = (2**(n-k-1) + 2 c_k) / a_n`` for ``k > n``.  ``q`` lists ``q_1..q_N``
    (``q_0 = 0``); ``c`` lists ``c_1..c_N`` (entries ``k <= n`` are ignored).
    """
    N = check_int(n_qubits, "n_qubits", low=2)
    n = check_int(step, "step", low=1, high=N - 1)
    q = check_q([1] * N if q is None else q, N)
    c = np.zeros(N, dtype=int) if c is None else np.asarray(c, dtype=int)
    if c.shape != (N,):
        raise ValueError(f"c must have {N} entries")
    alpha = check_finite(alpha, "alpha")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    q_prev = 0 if n == 1 else q[n - 2]
    weight = 2 * q[n - 1] - q_prev
    if weight <= 0:
        # a_n would be imaginary; the sign of J for k>n spectators flips
        raise ValueError(f"2*q_{n} - q_{n - 1} must be positive, got {weight}")
    a = np.zeros(N)
    a_n = 1.0 / np.sqrt(weight * 2.0 ** (N - n + 3))
    a[n - 1] = a_n
    for k in range(n + 1, N + 1):
        a[k - 1] = (2.0 ** (n - k - 1) + 2 * c[k - 1]) / a_n
    return TailoredCoupling(N, n, a, alpha, q, c)


def default_tailoring(n_qubits, q=None, c=None, alpha=1.0):
    """One :class:`TailoredCoupling` per step; ``c`` may be an ``(N-1, N)`` integer array."""
    N = check_int(n_qubits, "n_qubits", low=1)
    out = []
    for n in range(1, N):
        row = None if c is None else np.asarray(c)[n - 1]
        out.append(tailor_couplings(N, n, q=q, c=row, alpha=alpha))
    return out


def wrapped(x, period=TWO_PI):
    """Distance of ``x`` from the nearest multiple of ``period``."""
    r = np.mod(x, period)
    return np.minimum(r, period - r)


def phase_residues(tc: TailoredCoupling) -> dict:
    """``|J_nl t - pi/2**(l-n+1)|`` modulo ``2 pi`` for each active pair, ``t = 1/alpha``."""
    J = tc.J / tc.alpha
    return {pair: float(wrapped(J[pair[0] - 1, pair[1] - 1] - target))
            for pair, target in tc.required().items()}


def spectator_ledger(tailoring) -> dict:
    """Accumulated coupling on each spectator pair and the global sign it leaves.

    Spectator contributions to pair ``(k, l)`` from steps ``n < k`` merge into
    one Ising gate.  A total of ``2 pi m`` yields ``exp(i pi m sz sz) = (-1)**m``,
    a pure global phase.  Returns ``{(k, l): (total, residue, sign)}`` where
    ``residue`` is the distance of ``total`` from ``2 pi Z`` and ``sign`` is
    ``(-1)**m`` (``None`` when the residue is not ~0).
    """
    tailoring = list(tailoring)
    if not tailoring:
        return {}
    N = tailoring[0].n_qubits
    out = {}
    for k in range(2, N + 1):
        for l in range(k + 1, N + 1):
            total = sum(tc.J[k - 1, l - 1] / tc.alpha for tc in tailoring if tc.step < k)
            res = float(wrapped(total))
            sign = int((-1) ** int(round(total / TWO_PI))) if res < 1e-9 else None
            out[(k, l)] = (float(total), res, sign)
    return out


def _check_tailoring(N, tailoring):
    tailoring = list(tailoring)
    if len(tailoring) != N - 1:
        raise ValueError(f"need {N - 1} tailoring steps, got {len(tailoring)}")
    for expected, tc in enumerate(tailoring, start=1):
        if tc.step != expected or tc.n_qubits != N:
            raise ValueError(f"tailoring step {expected} is inconsistent (step={tc.step}, "
                             f"n_qubits={tc.n_qubits})")
    return tailoring


def parallel_sequence(
    n_qubits: int, tailoring=None, include_final_swaps: bool = False, assignment: str = "prose"
) -> Circuit:
    """``T_F H_N U(J^(N-1)) ... U(J^(1)) H_1 T_I`` with one tailored evolution per step.

    ``tailoring`` defaults to ``q_k = 1``, ``c = 0``, ``alpha = 1``.  With a
    general ``alpha`` the evolution time of each step is ``1 / alpha`` so the
    acquired phases stay the same.
    """
    N = check_int(n_qubits, "n_qubits", low=1, high=MAX_QUBITS)
    tailoring = _check_tailoring(N, default_tailoring(N) if tailoring is None else tailoring)
    ph = consecutive_phases(N, assignment)
    circ = Circuit(N)
    circ.extend(_phase_layer(ph.initial, "T_I"))
    for m in range(1, N + 1):
        circ.append(hadamard(m))
        if m < N:
            tc = tailoring[m - 1]
            circ.append(tailored(tc.J, duration=1.0 / tc.alpha, label=f"U(J{m})"))
    circ.extend(_phase_layer(ph.final, "T_F"))
    if include_final_swaps:
        circ.extend(bit_reversal_swaps(N))
    return circ


def oracle_distances(circuit_or_unitary, n_qubits=None) -> dict:
    """Phase-invariant distance to the DFT, with and without bit reversal relabelling."""
    if isinstance(circuit_or_unitary, Circuit):
        n_qubits = circuit_or_unitary.n_sites
        U = compose(circuit_or_unitary)
    else:
        U = np.asarray(circuit_or_unitary)
        if n_qubits is None:
            n_qubits = int(round(np.log2(U.shape[0])))
    F = dft_matrix(n_qubits)
    P = bit_reversal_permutation(n_qubits)
    return {
        "direct": phase_invariant_distance(U, F),
        "bit_reversed": phase_invariant_distance(P @ U, F),
    }
