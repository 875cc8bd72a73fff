"""Timed pulse schedules for the magnetic-gradient backend, and their simulation.

Each ion is a qutrit with levels ``(|0'>, |+1>, |0>)``.  Only ``|+1>`` carries
a magnetic moment, so the free-evolution Hamiltonian is::

    H = -2 sum_{k<l} J_kl n_k n_l + sum_{k in C} (sum_{l in C, l != k} J_kl) n_k

with ``n_k = |+1><+1|_k`` and ``C`` the currently coupled ions.  The second
term is the shift each coupled ion's rotating frame absorbs; on the coupled
qubits ``{|0'>, |+1>}`` the Hamiltonian reduces to ``-(1/2) sum J_kl sz_k sz_l``
up to a constant, and an uncoupled ion (no ``|+1>`` population) drops out.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from ._validation import check_coupling_matrix, check_finite, check_int
from .compiler import consecutive_phases, default_tailoring
from .gates import couple_sequence, phase_matrix, pipulse_matrix, rotation_matrix, uncouple_sequence
from .simulator import apply_local

ACTIONS = ("microwave_pulse", "free_evolution", "couple", "uncouple", "phase_shift")
MAX_SIM_IONS = 5


def gate_duration(phi: float, J_kl: float) -> float:
    """Free-evolution time ``2 phi / J_kl`` giving the pair gate ``U_kl(phi)``."""
    phi = check_finite(phi, "phi")
    J_kl = check_finite(J_kl, "J_kl")
    if J_kl <= 0:
        raise ValueError(f"coupling must be positive, got {J_kl}")
    if phi <= 0:
        raise ValueError(f"phase must be positive (add pi to shift it), got {phi}")
    return 2.0 * phi / J_kl


@dataclass(frozen=True)
class ScheduleEntry:
    start: float
    duration: float
    action: str
    ions: tuple[int, ...]
    params: Mapping[str, Any] = field(default_factory=dict)

    @property
    def end(self):
        return self.start + self.duration

    def to_dict(self):
        return {
            "start": self.start,
            "duration": self.duration,
            "action": self.action,
            "ions": list(self.ions),
            "params": dict(self.params),
        }


@dataclass
class PulseSchedule:
    n_ions: int
    couplings: np.ndarray
    entries: list[ScheduleEntry] = field(default_factory=list)

    @property
    def total_time(self) -> float:
        return max((e.end for e in self.entries), default=0.0)

    def windows(self):
        return [e for e in self.entries if e.action == "free_evolution"]

    def free_evolution_time(self) -> float:
        return float(sum(e.duration for e in self.windows()))

    def to_dict(self):
        return {
            "n_ions": self.n_ions,
            "couplings_rad_per_s": np.asarray(self.couplings).tolist(),
            "total_time": self.total_time,
            "entries": [e.to_dict() for e in self.entries],
        }

    def to_json(self, indent=None):
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data):
        entries = [
            ScheduleEntry(e["start"], e["duration"], e["action"], tuple(e["ions"]), e.get("params", {}))
            for e in data["entries"]
        ]
        return cls(data["n_ions"], np.asarray(data["couplings_rad_per_s"], dtype=float), entries)


class _Builder:
    def __init__(self, n_ions, J, rabi_frequency, phased_second):
        self.schedule = PulseSchedule(n_ions, J)
        self.t = 0.0
        self.rabi = rabi_frequency
        self.phased = phased_second
        self.coupled = set(range(1, n_ions + 1))

    def _pulse_time(self, area):
        return 0.0 if self.rabi is None else abs(area) / self.rabi

    def add(self, duration, action, ions, **params):
        self.schedule.entries.append(ScheduleEntry(self.t, duration, action, tuple(ions), params))
        self.t += duration

    def couple(self, ion):
        if ion in self.coupled:
            raise ValueError(f"ion {ion} is already coupled")
        self.add(3 * self._pulse_time(np.pi), "couple", (ion,), phased_second=self.phased)
        self.coupled.add(ion)

    def uncouple(self, ion):
        if ion not in self.coupled:
            raise ValueError(f"ion {ion} is already uncoupled")
        self.add(3 * self._pulse_time(np.pi), "uncouple", (ion,), phased_second=self.phased)
        self.coupled.discard(ion)

    def hadamard(self, ion):
        for theta, phi in ((np.pi, 0.0), (np.pi / 2, -np.pi / 2)):
            self.add(self._pulse_time(theta), "microwave_pulse", (ion,),
                     transition="0'-+1", area=theta, phase=phi)

    def phase_shift(self, ion, phi):
        if phi != 0.0:
            self.add(0.0, "phase_shift", (ion,), phi=phi)

    def wait(self, k, l, phi, J):
        self.add(gate_duration(phi, J[k - 1, l - 1]), "free_evolution", tuple(sorted(self.coupled)),
                 pair=[k, l], phase=phi)


def consecutive_schedule(
    n_qubits: int, J, rabi_frequency: float | None = None, phased_second: bool = False
) -> PulseSchedule:
    """Pulse schedule for the consecutive QFT sequence.

    Initial phase shifts, uncouple every ion, then per qubit ``n``: couple
    ``n``, two-pulse Hadamard, and for each ``l > n`` couple ``l``, wait
    ``2 phi_nl / J_nl`` with ``phi_nl = (pi/4) 2**(n-l)``, uncouple ``l``;
    finally uncouple ``n``.  All ions are re-coupled before the final phase
    shifts.  ``rabi_frequency`` (rad/s) gives pulses the duration
    ``area / rabi_frequency``; ``None`` makes them instantaneous.
    """
    N = check_int(n_qubits, "n_qubits", low=1)
    J = check_coupling_matrix(J, n=N, positive=N > 1)
    if rabi_frequency is not None and rabi_frequency <= 0:
        raise ValueError("rabi_frequency must be positive")
    phases = consecutive_phases(N)
    b = _Builder(N, J, rabi_frequency, phased_second)
    for k, phi in enumerate(phases.initial, start=1):
        b.phase_shift(k, phi)
    for k in range(1, N + 1):
        b.uncouple(k)
    for n in range(1, N + 1):
        b.couple(n)
        b.hadamard(n)
        for l in range(n + 1, N + 1):
            b.couple(l)
            b.wait(n, l, np.pi / 4 * 2.0 ** (n - l), J)
            b.uncouple(l)
        b.uncouple(n)
    for k in range(1, N + 1):
        b.couple(k)
    for k, phi in enumerate(phases.final, start=1):
        b.phase_shift(k, phi)
    return b.schedule


def total_time_consecutive(n_qubits: int, J) -> float:
    """``pi sum_{k<l} 2**-(l-k+1) / J_kl``: the summed free-evolution time."""
    N = check_int(n_qubits, "n_qubits", low=1)
    if N == 1:
        return 0.0
    J = check_coupling_matrix(J, n=N, positive=True)
    return float(np.pi * sum(
        2.0 ** -(l - k + 1) / J[k - 1, l - 1] for k in range(1, N) for l in range(k + 1, N + 1)
    ))


def total_time_parallel(n_qubits: int, alpha: float = 1.0, tailoring=None) -> float:
    """``(pi/4) sum_n 1 / J^(n)_{n,n+1}`` over the tailored couplings.

    For the factorised solution ``J^(n)_{n,n+1} = pi alpha (1/4 + 2 c_{n+1})``,
    so with ``c = 0`` the total is ``(N - 1) / alpha``.
    """
    N = check_int(n_qubits, "n_qubits", low=1)
    alpha = check_finite(alpha, "alpha")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    tailoring = default_tailoring(N, alpha=alpha) if tailoring is None else list(tailoring)
    return float(sum(np.pi / 4 / tc.J[tc.step - 1, tc.step] for tc in tailoring))


# -- simulation --------------------------------------------------------------

def _occupations(n_ions):
    """``n_k`` (|+1> occupation) of every qutrit basis state, shape (3**N, N)."""
    idx = np.arange(3**n_ions)
    digits = (idx[:, None] // 3 ** np.arange(n_ions - 1, -1, -1)) % 3
    return (digits == 1).astype(float)


def free_evolution_diagonal(n_ions, J, coupled, duration) -> np.ndarray:
    """Diagonal of ``exp(-i H t)`` for one free-evolution window (see module docstring)."""
    J = np.asarray(J, dtype=float)
    occ = _occupations(n_ions)
    energy = np.zeros(occ.shape[0])
    for k in range(n_ions):
        for l in range(k + 1, n_ions):
            energy -= 2.0 * J[k, l] * occ[:, k] * occ[:, l]
    for k in coupled:
        shift = sum(J[k - 1, l - 1] for l in coupled if l != k)
        energy += shift * occ[:, k - 1]
    return np.exp(-1j * energy * duration)


def _qutrit_op(entry):
    p = entry.params
    if entry.action == "microwave_pulse":
        op = np.eye(3, dtype=complex)
        if p.get("transition", "0'-+1") != "0'-+1":
            raise ValueError("only the coupled-basis transition is driven by rotations")
        op[:2, :2] = rotation_matrix(p["area"], p.get("phase", 0.0))
        return op
    if entry.action == "phase_shift":
        op = np.eye(3, dtype=complex)
        op[:2, :2] = phase_matrix(p["phi"])
        return op
    seq = (uncouple_sequence if entry.action == "uncouple" else couple_sequence)(
        1, p.get("phased_second", False))
    op = np.eye(3, dtype=complex)
    for g in seq:
        op = pipulse_matrix(g.params["transition"], g.params["phase"]) @ op
    return op


def qubit_isometry(n_ions):
    """Columns embed the qubit basis into the coupled qutrit levels ``|0'>, |+1>``."""
    V = np.zeros((3**n_ions, 2**n_ions))
    for q in range(2**n_ions):
        bits = [(q >> (n_ions - 1 - s)) & 1 for s in range(n_ions)]
        V[sum(b * 3 ** (n_ions - 1 - s) for s, b in enumerate(bits)), q] = 1.0
    return V


def validate_schedule(schedule: PulseSchedule):
    """Raise if entries overlap in time or the coupled-set bookkeeping is inconsistent."""
    coupled = set(range(1, schedule.n_ions + 1))
    t = 0.0
    for e in schedule.entries:
        if e.action not in ACTIONS:
            raise ValueError(f"unknown action {e.action!r}")
        if e.start < t - 1e-15 * max(1.0, t):
            raise ValueError(f"entry at t={e.start} overlaps the previous one ending at {t}")
        t = e.end
        if e.action == "couple":
            if e.ions[0] in coupled:
                raise ValueError(f"ion {e.ions[0]} coupled twice")
            coupled.add(e.ions[0])
        elif e.action == "uncouple":
            if e.ions[0] not in coupled:
                raise ValueError(f"ion {e.ions[0]} uncoupled twice")
            coupled.discard(e.ions[0])
        elif e.action == "free_evolution" and set(e.ions) != coupled:
            raise ValueError(f"free evolution at t={e.start} lists {e.ions}, coupled set is "
                             f"{sorted(coupled)}")
    if coupled != set(range(1, schedule.n_ions + 1)):
        raise ValueError("schedule must end with every ion coupled")


def simulate_schedule(schedule: PulseSchedule, leak_tol: float = 1e-9) -> np.ndarray:
    """Qubit-subspace unitary realised by ``schedule`` on the qutrit chain.

    Raises ``RuntimeError`` if population starting in the coupled qubit
    subspace ends outside it by more than ``leak_tol``.
    """
    N = check_int(schedule.n_ions, "n_ions", low=1, high=MAX_SIM_IONS)
    validate_schedule(schedule)
    J = check_coupling_matrix(schedule.couplings, n=N)
    V = qubit_isometry(N)
    state = V.astype(complex)
    coupled = set(range(1, N + 1))
    for e in schedule.entries:
        if e.action == "free_evolution":
            state = free_evolution_diagonal(N, J, coupled, e.duration)[:, None] * state
            continue
        state = apply_local(_qutrit_op(e), e.ions, state, N, 3)
        if e.action == "couple":
            coupled.add(e.ions[0])
        elif e.action == "uncouple":
            coupled.discard(e.ions[0])
    U = V.T @ state
    leak = np.max(np.sum(np.abs(state) ** 2, axis=0) - np.sum(np.abs(U) ** 2, axis=0))
    if leak > leak_tol:
        raise RuntimeError(f"population {leak:.3e} left the qubit subspace")
    return U


def window_phases(schedule: PulseSchedule) -> list[dict]:
    """Pair phases ``J_kl t / 2`` acquired by coupled pairs in each free-evolution window."""
    J = np.asarray(schedule.couplings)
    out = []
    for e in schedule.windows():
        ions = sorted(e.ions)
        out.append({(k, l): 0.5 * J[k - 1, l - 1] * e.duration
                    for i, k in enumerate(ions) for l in ions[i + 1:]})
    return out


def uncoupled_conditional_phases(schedule: PulseSchedule) -> list[float]:
    """Largest conditional phase picked up by an uncoupled ion in each free-evolution window.

    An uncoupled ion stores its qubit in ``|0'>, |0>``.  For every other
    ion configuration the window phase is compared between the two storage
    levels; the result is the largest difference (mod ``2 pi``) per window.
    """
    N = schedule.n_ions
    J = np.asarray(schedule.couplings, dtype=float)
    digits = (np.arange(3**N)[:, None] // 3 ** np.arange(N - 1, -1, -1)) % 3
    out = []
    for e in schedule.windows():
        coupled = set(e.ions)
        diag = free_evolution_diagonal(N, J, coupled, e.duration)
        worst = 0.0
        for k in set(range(1, N + 1)) - coupled:
            low = digits[:, k - 1] == 0
            # partner state: same digits with ion k moved from |0'> to |0>
            partner = np.flatnonzero(low) + 2 * 3 ** (N - k)
            diff = np.angle(diag[partner] / diag[low])
            worst = max(worst, float(np.max(np.abs(diff))))
        out.append(worst)
    return out


def fit_quadratic(ns, times):
    """Least-squares ``T(N) = c N^2`` through the origin; returns ``(c, R^2)``."""
    ns = np.asarray(ns, dtype=float)
    times = np.asarray(times, dtype=float)
    x = ns**2
    c = float(x @ times / (x @ x))
    ss_res = float(np.sum((times - c * x) ** 2))
    ss_tot = float(np.sum((times - times.mean()) ** 2))
    return c, 1.0 - ss_res / ss_tot
