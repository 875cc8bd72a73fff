"""Primitive gates and the identities relating them.

Sign conventions::

    R(theta, phi) = exp[-i theta/2 (sx cos phi + sy sin phi)]
    T(phi)        = exp(-i phi sz)             = diag(e^{-i phi}, e^{+i phi})
    U(phi)        = exp(+i phi sz (x) sz)
    C(phi)        = diag(1, 1, 1, e^{i phi})

Qutrit levels are ordered ``(|0'>, |+1>, |0>)``.  The coupled qubit lives on
``{|0'>, |+1>}`` (logical 0 and 1), the uncoupled qubit on ``{|0'>, |0>}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from ._validation import check_coupling_matrix, check_finite, check_int

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)

# qutrit level indices
LEVEL_0P, LEVEL_P1, LEVEL_0 = 0, 1, 2
TRANSITIONS = {"0'-0": (LEVEL_0P, LEVEL_0), "0'-+1": (LEVEL_0P, LEVEL_P1)}

KINDS = ("rotation", "phase", "ising", "hadamard", "cphase", "swap", "pipulse", "tailored")
_N_TARGETS = {
    "rotation": 1,
    "phase": 1,
    "hadamard": 1,
    "pipulse": 1,
    "ising": 2,
    "cphase": 2,
    "swap": 2,
}


@dataclass(frozen=True)
class Gate:
    """One primitive operation.

    ``targets`` are 1-based site indices.  ``params`` holds the angles
    (radians) or, for ``tailored``, the coupling matrix and duration.
    ``label`` is a free-form annotation such as ``"T_I"`` or ``"P1"``.
    """

    kind: str
    targets: tuple[int, ...]
    params: Mapping[str, Any] = field(default_factory=dict)
    label: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        expected = _N_TARGETS.get(self.kind)
        if expected is not None and len(self.targets) != expected:
            raise ValueError(f"{self.kind} gate needs {expected} target(s), got {self.targets}")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError(f"repeated target index in {self.targets}")
        for key, value in self.params.items():
            if isinstance(value, float) and not np.isfinite(value):
                raise ValueError(f"gate parameter {key} must be finite")

    def support(self, n_sites=None):
        return self.targets

    def to_dict(self):
        params = {}
        for key, value in self.params.items():
            if isinstance(value, np.ndarray):
                value = value.tolist()
            elif isinstance(value, np.floating):
                value = float(value)
            params[key] = value
        out = {"kind": self.kind, "targets": list(self.targets), "params": params}
        if self.label is not None:
            out["label"] = self.label
        return out

    @classmethod
    def from_dict(cls, data):
        params = dict(data.get("params", {}))
        if data["kind"] == "tailored":
            params["couplings"] = np.asarray(params["couplings"], dtype=float)
        return cls(data["kind"], tuple(data["targets"]), params, data.get("label"))

    def __eq__(self, other):
        if not isinstance(other, Gate):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash((self.kind, self.targets, self.label))


# -- constructors ------------------------------------------------------------

def rotation(qubit, theta, phi=0.0, label=None):
    return Gate("rotation", (qubit,), {"theta": check_finite(theta, "theta"),
                                       "phi": check_finite(phi, "phi")}, label)


def phase(qubit, phi, label=None):
    return Gate("phase", (qubit,), {"phi": check_finite(phi, "phi")}, label)


def ising(k, l, phi, label=None):
    return Gate("ising", (k, l), {"phi": check_finite(phi, "phi")}, label)


def hadamard(qubit, label=None):
    return Gate("hadamard", (qubit,), {}, label)


def cphase(k, l, phi, label=None):
    return Gate("cphase", (k, l), {"phi": check_finite(phi, "phi")}, label)


def swap(k, l, label=None):
    return Gate("swap", (k, l), {}, label)


def pipulse(ion, transition, phase=0.0, label=None):
    if transition not in TRANSITIONS:
        raise ValueError(f"transition must be one of {sorted(TRANSITIONS)}, got {transition!r}")
    return Gate("pipulse", (ion,), {"transition": transition,
                                    "phase": check_finite(phase, "phase")}, label)


def tailored(couplings, duration=1.0, basis="z", label=None):
    """Free evolution ``exp(i duration/2 sum_{k<l} J_kl s_k s_l)`` on all sites.

    ``basis='x'`` replaces ``sz sz`` by ``sx sx`` (the bichromatic-drive form).
    """
    J = check_coupling_matrix(couplings)
    if basis not in ("z", "x"):
        raise ValueError("basis must be 'z' or 'x'")
    n = J.shape[0]
    return Gate("tailored", tuple(range(1, n + 1)),
                {"couplings": J, "duration": check_finite(duration, "duration"),
                 "basis": basis}, label)


# -- matrices ----------------------------------------------------------------

def rotation_matrix(theta, phi=0.0):
    """``exp[-i theta/2 (sx cos phi + sy sin phi)]``."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array(
        [[c, -1j * s * np.exp(-1j * phi)], [-1j * s * np.exp(1j * phi), c]], dtype=complex
    )


def phase_matrix(phi):
    return np.diag([np.exp(-1j * phi), np.exp(1j * phi)])


def ising_pair_matrix(phi):
    return np.diag(np.exp(1j * phi * np.array([1, -1, -1, 1])))


def cphase_matrix(phi):
    return np.diag([1, 1, 1, np.exp(1j * phi)])


def pipulse_matrix(transition, phase=0.0):
    """3x3 population swap on ``transition``; ``phase`` rides on the off-diagonal pair."""
    i, j = TRANSITIONS[transition]
    P = np.eye(3, dtype=complex)
    P[i, i] = P[j, j] = 0.0
    P[i, j] = np.exp(-1j * phase)
    P[j, i] = np.exp(1j * phase)
    return P


def zz_diagonal(n_sites):
    """Rows ``k<l`` of sz_k sz_l eigenvalues over the computational basis, keyed by pair."""
    bits = (np.arange(2**n_sites)[:, None] >> np.arange(n_sites - 1, -1, -1)) & 1
    spins = 1 - 2 * bits
    return {(k + 1, l + 1): spins[:, k] * spins[:, l]
            for k in range(n_sites) for l in range(k + 1, n_sites)}


def tailored_matrix(couplings, duration=1.0, basis="z"):
    J = np.asarray(couplings, dtype=float)
    n = J.shape[0]
    angles = np.zeros(2**n)
    for (k, l), zz in zz_diagonal(n).items():
        angles += 0.5 * duration * J[k - 1, l - 1] * zz
    U = np.diag(np.exp(1j * angles))
    if basis == "x":
        Hn = HADAMARD
        for _ in range(n - 1):
            Hn = np.kron(Hn, HADAMARD)
        U = Hn @ U @ Hn
    return U


def _lift_to_qutrits(op, n_targets):
    """Act with a qubit operator on the coupled levels, identity if any site is in |0>."""
    dim = 3**n_targets
    out = np.eye(dim, dtype=complex)
    idx = []
    for q in range(2**n_targets):
        digits = [(q >> (n_targets - 1 - s)) & 1 for s in range(n_targets)]
        idx.append(sum(d * 3 ** (n_targets - 1 - s) for s, d in enumerate(digits)))
    idx = np.array(idx)
    out[np.ix_(idx, idx)] = op
    return out


def gate_matrix(gate: Gate, site_dim: int = 2, n_sites=None) -> np.ndarray:
    """Local matrix of ``gate`` on its targets (for ``site_dim=3`` qubit gates act on |0'>,|+1>)."""
    kind, p = gate.kind, gate.params
    if kind == "pipulse":
        if site_dim != 3:
            raise ValueError("pi-pulses act on qutrits (site_dim=3)")
        return pipulse_matrix(p["transition"], p.get("phase", 0.0))
    if kind == "rotation":
        op = rotation_matrix(p["theta"], p.get("phi", 0.0))
    elif kind == "phase":
        op = phase_matrix(p["phi"])
    elif kind == "hadamard":
        op = HADAMARD
    elif kind == "ising":
        op = ising_pair_matrix(p["phi"])
    elif kind == "cphase":
        op = cphase_matrix(p["phi"])
    elif kind == "swap":
        op = SWAP
    elif kind == "tailored":
        op = tailored_matrix(p["couplings"], p.get("duration", 1.0), p.get("basis", "z"))
    else:  # pragma: no cover - guarded by Gate.__post_init__
        raise ValueError(kind)
    if site_dim == 3:
        if kind == "swap":
            return _qutrit_swap()
        return _lift_to_qutrits(op, len(gate.targets))
    if site_dim != 2:
        raise ValueError(f"unsupported site_dim {site_dim}")
    return op


def _qutrit_swap():
    S = np.zeros((9, 9), dtype=complex)
    for a in range(3):
        for b in range(3):
            S[3 * b + a, 3 * a + b] = 1.0
    return S


# -- identities --------------------------------------------------------------

def cphase_decompose(phi, k=1, l=2):
    """Split ``C_kl(phi)`` into commuting phase and Ising gates.

    Returns ``(gamma, gates)`` with ``exp(i gamma) T_k(phi/4) T_l(phi/4) U_kl(phi/4)``
    equal to ``C_kl(phi)``.
    """
    phi = check_finite(phi, "phi")
    q = phi / 4
    return q, [phase(k, q), phase(l, q), ising(k, l, q)]


def hadamard_from_rotations(qubit=1):
    """Two microwave pulses giving the Hadamard up to a global phase (first listed acts first)."""
    return [rotation(qubit, np.pi, 0.0), rotation(qubit, np.pi / 2, -np.pi / 2)]


def phased_rotation(qubit, theta, phi):
    """``R(theta, phi)`` written as ``T(phi/2) R(theta) T(-phi/2)`` in application order."""
    return [phase(qubit, -phi / 2), rotation(qubit, theta, 0.0), phase(qubit, phi / 2)]


def uncouple_sequence(ion=1, phased_second=False):
    """pi-pulses moving an ion from the coupled to the uncoupled basis.

    With ``phased_second`` the closing ``|0> <-> |0'>`` pulse carries phase pi,
    which compensates pulse-area errors that are common to all ions.
    """
    check_int(ion, "ion", low=1)
    last = np.pi if phased_second else 0.0
    return [pipulse(ion, "0'-0"), pipulse(ion, "0'-+1"), pipulse(ion, "0'-0", last)]


def couple_sequence(ion=1, phased_second=False):
    # each pulse is Hermitian, so the inverse is the reversed list
    return list(reversed(uncouple_sequence(ion, phased_second)))


def sequence_matrix(gates, site_dim=2):
    """Product of single-site gate matrices in application order."""
    out = None
    for g in gates:
        m = gate_matrix(g, site_dim)
        out = m if out is None else m @ out
    return out
