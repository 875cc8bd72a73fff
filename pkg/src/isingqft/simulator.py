"""Dense operator algebra on chains of qubits or qutrits.

Ordering convention used throughout the package: sites are numbered from 1,
and site 1 is the most significant digit of the computational index.  For
qubits this means ``|q1 q2 ... qN>`` maps to index ``q1*2**(N-1) + ... + qN``.
The bit-reversal swaps appended to a Cooley-Tukey QFT exchange sites
``k <-> N+1-k`` under this convention.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ._validation import check_int, check_square

ORDERING_NOTE = "site 1 is the most significant digit of the computational index"


def embed_local(op, targets: Sequence[int], n_sites: int, site_dim: int = 2) -> np.ndarray:
    """Lift a local operator to the full chain.

    Parameters
    ----------
    op : array_like
        Square matrix of dimension ``site_dim ** len(targets)``. Its own
        tensor factors are ordered as ``targets`` (first target = most
        significant digit of ``op``).
    targets : sequence of int
        Distinct 1-based site indices.
    n_sites : int
        Number of sites in the chain.
    site_dim : int
        Local Hilbert space dimension (2 or 3).

    Returns
    -------
    ndarray
        ``site_dim**n_sites`` square complex matrix.
    """
    n_sites = check_int(n_sites, "n_sites", low=1)
    site_dim = check_int(site_dim, "site_dim", low=2)
    op = check_square(np.asarray(op, dtype=complex), "op")
    targets = [check_int(t, "target", low=1, high=n_sites) for t in targets]
    k = len(targets)
    if k == 0:
        raise ValueError("at least one target site is required")
    if len(set(targets)) != k:
        raise ValueError(f"repeated target index in {targets}")
    if op.shape[0] != site_dim**k:
        raise ValueError(
            f"operator dimension {op.shape[0]} does not match site_dim**{k} = {site_dim**k}"
        )

    axes = [t - 1 for t in targets]
    rest = [s for s in range(n_sites) if s not in axes]
    order = axes + rest
    full = np.kron(op, np.eye(site_dim ** (n_sites - k), dtype=complex))
    full = full.reshape([site_dim] * (2 * n_sites))
    # axes of `full` are (order, order); move them back to natural site order
    inverse = list(np.argsort(order))
    full = full.transpose(inverse + [n_sites + i for i in inverse])
    dim = site_dim**n_sites
    return np.ascontiguousarray(full.reshape(dim, dim))


def apply_local(op, targets: Sequence[int], state, n_sites: int, site_dim: int = 2) -> np.ndarray:
    """Apply a local operator to the columns of ``state`` without forming the full matrix."""
    op = np.asarray(op, dtype=complex)
    state = np.asarray(state, dtype=complex)
    k = len(targets)
    vec = state.ndim == 1
    cols = state.reshape(site_dim**n_sites, -1)
    m = cols.shape[1]
    t = cols.reshape([site_dim] * n_sites + [m])
    axes = [s - 1 for s in targets]
    t = np.moveaxis(t, axes, list(range(k)))
    shape = t.shape
    t = (op @ t.reshape(site_dim**k, -1)).reshape(shape)
    t = np.moveaxis(t, list(range(k)), axes)
    out = t.reshape(site_dim**n_sites, m)
    return out[:, 0] if vec else out


def compose(circuit) -> np.ndarray:
    """Unitary of a circuit; the first listed gate acts first on states.

    ``circuit`` is a :class:`isingqft.circuit.Circuit`.
    """
    from .gates import gate_matrix

    dim = circuit.site_dim**circuit.n_sites
    U = np.eye(dim, dtype=complex)
    for gate in circuit.gates:
        U = apply_local(
            gate_matrix(gate, circuit.site_dim, circuit.n_sites),
            gate.support(circuit.n_sites),
            U,
            circuit.n_sites,
            circuit.site_dim,
        )
    return U


def phase_invariant_distance(U, V) -> float:
    """``1 - |tr(U^dagger V)| / dim``; zero iff ``U`` equals ``V`` up to a global phase."""
    U = check_square(np.asarray(U, dtype=complex), "U")
    V = check_square(np.asarray(V, dtype=complex), "V")
    if U.shape != V.shape:
        raise ValueError(f"dimension mismatch: {U.shape} vs {V.shape}")
    overlap = abs(np.vdot(U, V)) / U.shape[0]
    return float(max(0.0, 1.0 - overlap))


def global_phase(U, V) -> float:
    """Phase ``g`` minimising ``||U - exp(ig) V||`` (meaningful when the distance is ~0)."""
    return float(np.angle(np.vdot(V, U)))


def bit_reversal_permutation(n_qubits: int) -> np.ndarray:
    """Permutation matrix mapping ``|b1 ... bN>`` to ``|bN ... b1>``."""
    n_qubits = check_int(n_qubits, "n_qubits", low=1)
    dim = 2**n_qubits
    P = np.zeros((dim, dim))
    for i in range(dim):
        j = int(format(i, f"0{n_qubits}b")[::-1], 2)
        P[j, i] = 1.0
    return P


def basis_state(index: int, dim: int) -> np.ndarray:
    psi = np.zeros(dim, dtype=complex)
    psi[index] = 1.0
    return psi
