"""Bichromatic (Molmer-Sorensen type) realisation of a tailored Ising evolution.

Spins couple to the centre-of-mass mode through (hbar = 1)::

    H(t) = sum_k g_k s(phi+_k) (a^dag e^{i delta t - i phi-_k} + a e^{-i delta t + i phi-_k})

with ``s(phi) = sx cos phi + sy sin phi``.  The joint space is
``spins (x) Fock`` with the spins first (site 1 most significant) and the
Fock space truncated to ``n_max`` levels.

For ``phi+ = 0`` the Magnus series terminates after two terms::

    U(t) = D(alpha) exp(i (delta t - sin delta t)/delta^2 * S^2),
    alpha = e^{-i phi-} (1 - e^{i delta t}) / delta * S,      S = sum_k g_k sx_k

so at ``tau = 2 pi / delta`` the motion disentangles and the spins acquire
``exp(4 pi i / delta^2 sum_{k<p} g_k g_p sx_k sx_p)`` plus a global phase.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy.linalg import expm

from ._validation import check_finite, check_int
from .circuit import Circuit
from .gates import HADAMARD, SX, SY, rotation, tailored

WEAK_DRIVE_RATIO = 0.2
MIN_FOCK = 10


class FockTruncationError(RuntimeError):
    pass


@dataclass
class BichromaticDrive:
    g: np.ndarray  # rad/s per ion
    delta: float  # rad/s
    phase_plus: np.ndarray | None = None
    phase_minus: np.ndarray | None = None
    n_max: int = 25

    def __post_init__(self):
        self.g = np.atleast_1d(np.asarray(self.g, dtype=float))
        self.delta = check_finite(self.delta, "delta")
        if self.delta == 0:
            raise ValueError("detuning must be nonzero")
        n = self.g.size
        self.phase_plus = np.zeros(n) if self.phase_plus is None else np.asarray(self.phase_plus, float)
        self.phase_minus = np.zeros(n) if self.phase_minus is None else np.asarray(self.phase_minus, float)
        if self.phase_plus.shape != (n,) or self.phase_minus.shape != (n,):
            raise ValueError("one spin and one motional phase per ion")
        self.n_max = check_int(self.n_max, "n_max", low=MIN_FOCK)
        ratio = np.max(np.abs(self.g)) / abs(self.delta)
        if ratio > WEAK_DRIVE_RATIO * (1 + 1e-12):
            raise ValueError(
                f"|g|/|delta| = {ratio:.3f} exceeds {WEAK_DRIVE_RATIO}; lower the target or "
                "spread the phase over more loops"
            )

    @property
    def n_spins(self):
        return self.g.size

    @property
    def tau(self):
        """Loop time ``2 pi / |delta|`` after which the motion returns."""
        return 2 * np.pi / abs(self.delta)


def _annihilation(n_max):
    return np.diag(np.sqrt(np.arange(1, n_max)), 1).astype(complex)


def _spin_op(single, k, n):
    out = np.array([[1.0 + 0j]])
    for s in range(n):
        out = np.kron(out, single if s == k else np.eye(2))
    return out


def _raising_part(drive):
    """``B`` with ``H(t) = e^{i delta t} B + h.c.``."""
    n, nm = drive.n_spins, drive.n_max
    adag = _annihilation(nm).conj().T
    B = np.zeros((2**n * nm, 2**n * nm), dtype=complex)
    for k in range(n):
        phi = drive.phase_plus[k]
        s = SX * np.cos(phi) + SY * np.sin(phi)
        B += drive.g[k] * np.exp(-1j * drive.phase_minus[k]) * np.kron(_spin_op(s, k, n), adag)
    return B


def _propagate(B, delta, t, steps):
    """Fourth-order Magnus integrator with two Gauss-Legendre nodes per step."""
    h = t / steps
    c1, c2 = 0.5 - np.sqrt(3) / 6, 0.5 + np.sqrt(3) / 6
    U = np.eye(B.shape[0], dtype=complex)
    for j in range(steps):
        t0 = j * h
        H1 = np.exp(1j * delta * (t0 + c1 * h)) * B
        H1 = H1 + H1.conj().T
        H2 = np.exp(1j * delta * (t0 + c2 * h)) * B
        H2 = H2 + H2.conj().T
        # Omega = -i h/2 (H1 + H2) - (sqrt(3) h^2 / 12) [H2, H1]
        gen = 0.5 * h * (H1 + H2) - 1j * (np.sqrt(3) * h**2 / 12) * (H2 @ H1 - H1 @ H2)
        w, v = np.linalg.eigh(0.5 * (gen + gen.conj().T))
        U = (v * np.exp(-1j * w)) @ v.conj().T @ U
    return U


def fock_leakage(U, n_spins, n_max, levels=(0,)):
    """Largest population reaching the top Fock level from ``spin (x) |m>``, ``m`` in ``levels``."""
    dim_s = 2**n_spins
    U = U.reshape(dim_s, n_max, dim_s, n_max)
    worst = 0.0
    for m in levels:
        cols = U[:, :, :, m]  # (spin_out, fock_out, spin_in)
        worst = max(worst, float(np.max(np.sum(np.abs(cols[:, n_max - 1, :]) ** 2, axis=0))))
    return worst


def propagate_numeric(
    drive: BichromaticDrive, t: float, steps: int | None = None, tol: float = 1e-8,
    leak_tol: float = 1e-6, max_steps: int = 2**16,
) -> np.ndarray:
    """Time-ordered propagator on ``spins (x) Fock`` at time ``t``.

    Without ``steps`` the step count is doubled until halving the step
    changes the propagator by less than ``tol`` (max abs entry).
    """
    t = check_finite(t, "t")
    B = _raising_part(drive)
    if steps is None:
        steps = max(16, int(np.ceil(64 * abs(t) / drive.tau)))
        U = _propagate(B, drive.delta, t, steps)
        while True:
            if 2 * steps > max_steps:
                raise RuntimeError("step-halving did not converge")
            U2 = _propagate(B, drive.delta, t, 2 * steps)
            change = np.max(np.abs(U2 - U))
            steps, U = 2 * steps, U2
            if change < tol:
                break
    else:
        U = _propagate(B, drive.delta, t, check_int(steps, "steps", low=1))
    leak = fock_leakage(U, drive.n_spins, drive.n_max)
    if leak > leak_tol:
        raise FockTruncationError(f"top Fock level population {leak:.2e}; increase n_max")
    return U


@dataclass
class MagnusPropagator:
    """Closed-form propagator data at time ``t``.

    ``displacements`` maps each ``sx`` eigen-sector (tuple of +-1) to its
    coherent amplitude; ``pair_phases[k, p]`` (``k < p``, 0-based) multiplies
    ``sx_k sx_p``; ``global_phase`` multiplies the identity.
    """

    drive: BichromaticDrive
    t: float
    displacements: dict = field(repr=False)
    pair_phases: np.ndarray
    global_phase: float

    def unitary(self, n_max=None):
        n_max = self.drive.n_max if n_max is None else n_max
        n = self.drive.n_spins
        a = _annihilation(n_max)
        Hn = np.array([[1.0]])
        for _ in range(n):
            Hn = np.kron(Hn, HADAMARD)
        dim_s = 2**n
        block = np.zeros((dim_s * n_max, dim_s * n_max), dtype=complex)
        for idx, sector in enumerate(product((1, -1), repeat=n)):
            s = np.array(sector)
            phase = self.global_phase + sum(
                self.pair_phases[k, p] * s[k] * s[p] for k in range(n) for p in range(k + 1, n))
            alpha = self.displacements[sector]
            D = expm(alpha * a.conj().T - np.conj(alpha) * a)
            sl = slice(idx * n_max, (idx + 1) * n_max)
            block[sl, sl] = np.exp(1j * phase) * D
        # sector index order (+,+..) .. (-,-..) matches the Hadamard-rotated basis order
        W = np.kron(Hn, np.eye(n_max))
        return W @ block @ W.conj().T


def magnus_propagator(drive: BichromaticDrive, t: float) -> MagnusPropagator:
    t = check_finite(t, "t")
    if np.any(drive.phase_plus != 0):
        raise ValueError("closed form needs phase_plus = 0 (sx coupling)")
    if np.ptp(drive.phase_minus) != 0:
        raise ValueError("closed form needs a common motional phase")
    d = drive.delta
    rot = np.exp(-1j * drive.phase_minus[0])
    amp = rot * (1 - np.exp(1j * d * t)) / d
    disp = {s: amp * float(np.dot(drive.g, s)) for s in product((1, -1), repeat=drive.n_spins)}
    f = (d * t - np.sin(d * t)) / d**2
    pair = np.triu(2 * f * np.outer(drive.g, drive.g), 1)
    return MagnusPropagator(drive, t, disp, pair, float(f * np.sum(drive.g**2)))


def spin_block(U, n_spins, n_max, m_in=0, m_out=0):
    """Spin operator ``<m_out| U |m_in>``."""
    dim_s = 2**n_spins
    return U.reshape(dim_s, n_max, dim_s, n_max)[:, m_out, :, m_in]


def fock_fidelities(U_num, U_ref, n_spins, n_max, levels=range(4)):
    """``|tr <m|U_num^dag U_ref|m>| / 2**N`` for each initial Fock level ``m``."""
    prod_ = U_num.conj().T @ U_ref
    return {m: float(abs(np.trace(spin_block(prod_, n_spins, n_max, m, m))) / 2**n_spins)
            for m in levels}


def fit_spin_phases(U, n_spins, n_max, m=0, guess=None):
    """Least-squares ``(global, pair)`` phases of the ``<m|U|m>`` spin block in the ``sx`` basis.

    Phases are only defined modulo ``2 pi``; the fit is made for the
    deviation from ``guess = (global, pair)`` (default zero), so the result
    is the branch nearest the guess.
    """
    S = spin_block(U, n_spins, n_max, m, m)
    Hn = np.array([[1.0]])
    for _ in range(n_spins):
        Hn = np.kron(Hn, HADAMARD)
    d = np.diag(Hn @ S @ Hn)
    pairs = [(k, p) for k in range(n_spins) for p in range(k + 1, n_spins)]
    base0, pair0 = (0.0, np.zeros((n_spins, n_spins))) if guess is None else guess
    rows, rhs = [], []
    for sector, value in zip(product((1, -1), repeat=n_spins), d):
        s = np.array(sector)
        row = [s[k] * s[p] for k, p in pairs]
        theta0 = base0 + sum(pair0[k, p] * r for (k, p), r in zip(pairs, row))
        rows.append([1.0] + row)
        rhs.append(np.angle(value * np.exp(-1j * theta0)))
    coef, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
    out = np.array(pair0, dtype=float)
    for i, (k, p) in enumerate(pairs):
        out[k, p] += coef[1 + i]
    return float(base0 + coef[0]), out


def purity_deficit(U, n_spins, n_max, spin_state=None, fock=0):
    """``1 - tr(rho_spin^2)`` after ``U`` acts on ``spin_state (x) |fock>``."""
    dim_s = 2**n_spins
    if spin_state is None:
        spin_state = np.zeros(dim_s, dtype=complex)
        spin_state[0] = 1.0
    psi0 = np.kron(np.asarray(spin_state, dtype=complex), np.eye(n_max)[fock])
    psi = (U @ psi0).reshape(dim_s, n_max)
    rho = psi @ psi.conj().T
    return float(1.0 - np.real(np.trace(rho @ rho)))


def _drive_scale(coupling, loops, duration):
    duration = 1.0 / coupling.alpha if duration is None else check_finite(duration, "duration")
    return np.sqrt(coupling.alpha * duration / (8 * loops))


def drive_for_target(coupling, delta: float, loops: int = 1, duration=None,
                     n_max: int = 25) -> BichromaticDrive:
    """Spin-phonon couplings realising the tailored evolution ``U(J)`` in ``loops`` loops.

    ``coupling`` is a :class:`isingqft.compiler.TailoredCoupling`; ``duration``
    defaults to the ``1/alpha`` used by the parallel sequence.  Pair ``(k, l)``
    must acquire ``J_kl duration / 2 = pi alpha duration a_k a_l / 2``, and each
    loop contributes ``4 pi g_k g_l / delta^2``, so
    ``g_k = a_k |delta| sqrt(alpha duration / (8 loops))``.
    """
    delta = check_finite(delta, "delta")
    loops = check_int(loops, "loops", low=1)
    g = np.asarray(coupling.a, dtype=float) * abs(delta) * _drive_scale(coupling, loops, duration)
    return BichromaticDrive(g=g, delta=delta, n_max=n_max)


def min_loops(coupling, duration=None, ratio=WEAK_DRIVE_RATIO) -> int:
    """Fewest loops that keep ``|g|/|delta|`` within ``ratio``."""
    peak = np.max(np.abs(coupling.a)) * _drive_scale(coupling, 1, duration)
    return max(1, int(np.ceil((peak / ratio) ** 2 - 1e-12)))


def to_xx_basis(circuit: Circuit) -> Circuit:
    """Rewrite each ``sz sz`` tailored evolution as ``sx sx`` between y rotations.

    ``exp(i c sz sz) = Ry(pi/2)^dag exp(i c sx sx) Ry(pi/2)`` on every coupled
    site, so the rewritten circuit has the same unitary.
    """
    out = Circuit(circuit.n_sites, circuit.site_dim, ordering_note=circuit.ordering_note)
    for g in circuit.gates:
        if g.kind != "tailored" or g.params.get("basis", "z") != "z":
            out.append(g)
            continue
        J = np.asarray(g.params["couplings"])
        active = [k + 1 for k in range(J.shape[0]) if np.any(J[k] != 0)]
        out.extend(rotation(k, np.pi / 2, np.pi / 2, label="to_x") for k in active)
        out.append(tailored(J, g.params.get("duration", 1.0), basis="x", label=g.label))
        out.extend(rotation(k, np.pi / 2, -np.pi / 2, label="from_x") for k in active)
    return out


def verify_drive(drive: BichromaticDrive, t=None, levels=range(4)) -> dict:
    """Compare numeric and closed-form propagators; returns the metrics as plain floats."""
    t = drive.tau if t is None else t
    U_num = propagate_numeric(drive, t)
    mp = magnus_propagator(drive, t)
    U_cf = mp.unitary()
    n, nm = drive.n_spins, drive.n_max
    fid = fock_fidelities(U_num, U_cf, n, nm, levels)
    base, pair = fit_spin_phases(U_num, n, nm, guess=(mp.global_phase, mp.pair_phases))
    plus = np.ones(2**n) / np.sqrt(2**n)
    zero = np.zeros(2**n)
    zero[0] = 1.0
    deficit = max(purity_deficit(U_num, n, nm, st, m) for st in (zero, plus) for m in levels)
    pair_pred = mp.pair_phases
    mask = np.triu(np.ones((n, n), bool), 1)
    err = np.abs(pair[mask] - pair_pred[mask])
    nonzero = np.abs(pair_pred[mask]) > 0
    rel = float(np.max(err[nonzero] / np.abs(pair_pred[mask][nonzero]), initial=0.0))
    return {
        "t": float(t),
        "min_fidelity": min(fid.values()),
        "fidelity_by_fock": {str(k): v for k, v in fid.items()},
        "purity_deficit": deficit,
        "pair_phase_numeric": pair[mask].tolist(),
        "pair_phase_closed_form": pair_pred[mask].tolist(),
        "pair_phase_rel_error": rel,
        "pair_phase_abs_error": float(np.max(err, initial=0.0)),
        "global_phase_numeric": base,
        "global_phase_closed_form": mp.global_phase,
        "global_phase_error": float(abs(np.angle(np.exp(1j * (base - mp.global_phase))))),
        "leakage": fock_leakage(U_num, n, nm, levels),
    }
