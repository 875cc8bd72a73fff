"""Ion-chain statics and the gradient-induced spin-spin coupling.

Positions are in units of ``l = (e^2 / (4 pi eps0 M nu^2))**(1/3)``; in those
units the axial potential energy is ``sum u_m^2 / 2 + sum_{m<n} 1/|u_m - u_n|``
times ``M nu^2 l^2``, and its Hessian is ``M nu^2`` times the dimensionless
matrix returned by :func:`hessian`.  The coupling is then::

    J_nm = kappa * (g muB b)^2 / (2 hbar M nu^2) * (A~^-1)_nm       [rad/s]

``kappa`` collects the unit convention of the spin operator in the coupling
formula.  :data:`KAPPA` was fitted once to ``T1 = 3.241 ms`` for the
reference configuration (:func:`reference_config`) and is frozen; use
``kappa=1`` for the bare formula.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import constants

from ._validation import check_finite, check_int

HBAR = constants.hbar
MU_B = constants.physical_constants["Bohr magneton"][0]
AMU = constants.atomic_mass
G_ELECTRON = -constants.physical_constants["electron g factor"][0]

MAX_IONS = 10
REFERENCE_T1 = 3.241e-3  # s
# fit_kappa(reference_config()); the bare formula overestimates J by a factor ~1.947
KAPPA = 0.5135532928050308


@dataclass(frozen=True)
class TrapConfig:
    n_ions: int
    mass_amu: float
    g_factor: float = G_ELECTRON
    gradient: float = 20.0  # T/m, uniform along the axis
    axial_frequency: float = 2 * np.pi * 200e3  # rad/s

    def __post_init__(self):
        check_int(self.n_ions, "n_ions", low=1, high=MAX_IONS)
        for name in ("mass_amu", "g_factor", "gradient", "axial_frequency"):
            value = check_finite(getattr(self, name), name)
            if value <= 0:
                raise ValueError(f"{name} must be positive, got {value}")

    @property
    def mass(self):
        return self.mass_amu * AMU

    @property
    def length_scale(self):
        """Characteristic inter-ion distance in metres."""
        k = constants.e**2 / (4 * np.pi * constants.epsilon_0)
        return (k / (self.mass * self.axial_frequency**2)) ** (1 / 3)

    def with_ions(self, n_ions):
        return TrapConfig(n_ions, self.mass_amu, self.g_factor, self.gradient, self.axial_frequency)


def reference_config(n_ions=3):
    """171Yb+ with b = 20 T/m and nu = 2 pi x 200 kHz."""
    return TrapConfig(n_ions=n_ions, mass_amu=170.9363315, gradient=20.0,
                      axial_frequency=2 * np.pi * 200e3)


@dataclass(frozen=True)
class CouplingMatrix:
    """Symmetric coupling matrix with zero diagonal.

    ``mode`` is ``"physical"`` (rad/s) or ``"phase"`` (dimensionless, t = 1).
    """

    values: np.ndarray
    mode: str = "physical"
    kappa: float = field(default=1.0)

    def __post_init__(self):
        J = np.array(self.values, dtype=float)
        if J.ndim != 2 or J.shape[0] != J.shape[1]:
            raise ValueError("coupling matrix must be square")
        if not np.allclose(J, J.T, rtol=1e-12, atol=0):
            raise ValueError("coupling matrix must be symmetric")
        if np.any(np.diag(J) != 0):
            raise ValueError("coupling matrix must have zero diagonal")
        if self.mode not in ("physical", "phase"):
            raise ValueError("mode must be 'physical' or 'phase'")
        J.setflags(write=False)
        object.__setattr__(self, "values", J)

    @property
    def n(self):
        return self.values.shape[0]

    def __getitem__(self, pair):
        k, l = pair
        return self.values[k - 1, l - 1]


def _forces(u):
    diff = u[:, None] - u[None, :]
    np.fill_diagonal(diff, np.inf)
    return u - np.sum(np.sign(diff) / diff**2, axis=1)


def hessian(u) -> np.ndarray:
    """Dimensionless Hessian of the trap-plus-Coulomb energy at positions ``u``."""
    u = np.asarray(u, dtype=float)
    diff = np.abs(u[:, None] - u[None, :])
    np.fill_diagonal(diff, np.inf)
    off = -2.0 / diff**3
    A = off.copy()
    np.fill_diagonal(A, 1.0 - off.sum(axis=1))
    return A


def equilibrium_positions(n_ions: int, tol: float = 1e-12, max_iter: int = 100) -> np.ndarray:
    """Equilibrium positions of ``n_ions`` ions in a harmonic well (dimensionless).

    Damped Newton iteration on the force balance ``u_m = sum_n sign(u_m-u_n)/(u_m-u_n)^2``.
    The energy is strictly convex on ordered configurations, so the step is
    only shortened to keep the ions ordered.
    """
    N = check_int(n_ions, "n_ions", low=1, high=MAX_IONS)
    if N == 1:
        return np.zeros(1)
    # spacing ~ 2 N^-0.56 near the centre; the exact start is not critical
    half = 0.5 * 2.0 * N**0.44
    u = np.linspace(-half, half, N)
    for _ in range(max_iter):
        grad = _forces(u)
        if np.linalg.norm(grad) < tol:
            break
        step = np.linalg.solve(hessian(u), -grad)
        t = 1.0
        while np.any(np.diff(u + t * step) <= 0):
            t *= 0.5
        u = u + t * step
    else:
        raise RuntimeError(
            f"equilibrium solve did not converge, residual {np.linalg.norm(_forces(u)):.3e}"
        )
    # the Newton iterates are symmetric up to rounding; remove the rounding
    u = 0.5 * (u - u[::-1])
    residual = np.linalg.norm(_forces(u))
    if residual > tol:
        raise RuntimeError(f"equilibrium solve did not converge, residual {residual:.3e}")
    return u


def coupling_prefactor(config: TrapConfig) -> float:
    """``(g muB b)^2 / (2 hbar M nu^2)`` in rad/s."""
    return (config.g_factor * MU_B * config.gradient) ** 2 / (
        2 * HBAR * config.mass * config.axial_frequency**2
    )


def coupling_matrix(config: TrapConfig, kappa: float = KAPPA) -> CouplingMatrix:
    """Spin-spin couplings ``J_nm`` (rad/s) for a uniform gradient."""
    u = equilibrium_positions(config.n_ions)
    A = hessian(u)
    try:
        Ainv = np.linalg.inv(A)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - A is positive definite
        raise ValueError("singular Hessian") from exc
    J = kappa * coupling_prefactor(config) * Ainv
    J = 0.5 * (J + J.T)
    np.fill_diagonal(J, 0.0)
    return CouplingMatrix(J, "physical", kappa)


def fit_kappa(config: TrapConfig | None = None, target_t1: float = REFERENCE_T1) -> float:
    """Scale factor making ``pi/8 (1/J12 + 1/(2 J13))`` equal ``target_t1``."""
    config = reference_config() if config is None else config
    if config.n_ions != 3:
        raise ValueError("kappa is fitted on a three-ion chain")
    J = coupling_matrix(config, kappa=1.0).values
    t1 = np.pi / 8 * (1 / J[0, 1] + 1 / (2 * J[0, 2]))
    return float(t1 / target_t1)


_CONFIG_KEYS = {
    "n_ions": int,
    "mass_amu": float,
    "g_factor": float,
    "gradient_T_per_m": float,
    "axial_freq_Hz": float,
}


def parse_config(text: str) -> TrapConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _CONFIG_KEYS[key](value)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    missing = {"n_ions", "mass_amu"} - values.keys()
    if missing:
        raise ValueError(f"missing keys: {sorted(missing)}")
    kwargs = {"n_ions": values["n_ions"], "mass_amu": values["mass_amu"]}
    if "g_factor" in values:
        kwargs["g_factor"] = values["g_factor"]
    if "gradient_T_per_m" in values:
        kwargs["gradient"] = values["gradient_T_per_m"]
    if "axial_freq_Hz" in values:
        kwargs["axial_frequency"] = 2 * np.pi * values["axial_freq_Hz"]
    return TrapConfig(**kwargs)


def load_config(path) -> TrapConfig:
    return parse_config(Path(path).read_text())


def format_config(config: TrapConfig) -> str:
    return (
        f"n_ions = {config.n_ions}\n"
        f"mass_amu = {config.mass_amu!r}\n"
        f"g_factor = {config.g_factor!r}\n"
        f"gradient_T_per_m = {config.gradient!r}\n"
        f"axial_freq_Hz = {config.axial_frequency / (2 * np.pi)!r}\n"
    )
