"""Tunable three-qubit QFT with simultaneous couplings.

The sequence (applied left to right)::

    H1, R3(pi), R2(pi), R1(pi), U(T1), R3(pi), U(T2),
    R3(pi, -3pi/16), R2(A1, 3pi/4), R1(pi, 3pi/16), U23(T3),
    R3(pi/2, -pi/2), R2(A2, 3pi/4)

uses the closed-form waits ``T1, T2`` and the pair ``(T3, A1, A2)`` solving::

    e^{i pi (alpha+2)/16} e^{iX/2} / sqrt2 - sin(A1/2) sin(A2/2) e^{iX} + cos(A1/2) cos(A2/2) = 0
    e^{i pi (alpha-2)/16} e^{iX/2} / sqrt2 - sin(A1/2) cos(A2/2) e^{iX} - cos(A1/2) sin(A2/2) = 0

with ``X = J23 T3`` and ``alpha = J23 / J13``.  The system is four real
equations in three unknowns and is solved as nonlinear least squares; only
optima that reach the root tolerance are accepted.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ._validation import check_coupling_matrix
from .circuit import Circuit
from .compiler import oracle_distances
from .gates import hadamard, rotation, tailored

ROOT_TOL = 1e-10
GRID = 8
FOUR_PI = 4 * np.pi
PAIR_READINGS = ("all", "12,13")


@dataclass(frozen=True)
class ThreeQubitSolution:
    T1: float
    T2: float
    T3: float
    A1: float
    A2: float
    alpha: float
    residual: float
    X: float  # J23 * T3

    @property
    def total_time(self):
        return self.T1 + self.T2 + self.T3

    def to_dict(self):
        out = asdict(self)
        out["total_time"] = self.total_time
        return out


class NoRootError(RuntimeError):
    def __init__(self, message, best_residual, diagnostics=None):
        super().__init__(message)
        self.best_residual = best_residual
        self.diagnostics = diagnostics or {}


def _couplings(J):
    J = check_coupling_matrix(J, n=3, positive=True)
    return J[0, 1], J[0, 2], J[1, 2]


def timings(J):
    """Wait times ``T1 = pi/8 (1/J12 + 1/(2 J13))`` and ``T2 = pi/8 (1/J12 - 1/(2 J13))``."""
    J12, J13, _ = _couplings(J)
    T1 = np.pi / 8 * (1 / J12 + 1 / (2 * J13))
    T2 = np.pi / 8 * (1 / J12 - 1 / (2 * J13))
    if T2 < 0:
        raise ValueError(f"T2 = {T2:.3e} < 0: the sequence needs J12 <= 2 J13")
    return float(T1), float(T2)


def residual_vector(x, alpha):
    """Real and imaginary parts of both equations; ``x = (X, A1, A2)`` broadcasts over leading axes."""
    x = np.asarray(x, dtype=float)
    X, A1, A2 = x[..., 0], x[..., 1], x[..., 2]
    s1, c1, s2, c2 = np.sin(A1 / 2), np.cos(A1 / 2), np.sin(A2 / 2), np.cos(A2 / 2)
    h, f = np.exp(0.5j * X), np.exp(1j * X)
    e1 = np.exp(1j * np.pi / 16 * (alpha + 2)) / np.sqrt(2) * h - s1 * s2 * f + c1 * c2
    e2 = np.exp(1j * np.pi / 16 * (alpha - 2)) / np.sqrt(2) * h - s1 * c2 * f - c1 * s2
    return np.stack([e1.real, e1.imag, e2.real, e2.imag], axis=-1)


def _jacobian(x, alpha):
    X, A1, A2 = x[..., 0], x[..., 1], x[..., 2]
    s1, c1, s2, c2 = np.sin(A1 / 2), np.cos(A1 / 2), np.sin(A2 / 2), np.cos(A2 / 2)
    h, f = np.exp(0.5j * X), np.exp(1j * X)
    E1 = np.exp(1j * np.pi / 16 * (alpha + 2)) / np.sqrt(2)
    E2 = np.exp(1j * np.pi / 16 * (alpha - 2)) / np.sqrt(2)
    d1 = [0.5j * E1 * h - 1j * s1 * s2 * f, -0.5 * (c1 * s2 * f + s1 * c2),
          -0.5 * (s1 * c2 * f + c1 * s2)]
    d2 = [0.5j * E2 * h - 1j * s1 * c2 * f, -0.5 * (c1 * c2 * f - s1 * s2),
          0.5 * (s1 * s2 * f - c1 * c2)]
    rows = [[d.real for d in d1], [d.imag for d in d1], [d.real for d in d2], [d.imag for d in d2]]
    return np.moveaxis(np.array([[np.broadcast_to(v, X.shape) for v in r] for r in rows]), (0, 1), (-2, -1))


def _levenberg_marquardt(x0, alpha, iters=200):
    """Batched Levenberg-Marquardt over the leading axis of ``x0``."""
    x = np.array(x0, dtype=float)
    lam = np.full(x.shape[0], 1e-3)
    r = residual_vector(x, alpha)
    cost = np.sum(r**2, axis=-1)
    eye = np.eye(3)
    for _ in range(iters):
        Jm = _jacobian(x, alpha)
        JtJ = np.einsum("bij,bik->bjk", Jm, Jm)
        g = np.einsum("bij,bi->bj", Jm, r)
        A = JtJ + lam[:, None, None] * (eye * np.diagonal(JtJ, axis1=1, axis2=2)[:, None, :] + 1e-12 * eye)
        step = -np.linalg.solve(A, g[..., None])[..., 0]
        x_new = x + step
        r_new = residual_vector(x_new, alpha)
        cost_new = np.sum(r_new**2, axis=-1)
        better = cost_new < cost
        x[better], r[better], cost[better] = x_new[better], r_new[better], cost_new[better]
        lam = np.where(better, lam / 3, lam * 4)
        lam = np.clip(lam, 1e-15, 1e15)
        if np.all(cost < 1e-30):
            break
    return x, np.max(np.abs(r), axis=-1)


def canonical(x):
    """Map a root to ``X in (0, 4 pi]``, ``A1, A2 in [0, 2 pi)`` when an equivalent exists.

    The equations have period ``4 pi`` in each variable and are invariant under
    shifting both pulse areas by ``2 pi``.  Returns ``None`` when no equivalent
    point lies in the canonical box.
    """
    X, A1, A2 = (float(np.mod(v, FOUR_PI)) for v in x)
    if X == 0.0:
        X = FOUR_PI
    if A1 >= 2 * np.pi and A2 >= 2 * np.pi:
        A1, A2 = A1 - 2 * np.pi, A2 - 2 * np.pi
    if A1 >= 2 * np.pi or A2 >= 2 * np.pi:
        return None
    return X, A1, A2


def start_grid(n=GRID):
    """``X in (0, 4 pi]`` and ``A1, A2 in (0, 2 pi)`` on an ``n^3`` grid."""
    xs = FOUR_PI * np.arange(1, n + 1) / n
    As = 2 * np.pi * (np.arange(n) + 0.5) / n
    return np.array(np.meshgrid(xs, As, As, indexing="ij")).reshape(3, -1).T


def find_roots(alpha: float, grid=None, tol: float = ROOT_TOL):
    """All distinct canonical roots reached from the starting grid, sorted by ``X`` then ``A1``."""
    x0 = start_grid() if grid is None else np.asarray(grid, dtype=float)
    x, res = _levenberg_marquardt(x0, alpha)
    roots = {}
    for xi, ri in zip(x, res):
        if ri >= tol:
            continue
        c = canonical(xi)
        if c is None:
            continue
        key = tuple(np.round(c, 7))
        if key not in roots or ri < roots[key][1]:
            roots[key] = (c, float(ri))
    out = sorted(roots.values(), key=lambda item: (item[0][0], item[0][1]))
    return out, float(np.min(res))


def _solution(J, X, A1, A2, res):
    _, J13, J23 = _couplings(J)
    T1, T2 = timings(J)
    return ThreeQubitSolution(T1, T2, float(X / J23), float(A1), float(A2), float(J23 / J13),
                              float(res), float(X))


def solve_transcendental(J, tol: float = ROOT_TOL) -> ThreeQubitSolution:
    """Root with the smallest ``T3 > 0``.

    Raises :class:`NoRootError` with the best residual when no start converges.
    """
    _, J13, J23 = _couplings(J)
    alpha = J23 / J13
    roots, best = find_roots(alpha, tol=tol)
    if not roots:
        raise NoRootError(f"no root below {tol:g} (best residual {best:.3e}, alpha={alpha:.4g})",
                          best, {"alpha": alpha, "grid": GRID**3})
    (X, A1, A2), res = roots[0]
    return _solution(J, X, A1, A2, res)


def continue_solution(solution: ThreeQubitSolution, J_start, J_end, steps: int = 20,
                      tol: float = ROOT_TOL):
    """Follow a root along ``J(s) = (1 - s) J_start + s J_end``.

    Each step starts the local solver at the previous root, so a smooth branch
    is tracked without jumping.  Returns the list of solutions including both ends.
    """
    J0 = check_coupling_matrix(J_start, n=3, positive=True)
    J1 = check_coupling_matrix(J_end, n=3, positive=True)
    x = np.array([[solution.X, solution.A1, solution.A2]])
    path = [solution]
    for s in np.linspace(0, 1, steps + 1)[1:]:
        J = (1 - s) * J0 + s * J1
        alpha = J[1, 2] / J[0, 2]
        x, res = _levenberg_marquardt(x, alpha)
        if res[0] >= tol:
            raise NoRootError(f"continuation lost the root at s={s:.3f}", float(res[0]))
        path.append(_solution(J, *x[0], float(res[0])))
    return path


def _pair_couplings(J, pairs):
    sub = np.zeros((3, 3))
    for k, l in pairs:
        sub[k - 1, l - 1] = sub[l - 1, k - 1] = J[k - 1, l - 1]
    return sub


def assemble_sequence(solution: ThreeQubitSolution, J, pairs: str = "all") -> Circuit:
    """Circuit of the rearranged sequence, phases transcribed literally.

    ``pairs`` selects which pairs evolve during ``U(T1)`` and ``U(T2)``:
    ``"all"`` or ``"12,13"``.  ``U23(T3)`` couples only ions 2 and 3.
    """
    J = check_coupling_matrix(J, n=3, positive=True)
    if pairs not in PAIR_READINGS:
        raise ValueError(f"pairs must be one of {PAIR_READINGS}")
    coupled = [(1, 2), (1, 3), (2, 3)] if pairs == "all" else [(1, 2), (1, 3)]
    Jc = _pair_couplings(J, coupled)
    J23 = _pair_couplings(J, [(2, 3)])
    pi = np.pi
    s = solution
    gates = [
        hadamard(1),
        rotation(3, pi), rotation(2, pi), rotation(1, pi),
        tailored(Jc, s.T1, label="U(T1)"),
        rotation(3, pi),
        tailored(Jc, s.T2, label="U(T2)"),
        rotation(3, pi, -3 * pi / 16),
        rotation(2, s.A1, 3 * pi / 4, label="A1"),
        rotation(1, pi, 3 * pi / 16),
        tailored(J23, s.T3, label="U23(T3)"),
        rotation(3, pi / 2, -pi / 2),
        rotation(2, s.A2, 3 * pi / 4, label="A2"),
    ]
    return Circuit(3, gates=gates)


def free_evolution_time(circuit: Circuit) -> float:
    return float(sum(g.params["duration"] for g in circuit.gates if g.kind == "tailored"))


def oracle_report(solution: ThreeQubitSolution, J) -> dict:
    """Phase-invariant distance of the assembled sequence to the 3-qubit DFT for each pair reading."""
    out = {}
    for reading in PAIR_READINGS:
        circ = assemble_sequence(solution, J, reading)
        out[reading] = oracle_distances(circ)
    return out
