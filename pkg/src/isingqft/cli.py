"""Command-line front end: ``isingqft {compile,verify,trap,schedule,ms-sim,three-qubit}``.

Every command prints a short human-readable report, or the full JSON report
with ``--json``.  ``compile`` always writes circuit JSON to stdout so it can be
piped into ``verify``.  Exit codes: 0 pass, 1 fail, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import compiler, msgate, schedule, three_qubit, trap
from .circuit import Circuit

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
ORACLE_TOL = 1e-10


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    command: str
    inputs: dict
    outputs: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)
    passed: bool | None = None

    def to_dict(self):
        return _plain({"command": self.command, "inputs": self.inputs, "outputs": self.outputs,
                       "metrics": self.metrics, "passed": self.passed})

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


def _plain(obj):
    """Convert numpy containers and scalars to JSON-native types (floats keep full precision)."""
    if isinstance(obj, dict):
        return {str(k) if not isinstance(k, tuple) else ",".join(map(str, k)): _plain(v)
                for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def default_config_path():
    return resources.files("isingqft") / "data" / "yb171.cfg"


def _load_trap(args):
    path = args.config if args.config else default_config_path()
    try:
        cfg = trap.parse_config(Path(str(path)).read_text() if args.config else path.read_text())
    except (OSError, ValueError) as exc:
        raise UsageError(f"config {path}: {exc}") from exc
    if getattr(args, "ions", None):
        try:
            cfg = cfg.with_ions(args.ions)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    return cfg


# -- commands ----------------------------------------------------------------

def cmd_compile(args):
    n = args.qubits
    if not 1 <= n <= compiler.MAX_QUBITS:
        raise UsageError(f"--qubits must be in [1, {compiler.MAX_QUBITS}]")
    if args.mode == "ct":
        circ = compiler.cooley_tukey_circuit(n, include_final_swaps=args.swaps)
    elif args.mode == "consecutive":
        circ = compiler.consecutive_sequence(n, include_final_swaps=args.swaps)
    else:
        tail = compiler.default_tailoring(n, alpha=args.alpha)
        circ = compiler.parallel_sequence(n, tail, include_final_swaps=args.swaps)
    text = circ.to_json(indent=2 if args.json else None)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    counts = {k: circ.count(k) for k in ("hadamard", "phase", "tailored", "swap", "cphase")}
    print(f"# {args.mode} n={n}: {len(circ)} gates "
          + ", ".join(f"{k}={v}" for k, v in counts.items() if v), file=sys.stderr)
    return None


def _read_circuit(source):
    try:
        text = sys.stdin.read() if source in (None, "-") else Path(source).read_text()
        return Circuit.from_json(text)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot parse circuit: {exc}") from exc


def cmd_verify(args):
    circ = _read_circuit(args.circuit)
    if circ.site_dim != 2:
        raise UsageError("verify needs a qubit circuit")
    d = compiler.oracle_distances(circ)
    best = min(d.values())
    return RunReport("verify", {"n_qubits": circ.n_sites, "n_gates": len(circ), "tol": args.tol},
                     metrics={"distance": d["direct"], "distance_bit_reversed": d["bit_reversed"]},
                     passed=bool(best < args.tol))


def per_gate_durations(J):
    N = J.shape[0]
    return {(k, l): schedule.gate_duration(np.pi / 2 ** (l - k + 1), J[k - 1, l - 1])
            for k in range(1, N) for l in range(k + 1, N + 1)}


def trap_sweep(cfg, n_values, kappa=trap.KAPPA):
    """Consecutive and parallel totals over chain lengths, parallel scale from the 2-ion chain."""
    alpha = 4 * trap.coupling_matrix(cfg.with_ions(2), kappa).values[0, 1] / np.pi
    rows = []
    for n in n_values:
        J = trap.coupling_matrix(cfg.with_ions(n), kappa).values
        tc = schedule.total_time_consecutive(n, J)
        tp = schedule.total_time_parallel(n, alpha)
        rows.append({"n": n, "consecutive": tc, "parallel": tp, "ratio": tc / tp if tp else None})
    return alpha, rows


def linear_r2(x, y):
    x, y = np.asarray(x, float), np.asarray(y, float)
    p = np.polyfit(x, y, 1)
    res = y - np.polyval(p, x)
    return float(p[0]), float(1 - res @ res / np.sum((y - y.mean()) ** 2))


def cmd_trap(args):
    cfg = _load_trap(args)
    N = cfg.n_ions
    J_raw = trap.coupling_matrix(cfg, kappa=1.0)
    J = trap.coupling_matrix(cfg, kappa=args.kappa)
    report = RunReport("trap", {"config": trap.format_config(cfg), "kappa": args.kappa})
    report.outputs["positions"] = trap.equilibrium_positions(N)
    report.outputs["length_scale_m"] = cfg.length_scale
    report.outputs["J_kappa1"] = J_raw.values
    report.outputs["J"] = J.values
    report.metrics["kappa_fitted"] = trap.KAPPA
    report.metrics["kappa_raw_over_fitted_J"] = 1.0 / args.kappa
    if N > 1:
        report.outputs["gate_durations"] = per_gate_durations(J.values)
        report.metrics["consecutive_total"] = schedule.total_time_consecutive(N, J.values)
        report.metrics["consecutive_total_kappa1"] = schedule.total_time_consecutive(N, J_raw.values)
        alpha, rows = trap_sweep(cfg, [N], args.kappa)
        report.metrics["parallel_alpha"] = alpha
        report.metrics["parallel_total"] = rows[0]["parallel"]
    else:
        report.outputs["gate_durations"] = {}
        report.metrics["consecutive_total"] = 0.0
        report.metrics["parallel_total"] = 0.0
    if N == 3:
        T1, T2 = three_qubit.timings(J.values)
        report.metrics.update(T1=T1, T2=T2)
    if args.sweep:
        ns = list(range(2, args.sweep + 1))
        alpha, rows = trap_sweep(cfg, ns, args.kappa)
        c, r2 = schedule.fit_quadratic(ns, [r["consecutive"] for r in rows])
        slope, r2_ratio = linear_r2(ns, [r["ratio"] for r in rows]) if len(ns) > 2 else (None, None)
        report.outputs["sweep"] = rows
        report.metrics.update(sweep_c=c, sweep_r2=r2, ratio_slope=slope, ratio_linear_r2=r2_ratio)
    if args.schedule_out and N > 1:
        sched = schedule.consecutive_schedule(N, J.values, rabi_frequency=args.rabi)
        Path(args.schedule_out).write_text(sched.to_json(indent=2) + "\n")
        report.outputs["schedule_path"] = str(args.schedule_out)
    return report


def cmd_schedule(args):
    cfg = _load_trap(args)
    N = cfg.n_ions
    J = trap.coupling_matrix(cfg, kappa=args.kappa).values
    sched = schedule.consecutive_schedule(N, J, rabi_frequency=args.rabi, phased_second=args.phased)
    report = RunReport("schedule", {"config": trap.format_config(cfg), "rabi": args.rabi,
                                    "phased_second": args.phased})
    report.outputs["schedule"] = sched.to_dict()
    report.metrics["total_time"] = sched.total_time
    report.metrics["free_evolution_time"] = sched.free_evolution_time()
    report.metrics["n_windows"] = len(sched.windows())
    cond = schedule.uncoupled_conditional_phases(sched)
    report.metrics["max_uncoupled_conditional_phase"] = max(cond, default=0.0)
    if args.out:
        Path(args.out).write_text(sched.to_json(indent=2) + "\n")
    if N <= schedule.MAX_SIM_IONS:
        d = compiler.oracle_distances(schedule.simulate_schedule(sched), N)
        report.metrics["distance_bit_reversed"] = d["bit_reversed"]
        report.passed = bool(d["bit_reversed"] < 1e-9 and max(cond, default=0.0) < 1e-12)
    return report


def cmd_ms_sim(args):
    if args.step:
        tc = compiler.tailor_couplings(args.ions, args.step, alpha=args.alpha)
        loops = args.loops or msgate.min_loops(tc)
        try:
            drive = msgate.drive_for_target(tc, args.delta, loops=loops, n_max=args.n_max)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        t = loops * drive.tau
    else:
        try:
            drive = msgate.BichromaticDrive([args.g_ratio * args.delta] * args.ions, args.delta,
                                            n_max=args.n_max)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        loops, t = 1, drive.tau
    metrics = msgate.verify_drive(drive, t)
    report = RunReport("ms-sim", {"ions": args.ions, "delta": args.delta, "n_max": args.n_max,
                                  "step": args.step, "loops": loops},
                       outputs={"g": drive.g, "tau": drive.tau}, metrics=metrics)
    report.passed = bool(metrics["min_fidelity"] >= 1 - 1e-4 and metrics["purity_deficit"] < 1e-4
                         and metrics["pair_phase_rel_error"] < 1e-6)
    return report


def cmd_three_qubit(args):
    cfg = _load_trap(args).with_ions(3)
    J = trap.coupling_matrix(cfg, kappa=args.kappa).values
    try:
        sol = three_qubit.solve_transcendental(J)
    except three_qubit.NoRootError as exc:
        return RunReport("three-qubit", {"config": trap.format_config(cfg)},
                         metrics={"best_residual": exc.best_residual}, passed=False)
    oracle = three_qubit.oracle_report(sol, J)
    report = RunReport("three-qubit", {"config": trap.format_config(cfg), "kappa": args.kappa},
                       outputs={"solution": sol.to_dict(), "A1_over_pi": sol.A1 / np.pi,
                                "A2_over_pi": sol.A2 / np.pi},
                       metrics={"residual": sol.residual, "total_time": sol.total_time,
                                "consecutive_total": schedule.total_time_consecutive(3, J),
                                "oracle": oracle})
    report.passed = bool(sol.residual < three_qubit.ROOT_TOL
                         and oracle["all"]["bit_reversed"] < 1e-8)
    return report


# -- presentation --------------------------------------------------------------

def _fmt_matrix(M, scale=1.0):
    return "\n".join("  " + " ".join(f"{v * scale:12.4f}" for v in row) for row in np.asarray(M))


def render(report: RunReport) -> str:
    m, o = report.metrics, report.outputs
    lines = [f"[{report.command}]"]
    if report.command == "verify":
        lines.append(f"distance to DFT         {m['distance']:.3e}")
        lines.append(f"after bit reversal      {m['distance_bit_reversed']:.3e}")
    elif report.command == "trap":
        lines.append("J (rad/s), kappa = 1:\n" + _fmt_matrix(o["J_kappa1"]))
        lines.append(f"J (rad/s), kappa = {report.inputs['kappa']:.6g}:\n" + _fmt_matrix(o["J"]))
        for (k, l), t in o["gate_durations"].items():
            lines.append(f"pair ({k},{l}) wait {t * 1e3:9.4f} ms")
        lines.append(f"consecutive total       {m['consecutive_total'] * 1e3:.4f} ms")
        lines.append(f"parallel total          {m['parallel_total'] * 1e3:.4f} ms")
        if "T1" in m:
            lines.append(f"T1, T2                  {m['T1'] * 1e3:.4f} ms, {m['T2'] * 1e3:.4f} ms")
        if "sweep" in o:
            lines.append("   N  consecutive(ms)  parallel(ms)   ratio")
            for r in o["sweep"]:
                lines.append(f"{r['n']:4d} {r['consecutive'] * 1e3:16.4f} {r['parallel'] * 1e3:13.4f}"
                             f" {r['ratio']:7.3f}")
            lines.append(f"T_cons ~ c N^2: c = {m['sweep_c'] * 1e3:.4f} ms, R^2 = {m['sweep_r2']:.4f}")
    elif report.command == "schedule":
        lines.append(f"entries {len(o['schedule']['entries'])}, windows {m['n_windows']}")
        lines.append(f"total time              {m['total_time'] * 1e3:.4f} ms")
        if "distance_bit_reversed" in m:
            lines.append(f"distance to DFT (bit reversed) {m['distance_bit_reversed']:.3e}")
    elif report.command == "ms-sim":
        lines.append(f"fidelity (min over Fock) {m['min_fidelity']:.12f}")
        lines.append(f"purity deficit           {m['purity_deficit']:.3e}")
        lines.append(f"pair phase rel. error    {m['pair_phase_rel_error']:.3e}")
        lines.append(f"global phase error       {m['global_phase_error']:.3e}")
    elif report.command == "three-qubit":
        if "solution" in o:
            s = o["solution"]
            lines.append(f"T1 {s['T1'] * 1e3:.4f} ms  T2 {s['T2'] * 1e3:.4f} ms  T3 {s['T3'] * 1e3:.4f} ms")
            lines.append(f"A1 {o['A1_over_pi']:.4f} pi  A2 {o['A2_over_pi']:.4f} pi  "
                         f"residual {m['residual']:.1e}")
            lines.append(f"total {m['total_time'] * 1e3:.4f} ms "
                         f"(consecutive {m['consecutive_total'] * 1e3:.4f} ms)")
            for reading, d in m["oracle"].items():
                lines.append(f"oracle, pairs {reading:6s} bit reversed {d['bit_reversed']:.3e}")
        else:
            lines.append(f"no root; best residual {m['best_residual']:.3e}")
    if report.passed is not None:
        lines.append("PASS" if report.passed else "FAIL")
    return "\n".join(lines)


# -- parser --------------------------------------------------------------------

def _add_trap_args(p):
    p.add_argument("--config", help="trap config file (default: bundled 171Yb+ example)")
    p.add_argument("--ions", type=int, help="override n_ions from the config")
    p.add_argument("--kappa", type=float, default=trap.KAPPA, help="coupling convention constant")


def build_parser():
    parser = argparse.ArgumentParser(prog="isingqft", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="emit a QFT circuit as JSON")
    p.add_argument("--qubits", "-n", type=int, required=True)
    p.add_argument("--mode", choices=("ct", "consecutive", "parallel"), default="ct")
    p.add_argument("--swaps", action="store_true", help="append bit-reversal swaps")
    p.add_argument("--alpha", type=float, default=1.0, help="coupling scale for --mode parallel")
    p.add_argument("--out", help="also write the circuit to this file")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("verify", help="compare a circuit with the DFT")
    p.add_argument("circuit", nargs="?", default="-", help="circuit JSON file, '-' for stdin")
    p.add_argument("--tol", type=float, default=ORACLE_TOL)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("trap", help="couplings and gate times for an ion chain")
    _add_trap_args(p)
    p.add_argument("--sweep", type=int, metavar="NMAX", help="tabulate totals for N = 2..NMAX")
    p.add_argument("--schedule-out", help="write the consecutive pulse schedule here")
    p.add_argument("--rabi", type=float, help="microwave Rabi frequency (rad/s) for the schedule")
    p.set_defaults(func=cmd_trap)

    p = sub.add_parser("schedule", help="consecutive pulse schedule and its qutrit simulation")
    _add_trap_args(p)
    p.add_argument("--rabi", type=float)
    p.add_argument("--phased", action="store_true", help="phase the last pi pulse of (un)coupling by pi")
    p.add_argument("--out", help="write the schedule JSON here")
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("ms-sim", help="bichromatic gate: numeric vs closed form")
    p.add_argument("--ions", type=int, default=2)
    p.add_argument("--delta", type=float, default=1.0, help="detuning (rad/s)")
    p.add_argument("--g-ratio", type=float, default=0.05, help="g/delta for a uniform drive")
    p.add_argument("--n-max", type=int, default=25)
    p.add_argument("--step", type=int, help="drive the tailored coupling of this parallel step")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--loops", type=int, help="loops for --step (default: fewest allowed)")
    p.set_defaults(func=cmd_ms_sim)

    p = sub.add_parser("three-qubit", help="solve and check the rearranged 3-qubit sequence")
    _add_trap_args(p)
    p.set_defaults(func=cmd_three_qubit)

    for p in sub.choices.values():
        p.add_argument("--json", action="store_true", help="print the raw JSON report")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    try:
        report = args.func(args)
    except UsageError as exc:
        print(f"isingqft {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if report is None:
        return EXIT_PASS
    print(report.to_json() if args.json else render(report))
    return EXIT_FAIL if report.passed is False else EXIT_PASS


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
