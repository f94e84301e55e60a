"""Command-line front end.

Commands::

    spinhardy dims        SCENARIO [--mode hardy|legacy|cabello]
    spinhardy certify     SCENARIO [--mode hardy|legacy|cabello]
    spinhardy scan        SCENARIO --vary a_prime.theta=0:pi:pi/200 [--refine]
    spinhardy minimal-set SCENARIO [--mode legacy|hardy]
    spinhardy sample      SCENARIO [--shots N]

Exit codes: 0 success / certified, 2 input error, 3 dimension mismatch,
4 no solution or no contradiction, 5 resource limit.
"""
from __future__ import annotations

import argparse
import ast
import csv
import io
import itertools
import json
import math
import operator
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .cxmat import DEFAULT_TOL
from .errors import (
    NoCabelloGap,
    NoContradiction,
    NoHardyState,
    PreconditionError,
    ResourceLimit,
    SpinHardyError,
)
from .lhv import certify, minimal_zero_subset
from .scenario import (
    Scenario,
    cabello_constraints,
    constraints_for,
    expected_dims,
    scenario_from_dict,
    scenario_to_dict,
    target_event,
    target_vector,
    zero_events,
)
from .solver import hardy_subspace, sample_outcomes, solve_scenario
from .spin import Direction, format_label, format_spin

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DIMS = 3
EXIT_NO_SOLUTION = 4
EXIT_RESOURCE = 5

MODE_ALIASES = {"hardy": "hardy", "relaxed": "hardy", "legacy": "legacy", "cabello": "cabello"}
FAMILY = {"hardy": "relaxed", "legacy": "legacy", "cabello": "cabello"}


class InputError(SpinHardyError):
    pass


def fmt_real(x: float) -> float:
    """Round to 15 significant digits so reports diff cleanly across platforms."""
    x = float(x)
    if not math.isfinite(x):
        return x
    return float(f"{x:.15g}")


# --- reports ------------------------------------------------------------

@dataclass
class RunReport:
    scenario: dict
    mode: str
    dims: dict
    solution: dict | None = None
    certificate: dict | None = None
    expected: dict | None = None
    version: str = __version__
    timing: float | None = None

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"version": self.version, "scenario": self.scenario, "mode": self.mode,
                               "dims": {k: int(self.dims[k]) for k in ("M", "M_bar", "M_bar_prime")}}
        if self.expected is not None:
            out["expected"] = {k: int(self.expected[k]) for k in ("M", "M_bar", "M_bar_prime")}
        if self.solution is not None:
            out["solution"] = {k: fmt_real(self.solution[k]) for k in ("p", "q", "residual")}
        if self.certificate is not None:
            c = self.certificate
            out["certificate"] = {
                "quantum": fmt_real(c["quantum"]),
                "lhv_bound": fmt_real(c["lhv_bound"]),
                "gap": fmt_real(c["gap"]),
                "certified": bool(c["certified"]),
                "strategies_total": int(c["strategies_total"]),
                "strategies_surviving": int(c["strategies_surviving"]),
            }
        if self.timing is not None:
            out["timing"] = fmt_real(self.timing)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RunReport":
        return cls(scenario=data["scenario"], mode=data["mode"], dims=dict(data["dims"]),
                   solution=data.get("solution"), certificate=data.get("certificate"),
                   expected=data.get("expected"), version=data.get("version", __version__),
                   timing=data.get("timing"))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# --- scenario loading ---------------------------------------------------

def load_scenario(path: str, seed: int) -> Scenario:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: cannot read scenario: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    try:
        return scenario_from_dict(data, seed=seed)
    except PreconditionError as exc:
        raise InputError(f"{path}:1: {exc}") from None


def _closed_form_text(sc: Scenario, mode: str) -> str:
    s = format_spin(sc.two_s)
    if mode == "legacy":
        return f"2s = {sc.two_s}"
    if mode == "cabello":
        return f"4s^2+1 = {sc.two_s ** 2 + 1}"
    if sc.n == 2:
        return f"4s^2 = {sc.two_s ** 2}"
    exp = expected_dims(sc.n, sc.two_s, "relaxed")["M_bar"]
    return f"(2s+1)^n - (2ns+1) = {exp} at s={s}, n={sc.n}"


def _dims_only(sc: Scenario, mode: str, tol: float):
    if mode == "cabello":
        cs, _, target = cabello_constraints(sc)
    elif mode == "legacy":
        cs, target = constraints_for(sc, "legacy"), target_vector(sc.with_legacy_selectors())
    else:
        cs, target = constraints_for(sc, "relaxed"), target_vector(sc)
    return hardy_subspace(cs, sc.dim, target, tol)


# --- commands -----------------------------------------------------------

def cmd_dims(args) -> int:
    sc = load_scenario(args.scenario, args.seed)
    mode = args.mode
    rep = _dims_only(sc, mode, args.tol)
    exp = expected_dims(sc.n, sc.two_s, FAMILY[mode])
    dims = rep.dims()
    print(f"n = {sc.n}, s = {format_spin(sc.two_s)}, mode = {mode}, ambient dimension = {sc.dim}")
    print(f"dim_M = {dims['M']} (expected {exp['M']})")
    print(f"dim_M_bar = {dims['M_bar']} (expected {_closed_form_text(sc, mode)})")
    print(f"dim_M_bar_prime = {dims['M_bar_prime']} (expected {exp['M_bar_prime']})")
    if args.out:
        report = RunReport(scenario_to_dict(sc), mode, dims, expected=exp)
        _emit(report.to_json(), args.out)
    if dims != exp:
        print("dimension mismatch: directions are degenerate for this constraint family", file=sys.stderr)
        return EXIT_DIMS
    return EXIT_OK


def run_certify(sc: Scenario, mode: str, tol: float = DEFAULT_TOL) -> RunReport:
    """Full pipeline for one scenario; raises NoHardyState / NoCabelloGap."""
    rep, sol = solve_scenario(sc, mode, tol)
    cert = certify(sc, mode, sol, rep.dims())
    return RunReport(
        scenario_to_dict(sc if mode != "legacy" else sc.with_legacy_selectors()),
        mode,
        rep.dims(),
        solution={"p": sol.p, "q": sol.q, "residual": sol.max_zero_residual},
        certificate={"quantum": cert.quantum_value, "lhv_bound": cert.lhv_bound, "gap": cert.gap,
                     "certified": cert.certified, "strategies_total": cert.strategies_total,
                     "strategies_surviving": cert.strategies_surviving},
    )


def cmd_certify(args) -> int:
    sc = load_scenario(args.scenario, args.seed)
    t0 = time.perf_counter()
    report = run_certify(sc, args.mode, args.tol)
    if args.timing:
        report.timing = time.perf_counter() - t0
    _emit(report.to_json(), args.out)
    c = report.certificate
    status = "certified nonlocal" if c["certified"] else "NOT certified"
    print(f"{status}: quantum = {c['quantum']:.12g}, lhv_bound = {c['lhv_bound']:.12g}, "
          f"gap = {c['gap']:.12g}", file=sys.stderr)
    return EXIT_OK if c["certified"] else EXIT_NO_SOLUTION


# --- scan ---------------------------------------------------------------

_BINOPS: dict[type, Callable[[float, float], float]] = {
    ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv,
}


def parse_number(expr: str) -> float:
    """Evaluate a small arithmetic expression over numbers and ``pi``."""
    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        raise ValueError(expr)

    try:
        return ev(ast.parse(expr.strip(), mode="eval"))
    except (SyntaxError, ValueError, ZeroDivisionError):
        raise InputError(f"cannot parse number {expr!r}") from None


@dataclass(frozen=True)
class GridAxis:
    name: str
    party: int | None  # None = every party
    setting: int  # 0 unprimed, 1 primed
    angle: str  # "theta" or "phi"
    start: float
    stop: float
    step: float

    def points(self) -> list[float]:
        if not (self.step > 0) or self.stop < self.start:
            return []
        count = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return [self.start + k * self.step for k in range(count)]


def parse_axis(text: str) -> GridAxis:
    """``[party.]setting.angle=start:stop:step`` with setting a|a_prime, angle theta|phi."""
    try:
        name, rng = text.split("=", 1)
        start, stop, step = rng.split(":")
    except ValueError:
        raise InputError(f"grid axis {text!r} must look like a_prime.theta=0:pi:pi/200") from None
    parts = name.strip().split(".")
    party = None
    if len(parts) == 3:
        try:
            party = int(parts[0])
        except ValueError:
            raise InputError(f"grid axis {text!r}: party must be an integer") from None
        parts = parts[1:]
    if len(parts) != 2 or parts[0] not in ("a", "a_prime") or parts[1] not in ("theta", "phi"):
        raise InputError(f"grid axis {text!r}: name must be [party.](a|a_prime).(theta|phi)")
    return GridAxis(name.strip(), party, int(parts[0] == "a_prime"), parts[1],
                    parse_number(start), parse_number(stop), parse_number(step))


def apply_axes(sc: Scenario, axes: list[GridAxis], values) -> Scenario:
    dirs = [list(pair) for pair in sc.directions]
    for ax, val in zip(axes, values):
        parties = range(sc.n) if ax.party is None else [ax.party]
        for k in parties:
            if not 0 <= k < sc.n:
                raise InputError(f"grid axis {ax.name!r}: no party {k}")
            theta, phi = dirs[k][ax.setting].angles()
            if ax.angle == "theta":
                theta = val
            else:
                phi = val
            dirs[k][ax.setting] = Direction.from_angles(theta, phi)
    return replace(sc, directions=tuple(tuple(p) for p in dirs))


def evaluate_point(sc: Scenario, mode: str, tol: float) -> dict:
    """dims, p, q and certification for one scenario; p = q = 0 when no solution exists."""
    try:
        report = run_certify(sc, mode, tol)
    except (NoHardyState, NoCabelloGap):
        rep = _dims_only(sc, mode, tol)
        return {"dims": rep.dims(), "p": 0.0, "q": 0.0, "certified": False}
    return {"dims": report.dims, "p": report.solution["p"], "q": report.solution["q"],
            "certified": report.certificate["certified"]}


def _score(point: dict, mode: str) -> float:
    return point["p"] - point["q"] if mode == "cabello" else point["p"]


def golden_max(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10) -> float:
    """Golden-section search for the maximizer of a unimodal ``f`` on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def run_scan(sc: Scenario, axes: list[GridAxis], mode: str, tol: float = DEFAULT_TOL,
             refine: bool = False, passes: int = 3) -> list[dict]:
    grids = [ax.points() for ax in axes]
    if not axes or any(not g for g in grids):
        raise InputError("scan grid is empty")
    rows = []
    for values in itertools.product(*grids):
        point = evaluate_point(apply_axes(sc, axes, values), mode, tol)
        rows.append({"values": list(values), "refined": False, **point})
    if refine:
        best = max(rows, key=lambda r: _score(r, mode))  # first maximum in grid order
        x = list(best["values"])
        for _ in range(passes if len(axes) > 1 else 1):
            for i, ax in enumerate(axes):
                lo = max(ax.start, x[i] - ax.step)
                hi = min(ax.stop, x[i] + ax.step)

                def f(v, i=i):
                    trial = x[:i] + [v] + x[i + 1:]
                    return _score(evaluate_point(apply_axes(sc, axes, trial), mode, tol), mode)

                x[i] = golden_max(f, lo, hi)
        point = evaluate_point(apply_axes(sc, axes, x), mode, tol)
        rows.append({"values": x, "refined": True, **point})
    return rows


def scan_csv(axes: list[GridAxis], rows: list[dict], mode: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    head = [ax.name for ax in axes] + ["M", "M_bar", "M_bar_prime", "p"]
    if mode == "cabello":
        head.append("q")
    w.writerow(head + ["certified", "refined"])
    for r in rows:
        line = [repr(fmt_real(v)) for v in r["values"]]
        line += [r["dims"]["M"], r["dims"]["M_bar"], r["dims"]["M_bar_prime"], repr(fmt_real(r["p"]))]
        if mode == "cabello":
            line.append(repr(fmt_real(r["q"])))
        line += [int(r["certified"]), int(r["refined"])]
        w.writerow(line)
    return buf.getvalue()


def cmd_scan(args) -> int:
    sc = load_scenario(args.scenario, args.seed)
    axes = [parse_axis(v) for v in args.vary or []]
    rows = run_scan(sc, axes, args.mode, args.tol, args.refine)
    _emit(scan_csv(axes, rows, args.mode), args.out)
    best = max(rows, key=lambda r: _score(r, args.mode))
    print(f"best {'p - q' if args.mode == 'cabello' else 'p'} = {_score(best, args.mode):.12g} at "
          + ", ".join(f"{ax.name}={v:.12g}" for ax, v in zip(axes, best["values"])), file=sys.stderr)
    return EXIT_OK


# --- minimal set ----------------------------------------------------------

def run_minimal_set(sc: Scenario, mode: str) -> dict:
    if mode == "cabello":
        raise InputError("minimal-set supports --mode legacy or hardy")
    zsc = sc.with_legacy_selectors() if mode == "legacy" else sc
    events = zero_events(zsc, FAMILY[mode])
    target = target_event(zsc)
    subset, exact = minimal_zero_subset(sc.n, sc.two_s, events, target)
    return {
        "version": __version__,
        "scenario": scenario_to_dict(zsc),
        "mode": mode,
        "zero_events": [{"index": i, "tag": e.tag, "event": e.describe()} for i, e in enumerate(events)],
        "target": target.describe(),
        "subset": list(subset),
        "subset_tags": [events[i].tag for i in subset],
        "exact": exact,
    }


def cmd_minimal_set(args) -> int:
    sc = load_scenario(args.scenario, args.seed)
    result = run_minimal_set(sc, args.mode)
    keep = set(result["subset"])
    print(f"target {result['target']}: {len(keep)} of {len(result['zero_events'])} zero events suffice"
          + ("" if result["exact"] else " (greedy, may not be minimum)"))
    for e in result["zero_events"]:
        mark = "needed " if e["index"] in keep else "unused "
        print(f"  {mark} [{e['index']}] {e['tag']:<16} {e['event']} = 0")
    if args.out:
        _emit(json.dumps(result, indent=2) + "\n", args.out)
    return EXIT_OK


# --- sampling -------------------------------------------------------------

def _settings_label(settings) -> str:
    return " ".join(f"a{k + 1}{chr(39) if p else ''}" for k, p in enumerate(settings))


def run_sample(sc: Scenario, mode: str, shots: int, seed: int, tol: float = DEFAULT_TOL) -> dict:
    rep, sol = solve_scenario(sc, mode, tol)
    rng = np.random.default_rng(seed)
    tables = []
    for settings in itertools.product((False, True), repeat=sc.n):
        counts = sample_outcomes(sol.state, sc.bases(settings), shots, rng)
        tables.append({
            "settings": _settings_label(settings),
            "primed": list(settings),
            "counts": {",".join(format_label(m) for m in t): c for t, c in counts.items()},
        })
    return {"version": __version__, "scenario": scenario_to_dict(sc), "mode": mode, "shots": shots,
            "seed": seed, "p": fmt_real(sol.p), "q": fmt_real(sol.q), "tables": tables}


def cmd_sample(args) -> int:
    sc = load_scenario(args.scenario, args.seed)
    if args.shots < 1:
        raise InputError("--shots must be >= 1")
    result = run_sample(sc, args.mode, args.shots, args.seed, args.tol)
    _emit(json.dumps(result, indent=2) + "\n", args.out)
    return EXIT_OK


# --- entry point ----------------------------------------------------------

def _mode(value: str) -> str:
    try:
        return MODE_ALIASES[value]
    except KeyError:
        raise argparse.ArgumentTypeError(f"mode must be one of {sorted(MODE_ALIASES)}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("scenario", help="scenario JSON file")
    common.add_argument("--seed", type=int, default=42,
                        help="seed for generated directions and sampling (default 42)")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="relative rank tolerance")
    common.add_argument("--mode", type=_mode, default="hardy", help="hardy (relaxed), legacy or cabello")
    common.add_argument("--out", help="write the report to this path instead of stdout")

    parser = argparse.ArgumentParser(prog="spinhardy", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dims", parents=[common], help="constraint rank and solution-space dimensions")
    p.set_defaults(func=cmd_dims)

    p = sub.add_parser("certify", parents=[common], help="extremal state and local-model certificate")
    p.add_argument("--timing", action="store_true", help="include wall time in the report")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("scan", parents=[common], help="sweep direction angles, CSV output")
    p.add_argument("--vary", action="append", metavar="AXIS",
                   help="[party.](a|a_prime).(theta|phi)=start:stop:step; repeat for a product grid")
    p.add_argument("--refine", action="store_true", help="golden-section refinement around the best point")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("minimal-set", parents=[common], help="smallest sufficient set of zero events")
    p.set_defaults(func=cmd_minimal_set)

    p = sub.add_parser("sample", parents=[common], help="sampled outcome counts for every setting combination")
    p.add_argument("--shots", type=int, default=100_000)
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_INPUT
    try:
        return args.func(args)
    except (InputError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NoHardyState, NoCabelloGap, NoContradiction) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    except ResourceLimit as exc:
        print(f"ResourceLimit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
