"""Builtin example scenarios with fully determined inputs and text reports.

Every scenario fixes all of its numbers — domain, resolution, tolerances,
random seed where randomness is part of the point — so a report is a pure
function of the package code.  Floats are printed with 17 significant
digits and no line carries wall-clock or path information, which keeps
repeated runs byte-identical and lets each report serve as a golden file.

The corpus covers the worked examples this package is built around:
minimal graph surfaces (plane, Scherk patch), the symmetric-slope
constrained family where the admissible solutions are the planes
z = a(x+y) + b, phase-space consistency of the area Lagrangians with
their momentum-side description, and the classical n=1 sanity systems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constraints import (
    first_axis_drift_constraint,
    nonholonomic_check,
    nonholonomic_check_curve,
    symmetric_slope_constraint,
)
from .fields import (
    CallableBivectorLagrangian,
    lagrangian_phase_residual,
    hamiltonian_phase_residual,
    morse_family_H,
    nambu_goto,
    plateau_lagrangian,
    quadratic_curve_lagrangian,
)
from .formats import format_float as _f
from .geometry import Bivector, Metric, MomentumBivector, pair_count
from .plateau import GraphGrid, SolveOptions, solve_constrained_plateau, solve_plateau
from .tulczyjew import PhaseElement2, alpha2, beta2, cotangent_flip2
from .variational import CurveGrid, delta_L_curve

__all__ = ["ScenarioOutcome", "run_scenario", "scenario_names"]


@dataclass(frozen=True)
class ScenarioOutcome:
    report: str
    passed: bool
    grid: object = None


_REGISTRY = {}


def _scenario(name: str, command: str):
    def register(fn):
        _REGISTRY[name] = (command, fn)
        return fn

    return register


def scenario_names(command: str | None = None) -> list:
    return sorted(n for n, (c, _) in _REGISTRY.items() if command is None or c == command)


def run_scenario(name: str) -> ScenarioOutcome:
    if name not in _REGISTRY:
        raise KeyError(name)
    command, fn = _REGISTRY[name]
    lines = ["wedgemech report", f"command: {command}", f"scenario: {name}"]
    passed, grid = fn(lines)
    lines.append(f"result: {'PASS' if passed else 'FAIL'}")
    return ScenarioOutcome(report="\n".join(lines) + "\n", passed=passed, grid=grid)


def _yes_no(flag: bool) -> str:
    return "yes" if flag else "no"


def _render_solve(lines, result, opts):
    lines.append(f"tol: {_f(opts.tol)}")
    lines.append(f"max-iter: {opts.max_iter}")
    lines.append(f"initial-residual: {_f(result.trace[0])}")
    for k in range(result.iterations):
        lines.append(
            f"iteration: {k + 1} residual {_f(result.trace[k + 1])} damping {_f(result.steps[k])}"
        )
    lines.append(f"converged: {_yes_no(result.converged)}")
    lines.append(f"final-residual: {_f(result.final_residual)}")


def _render_check(lines, report):
    lines.append(f"constraint-tol: {_f(report.constraint_tol)}")
    lines.append(f"force-tol: {_f(report.force_tol)}")
    lines.append(f"constraint-max: {_f(report.constraint_max)}")
    lines.append("constraint-worst-node: " + " ".join(str(i) for i in report.constraint_worst))
    lines.append(f"dalembert-max: {_f(report.dalembert_max)}")
    lines.append("dalembert-worst-node: " + " ".join(str(i) for i in report.dalembert_worst))
    for k, (lo, hi) in enumerate(report.multiplier_stats(), start=1):
        lines.append(f"multiplier-range: {k} {_f(lo)} {_f(hi)}")
    lines.append(f"constraint-passed: {_yes_no(report.constraint_passed)}")
    lines.append(f"dalembert-passed: {_yes_no(report.dalembert_passed)}")


def _plane_height(X, Y):
    return 2.0 * X - 0.5 * Y + 1.0


def _scherk_height(X, Y):
    return np.log(np.cos(Y) / np.cos(X))


def _diagonal_plane_height(X, Y):
    return 2.0 * (X + Y) - 1.0


def _diagonal_quadratic_height(X, Y):
    return (X + Y) ** 2


@_scenario("plane", "plateau-solve")
def _run_plane(lines):
    opts = SolveOptions(tol=1e-10, max_iter=25)
    grid = GraphGrid.from_boundary((0.0, 1.0, 0.0, 1.0), 33, 33, _plane_height)
    result = solve_plateau(grid, opts)
    lines.append("kind: plateau")
    lines.append("surface: z = 2x - y/2 + 1 on [0,1]x[0,1]")
    lines.append("shape: 33 33")
    _render_solve(lines, result, opts)
    exact = GraphGrid.sample((0.0, 1.0, 0.0, 1.0), 33, 33, _plane_height)
    err = float(np.abs(result.grid.z - exact.z).max())
    lines.append(f"interior-max-error: {_f(err)}")
    return result.converged and err < 1e-10, result.grid


@_scenario("scherk-65", "plateau-solve")
def _run_scherk(lines):
    opts = SolveOptions(tol=1e-10, max_iter=25)
    grid = GraphGrid.from_boundary((-0.7, 0.7, -0.7, 0.7), 65, 65, _scherk_height)
    result = solve_plateau(grid, opts)
    lines.append("kind: plateau")
    lines.append("surface: z = log(cos y / cos x) boundary on [-0.7,0.7]^2")
    lines.append("shape: 65 65")
    _render_solve(lines, result, opts)
    exact = GraphGrid.sample((-0.7, 0.7, -0.7, 0.7), 65, 65, _scherk_height)
    err = float(np.abs(result.grid.z - exact.z)[1:-1, 1:-1].max())
    lines.append(f"interior-max-error: {_f(err)}")
    return result.converged and result.final_residual <= 1e-8 and err < 1e-3, result.grid


def _run_constrained(lines, height, label):
    grid = GraphGrid.from_boundary((0.0, 1.0, 0.0, 1.0), 33, 33, height)
    result = solve_constrained_plateau(grid, fit_tol=1e-8, constraint_tol=1e-6, force_tol=1e-6)
    lines.append("kind: constrained-plateau")
    lines.append(f"boundary: {label}")
    lines.append("shape: 33 33")
    lines.append(f"fit-tol: {_f(result.fit_tol)}")
    lines.append(f"plane-a: {_f(result.a)}")
    lines.append(f"plane-b: {_f(result.b)}")
    lines.append(f"fit-residual: {_f(result.fit_residual)}")
    lines.append(f"feasible: {_yes_no(result.feasible)}")
    if not result.feasible:
        lines.append("note: boundary data leaves the z = a(x+y) + b family; no surface")
        return False, None
    _render_check(lines, result.check)
    return result.passed, result.plane


@_scenario("constrained-plane", "plateau-solve")
def _run_constrained_plane(lines):
    return _run_constrained(lines, _diagonal_plane_height, "z = 2(x+y) - 1 on [0,1]^2")


@_scenario("constrained-quadratic", "plateau-solve")
def _run_constrained_quadratic(lines):
    return _run_constrained(lines, _diagonal_quadratic_height, "z = (x+y)^2 on [0,1]^2")


def _example7_scenario(lines, height, label, domain, constraint_tol, force_tol):
    xs = np.linspace(domain[0], domain[1], 65)
    ys = np.linspace(domain[2], domain[3], 65)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    from .variational import SurfaceGrid

    grid = SurfaceGrid.from_graph(xs, ys, height(X, Y))
    report = nonholonomic_check(
        plateau_lagrangian(), grid, symmetric_slope_constraint(), constraint_tol, force_tol
    )
    lines.append("constraint: example7 (section e1^e2, generator (e1-e2)^e3)")
    lines.append(f"surface: {label}")
    lines.append("shape: 65 65")
    _render_check(lines, report)
    return report.passed, None


@_scenario("example7-plane", "nonholonomic-check")
def _run_example7_plane(lines):
    return _example7_scenario(
        lines, lambda X, Y: X + Y + 1.0, "z = x + y + 1 on [0,1]^2",
        (0.0, 1.0, 0.0, 1.0), 1e-6, 1e-6,
    )


@_scenario("example7-quadratic", "nonholonomic-check")
def _run_example7_quadratic(lines):
    return _example7_scenario(
        lines, _diagonal_quadratic_height, "z = (x+y)^2 on [0,1]^2",
        (0.0, 1.0, 0.0, 1.0), 1e-6, 5e-3,
    )


@_scenario("example7-scherk", "nonholonomic-check")
def _run_example7_scherk(lines):
    return _example7_scenario(
        lines, _scherk_height, "z = log(cos y / cos x) on [-0.7,0.7]^2",
        (-0.7, 0.7, -0.7, 0.7), 1e-6, 5e-3,
    )


def _alpha2_gap(L, element):
    """Max difference between the direct residual and the alpha2 route."""
    direct = lagrangian_phase_residual(L, element)
    cov = alpha2(element)
    force = cov.a - L.gradient_x(element.x, element.xdot)
    momentum = cov.c - L.momentum(element.x, element.xdot)
    return max(
        float(np.abs(direct.force - force).max()),
        float(np.abs((direct.momentum - momentum).slots).max()),
    )


@_scenario("nambu-goto-euclid", "phase-check")
def _run_nambu_goto_euclid(lines):
    g = Metric.euclidean(3)
    L = nambu_goto(g)
    x = np.array([0.1, -0.2, 0.3])
    w = Bivector([1.0, 0.25, -0.5], 3)
    p = L.momentum(x, w)
    element = PhaseElement2(x, p, w, np.zeros((3, 3)), np.zeros((3, 3)))
    lines.append("metric: euclidean 3")
    lines.append("lagrangian: nambu-goto")
    lines.append("x: " + " ".join(_f(v) for v in x))
    lines.append("w-slots: " + " ".join(_f(v) for v in w.slots))
    lines.append("p-slots: " + " ".join(_f(v) for v in p.slots))
    value = L.value(x, w)
    lines.append(f"area-density: {_f(value)}")
    lag = lagrangian_phase_residual(L, element)
    lines.append(f"lagrangian-force-max: {_f(np.abs(lag.force).max())}")
    lines.append(f"lagrangian-momentum-max: {_f(np.abs(lag.momentum.slots).max())}")
    family = morse_family_H(g)
    sphere = abs(family.d_r(p))
    lines.append(f"morse-sphere-defect: {_f(sphere)}")
    ham_force, ham_velocity = hamiltonian_phase_residual(family.at_r(value), element)
    lines.append(f"hamiltonian-force-max: {_f(np.abs(ham_force).max())}")
    lines.append(f"hamiltonian-velocity-max: {_f(np.abs(ham_velocity.slots).max())}")
    gap = _alpha2_gap(L, element)
    lines.append(f"alpha2-cross-gap: {_f(gap)}")
    lines.append("tol: 1e-10")
    defects = [lag.max_norm, sphere, float(np.abs(ham_force).max()),
               float(np.abs(ham_velocity.slots).max()), gap]
    return max(defects) <= 1e-10, None


@_scenario("zero-field", "phase-check")
def _run_zero_field(lines):
    L = CallableBivectorLagrangian(3, lambda x, w: 0.0)
    element = PhaseElement2.zero(3)
    lines.append("lagrangian: identically zero")
    lines.append("element: zero phase element, dimension 3")
    residual = lagrangian_phase_residual(L, element)
    lines.append(f"lagrangian-force-max: {_f(np.abs(residual.force).max())}")
    lines.append(f"lagrangian-momentum-max: {_f(np.abs(residual.momentum.slots).max())}")
    gap = _alpha2_gap(L, element)
    lines.append(f"alpha2-cross-gap: {_f(gap)}")
    lines.append("tol: 1e-12")
    return residual.max_norm <= 1e-12 and gap <= 1e-12, None


@_scenario("phase-cross-check", "phase-check")
def _run_phase_cross_check(lines):
    rng = np.random.default_rng(20260814)
    dim, k = 3, pair_count(3)
    L = plateau_lagrangian(dim)
    x = rng.standard_normal(dim)
    element = PhaseElement2(
        x,
        MomentumBivector(rng.standard_normal(k), dim),
        Bivector(rng.standard_normal(k), dim),
        rng.standard_normal((dim, k)),
        (lambda a: a - a.T)(rng.standard_normal((k, k))),
    )
    lines.append("lagrangian: plateau")
    lines.append("element: seeded random phase element, dimension 3")
    residual = lagrangian_phase_residual(L, element)
    lines.append(f"lagrangian-force-max: {_f(np.abs(residual.force).max())}")
    lines.append(f"lagrangian-momentum-max: {_f(np.abs(residual.momentum.slots).max())}")
    gap = _alpha2_gap(L, element)
    lines.append(f"alpha2-cross-gap: {_f(gap)}")
    flipped = cotangent_flip2(beta2(element))
    direct = alpha2(element)
    flip_gap = max(
        float(np.abs(direct.a - flipped.a).max()),
        float(np.abs((direct.c - flipped.c).slots).max()),
        float(np.abs((direct.xdot - flipped.xdot).slots).max()),
    )
    lines.append(f"alpha-beta-flip-gap: {_f(flip_gap)}")
    lines.append("tol: 1e-14")
    return gap <= 1e-14 and flip_gap <= 1e-14, None


@_scenario("free-line", "classical-el")
def _run_free_line(lines):
    grid = CurveGrid.sample(lambda t: (0.2 + t, -0.4 + 0.5 * t), 0.0, 1.0, 101)
    L = quadratic_curve_lagrangian(2)
    residual = delta_L_curve(L, grid)
    lines.append("system: free particle, dimension 2")
    lines.append("curve: (0.2 + t, -0.4 + t/2) on [0,1], 101 nodes")
    worst = residual.max_norm()
    lines.append(f"residual-max: {_f(worst)}")
    lines.append("tol: 1e-12")
    return worst <= 1e-12, None


@_scenario("oscillator-cos", "classical-el")
def _run_oscillator(lines):
    grid = CurveGrid.sample(lambda t: (np.cos(t),), 0.0, 2.0 * np.pi, 1001)
    L = quadratic_curve_lagrangian(1, omega=1.0)
    residual = delta_L_curve(L, grid)
    lines.append("system: harmonic oscillator, omega 1, dimension 1")
    lines.append("curve: cos t on [0,2pi], 1001 nodes")
    worst = residual.max_norm()
    lines.append(f"residual-max: {_f(worst)}")
    lines.append("tol: 0.001")
    return worst <= 1e-3, None


def _constrained_line_scenario(lines, fn, label):
    grid = CurveGrid.sample(fn, 0.0, 1.0, 101)
    report = nonholonomic_check_curve(
        quadratic_curve_lagrangian(2), grid, first_axis_drift_constraint(), 1e-10, 1e-10
    )
    lines.append("system: free particle, dimension 2")
    lines.append("constraint: first-axis drift (section e1, generator e1)")
    lines.append(f"curve: {label}, 101 nodes")
    _render_check(lines, report)
    return report.passed, None


@_scenario("constrained-line", "classical-el")
def _run_constrained_line(lines):
    return _constrained_line_scenario(lines, lambda t: (t, 0.7), "(t, 0.7) on [0,1]")


@_scenario("constrained-line-violating", "classical-el")
def _run_constrained_line_violating(lines):
    return _constrained_line_scenario(lines, lambda t: (t, t), "(t, t) on [0,1]")
