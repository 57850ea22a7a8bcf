"""Affine velocity constraints and d'Alembert-type force decompositions.

A constraint assigns to each base point an affine subspace ``a(x) + V(x)``
of the velocity fiber, with ``V`` spanned by a list of generators.  Two
independent admissibility questions arise along a sampled solution
candidate:

* membership: the prolonged velocity must lie in the affine subspace,
  i.e. every annihilator one-form of ``V`` must contract to zero against
  ``w - a``;
* the force balance: the Euler-Lagrange defect must lie in the span of
  the annihilator (a constraint force doing no virtual work), i.e. its
  component orthogonal to that span must vanish.

The linear span is subtracted, not the section: membership of ``w`` in
``a + V`` is tested through ``w - a``, and the force decomposition uses
the annihilator of ``V`` alone.

Annihilators are computed by a singular value decomposition of the
stacked contraction matrix.  A singular value kept by the rank cutoff
but within a factor of ten of it makes the kernel dimension
ill-determined, and that is reported as `RankDecisionError` rather than
silently resolved.  Values at or below the cutoff are already
indistinguishable from zero at working precision (an exact kernel's
computed singular value lands there), so no gradation below the cutoff
is meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .geometry import Bivector, antisymmetric_from_slots, contract, wedge
from .variational import CurveGrid, SurfaceGrid, delta_L_curve, delta_L_surface, wedge_prolongation, velocity_prolongation

__all__ = [
    "AffineConstraint1",
    "AffineConstraint2",
    "ConstraintCheckReport",
    "RankDecisionError",
    "annihilator_basis",
    "annihilator_basis_curve",
    "constraint_residual_curve",
    "constraint_residual_surface",
    "dalembert_decompose",
    "first_axis_drift_constraint",
    "nonholonomic_check",
    "nonholonomic_check_curve",
    "symmetric_slope_constraint",
]


class RankDecisionError(RuntimeError):
    """The annihilator dimension is numerically ambiguous."""


def _kernel_rows(mat: np.ndarray, context: str) -> np.ndarray:
    """Orthonormal basis (rows) of the right kernel of ``mat``.

    Rank is decided by the usual cutoff ``max(shape) * eps * sigma_max``;
    singular values kept by the cutoff but within a factor 10 of it
    raise instead of guessing.
    """
    mat = np.asarray(mat, dtype=float)
    _, s, vh = np.linalg.svd(mat, full_matrices=True)
    if s.size == 0 or s[0] == 0.0:
        return vh  # zero map: everything annihilates
    cutoff = max(mat.shape) * np.finfo(float).eps * s[0]
    ambiguous = s[(s > cutoff) & (s < cutoff * 10.0)]
    if ambiguous.size:
        raise RankDecisionError(
            f"{context}: singular value {ambiguous[0]:.3e} sits within a factor 10 "
            f"of the rank cutoff {cutoff:.3e}; refine the generators or rescale"
        )
    rank = int(np.sum(s > cutoff))
    return vh[rank:]


def annihilator_basis(generators: Sequence[Bivector], dim: int | None = None) -> np.ndarray:
    """Orthonormal one-forms (rows) annihilating every generator bivector.

    ``eta`` annihilates ``u`` when ``contract(eta, u) = 0``.  With no
    generators the annihilator is the whole dual space, so ``dim`` must be
    supplied in that case.
    """
    generators = list(generators)
    if not generators:
        if dim is None:
            raise ValueError("dim is required when there are no generators")
        return np.eye(dim)
    dim = generators[0].dim
    if any(u.dim != dim for u in generators):
        raise ValueError("generators have mixed dimensions")
    stacked = np.vstack([u.full.T for u in generators])
    return _kernel_rows(stacked, "bivector annihilator")


def annihilator_basis_curve(generators: Sequence[np.ndarray], dim: int | None = None) -> np.ndarray:
    """Orthonormal one-forms annihilating every generator vector."""
    generators = [np.asarray(u, dtype=float) for u in generators]
    if not generators:
        if dim is None:
            raise ValueError("dim is required when there are no generators")
        return np.eye(dim)
    return _kernel_rows(np.vstack(generators), "vector annihilator")


def _as_field(value, dim: int, kind, name: str) -> Callable:
    """Normalize a constant or a callable of the base point to a callable."""
    if callable(value):
        return value
    if kind is Bivector:
        if not isinstance(value, Bivector) or value.dim != dim:
            raise ValueError(f"{name} must be a Bivector of dimension {dim}")
        return lambda x, _v=value: _v
    arr = np.asarray(value, dtype=float)
    if arr.shape != (dim,):
        raise ValueError(f"{name} must be a vector of length {dim}")
    return lambda x, _v=arr: _v


class AffineConstraint2:
    """Affine constraint ``a(x) + span{u_k(x)}`` on velocity bivectors.

    ``section`` and each generator may be constants or callables of the
    base point.  Generators must stay linearly independent wherever the
    constraint is queried.
    """

    def __init__(self, dim: int, section, generators: Sequence):
        self.dim = int(dim)
        self.constant = not callable(section) and not any(callable(u) for u in generators)
        self._section = _as_field(section, self.dim, Bivector, "section")
        self._generators = [
            _as_field(u, self.dim, Bivector, f"generator {i}") for i, u in enumerate(generators)
        ]

    @property
    def n_generators(self) -> int:
        return len(self._generators)

    def at(self, x) -> tuple[Bivector, list[Bivector]]:
        """Section and generators at a base point, with independence checked."""
        x = np.asarray(x, dtype=float)
        a = self._section(x)
        gens = [u(x) for u in self._generators]
        if gens:
            slots = np.vstack([u.slots for u in gens])
            rank = np.linalg.matrix_rank(slots)
            if rank < len(gens):
                raise ValueError(
                    f"constraint generators are linearly dependent at x = {x.tolist()}"
                )
        return a, gens

    def annihilator_at(self, x) -> np.ndarray:
        _, gens = self.at(x)
        return annihilator_basis(gens, self.dim)


class AffineConstraint1:
    """Affine constraint ``a(x) + span{u_k(x)}`` on velocity vectors."""

    def __init__(self, dim: int, section, generators: Sequence):
        self.dim = int(dim)
        self.constant = not callable(section) and not any(callable(u) for u in generators)
        self._section = _as_field(section, self.dim, np.ndarray, "section")
        self._generators = [
            _as_field(u, self.dim, np.ndarray, f"generator {i}") for i, u in enumerate(generators)
        ]

    @property
    def n_generators(self) -> int:
        return len(self._generators)

    def at(self, x) -> tuple[np.ndarray, list[np.ndarray]]:
        x = np.asarray(x, dtype=float)
        a = self._section(x)
        gens = [np.asarray(u(x), dtype=float) for u in self._generators]
        if gens and np.linalg.matrix_rank(np.vstack(gens)) < len(gens):
            raise ValueError(f"constraint generators are linearly dependent at x = {x.tolist()}")
        return a, gens

    def annihilator_at(self, x) -> np.ndarray:
        _, gens = self.at(x)
        return annihilator_basis_curve(gens, self.dim)


def symmetric_slope_constraint() -> AffineConstraint2:
    """Built-in constraint on graph surfaces in 3-space (file keyword
    ``example7``): section e1 ^ e2 with the single generator
    (e1 - e2) ^ e3.  Its annihilator is spanned by dx^1 + dx^2, so
    membership of a graph prolongation reduces to equality of the two
    slopes z_x = z_y."""
    e = np.eye(3)
    section = Bivector([1.0, 0.0, 0.0], 3)  # e1 ^ e2
    generator = wedge(e[0] - e[1], e[2])
    return AffineConstraint2(3, section, [generator])


def first_axis_drift_constraint(dim: int = 2) -> AffineConstraint1:
    """Built-in curve constraint: drift along the first axis with free speed."""
    e1 = np.zeros(dim)
    e1[0] = 1.0
    return AffineConstraint1(dim, e1, [e1])


def dalembert_decompose(delta: np.ndarray, basis: np.ndarray):
    """Split a covector into annihilator-parallel and orthogonal parts.

    ``basis`` rows must be orthonormal.  Returns ``(multipliers, orthogonal)``
    with ``delta = multipliers @ basis + orthogonal`` exactly (one rounding
    step per component).
    """
    delta = np.asarray(delta, dtype=float)
    basis = np.asarray(basis, dtype=float)
    if basis.ndim != 2 or basis.shape[1] != delta.shape[-1]:
        raise ValueError(f"basis shape {basis.shape} does not match covector {delta.shape}")
    gram = basis @ basis.T
    if not np.allclose(gram, np.eye(basis.shape[0]), atol=1e-10):
        raise ValueError("basis rows must be orthonormal")
    multipliers = delta @ basis.T
    orthogonal = delta - multipliers @ basis
    return multipliers, orthogonal


@dataclass(frozen=True)
class ConstraintCheckReport:
    """Joint membership / force-balance verdict along a sampled candidate.

    Residual arrays live on interior nodes: ``constraint_residuals`` has
    one sup-norm per node and annihilator element, ``multipliers`` the
    force decomposition coefficients, and ``orthogonal_norms`` the sup-norm
    of the force component no constraint force can account for.
    """

    constraint_tol: float
    force_tol: float
    constraint_residuals: np.ndarray
    multipliers: np.ndarray
    orthogonal_norms: np.ndarray
    constraint_max: float
    constraint_worst: tuple
    dalembert_max: float
    dalembert_worst: tuple
    constraint_passed: bool
    dalembert_passed: bool

    @property
    def passed(self) -> bool:
        return self.constraint_passed and self.dalembert_passed

    def multiplier_stats(self) -> np.ndarray:
        """(r, 2) array of per-generator multiplier min/max across nodes."""
        flat = self.multipliers.reshape(-1, self.multipliers.shape[-1])
        return np.stack([flat.min(axis=0), flat.max(axis=0)], axis=1)


def _interior_worst(values: np.ndarray, interior_ndim: int) -> tuple:
    flat = int(np.argmax(values))
    idx = np.unravel_index(flat, values.shape)
    return tuple(int(i) + 1 for i in idx[:interior_ndim])


def _membership_residuals_surface(grid: SurfaceGrid, constraint: AffineConstraint2):
    w = wedge_prolongation(grid)[1:-1, 1:-1]
    x = grid.points[1:-1, 1:-1]
    ni, nj = w.shape[:2]
    if constraint.constant:
        a, _ = constraint.at(x[0, 0])
        ann = constraint.annihilator_at(x[0, 0])
        diff = antisymmetric_from_slots(w - a.slots, grid.dim)
        per_form = np.einsum("rm,ijmn->ijrn", ann, diff)
        return np.abs(per_form).max(axis=-1), ann
    residuals = None
    ann0 = None
    for i in range(ni):
        for j in range(nj):
            a, gens = constraint.at(x[i, j])
            ann = annihilator_basis(gens, grid.dim)
            if residuals is None:
                residuals = np.empty((ni, nj, ann.shape[0]))
                ann0 = ann
            diff = Bivector(w[i, j], grid.dim) - a
            for r in range(ann.shape[0]):
                residuals[i, j, r] = np.abs(contract(ann[r], diff)).max()
    return residuals, ann0


def constraint_residual_surface(grid: SurfaceGrid, constraint: AffineConstraint2) -> np.ndarray:
    """Per-node membership defect: for each interior node and annihilator
    element, the sup-norm of ``contract(eta, w - a)``."""
    if constraint.dim != grid.dim:
        raise ValueError(f"constraint dimension {constraint.dim} does not match grid ({grid.dim})")
    residuals, _ = _membership_residuals_surface(grid, constraint)
    return residuals


def constraint_residual_curve(grid: CurveGrid, constraint: AffineConstraint1) -> np.ndarray:
    """Per-node membership defect ``eta . (v - a)`` for curve constraints."""
    if constraint.dim != grid.dim:
        raise ValueError(f"constraint dimension {constraint.dim} does not match grid ({grid.dim})")
    v = velocity_prolongation(grid)[1:-1]
    x = grid.points[1:-1]
    if constraint.constant:
        a, _ = constraint.at(x[0])
        ann = constraint.annihilator_at(x[0])
        return np.abs((v - a) @ ann.T)
    out = None
    for i in range(v.shape[0]):
        a, gens = constraint.at(x[i])
        ann = annihilator_basis_curve(gens, grid.dim)
        row = np.abs(ann @ (v[i] - a))
        if out is None:
            out = np.empty((v.shape[0], row.size))
        out[i] = row
    return out


def _force_decomposition(delta_values: np.ndarray, ann: np.ndarray, user_generators):
    """Vectorized d'Alembert split of the defect field over interior nodes."""
    lead = delta_values.shape[:-1]
    flat = delta_values.reshape(-1, delta_values.shape[-1])
    if user_generators is not None:
        user = np.vstack([np.asarray(u, dtype=float) for u in user_generators])
        if user.shape[1] != delta_values.shape[-1]:
            raise ValueError("user annihilator generators have the wrong dimension")
        # the supplied family must be a basis of the computed annihilator
        if np.linalg.matrix_rank(user) != ann.shape[0] or user.shape[0] != ann.shape[0]:
            raise ValueError("user annihilator generators do not form a basis of the annihilator")
        back = np.abs(user - (user @ ann.T) @ ann).max()
        if back > 1e-10 * max(1.0, float(np.abs(user).max())):
            raise ValueError("user annihilator generators leave the computed annihilator span")
        coeffs = np.linalg.solve(user @ user.T, user @ flat.T).T
        parallel = coeffs @ user
    else:
        coeffs = flat @ ann.T
        parallel = coeffs @ ann
    orthogonal = np.abs(flat - parallel).max(axis=-1).reshape(lead)
    return coeffs.reshape(lead + (coeffs.shape[-1],)), orthogonal


def _assemble_report(constraint_residuals, multipliers, orth_norms, constraint_tol, force_tol, interior_ndim):
    cmax = float(constraint_residuals.max())
    dmax = float(orth_norms.max())
    return ConstraintCheckReport(
        constraint_tol=float(constraint_tol),
        force_tol=float(force_tol),
        constraint_residuals=constraint_residuals,
        multipliers=multipliers,
        orthogonal_norms=orth_norms,
        constraint_max=cmax,
        constraint_worst=_interior_worst(constraint_residuals, interior_ndim),
        dalembert_max=dmax,
        dalembert_worst=_interior_worst(orth_norms, interior_ndim),
        constraint_passed=bool(cmax <= constraint_tol),
        dalembert_passed=bool(dmax <= force_tol),
    )


def nonholonomic_check(
    L,
    grid: SurfaceGrid,
    constraint: AffineConstraint2,
    constraint_tol: float,
    force_tol: float | None = None,
    annihilator_generators: Sequence[np.ndarray] | None = None,
) -> ConstraintCheckReport:
    """Membership and force-balance check of a sampled surface.

    The two defects carry different units and discretization error, so
    they get separate tolerances; ``force_tol`` defaults to the membership
    one.  When ``annihilator_generators`` are supplied (a basis of the same
    annihilator), multipliers are reported in that basis via a
    change-of-basis solve.
    """
    if force_tol is None:
        force_tol = constraint_tol
    if not (constraint_tol > 0.0 and force_tol > 0.0):
        raise ValueError("tolerances must be positive")
    if constraint.dim != grid.dim:
        raise ValueError(f"constraint dimension {constraint.dim} does not match grid ({grid.dim})")
    residuals, ann = _membership_residuals_surface(grid, constraint)
    delta = delta_L_surface(L, grid)
    if constraint.constant:
        multipliers, orth = _force_decomposition(delta.values, ann, annihilator_generators)
    else:
        if annihilator_generators is not None:
            raise ValueError("explicit annihilator generators require a constant constraint")
        x = grid.points[1:-1, 1:-1]
        ni, nj = delta.values.shape[:2]
        multipliers = np.empty((ni, nj, ann.shape[0]))
        orth = np.empty((ni, nj))
        for i in range(ni):
            for j in range(nj):
                lam, res = dalembert_decompose(
                    delta.values[i, j], constraint.annihilator_at(x[i, j])
                )
                multipliers[i, j] = lam
                orth[i, j] = np.abs(res).max()
    return _assemble_report(residuals, multipliers, orth, constraint_tol, force_tol, 2)


def nonholonomic_check_curve(
    L,
    grid: CurveGrid,
    constraint: AffineConstraint1,
    constraint_tol: float,
    force_tol: float | None = None,
    annihilator_generators: Sequence[np.ndarray] | None = None,
) -> ConstraintCheckReport:
    """Curve version of `nonholonomic_check`."""
    if force_tol is None:
        force_tol = constraint_tol
    if not (constraint_tol > 0.0 and force_tol > 0.0):
        raise ValueError("tolerances must be positive")
    if constraint.dim != grid.dim:
        raise ValueError(f"constraint dimension {constraint.dim} does not match grid ({grid.dim})")
    residuals = constraint_residual_curve(grid, constraint)
    delta = delta_L_curve(L, grid)
    if constraint.constant:
        ann = constraint.annihilator_at(grid.points[0])
        multipliers, orth = _force_decomposition(delta.values, ann, annihilator_generators)
    else:
        if annihilator_generators is not None:
            raise ValueError("explicit annihilator generators require a constant constraint")
        x = grid.points[1:-1]
        n = delta.values.shape[0]
        ann0 = constraint.annihilator_at(x[0])
        multipliers = np.empty((n, ann0.shape[0]))
        orth = np.empty(n)
        for i in range(n):
            lam, res = dalembert_decompose(delta.values[i], constraint.annihilator_at(x[i]))
            multipliers[i] = lam
            orth[i] = np.abs(res).max()
    return _assemble_report(residuals, multipliers, orth, constraint_tol, force_tol, 1)
