"""Sampled curves and surfaces, and discrete Euler-Lagrange residuals.

Stencils: all parameter derivatives are second-order central differences
in the interior and second-order one-sided stencils on the boundary rows
(`numpy.gradient` with ``edge_order=2``).  Residuals are reported on
interior nodes only, where the outer derivative of the momentum field is
itself central.

The surface residual is the expanded first-variation defect

    delta_nu = dL/dx^nu - d_t S^mu d_s P_{mu nu} + d_s S^mu d_t P_{mu nu},

with ``P`` the momentum field of the prolongation.  `delta_L_surface_via_maps`
computes the same covector by assembling, node by node, the full phase
element of the momentum surface and pushing it through the degree-2
velocity-side canonical map; the two routes agree to rounding because the
trace of the assembled mixed block reproduces the expanded sum.  Keeping
both is deliberate: one is fast, the other exercises the canonical maps,
and their agreement is a standing cross-check.

Assembly is deterministic: fields are evaluated node by node with a fixed
reduction order, so repeated runs are bitwise identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (
    Bivector,
    MomentumBivector,
    antisymmetric_from_slots,
    wedge_slots,
)
from .tulczyjew import PhaseElement2, alpha2

__all__ = [
    "CovectorField",
    "CurveGrid",
    "ElReport",
    "NodeDomainError",
    "SurfaceGrid",
    "delta_L_curve",
    "delta_L_surface",
    "delta_L_surface_via_maps",
    "el_check",
    "velocity_prolongation",
    "wedge_prolongation",
]


class NodeDomainError(ValueError):
    """A field was undefined at a grid node; carries the node index."""

    def __init__(self, message: str, node: tuple):
        super().__init__(f"{message} at node {node}")
        self.node = node


def _validated_points(points, min_samples, name):
    pts = np.array(points, dtype=float)
    if pts.ndim != len(min_samples) + 1:
        raise ValueError(f"{name}: expected {len(min_samples) + 1}-d sample array, got shape {pts.shape}")
    for axis, need in enumerate(min_samples):
        if pts.shape[axis] < need:
            raise ValueError(
                f"{name}: need at least {need} samples along axis {axis}, got {pts.shape[axis]}"
            )
    if not np.all(np.isfinite(pts)):
        raise ValueError(f"{name}: sample coordinates must be finite")
    pts.flags.writeable = False
    return pts


@dataclass(frozen=True)
class SurfaceGrid:
    """Uniformly sampled parameterized surface: points (nt, ns, m)."""

    dt: float
    ds: float
    points: np.ndarray

    def __post_init__(self):
        if not (self.dt > 0.0 and self.ds > 0.0):
            raise ValueError("grid steps must be positive")
        object.__setattr__(self, "points", _validated_points(self.points, (5, 5), "SurfaceGrid"))
        if self.dim < 2:
            raise ValueError("surface ambient dimension must be at least 2")

    @property
    def dim(self) -> int:
        return self.points.shape[-1]

    @property
    def shape(self) -> tuple:
        return self.points.shape[:2]

    @classmethod
    def sample(cls, fn, t_axis, s_axis) -> "SurfaceGrid":
        """Sample ``fn(t, s) -> point`` on [t0, t1] x [s0, s1] with nt x ns nodes."""
        t0, t1, nt = t_axis
        s0, s1, ns = s_axis
        ts = np.linspace(t0, t1, nt)
        ss = np.linspace(s0, s1, ns)
        pts = np.array([[fn(t, s) for s in ss] for t in ts], dtype=float)
        return cls(ts[1] - ts[0], ss[1] - ss[0], pts)

    @classmethod
    def from_graph(cls, xs, ys, z) -> "SurfaceGrid":
        """Embed height samples z (len(xs), len(ys)) as (x, y, z(x, y))."""
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        z = np.asarray(z, dtype=float)
        if z.shape != (xs.size, ys.size):
            raise ValueError(f"height samples {z.shape} do not match axes ({xs.size}, {ys.size})")
        for name, axis in (("xs", xs), ("ys", ys)):
            steps = np.diff(axis)
            if axis.size < 2 or not np.allclose(steps, steps[0], rtol=1e-12, atol=1e-14):
                raise ValueError(f"{name} must be uniformly spaced")
        pts = np.empty(z.shape + (3,))
        pts[..., 0] = xs[:, None]
        pts[..., 1] = ys[None, :]
        pts[..., 2] = z
        return cls(float(xs[1] - xs[0]), float(ys[1] - ys[0]), pts)


@dataclass(frozen=True)
class CurveGrid:
    """Uniformly sampled parameterized curve: points (n, m)."""

    dt: float
    points: np.ndarray

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValueError("grid step must be positive")
        object.__setattr__(self, "points", _validated_points(self.points, (5,), "CurveGrid"))

    @property
    def dim(self) -> int:
        return self.points.shape[-1]

    @classmethod
    def sample(cls, fn, t0: float, t1: float, num: int) -> "CurveGrid":
        ts = np.linspace(t0, t1, num)
        pts = np.array([np.atleast_1d(fn(t)) for t in ts], dtype=float)
        return cls(ts[1] - ts[0], pts)


def wedge_prolongation(grid: SurfaceGrid) -> np.ndarray:
    """Tangent bivector slots (nt, ns, K) of the sampled surface."""
    tt = np.gradient(grid.points, grid.dt, axis=0, edge_order=2)
    ts = np.gradient(grid.points, grid.ds, axis=1, edge_order=2)
    return wedge_slots(tt, ts)


def velocity_prolongation(grid: CurveGrid) -> np.ndarray:
    """Sampled velocity field (n, m) of a curve grid."""
    return np.gradient(grid.points, grid.dt, axis=0, edge_order=2)


@dataclass(frozen=True)
class CovectorField:
    """Covector samples over the interior nodes of a parameter grid.

    ``values[i - offset, ..., :]`` belongs to global node ``i, ...``.
    """

    values: np.ndarray
    offset: int = 1

    def max_norm(self) -> float:
        return float(np.abs(self.values).max())

    def worst_node(self) -> tuple:
        """Global grid index of the largest-magnitude component."""
        flat = int(np.argmax(np.abs(self.values)))
        idx = np.unravel_index(flat, self.values.shape)
        return tuple(int(i) + self.offset for i in idx[:-1])

    def at_node(self, *node) -> np.ndarray:
        return self.values[tuple(i - self.offset for i in node)]


@dataclass(frozen=True)
class ElReport:
    """Outcome of an Euler-Lagrange residual check."""

    max_norm: float
    tol: float
    passed: bool
    worst_node: tuple


def el_check(field: CovectorField, tol: float) -> ElReport:
    """Sup-norm test of a residual covector field."""
    if not tol > 0.0:
        raise ValueError("tolerance must be positive")
    worst = field.max_norm()
    return ElReport(worst, float(tol), bool(worst <= tol), field.worst_node())


def _surface_fields(L, grid: SurfaceGrid):
    x = grid.points
    tt = np.gradient(x, grid.dt, axis=0, edge_order=2)
    ts = np.gradient(x, grid.ds, axis=1, edge_order=2)
    w = wedge_slots(tt, ts)
    mask = L.derivative_mask(x, w)
    if mask is not None and not np.all(mask):
        node = tuple(int(v) for v in np.argwhere(~mask)[0])
        raise NodeDomainError("Lagrangian derivative undefined", node)
    return x, tt, ts, w


def delta_L_surface(L, grid: SurfaceGrid) -> CovectorField:
    """First-variation defect of a bivector Lagrangian along a sampled surface."""
    if L.dim != grid.dim:
        raise ValueError(f"field dimension {L.dim} does not match grid ({grid.dim})")
    x, tt, ts, w = _surface_fields(L, grid)
    p_full = antisymmetric_from_slots(L.momentum_slots(x, w), grid.dim)
    dpt = np.gradient(p_full, grid.dt, axis=0, edge_order=2)
    dps = np.gradient(p_full, grid.ds, axis=1, edge_order=2)
    delta = (
        L.gradient_x_slots(x, w)
        - np.einsum("ijm,ijmn->ijn", tt, dps)
        + np.einsum("ijm,ijmn->ijn", ts, dpt)
    )
    return CovectorField(delta[1:-1, 1:-1])


def delta_L_surface_via_maps(L, grid: SurfaceGrid):
    """Same defect, assembled through phase elements and the canonical map.

    Returns ``(field, momentum_defect)``: the second entry is the largest
    deviation between the stored momentum block and its recomputation,
    which is zero up to rounding by construction and kept as a guard.
    """
    if L.dim != grid.dim:
        raise ValueError(f"field dimension {L.dim} does not match grid ({grid.dim})")
    x, tt, ts, w = _surface_fields(L, grid)
    dim = grid.dim
    p = L.momentum_slots(x, w)
    dpt = np.gradient(p, grid.dt, axis=0, edge_order=2)
    dps = np.gradient(p, grid.ds, axis=1, edge_order=2)
    nt, ns = grid.shape
    vals = np.empty((nt - 2, ns - 2, dim))
    momentum_defect = 0.0
    for i in range(1, nt - 1):
        for j in range(1, ns - 1):
            # holonomic blocks of the prolonged momentum surface
            y = np.outer(tt[i, j], dps[i, j]) - np.outer(ts[i, j], dpt[i, j])
            pdot = np.outer(dpt[i, j], dps[i, j]) - np.outer(dps[i, j], dpt[i, j])
            element = PhaseElement2(
                x[i, j],
                MomentumBivector(p[i, j], dim),
                Bivector(w[i, j], dim),
                y,
                pdot,
            )
            cov = alpha2(element)
            vals[i - 1, j - 1] = L.gradient_x(x[i, j], element.xdot) - cov.a
            defect = L.momentum(x[i, j], element.xdot) - cov.c
            momentum_defect = max(momentum_defect, float(np.abs(defect.slots).max()))
    return CovectorField(vals), momentum_defect


def delta_L_curve(L, grid: CurveGrid) -> CovectorField:
    """First-variation defect of a curve Lagrangian along a sampled curve."""
    if L.dim != grid.dim:
        raise ValueError(f"field dimension {L.dim} does not match grid ({grid.dim})")
    x = grid.points
    v = np.gradient(x, grid.dt, axis=0, edge_order=2)
    dp = np.gradient(L.momentum_field(x, v), grid.dt, axis=0, edge_order=2)
    delta = L.gradient_x_field(x, v) - dp
    return CovectorField(delta[1:-1])
