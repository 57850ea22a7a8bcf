"""Lagrangian and Hamiltonian fields on bivector bundles.

Derivative conventions.  Because a bivector is stored by independent
slots, there are two reasonable gradients: the derivative with respect to
a slot, and the antisymmetrized derivative with respect to a full-array
entry.  Momenta here always use the antisymmetrized one,

    p_I = (1/2) dL/d(slot I),

which is what makes the Legendre map of the area Lagrangian come out as
``p = h(w, .) / L`` with no stray factors of two.  Hamiltonian velocities
use the same convention, ``xdot^I = (1/2) dH/dp_I``.  Derivatives in the
base point are plain partials.

Subclasses provide `value_slots` (vectorized over leading axes); the
gradient methods fall back to central finite differences with step
``cbrt(eps) * max(1, |coordinate|)`` and are overridden with closed forms
by the built-in fields.  All fields are stateless and safe to share.
"""

from __future__ import annotations

import numpy as np

from .geometry import (
    Bivector,
    FiberMetric,
    Metric,
    MomentumBivector,
    dual_fiber_metric,
    induced_fiber_metric,
    pair_count,
)
from .tulczyjew import PhaseElement2, trace_y

__all__ = [
    "BivectorHamiltonian",
    "BivectorLagrangian",
    "CallableBivectorLagrangian",
    "CurveLagrangian",
    "FieldDomainError",
    "MorseFamily",
    "PhaseResidual2",
    "euler_pairing",
    "hamiltonian_phase_residual",
    "lagrangian_phase_residual",
    "morse_family_H",
    "nambu_goto",
    "partial_L_bivector",
    "plateau_lagrangian",
    "quadratic_area_lagrangian",
    "quadratic_curve_lagrangian",
]

_FD_STEP = float(np.cbrt(np.finfo(float).eps))


class FieldDomainError(ValueError):
    """Evaluation or derivative requested outside a field's domain."""


def _fd_gradient(fn, base, *, scale=1.0):
    """Central differences of ``fn`` in the last axis of ``base``.

    ``fn`` maps (..., n) -> (...); the result has shape (..., n).  The
    perturbation is applied one coordinate at a time, so ``fn`` may be an
    arbitrary vectorized field.
    """
    base = np.asarray(base, dtype=float)
    out = np.empty(base.shape)
    for i in range(base.shape[-1]):
        h = _FD_STEP * np.maximum(1.0, np.abs(base[..., i]))
        up = base.copy()
        up[..., i] += h
        down = base.copy()
        down[..., i] -= h
        out[..., i] = (fn(up) - fn(down)) / (2.0 * h) * scale
    return out


class BivectorLagrangian:
    """Scalar field ``L(x, w)`` on the velocity bivector bundle."""

    def __init__(self, dim: int):
        self.dim = int(dim)

    # --- required override -------------------------------------------------
    def value_slots(self, x: np.ndarray, w: np.ndarray) -> np.ndarray:
        """Evaluate on arrays of points (..., dim) and slots (..., K)."""
        raise NotImplementedError

    # --- derivative access, overridden with closed forms where available ---
    def gradient_x_slots(self, x: np.ndarray, w: np.ndarray) -> np.ndarray:
        return _fd_gradient(lambda xs: self.value_slots(xs, w), x)

    def momentum_slots(self, x: np.ndarray, w: np.ndarray) -> np.ndarray:
        return _fd_gradient(lambda ws: self.value_slots(x, ws), w, scale=0.5)

    def derivative_mask(self, x: np.ndarray, w: np.ndarray):
        """Boolean array marking nodes where derivative access is defined,
        or None when the field is everywhere differentiable."""
        return None

    # --- scalar wrappers ----------------------------------------------------
    def value(self, x, w: Bivector) -> float:
        return float(self.value_slots(np.asarray(x, dtype=float), w.slots))

    def gradient_x(self, x, w: Bivector) -> np.ndarray:
        return self.gradient_x_slots(np.asarray(x, dtype=float), w.slots)

    def momentum(self, x, w: Bivector) -> MomentumBivector:
        return MomentumBivector(self.momentum_slots(np.asarray(x, dtype=float), w.slots), self.dim)


class CallableBivectorLagrangian(BivectorLagrangian):
    """Adapter for a plain python function ``fn(x, w: Bivector) -> float``."""

    def __init__(self, dim: int, fn):
        super().__init__(dim)
        self._fn = fn

    def value_slots(self, x, w):
        x = np.asarray(x, dtype=float)
        w = np.asarray(w, dtype=float)
        lead = np.broadcast_shapes(x.shape[:-1], w.shape[:-1])
        xb = np.broadcast_to(x, lead + x.shape[-1:])
        wb = np.broadcast_to(w, lead + w.shape[-1:])
        out = np.empty(lead)
        for idx in np.ndindex(lead):
            out[idx] = self._fn(xb[idx], Bivector(wb[idx], self.dim))
        return out if lead else float(out)


class _SqrtQuadraticLagrangian(BivectorLagrangian):
    """``L = sqrt(w^T Q w)`` over slots, for a symmetric slot matrix Q.

    ``strict`` fields (indefinite Q) are undefined wherever the form is
    nonpositive; lenient ones (positive semidefinite Q) evaluate
    everywhere but lose derivative access on the zero set.
    """

    def __init__(self, dim: int, slot_quadratic: np.ndarray, strict: bool):
        super().__init__(dim)
        q = np.array(slot_quadratic, dtype=float)
        k = pair_count(dim)
        if q.shape != (k, k) or not np.allclose(q, q.T, atol=0.0, rtol=1e-14):
            raise ValueError("slot quadratic form must be a symmetric (K, K) matrix")
        q.flags.writeable = False
        self.slot_quadratic = q
        self.strict = bool(strict)

    def _form(self, w):
        return np.einsum("...i,ij,...j->...", w, self.slot_quadratic, w)

    def value_slots(self, x, w):
        q = self._form(np.asarray(w, dtype=float))
        if self.strict and np.any(q <= 0.0):
            raise FieldDomainError(
                "bivector outside the positivity domain: (w|w) = "
                f"{float(np.min(q))!r} <= 0"
            )
        return np.sqrt(np.maximum(q, 0.0))

    def gradient_x_slots(self, x, w):
        x = np.asarray(x, dtype=float)
        w = np.asarray(w, dtype=float)
        return np.zeros(np.broadcast_shapes(x.shape[:-1], w.shape[:-1]) + x.shape[-1:])

    def momentum_slots(self, x, w):
        w = np.asarray(w, dtype=float)
        q = self._form(w)
        if np.any(q <= 0.0):
            raise FieldDomainError(
                "momentum undefined: quadratic form is "
                f"{float(np.min(q))!r} <= 0 at some requested point"
            )
        return w @ self.slot_quadratic / (2.0 * np.sqrt(q))[..., None]

    def derivative_mask(self, x, w):
        return self._form(np.asarray(w, dtype=float)) > 0.0


class _AreaLagrangian(_SqrtQuadraticLagrangian):
    """Area-type Lagrangian ``L(w) = sqrt((w|w))`` for a fiber metric."""

    def __init__(self, fiber_metric: FiberMetric, strict: bool):
        # the unrestricted four-index sum is 4x the slot form
        super().__init__(fiber_metric.dim, 4.0 * fiber_metric.slot_matrix, strict)
        self.fiber_metric = fiber_metric


def nambu_goto(g: Metric) -> BivectorLagrangian:
    """Area Lagrangian of the fiber metric induced by a point metric.

    Defined on the positive cone ``(w|w) > 0``; for the Euclidean plane
    bivector ``e1 ^ e2`` its value is 2 (the unrestricted-sum convention),
    and the Legendre image has unit momentum norm under the dual pairing.
    """
    return _AreaLagrangian(induced_fiber_metric(g), strict=True)


def quadratic_area_lagrangian(h: FiberMetric) -> BivectorLagrangian:
    """Area Lagrangian for an explicitly supplied fiber metric."""
    return _AreaLagrangian(h, strict=True)


def plateau_lagrangian(dim: int = 3) -> BivectorLagrangian:
    """Unnormalized graph-area integrand ``L(w) = sqrt(sum_{mu,nu} (w^{mu nu})^2)``.

    The sum runs over all ordered and unordered pairs, i.e. twice the
    slot-wise sum of squares, so the unit plane bivector has L = sqrt(2).
    Defined everywhere; derivative access is lost only at w = 0.
    """
    return _SqrtQuadraticLagrangian(dim, 2.0 * np.eye(pair_count(dim)), strict=False)


class BivectorHamiltonian:
    """Scalar field ``H(x, p)`` on the momentum bivector bundle."""

    def __init__(self, dim: int):
        self.dim = int(dim)

    def value_slots(self, x: np.ndarray, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gradient_x_slots(self, x, p):
        return _fd_gradient(lambda xs: self.value_slots(xs, p), x)

    def velocity_slots(self, x, p):
        return _fd_gradient(lambda ps: self.value_slots(x, ps), p, scale=0.5)

    def value(self, x, p: MomentumBivector) -> float:
        return float(self.value_slots(np.asarray(x, dtype=float), p.slots))

    def gradient_x(self, x, p: MomentumBivector) -> np.ndarray:
        return self.gradient_x_slots(np.asarray(x, dtype=float), p.slots)

    def velocity(self, x, p: MomentumBivector) -> Bivector:
        return Bivector(self.velocity_slots(np.asarray(x, dtype=float), p.slots), self.dim)


class _MorseSlice(BivectorHamiltonian):
    """The Morse family at a fixed value of the area parameter."""

    def __init__(self, family: "MorseFamily", r: float):
        super().__init__(family.dim)
        self.family = family
        self.r = float(r)

    def value_slots(self, x, p):
        out = self.family.value_slots(p, self.r)
        lead = np.broadcast_shapes(np.asarray(x).shape[:-1], np.asarray(p).shape[:-1])
        return np.broadcast_to(out, lead).copy() if lead else out

    def gradient_x_slots(self, x, p):
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        return np.zeros(np.broadcast_shapes(x.shape[:-1], p.shape[:-1]) + x.shape[-1:])

    def velocity_slots(self, x, p):
        return self.family.velocity_slots(p, self.r)


class MorseFamily:
    """Generating family ``H(p, r) = r (sqrt((p|p)*) - 1)`` of the area dynamics.

    ``(p|p)*`` is the dual momentum pairing (slot-restricted sum with the
    inverse-metric fiber coefficients), so criticality in the auxiliary
    parameter r carves out exactly the unit momentum sphere, and the
    p-gradient at a Legendre image ``p = dL/dw`` recovers the velocity ray:
    at r = L(w) it returns w itself.
    """

    def __init__(self, g: Metric):
        self.metric = g
        self.dim = g.dim
        self.dual = dual_fiber_metric(g)
        self._dual_slot = self.dual.slot_matrix

    def momentum_square_slots(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return np.einsum("...i,ij,...j->...", p, self._dual_slot, p)

    def momentum_square(self, p: MomentumBivector) -> float:
        """Dual pairing ``(p|p)*``; unit on Legendre images of the area field."""
        return float(self.momentum_square_slots(p.slots))

    def value_slots(self, p, r):
        q = self.momentum_square_slots(p)
        if np.any(q <= 0.0):
            raise FieldDomainError(
                f"Morse family undefined: (p|p)* = {float(np.min(q))!r} <= 0"
            )
        return r * (np.sqrt(q) - 1.0)

    def value(self, p: MomentumBivector, r: float) -> float:
        return float(self.value_slots(p.slots, float(r)))

    def d_r(self, p: MomentumBivector, r: float = 0.0) -> float:
        """Partial in the family parameter; zero exactly on the unit sphere."""
        q = self.momentum_square_slots(p.slots)
        if q <= 0.0:
            raise FieldDomainError(f"Morse family undefined: (p|p)* = {float(q)!r} <= 0")
        return float(np.sqrt(q) - 1.0)

    def velocity_slots(self, p, r):
        p = np.asarray(p, dtype=float)
        q = self.momentum_square_slots(p)
        if np.any(q <= 0.0):
            raise FieldDomainError(
                f"Morse family undefined: (p|p)* = {float(np.min(q))!r} <= 0"
            )
        return float(r) * (p @ self._dual_slot) / (2.0 * np.sqrt(q))[..., None]

    def velocity(self, p: MomentumBivector, r: float) -> Bivector:
        """Half-gradient in p; at ``p = dL/dw`` and ``r = L(w)`` equals w."""
        return Bivector(self.velocity_slots(p.slots, r), self.dim)

    def at_r(self, r: float) -> BivectorHamiltonian:
        return _MorseSlice(self, r)


def morse_family_H(g: Metric) -> MorseFamily:
    """Morse family generating the area dynamics for a point metric."""
    return MorseFamily(g)


class PhaseResidual2:
    """Defect of the degree-2 phase equations at a single element."""

    __slots__ = ("force", "momentum")

    def __init__(self, force: np.ndarray, momentum: MomentumBivector):
        self.force = np.asarray(force, dtype=float)
        self.momentum = momentum

    @property
    def max_norm(self) -> float:
        return max(
            float(np.abs(self.force).max()),
            float(np.abs(self.momentum.slots).max(initial=0.0)),
        )

    def __repr__(self):
        return f"PhaseResidual2(force={self.force.tolist()}, momentum={self.momentum!r})"


def partial_L_bivector(L: BivectorLagrangian, x, w: Bivector) -> MomentumBivector:
    """Fiber derivative (Legendre map) of a bivector Lagrangian."""
    return L.momentum(x, w)


def lagrangian_phase_residual(L: BivectorLagrangian, e: PhaseElement2) -> PhaseResidual2:
    """Defect of ``ybar = dL/dx`` and ``p = dL/dw`` at a phase element."""
    force = trace_y(e.y, e.dim) - L.gradient_x(e.x, e.xdot)
    momentum = e.p - L.momentum(e.x, e.xdot)
    return PhaseResidual2(force, momentum)


def hamiltonian_phase_residual(H: BivectorHamiltonian, e: PhaseElement2):
    """Defect of ``ybar = -dH/dx`` and ``w = (1/2) dH/dp`` at a phase element.

    Returns the pair (force defect, velocity defect).
    """
    force = trace_y(e.y, e.dim) + H.gradient_x(e.x, e.p)
    velocity = e.xdot - H.velocity(e.x, e.p)
    return force, velocity


def euler_pairing(p: MomentumBivector, w: Bivector) -> float:
    """Full pairing ``p_{mu nu} w^{mu nu}`` over all index pairs (twice the
    slot dot product); equals L(w) for a degree-1 homogeneous Lagrangian
    evaluated at ``p = dL/dw``."""
    if p.dim != w.dim:
        raise ValueError(f"dimension mismatch: {p.dim} vs {w.dim}")
    return 2.0 * float(p.slots @ w.slots)


class CurveLagrangian:
    """Scalar field ``L(x, v)`` on the tangent bundle, for curve problems."""

    def __init__(self, dim: int):
        self.dim = int(dim)

    def value_field(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gradient_x_field(self, x, v):
        return _fd_gradient(lambda xs: self.value_field(xs, v), x)

    def momentum_field(self, x, v):
        return _fd_gradient(lambda vs: self.value_field(x, vs), v)

    def value(self, x, v) -> float:
        return float(self.value_field(np.asarray(x, dtype=float), np.asarray(v, dtype=float)))

    def gradient_x(self, x, v) -> np.ndarray:
        return self.gradient_x_field(np.asarray(x, dtype=float), np.asarray(v, dtype=float))

    def momentum(self, x, v) -> np.ndarray:
        return self.momentum_field(np.asarray(x, dtype=float), np.asarray(v, dtype=float))


class _QuadraticCurveLagrangian(CurveLagrangian):
    def __init__(self, dim: int, omega: float, mass: float):
        super().__init__(dim)
        self.omega = float(omega)
        self.mass = float(mass)

    def value_field(self, x, v):
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        kinetic = 0.5 * self.mass * np.einsum("...i,...i->...", v, v)
        potential = 0.5 * self.mass * self.omega**2 * np.einsum("...i,...i->...", x, x)
        return kinetic - potential

    def gradient_x_field(self, x, v):
        return -self.mass * self.omega**2 * np.asarray(x, dtype=float) * np.ones_like(np.asarray(v, dtype=float))

    def momentum_field(self, x, v):
        return self.mass * np.asarray(v, dtype=float) * np.ones_like(np.asarray(x, dtype=float))


def quadratic_curve_lagrangian(dim: int, omega: float = 0.0, mass: float = 1.0) -> CurveLagrangian:
    """``L = (m/2)|v|^2 - (m omega^2/2)|x|^2``; omega = 0 is the free particle."""
    return _QuadraticCurveLagrangian(dim, omega, mass)
