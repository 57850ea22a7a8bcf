"""Canonical maps of the Tulczyjew triple, for curves and for surfaces.

Degree 1 (curves).  An element of the tangent of the cotangent bundle is
the block tuple ``(x, p, xdot, pdot)``.  The two legs of the triple are

    alpha1: (x, p, xdot, pdot) -> (x, xdot, pdot, p)      on T*(TM)
    beta1:  (x, p, xdot, pdot) -> (x, p, -pdot, xdot)     on T*(T*M)

``beta1`` is contraction with the canonical symplectic form, whose sign
is fixed here by requiring that matching ``beta1`` against dH reproduce
Hamilton's equations ``xdot = dH/dp``, ``pdot = -dH/dx``.  ``alpha1`` is
``beta1`` followed by the cotangent flip ``(x, p, a, b) -> (x, b, -a, p)``,
and both identities are exact component permutations (with one negation),
never arithmetic.

Degree 2 (surfaces).  The middle space carries, over a base point ``x``,
the blocks

    p      momentum bivector, slots p_{lambda kappa}, lambda < kappa
    xdot   velocity bivector, slots xdot^{nu sigma}
    y      mixed block y^eta_{theta rho}, stored as a (dim, K) array over
           slots theta < rho of the lower pair
    pdot   block p-dot_{(gamma delta)(epsilon zeta)}, stored as an
           antisymmetric (K, K) matrix over slot pairs

Contraction with the canonical multisymplectic form (convention
``i_{v^w} omega (z) = omega(v, w, z)``) gives

    beta2:  -> (x, p, -ybar, xdot)       on the momentum side
    alpha2: -> (x, xdot, +ybar, p)       on the velocity side

where ``ybar_rho = y^eta_{eta rho}`` is the trace of the mixed block.  The
``pdot`` block drops out of both maps identically, which is pinned by
tests.  As in degree 1, ``alpha2 = flip . beta2`` exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (
    Bivector,
    MomentumBivector,
    antisymmetric_from_slots,
    pair_count,
)

__all__ = [
    "CovectorOnConfigSpace",
    "CovectorOnPhaseSpace",
    "PhaseElement1",
    "PhaseElement2",
    "alpha1",
    "alpha2",
    "beta1",
    "beta2",
    "cotangent_flip1",
    "cotangent_flip2",
    "trace_y",
]


def _vector(arr, dim: int, name: str) -> np.ndarray:
    out = np.array(arr, dtype=float)
    if out.shape != (dim,):
        raise ValueError(f"{name}: expected shape ({dim},), got {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name}: entries must be finite")
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class PhaseElement1:
    """Tangent element of the cotangent bundle: blocks (x, p, xdot, pdot)."""

    x: np.ndarray
    p: np.ndarray
    xdot: np.ndarray
    pdot: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        dim = x.shape[0] if x.ndim == 1 else 0
        if dim < 1:
            raise ValueError("x must be a nonempty vector")
        for name in ("x", "p", "xdot", "pdot"):
            object.__setattr__(self, name, _vector(getattr(self, name), dim, name))

    @property
    def dim(self) -> int:
        return self.x.shape[0]


def alpha1(e: PhaseElement1) -> tuple:
    """Velocity-side leg: (x, p, xdot, pdot) -> (x, xdot, pdot, p)."""
    return (e.x, e.xdot, e.pdot, e.p)


def beta1(e: PhaseElement1) -> tuple:
    """Momentum-side leg: (x, p, xdot, pdot) -> (x, p, -pdot, xdot)."""
    return (e.x, e.p, -e.pdot, e.xdot)


def cotangent_flip1(cov: tuple) -> tuple:
    """Flip T*(T*M) -> T*(TM): (x, p, a, b) -> (x, b, -a, p)."""
    x, p, a, b = cov
    return (x, b, -a, p)


@dataclass(frozen=True)
class PhaseElement2:
    """Element of the middle space of the degree-2 triple.

    ``y`` has shape (dim, K) with the second index running over ordered
    slots; ``pdot`` is an exactly antisymmetric (K, K) matrix over slots.
    """

    x: np.ndarray
    p: MomentumBivector
    xdot: Bivector
    y: np.ndarray
    pdot: np.ndarray

    def __post_init__(self):
        if not isinstance(self.p, MomentumBivector):
            raise TypeError("p must be a MomentumBivector")
        if not isinstance(self.xdot, Bivector):
            raise TypeError("xdot must be a Bivector")
        dim = self.p.dim
        k = pair_count(dim)
        object.__setattr__(self, "x", _vector(self.x, dim, "x"))
        if self.xdot.dim != dim:
            raise ValueError(f"xdot dimension {self.xdot.dim} does not match p ({dim})")
        y = np.array(self.y, dtype=float)
        if y.shape != (dim, k):
            raise ValueError(f"y: expected shape ({dim}, {k}), got {y.shape}")
        pdot = np.array(self.pdot, dtype=float)
        if pdot.shape != (k, k):
            raise ValueError(f"pdot: expected shape ({k}, {k}), got {pdot.shape}")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(pdot))):
            raise ValueError("y and pdot entries must be finite")
        if not np.array_equal(pdot, -pdot.T):
            raise ValueError("pdot must be antisymmetric under slot exchange")
        y.flags.writeable = False
        pdot.flags.writeable = False
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "pdot", pdot)

    @property
    def dim(self) -> int:
        return self.p.dim

    @property
    def y_full(self) -> np.ndarray:
        """Mixed block as a (dim, dim, dim) array, antisymmetric in the lower pair."""
        return antisymmetric_from_slots(self.y, self.dim)

    @property
    def pdot_full(self) -> np.ndarray:
        """pdot as a rank-4 array, antisymmetric in each index pair and
        antisymmetric under exchange of the pairs."""
        dim = self.dim
        # expand the second slot axis, then the first
        tmp = antisymmetric_from_slots(self.pdot, dim)  # (K, dim, dim)
        full = antisymmetric_from_slots(np.moveaxis(tmp, 0, -1), dim)  # (c, d, a, b)
        return full.transpose(2, 3, 0, 1)

    @classmethod
    def zero(cls, dim: int) -> "PhaseElement2":
        k = pair_count(dim)
        return cls(
            np.zeros(dim),
            MomentumBivector(np.zeros(k), dim),
            Bivector(np.zeros(k), dim),
            np.zeros((dim, k)),
            np.zeros((k, k)),
        )


def trace_y(y: np.ndarray, dim: int) -> np.ndarray:
    """Trace ``ybar_rho = y^eta_{eta rho}`` of a mixed block stored by slots.

    Uses the antisymmetric accessor, so a block with a single stored entry
    traces exactly (no cancellation error).
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (dim, pair_count(dim)):
        raise ValueError(f"y: expected shape ({dim}, {pair_count(dim)}), got {y.shape}")
    return np.einsum("aab->b", antisymmetric_from_slots(y, dim))


@dataclass(frozen=True)
class CovectorOnPhaseSpace:
    """Covector on the momentum prolongation: base (x, p), components (a, b)."""

    x: np.ndarray
    p: MomentumBivector
    a: np.ndarray
    b: Bivector

    def __post_init__(self):
        dim = self.p.dim
        object.__setattr__(self, "x", _vector(self.x, dim, "x"))
        object.__setattr__(self, "a", _vector(self.a, dim, "a"))
        if self.b.dim != dim:
            raise ValueError("component dimensions disagree")


@dataclass(frozen=True)
class CovectorOnConfigSpace:
    """Covector on the velocity prolongation: base (x, xdot), components (a, c)."""

    x: np.ndarray
    xdot: Bivector
    a: np.ndarray
    c: MomentumBivector

    def __post_init__(self):
        dim = self.xdot.dim
        object.__setattr__(self, "x", _vector(self.x, dim, "x"))
        object.__setattr__(self, "a", _vector(self.a, dim, "a"))
        if self.c.dim != dim:
            raise ValueError("component dimensions disagree")


def beta2(e: PhaseElement2) -> CovectorOnPhaseSpace:
    """Momentum-side leg: contraction with the canonical multisymplectic form.

    Component formula: ``(x, p, xdot, y, pdot) -> (x, p, -ybar, xdot)``.
    The pdot block does not enter.
    """
    return CovectorOnPhaseSpace(e.x, e.p, -trace_y(e.y, e.dim), e.xdot)


def alpha2(e: PhaseElement2) -> CovectorOnConfigSpace:
    """Velocity-side leg: ``(x, p, xdot, y, pdot) -> (x, xdot, +ybar, p)``."""
    return CovectorOnConfigSpace(e.x, e.xdot, trace_y(e.y, e.dim), e.p)


def cotangent_flip2(cov: CovectorOnPhaseSpace) -> CovectorOnConfigSpace:
    """Flip between the two cotangent descriptions: (x, p, a, b) -> (x, b, -a, p)."""
    return CovectorOnConfigSpace(cov.x, cov.b, -cov.a, cov.p)
