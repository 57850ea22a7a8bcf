"""Exterior-algebra primitives in a fixed coordinate chart.

Conventions used throughout the package:

* Vectors and one-forms are plain 1-d float arrays.  There is no wrapper
  class for rank-1 objects; index position (up or down) is tracked by the
  operation, not the type.

* A bivector stores only its independent components ``u^{mu nu}`` with
  ``mu < nu``, ordered lexicographically: (0,1), (0,2), ..., (0,m-1),
  (1,2), ...  The full antisymmetric matrix is derived from the slots on
  demand, so ``u^{nu mu} = -u^{mu nu}`` holds exactly, never only up to
  rounding.  Covariant bivectors (momenta ``p_{mu nu}``) use the same
  storage with lower indices.

* The scalar product of two bivectors sums over all four indices without
  restriction: ``(u|w) = h_{mu nu kappa lambda} u^{mu nu} w^{kappa lambda}``.
  For a simple Euclidean bivector ``v ^ u`` this equals ``4 * area(v, u)**2``;
  the factor 4 relative to a slot-wise sum is deliberate and pinned by
  tests.  Momenta pair against bivectors slot by slot, so the dual scalar
  product `momentum_scalar_product` is the restricted sum over ordered
  pairs, one quarter of the unrestricted one.  That is the normalization
  under which Legendre images of area-type Lagrangians land on the unit
  sphere of momentum space.

Every object is immutable after construction and every function is pure,
so values can be shared freely between threads or worker processes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, cached_property

import numpy as np

__all__ = [
    "Bivector",
    "FiberMetric",
    "Metric",
    "MomentumBivector",
    "antisymmetric_from_slots",
    "contract",
    "dual_fiber_metric",
    "index_pairs",
    "induced_fiber_metric",
    "momentum_scalar_product",
    "pair_count",
    "scalar_product",
    "slots_from_antisymmetric",
    "wedge",
    "wedge_slots",
]

_DEGENERACY_TOL = 1e-12


def pair_count(dim: int) -> int:
    """Number of independent bivector components in dimension ``dim``."""
    return dim * (dim - 1) // 2


@lru_cache(maxsize=None)
def index_pairs(dim: int) -> tuple[tuple[int, int], ...]:
    """Ordered index pairs (mu, nu), mu < nu, in lexicographic order."""
    if dim < 2:
        raise ValueError(f"need dimension >= 2 for bivectors, got {dim}")
    return tuple((a, b) for a in range(dim) for b in range(a + 1, dim))


@lru_cache(maxsize=None)
def _pair_slot(dim: int) -> dict[tuple[int, int], int]:
    return {pair: k for k, pair in enumerate(index_pairs(dim))}


def pair_slot(dim: int, mu: int, nu: int) -> int:
    """Slot index of the ordered pair (mu, nu) with mu < nu."""
    return _pair_slot(dim)[(mu, nu)]


def antisymmetric_from_slots(slots: np.ndarray, dim: int) -> np.ndarray:
    """Expand slot components (..., K) to full antisymmetric arrays (..., dim, dim).

    The lower triangle is written as the exact negation of the upper one,
    so antisymmetry of the result is a structural fact.
    """
    slots = np.asarray(slots, dtype=float)
    full = np.zeros(slots.shape[:-1] + (dim, dim))
    for k, (a, b) in enumerate(index_pairs(dim)):
        full[..., a, b] = slots[..., k]
        full[..., b, a] = -slots[..., k]
    return full


def slots_from_antisymmetric(full: np.ndarray) -> np.ndarray:
    """Extract the upper-triangle slot components from full arrays (..., m, m)."""
    full = np.asarray(full, dtype=float)
    dim = full.shape[-1]
    cols = [full[..., a, b] for a, b in index_pairs(dim)]
    return np.stack(cols, axis=-1)


def _validated_slots(slots, dim: int) -> np.ndarray:
    arr = np.array(slots, dtype=float)
    if dim < 2:
        raise ValueError(f"need dimension >= 2, got {dim}")
    if arr.shape != (pair_count(dim),):
        raise ValueError(
            f"expected {pair_count(dim)} independent components for dimension "
            f"{dim}, got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError("components must be finite")
    arr.flags.writeable = False
    return arr


class _SlotStored:
    """Shared machinery for slot-stored antisymmetric rank-2 tensors."""

    __slots__ = ("slots", "dim")

    def __init__(self, slots, dim: int):
        object.__setattr__(self, "slots", _validated_slots(slots, dim))
        object.__setattr__(self, "dim", int(dim))

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    @property
    def full(self) -> np.ndarray:
        """Full antisymmetric (dim, dim) array; exact by construction."""
        return antisymmetric_from_slots(self.slots, self.dim)

    def component(self, mu: int, nu: int) -> float:
        """Component for an arbitrary index pair, including mu > nu and mu = nu."""
        if mu == nu:
            return 0.0
        if mu < nu:
            return float(self.slots[pair_slot(self.dim, mu, nu)])
        return -float(self.slots[pair_slot(self.dim, nu, mu)])

    @classmethod
    def from_full(cls, full: np.ndarray):
        """Build from a full (m, m) array, which must be exactly antisymmetric."""
        full = np.asarray(full, dtype=float)
        if full.ndim != 2 or full.shape[0] != full.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {full.shape}")
        if not np.array_equal(full, -full.T):
            raise ValueError("matrix is not antisymmetric")
        return cls(slots_from_antisymmetric(full), full.shape[0])

    def _like(self, slots):
        return type(self)(slots, self.dim)

    def _check_same(self, other):
        if type(other) is not type(self):
            raise TypeError(
                f"cannot combine {type(self).__name__} with {type(other).__name__}"
            )
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other):
        self._check_same(other)
        return self._like(self.slots + other.slots)

    def __sub__(self, other):
        self._check_same(other)
        return self._like(self.slots - other.slots)

    def __neg__(self):
        return self._like(-self.slots)

    def __mul__(self, scale):
        return self._like(self.slots * float(scale))

    __rmul__ = __mul__

    def __eq__(self, other):
        return (
            type(other) is type(self)
            and other.dim == self.dim
            and np.array_equal(other.slots, self.slots)
        )

    def __hash__(self):
        return hash((type(self).__name__, self.dim, self.slots.tobytes()))

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim}, slots={self.slots.tolist()})"


class Bivector(_SlotStored):
    """Contravariant bivector ``u^{mu nu}`` stored by independent slots mu < nu."""


class MomentumBivector(_SlotStored):
    """Covariant bivector ``p_{mu nu}`` (a momentum) stored by independent slots."""


def wedge_slots(v: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Slot components of ``v ^ u`` for arrays of vectors (..., m) -> (..., K).

    Each slot is the 2x2 minor ``v^mu u^nu - v^nu u^mu``; no factor 1/2.
    """
    v = np.asarray(v, dtype=float)
    u = np.asarray(u, dtype=float)
    if v.shape != u.shape:
        raise ValueError(f"dimension mismatch: {v.shape} vs {u.shape}")
    dim = v.shape[-1]
    cols = [v[..., a] * u[..., b] - v[..., b] * u[..., a] for a, b in index_pairs(dim)]
    return np.stack(cols, axis=-1)


def wedge(v: np.ndarray, u: np.ndarray) -> Bivector:
    """Wedge product of two vectors."""
    v = np.asarray(v, dtype=float)
    u = np.asarray(u, dtype=float)
    if v.ndim != 1 or u.ndim != 1:
        raise ValueError("wedge expects rank-1 arrays")
    return Bivector(wedge_slots(v, u), v.shape[0])


def contract(eta: np.ndarray, u: Bivector) -> np.ndarray:
    """Insert a one-form into the first index: ``(i_eta u)^nu = eta_mu u^{mu nu}``."""
    eta = np.asarray(eta, dtype=float)
    if eta.shape != (u.dim,):
        raise ValueError(f"dimension mismatch: one-form {eta.shape} vs bivector dim {u.dim}")
    return u.full.T @ eta


@dataclass(frozen=True)
class Metric:
    """Constant symmetric nondegenerate metric on the model space.

    ``signature`` is "euclidean" (positive definite) or "lorentz" (exactly
    one negative eigenvalue); other signatures are out of scope here and
    rejected at construction.
    """

    matrix: np.ndarray
    signature: str

    def __post_init__(self):
        g = np.array(self.matrix, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError(f"metric must be a square matrix, got shape {g.shape}")
        if g.shape[0] < 2:
            raise ValueError("metric dimension must be at least 2")
        scale = max(1.0, float(np.abs(g).max()))
        if float(np.abs(g - g.T).max()) > 1e-12 * scale:
            raise ValueError("metric matrix is not symmetric")
        g = (g + g.T) / 2.0
        if abs(np.linalg.det(g)) <= _DEGENERACY_TOL:
            raise ValueError("metric is degenerate (|det| <= 1e-12)")
        negatives = int(np.sum(np.linalg.eigvalsh(g) < 0.0))
        expected = {"euclidean": 0, "lorentz": 1}.get(self.signature)
        if expected is None:
            raise ValueError(f"unknown signature tag {self.signature!r}")
        if negatives != expected:
            raise ValueError(
                f"matrix has {negatives} negative eigenvalue(s), "
                f"inconsistent with signature {self.signature!r}"
            )
        g.flags.writeable = False
        object.__setattr__(self, "matrix", g)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def inverse(self) -> np.ndarray:
        inv = np.linalg.inv(self.matrix)
        inv = (inv + inv.T) / 2.0
        inv.flags.writeable = False
        return inv

    @classmethod
    def euclidean(cls, dim: int) -> "Metric":
        return cls(np.eye(dim), "euclidean")

    @classmethod
    def minkowski(cls, dim: int) -> "Metric":
        """Signature (-, +, ..., +) with the time direction first."""
        g = np.eye(dim)
        g[0, 0] = -1.0
        return cls(g, "lorentz")

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "Metric":
        """Build from a matrix, detecting the signature tag."""
        g = np.asarray(matrix, dtype=float)
        negatives = int(np.sum(np.linalg.eigvalsh((g + g.T) / 2.0) < 0.0))
        return cls(g, "lorentz" if negatives == 1 else "euclidean")


class FiberMetric:
    """Rank-4 coefficient array ``h_{mu nu kappa lambda}`` pairing bivectors.

    Required symmetries (validated exactly): antisymmetry in the first and
    in the second index pair, and symmetry under exchange of the pairs.
    ``slot_matrix`` is the induced symmetric K x K matrix over ordered
    slots, i.e. the matrix of second-order minors when ``h`` comes from a
    point metric.
    """

    __slots__ = ("array", "dim", "_slot")

    def __init__(self, array: np.ndarray):
        h = np.array(array, dtype=float)
        if h.ndim != 4 or len(set(h.shape)) != 1:
            raise ValueError(f"expected shape (m, m, m, m), got {h.shape}")
        if not np.all(np.isfinite(h)):
            raise ValueError("coefficients must be finite")
        if not np.array_equal(h, -np.swapaxes(h, 0, 1)):
            raise ValueError("not antisymmetric in the first index pair")
        if not np.array_equal(h, -np.swapaxes(h, 2, 3)):
            raise ValueError("not antisymmetric in the second index pair")
        if not np.array_equal(h, np.transpose(h, (2, 3, 0, 1))):
            raise ValueError("not symmetric under exchange of index pairs")
        h.flags.writeable = False
        object.__setattr__(self, "array", h)
        object.__setattr__(self, "dim", h.shape[0])
        object.__setattr__(self, "_slot", None)

    def __setattr__(self, name, value):
        raise AttributeError("FiberMetric is immutable")

    @property
    def slot_matrix(self) -> np.ndarray:
        """Symmetric (K, K) matrix ``h[I, J]`` over ordered index pairs."""
        if self._slot is None:
            pairs = index_pairs(self.dim)
            k = len(pairs)
            mat = np.empty((k, k))
            for i, (a, b) in enumerate(pairs):
                for j, (c, d) in enumerate(pairs):
                    mat[i, j] = self.array[a, b, c, d]
            mat.flags.writeable = False
            object.__setattr__(self, "_slot", mat)
        return self._slot

    @classmethod
    def from_point_metric(cls, g: np.ndarray) -> "FiberMetric":
        g = np.asarray(g, dtype=float)
        h = np.einsum("mk,nl->mnkl", g, g) - np.einsum("ml,nk->mnkl", g, g)
        return cls(h)


def induced_fiber_metric(g: Metric) -> FiberMetric:
    """Fiber metric ``h = g (x) g - swap`` induced by a point metric."""
    return FiberMetric.from_point_metric(g.matrix)


def dual_fiber_metric(g: Metric) -> FiberMetric:
    """Fiber metric on momenta, built from the inverse point metric.

    By the Cauchy-Binet identity its slot matrix is the inverse of the
    slot matrix of `induced_fiber_metric`, which is what makes the
    Legendre image of the area Lagrangian a unit momentum under
    `momentum_scalar_product`.
    """
    return FiberMetric.from_point_metric(g.inverse)


def scalar_product(h: FiberMetric, u: Bivector, w: Bivector) -> float:
    """Unrestricted four-index sum ``h_{mu nu kappa lambda} u^{mu nu} w^{kappa lambda}``.

    Equals four times the slot-wise sum; for the Euclidean metric and a
    simple bivector ``v ^ u`` it evaluates to ``4 * area(v, u)**2``.
    """
    if not (h.dim == u.dim == w.dim):
        raise ValueError(f"dimension mismatch: h {h.dim}, u {u.dim}, w {w.dim}")
    return 4.0 * float(u.slots @ h.slot_matrix @ w.slots)


def momentum_scalar_product(h: FiberMetric, p: MomentumBivector, q: MomentumBivector) -> float:
    """Slot-restricted sum over ordered pairs; the dual pairing for momenta.

    One quarter of the unrestricted sum.  With ``h = dual_fiber_metric(g)``
    this is the quadratic form whose unit sphere carries the Legendre
    images of the induced area Lagrangian.
    """
    if not (h.dim == p.dim == q.dim):
        raise ValueError(f"dimension mismatch: h {h.dim}, p {p.dim}, q {q.dim}")
    return float(p.slots @ h.slot_matrix @ q.slots)
