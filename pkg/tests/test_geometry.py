"""Bivector storage, wedge/contract, and the fiber scalar products.

Oracles are deliberately dumb: explicit index loops and textbook
identities (Gram determinant, Cauchy-Binet), independent of the slot
bookkeeping under test.
"""

import numpy as np
import pytest

from wedgemech.geometry import (
    Bivector,
    FiberMetric,
    Metric,
    MomentumBivector,
    antisymmetric_from_slots,
    contract,
    dual_fiber_metric,
    index_pairs,
    induced_fiber_metric,
    momentum_scalar_product,
    pair_count,
    scalar_product,
    wedge,
    wedge_slots,
)


def random_spd(rng, dim):
    a = rng.normal(size=(dim, dim))
    return a @ a.T + dim * np.eye(dim)


def test_pair_ordering_dim4():
    assert index_pairs(4) == ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
    assert pair_count(4) == 6


@pytest.mark.parametrize("dim", [2, 3, 4, 5])
def test_slot_full_round_trip(dim):
    rng = np.random.default_rng(10 + dim)
    slots = rng.normal(size=pair_count(dim))
    u = Bivector(slots, dim)
    full = u.full
    # exact antisymmetry is structural, not approximate
    assert np.array_equal(full, -full.T)
    assert Bivector.from_full(full) == u
    for a, b in index_pairs(dim):
        assert u.component(a, b) == full[a, b]
        assert u.component(b, a) == -full[a, b]
    assert u.component(0, 0) == 0.0


def test_bivector_validation():
    with pytest.raises(ValueError):
        Bivector([1.0, 2.0], 3)  # needs 3 slots
    with pytest.raises(ValueError):
        Bivector([1.0, np.inf, 0.0], 3)
    with pytest.raises(ValueError):
        Bivector.from_full(np.eye(3))
    with pytest.raises(AttributeError):
        Bivector([1.0, 0.0, 0.0], 3).dim = 4
    u = Bivector([1.0, 0.0, 0.0], 3)
    with pytest.raises(ValueError):
        u.slots[0] = 2.0


def test_momentum_is_a_distinct_type():
    u = Bivector([1.0, 0.0, 0.0], 3)
    p = MomentumBivector([1.0, 0.0, 0.0], 3)
    assert u != p
    with pytest.raises(TypeError):
        u + p


@pytest.mark.parametrize("dim", [2, 3, 4])
def test_wedge_against_index_loop(dim):
    rng = np.random.default_rng(20 + dim)
    v = rng.normal(size=dim)
    u = rng.normal(size=dim)
    w = wedge(v, u)
    expected = np.outer(v, u) - np.outer(u, v)
    assert np.array_equal(w.full, expected)
    # antisymmetry in the arguments is exact (float subtraction negates exactly)
    assert wedge(u, v) == -w
    assert np.all(wedge(v, v).slots == 0.0)


def test_wedge_bilinearity():
    rng = np.random.default_rng(3)
    v, u, z = rng.normal(size=(3, 4))
    a, b = 0.7, -1.3
    lhs = wedge(a * v + b * z, u)
    rhs = a * wedge(v, u) + b * wedge(z, u)
    np.testing.assert_allclose(lhs.slots, rhs.slots, rtol=1e-14, atol=1e-14)


def test_wedge_slots_shape_mismatch():
    with pytest.raises(ValueError):
        wedge_slots(np.ones(3), np.ones(4))


@pytest.mark.parametrize("dim", [2, 3, 4])
def test_contract_against_index_loop(dim):
    rng = np.random.default_rng(30 + dim)
    u = Bivector(rng.normal(size=pair_count(dim)), dim)
    eta = rng.normal(size=dim)
    full = u.full
    expected = np.array([sum(eta[m] * full[m, n] for m in range(dim)) for n in range(dim)])
    np.testing.assert_allclose(contract(eta, u), expected, rtol=1e-14, atol=1e-14)


def test_contract_frozen_example():
    # dx^2 into e1 ^ e2 gives -e1 (indices written 1-based)
    u = wedge(np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]))
    eta = np.array([0.0, 1.0, 0.0])
    np.testing.assert_array_equal(contract(eta, u), [-1.0, 0.0, 0.0])


def test_contract_linearity_and_mismatch():
    rng = np.random.default_rng(4)
    u = Bivector(rng.normal(size=6), 4)
    eta, xi = rng.normal(size=(2, 4))
    lhs = contract(2.0 * eta - 0.5 * xi, u)
    rhs = 2.0 * contract(eta, u) - 0.5 * contract(xi, u)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-14, atol=1e-14)
    with pytest.raises(ValueError):
        contract(np.ones(3), u)


def test_metric_validation():
    with pytest.raises(ValueError):
        Metric(np.array([[1.0, 0.5], [0.0, 1.0]]), "euclidean")  # not symmetric
    with pytest.raises(ValueError):
        Metric(np.ones((2, 2)), "euclidean")  # degenerate
    with pytest.raises(ValueError):
        Metric(np.eye(3), "lorentz")  # wrong signature tag
    with pytest.raises(ValueError):
        Metric(-np.eye(3), "euclidean")
    with pytest.raises(ValueError):
        Metric(np.eye(3), "riemann")  # unknown tag


def test_metric_constructors_and_inverse():
    g = Metric.minkowski(4)
    assert g.signature == "lorentz"
    assert g.dim == 4
    np.testing.assert_array_equal(g.matrix @ g.inverse, np.eye(4))
    rng = np.random.default_rng(5)
    m = random_spd(rng, 3)
    h = Metric.from_matrix(m)
    assert h.signature == "euclidean"
    np.testing.assert_allclose(h.matrix @ h.inverse, np.eye(3), atol=1e-12)


@pytest.mark.parametrize("dim", [2, 3, 4])
def test_induced_fiber_metric_index_identity(dim):
    rng = np.random.default_rng(40 + dim)
    g = Metric.from_matrix(random_spd(rng, dim))
    h = induced_fiber_metric(g)
    gm = g.matrix
    for m in range(dim):
        for n in range(dim):
            for k in range(dim):
                for l in range(dim):
                    assert h.array[m, n, k, l] == gm[m, k] * gm[n, l] - gm[m, l] * gm[n, k]


def test_fiber_metric_symmetry_validation():
    bad = np.zeros((3, 3, 3, 3))
    bad[0, 1, 0, 1] = 1.0  # missing the antisymmetric partners
    with pytest.raises(ValueError):
        FiberMetric(bad)


def test_fiber_metric_frozen_components():
    h = induced_fiber_metric(Metric.euclidean(3))
    assert h.array[0, 1, 0, 1] == 1.0
    assert h.array[0, 1, 1, 0] == -1.0
    np.testing.assert_array_equal(h.slot_matrix, np.eye(3))
    hm = induced_fiber_metric(Metric.minkowski(4))
    assert hm.array[0, 1, 0, 1] == -1.0

    # dual of diag(2, 2, 2): inverse metric diag(1/2), minors 1/4
    hd = dual_fiber_metric(Metric.from_matrix(2.0 * np.eye(3)))
    assert hd.array[0, 1, 0, 1] == 0.25


@pytest.mark.parametrize("dim", [2, 3, 4])
def test_slot_matrix_is_the_minor_matrix(dim):
    rng = np.random.default_rng(50 + dim)
    g = random_spd(rng, dim)
    h = FiberMetric.from_point_metric(g)
    for i, (a, b) in enumerate(index_pairs(dim)):
        for j, (c, d) in enumerate(index_pairs(dim)):
            minor = np.linalg.det(g[np.ix_([a, b], [c, d])])
            assert abs(h.slot_matrix[i, j] - minor) < 1e-12 * max(1.0, abs(minor))


@pytest.mark.parametrize("dim", [2, 3, 4])
def test_dual_slot_matrix_inverts_primal(dim):
    # Cauchy-Binet: the minor matrix of the inverse is the inverse minor matrix
    rng = np.random.default_rng(60 + dim)
    g = Metric.from_matrix(random_spd(rng, dim))
    prod = dual_fiber_metric(g).slot_matrix @ induced_fiber_metric(g).slot_matrix
    np.testing.assert_allclose(prod, np.eye(pair_count(dim)), atol=1e-10)


@pytest.mark.parametrize("dim", [2, 3, 4])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_scalar_product_gram_oracle(dim, seed):
    # (v^u | v^u) = 4 * (|v|^2 |u|^2 - <v,u>^2), the Gram determinant, for
    # any point metric; the 4 pins the unrestricted-sum convention.
    rng = np.random.default_rng(100 * dim + seed)
    g = Metric.from_matrix(random_spd(rng, dim))
    h = induced_fiber_metric(g)
    v, u = rng.normal(size=(2, dim))
    gram = np.linalg.det(np.array([v, u]) @ g.matrix @ np.array([v, u]).T)
    got = scalar_product(h, wedge(v, u), wedge(v, u))
    np.testing.assert_allclose(got, 4.0 * gram, rtol=1e-12)


def test_scalar_product_frozen_values():
    e = np.eye(3)
    w = wedge(e[0], e[1])
    h = induced_fiber_metric(Metric.euclidean(3))
    assert scalar_product(h, w, w) == 4.0

    e4 = np.eye(4)
    w01 = wedge(e4[0], e4[1])
    hm = induced_fiber_metric(Metric.minkowski(4))
    assert scalar_product(hm, w01, w01) == -4.0


def test_scalar_product_bilinear_symmetric():
    rng = np.random.default_rng(7)
    g = Metric.from_matrix(random_spd(rng, 4))
    h = induced_fiber_metric(g)
    u = Bivector(rng.normal(size=6), 4)
    w = Bivector(rng.normal(size=6), 4)
    z = Bivector(rng.normal(size=6), 4)
    assert scalar_product(h, u, w) == pytest.approx(scalar_product(h, w, u), rel=1e-14)
    lhs = scalar_product(h, u + 2.0 * z, w)
    rhs = scalar_product(h, u, w) + 2.0 * scalar_product(h, z, w)
    assert lhs == pytest.approx(rhs, rel=1e-12)
    with pytest.raises(ValueError):
        scalar_product(h, u, Bivector([1.0], 2))


def test_momentum_scalar_product_is_quarter_of_full():
    rng = np.random.default_rng(8)
    g = Metric.from_matrix(random_spd(rng, 3))
    h = induced_fiber_metric(g)
    slots = rng.normal(size=3)
    w = Bivector(slots, 3)
    p = MomentumBivector(slots, 3)
    assert momentum_scalar_product(h, p, p) == pytest.approx(
        scalar_product(h, w, w) / 4.0, rel=1e-14
    )


def test_antisymmetric_from_slots_vectorized():
    rng = np.random.default_rng(9)
    slots = rng.normal(size=(5, 7, 3))
    full = antisymmetric_from_slots(slots, 3)
    assert full.shape == (5, 7, 3, 3)
    assert np.array_equal(full, -np.swapaxes(full, -1, -2))
    assert np.array_equal(full[2, 3], Bivector(slots[2, 3], 3).full)
