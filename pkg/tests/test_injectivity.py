import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polydist import injectivity as inj
from polydist import mesh as M
from polydist.sequences import PlanarShear, induced_deformation, planar_mesh


def perturbed(m, amp, seed):
    r = np.random.default_rng(seed)
    Y = m.vertices.copy()
    free = ~m.boundary_mask()
    Y[free] += amp * r.normal(size=(int(free.sum()), m.dim))
    return M.Deformation(Y)


def test_identity_passes():
    m = M.make_grid(10, 10)
    rep = inj.ciarlet_necas(m, M.identity_deformation(m))
    assert rep.lhs == pytest.approx(1.0, abs=1e-14) and rep.rhs == pytest.approx(1.0, abs=1e-14)
    assert rep.verdict and rep.pairs == [] and rep.total_overlap == 0


def test_scaling():
    m = M.make_grid(6, 6)
    rep = inj.ciarlet_necas(m, M.affine_deformation(m, 2 * np.eye(2)))
    assert rep.lhs == pytest.approx(4.0) and rep.rhs == pytest.approx(4.0) and rep.verdict


def test_fold_fails_with_ratio_two():
    m, phi = inj.fold_fixture(5)
    rep = inj.ciarlet_necas(m, phi)
    assert rep.lhs == pytest.approx(4.0, rel=1e-14)
    assert rep.rhs == pytest.approx(2.0, rel=1e-12)
    assert not rep.verdict
    tri_area = 0.5 * (1 / 5) * (2 / 10)
    assert len(rep.pairs) == m.n_simplices // 2
    for i, j, area in rep.pairs:
        assert j == i + m.n_simplices // 2  # each left triangle lands on its mirror
        assert abs(area - tri_area) < 1e-10
    assert rep.total_overlap == pytest.approx(2.0, rel=1e-12)


def test_negative_jacobian_rejected():
    m = M.make_grid(2, 2)
    with pytest.raises(ValueError, match="negative Jacobian"):
        inj.ciarlet_necas(m, M.affine_deformation(m, np.diag([-1.0, 1.0])))


def test_overlap_area_basics():
    a = np.array([[0, 0], [1, 0], [0, 1]], float)
    b = np.array([[1, 0], [1, 1], [0, 1]], float)
    assert inj.overlap_area(a, b) == 0.0  # shared edge
    assert inj.overlap_area(a, a) == pytest.approx(0.5)
    c = a + [0.5, 0]
    assert inj.overlap_area(a, c) == pytest.approx(0.125)
    assert inj.overlap_area(a[::-1], c) == inj.overlap_area(c, a[::-1])


@given(st.integers(0, 2**32 - 1))
def test_overlap_symmetry(seed):
    r = np.random.default_rng(seed)
    a, b = r.normal(size=(3, 2)), r.normal(size=(3, 2))
    assert inj.overlap_area(a, b) == inj.overlap_area(b, a)
    def area(t):
        return abs(np.linalg.det(np.column_stack([t[1] - t[0], t[2] - t[0]]))) / 2

    assert inj.overlap_area(a, b) <= min(area(a), area(b)) + 1e-12


def test_overlap_against_monte_carlo(rng):
    # independent oracle: point sampling with barycentric tests
    a = np.array([[0, 0], [2, 0.3], [0.4, 1.7]])
    b = np.array([[1, -0.5], [1.5, 1.5], [-0.2, 0.8]])
    pts = rng.uniform([-0.5, -0.6], [2.1, 1.8], size=(400_000, 2))

    def inside(tri, p):
        T = np.column_stack([tri[1] - tri[0], tri[2] - tri[0]])
        lam = np.linalg.solve(T, (p - tri[0]).T).T
        return (lam >= 0).all(axis=1) & (lam.sum(axis=1) <= 1)

    box = 2.6 * 2.4
    mc = box * np.mean(inside(a, pts) & inside(b, pts))
    assert inj.overlap_area(a, b) == pytest.approx(mc, abs=4 * box * math.sqrt(0.1 / 400_000))


def test_union_area_against_raster():
    m, phi = inj.fold_fixture(3)
    Y = phi.images.copy()
    Y[: m.n_vertices // 2, 0] += 0.13  # shift the left copy so the halves overlap partially
    phi = M.Deformation(Y)
    exact = inj.ciarlet_necas(m, phi)
    raster = inj.ciarlet_necas(m, phi, method="raster", resolution=1e-3)
    assert abs(exact.rhs - raster.rhs) <= raster.error_bound
    assert exact.rhs == pytest.approx(2.26, rel=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_cn_identity_for_injective_maps(seed):
    m = M.make_grid(6, 6)
    phi = perturbed(m, 0.02, seed)
    if np.any(M.element_jacobians(m, phi) <= 0):
        return
    assert inj.overlap_pairs(m, phi) == []
    rep = inj.ciarlet_necas(m, phi)
    assert abs(rep.lhs - rep.rhs) <= rep.error_bound
    assert rep.sum_image_volume - rep.union_volume <= 2 * rep.total_overlap + rep.error_bound


@given(st.integers(0, 2**32 - 1), st.floats(0, 2 * math.pi))
def test_rotation_invariance(seed, angle):
    m, phi = inj.fold_fixture(2)
    r = np.random.default_rng(seed)
    Y = phi.images + 0.02 * r.normal(size=phi.images.shape)
    phi = M.Deformation(Y)
    if np.any(M.element_jacobians(m, phi) < 0):
        return
    R = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
    a = inj.ciarlet_necas(m, phi)
    b = inj.ciarlet_necas(m, M.Deformation(Y @ R.T))
    for f in ("lhs", "rhs", "total_overlap"):
        assert getattr(b, f) == pytest.approx(getattr(a, f), rel=1e-10)
    assert [p[:2] for p in a.pairs] == [p[:2] for p in b.pairs]
    for p, q in zip(a.pairs, b.pairs):
        assert q[2] == pytest.approx(p[2], rel=1e-10, abs=1e-14)


def test_consistency_on_overlapping_map():
    m, phi = inj.fold_fixture(4)
    rep = inj.ciarlet_necas(m, phi)
    assert rep.sum_image_volume - rep.union_volume <= 2 * rep.total_overlap + rep.error_bound


def test_raster_3d():
    b = M.make_box_grid(3, 3, 3)
    rep = inj.ciarlet_necas(b, M.identity_deformation(b))
    assert rep.method == "raster" and rep.pairs is None
    assert abs(rep.lhs - rep.rhs) <= rep.error_bound and rep.verdict
    with pytest.raises(ValueError):
        inj.overlap_pairs(b, M.identity_deformation(b))


def test_jacobian_positivity():
    m = M.make_grid(4, 4)
    rep = inj.jacobian_positivity(m, M.identity_deformation(m))
    assert rep.min_J == pytest.approx(1.0) and rep.verdict and rep.zero_elements == []
    rep = inj.jacobian_positivity(m, M.affine_deformation(m, 2 * np.eye(2)))
    assert rep.min_J == pytest.approx(4.0)


def test_positivity_along_planar_family():
    m = planar_mesh(4)
    mins = [inj.jacobian_positivity(m, induced_deformation(PlanarShear(k), m), eps=1e-6).min_J for k in (1, 4, 64, 1024)]
    assert all(b < a for a, b in zip(mins, mins[1:]))
    assert mins[-1] == pytest.approx(1 / 1024, rel=1e-9)  # the element next to x2 = 0 has J = 2 xi(0)
    big = inj.jacobian_positivity(m, induced_deformation(PlanarShear(2**20), m), eps=1e-6)
    assert not big.verdict
    limit = inj.jacobian_positivity(m, induced_deformation(PlanarShear(math.inf), m))
    assert not limit.verdict and limit.min_J == 0
