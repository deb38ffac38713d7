import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from polydist import tensor


def finite_matrices(n):
    return arrays(np.float64, (n, n), elements=st.floats(-10, 10, allow_nan=False, width=64))


def test_det_examples():
    assert tensor.det(np.eye(2)) == 1
    assert tensor.det(np.diag([2.0, 1.0])) == 2
    assert tensor.det(np.diag([1.0, 2.0, 3.0])) == 6


def test_adjugate_examples(rng):
    assert np.array_equal(tensor.adjugate(np.eye(3)), np.eye(3))
    assert np.array_equal(tensor.adjugate(np.diag([2.0, 1.0])), np.diag([1.0, 2.0]))
    a, b, c, d = 1.5, -2.0, 0.25, 3.0
    assert np.array_equal(tensor.adjugate([[a, b], [c, d]]), [[d, -b], [-c, a]])
    for _ in range(50):
        F = rng.normal(size=(3, 3))
        A = tensor.adjugate(F)
        err = np.linalg.norm(F @ A - tensor.det(F) * np.eye(3))
        assert err < 1e-12 * np.linalg.norm(F) * np.linalg.norm(A)


def test_cofactor_is_derivative_of_det(rng):
    F = rng.normal(size=(3, 3))
    h = 1e-6
    fd = np.zeros((3, 3))
    for i in range(3):
        for j in range(3):
            E = np.zeros((3, 3))
            E[i, j] = h
            fd[i, j] = (tensor.det(F + E) - tensor.det(F - E)) / (2 * h)
    assert np.allclose(fd, tensor.cofactor(F), rtol=1e-8, atol=1e-9)


def test_frobenius_examples():
    assert tensor.frobenius(np.eye(3)) == pytest.approx(math.sqrt(3), rel=1e-15)
    assert tensor.frobenius(np.diag([2.0, 1.0])) == pytest.approx(math.sqrt(5), rel=1e-15)
    assert tensor.frobenius(np.zeros((2, 2))) == 0


def test_spectrum_examples():
    assert np.allclose(tensor.singular_spectrum(np.eye(3)), [1, 1, 1], rtol=0, atol=1e-15)
    assert np.allclose(tensor.singular_spectrum(np.diag([3.0, -2.0])), [3, 2], rtol=1e-15)


@pytest.mark.parametrize("n", [2, 3])
def test_spectrum_against_lapack(rng, n):
    F = rng.normal(size=(5000, n, n)) * np.exp(rng.normal(size=5000))[:, None, None]
    s = tensor.singular_spectrum(F)
    ref = np.linalg.svd(F, compute_uv=False)
    assert np.max(np.abs(s - ref) / ref[:, :1]) < 1e-12
    assert np.all(np.diff(s, axis=-1) <= 0)


@pytest.mark.parametrize("n", [2, 3])
def test_spectrum_consistency(rng, n):
    F = rng.normal(size=(5000, n, n))
    s = tensor.singular_spectrum(F)
    fro2 = np.sum(F**2, axis=(-2, -1))
    assert np.max(np.abs(np.sum(s**2, axis=-1) - fro2) / fro2) < 1e-10
    J = np.abs(np.linalg.det(F))
    assert np.max(np.abs(np.prod(s, axis=-1) - J) / J) < 1e-10


def test_spectrum_repeated_values():
    # near-degenerate spectra exercise the eigensolver fallback
    for F in (np.diag([2.0, 2.0, 2.0]), np.diag([2.0, 2.0, 1.0]), np.diag([3.0, 1.0, 1.0]), np.diag([1.0, 1e-9, 0.0])):
        assert np.allclose(tensor.singular_spectrum(F), np.sort(np.abs(np.diag(F)))[::-1], rtol=1e-12, atol=1e-15)


def test_distortion_examples():
    dv = tensor.distortion(np.eye(2))
    assert dv.outer == 2 and dv.inner == 2
    dv = tensor.distortion(np.zeros((3, 3)))
    assert dv.outer == 1 and dv.inner == 1
    dv = tensor.distortion(np.diag([1.0, 1.0, 0.0]))
    assert dv.outer == 1 and dv.inner == math.inf
    dv = tensor.distortion(np.diag([1.0, 0.0, 0.0]))
    assert dv.outer == 1 and dv.inner == 1  # rank one: Adj F = 0


def test_distortion_inverted_flag():
    dv = tensor.distortion(np.diag([1.0, -1.0]))
    assert dv.inverted and math.isnan(dv.outer) and math.isnan(dv.inner)
    assert dv.jacobian == -1


def test_distortion_identity_3d():
    dv = tensor.distortion(np.eye(3))
    assert dv.outer == pytest.approx(3 * math.sqrt(3), rel=1e-15)
    assert dv.inner == pytest.approx(3 * math.sqrt(3), rel=1e-15)
    assert dv.adj_norm == pytest.approx(math.sqrt(3), rel=1e-15)


def test_operator_functions():
    assert tensor.operator_outer(np.zeros((2, 2)), 2.5) == 0
    assert tensor.operator_outer(np.eye(3), 3) == pytest.approx(math.sqrt(3), rel=1e-15)
    assert tensor.operator_inner(np.zeros((3, 3)), 1.7) == 0
    assert tensor.operator_inner(np.eye(2), 2) == pytest.approx(math.sqrt(2), rel=1e-15)
    with pytest.raises(ValueError):
        tensor.operator_outer(np.eye(2), 0.5)


@pytest.mark.parametrize("n", [2, 3])
def test_operator_functions_recover_distortion(rng, n):
    F = rng.normal(size=(200, n, n))
    F[tensor.det(F) < 0, 0] *= -1
    dv = tensor.distortion(F)
    assert np.allclose(tensor.operator_outer(F, n) ** n, dv.outer, rtol=1e-12, atol=0)
    assert np.allclose(tensor.operator_inner(F, n) ** n, dv.inner, rtol=1e-12, atol=0)


def test_invalid_input():
    with pytest.raises(ValueError):
        tensor.det(np.eye(4))
    with pytest.raises(ValueError):
        tensor.det([[1.0, np.nan], [0.0, 1.0]])


def test_inner_distortion_grad_fd(rng):
    for n in (2, 3):
        F = rng.normal(size=(n, n))
        if tensor.det(F) < 0:
            F[0] *= -1
        G = tensor.inner_distortion_grad(F)
        h = 1e-6
        fd = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                E = np.zeros((n, n))
                E[i, j] = h
                fd[i, j] = (tensor.distortion(F + E).inner - tensor.distortion(F - E).inner) / (2 * h)
        assert np.allclose(G, fd, rtol=1e-6, atol=1e-7 * np.max(np.abs(fd)))
    with pytest.raises(ValueError):
        tensor.inner_distortion_grad(np.diag([1.0, -1.0]))


@given(finite_matrices(3))
def test_adjugate_identity_property(F):
    A = tensor.adjugate(F)
    err = np.linalg.norm(F @ A - tensor.det(F) * np.eye(3))
    assert err <= 1e-12 * (1 + np.linalg.norm(F)) * (1 + np.linalg.norm(A))


@given(finite_matrices(2))
def test_adjugate_identity_property_2d(F):
    A = tensor.adjugate(F)
    err = np.linalg.norm(F @ A - tensor.det(F) * np.eye(2))
    assert err <= 1e-12 * (1 + np.linalg.norm(F)) * (1 + np.linalg.norm(A))


@given(st.sampled_from([2, 3]), st.integers(0, 2**32 - 1))
def test_two_sided_inequality_property(n, seed):
    r = np.random.default_rng(seed)
    F = r.normal(size=(n, n))
    if tensor.det(F) < 0:
        F[0] *= -1
    if tensor.det(F) <= 1e-8:
        return
    dv = tensor.distortion(F)
    assert dv.inner ** (1 / (n - 1)) <= dv.outer * (1 + 1e-10)
    assert dv.outer <= dv.inner ** (n - 1) * (1 + 1e-10)
    if n == 2:
        assert dv.outer == dv.inner


@given(
    st.sampled_from([2, 3]),
    st.integers(0, 2**32 - 1),
    st.floats(0.01, 100),
    st.floats(1, 10),
)
def test_operator_homogeneity_property(n, seed, lam, p):
    r = np.random.default_rng(seed)
    F = r.normal(size=(n, n))
    if tensor.det(F) < 0:
        F[0] *= -1
    lhs = tensor.operator_outer(lam * F, p)
    rhs = lam ** (1 - n / p) * tensor.operator_outer(F, p)
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_distortion_is_vectorized(rng):
    F = rng.normal(size=(4, 5, 3, 3))
    dv = tensor.distortion(F)
    assert dv.outer.shape == (4, 5)
    assert tensor.singular_spectrum(F).shape == (4, 5, 3)
