"""
Small-matrix algebra for 2x2 and 3x3 deformation gradients.

Every routine accepts a single matrix of shape ``(n, n)`` or a stack of
shape ``(..., n, n)`` with ``n in {2, 3}`` and works elementwise over the
leading axes. Scalars come back as Python floats for single matrices and
as arrays for stacks.

Pointwise distortion conventions
--------------------------------
For ``J = det F``:

* ``J > 0``: ``outer = |F|^n / J`` and ``inner = |Adj F|^n / J^(n-1)``.
* ``J = 0``: ``outer = 1``; ``inner = 1`` if ``Adj F = 0`` and ``inf``
  otherwise.
* ``J < 0``: both are ``nan`` (not applicable) and ``inverted`` is set.

Note that the ``J = 0`` convention for ``outer`` is kept verbatim even
though finite distortion already forces ``F = 0`` on the zero set of
the Jacobian.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DistortionValues",
    "as_matrix",
    "identity",
    "det",
    "adjugate",
    "cofactor",
    "frobenius",
    "singular_spectrum",
    "distortion",
    "operator_outer",
    "operator_inner",
    "inner_distortion_grad",
]

# 1 + cos(3 phi) below this switches the 3x3 eigenvalue solve to LAPACK;
# acos is ill-conditioned next to -1 and loses ~sqrt(eps) there.
_TRIG_FALLBACK = 1e-6


def as_matrix(F):
    """Validate and return ``F`` as a float array of shape (..., n, n)."""
    F = np.asarray(F, dtype=float)
    if F.ndim < 2 or F.shape[-1] != F.shape[-2] or F.shape[-1] not in (2, 3):
        raise ValueError(f"expected (..., n, n) with n in {{2, 3}}, got shape {F.shape}")
    if not np.all(np.isfinite(F)):
        raise ValueError("matrix entries must be finite")
    return F


def identity(n):
    return np.eye(n)


def _out(x):
    if np.ndim(x) == 0:
        return float(x)
    return x


def _det(F):
    if F.shape[-1] == 2:
        return F[..., 0, 0] * F[..., 1, 1] - F[..., 0, 1] * F[..., 1, 0]
    a, b, c = F[..., 0, 0], F[..., 0, 1], F[..., 0, 2]
    d, e, f = F[..., 1, 0], F[..., 1, 1], F[..., 1, 2]
    g, h, i = F[..., 2, 0], F[..., 2, 1], F[..., 2, 2]
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)


def _adj(F):
    A = np.empty_like(F)
    if F.shape[-1] == 2:
        A[..., 0, 0] = F[..., 1, 1]
        A[..., 0, 1] = -F[..., 0, 1]
        A[..., 1, 0] = -F[..., 1, 0]
        A[..., 1, 1] = F[..., 0, 0]
        return A
    # Adj F = transpose of the cofactor matrix
    for i in range(3):
        i1, i2 = (i + 1) % 3, (i + 2) % 3
        for j in range(3):
            j1, j2 = (j + 1) % 3, (j + 2) % 3
            A[..., j, i] = F[..., i1, j1] * F[..., i2, j2] - F[..., i1, j2] * F[..., i2, j1]
    return A


def _fro2(F):
    sq = np.square(F).reshape(F.shape[:-2] + (-1,))
    # summing sorted squares makes the norm invariant under entry permutation,
    # so |Adj F| == |F| holds bit-exactly in 2D
    return np.sort(sq, axis=-1).sum(axis=-1)


def _fro(F):
    return np.sqrt(_fro2(F))


def det(F):
    """Determinant by closed form."""
    return _out(_det(as_matrix(F)))


def adjugate(F):
    """Adjugate (transposed cofactor matrix), ``F @ adjugate(F) == det(F) * I``."""
    return _adj(as_matrix(F))


def cofactor(F):
    """Cofactor matrix, the derivative of ``det`` with respect to ``F``."""
    return np.swapaxes(_adj(as_matrix(F)), -1, -2)


def frobenius(F):
    return _out(_fro(as_matrix(F)))


def _sym3_lambda_max(C):
    """Largest eigenvalue of stacked symmetric 3x3 matrices."""
    C = C.reshape((-1, 3, 3))
    q = np.trace(C, axis1=-2, axis2=-1) / 3.0
    B = C - q[:, None, None] * np.eye(3)
    p = np.sqrt(np.einsum("kij,kij->k", B, B) / 6.0)
    lam = q.copy()
    scale = np.maximum(np.abs(q), np.max(np.abs(C), axis=(-2, -1)))
    live = p > 1e-14 * scale
    if np.any(live):
        Bn = B[live] / p[live, None, None]
        r = np.clip(_det(Bn) / 2.0, -1.0, 1.0)
        lam[live] = q[live] + 2.0 * p[live] * np.cos(np.arccos(r) / 3.0)
        bad = np.flatnonzero(live)[1.0 + r < _TRIG_FALLBACK]
        if bad.size:
            lam[bad] = np.linalg.eigvalsh(C[bad])[:, -1]
    return np.maximum(lam, 0.0)


def _spectrum(F):
    n = F.shape[-1]
    lead = F.shape[:-2]
    absJ = np.abs(_det(F))
    if n == 2:
        a, b = F[..., 0, 0], F[..., 0, 1]
        c, d = F[..., 1, 0], F[..., 1, 1]
        s1 = 0.5 * (np.hypot(a + d, c - b) + np.hypot(a - d, b + c))
        with np.errstate(invalid="ignore", divide="ignore"):
            s2 = np.where(s1 > 0, absJ / s1, 0.0)
        return np.stack([s1, s2], axis=-1)
    Ff = F.reshape((-1, 3, 3))
    A = _adj(Ff)
    s1 = np.sqrt(_sym3_lambda_max(np.swapaxes(Ff, -1, -2) @ Ff))
    t1 = np.sqrt(_sym3_lambda_max(np.swapaxes(A, -1, -2) @ A))
    Jf = absJ.reshape(-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        s2 = np.where(s1 > 0, t1 / s1, 0.0)
        s3 = np.where(t1 > 0, Jf / t1, 0.0)
    # t1/s1 can round a hair above s1 when the two leading values coincide
    s2 = np.minimum(s2, s1)
    s3 = np.minimum(s3, s2)
    return np.stack([s1, s2, s3], axis=-1).reshape(lead + (3,))


def singular_spectrum(F):
    """
    Singular values of ``F`` in descending order.

    The largest singular values of ``F`` and of ``Adj F`` come from the
    closed-form (trigonometric) largest root of the characteristic cubic;
    the remaining ones follow from ``s1*s2 = |Adj F|_2`` and
    ``s1*s2*s3 = |det F|``, which keeps small singular values accurate
    relative to ``det F``.
    """
    return _spectrum(as_matrix(F))


@dataclass(frozen=True)
class DistortionValues:
    """Outer/inner distortion of a matrix (or stack) with the degenerate conventions."""

    outer: object
    inner: object
    jacobian: object
    adj_norm: object
    inverted: object


def distortion(F):
    F = as_matrix(F)
    n = F.shape[-1]
    J = _det(F)
    fn2 = _fro2(F)
    an2 = _fro2(_adj(F))
    pos = J > 0
    safe = np.where(pos, J, 1.0)
    outer = np.where(pos, fn2 ** (n / 2) / safe, np.where(J == 0, 1.0, np.nan))
    inner_zero = np.where(an2 == 0, 1.0, np.inf)
    inner = np.where(pos, an2 ** (n / 2) / safe ** (n - 1), np.where(J == 0, inner_zero, np.nan))
    return DistortionValues(
        outer=_out(outer),
        inner=_out(inner),
        jacobian=_out(J),
        adj_norm=_out(np.sqrt(an2)),
        inverted=_out(J < 0) if np.ndim(J) else bool(J < 0),
    )


def operator_outer(F, p):
    """``|F| / |det F|^(1/p)`` off the zero set of the Jacobian, 0 on it."""
    if p < 1:
        raise ValueError("p must be >= 1")
    F = as_matrix(F)
    J = np.abs(_det(F))
    nz = J > 0
    val = _fro(F) / np.where(nz, J, 1.0) ** (1.0 / p)
    return _out(np.where(nz, val, 0.0))


def operator_inner(F, p):
    """``|Adj F| / |det F|^((n-1)/p)`` off the zero set, 0 on it."""
    if p < 1:
        raise ValueError("p must be >= 1")
    F = as_matrix(F)
    n = F.shape[-1]
    J = np.abs(_det(F))
    nz = J > 0
    val = _fro(_adj(F)) / np.where(nz, J, 1.0) ** ((n - 1.0) / p)
    return _out(np.where(nz, val, 0.0))


def inner_distortion_grad(F):
    """
    Derivative of the inner distortion ``|Adj F|^n / J^(n-1)`` w.r.t. ``F``.

    Only defined for ``det F > 0``; raises otherwise.
    """
    F = as_matrix(F)
    n = F.shape[-1]
    J = _det(F)
    if np.any(J <= 0):
        raise ValueError("inner distortion gradient needs det F > 0")
    C = np.swapaxes(F, -1, -2) @ F
    trC = np.trace(C, axis1=-2, axis2=-1)
    if n == 2:
        I2 = trC
        dI2 = 2.0 * F
    else:
        I2 = 0.5 * (trC**2 - np.einsum("...ij,...ij->...", C, C))
        dI2 = 2.0 * (F * trC[..., None, None] - F @ C)
    I2 = np.maximum(I2, 0.0)
    a = np.sqrt(I2)
    cof = np.swapaxes(_adj(F), -1, -2)
    t1 = 0.5 * n * a ** (n - 2) / J ** (n - 1)
    t2 = (n - 1) * a**n / J**n
    return t1[..., None, None] * dI2 - t2[..., None, None] * cof
