"""
Stored-energy models, their convex representatives on minors, and
sampling probes for polyconvexity and coercivity.

Models
------
``Ogden``
    ``a sum s_i^p + b sum t_i^q + c J^r + d J^-m`` in 3D, where ``s_i`` are
    the singular values of ``F`` and ``t_i`` those of ``Adj F``. Requires
    ``a, b, c, d > 0``, ``p, q > 3``, ``r > 1`` and ``m > 2q/(q-3)``.
    Equal to ``+inf`` for ``J <= 0``.
``Ogden2D``
    Planar analogue ``a |F|^p + c J^r + d J^-m``. The adjugate term is
    dropped because ``|Adj F| = |F|`` in 2D. This model is an extension
    for desk-scale planar runs, not one of the reference energies.
``NeoTrace``
    ``a sum s_i^3``; polyconvex and coercive but with no barrier as
    ``J -> 0+``.
``SaintVenantKirchhoff``
    ``lam/2 (tr E)^2 + mu tr(E^2)`` with ``E = (F^T F - I)/2``. Not
    polyconvex; used as a negative control.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import tensor

__all__ = [
    "EnergyModel",
    "Ogden",
    "Ogden2D",
    "NeoTrace",
    "SaintVenantKirchhoff",
    "MinorVector",
    "ProbeReport",
    "CoercivityReport",
    "model_from_dict",
    "eval_W",
    "grad_W",
    "minors",
    "eval_G",
    "polyconvexity_probe",
    "coercivity_margin",
]


@dataclass(frozen=True)
class MinorVector:
    """
    Minors of an n x n matrix grouped by order.

    ``second_order`` holds the entries of ``Adj F`` and is ``None`` in 2D,
    where the only minor of order 2 is the determinant. The fields may be
    stacked along leading axes. Interpolating two minor vectors gives a
    point of the convex set that is generally not the minors of any matrix.
    """

    dim: int
    first_order: np.ndarray
    second_order: np.ndarray | None
    determinant: np.ndarray

    def flat(self):
        parts = [self.first_order.reshape(self.first_order.shape[:-2] + (-1,))]
        if self.second_order is not None:
            parts.append(self.second_order.reshape(self.second_order.shape[:-2] + (-1,)))
        parts.append(np.asarray(self.determinant)[..., None])
        return np.concatenate(parts, axis=-1)

    def __len__(self):
        # C(2n, n) - 1 entries: 5 in 2D, 19 in 3D
        return self.flat().shape[-1]

    def combine(self, other, t):
        """Convex combination ``(1 - t) self + t other`` (``t`` may be an array)."""
        t = np.asarray(t, dtype=float)
        tm = t[..., None, None]
        second = None
        if self.second_order is not None:
            second = (1 - tm) * self.second_order + tm * other.second_order
        return MinorVector(
            dim=self.dim,
            first_order=(1 - tm) * self.first_order + tm * other.first_order,
            second_order=second,
            determinant=(1 - t) * np.asarray(self.determinant) + t * np.asarray(other.determinant),
        )


def minors(F):
    F = tensor.as_matrix(F)
    n = F.shape[-1]
    return MinorVector(
        dim=n,
        first_order=F.copy(),
        second_order=tensor.adjugate(F) if n == 3 else None,
        determinant=np.asarray(tensor._det(F)),
    )


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def _svd(F):
    U, s, Vt = np.linalg.svd(F)
    return U, s, Vt


def _from_singular(U, g, Vt):
    return (U * g[..., None, :]) @ Vt


class EnergyModel:
    """Base class; subclasses are frozen dataclasses."""

    kind = ""
    dim = None  # None: any of 2, 3

    def _check(self, F):
        F = tensor.as_matrix(F)
        if self.dim is not None and F.shape[-1] != self.dim:
            raise ValueError(f"{self.kind} is defined for {self.dim}x{self.dim} matrices")
        return F

    def W(self, F):
        F = self._check(F)
        return _scalar(self._W(F))

    def dW(self, F):
        F = self._check(F)
        return self._dW(F)

    def G(self, mv):
        if self.dim is not None and mv.dim != self.dim:
            raise ValueError(f"{self.kind} is defined for dim {self.dim}")
        if np.any(np.asarray(mv.determinant) < 0):
            raise ValueError("minor vector outside D: negative determinant")
        return _scalar(self._G(mv))

    # W = main + rest; the coercivity probe tests main >= alpha * growth
    def _coercive_parts(self, F):
        W = self._W(F)
        return W, tensor._fro2(F) ** (F.shape[-1] / 2), np.zeros_like(W)

    has_convex_representative = True

    def coercivity_alpha(self, n):
        """Theoretical constant in ``W >= alpha * growth + rest``; None if unknown."""
        return None

    def to_dict(self):
        d = {"kind": self.kind}
        for k in self.__dataclass_fields__:
            d[k] = getattr(self, k)
        return d


def _barrier(J, c, r, d, m):
    pos = J > 0
    Js = np.where(pos, J, 1.0)
    with np.errstate(over="ignore"):
        return np.where(pos, c * Js**r + d * Js ** (-m), np.inf)


@dataclass(frozen=True)
class Ogden(EnergyModel):
    a: float = 1.0
    b: float = 1.0
    c: float = 1.0
    d: float = 1.0
    p: float = 4.0
    q: float = 4.0
    r: float = 2.0
    m: float = 9.0

    kind = "ogden"
    dim = 3

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            if not getattr(self, name) > 0:
                raise ValueError(f"Ogden: {name} must be > 0")
        if not self.p > 3:
            raise ValueError("Ogden: p must be > 3")
        if not self.q > 3:
            raise ValueError("Ogden: q must be > 3")
        if not self.r > 1:
            raise ValueError("Ogden: r must be > 1")
        bound = 2 * self.q / (self.q - 3)
        if not self.m > bound:
            raise ValueError(f"Ogden: m must exceed 2q/(q-3) = {bound:g}")

    def _G(self, mv):
        s = tensor._spectrum(mv.first_order)
        t = tensor._spectrum(mv.second_order)
        delta = np.asarray(mv.determinant, dtype=float)
        return (
            self.a * np.sum(s**self.p, axis=-1)
            + self.b * np.sum(t**self.q, axis=-1)
            + _barrier(delta, self.c, self.r, self.d, self.m)
        )

    def _W(self, F):
        return self._G(minors(F))

    def _dW(self, F):
        J = tensor._det(F)
        if np.any(J <= 0):
            raise ValueError("Ogden gradient requires det F > 0")
        U, s, Vt = _svd(F)
        sq = s**self.q
        others = np.sum(sq, axis=-1, keepdims=True) - sq
        g = self.a * self.p * s ** (self.p - 1) + self.b * self.q * s ** (self.q - 1) * others
        coef = self.c * self.r * J ** (self.r - 1) - self.d * self.m * J ** (-self.m - 1)
        return _from_singular(U, g, Vt) + coef[..., None, None] * tensor.cofactor(F)

    def coercivity_alpha(self, n):
        # power means on 3 singular values, p, q >= 2
        return min(self.a * 3 ** (1 - self.p / 2), self.b * 3 ** (1 - self.q / 2))

    def _coercive_parts(self, F):
        s = tensor._spectrum(F)
        t = tensor._spectrum(tensor._adj(F))
        main = self.a * np.sum(s**self.p, axis=-1) + self.b * np.sum(t**self.q, axis=-1)
        growth = tensor._fro2(F) ** (self.p / 2) + tensor._fro2(tensor._adj(F)) ** (self.q / 2)
        return main, growth, _barrier(tensor._det(F), self.c, self.r, self.d, self.m)


@dataclass(frozen=True)
class Ogden2D(EnergyModel):
    a: float = 1.0
    c: float = 1.0
    d: float = 1.0
    p: float = 4.0
    r: float = 2.0
    m: float = 2.0

    kind = "ogden2d"
    dim = 2

    def __post_init__(self):
        for name in ("a", "c", "d"):
            if not getattr(self, name) > 0:
                raise ValueError(f"Ogden2D: {name} must be > 0")
        if not self.p >= 2:
            raise ValueError("Ogden2D: p must be >= 2")
        if not self.r > 1:
            raise ValueError("Ogden2D: r must be > 1")
        if not self.m > 0:
            raise ValueError("Ogden2D: m must be > 0")

    def _G(self, mv):
        delta = np.asarray(mv.determinant, dtype=float)
        return self.a * tensor._fro2(mv.first_order) ** (self.p / 2) + _barrier(
            delta, self.c, self.r, self.d, self.m
        )

    def _W(self, F):
        return self._G(minors(F))

    def _dW(self, F):
        J = tensor._det(F)
        if np.any(J <= 0):
            raise ValueError("Ogden2D gradient requires det F > 0")
        nf = tensor._fro(F)
        coef = self.c * self.r * J ** (self.r - 1) - self.d * self.m * J ** (-self.m - 1)
        g = self.a * self.p * nf ** (self.p - 2)
        return g[..., None, None] * F + coef[..., None, None] * tensor.cofactor(F)

    def coercivity_alpha(self, n):
        return self.a

    def _coercive_parts(self, F):
        growth = tensor._fro2(F) ** (self.p / 2)
        return self.a * growth, growth, _barrier(tensor._det(F), self.c, self.r, self.d, self.m)


@dataclass(frozen=True)
class NeoTrace(EnergyModel):
    a: float = 1.0

    kind = "neotrace"

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("NeoTrace: a must be > 0")

    def _G(self, mv):
        return self.a * np.sum(tensor._spectrum(mv.first_order) ** 3, axis=-1)

    def _W(self, F):
        return self._G(minors(F))

    def _dW(self, F):
        U, s, Vt = _svd(F)
        return _from_singular(U, 3.0 * self.a * s**2, Vt)

    def coercivity_alpha(self, n):
        # power means: sum s^3 >= n^(-1/2) (sum s^2)^(3/2)
        return self.a / math.sqrt(n)

    def _coercive_parts(self, F):
        W = self._W(F)
        return W, tensor._fro2(F) ** 1.5, np.zeros_like(W)


@dataclass(frozen=True)
class SaintVenantKirchhoff(EnergyModel):
    lam: float = 1.0
    mu: float = 1.0

    kind = "svk"
    has_convex_representative = False

    def __post_init__(self):
        if self.lam < 0 or self.mu < 0:
            raise ValueError("SaintVenantKirchhoff: Lame constants must be >= 0")

    def _strain(self, F):
        n = F.shape[-1]
        return 0.5 * (np.swapaxes(F, -1, -2) @ F - np.eye(n))

    def _W(self, F):
        E = self._strain(F)
        trE = np.trace(E, axis1=-2, axis2=-1)
        return 0.5 * self.lam * trE**2 + self.mu * np.einsum("...ij,...ij->...", E, E)

    def _G(self, mv):
        # no convex representative exists; probes evaluate W on the F block
        return self._W(mv.first_order)

    def _dW(self, F):
        n = F.shape[-1]
        E = self._strain(F)
        trE = np.trace(E, axis1=-2, axis2=-1)
        S = self.lam * trE[..., None, None] * np.eye(n) + 2.0 * self.mu * E
        return F @ S


_KINDS = {
    "ogden": Ogden,
    "ogden2d": Ogden2D,
    "neotrace": NeoTrace,
    "svk": SaintVenantKirchhoff,
}


def model_from_dict(block):
    """Build a model from its JSON block, e.g. ``{"kind": "ogden", "a": 1, ...}``."""
    block = dict(block)
    kind = str(block.pop("kind", "")).lower()
    if kind not in _KINDS:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {sorted(_KINDS)}")
    cls = _KINDS[kind]
    allowed = set(cls.__dataclass_fields__)
    unknown = set(block) - allowed
    if unknown:
        raise ValueError(f"unknown keys for {kind}: {sorted(unknown)}")
    return cls(**{k: float(v) for k, v in block.items()})


def eval_W(model, F):
    return model.W(F)


def grad_W(model, F):
    return model.dW(F)


def eval_G(model, mv):
    return model.G(mv)


def _random_positive(rng, size, n):
    """Gaussian matrices with det > 0 and log-normal overall scale."""
    F = rng.normal(size=(size, n, n))
    neg = tensor._det(F) < 0
    F[neg, 0, :] *= -1.0
    F *= np.exp(0.5 * rng.normal(size=size))[:, None, None]
    return F


@dataclass
class ProbeReport:
    trials: int
    checked: int
    violations: int
    witnesses: list = field(default_factory=list)

    @property
    def passed(self):
        return self.violations == 0


def polyconvexity_probe(model, trials=1000, seed=0, dim=None, det_floor=1e-8, max_witnesses=5):
    """
    Sample segments between minor vectors and test convexity of ``G`` on them.

    For each trial two matrices with positive determinant and a ``t`` in
    (0, 1) are drawn; the check is
    ``G((1-t) m1 + t m2) <= (1-t) G(m1) + t G(m2) + tol`` with
    ``tol = 1e-9 (1 + max|G|)``. Segments whose interpolated determinant is
    not above ``det_floor`` are skipped. For a model without a convex
    representative (SVK) this is convexity of ``W`` itself.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n = dim or model.dim or 3
    rng = np.random.default_rng(seed)
    F1 = _random_positive(rng, trials, n)
    F2 = _random_positive(rng, trials, n)
    t = rng.uniform(0.0, 1.0, size=trials)
    m1, m2 = minors(F1), minors(F2)
    mt = m1.combine(m2, t)
    ok = mt.determinant > det_floor
    with np.errstate(over="ignore", invalid="ignore"):
        g1 = np.asarray(model._G(m1))
        g2 = np.asarray(model._G(m2))
        gt = np.asarray(model._G(mt))
        rhs = (1 - t) * g1 + t * g2
        scale = np.maximum(np.maximum(np.abs(g1), np.abs(g2)), np.abs(gt))
        gap = gt - rhs
        bad = ok & np.isfinite(rhs) & (gap > 1e-9 * (1.0 + scale))
    idx = np.flatnonzero(bad)
    witnesses = [
        {"F1": F1[i].tolist(), "F2": F2[i].tolist(), "t": float(t[i]), "gap": float(gap[i])}
        for i in idx[:max_witnesses]
    ]
    return ProbeReport(trials=trials, checked=int(ok.sum()), violations=int(idx.size), witnesses=witnesses)


@dataclass
class CoercivityReport:
    alpha_hat: float
    g_hat: float
    alpha_theory: float | None
    alpha_conformal: float
    violations: list
    det_barrier: bool
    argmin: list


def _rotations(rng, size, n):
    Q, R = np.linalg.qr(rng.normal(size=(size, n, n)))
    Q = Q * np.sign(np.diagonal(R, axis1=-2, axis2=-1))[..., None, :]
    flip = tensor._det(Q) < 0
    Q[flip, :, 0] *= -1.0
    return Q


def coercivity_margin(model, samples=10_000, seed=0, dim=None, conformal_fraction=0.1):
    """
    Estimate the coercivity constant over a cloud of matrices with det > 0.

    ``alpha_hat`` is the smallest ratio ``main / growth`` over the cloud,
    with ``W = main + rest``, where ``growth`` is ``|F|^3`` for NeoTrace,
    ``|F|^p + |Adj F|^q`` for Ogden and ``|F|^p`` for Ogden2D, and
    ``rest`` collects the determinant terms. ``g_hat`` is the smallest
    ``W - alpha_hat |F|^n``. Violations are samples with
    ``W < alpha_theory * growth + rest`` beyond round-off. A fraction of
    the cloud is conformal (scaled rotations); ``alpha_conformal`` is the
    ratio restricted to those. ``det_barrier`` records whether ``W`` blows
    up along ``diag(1, ..., 1, eps)`` as ``eps -> 0+``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    n = dim or model.dim or 3
    rng = np.random.default_rng(seed)
    n_conf = int(round(conformal_fraction * samples))
    F = _random_positive(rng, samples - n_conf, n)
    scale = np.exp(rng.normal(size=n_conf))
    Fc = _rotations(rng, n_conf, n) * scale[:, None, None]
    cloud = np.concatenate([F, Fc], axis=0)

    with np.errstate(over="ignore", invalid="ignore"):
        W = np.asarray(model._W(cloud))
        main, growth, rest = model._coercive_parts(cloud)
        ratio = main / growth
    alpha_theory = model.coercivity_alpha(n)
    finite = np.isfinite(ratio)
    alpha_hat = float(np.min(ratio[finite]))
    alpha_conf = float(np.min(ratio[samples - n_conf :])) if n_conf else math.nan
    g_hat = float(np.min((W - alpha_hat * tensor._fro2(cloud) ** (n / 2))[finite]))
    violations = []
    if alpha_theory is not None:
        lower = alpha_theory * growth
        bad = finite & (main < lower - 1e-10 * (1.0 + np.abs(lower)))
        violations = [cloud[i].tolist() for i in np.flatnonzero(bad)[:5]]

    eps = np.array([1e-2, 1e-8])
    path = np.broadcast_to(np.eye(n), (2, n, n)).copy()
    path[:, -1, -1] = eps
    with np.errstate(over="ignore", divide="ignore"):
        w_path = np.asarray(model._W(path))
    det_barrier = bool(not np.isfinite(w_path[1]) or w_path[1] > 1e3 * abs(w_path[0]) + 1e3)

    i_min = int(np.flatnonzero(finite)[np.argmin(ratio[finite])])
    return CoercivityReport(
        alpha_hat=alpha_hat,
        g_hat=g_hat,
        alpha_theory=alpha_theory,
        alpha_conformal=alpha_conf,
        violations=violations,
        det_barrier=det_barrier,
        argmin=cloud[i_min].tolist(),
    )
