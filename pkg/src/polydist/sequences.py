"""
Closed-form map families that lose injectivity in the limit.

``PlanarShear(k)``
    On ``[-1, 1]^2`` with ``t = |x2|`` and ``xi_k(t) = (1 + (k-1) t) / (2k)``::

        phi_1 = 2 x1 xi_k(t)                          for 0 <= x1 <= 1/2
        phi_1 = 2 (1 - xi_k(t)) x1 - (1 - 2 xi_k(t))  for 1/2 < x1 <= 1
        phi_2 = x2

    extended oddly in ``x1`` and evenly in ``x2``. Each ``phi_k`` is a
    homeomorphism of the square fixing ``x1 = +-1``; ``k = inf`` gives the
    pointwise limit ``xi = t / 2``, which squeezes the segment
    ``{x2 = 0, |x1| <= 1/2}`` to the origin.

``PuncturedBall(k, dim)``
    ``phi_k(x) = |x|^(k-1) x`` on the punctured unit ball; the maps converge
    to zero locally uniformly inside the ball.

Integrals use tensor-product Gauss-Legendre rules on grids whose lines
contain every seam (``x1 in {0, +-1/2}``, ``x2 = 0``), graded toward
``x2 = 0`` where the Jacobian is smallest.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import tensor
from . import mesh as _mesh

__all__ = [
    "PlanarShear",
    "PuncturedBall",
    "Bump",
    "norm_study",
    "weak_minor_demo",
    "planar_mesh",
    "induced_deformation",
    "render_grid",
    "family_from_name",
]

_GAUSS_ORDER = 6


@dataclass(frozen=True)
class Bump:
    """Smooth bump ``amplitude * exp(1 - 1 / (1 - rho^2))``, ``rho = |x - center| / radius``."""

    center: object = 0.0
    radius: float = 1.0
    amplitude: float = 1.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        rho2 = np.sum((x - np.asarray(self.center, dtype=float)) ** 2, axis=-1) / self.radius**2
        out = np.zeros(rho2.shape)
        inside = rho2 < 1
        out[inside] = self.amplitude * np.exp(1.0 - 1.0 / (1.0 - rho2[inside]))
        return out


def _as_points(x, dim):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != dim:
        raise ValueError(f"expected points with {dim} coordinates, got shape {x.shape}")
    return x


@dataclass(frozen=True)
class PlanarShear:
    k: float = 1

    dim = 2
    name = "planar"

    def __post_init__(self):
        k = self.k
        if not (k == math.inf or (float(k).is_integer() and k >= 1)):
            raise ValueError("k must be an integer >= 1 or inf")

    @property
    def is_limit(self):
        return self.k == math.inf

    def xi(self, t):
        if self.is_limit:
            return 0.5 * t
        k = self.k
        return (1.0 + (k - 1) * t) / (2.0 * k)

    def dxi(self):
        if self.is_limit:
            return 0.5
        return (self.k - 1) / (2.0 * self.k)

    def _check(self, x):
        x = _as_points(x, 2)
        if np.any(np.abs(x) > 1):
            raise ValueError("PlanarShear is defined on [-1, 1]^2")
        return x

    def eval(self, x):
        x = self._check(x)
        x1, x2 = x[..., 0], x[..., 1]
        a, sg = np.abs(x1), np.sign(x1)
        xi = self.xi(np.abs(x2))
        inner = 2.0 * a * xi
        # 2 (1 - xi) a - (1 - 2 xi), arranged so |x1| = 1 maps to 1 exactly
        outer = 1.0 - 2.0 * (1.0 - xi) * (1.0 - a)
        y1 = sg * np.where(a <= 0.5, inner, outer)
        return np.stack([y1, x2], axis=-1)

    def eval_gradient(self, x):
        x = self._check(x)
        x1, x2 = x[..., 0], x[..., 1]
        a = np.abs(x1)
        if np.any(x2 == 0) or np.any(a == 0.5):
            raise ValueError("gradient is not defined on the seams x2 = 0, |x1| = 1/2")
        xi = self.xi(np.abs(x2))
        dt = self.dxi() * np.sign(x2)
        inner = a < 0.5
        d11 = np.where(inner, 2.0 * xi, 2.0 * (1.0 - xi))
        # d phi_1 / d xi is 2 x1 on the inner branch and 2 sign(x1) (1 - |x1|) outside
        dxi_coef = np.where(inner, 2.0 * x1, 2.0 * np.sign(x1) * (1.0 - a))
        G = np.zeros(x.shape[:-1] + (2, 2))
        G[..., 0, 0] = d11
        G[..., 0, 1] = dxi_coef * dt
        G[..., 1, 1] = 1.0
        return G

    def jacobian(self, x):
        """Closed-form Jacobian ``2 xi`` (inner branch) or ``2 (1 - xi)`` (outer); seams allowed."""
        x = self._check(x)
        xi = self.xi(np.abs(x[..., 1]))
        return np.where(np.abs(x[..., 0]) <= 0.5, 2.0 * xi, 2.0 * (1.0 - xi))


@dataclass(frozen=True)
class PuncturedBall:
    k: float = 1
    dim: int = 2

    name = "ball"

    def __post_init__(self):
        if not (float(self.k).is_integer() and self.k >= 1):
            raise ValueError("k must be an integer >= 1")
        if self.dim not in (2, 3):
            raise ValueError("dim must be 2 or 3")

    def _check(self, x):
        x = _as_points(x, self.dim)
        r = np.linalg.norm(x, axis=-1)
        if np.any(r > 1) or np.any(r == 0):
            raise ValueError("PuncturedBall is defined on 0 < |x| <= 1")
        return x, r

    def eval(self, x):
        x, r = self._check(x)
        return (r ** (self.k - 1))[..., None] * x

    def eval_gradient(self, x):
        x, r = self._check(x)
        k, n = self.k, self.dim
        u = x / r[..., None]
        G = np.eye(n) + (k - 1) * u[..., :, None] * u[..., None, :]
        return (r ** (k - 1))[..., None, None] * G

    def jacobian(self, x):
        x, r = self._check(x)
        return self.k * r ** (self.dim * (self.k - 1))

    def sup_norm(self, radius):
        """``max_{|x| <= radius} |phi_k(x)| = radius^k``."""
        return float(radius) ** self.k

    def outer_constant(self):
        n, k = self.dim, self.k
        return (k * k + n - 1) ** (n / 2) / k

    def inner_constant(self):
        n, k = self.dim, self.k
        return (1 + (n - 1) * k * k) ** (n / 2) / k ** (n - 1)


def family_from_name(name, k, dim=2):
    if name == "planar":
        return PlanarShear(k)
    if name == "ball":
        return PuncturedBall(k, dim)
    raise ValueError(f"unknown family {name!r}; expected 'planar' or 'ball'")


# --- quadrature -----------------------------------------------------------------------


def _composite(breaks, cells, order=_GAUSS_ORDER):
    """Gauss-Legendre nodes/weights on each interval of ``breaks`` split into ``cells`` parts."""
    g, w = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        edges = np.linspace(lo, hi, cells + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        nodes.append((mid[:, None] + half[:, None] * g).ravel())
        weights.append((half[:, None] * w).ravel())
    return np.concatenate(nodes), np.concatenate(weights)


def _graded_breaks(k, levels_extra=3):
    """``0, 2^-L, ..., 1/2, 1`` with ``2^-L`` well below the length scale ``1/k``."""
    L = int(math.ceil(math.log2(max(k, 1)))) + levels_extra
    return np.concatenate([[0.0], 2.0 ** -np.arange(L, -1, -1)])


def _planar_rule(family, cells):
    x1b = np.array([-1.0, -0.5, 0.0, 0.5, 1.0])
    x1, w1 = _composite(x1b, cells)
    half = _graded_breaks(1 if family.is_limit else family.k)
    t, wt = _composite(half, cells)
    x2 = np.concatenate([-t[::-1], t])
    w2 = np.concatenate([wt[::-1], wt])
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    W = np.outer(w1, w2)
    return np.stack([X1.ravel(), X2.ravel()], axis=-1), W.ravel()


def _ball_rule(family, cells):
    n = family.dim
    r, wr = _composite(np.array([0.0, 0.5, 1.0]), cells)
    if n == 2:
        th = (np.arange(8 * cells) + 0.5) * (2 * math.pi / (8 * cells))
        wth = np.full(th.shape, 2 * math.pi / (8 * cells))
        R, TH = np.meshgrid(r, th, indexing="ij")
        W = np.outer(wr * r, wth)
        pts = np.stack([R * np.cos(TH), R * np.sin(TH)], axis=-1)
        return pts.reshape(-1, 2), W.ravel()
    c, wc = _composite(np.array([-1.0, 0.0, 1.0]), cells)  # cos of polar angle
    ph = (np.arange(8 * cells) + 0.5) * (2 * math.pi / (8 * cells))
    wph = np.full(ph.shape, 2 * math.pi / (8 * cells))
    R, C, PH = np.meshgrid(r, c, ph, indexing="ij")
    S = np.sqrt(1 - C**2)
    pts = np.stack([R * S * np.cos(PH), R * S * np.sin(PH), R * C], axis=-1)
    W = (wr * r * r)[:, None, None] * wc[None, :, None] * wph[None, None, :]
    return pts.reshape(-1, 3), W.ravel()


def _rule(family, cells):
    if isinstance(family, PlanarShear):
        return _planar_rule(family, cells)
    return _ball_rule(family, cells)


def _lp_norm(family, which, s, cells):
    pts, w = _rule(family, cells)
    dv = tensor.distortion(family.eval_gradient(pts))
    K = np.asarray(getattr(dv, which))
    if math.isinf(s):
        return float(np.max(K))
    return float(np.sum(w * K**s)) ** (1.0 / s)


def norm_study(family_cls, k_list, exponent_list, resolution=8, which="outer", **family_kw):
    """
    ``||K(phi_k)||_{L_s}`` for every ``k`` and ``s``, at two resolutions.

    ``resolution`` is the number of cells per seam interval (and per
    grading level); the doubled rule is evaluated too and
    ``richardson_ratio = |Q_2N - Q_N| / |Q_2N|`` measures the agreement.
    The limit ``k = inf`` of the planar family has non-integrable
    distortion and is reported as ``inf``.

    Returns a list of dict rows with keys
    ``family, k, s, norm, norm_coarse, resolution, richardson_ratio``.
    """
    rows = []
    for k in k_list:
        fam = family_cls(k, **family_kw)
        for s in exponent_list:
            s = float(s)
            if getattr(fam, "is_limit", False):
                rows.append(dict(family=fam.name, k=k, s=s, norm=math.inf, norm_coarse=math.inf,
                                 resolution=resolution, richardson_ratio=0.0))
                continue
            coarse = _lp_norm(fam, which, s, resolution)
            fine = _lp_norm(fam, which, s, 2 * resolution)
            rows.append(dict(family=fam.name, k=k, s=s, norm=fine, norm_coarse=coarse,
                             resolution=resolution, richardson_ratio=abs(fine - coarse) / abs(fine)))
    return rows


# --- weak continuity of the Jacobian ------------------------------------------------------


def _midpoint_planar(cells):
    # every seam lies on a cell edge: x1 in {0, +-1/2}, x2 = 0
    e1 = np.linspace(-1.0, 1.0, 4 * cells + 1)
    e2 = np.linspace(-1.0, 1.0, 2 * cells + 1)
    m1, m2 = 0.5 * (e1[:-1] + e1[1:]), 0.5 * (e2[:-1] + e2[1:])
    X1, X2 = np.meshgrid(m1, m2, indexing="ij")
    area = (e1[1] - e1[0]) * (e2[1] - e2[0])
    return np.stack([X1.ravel(), X2.ravel()], axis=-1), np.full(X1.size, area)


def _midpoint_ball(dim, cells):
    dr = 1.0 / (2 * cells)
    r = (np.arange(2 * cells) + 0.5) * dr
    m = 8 * cells
    if dim == 2:
        th = (np.arange(m) + 0.5) * (2 * math.pi / m)
        R, TH = np.meshgrid(r, th, indexing="ij")
        pts = np.stack([R * np.cos(TH), R * np.sin(TH)], axis=-1).reshape(-1, 2)
        return pts, (R * dr * (2 * math.pi / m)).ravel()
    c = (np.arange(2 * cells) + 0.5) * (2.0 / (2 * cells)) - 1.0
    ph = (np.arange(m) + 0.5) * (2 * math.pi / m)
    R, C, PH = np.meshgrid(r, c, ph, indexing="ij")
    S = np.sqrt(1 - C**2)
    pts = np.stack([R * S * np.cos(PH), R * S * np.sin(PH), R * C], axis=-1).reshape(-1, 3)
    return pts, (R * R * dr * (2.0 / (2 * cells)) * (2 * math.pi / m)).ravel()


def weak_minor_demo(family_cls, theta, k_list, resolution=256, **family_kw):
    """
    ``int theta J(phi_k)`` by midpoint quadrature for each ``k`` and the
    value for the pointwise limit (planar: ``k = inf``; ball: the zero map).

    Returns a dict with ``k``, ``values``, ``limit``, ``differences``
    (successive absolute differences), ``differences_decreasing``,
    ``final_relative_gap`` (last two values, relative to
    ``max(|limit|, max |values|)``) and ``distance_to_limit``.
    """
    if family_cls is PlanarShear:
        pts, w = _midpoint_planar(resolution)
        limit = float(np.sum(w * theta(pts) * PlanarShear(math.inf).jacobian(pts)))
    elif family_cls is PuncturedBall:
        pts, w = _midpoint_ball(family_kw.get("dim", 2), resolution)
        limit = 0.0
    else:
        raise ValueError("family must be PlanarShear or PuncturedBall")
    th = np.asarray(theta(pts), dtype=float)
    values = []
    for k in k_list:
        fam = family_cls(k, **family_kw)
        with np.errstate(under="ignore"):
            values.append(float(np.sum(w * th * fam.jacobian(pts))))
    diffs = [abs(b - a) for a, b in zip(values[:-1], values[1:])]
    scale = max([abs(limit)] + [abs(v) for v in values]) or 1.0
    return {
        "k": list(k_list),
        "values": values,
        "limit": limit,
        "differences": diffs,
        "differences_decreasing": all(b < a for a, b in zip(diffs[:-1], diffs[1:])) if diffs else True,
        "final_relative_gap": diffs[-1] / scale if diffs else 0.0,
        "distance_to_limit": [abs(v - limit) for v in values],
        "resolution": resolution,
    }


# --- meshes, certificates and rendering -----------------------------------------------------


def planar_mesh(cells=4):
    """Grid on ``[-1, 1]^2`` with ``4 * cells`` divisions per side, so every seam is a grid line."""
    return _mesh.make_grid(4 * cells, 4 * cells, ((-1.0, 1.0), (-1.0, 1.0)))


def induced_deformation(family, mesh):
    """Piecewise-affine interpolant of the family on the mesh vertices."""
    return _mesh.Deformation(family.eval(mesh.vertices))


def render_grid(k_list, lines=17, samples=201):
    """
    Images of the grid lines of ``[-1, 1]^2`` under ``phi_k``.

    Returns rows ``(k, line, x1, x2, y1, y2)``: ``line < lines`` are lines of
    constant ``x1`` and the rest lines of constant ``x2``.
    """
    c = np.linspace(-1.0, 1.0, lines)
    u = np.linspace(-1.0, 1.0, samples)
    rows = []
    for k in k_list:
        fam = PlanarShear(k)
        for li, v in enumerate(c):
            for axis in (0, 1):
                pts = np.empty((samples, 2))
                pts[:, axis] = v
                pts[:, 1 - axis] = u
                img = fam.eval(pts)
                line_id = li + axis * lines
                for p, q in zip(pts, img):
                    rows.append((k, line_id, p[0], p[1], q[0], q[1]))
    return rows
