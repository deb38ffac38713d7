"""
Admissible deformation classes and discrete membership.

Three variants are supported:

``H``
    maps with finite distortion, finite energy, ``J >= 0``, outer
    distortion in ``L_p`` and ``||K_I||_{L_s} <= M``.
``A``
    as ``H`` without the outer-distortion clause.
``Ball``
    ``J > 0``, finite energy and the boundary data.

A homeomorphism test is not decidable from vertex data; callers may pass
the outcome of an injectivity diagnostic as an extra clause (see
:func:`injectivity_clause`). Every other clause is read per element:
the integrals become volume-weighted sums over simplices.
"""

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import exponents, injectivity, tensor
from . import mesh as _mesh

__all__ = [
    "AdmissibleClass",
    "MembershipVerdict",
    "membership",
    "embedding_check",
    "ball_class_exponents",
    "ball_inner_bound",
    "injectivity_clause",
    "class_from_dict",
]

VARIANTS = ("H", "A", "Ball")


def _num(x):
    if x is None:
        return None
    if isinstance(x, str):
        return float(exponents.as_exponent(x))
    return float(x)


@dataclass(frozen=True)
class AdmissibleClass:
    """
    Parameters
    ----------
    variant : {"H", "A", "Ball"}
    s : float
        Inner-distortion exponent (``>= 1``); unused by ``Ball``.
    M : float
        Bound on ``||K_I||_{L_s}`` (``> 0``); unused by ``Ball``.
    p : float, optional
        Outer-distortion exponent, ``H`` only.
    boundary : None, "identity" or array (N, d)
        Prescribed images; only rows of boundary vertices are compared.
    eps_fd, eps_bd : float, optional
        Relative tolerances for the finite-distortion and boundary clauses;
        multiplied by the mesh scale and diameter respectively.
    """

    variant: str
    s: float = None
    M: float = None
    p: float = None
    boundary: object = None
    eps_fd: float = 1e-10
    eps_bd: float = 1e-9

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        for name in ("s", "M", "p"):
            object.__setattr__(self, name, _num(getattr(self, name)))
        if self.variant in ("H", "A"):
            if self.s is None or not self.s >= 1:
                raise ValueError("inner exponent s must be >= 1")
            if self.M is None or not self.M > 0:
                raise ValueError("bound M must be > 0")
        if self.variant == "H":
            if self.p is None or not self.p >= 1:
                raise ValueError("class H needs an outer exponent p >= 1")
        elif self.p is not None:
            raise ValueError(f"outer exponent p only applies to class H, not {self.variant}")
        b = self.boundary
        if b is not None and not (isinstance(b, str) and b == "identity"):
            b = np.array(b, dtype=float)
            b.setflags(write=False)
            object.__setattr__(self, "boundary", b)

    def meets_existence_hypotheses(self, n):
        """``p = n - 1`` and ``s > 1`` for ``H``; ``s > 1`` for ``A``."""
        if self.variant == "H":
            return self.p == n - 1 and self.s > 1
        if self.variant == "A":
            return self.s > 1
        return True

    def boundary_images(self, mesh):
        if self.boundary is None:
            return None
        if isinstance(self.boundary, str):
            return mesh.vertices
        if self.boundary.shape != mesh.vertices.shape:
            raise ValueError(
                f"boundary data has shape {self.boundary.shape}, mesh vertices {mesh.vertices.shape}"
            )
        return self.boundary

    def with_bound(self, M):
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["M"] = M
        return AdmissibleClass(**d)

    def to_dict(self):
        b = self.boundary
        if isinstance(b, np.ndarray):
            b = b.tolist()
        d = {"variant": self.variant, "s": self.s, "M": self.M, "p": self.p, "boundary": b}
        d["eps_fd"], d["eps_bd"] = self.eps_fd, self.eps_bd
        return d


def class_from_dict(d):
    """Build a class from its JSON block; unknown keys are rejected."""
    allowed = {"variant", "s", "M", "p", "boundary", "eps_fd", "eps_bd"}
    unknown = set(d) - allowed
    if unknown:
        raise ValueError(f"unknown class keys: {sorted(unknown)}")
    if "variant" not in d:
        raise ValueError("class block needs a 'variant'")
    return AdmissibleClass(**d)


@dataclass
class MembershipVerdict:
    variant: str
    finite_distortion: bool
    jacobian_nonneg: bool
    jacobian_positive: bool
    outer_norm: float
    inner_norm: float
    inner_within_bound: bool
    energy: float
    energy_finite: bool
    boundary_match: bool
    injective: object = None
    overall: bool = False
    failed: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


_CLAUSES = {
    "H": ("finite_distortion", "jacobian_nonneg", "energy_finite", "outer_finite", "inner_within_bound", "boundary_match"),
    "A": ("finite_distortion", "jacobian_nonneg", "energy_finite", "inner_within_bound", "boundary_match"),
    "Ball": ("jacobian_positive", "energy_finite", "boundary_match"),
}


def membership(mesh, phi, model, cls, injective=None):
    """
    Clause-by-clause membership of a discrete deformation in ``cls``.

    ``injective`` (bool or None) is an optional extra clause supplied by the
    caller, typically from :func:`injectivity_clause`.
    """
    phi.check(mesh)
    n = mesh.dim
    F = _mesh.element_gradients(mesh, phi)
    J = tensor._det(F)
    fnorm = tensor._fro(F)
    eps_fd = cls.eps_fd * mesh.scale
    zero = np.abs(J) <= eps_fd**n
    finite_distortion = bool(np.all(fnorm[zero] <= eps_fd))
    jac_nonneg = bool(np.all(J >= 0))
    jac_pos = bool(np.all(J > 0))
    energy = _mesh.discrete_energy(mesh, phi, model)
    outer_norm = _mesh.distortion_norm(mesh, phi, "outer", cls.p) if cls.p is not None else math.nan
    if cls.s is not None:
        inner_norm = _mesh.distortion_norm(mesh, phi, "inner", cls.s)
        within = bool(inner_norm <= cls.M)
    else:
        inner_norm, within = math.nan, True
    target = cls.boundary_images(mesh)
    if target is None:
        bmatch = True
    else:
        b = mesh.boundary_vertices
        dev = np.max(np.abs(phi.images[b] - target[b])) if b.size else 0.0
        bmatch = bool(dev <= cls.eps_bd * mesh.diameter)
    values = {
        "finite_distortion": finite_distortion,
        "jacobian_nonneg": jac_nonneg,
        "jacobian_positive": jac_pos,
        "energy_finite": bool(math.isfinite(energy)),
        "outer_finite": bool(math.isfinite(outer_norm)),
        "inner_within_bound": within,
        "boundary_match": bmatch,
    }
    clauses = list(_CLAUSES[cls.variant])
    if injective is not None:
        values["injective"] = bool(injective)
        clauses.append("injective")
    failed = [c for c in clauses if not values[c]]
    return MembershipVerdict(
        variant=cls.variant,
        finite_distortion=finite_distortion,
        jacobian_nonneg=jac_nonneg,
        jacobian_positive=jac_pos,
        outer_norm=outer_norm,
        inner_norm=inner_norm,
        inner_within_bound=within,
        energy=energy,
        energy_finite=values["energy_finite"],
        boundary_match=bmatch,
        injective=None if injective is None else bool(injective),
        overall=not failed,
        failed=failed,
    )


def injectivity_clause(mesh, phi):
    """
    Discrete stand-in for injectivity: all ``J_T >= 0``, the Ciarlet-Necas
    inequality holds, and (in 2D) no two image triangles overlap.
    """
    if np.any(_mesh.element_jacobians(mesh, phi) < 0):
        return False
    rep = injectivity.ciarlet_necas(mesh, phi)
    if not rep.verdict:
        return False
    return rep.pairs is None or not rep.pairs


def _same_boundary(b1, b2):
    if b1 is None:
        return True
    if b2 is None:
        return False
    if isinstance(b1, str) or isinstance(b2, str):
        return isinstance(b1, str) and isinstance(b2, str) and b1 == b2
    return b1.shape == b2.shape and np.array_equal(b1, b2)


def embedding_check(c1, c2, domain_volume):
    """
    True when every member of ``c2`` is a member of ``c1``.

    Requires ``s1 <= s2`` and ``M2 |Omega|^(1/s1 - 1/s2) <= M1`` (Hoelder).
    For ``H`` the outer exponents must satisfy ``p1 <= p2``. Boundary data of
    ``c1``, when present, must coincide with that of ``c2``.
    """
    if c1.variant != c2.variant:
        raise ValueError(f"variant mismatch: {c1.variant} vs {c2.variant}")
    if not domain_volume > 0:
        raise ValueError("domain volume must be > 0")
    if not _same_boundary(c1.boundary, c2.boundary):
        return False
    if c1.variant == "Ball":
        return True
    if c1.variant == "H" and not c1.p <= c2.p:
        return False
    if not c1.s <= c2.s:
        return False
    return bool(c2.M * domain_volume ** (1.0 / c1.s - 1.0 / c2.s) <= c1.M)


def ball_class_exponents(q, m, r, n=3):
    """Exponents ``sigma`` and ``s`` linking the energy of an ``A_B`` member to ``A(s, M)``."""
    if n != 3:
        raise exponents.ExponentRangeError("the energy-to-distortion bridge is stated for n = 3")
    sigma = exponents.ball_sigma(q, m)
    s = exponents.ball_s(sigma, r, n)
    return {"sigma": sigma, "s": s}


def ball_inner_bound(model, energy):
    """
    Upper bound for ``||K_I||_{L_s}`` of any map with Ogden energy ``energy``.

    Two Hoelder steps split ``K_I^s = |Adj F|^{3s} J^{-2s}`` into the three
    integrals that the energy controls:

    * ``int |Adj F|^q <= 3^(q/2-1) I / b``
    * ``int J^-m <= I / d``
    * ``int J^r <= I / c``

    Returns ``(s, M)``. The same inequalities hold for volume-weighted sums,
    so the bound applies verbatim to discrete deformations.
    """
    if model.kind != "ogden":
        raise ValueError("the bound uses the Ogden energy terms")
    ex = ball_class_exponents(model.q, model.m, model.r)
    sigma, s = float(ex["sigma"]), float(ex["s"])
    q, I = model.q, float(energy)
    A = 3 ** (q / 2 - 1) * I / model.b
    B = I / model.d
    C = I / model.c
    mixed = A ** (sigma / q) * B ** (1 - sigma / q)
    total = mixed ** (3 * s / sigma) * C ** (1 - 3 * s / sigma)
    return s, total ** (1 / s)
