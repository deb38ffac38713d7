"""
Feasible steepest descent on the discrete energy over an admissible class.

The objective is ``E(phi) + mu * max(0, ||K_I||_s - M)^2``. Steps are
proposed along the negative gradient with a Barzilai-Borwein trial length
and accepted only if

* every element keeps ``J_T > det_floor`` (a hard wall, never penalized),
* the objective decreases by at least ``armijo_c * step * |g|^2``, strictly.

When the descent stalls while the distortion bound is still violated, the
penalty weight ``mu`` grows geometrically and descent resumes. Boundary
vertices with prescribed images are copied from the class data and never
updated.
"""

import csv
import io
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import injectivity, tensor
from . import mesh as _mesh

__all__ = [
    "MinimizeConfig",
    "IterationRecord",
    "MinimizeReport",
    "InfeasibleStart",
    "objective",
    "gradient",
    "minimize",
    "minimizing_sequence",
    "theta_integral",
    "perturbed_identity",
    "REPORT_COLUMNS",
]

REPORT_COLUMNS = ("iter", "energy", "objective", "grad_norm", "step", "kI_norm", "kO_norm", "min_J", "cn_gap")


class InfeasibleStart(ValueError):
    """The initial deformation has infinite objective or violates the boundary data."""


@dataclass(frozen=True)
class MinimizeConfig:
    max_iters: int = 5000
    grad_tol: float = 1e-6
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    penalty_mu: float = 1.0
    penalty_growth: float = 10.0
    penalty_max: float = 1e8
    det_floor: float = None
    seed: int = 0
    max_backtracks: int = 60
    bound_tol: float = 1e-6
    track_cn: bool = True

    def __post_init__(self):
        if not (isinstance(self.max_iters, int) and self.max_iters >= 0):
            raise ValueError("max_iters must be a nonnegative integer")
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be > 0")
        if not 0 < self.armijo_c < 1:
            raise ValueError("armijo_c must lie in (0, 1)")
        if not 0 < self.backtrack_factor < 1:
            raise ValueError("backtrack_factor must lie in (0, 1)")
        if not self.penalty_mu >= 0:
            raise ValueError("penalty_mu must be >= 0")
        if not self.penalty_growth > 1:
            raise ValueError("penalty_growth must be > 1")
        if not self.penalty_max >= self.penalty_mu:
            raise ValueError("penalty_max must be >= penalty_mu")
        if self.det_floor is not None and not self.det_floor > 0:
            raise ValueError("det_floor must be > 0")
        if not self.max_backtracks >= 1:
            raise ValueError("max_backtracks must be >= 1")

    def resolved_det_floor(self, mesh):
        if self.det_floor is not None:
            return self.det_floor
        return 1e-10 * mesh.scale**mesh.dim

    def to_dict(self):
        return asdict(self)


def config_from_dict(d):
    unknown = set(d) - set(MinimizeConfig.__dataclass_fields__)
    if unknown:
        raise ValueError(f"unknown minimize config keys: {sorted(unknown)}")
    return MinimizeConfig(**d)


__all__.append("config_from_dict")


@dataclass
class IterationRecord:
    iter: int
    energy: float
    objective: float
    grad_norm: float
    step: float
    kI_norm: float
    kO_norm: float
    min_J: float
    cn_gap: float
    mu: float


@dataclass
class MinimizeReport:
    """
    One record per accepted iterate; row 0 is the initial state.

    A row with ``step == 0`` after row 0 marks a penalty increase: the
    iterate is unchanged and the objective is re-evaluated with the new
    ``mu``. Objectives are non-increasing between such rows.
    """

    records: list = field(default_factory=list)
    termination: str = ""

    @property
    def accepted_steps(self):
        return sum(1 for r in self.records[1:] if r.step > 0)

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records])

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for r in self.records:
            row = []
            for c in REPORT_COLUMNS:
                v = getattr(r, c)
                row.append(str(v) if c == "iter" else _fmt(v))
            w.writerow(row)
        return buf.getvalue()


def _fmt(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


# --- objective and gradient -----------------------------------------------------


def _parts(mesh, phi, model, cls):
    F = _mesh.element_gradients(mesh, phi)
    W = np.asarray(model._W(model._check(F)))
    energy = _mesh._weighted_sum(mesh.volumes, W)
    if cls is not None and cls.s is not None:
        kI = _mesh.distortion_norm(mesh, phi, "inner", cls.s)
    else:
        kI = math.nan
    return F, energy, kI


def _penalty(cls, kI, mu):
    if cls is None or cls.s is None or mu == 0:
        return 0.0
    if math.isinf(kI):
        return math.inf
    return mu * max(0.0, kI - cls.M) ** 2


def objective(mesh, phi, model, cls, mu):
    """``discrete_energy + mu * max(0, ||K_I||_s - M)^2``."""
    _, energy, kI = _parts(mesh, phi, model, cls)
    return energy + _penalty(cls, kI, mu)


def _free_mask(mesh, cls):
    free = np.ones(mesh.n_vertices, dtype=bool)
    if cls is not None and cls.boundary is not None:
        free[mesh.boundary_vertices] = False
    return free


def gradient(mesh, phi, model, cls, mu):
    """
    Exact gradient of :func:`objective` with respect to the image points.

    Rows of boundary vertices are zero when the class prescribes boundary
    data.
    """
    F, energy, kI = _parts(mesh, phi, model, cls)
    if not math.isfinite(energy):
        raise ValueError("objective is infinite at this deformation")
    vol = mesh.volumes[:, None, None]
    dF = vol * model._dW(F)
    if cls is not None and cls.s is not None and mu > 0 and kI > cls.M:
        s = cls.s
        dv = tensor.distortion(F)
        K = np.atleast_1d(dv.inner)
        dK = tensor.inner_distortion_grad(F)
        # d/dF_T of (sum vol K^s)^(1/s)
        dN = kI ** (1 - s) * K ** (s - 1)
        dF = dF + 2 * mu * (kI - cls.M) * vol * dN[:, None, None] * dK
    g = _mesh.assemble_gradient(mesh, dF)
    g[~_free_mask(mesh, cls)] = 0.0
    return g


# --- driver ------------------------------------------------------------------------


def _evaluate(mesh, Y, model, cls, mu, det_floor):
    phi = _mesh.Deformation(Y)
    F = _mesh.element_gradients(mesh, phi)
    J = tensor._det(F)
    minJ = float(np.min(J))
    if minJ <= det_floor:
        return None
    W = np.asarray(model._W(model._check(F)))
    energy = _mesh._weighted_sum(mesh.volumes, W)
    if not math.isfinite(energy):
        return None
    kI = _mesh.distortion_norm(mesh, phi, "inner", cls.s) if cls.s is not None else math.nan
    obj = energy + _penalty(cls, kI, mu)
    if not math.isfinite(obj):
        return None
    return {"phi": phi, "energy": energy, "objective": obj, "kI": kI, "min_J": minJ}


def _record(mesh, state, g_norm, step, it, mu, cls, config):
    phi = state["phi"]
    kO = _mesh.distortion_norm(mesh, phi, "outer", cls.p) if cls.p is not None else math.nan
    if config.track_cn:
        res = mesh.diameter / 32 if mesh.dim == 3 else None
        cn = injectivity.ciarlet_necas(mesh, phi, resolution=res, with_pairs=False).gap
    else:
        cn = math.nan
    return IterationRecord(
        iter=it,
        energy=state["energy"],
        objective=state["objective"],
        grad_norm=g_norm,
        step=step,
        kI_norm=state["kI"],
        kO_norm=kO,
        min_J=state["min_J"],
        cn_gap=cn,
        mu=mu,
    )


def minimize(mesh, model, cls, phi_init, config=None, callback=None):
    """
    Feasible descent with penalty continuation.

    Returns ``(deformation, report)``. ``callback(iter, deformation)`` is
    called for the initial state and for every accepted iterate.
    """
    config = config or MinimizeConfig()
    phi_init.check(mesh)
    det_floor = config.resolved_det_floor(mesh)
    free = _free_mask(mesh, cls)
    Y = phi_init.images.copy()
    target = cls.boundary_images(mesh)
    if target is not None:
        b = mesh.boundary_vertices
        dev = np.max(np.abs(Y[b] - target[b])) if b.size else 0.0
        if dev > cls.eps_bd * mesh.diameter:
            raise InfeasibleStart(f"initial deformation misses the boundary data by {dev:.3g}")
        Y[b] = target[b]
    mu = config.penalty_mu
    state = _evaluate(mesh, Y, model, cls, mu, det_floor)
    if state is None:
        raise InfeasibleStart("initial deformation is infeasible (infinite objective or J_T <= det_floor)")

    def grad_of(st, mu):
        g = gradient(mesh, st["phi"], model, cls, mu)
        return g, float(np.linalg.norm(g[free]))

    g, g_norm = grad_of(state, mu)
    report = MinimizeReport()
    report.records.append(_record(mesh, state, g_norm, 0.0, 0, mu, cls, config))
    if callback:
        callback(0, state["phi"])
    it = 0
    alpha = None
    prev = None
    termination = "max_iters"
    while True:
        violated = cls.s is not None and state["kI"] > cls.M + config.bound_tol
        if g_norm < config.grad_tol:
            if violated and 0 < mu < config.penalty_max:
                mu = min(mu * config.penalty_growth, config.penalty_max)
                state = _evaluate(mesh, state["phi"].images, model, cls, mu, det_floor)
                g, g_norm = grad_of(state, mu)
                alpha, prev = None, None
                it += 1
                report.records.append(_record(mesh, state, g_norm, 0.0, it, mu, cls, config))
                continue
            termination = "stationary" if not violated else "penalty_limit"
            break
        if it >= config.max_iters:
            termination = "max_iters"
            break
        if alpha is None:
            # first trial moves the fastest vertex by a tenth of the mesh scale
            alpha = 0.1 * mesh.scale / max(float(np.max(np.abs(g[free]))), 1e-300)
        elif prev is not None:
            s_vec, y_vec = prev
            sy = float(np.sum(s_vec * y_vec))
            alpha = float(np.sum(s_vec * s_vec)) / sy if sy > 0 else alpha
        X = state["phi"].images
        g2 = g_norm * g_norm
        trial = None
        for _ in range(config.max_backtracks):
            Yt = X - alpha * g
            cand = _evaluate(mesh, Yt, model, cls, mu, det_floor)
            if (
                cand is not None
                and cand["objective"] < state["objective"]
                and cand["objective"] <= state["objective"] - config.armijo_c * alpha * g2
            ):
                trial = cand
                break
            alpha *= config.backtrack_factor
        if trial is None:
            if violated and 0 < mu < config.penalty_max:
                mu = min(mu * config.penalty_growth, config.penalty_max)
                state = _evaluate(mesh, state["phi"].images, model, cls, mu, det_floor)
                g, g_norm = grad_of(state, mu)
                alpha, prev = None, None
                it += 1
                report.records.append(_record(mesh, state, g_norm, 0.0, it, mu, cls, config))
                continue
            termination = "step_collapse"
            break
        g_new, g_norm_new = grad_of(trial, mu)
        prev = (trial["phi"].images - X, g_new - g)
        state, g, g_norm = trial, g_new, g_norm_new
        it += 1
        report.records.append(_record(mesh, state, g_norm, alpha, it, mu, cls, config))
        if callback:
            callback(it, state["phi"])
    report.termination = termination
    return state["phi"], report


def perturbed_identity(mesh, amplitude, seed=0, fixed_boundary=True):
    """Identity plus seeded Gaussian noise of the given amplitude on interior vertices."""
    rng = np.random.default_rng(seed)
    Y = mesh.vertices.copy()
    noise = amplitude * rng.standard_normal(Y.shape)
    if fixed_boundary:
        noise[mesh.boundary_vertices] = 0.0
    return _mesh.Deformation(Y + noise)


def theta_integral(mesh, phi, theta):
    """``sum_T vol(T) theta(c_T) J_T`` with ``c_T`` the element centroid."""
    centroids = mesh.vertices[mesh.simplices].mean(axis=1)
    w = np.asarray(theta(centroids), dtype=float)
    J = _mesh.element_jacobians(mesh, phi)
    return float(np.sum(mesh.volumes * w * J))


def minimizing_sequence(mesh, model, cls, phi_init, config=None, snapshots=5, theta=None):
    """
    Run :func:`minimize` and keep ``snapshots`` iterates, evenly spaced over
    the accepted steps (first and last included), each with the weighted
    Jacobian integral ``int theta J``.

    Returns a list of ``(deformation, diagnostics)``.
    """
    if snapshots < 1:
        raise ValueError("snapshots must be >= 1")
    if theta is None:
        lo, hi = mesh.vertices.min(axis=0), mesh.vertices.max(axis=0)
        from .sequences import Bump

        theta = Bump(center=0.5 * (lo + hi), radius=0.45 * float(np.min(hi - lo)))
    history = []
    phi, report = minimize(mesh, model, cls, phi_init, config, callback=lambda i, p: history.append((i, p)))
    if len(history) == 1:
        picks = [0]
    else:
        picks = sorted(set(np.round(np.linspace(0, len(history) - 1, snapshots)).astype(int).tolist()))
    rows = {r.iter: r for r in report.records}
    out = []
    for k in picks:
        i, p = history[k]
        rec = rows[i]
        out.append(
            (
                p,
                {
                    "iter": i,
                    "energy": rec.energy,
                    "objective": rec.objective,
                    "theta_J": theta_integral(mesh, p, theta),
                },
            )
        )
    return out
