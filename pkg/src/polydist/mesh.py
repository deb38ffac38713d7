"""
Simplicial meshes, piecewise-affine deformations and discrete integrals.

A deformation is given by one image point per mesh vertex; on each simplex
it is the affine interpolant, so its gradient ``F_T`` is constant there and
every integral of a function of ``F`` is evaluated exactly by one point per
element. Reductions over elements use numpy's pairwise summation, which is
single-threaded and order-fixed, so results do not depend on thread count.

File format (JSON, 0-based indices)::

    mesh:        {"dim": 2, "vertices": [[x, y], ...],
                  "simplices": [[i, j, k], ...], "boundary_vertices": [...]}
    deformation: {"images": [[x, y], ...]}

Vertices with identical coordinates are treated as the same point when
connectivity and the topological boundary are computed. This lets a mesh
carry a cut (duplicated vertices along an interior seam) so that
discontinuous piecewise-affine maps, such as folds, can be represented.
"""

import json
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import tensor

__all__ = [
    "MeshFormatError",
    "Mesh",
    "Deformation",
    "make_grid",
    "make_box_grid",
    "identity_deformation",
    "affine_deformation",
    "element_gradient",
    "element_gradients",
    "element_jacobians",
    "discrete_energy",
    "element_distortion",
    "distortion_norm",
    "assemble_gradient",
    "load_mesh",
    "save_mesh",
    "load_deformation",
    "save_deformation",
    "mesh_from_dict",
    "mesh_to_dict",
]


class MeshFormatError(ValueError):
    """Invalid mesh or deformation data; the message names the offending item."""


def _edge_matrices(points, simplices):
    P = points[simplices]  # (T, d+1, d)
    return np.swapaxes(P[:, 1:, :] - P[:, :1, :], -1, -2)  # columns x_i - x_0


def _merged_ids(vertices):
    _, inv = np.unique(vertices, axis=0, return_inverse=True)
    return inv.reshape(-1)


def _faces(simplices):
    d1 = simplices.shape[1]
    parts = [simplices[:, list(c)] for c in combinations(range(d1), d1 - 1)]
    return np.concatenate(parts, axis=0)


def _topological_boundary(vertices, simplices):
    """Original vertex indices lying on faces incident to exactly one simplex."""
    ids = _merged_ids(vertices)
    faces = _faces(simplices)
    keys = np.sort(ids[faces], axis=1)
    uniq, inv, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
    if np.any(counts > 2):
        bad = uniq[np.argmax(counts > 2)]
        raise MeshFormatError(f"face with merged vertices {bad.tolist()} is shared by more than two simplices")
    on_boundary = counts[inv.reshape(-1)] == 1
    merged = np.unique(keys[on_boundary])
    return np.flatnonzero(np.isin(ids, merged))


def _connected(vertices, simplices):
    ids = _merged_ids(vertices)
    parent = np.arange(ids.max() + 1)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    s = ids[simplices]
    for j in range(1, s.shape[1]):
        for a, b in zip(s[:, 0], s[:, j]):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[rb] = ra
    used = np.unique(s)
    roots = {find(i) for i in used}
    return len(roots) == 1


@dataclass(frozen=True, eq=False)
class Mesh:
    """
    Simplicial mesh of a bounded domain in 2D or 3D.

    Parameters
    ----------
    vertices : array_like, shape (N, d)
    simplices : array_like of int, shape (T, d + 1)
        Each simplex must be positively oriented.
    boundary_vertices : array_like of int, optional
        Computed from face incidences when omitted; validated when given.
    """

    vertices: np.ndarray
    simplices: np.ndarray
    boundary_vertices: np.ndarray = None
    _ref_inv: np.ndarray = field(init=False, repr=False)
    _volumes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        V = np.asarray(self.vertices, dtype=float)
        if V.ndim != 2 or V.shape[1] not in (2, 3):
            raise MeshFormatError(f"vertices must have shape (N, 2) or (N, 3), got {V.shape}")
        if not np.all(np.isfinite(V)):
            row = int(np.argmax(~np.all(np.isfinite(V), axis=1)))
            raise MeshFormatError(f"vertex {row} has a non-finite coordinate")
        d = V.shape[1]
        S = np.asarray(self.simplices)
        if S.ndim != 2 or S.shape[1] != d + 1 or S.shape[0] == 0:
            raise MeshFormatError(f"simplices must have shape (T, {d + 1}) with T >= 1, got {S.shape}")
        if not np.issubdtype(S.dtype, np.integer):
            if not np.all(S == np.round(S)):
                raise MeshFormatError("simplex indices must be integers")
        S = S.astype(np.int64)
        out = (S < 0) | (S >= len(V))
        if np.any(out):
            t = int(np.argmax(np.any(out, axis=1)))
            raise MeshFormatError(f"simplex {t} has a vertex index out of range [0, {len(V)}): {S[t].tolist()}")
        Dm = _edge_matrices(V, S)
        signed = tensor._det(Dm) / math.factorial(d)
        scale = float(np.max(np.ptp(V, axis=0))) or 1.0
        tiny = 1e-14 * scale**d
        if np.any(signed < -tiny):
            t = int(np.argmax(signed < -tiny))
            raise MeshFormatError(f"simplex {t} is inverted (negative orientation, signed volume {signed[t]:.3g})")
        if np.any(signed <= tiny):
            t = int(np.argmax(signed <= tiny))
            raise MeshFormatError(f"simplex {t} is degenerate (signed volume {signed[t]:.3g})")
        if not _connected(V, S):
            raise MeshFormatError("simplices do not form a connected domain")
        boundary = _topological_boundary(V, S)
        if self.boundary_vertices is None:
            B = boundary
        else:
            B = np.unique(np.asarray(self.boundary_vertices, dtype=np.int64))
            if not np.array_equal(B, boundary):
                extra = np.setdiff1d(B, boundary).tolist()[:5]
                missing = np.setdiff1d(boundary, B).tolist()[:5]
                raise MeshFormatError(
                    f"boundary_vertices disagree with the topological boundary "
                    f"(not on boundary: {extra}, missing: {missing})"
                )
        for arr in (V, S, B):
            arr.setflags(write=False)
        object.__setattr__(self, "vertices", V)
        object.__setattr__(self, "simplices", S)
        object.__setattr__(self, "boundary_vertices", B)
        ref_inv = np.linalg.inv(Dm)
        ref_inv.setflags(write=False)
        signed.setflags(write=False)
        object.__setattr__(self, "_ref_inv", ref_inv)
        object.__setattr__(self, "_volumes", signed)

    @property
    def dim(self):
        return self.vertices.shape[1]

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_simplices(self):
        return self.simplices.shape[0]

    @property
    def volumes(self):
        return self._volumes

    @property
    def volume(self):
        return float(np.sum(self._volumes))

    @property
    def diameter(self):
        return float(np.linalg.norm(np.ptp(self.vertices, axis=0)))

    @property
    def scale(self):
        """Largest bounding-box extent; the length unit for default tolerances."""
        return float(np.max(np.ptp(self.vertices, axis=0)))

    def boundary_mask(self):
        m = np.zeros(self.n_vertices, dtype=bool)
        m[self.boundary_vertices] = True
        return m

    def boundary_faces(self):
        """Faces (as vertex index tuples) incident to exactly one simplex."""
        ids = _merged_ids(self.vertices)
        faces = _faces(self.simplices)
        keys = np.sort(ids[faces], axis=1)
        _, inv, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
        return faces[counts[inv.reshape(-1)] == 1]

    def submesh(self, simplex_ids):
        """Mesh restricted to a subset of simplices (vertices are kept)."""
        S = self.simplices[np.asarray(simplex_ids)]
        used = np.unique(S)
        remap = -np.ones(self.n_vertices, dtype=np.int64)
        remap[used] = np.arange(len(used))
        return Mesh(self.vertices[used], remap[S])


@dataclass(frozen=True, eq=False)
class Deformation:
    """Per-vertex image points of a piecewise-affine map."""

    images: np.ndarray

    def __post_init__(self):
        Y = np.array(self.images, dtype=float)
        if Y.ndim != 2 or Y.shape[1] not in (2, 3):
            raise MeshFormatError(f"images must have shape (N, 2) or (N, 3), got {Y.shape}")
        if not np.all(np.isfinite(Y)):
            row = int(np.argmax(~np.all(np.isfinite(Y), axis=1)))
            raise MeshFormatError(f"image {row} has a non-finite coordinate")
        Y.setflags(write=False)
        object.__setattr__(self, "images", Y)

    def check(self, mesh):
        if self.images.shape != mesh.vertices.shape:
            raise MeshFormatError(
                f"deformation has {self.images.shape[0]} images of dim {self.images.shape[1]}, "
                f"mesh has {mesh.n_vertices} vertices of dim {mesh.dim}"
            )
        return self


def identity_deformation(mesh):
    return Deformation(mesh.vertices.copy())


def affine_deformation(mesh, A, b=None):
    A = np.asarray(A, dtype=float)
    Y = mesh.vertices @ A.T
    if b is not None:
        Y = Y + np.asarray(b, dtype=float)
    return Deformation(Y)


def make_grid(nx, ny, domain=((0.0, 1.0), (0.0, 1.0))):
    """
    Structured triangulation of a rectangle, two triangles per cell.

    The cell diagonal alternates with the parity of ``i + j`` (a criss-cross
    pattern), which keeps the mesh symmetric under reflections of the
    rectangle when ``nx`` and ``ny`` are even.
    """
    if nx < 1 or ny < 1:
        raise ValueError("nx and ny must be >= 1")
    (x0, x1), (y0, y1) = domain
    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    V = np.column_stack([X.ravel(), Y.ravel()])
    tris = []
    for j in range(ny):
        for i in range(nx):
            a = j * (nx + 1) + i
            b, c, d = a + 1, a + nx + 1, a + nx + 2
            if (i + j) % 2 == 0:
                tris += [(a, b, d), (a, d, c)]
            else:
                tris += [(a, b, c), (b, d, c)]
    return Mesh(V, np.array(tris, dtype=np.int64))


def make_box_grid(nx, ny, nz, domain=((0.0, 1.0), (0.0, 1.0), (0.0, 1.0))):
    """Structured tetrahedral mesh of a box, six tetrahedra per cell (Kuhn split)."""
    if min(nx, ny, nz) < 1:
        raise ValueError("grid counts must be >= 1")
    axes = [np.linspace(lo, hi, k + 1) for (lo, hi), k in zip(domain, (nx, ny, nz))]
    X, Y, Z = np.meshgrid(*axes, indexing="ij")
    V = np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])

    def vid(i, j, k):
        return (i * (ny + 1) + j) * (nz + 1) + k

    paths = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
    tets = []
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                for path in paths:
                    cur = [i, j, k]
                    tet = [vid(*cur)]
                    for ax in path:
                        cur[ax] += 1
                        tet.append(vid(*cur))
                    tets.append(tet)
    S = np.array(tets, dtype=np.int64)
    # fix orientation per tet
    sign = tensor._det(_edge_matrices(V, S))
    S[sign < 0, 1], S[sign < 0, 2] = S[sign < 0, 2], S[sign < 0, 1].copy()
    return Mesh(V, S)


def element_gradients(mesh, phi):
    """All element gradients ``F_T = Ds Dm^-1``, shape (T, d, d)."""
    Y = phi.check(mesh).images
    return _edge_matrices(Y, mesh.simplices) @ mesh._ref_inv


def element_gradient(mesh, phi, t):
    if not 0 <= t < mesh.n_simplices:
        raise IndexError(f"simplex index {t} out of range")
    Y = phi.check(mesh).images
    return _edge_matrices(Y, mesh.simplices[t : t + 1])[0] @ mesh._ref_inv[t]


def element_jacobians(mesh, phi):
    return tensor._det(element_gradients(mesh, phi))


def _weighted_sum(vol, values):
    with np.errstate(invalid="ignore", over="ignore"):
        terms = vol * values
    if np.any(np.isposinf(terms)):
        return math.inf
    return float(np.sum(terms))


def discrete_energy(mesh, phi, model):
    """``sum_T vol(T) W(F_T)``; ``inf`` if any element has infinite energy."""
    W = np.asarray(model._W(model._check(element_gradients(mesh, phi))))
    return _weighted_sum(mesh.volumes, W)


def element_distortion(mesh, phi, which):
    """
    Per-element ``outer`` or ``inner`` distortion.

    Inverted elements (``J_T < 0``) get ``inf``: the coefficients are only
    defined for nonnegative Jacobian and an inverted element can belong to
    no admissible class.
    """
    if which not in ("outer", "inner"):
        raise ValueError("which must be 'outer' or 'inner'")
    dv = tensor.distortion(element_gradients(mesh, phi))
    K = np.atleast_1d(np.asarray(getattr(dv, which), dtype=float))
    return np.where(np.isnan(K), np.inf, K)


def distortion_norm(mesh, phi, which, exponent):
    """``(sum_T vol(T) K(F_T)^s)^(1/s)``; ``exponent = inf`` gives the max."""
    s = float(exponent)
    if not s >= 1:
        raise ValueError("exponent must be >= 1")
    K = element_distortion(mesh, phi, which)
    if np.any(np.isinf(K)):
        return math.inf
    if math.isinf(s):
        return float(np.max(K))
    with np.errstate(over="ignore"):
        total = _weighted_sum(mesh.volumes, K**s)
    return total ** (1.0 / s)


def assemble_gradient(mesh, dF):
    """
    Chain rule from per-element ``dE/dF_T`` (already volume-weighted) to
    per-vertex ``dE/dy``.

    Uses ``F_T = Ds Dm^-1`` so ``dE/dy_i = (dE/dF Dm^-T)[:, i-1]`` for
    ``i >= 1`` and ``dE/dy_0`` is minus their sum. Scattering is done by
    ``np.add.at``, which accumulates in a fixed order.
    """
    H = dF @ np.swapaxes(mesh._ref_inv, -1, -2)  # (T, d, d), column i-1 -> vertex i
    contrib = np.concatenate([-H.sum(axis=-1, keepdims=True), H], axis=-1)  # (T, d, d+1)
    g = np.zeros_like(mesh.vertices)
    d = mesh.dim
    for i in range(d + 1):
        np.add.at(g, mesh.simplices[:, i], contrib[:, :, i])
    return g.reshape(-1, d)


# --- JSON I/O -------------------------------------------------------------


def mesh_to_dict(mesh):
    return {
        "dim": int(mesh.dim),
        "vertices": mesh.vertices.tolist(),
        "simplices": mesh.simplices.tolist(),
        "boundary_vertices": mesh.boundary_vertices.tolist(),
    }


def _require(d, key, where):
    if not isinstance(d, dict):
        raise MeshFormatError(f"{where}: top-level value must be a JSON object")
    if key not in d:
        raise MeshFormatError(f"{where}: missing field {key!r}")
    return d[key]


def _rows(value, width, field_name, where):
    if not isinstance(value, list):
        raise MeshFormatError(f"{where}: field {field_name!r} must be a list")
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != width:
            raise MeshFormatError(f"{where}: {field_name}[{i}] must be a list of {width} numbers")
        for x in row:
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise MeshFormatError(f"{where}: {field_name}[{i}] contains non-numeric entry {x!r}")
    return value


def mesh_from_dict(d, where="mesh"):
    dim = _require(d, "dim", where)
    if dim not in (2, 3):
        raise MeshFormatError(f"{where}: field 'dim' must be 2 or 3, got {dim!r}")
    unknown = set(d) - {"dim", "vertices", "simplices", "boundary_vertices"}
    if unknown:
        raise MeshFormatError(f"{where}: unknown fields {sorted(unknown)}")
    V = _rows(_require(d, "vertices", where), dim, "vertices", where)
    S = _rows(_require(d, "simplices", where), dim + 1, "simplices", where)
    for i, row in enumerate(S):
        if any(not isinstance(x, int) for x in row):
            raise MeshFormatError(f"{where}: simplices[{i}] must hold integer indices")
    B = d.get("boundary_vertices")
    try:
        return Mesh(np.array(V, dtype=float).reshape(-1, dim), np.array(S, dtype=np.int64).reshape(-1, dim + 1), B)
    except MeshFormatError as exc:
        raise MeshFormatError(f"{where}: {exc}") from None


def _read_json(path):
    text = open(path, encoding="utf-8").read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise MeshFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, separators=(",", ":"))
        fh.write("\n")


def save_mesh(path, mesh):
    _write_json(path, mesh_to_dict(mesh))


def load_mesh(path):
    return mesh_from_dict(_read_json(path), where=str(path))


def save_deformation(path, phi):
    _write_json(path, {"images": phi.images.tolist()})


def load_deformation(path, mesh=None):
    d = _read_json(path)
    Y = _require(d, "images", str(path))
    if not isinstance(Y, list) or not Y:
        raise MeshFormatError(f"{path}: field 'images' must be a non-empty list")
    width = len(Y[0]) if isinstance(Y[0], list) else -1
    _rows(Y, width, "images", str(path))
    phi = Deformation(np.array(Y, dtype=float))
    if mesh is not None:
        phi.check(mesh)
    return phi
