"""Outer and inner distortion of small matrices, including the degenerate cases."""

# %%
import numpy as np

from polydist import tensor

# %% [markdown]
# A conformal matrix (a rotation times a scalar) is as undistorted as a
# matrix can be: both coefficients sit at their minimum ``n^(n/2)``.

# %%
c, s = np.cos(0.4), np.sin(0.4)
R = 1.7 * np.array([[c, -s], [s, c]])
dv = tensor.distortion(R)
print("conformal 2x2: outer", dv.outer, "inner", dv.inner)

# %% [markdown]
# A stretch along one axis raises both. In the plane they always agree;
# in space they only bracket each other.

# %%
for stretch in (1.0, 2.0, 4.0, 8.0):
    d2 = tensor.distortion(np.diag([stretch, 1.0]))
    d3 = tensor.distortion(np.diag([stretch, 1.0, 1.0]))
    print(f"stretch {stretch:4}: 2D {d2.outer:8.3f} {d2.inner:8.3f}   3D outer {d3.outer:8.3f} inner {d3.inner:8.3f}")

# %%
rng = np.random.default_rng(0)
F = rng.normal(size=(5, 3, 3))
F[np.linalg.det(F) < 0, 0] *= -1
dv = tensor.distortion(F)
print("K_I^(1/2) <= K_O <= K_I^2:", np.all(dv.inner**0.5 <= dv.outer) and np.all(dv.outer <= dv.inner**2))

# %% [markdown]
# Singular matrices follow fixed conventions: the outer coefficient is 1,
# the inner one is 1 when the adjugate vanishes and infinite otherwise.
# A negative determinant is flagged rather than assigned a value.

# %%
cases = {
    "zero": np.zeros((3, 3)),
    "rank 2": np.diag([1.0, 2.0, 0.0]),
    "rank 1": np.outer([1.0, 2.0, 3.0], [1.0, 0.0, 0.0]),
    "reflection": np.diag([1.0, 1.0, -1.0]),
}
for name, M in cases.items():
    dv = tensor.distortion(M)
    print(f"{name:10s} J={dv.jacobian:5.1f} outer={dv.outer} inner={dv.inner} inverted={dv.inverted}")
