"""The planar shear family: integrable distortion, blow-up in L2, and weak limits of Jacobians."""

# %%
import numpy as np

from polydist import injectivity
from polydist import mesh as M
from polydist import sequences as S

ks = [2**j for j in range(11)]

# %%
rows = S.norm_study(S.PlanarShear, ks, [1.0, 2.0], resolution=4)
print(f"{'k':>5} {'L1':>9} {'L2':>9}")
for k in ks:
    l1, l2 = (r["norm"] for r in rows if r["k"] == k)
    print(f"{k:>5} {l1:9.4f} {l2:9.4f}")

# %% [markdown]
# Every finite member is a homeomorphism: positive Jacobians and no two
# image triangles overlap on a mesh aligned with the seams.

# %%
mesh = S.planar_mesh(4)
for k in (1, 16, 1024):
    phi = S.induced_deformation(S.PlanarShear(k), mesh)
    print(k, "min J", M.element_jacobians(mesh, phi).min(), "overlaps", len(injectivity.overlap_pairs(mesh, phi)))

# %% [markdown]
# In the limit the segment ``x2 = 0, |x1| <= 1/2`` collapses to a point,
# yet the Jacobians still converge weakly.

# %%
res = S.weak_minor_demo(S.PlanarShear, S.Bump((0.0, 0.0), 0.9), ks, resolution=256)
for k, v, d in zip(res["k"], res["values"], res["distance_to_limit"]):
    print(f"k={k:5d}  int theta J = {v:.6f}  distance to limit {d:.2e}")
print("limit:", res["limit"])

# %%
ball = S.weak_minor_demo(S.PuncturedBall, S.Bump((0.0, 0.0), 0.5), ks[:8], resolution=64, dim=2)
print("punctured ball:", np.round(ball["values"], 8))
