"""Energy densities, random polyconvexity probes and coercivity margins."""

# %%
import numpy as np

from polydist import energy
from polydist.energy import NeoTrace, Ogden, Ogden2D, SaintVenantKirchhoff

# %%
og = Ogden(a=1.0, b=1.0, c=1.0, d=1.0)
print("Ogden at I:", og.W(np.eye(3)), " NeoTrace at I:", NeoTrace().W(np.eye(3)))
for t in (1e-1, 1e-3, 1e-6, 0.0):
    print(f"Ogden at diag(1, 1, {t:g}): {og.W(np.diag([1.0, 1.0, t])):.4g}")

# %% [markdown]
# The probe samples segments between minor vectors and checks convexity of
# the representative along each one. A Saint-Venant-Kirchhoff material has
# no such representative and the probe finds witnesses quickly.

# %%
for model in (og, NeoTrace(), Ogden2D(), SaintVenantKirchhoff(1.0, 1.0)):
    rep = energy.polyconvexity_probe(model, trials=2000, seed=1)
    print(f"{model.kind:9s} checked {rep.checked:5d}  violations {rep.violations}")
svk = energy.polyconvexity_probe(SaintVenantKirchhoff(1.0, 1.0), trials=2000, seed=1)
print("first witness gap:", svk.witnesses[0]["gap"])

# %%
for model in (og, NeoTrace(), SaintVenantKirchhoff(1.0, 1.0)):
    c = energy.coercivity_margin(model, samples=5000, seed=2, dim=3)
    print(f"{model.kind:9s} alpha_hat {c.alpha_hat:.6f} (theory {c.alpha_theory})  det barrier {c.det_barrier}")
