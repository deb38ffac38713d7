"""Exact exponent bookkeeping with rationals."""

# %%
from fractions import Fraction

from polydist import exponents as ex

# %% [markdown]
# Conjugate exponents in the plane form an involution; in space applying
# the map twice does not return the input.

# %%
for p in (Fraction(3, 2), 2, 3, 4, ex.INF):
    p2 = ex.inverse_exponent(p, 2)
    print(f"n=2  p={ex.format_exponent(p):>4}  p'={ex.format_exponent(p2):>4}  p''={ex.format_exponent(ex.inverse_exponent(p2, 2))}")
for p in (3, 4, 6):
    p3 = ex.inverse_exponent(p, 3)
    print(f"n=3  p={p}  p'={ex.format_exponent(p3)}")

# %% [markdown]
# For the Ogden energy, the exponents of the gradient-of-adjugate and
# determinant terms fix the integrability of the inner distortion.

# %%
print(f"{'q':>3} {'m':>3} {'r':>3} {'sigma':>8} {'s':>8}")
for q, m, r in [(4, 9, 2), (4, 12, 2), (6, 6, 2), (5, 10, 3)]:
    sigma = ex.ball_sigma(q, m)
    s = ex.ball_s(sigma, r, 3)
    print(f"{q:>3} {m:>3} {r:>3} {ex.format_exponent(sigma):>8} {ex.format_exponent(s):>8}")

# %%
try:
    ex.ball_sigma(4, 8)
except ex.ExponentRangeError as err:
    print("out of range:", err)
