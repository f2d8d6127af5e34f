"""Which unit balls are zonoids?

A centrally symmetric convex body is a zonoid exactly when its support
function is the cosine transform of a non-negative even density.  This
script inverts the cosine transform for l_p balls in dimension 3 and
prints the minimum of the recovered density.  The sign flips near p = 2.
It also shows how a non-zonoid norm gets replaced by a zonoid one
(its symmetrization) and what that does to the unit square.

Run:  python demos/02_zonoids.py
"""
import numpy as np

from bkklab import NormSpec, crofton_density_for, symmetrize, zonoid_check

print("p       min density    mean density   zonoid?")
for p in (1.5, 1.8, 2.0, 2.5, 4.0):
    r = zonoid_check(NormSpec.lp(p, 3))
    print(f"{p:<6} {r.min_density:12.5f}   {r.mean_density:12.5f}   {r.is_zonoid}")

# Euclidean densities are the classical Crofton constants.
for d in (2, 3):
    phi = crofton_density_for(NormSpec.euclidean(d))
    print(f"Euclidean dim {d}: density {phi.values.mean():.6f} (1/2 = 0.5, 1/pi = {1 / np.pi:.6f})")

# Every planar symmetric body is a zonoid, but the square is not smooth;
# its symmetrization replaces the dual norm |xi|_1 by a smooth zonoid norm.
s = symmetrize(NormSpec.linf(2))
for y in ([1, 0], [1, 1], [2, 1]):
    y = np.array(y, float)
    print(f"h_symm{tuple(int(v) for v in y)} = {float(s(y)):.4f}   |y|_1 = {np.abs(y).sum():.1f}")
