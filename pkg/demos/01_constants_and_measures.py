"""
Closed-form measures and the threshold constants
================================================

Everything here is exact arithmetic: ball volumes from the half-integer
gamma recursion, slice volumes from the sin-power reduction, and the
thresholds assembled from them.
"""

import math

from finidist_lab import constants, geometry, morrey_constant

# volumes of unit balls and spheres up to dimension 5
for n in range(2, 6):
    print(f"n={n}: omega_n={geometry.unit_ball_volume(n):.12f} "
          f"area(S^{n-1})={geometry.sphere_area(n):.12f}")

# the slice [pi/16, pi/2] of the 2-sphere, exact versus the polynomial bound
exact = geometry.slice_volume_exact(2, math.pi / 16, math.pi / 2)
bound = geometry.slice_volume_bound(2, math.pi / 16, math.pi / 2)
print(f"\nslice [pi/16, pi/2]: exact {exact:.12f} <= bound {bound:.12f}")
assert exact <= bound

# the string-keyed dispatcher used by scripted callers
print("geodesic ball, radius pi/10:",
      geometry.measures(2, "geodesic_ball_volume", math.pi / 10))

# threshold table for sphere targets; euclidean targets have no thresholds
print("\n  n     C_M              A_N              B_N")
for n in (2, 3, 4):
    t = constants(n, geometry.unit_sphere_target(n))
    print(f"  {n}  {t.c_m:.12f}  {t.a_n:.6e}  {t.b_n:.6e}")

t2 = constants(2, geometry.euclidean_target(2))
print("\neuclidean target: d_N =", t2.d_n, " min threshold =", t2.min_threshold)
print("morrey constant n=2 closed form:",
      morrey_constant(2), "=", math.pi / (2 * math.pi) ** 0.5)
