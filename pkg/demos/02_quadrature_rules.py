"""
Quadrature on spheres, balls, and latitude slices
=================================================
"""

import math

import numpy as np

from finidist_lab import geometry, quadrature


def one(pts):
    return np.ones(pts.shape[0])


# product Gauss-Legendre rules recover sphere areas to machine precision
for n in (2, 3, 4):
    got = quadrature.integrate_sphere(one, n=n, level=4)
    print(f"area S^{n-1} in R^{n}: {got.value:.14f} "
          f"(exact {geometry.sphere_area(n):.14f}, "
          f"indicator {got.error_indicator:.1e})")

# a kink in the radial direction: declare it and the error collapses
kink = 0.618


def tent(pts):
    return np.abs(np.linalg.norm(pts, axis=1) - kink)


blind = quadrature.integrate_ball(tent, n=2, center=np.zeros(2), radius=1.0, level=3)
split = quadrature.integrate_ball(tent, n=2, center=np.zeros(2), radius=1.0, level=3,
                                  breakpoints=[kink])
print(f"\nkink at r={kink}: blind value {blind.value:.10f}, "
      f"with breakpoint {split.value:.10f}")

# an integrable singularity at the center: graded panels shrink toward it
def inv_r(pts):
    return 1.0 / np.linalg.norm(pts, axis=1)


graded = quadrature.integrate_ball(inv_r, n=2, center=np.zeros(2), radius=1.0,
                                   level=4, singular_radii=[0.0])
print(f"int 1/|x| over the unit disk: {graded.value:.10f} (exact {2 * math.pi:.10f})")

# ... or hand over a closed-form core and get the value exactly
core = {0.0: ("exact", lambda eps: 2 * math.pi * eps)}
cored = quadrature.integrate_ball(inv_r, n=2, center=np.zeros(2), radius=1.0,
                                  level=4, singular_radii=[0.0], cores=core)
print(f"same with an exact core:     {cored.value:.14f}")

# thin slices near a pole stay resolved because the rule works in (theta, z)
thin = quadrature.integrate_slice(one, n=2, alpha=1e-6, beta=2e-6, level=3)
print(f"\nthin slice [1e-6, 2e-6]: {thin.value:.6e} "
      f"(exact {geometry.slice_volume_exact(2, 1e-6, 2e-6):.6e})")
