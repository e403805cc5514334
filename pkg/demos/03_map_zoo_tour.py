"""
A walk through the map families
===============================

Each family carries its domain, target, declared singular set, and (when
available) a closed-form differential, so the calculus and report layers
can treat them uniformly.
"""

import math

import numpy as np

from finidist_lab import (calculus, degree, finite_distortion_audit, geometry,
                          make_map)

point = np.array([[math.sin(1.1), 0.0, math.cos(1.1)]])

for family, params in [
    ("power", {"k": 3}),
    ("mobius", {"a": 0.3 + 0.2j}),
    ("slice_stretch", {"alpha": 0.3, "beta": 1.2}),
    ("cap_profile", {"c": 0.8}),
]:
    m = make_map(family, **params)
    data = calculus.pointwise_data(m, point)
    print(f"{m.label:30s} |Df|={data.op_norm[0]:8.4f} "
          f"J={data.jac[0]:8.4f} K={data.distortion[0]:8.4f}")

# degree: integrate the Jacobian over the whole sphere and divide by 4*pi
for k in (1, 2, 5):
    d = degree(make_map("power", k=k))
    print(f"power k={k}: degree estimate {d.estimate:.12f} -> {d.nearest} "
          f"(residual {d.residual:.1e})")
cap = degree(make_map("cap_profile", c=1.0))
print(f"cap profile: degree {cap.estimate:.2e} -> {cap.nearest}")

# the dichotomy audit: J > 0 or Df = 0, sampled
audit = finite_distortion_audit(make_map("slice_stretch", alpha=0.4, beta=0.9),
                                samples=2000, seed=0)
print(f"\nslice stretch audit: positive {audit.positive_fraction:.3f}, "
      f"degenerate {audit.degenerate_fraction:.3f}, "
      f"violations {audit.violation_fraction:.3f}, passes={audit.passes}")

# an orientation-reversing map fails it
bad = finite_distortion_audit(make_map("inversion", rho=0.5), samples=2000, seed=0)
print(f"plane inversion audit: passes={bad.passes} "
      f"(min J = {bad.min_jacobian:.3f})")

# the glued oscillating map: slice edges and their latitude schedule
ce = make_map("counterexample", k_max=6)
print("\ncounterexample singular latitudes:",
      " ".join(f"{t:.3e}" for t in ce.singular.latitudes))
e = calculus.energy(ce, calculus.domain_region(ce), level=3)
print(f"its 2-energy over the sphere: {e.value:.3f} "
      f"(grows linearly with k_max)")
