"""
A Lipschitz retraction of the punctured sphere onto a small ball
================================================================

Remove a cap around q, then: project stereographically from q, retract
the plane radially onto the disk that B(p, 2d) projects to, and come
back.  The result fixes B(p, 2d) pointwise, maps everything else onto
it, and is globally Lipschitz on the punctured sphere.
"""

import numpy as np

from finidist_lab import (RetractionSpec, build_retraction, geometry,
                          verify_retraction)
from finidist_lab.retraction import default_spec

ret = build_retraction(default_spec())
rep = verify_retraction(ret, samples=10000, seed=0)

print("default spec (p = north, q = south):")
for h in rep.hypotheses:
    print(f"  {h.name:28s} value={h.value:.2e} ok={h.ok}")
print(f"  lipschitz estimate L = {rep.details['lipschitz']:.4f}")
print(f"  doubling drift {rep.lhs:.4f} <= {rep.rhs} -> {rep.verdict}")

# an off-axis configuration: q a quarter turn away from p
spec = RetractionSpec(p=np.array([1.0, 0.0, 0.0]), d=0.2,
                      q=np.array([0.0, 0.0, 1.0]), r_prime=0.25)
rep = verify_retraction(build_retraction(spec), samples=6000, seed=1)
print(f"\noff-axis spec: verdict {rep.verdict}, "
      f"L = {rep.details['lipschitz']:.4f}")

# spot check: a far point lands on the boundary sphere of B(p, 2d)
m = build_retraction(spec)
far = np.array([[0.0, -1.0, 0.0]])
img = m.evaluate(far)
print("distance of a far image from p:",
      float(geometry.geodesic_distance(img, spec.p[None, :])[0]),
      "(2d =", 2 * spec.d, ")")
