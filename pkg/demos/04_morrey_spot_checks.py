"""
Oscillation against surface energy on circles
=============================================

verify_morrey samples the image diameter of a circle (chart circle on
sphere domains) and compares it with the constant times the circle's
restricted energy.  The ratio tells how sharp the inequality is for that
map and circle.
"""

import numpy as np

from finidist_lab import cosine_field, make_map, verify_morrey
from finidist_lab.estimates import morrey_corpus

# the classical near-extremal scalar example: ratio just over 0.9
rep = verify_morrey(cosine_field(1.0), np.zeros(2), 1.0, level=4)
print(f"cosine field:   lhs={rep.lhs:.6f} rhs={rep.rhs:.6f} "
      f"ratio={rep.ratio:.6f} [{rep.verdict}]")

# a rotation of the sphere, checked on a chart circle about the north pole
rot = make_map("rotation", seed=2)
rep = verify_morrey(rot, np.array([0.0, 0.0, 1.0]), 0.7, level=4)
print(f"rotation:       lhs={rep.lhs:.6f} rhs={rep.rhs:.6f} "
      f"ratio={rep.ratio:.6f} [{rep.verdict}]")

# power maps concentrate energy near the poles but still verify
pm = make_map("power", k=3)
x = np.array([np.sin(1.2), 0.0, np.cos(1.2)])
rep = verify_morrey(pm, x, 0.3, level=4)
print(f"power k=3:      lhs={rep.lhs:.6f} rhs={rep.rhs:.6f} "
      f"ratio={rep.ratio:.6f} [{rep.verdict}]")

# a small slice of the 500-sphere corpus that the acceptance gate sweeps
print("\nfirst corpus cases:")
for i, case in enumerate(morrey_corpus(seed=0, spheres_per_map=1)[:6]):
    rep = verify_morrey(case.mapfield, case.center, case.radius, level=4,
                        seed=i, breakpoints=case.breakpoints)
    print(f"  {case.mapfield.label:32s} r={case.radius:.3f} "
          f"ratio={rep.ratio:.4f} [{rep.verdict}]")
