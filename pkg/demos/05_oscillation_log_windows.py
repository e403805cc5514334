"""
Oscillation decay across nested balls
=====================================

The two-radius check bounds osc(B(x,r))^n by a constant over log(R/r)
times the energy on the larger ball.  It only applies when the energy on
B(x, 2R) is below the target's threshold, so sphere targets split into
macro windows (hypothesis-not-met) and micro windows (genuine checks).
"""

import numpy as np

from finidist_lab import make_map, verify_osc_log
from finidist_lab.map_zoo import euclidean_radial_retraction

# euclidean target: thresholds are infinite, every window counts
iden = euclidean_radial_retraction(radius=5.0)  # identity inside r < 5
rep = verify_osc_log(iden, np.zeros(2), 0.1, 0.3)
print(f"identity, r=0.1 R=0.3: lhs={rep.lhs:.5f} rhs={rep.rhs:.3f} "
      f"[{rep.verdict}]")
for h in rep.hypotheses:
    print(f"  hypothesis {h.name}: value={h.value:.3e} "
          f"threshold={h.threshold:.3e} ok={h.ok}")

# fitted mode reports the constant the data would support instead
rep = verify_osc_log(iden, np.zeros(2), 0.1, 0.3, constant_mode="fitted")
print(f"fitted constant for the identity: {rep.details['fitted_constant']:.4f}")

# sphere target, macro window: the smallness hypothesis fails by design
rot = make_map("rotation", seed=4)
north = np.array([0.0, 0.0, 1.0])
rep = verify_osc_log(rot, north, 0.05, 0.2)
print(f"\nrotation, macro window: [{rep.verdict}]")

# sphere target, micro window: energy fits under the threshold and the
# inequality is checked for real
rep = verify_osc_log(rot, north, 0.0004, 0.001)
print(f"rotation, micro window: lhs={rep.lhs:.3e} rhs={rep.rhs:.3e} "
      f"[{rep.verdict}]")
