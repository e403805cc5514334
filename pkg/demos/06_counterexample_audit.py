"""
The glued map that oscillates forever
=====================================

Slices between theta_k = 2^(-k^2) pi are each stretched over the whole
sphere, alternating direction.  Every slice adds the same Jacobian mass
4*pi, the n-energy grows linearly in k, and the oscillation on balls
around the north pole never drops below 2, even while the slice volumes
collapse super-exponentially.
"""

import math

from finidist_lab import counterexample_audit

audit = counterexample_audit(n=2, k_max=6, level=3, count=4096, seed=0)

print(" k   volume(exact)   int J     E_2(cum)   P(cum)   osc(B(n,th_k))")
for row in audit.slices:
    print(f" {row.k}   {row.volume_exact:12.4e}  {row.jacobian_integral:7.4f} "
          f"{row.cumulative_energy:10.3f} {row.cumulative_orlicz:8.2f} "
          f"  {row.oscillation_inner:.4f}")

print(f"\nsphere volume (for scale): {audit.sphere_volume:.4f}")
print(f"total 2-energy: {audit.total_energy:.2f} "
      f">= k_max * 4*pi = {audit.k_max * 4 * math.pi:.2f}")
print(f"total Orlicz mass: {audit.total_orlicz:.2f} "
      "(the energy diverges with k_max, the Orlicz integral stays tame)")

# per-slice Jacobian mass is exactly one full cover of the target
for row in audit.slices:
    assert abs(row.jacobian_integral - 4 * math.pi) < 0.04 * math.pi
