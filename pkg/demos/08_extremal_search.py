"""
How close to equality can the circle inequality get?
====================================================

Coordinate descent with golden-section line searches over small scalar
families, maximizing the verified ratio on the unit circle.  Nothing here
crosses 1; the cap-bump family gets the furthest.
"""

from finidist_lab import morrey_extremal_search

for family in ("constant", "cosine", "cap-bump"):
    res = morrey_extremal_search(family, budget=40, seed=0)
    params = ", ".join(f"{p:.4f}" for p in res.best_params)
    print(f"{family:10s} best ratio {res.best_ratio:.6f} "
          f"at ({params}) after {res.evaluations} evaluations")

print("\nthe ratio stays below 1 for every family: the inequality has slack,")
print("and the search reports how much of it these families can use up.")
