"""Majorant functions and the radii they induce.

A majorant function is a one-dimensional model of how fast a field's
covariant derivative can drift away from its value at the singularity.
Everything the solver's local theory promises is computed from it: the
invertibility radius (where Newton steps exist), the uniqueness radius
(where the singularity is the only zero), the contraction radius (where the
per-step factor stays below one), and the admissible residual tolerance for
a given start distance.
"""

import numpy as np

from rinewton import HolderMajorant, RadiusQuery, SmaleMajorant, wrap_generic

print("=" * 72)
print("Closed forms vs derivative-free bisection")
print("=" * 72)
for f in (HolderMajorant(1.0, 1.0), HolderMajorant(2.0, 0.5), SmaleMajorant(1.0)):
    g = wrap_generic(f)
    print(f"\n{f!r}")
    print(f"  invertibility radius: closed {f.invertibility_radius():.12f}"
          f"  bisection {g.invertibility_radius():.12f}")
    print(f"  uniqueness radius:    closed {f.uniqueness_radius(1e12):.12f}"
          f"  bisection {g.uniqueness_radius(1e12):.12f}")
    rho_c = f.contraction_radius(0.0, 1.0)
    rho_b = g.contraction_radius(0.0, 1.0)
    print(f"  contraction radius:   closed {rho_c:.12f}  bisection {rho_b:.12f}")

print()
print("=" * 72)
print("The contraction radius shrinks as the residual budget grows")
print("=" * 72)
sm = SmaleMajorant(1.0)
print(f"{'budget':>8s} {'spreading=1.0':>14s} {'spreading=1.3':>14s}")
for budget in (0.0, 0.2, 0.4, 0.6):
    row = [sm.contraction_radius(budget, 1.0)]
    row.append(sm.contraction_radius(budget, 1.3) if budget * 1.3 < 1 else float("nan"))
    print(f"{budget:8.1f} {row[0]:14.6f} {row[1]:14.6f}")

print()
print("=" * 72)
print("Admissible residual tolerance by start distance")
print("=" * 72)
print("The farther the start (and the worse the conditioning), the smaller")
print("the relative residual the inner solver is allowed to leave behind.\n")
nu = sm.invertibility_radius()
print(f"{'d0/nu':>8s} {'cap (cond=1)':>14s} {'cap (cond=3)':>14s}")
for frac in (0.0, 0.25, 0.5, 0.75, 0.9):
    d0 = frac * nu
    print(f"{frac:8.2f} {sm.tolerance_cap(1.0, 0.5, d0):14.6f}"
          f" {sm.tolerance_cap(3.0, 0.5, d0):14.6f}")

print()
print("=" * 72)
print("A full radius report")
print("=" * 72)
query = RadiusQuery(budget=0.25, spreading=1.1, domain_radius=0.8,
                    injectivity_radius=np.pi)
report = sm.radii(query)
for key, value in report.to_dict().items():
    print(f"  {key}: {value}")
print("\nThe convergence radius is the minimum of the contraction radius,")
print("the domain radius and the injectivity radius; here the "
      + ("domain radius" if report.convergence_radius == query.domain_radius
         else "contraction radius") + " binds.")
