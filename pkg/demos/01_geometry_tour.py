"""Tour of the three bundled manifolds.

Shows exponential/logarithm maps, geodesic distance, parallel transport and
the geodesic-spreading constant on the Euclidean plane, the 2-sphere and
SPD(2), and spot-checks the metric identities that the full test suite
verifies at scale.
"""

import numpy as np

from rinewton import Euclidean, SPDMatrices, Sphere

print("=" * 70)
print("Euclidean plane: geodesics are straight lines")
print("=" * 70)
e2 = Euclidean(2)
p = e2.point([1.0, 2.0])
v = e2.tangent(p, [0.5, -1.0])
q = e2.exp(p, v)
print(f"exp_p(v)          = {q.coords}")
print(f"log_p(q)          = {e2.log(p, q).vector}   (recovers v)")
print(f"distance(p, q)    = {e2.distance(p, q):.6f} = ||v|| = {e2.norm(p, v):.6f}")
print(f"spreading K       = {e2.spreading_constant(p, 5.0)}   (flat space)")

print()
print("=" * 70)
print("Unit sphere S^2: transport rotates in the geodesic plane")
print("=" * 70)
s = Sphere(3)
p = s.point([1.0, 0.0, 0.0])
q = s.point([0.0, 1.0, 0.0])
print(f"distance(e1, e2)  = {s.distance(p, q):.6f} = pi/2")
in_plane = s.tangent(p, [0.0, 1.0, 0.0])
normal = s.tangent(p, [0.0, 0.0, 1.0])
print(f"transport of the in-plane vector (0,1,0):  {s.transport(p, q, in_plane).vector}")
print(f"transport of the normal vector   (0,0,1):  {s.transport(p, q, normal).vector}")
print(f"injectivity radius = pi = {s.injectivity_radius(p):.6f}")

# the round trip holds anywhere below the injectivity radius
rng = np.random.default_rng(1)
worst = 0.0
for _ in range(200):
    a = s.sample_in_ball(p, 1.0, rng)
    w = s.sample_tangent(a, rng, rng.uniform(0.0, 2.9))
    back = s.log(a, s.exp(a, w))
    worst = max(worst, s.norm(a, back - w))
print(f"worst exp/log round-trip error over 200 samples: {worst:.2e}")

print()
print("=" * 70)
print("SPD(2) with the affine-invariant metric: a curved Hadamard manifold")
print("=" * 70)
spd = SPDMatrices(2)
p = spd.point(np.array([[1.4, 0.3], [0.3, 0.9]]))
v = spd.tangent(p, np.array([[0.2, -0.1], [-0.1, 0.5]]))
q = spd.exp(p, v)
print("exp_p(v) =")
print(np.array_str(q.coords, precision=6))
print(f"distance(p, q) = {spd.distance(p, q):.12f}")
print(f"||v||_p        = {spd.norm(p, v):.12f}   (geodesics have constant speed)")

tv = spd.transport(p, q, v)
print(f"transport preserves the norm: ||Pv||_q = {spd.norm(q, tv):.12f}")

print()
print("Negative curvature makes geodesics spread; the constant grows with radius:")
for radius in (0.1, 0.5, 1.0, 2.0):
    print(f"  K(radius={radius:4.1f}) = {spd.spreading_constant(p, radius):.6f}")

# Monte-Carlo sanity: sampled spreading ratios never exceed the bound
radius = 0.8
k = spd.spreading_constant(p, radius)
worst_ratio = 0.0
for _ in range(500):
    qb = spd.sample_in_ball(p, radius, rng)
    vb = spd.sample_tangent(qb, rng, rng.uniform(0.0, radius))
    wb = spd.sample_tangent(qb, rng, rng.uniform(1e-3, radius))
    num = spd.distance(spd.exp(qb, vb + wb), spd.exp(qb, vb))
    worst_ratio = max(worst_ratio, num / spd.norm(qb, wb))
print(f"max sampled ratio d(exp u, exp v)/||u-v|| = {worst_ratio:.6f} <= K = {k:.6f}")
