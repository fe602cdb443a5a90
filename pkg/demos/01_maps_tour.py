"""A quick tour of the section maps.

The 1D interval map T is piecewise monotone with a full branch on each
side of the cut at x = 0 and a power-law singularity there; the 2D map F
stacks a contracting fiber on top of it.  The baker map is the
piecewise-affine reference system with the same two-branch structure but
uniform expansion, so every statistic computed later has a closed-form
counterpart there.
"""

import numpy as np

from lorenzlab import maps
from lorenzlab.params import DEFAULT_PARAMS

P = DEFAULT_PARAMS

print("parameters:", P)
print()

# lateral limits at the cut: the two branches hit the opposite endpoints
for x in (1e-12, -1e-12):
    print(f"T({x:+.0e}) = {maps.lorenz_T(P, x):+.9f}")

# uniform expansion: T' > 1 everywhere, blowing up at the cut
xs = np.linspace(-0.5, 0.5, 9)[1:-1]
xs = xs[xs != 0]
print("\n   x        T(x)      T'(x)")
for x in xs:
    print(f"{x:+.3f}  {maps.lorenz_T(P, x):+.6f}  {maps.lorenz_T_prime(P, x):9.4f}")

# the 2D map contracts fibers: two points on the same vertical approach
p1 = maps.SectionPoint(0.3, 0.1)
p2 = maps.SectionPoint(0.3, -0.2)
print("\nfiber contraction along a shared base orbit:")
for k in range(6):
    print(f"  step {k}: |dy| = {abs(p1.y - p2.y):.3e}")
    p1, p2 = maps.lorenz_F(P, p1), maps.lorenz_F(P, p2)

# the return-time roof is -log|x| + tau0: short near the edges, divergent
# at the cut
print("\nreturn times h(x) = -log|x| + tau0:")
for x in (0.45, 0.1, 0.01, 1e-6):
    print(f"  h({x:g}) = {maps.return_time(P, maps.SectionPoint(x, 0.0)):.3f}")

# the baker map preserves area exactly, branch by branch
area = maps.baker_preimage_area(-0.2, 0.3, -0.1, 0.4)
print(f"\nbaker preimage area of a 0.5 x 0.5 rectangle: {area} (exact)")
