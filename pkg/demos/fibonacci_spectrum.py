"""Band hierarchy of the Fibonacci walk from its trace map.

Prints band counts per level, the total measure of sigma_k, and the coupling
constants that control the predicted transport window.
"""

import math

from cmvwalk import tracemap
from cmvwalk.checks import PAIR_32, PAIR_400

theta_a, theta_b = PAIR_32
levels = tracemap.band_hierarchy(theta_a, theta_b, 9)
for k in sorted(levels):
    bands = levels[k]
    total = sum(b.width for b in bands) / (2 * math.pi)
    print(f"level {k:2d}: {len(bands):4d} bands, measure {total:.3e}")

rep = tracemap.coupling_report(theta_a, theta_b, 9, levels=levels)
print(f"kappa = {rep['kappa']:.4f}, mu = {rep['mu']:.2f}")
print(f"predicted window for p = 2: [{rep['lower']:.3f}, {rep['upper']:.3f}]")
# at this coupling the window is still vacuous; it closes in as mu grows
big = tracemap.coupling_report(*PAIR_400, 8)
print(f"mu = {big['mu']:.1f}: window for p = 2 is [{big['lower']:.3f}, {big['upper']:.3f}]")

# the trace map at a point of the spectrum versus a point in a gap
for theta in (levels[9][0].theta1 + 0.5 * levels[9][0].width, 0.2):
    orb = tracemap.fib_orbit(theta_a, theta_b, theta, 18, escape_delta=0.01)
    status = "escapes at k0 = %d" % orb.escape_index if orb.escape_index is not None else "bounded"
    print(f"theta = {theta:.6f}: {status}")
