"""Closed gaps of the Thue-Morse walk.

Zeros of an early trace t_k force M_j = I for all j >= k + 2, so the gap at
that point never opens. Roots are refined in extended precision before the
monodromies are checked.
"""

from cmvwalk import tracemap

theta_a, theta_b = 0.7, 1.2
roots = tracemap.tm_closed_gap_search(theta_a, theta_b, 6)
print(f"{len(roots)} candidate points")
for r in sorted(roots, key=lambda d: (d["k"], d["theta"]))[:6]:
    rep = tracemap.verify_closed_gap_mp(theta_a, theta_b, r["theta"], r["k"], 8)
    print(f"k = {r['k']}  theta = {float(rep['theta']):.12f}  "
          f"max|M_j - I| = {rep['monodromy']:.1e}  max|t_j'| = {rep['derivative']:.1e}")
