"""How small a cache buys a given distance from the interference-free
optimum when only after-the-fact channel knowledge is available.

The closed form says a cache fraction of e^-G reaches a per-user DoF of
about 1/G, independent of K: the cache requirement shrinks
exponentially in the target.  This script compares the closed form with
an exhaustive search over replication levels.  Run:

    python demos/csi_buffering.py
"""

import math

from synergy import cache_fraction_for_gap, dof, min_cache_fraction_for_gap

USERS = 10_000

print(f"K = {USERS} users; target: per-user DoF within a factor G of optimal\n")
print(f"{'G':>3} {'closed form':>14} {'exhaustive':>12} {'achieved DoF':>13} {'1/G':>8}")
for gap in range(2, 10):
    formula = cache_fraction_for_gap(gap, USERS)
    exhaustive = min_cache_fraction_for_gap(gap, USERS)
    replication = round(USERS * math.exp(-gap))
    achieved = float(dof(USERS, USERS, max(replication, 1)))
    print(
        f"{gap:>3} {formula:>14.6f} {float(exhaustive):>12.6f} "
        f"{achieved:>13.6f} {1 / gap:>8.4f}"
    )

print(
    "\nstoring a thousandth of the library (fraction ~e^-7) already holds the\n"
    "per-user DoF near 1/7 at any K: the cache keeps paying after the channel\n"
    "knowledge has gone stale, which is what buffering channel state means here"
)
