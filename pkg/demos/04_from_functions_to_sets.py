"""Rounding a witness function to a set.

The rounding keeps the multiplicity from growing by more than the
non-injective instances inside the set.  Whether the set itself is a
witness is only guaranteed for very large groups; at desk scale the margin
is simply reported.
"""

from lincommon.config import Equation
from lincommon.group import make_group
from lincommon.rounding import corollary_sets

for factors, coeffs in [([5], (1, 1, 1)), ([101], (1, 1, 1)), ([7], (1, 1, 1, 1))]:
    G, L = make_group(factors), Equation(coeffs)
    rep = corollary_sets(L, G)
    r = rep.rounding
    print(f"{G}, L = {L} ({r.mode} mode)")
    print(f"  set of size {r.size}: {r.members if r.size <= 12 else str(r.members[:12])[:-1] + ', ...]'}")
    print(f"  achieved {float(r.achieved):.6f} <= lemma bound {r.bound:.6f}: {r.verified}")
    print(f"  margin {rep.margin:+.6f}  (negative = the set itself is a witness)")
    print(f"  |G| = {G.order} vs corollary constant {rep.corollary_constant:.3g}"
          f" -> {'below' if rep.below_threshold else 'above'} threshold")
    print(f"  non-injective instances {rep.noninjective_count} <= bound {rep.noninjective_bound}")
