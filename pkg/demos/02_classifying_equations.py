"""Which single equations are common or Sidorenko over which groups.

The verdict depends only on the parity of the number of variables and on
whether the coefficients pair off into sums that kill the whole group.
"""

from lincommon.config import Equation, has_canceling_partition
from lincommon.group import make_group
from lincommon.rounding import classify

cases = [
    ([7], (1, -1, 1, -1)),   # pairs cancel: fully Sidorenko
    ([5], (1, 1, 1)),        # odd: fully common, not fully Sidorenko
    ([5], (1, 1, 1, 1)),     # even, no canceling pairs mod 5: not fully common
    ([2, 2], (1, 1, 1, 1)),  # every pair cancels when the exponent is 2
    ([2, 2], (1, 1, 1)),     # odd over an exponent-2 group
    ([6], (2, 3)),           # coefficients share factors with |G|
    ([6, 4], (1, 5, 7, 11)), # 1 + 11 and 5 + 7 are both multiples of 12
]

for factors, coeffs in cases:
    G, L = make_group(factors), Equation(coeffs)
    v = classify(L, G)
    line = f"{str(G):>8}  L = {str(L):<12} {v.classification.value}"
    if v.partition:
        line += f"  pairs {v.partition}"
    if v.certificate:
        c = v.certificate
        line += f"  witness deviation {c.deviation:.4g} ({c.route})"
    print(line)

print()
print("canceling test for 1,1,1,1 over Z2xZ2:", has_canceling_partition(Equation((1, 1, 1, 1)), make_group([2, 2])))
