"""Building a witness: the phase family f_phi and the search for a bad phase.

For x + y + 2z = 0 over Z7 x Z3 the deviation of f_phi is, up to a constant,
a short cosine sum psi(phi).  It is large at phi = 0, averages to zero over
one period, and therefore dips below a computable negative threshold.
"""

import numpy as np

from lincommon.config import Equation, multiplicity_bruteforce
from lincommon.group import make_group
from lincommon.witness import build_plan, find_negative_phase, psi, witness_function

G, L = make_group([7, 3]), Equation((1, 1, 2))
plan = build_plan(L, G)
print(f"a = {plan.a}, S = {[s.residues for s in plan.S]}, r = {plan.r}")
print(f"X = {[x.residues for x in plan.X]}")
print(f"frequencies c_x = {[f'{n}/{plan.period}' for n in plan.c_numerators]}")
print(f"period (2d)^r = {plan.period}, threshold = {plan.threshold:.5f}")

phis = np.linspace(0, plan.period, 13)
for p, v in zip(phis, psi(plan, phis)):
    print(f"  psi({p:6.2f}) = {v:+.4f}")

phi = find_negative_phase(plan)
f = witness_function(plan, phi)
t = multiplicity_bruteforce(f, L, G).real
print(f"\nphi* = {phi:.6f}, psi(phi*) = {psi(plan, phi):+.6f}")
print(f"witness mean {f.mean():.12f}, range [{f.min():.4f}, {f.max():.4f}]")
print(f"t_L(f) = {t:.8f} < 1/8 = {1/8}: a [0,1]-valued function beats the random density")

# Export the sweep for plotting elsewhere: lincommon sweep -g Z7xZ3 -L 1,1,2 --samples 2001 -o psi.csv
