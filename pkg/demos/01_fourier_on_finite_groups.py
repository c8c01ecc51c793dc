"""Fourier analysis on Z6 x Z4 and two ways of counting solutions.

Run with ``python demos/01_fourier_on_finite_groups.py``.
"""

import numpy as np

from lincommon.config import Equation, kernel_array, multiplicity_bruteforce
from lincommon.fourier import dft, idft, multiplicity_fourier
from lincommon.group import character_eval, make_group, max_order_element

G = make_group([6, 4])
print(f"G = {G}: order {G.order}, exponent {G.exponent}")
print("element of maximal order:", max_order_element(G))

# Characters detect the identity: the sum over all characters vanishes off 0.
for x in [(0, 0), (1, 0), (3, 2)]:
    total = sum(character_eval(G, a, x) for a in G.elements())
    print(f"  sum of characters at {x}: {total.real:+.3f}{total.imag:+.3f}i")

rng = np.random.default_rng(0)
f = rng.random(G.order)
F = dft(G, f)
print("\nmean of f           :", f.mean())
print("spectrum at 0       :", F[0].real)
print("Parseval gap        :", abs(np.sum(np.abs(F) ** 2) - np.mean(f**2)))
print("inversion error     :", np.max(np.abs(idft(G, F) - f)))

# The multiplicity of x + 5y - 7z = 0, once by scanning |G|^2 instances and
# once as a sum over |G| Fourier terms.
L = Equation((1, 5, -7))
print(f"\n{L} has {kernel_array(L, G).shape[0]} instances in {G}")
print("t_L(f) brute force :", multiplicity_bruteforce(f, L, G).real)
print("t_L(f) Fourier     :", multiplicity_fourier(f, L, G).real)
