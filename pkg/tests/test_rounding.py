import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lincommon.config import Equation, kernel_array, multiplicity_bruteforce
from lincommon.group import make_group
from lincommon.rounding import (
    Classification,
    classify,
    corollary_constant,
    corollary_sets,
    round_to_set,
)
from lincommon.witness import build_uncommon_witness, deviation_bound


def set_stats(members, L, G):
    """Exact t_L(A) and |C# & A^d| by filtering the kernel row by row."""
    A = set(members)
    inside = [tuple(v) for v in kernel_array(L, G) if all(int(x) in A for x in v)]
    nonin = sum(1 for v in inside if len(set(v)) < len(v))
    return Fraction(len(inside), G.order ** (L.d - 1)), nonin


def test_indicator_is_returned_unchanged(rng):
    G, L = make_group([7]), Equation((1, 1, -1))
    for _ in range(20):
        ind = rng.random(7) < 0.5
        for mode in ("sidorenko", "common"):
            res = round_to_set(ind.astype(float), L, G, mode)
            assert np.array_equal(res.indicator, ind)
            assert res.iterations == 0 and res.verified


def test_round_z5_witness():
    G, L = make_group([5]), Equation((1, 1, 1))
    f, _ = build_uncommon_witness(L, G)
    res = round_to_set(f, L, G, "sidorenko")
    assert res.size >= 2
    t_set, nonin = set_stats(res.members, L, G)
    assert t_set == res.t_set and nonin == res.noninjective_in_set
    t_f = multiplicity_bruteforce(f, L, G).real
    assert float(t_set) <= t_f + Fraction(nonin, 25) + 1e-12
    assert res.verified


def test_round_half_z4():
    G, L = make_group([4]), Equation((1, 1, -1, -1))
    f = np.full(4, 0.5)
    for mode in ("sidorenko", "common"):
        res = round_to_set(f, L, G, mode)
        assert res.verified
        t_set, non_a = set_stats(res.members, L, G)
        if mode == "sidorenko":
            assert res.size >= 1
            assert float(t_set) <= multiplicity_bruteforce(f, L, G).real + non_a / 64 + 1e-12
        else:
            comp = [k for k in range(4) if k not in res.members]
            t_comp, non_c = set_stats(comp, L, G)
            rhs = multiplicity_bruteforce(f, L, G).real + multiplicity_bruteforce(1 - f, L, G).real
            assert float(t_set + t_comp) <= rhs + (non_a + non_c) / 64 + 1e-12


@pytest.mark.parametrize("factors", [[5], [7], [8], [3, 3], [2, 6]])
@pytest.mark.parametrize("coeffs", [(1, 1, -1), (1, 1, 1), (1, 5, -7)])
def test_lemma_inequalities_random(factors, coeffs, rng):
    G, L = make_group(factors), Equation(coeffs)
    for _ in range(5):
        f = rng.random(G.order)
        for mode in ("sidorenko", "common"):
            res = round_to_set(f, L, G, mode)
            t_set, non_a = set_stats(res.members, L, G)
            N = G.order ** (L.d - 1)
            if mode == "sidorenko":
                assert res.size >= f.mean() * G.order - 1
                assert float(t_set) <= multiplicity_bruteforce(f, L, G).real + non_a / N + 1e-9
            else:
                comp = [k for k in range(G.order) if k not in res.members]
                t_comp, non_c = set_stats(comp, L, G)
                rhs = multiplicity_bruteforce(f, L, G).real + multiplicity_bruteforce(1 - f, L, G).real
                assert float(t_set + t_comp) <= rhs + (non_a + non_c) / N + 1e-9


@pytest.mark.parametrize("factors, coeffs", [([5], (1, 1, 1)), ([7], (1, 2, 4)), ([8], (1, 1, -1)), ([4, 2], (1, 3, 5))])
def test_common_mode_vs_exhaustive(factors, coeffs, rng):
    G, L = make_group(factors), Equation(coeffs)
    best = min(
        float(sum(set_stats([k for k in range(G.order) if ((mask >> k) & 1) == bit], L, G)[0] for bit in (0, 1)))
        for mask in range(2**G.order)
    )
    for _ in range(3):
        res = round_to_set(rng.random(G.order), L, G, "common")
        assert float(res.achieved) >= best - 1e-12
        assert res.verified


def test_mean_value_bound():
    for d in range(1, 7):
        for n in range(2 * d, 101):
            assert (0.5 - 1 / n) ** d >= 0.5**d - d / n - 1e-15


def test_round_rejects_bad_input():
    G, L = make_group([5]), Equation((1, 1, 1))
    with pytest.raises(ValueError):
        round_to_set(np.full(5, 1.2), L, G)
    with pytest.raises(ValueError):
        round_to_set(np.full(5, 0.5), L, G, mode="other")
    with pytest.raises(ValueError):
        round_to_set(np.full(6, 0.5), Equation((2, 3)), make_group([6]))


def test_classify_examples():
    v = classify(Equation((1, -1, 1, -1)), make_group([7]))
    assert v.classification is Classification.FULLY_SIDORENKO
    assert v.partition is not None and v.certificate is None
    v = classify(Equation((1, 1, 1)), make_group([5]))
    assert v.classification is Classification.FULLY_COMMON_NOT_FULLY_SIDORENKO
    assert v.certificate.verified and v.certificate.multiplicity < 1 / 8
    v = classify(Equation((1, 1, 1, 1)), make_group([5]))
    assert v.classification is Classification.NOT_FULLY_COMMON
    assert v.certificate.verified and v.margins["common_margin"] < 0
    v = classify(Equation((2, 3)), make_group([6]))
    assert v.classification is Classification.NOT_APPLICABLE
    v = classify(Equation((1, 1, 1)), make_group([2, 2]))
    assert v.classification is Classification.FULLY_COMMON_NOT_FULLY_SIDORENKO
    assert v.certificate.route == "exponent2"
    assert v.corollary_constant == pytest.approx(9 / deviation_bound(3, 1).universal)


@settings(max_examples=40, deadline=None)
@given(
    coeffs=st.lists(st.integers(-6, 6), min_size=2, max_size=4),
    factors=st.sampled_from([[5], [7], [2, 2], [9], [3, 5], [4]]),
    data=st.data(),
)
def test_classify_permutation_invariant(coeffs, factors, data):
    G = make_group(factors)
    perm = data.draw(st.permutations(coeffs))
    a = classify(Equation(tuple(coeffs)), G)
    b = classify(Equation(tuple(perm)), G)
    assert a.classification is b.classification
    if a.certificate is not None:
        assert a.certificate.verified and b.certificate.verified


def test_corollary_constant():
    assert corollary_constant(3) == pytest.approx(9.5e6, rel=1e-2)


def test_corollary_sets():
    rep = corollary_sets(Equation((1, 1, 1)), make_group([5]))
    assert rep.below_threshold and rep.rounding.verified
    assert rep.noninjective_count <= rep.noninjective_bound
    rep = corollary_sets(Equation((1, 1, 1, 1)), make_group([7]))
    assert rep.rounding.mode == "common" and rep.rounding.verified
    with pytest.raises(ValueError):
        corollary_sets(Equation((1, -1)), make_group([7]))


def test_corollary_sets_z101():
    G, L = make_group([101]), Equation((1, 1, 1))
    rep = corollary_sets(L, G)
    r = rep.rounding
    assert rep.below_threshold and r.verified
    assert r.size >= 101 / 2 - 1
    assert rep.margin == pytest.approx(float(r.t_set) - (r.size / 101) ** 3)
