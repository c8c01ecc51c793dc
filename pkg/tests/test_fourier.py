import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose

from lincommon.config import Equation, has_canceling_partition, is_full_rank_single, multiplicity_bruteforce
from lincommon.fourier import (
    common_sum,
    deviation,
    dft,
    function_from_json,
    function_to_json,
    idft,
    is_real_function,
    multiplicity_fourier,
)
from lincommon.group import character_eval, is_coprime_to_order, make_group

GROUPS = [[5], [6], [2, 2], [6, 4], [3, 3], [2, 3, 4], [8]]


def naive_dft(G, f):
    """Character sums evaluated one element at a time."""
    out = np.zeros(G.order, dtype=complex)
    for a in range(G.order):
        for x in range(G.order):
            out[a] += character_eval(G, G.unrank(a), G.unrank(x)) * f[x]
    return out / G.order


@pytest.mark.parametrize("factors", GROUPS)
def test_dft_matches_character_sums(factors, rng):
    G = make_group(factors)
    f = rng.random(G.order) + 1j * rng.random(G.order)
    assert_allclose(dft(G, f), naive_dft(G, f), atol=1e-12)


@pytest.mark.parametrize("factors", GROUPS)
def test_dft_examples(factors):
    G = make_group(factors)
    point = np.zeros(G.order)
    point[0] = G.order
    assert_allclose(dft(G, point), np.ones(G.order), atol=1e-12)
    const = dft(G, np.full(G.order, 0.7))
    assert_allclose(const, np.eye(1, G.order, 0).ravel() * 0.7, atol=1e-12)
    s = np.zeros(G.order, dtype=complex)
    s[0] = 0.3
    assert_allclose(idft(G, s), np.full(G.order, 0.3), atol=1e-12)


@pytest.mark.parametrize("factors", GROUPS)
def test_parseval_plancherel_inversion(factors, rng):
    G = make_group(factors)
    for _ in range(100):
        f = rng.normal(size=G.order) + 1j * rng.normal(size=G.order)
        g = rng.normal(size=G.order) + 1j * rng.normal(size=G.order)
        F, H = dft(G, f), dft(G, g)
        assert abs(np.sum(np.abs(F) ** 2) - np.mean(np.abs(f) ** 2)) <= 1e-9
        assert abs(np.sum(F * np.conj(H)) - np.mean(f * np.conj(g))) <= 1e-9
        assert np.max(np.abs(idft(G, F) - f)) <= 1e-9
        assert abs(F[0] - f.mean()) <= 1e-12


@pytest.mark.parametrize("factors", GROUPS)
def test_real_function_spectrum_symmetry(factors, rng):
    G = make_group(factors)
    neg = G.neg_map()
    f = rng.random(G.order)
    F = dft(G, f)
    assert_allclose(F[neg], np.conj(F), atol=1e-12)
    # Conjugate-symmetric spectrum gives a real function.
    s = rng.normal(size=G.order) + 1j * rng.normal(size=G.order)
    s = (s + np.conj(s[neg])) / 2
    assert is_real_function(idft(G, s))


def test_length_mismatch():
    G = make_group([5])
    with pytest.raises(ValueError):
        dft(G, np.ones(4))
    with pytest.raises(ValueError):
        idft(G, np.ones(6))


def test_multiplicity_examples():
    G, L = make_group([5]), Equation((1, 1, -1))
    assert abs(multiplicity_fourier(np.full(5, 0.4), L, G) - 0.4**3) <= 1e-12
    ind = np.array([0, 1, 1, 0, 0], dtype=float)
    assert abs(multiplicity_fourier(ind, L, G) - 1 / 25) <= 1e-12
    with pytest.raises(ValueError):
        multiplicity_fourier(np.ones(6), Equation((2, 3)), make_group([6]))


def test_multiplicity_random_against_bruteforce(rng):
    """200 random (f, L, G) with |G| <= 24 and d <= 4."""
    groups = [make_group(f) for f in ([5], [6], [2, 2], [6, 4], [3, 3], [2, 3, 4], [8], [7, 3])]
    checked = 0
    while checked < 200:
        G = groups[rng.integers(len(groups))]
        d = int(rng.integers(2, 5))
        L = Equation(tuple(int(c) for c in rng.integers(-5, 6, d)))
        if not is_full_rank_single(L, G) or G.order ** (d - 1) > 24**3:
            continue
        f = rng.random(G.order) + 1j * rng.normal(size=G.order) * rng.integers(0, 2)
        assert abs(multiplicity_fourier(f, L, G) - multiplicity_bruteforce(f, L, G)) <= 1e-9
        checked += 1


def test_nonzero_x_never_maps_to_zero():
    for factors in GROUPS + [[9], [5, 5]]:
        G = make_group(factors)
        for m in range(-12, 13):
            if is_coprime_to_order(G, m):
                assert np.all(G.scale_map(m)[1:] != 0)


def test_deviation_examples(rng):
    G = make_group([7])
    assert abs(deviation(np.full(7, 0.3), Equation((1, 2, 3)), G)) <= 1e-15
    L = Equation((1, -1, 2, -2))
    assert has_canceling_partition(L, G).exists
    for _ in range(50):
        assert deviation(rng.random(7), L, G) >= -1e-12


@pytest.mark.parametrize("coeffs", [(1, 1, 1), (1, 2, -3), (1, 1, 1, 1), (1, 3, -2, 5), (1, 1)])
def test_deviation_identities(coeffs, rng):
    G, L = make_group([7]), Equation(coeffs)
    d = L.d
    for _ in range(30):
        f = rng.random(7)
        t = multiplicity_bruteforce(f, L, G).real
        dev = deviation(f, L, G)
        assert abs(dev - (t - f.mean() ** d)) <= 1e-9
        assert abs(deviation(1 - f, L, G) - (-1) ** d * dev) <= 1e-9


def test_deviation_requires_real():
    with pytest.raises(ValueError):
        deviation(np.array([1j, 0, 0, 0, 0]), Equation((1, 1)), make_group([5]))


def test_common_sum(rng):
    for d in (2, 3, 4, 5):
        assert abs(common_sum(np.full(5, 0.5), Equation((1,) * d), make_group([5])) - 2.0 ** (1 - d)) <= 1e-12
    G = make_group([5])
    for _ in range(20):
        f = rng.random(5)
        f = f - f.mean() + 0.5
        f = np.clip(f, 0, 1)
        f = f - f.mean() + 0.5
        if f.min() < 0 or f.max() > 1:
            continue
        assert abs(common_sum(f, Equation((1, 1, 1)), G) - 0.25) <= 1e-9
    with pytest.raises(ValueError):
        common_sum(np.full(5, 1.5), Equation((1, 1, 1)), G)


def test_batched_calls(rng):
    G, L = make_group([6, 4]), Equation((1, 5, -7))
    F = rng.random((5, G.order))
    batch = multiplicity_fourier(F, L, G)
    devs = deviation(F, L, G)
    for row, t, dv in zip(F, batch, devs):
        assert abs(multiplicity_fourier(row, L, G) - t) <= 1e-12
        assert abs(deviation(row, L, G) - dv) <= 1e-12


def test_json_roundtrip(rng):
    f = rng.random(6)
    data = function_to_json(f)
    assert all(isinstance(v, float) for v in data)
    assert_allclose(function_from_json(data), f)
    z = f + 1j * rng.random(6)
    data = function_to_json(z)
    assert all(isinstance(v, list) and len(v) == 2 for v in data)
    assert_allclose(function_from_json(data), z)
