"""Fourier analysis on a finite Abelian group and Fourier-side multiplicities.

Functions on ``G`` and their spectra are plain numpy arrays of length ``|G|``
in rank order (a leading batch axis is allowed everywhere).  With the
canonical pairing of elements and characters,

    dft(f)[a] = E_x exp(2 pi i <a, x>) f(x)
    idft(s)[x] = sum_a s[a] exp(-2 pi i <a, x>)

which is exactly a multidimensional FFT over the cyclic factors.
"""

from __future__ import annotations

import numpy as np

from .config import Equation, is_full_rank_single
from .constants import TIGHT_TOL, TOL
from .group import GroupSpec

__all__ = [
    "dft",
    "idft",
    "is_real_function",
    "multiplicity_fourier",
    "deviation",
    "common_sum",
    "function_to_json",
    "function_from_json",
]


def _check_length(G: GroupSpec, f: np.ndarray) -> None:
    if f.shape[-1] != G.order:
        raise ValueError(f"array has length {f.shape[-1]}, group order is {G.order}")


def _grid(G: GroupSpec, f: np.ndarray) -> np.ndarray:
    return f.reshape(f.shape[:-1] + G.factor_orders)


def _axes(G: GroupSpec, f: np.ndarray) -> tuple[int, ...]:
    m = len(G.factor_orders)
    return tuple(range(f.ndim - 1, f.ndim - 1 + m))


def dft(G: GroupSpec, f) -> np.ndarray:
    f = np.asarray(f)
    _check_length(G, f)
    # numpy's inverse FFT carries the +2 pi i sign and the 1/|G| average.
    out = np.fft.ifftn(_grid(G, f), axes=_axes(G, f))
    return out.reshape(f.shape)


def idft(G: GroupSpec, s) -> np.ndarray:
    s = np.asarray(s)
    _check_length(G, s)
    out = np.fft.fftn(_grid(G, s), axes=_axes(G, s))
    return out.reshape(s.shape)


def is_real_function(f, tol: float = TIGHT_TOL) -> bool:
    return bool(np.all(np.abs(np.imag(f)) <= tol))


def _spectral_terms(f, L: Equation, G: GroupSpec) -> np.ndarray:
    """``prod_i fhat(L_i x)`` for every ``x`` (last axis indexed by rank of x)."""
    if not isinstance(L, Equation):
        L = Equation(tuple(L))
    if not is_full_rank_single(L, G):
        raise ValueError(f"{L} does not have full rank in {G}: no coefficient is coprime to {G.order}")
    fhat = dft(G, f)
    terms = np.ones(fhat.shape, dtype=complex)
    for c in L.coeffs:
        terms = terms * fhat[..., G.scale_map(c)]
    return terms


def multiplicity_fourier(f, L: Equation, G: GroupSpec):
    """``t_L(f) = sum_x prod_i fhat(L_i x)``."""
    out = _spectral_terms(f, L, G).sum(axis=-1)
    return complex(out) if np.ndim(out) == 0 else out


def deviation(f, L: Equation, G: GroupSpec):
    """The sum over ``x != 0`` of ``prod_i fhat(L_i x)``, i.e. ``t_L(f) - E(f)^d``.

    For real ``f`` the terms at ``x`` and ``-x`` are conjugate, so the sum is
    real; a residual imaginary part above tolerance raises ``ArithmeticError``.
    """
    f = np.asarray(f)
    if not is_real_function(f, TOL):
        raise ValueError("deviation is only defined here for real-valued functions")
    out = _spectral_terms(np.real(f), L, G)[..., 1:].sum(axis=-1)
    if np.any(np.abs(np.imag(out)) > TOL):
        raise ArithmeticError(f"deviation has imaginary part {np.max(np.abs(np.imag(out))):.3g}")
    out = np.real(out)
    return float(out) if np.ndim(out) == 0 else out


def common_sum(f, L: Equation, G: GroupSpec):
    """``t_L(f) + t_L(1 - f)`` for ``f`` with values in ``[0, 1]``.

    The result is cross-checked against the closed form
    ``E(f)^d + (1 - E(f))^d + (1 + (-1)^d) * deviation(f)``.
    """
    f = np.asarray(f)
    if not is_real_function(f, TOL):
        raise ValueError("common_sum needs a real-valued function")
    f = np.real(f)
    if np.any(f < -TOL) or np.any(f > 1 + TOL):
        raise ValueError("common_sum needs a function with values in [0, 1]")
    if not isinstance(L, Equation):
        L = Equation(tuple(L))
    total = np.real(multiplicity_fourier(f, L, G) + multiplicity_fourier(1 - f, L, G))
    mean = f.mean(axis=-1)
    closed = mean**L.d + (1 - mean) ** L.d
    if L.d % 2 == 0:
        closed = closed + 2 * deviation(f, L, G)
    if np.any(np.abs(total - closed) > TOL):
        raise ArithmeticError("t_L(f) + t_L(1-f) disagrees with its Fourier closed form")
    return float(total) if np.ndim(total) == 0 else total


def function_to_json(f) -> list:
    """Plain reals when ``f`` is real, otherwise ``[re, im]`` pairs."""
    f = np.asarray(f)
    if is_real_function(f):
        return [float(v) for v in np.real(f)]
    return [[float(v.real), float(v.imag)] for v in f.astype(complex)]


def function_from_json(data) -> np.ndarray:
    if data and isinstance(data[0], (list, tuple)):
        return np.array([complex(re, im) for re, im in data])
    return np.array(data, dtype=float)
