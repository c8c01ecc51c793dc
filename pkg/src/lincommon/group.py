"""Finite Abelian groups given as ordered products of cyclic groups.

Elements are residue vectors ``(x_1, ..., x_m)`` with ``0 <= x_i < n_i``.
Every element also has an integer *rank* (lexicographic mixed radix, last
factor fastest), and all dense data on the group (functions, spectra) is
stored in rank order.  Characters are paired with elements through the
fixed isomorphism ``a -> (x -> exp(2 pi i sum_i a_i x_i / n_i))``, so a
spectrum shares the index space of the group itself.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Iterable, Sequence, Union

import numpy as np

__all__ = [
    "GroupSpec",
    "GroupElement",
    "make_group",
    "parse_group",
    "add",
    "neg",
    "zero",
    "scalar_mul",
    "element_order",
    "max_order_element",
    "character_eval",
    "is_coprime_to_order",
]

# Orders beyond this do not fit the int64 rank arrays used downstream.
MAX_ORDER = 2**62


@dataclass(frozen=True)
class GroupSpec:
    factor_orders: tuple[int, ...]
    order: int = field(init=False)
    exponent: int = field(init=False)

    def __post_init__(self):
        factors = tuple(int(n) for n in self.factor_orders)
        if not factors:
            raise ValueError("a group needs at least one cyclic factor")
        for n in factors:
            if n < 2:
                raise ValueError(f"cyclic factor orders must be >= 2, got {n}")
        order = 1
        for n in factors:
            order *= n
            if order > MAX_ORDER:
                raise OverflowError(f"group order exceeds {MAX_ORDER}")
        object.__setattr__(self, "factor_orders", factors)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "exponent", reduce(math.lcm, factors))

    def __str__(self):
        return "x".join(f"Z{n}" for n in self.factor_orders)

    @property
    def rank_of_factors(self) -> int:
        """Number of cyclic factors in the presentation."""
        return len(self.factor_orders)

    @cached_property
    def _strides(self) -> np.ndarray:
        n = np.array(self.factor_orders, dtype=np.int64)
        return np.concatenate([np.cumprod(n[::-1])[::-1][1:], [1]]).astype(np.int64)

    @cached_property
    def residues(self) -> np.ndarray:
        """All elements as an ``(order, m)`` residue array, in rank order."""
        grids = np.indices(self.factor_orders).reshape(len(self.factor_orders), -1)
        return np.ascontiguousarray(grids.T.astype(np.int64))

    def rank(self, x) -> int:
        r = _residues(self, x)
        return int(np.dot(r, self._strides))

    def unrank(self, k: int) -> GroupElement:
        if not 0 <= k < self.order:
            raise IndexError(f"rank {k} out of range for group of order {self.order}")
        return GroupElement(tuple(int(v) for v in self.residues[k]))

    def ranks_of(self, residues: np.ndarray) -> np.ndarray:
        """Vectorised rank of a ``(..., m)`` residue array (entries reduced first)."""
        residues = np.asarray(residues)
        out = np.zeros(residues.shape[:-1], dtype=np.int64)
        for i, (n, stride) in enumerate(zip(self.factor_orders, self._strides)):
            out += (residues[..., i] % n) * int(stride)
        return out

    def elements(self) -> Iterable[GroupElement]:
        for k in range(self.order):
            yield GroupElement(tuple(int(v) for v in self.residues[k]))

    def scale_map(self, m: int) -> np.ndarray:
        """Permutation-like array ``p`` with ``p[rank(x)] = rank(m * x)``."""
        return self.ranks_of(self.residues * (int(m) % self.exponent))

    def neg_map(self) -> np.ndarray:
        return self.scale_map(-1)

    def element(self, *residues: int) -> GroupElement:
        return GroupElement(_residues(self, residues if len(residues) != 1 else residues[0]))


@dataclass(frozen=True)
class GroupElement:
    residues: tuple[int, ...]

    def __iter__(self):
        return iter(self.residues)

    def __len__(self):
        return len(self.residues)

    def __getitem__(self, i):
        return self.residues[i]


ElementLike = Union[GroupElement, Sequence[int], int, np.ndarray]


def _residues(G: GroupSpec, x: ElementLike) -> tuple[int, ...]:
    if isinstance(x, GroupElement):
        vals = x.residues
    elif isinstance(x, (int, np.integer)):
        vals = (int(x),)
    else:
        vals = tuple(int(v) for v in x)
    if len(vals) != len(G.factor_orders):
        raise ValueError(
            f"element has {len(vals)} components, group {G} has {len(G.factor_orders)}"
        )
    return tuple(v % n for v, n in zip(vals, G.factor_orders))


def make_group(factor_orders: Sequence[int]) -> GroupSpec:
    return GroupSpec(tuple(factor_orders))


_GROUP_TOKEN = re.compile(r"^z(\d+)$")


def parse_group(text: str) -> GroupSpec:
    """Parse strings such as ``"Z6xZ4"`` (case-insensitive)."""
    factors = []
    for token in text.strip().lower().split("x"):
        m = _GROUP_TOKEN.match(token.strip())
        if m is None:
            raise ValueError(f"cannot parse group factor {token!r} in {text!r}")
        factors.append(int(m.group(1)))
    return make_group(factors)


def zero(G: GroupSpec) -> GroupElement:
    return GroupElement((0,) * len(G.factor_orders))


def add(G: GroupSpec, x: ElementLike, y: ElementLike) -> GroupElement:
    xs, ys = _residues(G, x), _residues(G, y)
    return GroupElement(tuple((a + b) % n for a, b, n in zip(xs, ys, G.factor_orders)))


def neg(G: GroupSpec, x: ElementLike) -> GroupElement:
    return scalar_mul(G, -1, x)


def scalar_mul(G: GroupSpec, m: int, x: ElementLike) -> GroupElement:
    xs = _residues(G, x)
    return GroupElement(tuple((m % n) * a % n for a, n in zip(xs, G.factor_orders)))


def element_order(G: GroupSpec, x: ElementLike) -> int:
    """Least ``m >= 1`` with ``m * x = 0``: the lcm of the component orders."""
    xs = _residues(G, x)
    return reduce(math.lcm, (n // math.gcd(a, n) for a, n in zip(xs, G.factor_orders)), 1)


def max_order_element(G: GroupSpec) -> GroupElement:
    # The all-ones vector has order lcm(n_1, ..., n_m), the exponent.
    return GroupElement((1,) * len(G.factor_orders))


def character_eval(G: GroupSpec, a: ElementLike, x: ElementLike) -> complex:
    as_, xs = _residues(G, a), _residues(G, x)
    # Accumulate the phase as an exact fraction of a full turn.
    num = sum(ai * xi * (G.exponent // n) for ai, xi, n in zip(as_, xs, G.factor_orders))
    return complex(np.exp(2j * np.pi * ((num % G.exponent) / G.exponent)))


def is_coprime_to_order(G: GroupSpec, m: int) -> bool:
    r = int(m) % G.order
    return r != 0 and math.gcd(r, G.order) == 1
