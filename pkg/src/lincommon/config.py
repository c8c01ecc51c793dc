"""Single linear equations over a finite Abelian group.

Instances of ``L = (L_1, ..., L_d)`` are vectors ``v`` in ``G^d`` with
``sum_i L_i v_i = 0``.  Instances are handled as integer arrays of element
ranks with shape ``(N, d)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Sequence

import numpy as np

from .group import GroupElement, GroupSpec, is_coprime_to_order

__all__ = [
    "Equation",
    "LinearSystem",
    "CancelReport",
    "parse_equation",
    "has_canceling_partition",
    "is_full_rank_single",
    "coprime_indices",
    "kernel_blocks",
    "kernel_array",
    "enumerate_kernel",
    "multiplicity_bruteforce",
    "count_noninjective",
    "noninjective_mask",
    "noninjective_bound",
]

# Generic k >= 2 systems scan all of G^d; refuse anything larger.
MAX_BRUTE_FORCE = 10**8
# Rows per kernel block; keeps memory bounded for |G|^(d-1) up to ~1e7.
BLOCK_ROWS = 1 << 18


@dataclass(frozen=True)
class Equation:
    coeffs: tuple[int, ...]

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coeffs)
        if len(coeffs) < 2:
            raise ValueError("an equation needs at least two variables")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def d(self) -> int:
        return len(self.coeffs)

    def __str__(self):
        return ",".join(str(c) for c in self.coeffs)

    def reduced(self, G: GroupSpec) -> tuple[int, ...]:
        """Coefficients reduced modulo the exponent of ``G``."""
        return tuple(c % G.exponent for c in self.coeffs)


@dataclass(frozen=True)
class LinearSystem:
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(c) for c in row) for row in self.rows)
        if not rows:
            raise ValueError("a system needs at least one row")
        d = len(rows[0])
        if any(len(r) != d for r in rows):
            raise ValueError("ragged coefficient matrix")
        if len(rows) > d:
            raise ValueError(f"k={len(rows)} rows exceed d={d} variables")
        object.__setattr__(self, "rows", rows)

    @property
    def k(self) -> int:
        return len(self.rows)

    @property
    def d(self) -> int:
        return len(self.rows[0])

    @classmethod
    def from_equation(cls, L: Equation) -> LinearSystem:
        return cls((L.coeffs,))


@dataclass(frozen=True)
class CancelReport:
    exists: bool
    partition: Optional[tuple[tuple[int, int], ...]] = None


def parse_equation(text: str) -> Equation:
    """Parse a comma-separated coefficient list such as ``"1,1,-2"``."""
    coeffs = []
    for token in text.split(","):
        try:
            coeffs.append(int(token.strip()))
        except ValueError:
            raise ValueError(f"cannot parse coefficient {token!r} in {text!r}") from None
    return Equation(tuple(coeffs))


def _as_system(L) -> LinearSystem:
    if isinstance(L, LinearSystem):
        return L
    if isinstance(L, Equation):
        return LinearSystem.from_equation(L)
    return LinearSystem.from_equation(Equation(tuple(L)))


def _as_equation(L) -> Equation:
    return L if isinstance(L, Equation) else Equation(tuple(L))


def has_canceling_partition(L: Equation, G: GroupSpec) -> CancelReport:
    """Search for a perfect matching of ``[d]`` into canceling pairs.

    A pair ``{i, j}`` cancels in ``G`` when ``exponent(G)`` divides
    ``L_i + L_j``.  The returned partition uses 0-based indices.
    """
    L = _as_equation(L)
    d, e = L.d, G.exponent
    if d % 2:
        return CancelReport(False)
    adj = [[(L.coeffs[i] + L.coeffs[j]) % e == 0 for j in range(d)] for i in range(d)]

    def match(free: tuple[int, ...]) -> Optional[list[tuple[int, int]]]:
        if not free:
            return []
        i, rest = free[0], free[1:]
        for pos, j in enumerate(rest):
            if adj[i][j]:
                tail = match(rest[:pos] + rest[pos + 1:])
                if tail is not None:
                    return [(i, j)] + tail
        return None

    found = match(tuple(range(d)))
    if found is None:
        return CancelReport(False)
    return CancelReport(True, tuple(found))


def coprime_indices(L: Equation, G: GroupSpec) -> list[int]:
    return [i for i, c in enumerate(_as_equation(L).coeffs) if is_coprime_to_order(G, c)]


def is_full_rank_single(L: Equation, G: GroupSpec) -> bool:
    return bool(coprime_indices(L, G))


def _pivot(L: Equation, G: GroupSpec) -> int:
    idx = coprime_indices(L, G)
    if not idx:
        raise ValueError(f"no coefficient of {L} is coprime to |G| = {G.order}")
    return idx[0]


def kernel_size(L: Equation, G: GroupSpec) -> int:
    _pivot(_as_equation(L), G)
    return G.order ** (_as_equation(L).d - 1)


def kernel_blocks(L: Equation, G: GroupSpec, block_rows: int = BLOCK_ROWS) -> Iterator[np.ndarray]:
    """Yield the kernel as ``(rows, d)`` rank arrays.

    The free coordinates (all but the first coprime coefficient) run
    lexicographically; the pivot coordinate is solved with a modular inverse.
    """
    L = _as_equation(L)
    p = _pivot(L, G)
    d, n, e = L.d, G.order, G.exponent
    free = [i for i in range(d) if i != p]
    inv = pow(L.coeffs[p] % e, -1, e)
    nf = np.array(G.factor_orders, dtype=np.int64)
    # Residues of L_i * x for every x, one table per free coefficient.
    tables = [np.mod(G.residues * (L.coeffs[i] % e), nf) for i in free]
    solve = (-inv) % e
    # Trailing free coordinates form a full grid inside each block.
    inner = 1
    while inner < d - 1 and n ** (inner + 1) <= block_rows:
        inner += 1
    outer = d - 1 - inner
    inner_grid = np.indices((n,) * inner).reshape(inner, -1)
    rows = inner_grid.shape[1]
    inner_acc = np.zeros((rows, len(nf)), dtype=np.int64)
    for col in range(inner):
        inner_acc += tables[outer + col][inner_grid[col]]
    for prefix in itertools.product(range(n), repeat=outer):
        block = np.empty((rows, d), dtype=np.int64)
        acc = inner_acc.copy()
        for col, x in enumerate(prefix):
            block[:, free[col]] = x
            acc += tables[col][x]
        for col in range(inner):
            block[:, free[outer + col]] = inner_grid[col]
        block[:, p] = G.ranks_of(solve * acc)
        yield block


def kernel_array(L: Equation, G: GroupSpec) -> np.ndarray:
    """The whole kernel as one ``(|G|^(d-1), d)`` rank array."""
    return np.concatenate(list(kernel_blocks(L, G)), axis=0)


def enumerate_kernel(L: Equation, G: GroupSpec) -> Iterator[tuple[GroupElement, ...]]:
    for block in kernel_blocks(L, G):
        for row in block:
            yield tuple(G.unrank(int(k)) for k in row)


def _system_blocks(S: LinearSystem, G: GroupSpec, block_rows: int = BLOCK_ROWS) -> Iterator[np.ndarray]:
    n, d = G.order, S.d
    if n**d > MAX_BRUTE_FORCE:
        raise ValueError(f"|G|^d = {n**d} exceeds the brute-force limit {MAX_BRUTE_FORCE}")
    e = G.exponent
    nf = np.array(G.factor_orders, dtype=np.int64)
    res = G.residues
    flat = np.arange(n**d, dtype=np.int64)
    for start in range(0, n**d, block_rows):
        idx = flat[start:start + block_rows]
        ranks = np.stack(np.unravel_index(idx, (n,) * d), axis=1).astype(np.int64)
        keep = np.ones(len(idx), dtype=bool)
        for row in S.rows:
            acc = np.zeros((len(idx), res.shape[1]), dtype=np.int64)
            for i, c in enumerate(row):
                acc = (acc + (c % e) * res[ranks[:, i]]) % nf
            keep &= ~acc.any(axis=1)
        yield ranks[keep]


def multiplicity_bruteforce(f, L, G: GroupSpec) -> complex:
    """Average of ``prod_i f(v_i)`` over every instance ``v``.

    ``L`` may be an :class:`Equation` (kernel enumerated by pivoting) or a
    :class:`LinearSystem` with ``k >= 2`` rows (all of ``G^d`` filtered).
    ``f`` may also be a stack of functions with shape ``(batch, |G|)``, in
    which case one multiplicity per row is returned.
    """
    f = np.asarray(f)
    if f.shape[-1] != G.order:
        raise ValueError(f"function has length {f.shape[-1]}, group order is {G.order}")
    S = _as_system(L)
    if S.k == 1:
        blocks = kernel_blocks(Equation(S.rows[0]), G)
    else:
        blocks = _system_blocks(S, G)
    # Gathering whole rows of the transposed batch is much faster than
    # fancy-indexing the last axis.
    ft = np.ascontiguousarray(np.moveaxis(f, -1, 0))
    total = np.zeros(f.shape[:-1], dtype=ft.dtype if np.iscomplexobj(ft) else float)
    count = 0
    for block in blocks:
        prod = ft[block[:, 0]]
        for i in range(1, S.d):
            prod = prod * ft[block[:, i]]
        total = total + prod.sum(axis=0)
        count += block.shape[0]
    out = (total / count).astype(complex)
    return complex(out) if out.ndim == 0 else out


def noninjective_mask(block: np.ndarray) -> np.ndarray:
    """Rows of an instance array with at least one repeated coordinate."""
    d = block.shape[1]
    mask = np.zeros(block.shape[0], dtype=bool)
    for i, j in itertools.combinations(range(d), 2):
        mask |= block[:, i] == block[:, j]
    return mask


def count_noninjective(L: Equation, G: GroupSpec) -> int:
    return int(sum(noninjective_mask(b).sum() for b in kernel_blocks(L, G)))


def noninjective_bound(L: Equation, G: GroupSpec) -> Fraction:
    """``C(d, 2) * |G|^(d-2)``; only claimed with >= 3 coprime coefficients."""
    L = _as_equation(L)
    if len(coprime_indices(L, G)) < 3:
        raise ValueError(
            f"the non-injective bound needs three coefficients coprime to {G.order}; {L} has fewer"
        )
    return Fraction(math.comb(L.d, 2) * G.order ** (L.d - 2))
