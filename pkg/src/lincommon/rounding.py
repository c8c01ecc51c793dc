"""From witness functions to witness sets, and the overall classification.

:func:`round_to_set` turns a ``[0, 1]``-valued function into a set whose
multiplicity exceeds that of the function by at most the non-injective
instances inside the set.  It works on the *injective* functional

    Psi(g) = sum over injective instances v of prod_i g(v_i)

(plus the same sum for ``1 - g`` in common mode).  Moving mass ``eta`` from
one point to another changes ``Psi`` by a concave quadratic in ``eta``, so an
endpoint move never increases it and always makes one more value integral.
The lemma's inequalities are re-checked exactly on the returned set.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .config import (
    Equation,
    coprime_indices,
    count_noninjective,
    has_canceling_partition,
    is_full_rank_single,
    kernel_array,
    noninjective_bound,
    noninjective_mask,
)
from .constants import TIGHT_TOL, TOL
from .group import GroupSpec, is_coprime_to_order
from .witness import WitnessCertificate, build_uncommon_witness, deviation_bound

__all__ = [
    "Classification",
    "RoundingResult",
    "RoundingError",
    "Verdict",
    "CorollaryReport",
    "round_to_set",
    "set_multiplicity",
    "classify",
    "corollary_constant",
    "corollary_sets",
]

SIDORENKO = "sidorenko"
COMMON = "common"
# Exhaustive fallback over sets is only attempted on groups this small.
FALLBACK_MAX_ORDER = 24


class RoundingError(RuntimeError):
    pass


@dataclass
class RoundingResult:
    mode: str
    indicator: np.ndarray
    size: int
    t_set: Fraction
    t_complement: Optional[Fraction]
    t_function: float
    noninjective_in_set: int
    noninjective_in_complement: Optional[int]
    kernel_size: int
    iterations: int
    used_fallback: bool
    checks: dict = field(default_factory=dict)

    @property
    def members(self) -> list[int]:
        return [int(k) for k in np.flatnonzero(self.indicator)]

    @property
    def achieved(self) -> Fraction:
        """``t_L(A)``, or ``t_L(A) + t_L(A^C)`` in common mode."""
        if self.mode == COMMON:
            return self.t_set + self.t_complement
        return self.t_set

    @property
    def bound(self) -> float:
        """Right-hand side of the lemma inequality the set must satisfy."""
        slack = self.noninjective_in_set + (self.noninjective_in_complement or 0)
        return self.t_function + slack / self.kernel_size

    @property
    def verified(self) -> bool:
        return bool(self.checks) and all(self.checks.values())


class _InjectiveFunctional:
    """``Psi`` with its gradient and pairwise Hessian on one kernel."""

    def __init__(self, instances: np.ndarray, order: int, mode: str):
        self.rows = instances[~noninjective_mask(instances)]
        self.order = order
        self.mode = mode

    def _parts(self, g):
        vals = g[self.rows]
        yield 1.0, vals
        if self.mode == COMMON:
            yield -1.0, 1.0 - vals

    def value(self, g: np.ndarray) -> float:
        return float(sum(v.prod(axis=1).sum() for _, v in self._parts(g)))

    def derivatives(self, g: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        n, d = self.order, self.rows.shape[1]
        value = 0.0
        grad = np.zeros(n)
        hess = np.zeros(n * n)
        for sign, vals in self._parts(g):
            value += vals.prod(axis=1).sum()
            for i in range(d):
                others = np.delete(vals, i, axis=1).prod(axis=1)
                grad += sign * np.bincount(self.rows[:, i], weights=others, minlength=n)
            # Two derivatives of the (1 - g) part pick up sign**2 = 1.
            for i, j in itertools.permutations(range(d), 2):
                rest = np.delete(vals, [i, j], axis=1).prod(axis=1)
                hess += np.bincount(self.rows[:, i] * n + self.rows[:, j], weights=rest, minlength=n * n)
        return value, grad, hess.reshape(n, n)


def _snap(g: np.ndarray) -> np.ndarray:
    g = np.clip(g, 0.0, 1.0)
    g[g <= TIGHT_TOL] = 0.0
    g[g >= 1 - TIGHT_TOL] = 1.0
    return g


def _fractional(g: np.ndarray) -> np.ndarray:
    return np.flatnonzero((g > 0.0) & (g < 1.0))


def _transfer(functional: _InjectiveFunctional, g: np.ndarray, max_iter: int) -> tuple[np.ndarray, int]:
    """Pairwise mass transfers until at most one value is fractional."""
    it = 0
    while it < max_iter:
        R = _fractional(g)
        if R.size < 2:
            break
        it += 1
        F0, grad, hess = functional.derivatives(g)
        ia, ib = np.triu_indices(R.size, k=1)
        a, b = R[ia], R[ib]
        alpha = grad[a] - grad[b]
        beta = -hess[a, b]
        lo = np.maximum(-g[a], g[b] - 1.0)
        hi = np.minimum(1.0 - g[a], g[b])
        ends = np.stack([lo, hi], axis=1)
        vals = F0 + alpha[:, None] * ends + beta[:, None] * ends**2
        k = int(np.argmin(vals))
        scale = max(1.0, abs(F0))
        if vals.flat[k] <= F0 + TOL * scale:
            p, e = divmod(k, 2)
            eta = ends[p, e]
        else:
            # Only reachable if the quadratic is convex somewhere; take the
            # best interior stationary point instead.
            with np.errstate(divide="ignore", invalid="ignore"):
                eta_in = np.where(beta > 0, -alpha / (2 * beta), 0.0)
            eta_in = np.clip(eta_in, lo, hi)
            inner = F0 + alpha * eta_in + beta * eta_in**2
            p = int(np.argmin(inner))
            if inner[p] >= F0:
                break
            eta = eta_in[p]
        g = g.copy()
        g[a[p]] += eta
        g[b[p]] -= eta
        g = _snap(g)
    return g, it


def _finish(functional: _InjectiveFunctional, g: np.ndarray) -> np.ndarray:
    """Resolve the last fractional value; ``Psi`` is affine in it."""
    R = _fractional(g)
    if R.size != 1:
        return g
    c = R[0]
    lo, hi = g.copy(), g.copy()
    lo[c], hi[c] = 0.0, 1.0
    if functional.mode == SIDORENKO:
        return lo
    return lo if functional.value(lo) <= functional.value(hi) else hi


def _exhaustive(functional: _InjectiveFunctional, mean: float, order: int) -> np.ndarray:
    sizes = sorted({math.floor(mean * order + TOL), math.ceil(mean * order - TOL)})
    if functional.mode == SIDORENKO:
        sizes = sizes[:1]
    best, best_val = None, math.inf
    for k in sizes:
        for members in itertools.combinations(range(order), k):
            g = np.zeros(order)
            g[list(members)] = 1.0
            v = functional.value(g)
            if v < best_val:
                best, best_val = g, v
    return best


def set_multiplicity(indicator: np.ndarray, instances: np.ndarray) -> tuple[Fraction, int]:
    """Exact ``t_L(A)`` and ``|C#(L) intersect A^d|`` from a kernel array."""
    inside = np.asarray(indicator, dtype=bool)[instances].all(axis=1)
    nonin = int((inside & noninjective_mask(instances)).sum())
    return Fraction(int(inside.sum()), instances.shape[0]), nonin


def round_to_set(f, L: Equation, G: GroupSpec, mode: str = SIDORENKO) -> RoundingResult:
    """Convert ``f: G -> [0, 1]`` into a set satisfying the maps-to-sets inequalities.

    In ``"sidorenko"`` mode the set ``A`` has ``|A| >= E(f)|G| - 1`` and
    ``t_L(A) <= t_L(f) + |C# & A^d| / |C|``; in ``"common"`` mode
    ``t_L(A) + t_L(A^C) <= t_L(f) + t_L(1-f) + (|C# & A^d| + |C# & (A^C)^d|) / |C|``.
    Raises :class:`RoundingError` if neither local search nor the exhaustive
    fallback produces a verified set.
    """
    if mode not in (SIDORENKO, COMMON):
        raise ValueError(f"unknown mode {mode!r}")
    if not isinstance(L, Equation):
        L = Equation(tuple(L))
    f = np.asarray(f)
    if np.any(np.abs(np.imag(f)) > TIGHT_TOL):
        raise ValueError("rounding needs a real-valued function")
    f = np.real(f).astype(float)
    if f.shape != (G.order,):
        raise ValueError(f"function has shape {f.shape}, expected ({G.order},)")
    if f.min() < -TOL or f.max() > 1 + TOL:
        raise ValueError("rounding needs a function with values in [0, 1]")
    if not is_full_rank_single(L, G):
        raise ValueError(f"{L} has no coefficient coprime to |G| = {G.order}")

    instances = kernel_array(L, G)
    functional = _InjectiveFunctional(instances, G.order, mode)

    def t(h):
        return float(h[instances].prod(axis=1).mean())

    t_f = t(f) + (t(1.0 - f) if mode == COMMON else 0.0)
    mean = float(f.mean())

    def evaluate(g, iterations, fallback):
        A = g >= 0.5
        t_set, non_set = set_multiplicity(A, instances)
        t_comp = non_comp = None
        if mode == COMMON:
            t_comp, non_comp = set_multiplicity(~A, instances)
        res = RoundingResult(
            mode=mode,
            indicator=A,
            size=int(A.sum()),
            t_set=t_set,
            t_complement=t_comp,
            t_function=t_f,
            noninjective_in_set=non_set,
            noninjective_in_complement=non_comp,
            kernel_size=instances.shape[0],
            iterations=iterations,
            used_fallback=fallback,
        )
        res.checks["lemma_inequality"] = float(res.achieved) <= res.bound + TOL
        if mode == SIDORENKO:
            res.checks["size_lower_bound"] = res.size >= mean * G.order - 1 - TOL
        return res

    g, iterations = _transfer(functional, _snap(f.copy()), max_iter=50 * G.order)
    if _fractional(g).size <= 1:
        result = evaluate(_finish(functional, g), iterations, False)
        if result.verified:
            return result
    if G.order > FALLBACK_MAX_ORDER:
        raise RoundingError(
            f"local search left {_fractional(g).size} fractional values after {iterations} "
            f"iterations and |G| = {G.order} exceeds the exhaustive limit {FALLBACK_MAX_ORDER}"
        )
    result = evaluate(_exhaustive(functional, mean, G.order), iterations, True)
    if not result.verified:
        raise RoundingError(f"exhaustive fallback failed the lemma checks: {result.checks}")
    return result


class Classification(str, enum.Enum):
    FULLY_SIDORENKO = "FullySidorenko"
    FULLY_COMMON_NOT_FULLY_SIDORENKO = "FullyCommonNotFullySidorenko"
    NOT_FULLY_COMMON = "NotFullyCommon"
    NOT_APPLICABLE = "NotApplicable"


def corollary_constant(d: int) -> float:
    """``C = d^2 / Delta`` with ``Delta = 1 / (2^(3d+1) sqrt 2 d^(2d))``."""
    return d * d / deviation_bound(d, 1).universal


@dataclass
class Verdict:
    classification: Classification
    equation: Equation
    group: GroupSpec
    partition: Optional[tuple[tuple[int, int], ...]] = None
    certificate: Optional[WitnessCertificate] = None
    witness: Optional[np.ndarray] = field(default=None, repr=False)
    corollary_constant: float = math.nan
    margins: dict = field(default_factory=dict)
    reason: str = ""

    def to_dict(self) -> dict:
        out = {
            "classification": self.classification.value,
            "group": str(self.group),
            "equation": list(self.equation.coeffs),
            "corollary_constant": self.corollary_constant,
            "margins": self.margins,
        }
        if self.partition is not None:
            out["partition"] = [list(p) for p in self.partition]
        if self.certificate is not None:
            out["witness_certificate"] = self.certificate.to_dict()
        if self.reason:
            out["reason"] = self.reason
        return out


def classify(L: Equation, G: GroupSpec) -> Verdict:
    """Decide whether ``L`` is fully Sidorenko, fully common, or neither over ``G``.

    Negative verdicts carry a verified witness function and certificate;
    the fully Sidorenko verdict carries the canceling partition.
    """
    if not isinstance(L, Equation):
        L = Equation(tuple(L))
    d = L.d
    C = corollary_constant(d)
    bad = [c for c in L.coeffs if not is_coprime_to_order(G, c)]
    if bad:
        return Verdict(
            Classification.NOT_APPLICABLE, L, G, corollary_constant=C,
            reason=f"coefficients {bad} are not coprime to |G| = {G.order}",
        )
    report = has_canceling_partition(L, G)
    if report.exists:
        return Verdict(Classification.FULLY_SIDORENKO, L, G, partition=report.partition, corollary_constant=C)

    f, cert = build_uncommon_witness(L, G)
    if d % 2:
        kind = Classification.FULLY_COMMON_NOT_FULLY_SIDORENKO
        margins = {"sidorenko_margin": cert.multiplicity - 2.0**-d}
    else:
        kind = Classification.NOT_FULLY_COMMON
        margins = {"common_margin": cert.common_sum - 2.0 ** (1 - d)}
    return Verdict(kind, L, G, certificate=cert, witness=f, corollary_constant=C, margins=margins)


@dataclass
class CorollaryReport:
    verdict: Verdict
    rounding: RoundingResult
    corollary_constant: float
    below_threshold: bool
    # Odd d: t(A_1) - (|A_1|/|G|)^d.  Even d: t(A_2) + t(A_2^C) - 2^(1-d).
    margin: float
    noninjective_count: int
    noninjective_bound: Optional[int]

    def to_dict(self) -> dict:
        r = self.rounding
        out = {
            "classification": self.verdict.classification.value,
            "mode": r.mode,
            "set": r.members,
            "set_size": r.size,
            "t_set": float(r.t_set),
            "achieved": float(r.achieved),
            "lemma_bound": r.bound,
            "lemma_checks": r.checks,
            "margin": self.margin,
            "corollary_constant": self.corollary_constant,
            "below_corollary_threshold": self.below_threshold,
            "noninjective_count": self.noninjective_count,
            "noninjective_bound": self.noninjective_bound,
        }
        if r.t_complement is not None:
            out["t_complement"] = float(r.t_complement)
        return out


def corollary_sets(L: Equation, G: GroupSpec) -> CorollaryReport:
    """Round the witness function of a negative verdict to a witness set.

    The set inequalities from the rounding lemma always hold; whether the
    set itself violates the Sidorenko / common inequality is only guaranteed
    when ``|G|`` exceeds the corollary constant, which ``below_threshold``
    reports.
    """
    if not isinstance(L, Equation):
        L = Equation(tuple(L))
    verdict = classify(L, G)
    if verdict.classification in (Classification.FULLY_SIDORENKO, Classification.NOT_APPLICABLE):
        raise ValueError(f"{L} over {G} is {verdict.classification.value}; there is no witness set")
    d = L.d
    if d % 2:
        res = round_to_set(verdict.witness, L, G, SIDORENKO)
        margin = float(res.t_set) - (res.size / G.order) ** d
    else:
        res = round_to_set(verdict.witness, L, G, COMMON)
        margin = float(res.achieved) - 2.0 ** (1 - d)
    bound = None
    if len(coprime_indices(L, G)) >= 3:
        bound = int(noninjective_bound(L, G))
    return CorollaryReport(
        verdict=verdict,
        rounding=res,
        corollary_constant=verdict.corollary_constant,
        below_threshold=G.order <= verdict.corollary_constant,
        margin=margin,
        noninjective_count=count_noninjective(L, G),
        noninjective_bound=bound,
    )
