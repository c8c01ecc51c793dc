"""Witness functions with negative deviation for equations lacking a canceling partition.

The construction picks an element ``a`` of maximal order, the set
``U = {L_i a}`` and one representative ``s_j`` of every ``+-`` pair in ``U``.
The phase function ``g_phi`` puts ``e(phi / (2d)^j) / 4r`` on ``s_j``, its
conjugate on ``-s_j`` and ``1/2`` on ``0``; its Fourier inverse ``f_phi`` takes
values in ``[0, 1]`` and has mean ``1/2``.  Up to the factor ``(4r)^-d`` its
deviation is the real trigonometric polynomial

    psi(phi) = sum_{x in X} cos(2 pi c_x phi),

whose frequencies ``c_x`` are nonzero multiples of ``(2d)^-r``.  Since psi
averages to zero over a period and is large near the ends of the period,
it dips below ``-|X| / (2 sqrt 2 (2d)^r)`` somewhere; :func:`find_negative_phase`
locates such a phase numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from . import fourier
from .config import Equation, has_canceling_partition, kernel_size, multiplicity_bruteforce
from .constants import TIGHT_TOL, TOL
from .group import GroupElement, GroupSpec, element_order, is_coprime_to_order, max_order_element

__all__ = [
    "WitnessPlan",
    "WitnessCertificate",
    "DeviationBound",
    "ExponentTwoError",
    "PhaseSearchError",
    "build_plan",
    "phase_spectrum",
    "phase_function",
    "witness_function",
    "psi",
    "find_negative_phase",
    "deviation_bound",
    "witness_exponent2",
    "build_uncommon_witness",
]

# Instances above this many kernel rows skip the brute-force cross-check.
BRUTE_FORCE_CHECK_LIMIT = 10**6
# Grid points evaluated per chunk in the phase search.
_CHUNK = 1 << 20


class ExponentTwoError(ValueError):
    """The group has exponent 2; use :func:`witness_exponent2` instead."""


class PhaseSearchError(RuntimeError):
    pass


@dataclass(frozen=True)
class WitnessPlan:
    equation: Equation
    group: GroupSpec
    a: GroupElement
    U: tuple[GroupElement, ...]
    S: tuple[GroupElement, ...]
    X: tuple[GroupElement, ...]
    # Per x in X and per coefficient i: (j_i, sigma_i) with L_i x = sigma_i s_{j_i}, j 1-based.
    signatures: tuple[tuple[tuple[int, int], ...], ...]
    # c_x = c_numerators[k] / period.
    c_numerators: tuple[int, ...]
    period: int = field(repr=False)

    @property
    def r(self) -> int:
        return len(self.S)

    @property
    def d(self) -> int:
        return self.equation.d

    @property
    def threshold(self) -> float:
        """Bound ``|X| / (2 sqrt 2 (2d)^r)`` that ``psi`` must reach from below."""
        return len(self.X) / (2 * math.sqrt(2) * self.period)

    @property
    def scale(self) -> float:
        """``(4r)^-d``: converts psi into the deviation of ``f_phi``."""
        return (4 * self.r) ** (-self.d)

    def frequencies(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct ``|c_x|`` numerators and how many ``x`` carry each."""
        nums, counts = np.unique(np.abs(self.c_numerators), return_counts=True)
        return nums.astype(np.int64), counts


def build_plan(L: Equation, G: GroupSpec) -> WitnessPlan:
    if not isinstance(L, Equation):
        L = Equation(tuple(L))
    bad = [c for c in L.coeffs if not is_coprime_to_order(G, c)]
    if bad:
        raise ValueError(f"coefficients {bad} of {L} are not coprime to |G| = {G.order}")
    if G.exponent == 2:
        raise ExponentTwoError(f"{G} has exponent 2; no element of order >= 3 exists")
    report = has_canceling_partition(L, G)
    if report.exists:
        raise ValueError(f"{L} has a canceling partition {report.partition} in {G}; it is fully Sidorenko")

    d = L.d
    a = max_order_element(G)
    a_rank = G.rank(a)
    neg = G.neg_map()
    u_ranks = [int(G.scale_map(c)[a_rank]) for c in L.coeffs]
    for u in u_ranks:
        if u == neg[u]:
            raise AssertionError(f"element {G.unrank(u)} of U is its own inverse")

    s_ranks = sorted({min(u, int(neg[u])) for u in u_ranks})
    r = len(s_ranks)
    level = {}
    for j, s in enumerate(s_ranks, start=1):
        level[s] = (j, 1)
        level[int(neg[s])] = (j, -1)

    period = (2 * d) ** r
    scaled = [G.scale_map(c) for c in L.coeffs]
    X, sigs, nums = [], [], []
    for x in range(1, G.order):
        images = [int(m[x]) for m in scaled]
        if not all(y in level for y in images):
            continue
        sig = tuple(level[y] for y in images)
        # Some level must carry unequal numbers of + and - signs, otherwise
        # the coefficients pair off into canceling pairs.
        if not any(
            sum(s for jj, s in sig if jj == j) != 0 for j in range(1, r + 1)
        ):
            raise AssertionError(f"balanced signature at x={G.unrank(x)} despite no canceling partition")
        num = sum(s * (2 * d) ** (r - j) for j, s in sig)
        if num == 0:
            raise AssertionError(f"c_x vanishes at x={G.unrank(x)}")
        if element_order(G, G.unrank(x)) != G.exponent:
            raise AssertionError(f"x={G.unrank(x)} in X is not of maximal order")
        X.append(G.unrank(x))
        sigs.append(sig)
        nums.append(num)

    if a not in X:
        raise AssertionError("the maximal-order element is missing from X")
    return WitnessPlan(
        equation=L,
        group=G,
        a=a,
        U=tuple(G.unrank(u) for u in u_ranks),
        S=tuple(G.unrank(s) for s in s_ranks),
        X=tuple(X),
        signatures=tuple(sigs),
        c_numerators=tuple(nums),
        period=period,
    )


def phase_spectrum(plan: WitnessPlan, phi: float) -> np.ndarray:
    """``g_phi`` as a dense array (it is the spectrum of ``f_phi``)."""
    G, d, r = plan.group, plan.d, plan.r
    neg = G.neg_map()
    g = np.zeros(G.order, dtype=complex)
    g[0] = 0.5
    for j, s in enumerate(plan.S, start=1):
        k = G.rank(s)
        val = np.exp(2j * np.pi * (phi / (2 * d) ** j)) / (4 * r)
        g[k] = val
        g[neg[k]] = np.conj(val)
    return g


# The phase function and the spectrum of the witness coincide under the canonical pairing.
phase_function = phase_spectrum


def witness_function(plan: WitnessPlan, phi: float) -> np.ndarray:
    """``f_phi``, the real ``[0, 1]``-valued Fourier inverse of ``g_phi``."""
    f = fourier.idft(plan.group, phase_spectrum(plan, phi))
    if np.max(np.abs(f.imag)) > TIGHT_TOL:
        raise ArithmeticError("witness function is not real")
    f = f.real
    if f.min() < -TIGHT_TOL or f.max() > 1 + TIGHT_TOL:
        raise ArithmeticError(f"witness function leaves [0, 1]: [{f.min()}, {f.max()}]")
    if abs(f.mean() - 0.5) > TIGHT_TOL:
        raise ArithmeticError(f"witness function has mean {f.mean()}, expected 1/2")
    return np.clip(f, 0.0, 1.0)


def psi(plan: WitnessPlan, phi):
    """``(4r)^d`` times the deviation of ``f_phi``; accepts scalars or arrays."""
    nums, counts = plan.frequencies()
    phi = np.asarray(phi, dtype=float)
    out = np.zeros(phi.shape)
    for n, k in zip(nums, counts):
        out = out + k * np.cos(2 * np.pi * (n / plan.period) * phi)
    return float(out) if out.ndim == 0 else out


def _grid_values(plan: WitnessPlan, N: int, first_chunk: int = 0):
    """Yield ``(start, psi values)`` chunks on the grid ``k * period / N``."""
    nums, counts = plan.frequencies()
    for start in range(first_chunk * _CHUNK, N, _CHUNK):
        k = np.arange(start, min(N, start + _CHUNK), dtype=np.int64)
        vals = np.zeros(k.shape)
        for n, cnt in zip(nums, counts):
            # c * phi = n * k / N turns; reduce the integer part exactly.
            vals += cnt * np.cos(2 * np.pi * (((int(n) * k) % N) / N))
        yield start, vals


def _grid_candidates(plan: WitnessPlan, N: int) -> list[int]:
    """Grid indices worth refining: the global best and the first near-tie."""
    best_k, best_v = 0, math.inf
    chunk_min = []
    for start, vals in _grid_values(plan, N):
        i = int(np.argmin(vals))
        chunk_min.append(float(vals[i]))
        if vals[i] < best_v:
            best_k, best_v = start + i, float(vals[i])
    # psi'' <= |X| pi^2, so a grid point within half a step of any minimiser
    # is at most this far above the minimum.
    slack = len(plan.X) * np.pi**2 * (plan.period / N) ** 2 / 2
    first_chunk = next(c for c, v in enumerate(chunk_min) if v <= best_v + slack)
    for start, vals in _grid_values(plan, N, first_chunk):
        hits = np.flatnonzero(vals <= best_v + slack)
        return sorted({start + int(hits[0]), best_k})
    return [best_k]


def _refine(plan: WitnessPlan, phi: float, step: float) -> tuple[float, float]:
    val = psi(plan, phi)
    # Slide to a local grid minimum so the three-point bracket is valid.
    while True:
        left, right = psi(plan, phi - step), psi(plan, phi + step)
        if min(left, right) >= val:
            break
        phi, val = (phi - step, left) if left < right else (phi + step, right)
    try:
        res = minimize_scalar(
            lambda t: psi(plan, t),
            bracket=(phi - step, phi, phi + step),
            method="golden",
            options={"xtol": 1e-12},
        )
    except ValueError:
        # Not a valid bracket (tie with a neighbour); keep the grid point.
        return phi, val
    if res.fun < val:
        return float(res.x) % plan.period, float(res.fun)
    return phi, val


def find_negative_phase(plan: WitnessPlan, grid_points: Optional[int] = None) -> float:
    """A phase ``phi*`` in ``[0, period)`` with ``psi(phi*) <= -threshold``.

    A uniform grid is scanned and its best point refined by golden-section
    search; among refined candidates within ``1e-12`` of the best value the
    smallest phase wins.  If the threshold is missed the grid is refined
    tenfold once before giving up.
    """
    P = plan.period
    N = grid_points or max(10**5, math.ceil(1000 * P))
    for _ in range(2):
        step = P / N
        found = [_refine(plan, k * step, step) for k in _grid_candidates(plan, N)]
        best = min(v for _, v in found)
        phi, val = min((p, v) for p, v in found if v <= best + 1e-12)
        if val <= -plan.threshold:
            return phi
        N *= 10
    raise PhaseSearchError(
        f"no phase reached psi <= {-plan.threshold:.6g}; best value {val:.6g} at phi={phi:.6g}"
    )


class DeviationBound(NamedTuple):
    tight: float
    universal: float


def deviation_bound(d: int, r: int) -> DeviationBound:
    """Guaranteed magnitude of the witness deviation.

    ``tight = (4r)^-d / (2 sqrt 2 (2d)^r)`` and the ``r``-free relaxation
    ``universal = 1 / (2^(3d+1) sqrt 2 d^(2d))`` (valid because ``r <= d``).
    """
    if not 1 <= r <= d:
        raise ValueError(f"need 1 <= r <= d, got r={r}, d={d}")
    tight = (4 * r) ** (-d) / (2 * math.sqrt(2) * (2 * d) ** r)
    universal = 1 / (2 ** (3 * d + 1) * math.sqrt(2) * d ** (2 * d))
    return DeviationBound(tight, universal)


def witness_exponent2(L: Equation, G: GroupSpec) -> np.ndarray:
    """``1/2 - chi_a / 4`` for groups of exponent 2 and odd ``d``.

    Only the character at ``a`` survives in the deviation, which is
    therefore ``(-1/4)^d < 0``.
    """
    if not isinstance(L, Equation):
        L = Equation(tuple(L))
    if G.exponent != 2:
        raise ValueError(f"{G} does not have exponent 2")
    if L.d % 2 == 0:
        raise ValueError("even d always has a canceling partition when the exponent is 2")
    if not all(is_coprime_to_order(G, c) for c in L.coeffs):
        raise ValueError(f"coefficients of {L} must be odd")
    a = np.array(max_order_element(G).residues)
    chi = (-1.0) ** (G.residues @ a % 2)
    return 0.5 - 0.25 * chi


@dataclass
class WitnessCertificate:
    route: str
    phi_star: Optional[float]
    psi_value: Optional[float]
    deviation: float
    threshold: Optional[float]
    delta_tight: float
    delta_universal: float
    X_size: int
    r: int
    mean: float
    multiplicity: float
    common_sum: float
    bruteforce_error: Optional[float]
    checks: dict
    verified: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def build_uncommon_witness(L: Equation, G: GroupSpec) -> tuple[np.ndarray, WitnessCertificate]:
    """Witness ``f`` with mean 1/2 and negative deviation, plus its checked certificate.

    For odd ``d`` the witness shows ``L`` is not fully Sidorenko
    (``t_L(f) < 2^-d``); for even ``d`` it shows ``L`` is not fully common
    (``t_L(f) + t_L(1-f) < 2^(1-d)``).
    """
    if not isinstance(L, Equation):
        L = Equation(tuple(L))
    report = has_canceling_partition(L, G)
    if report.exists:
        raise ValueError(f"{L} has a canceling partition {report.partition} in {G}")
    d = L.d

    if G.exponent == 2:
        f = witness_exponent2(L, G)
        route, r, x_size, phi_star, psi_val, thr = "exponent2", 1, 1, None, -1.0, None
        # deviation = (4r)^-d * psi with r = 1, psi = -1
        guaranteed = -(0.25**d)
    else:
        plan = build_plan(L, G)
        phi_star = find_negative_phase(plan)
        f = witness_function(plan, phi_star)
        route, r, x_size, thr = "phase", plan.r, len(plan.X), plan.threshold
        psi_val = psi(plan, phi_star)
        guaranteed = -plan.scale * plan.threshold

    bound = deviation_bound(d, r)
    dev = fourier.deviation(f, L, G)
    t = float(np.real(fourier.multiplicity_fourier(f, L, G)))
    csum = fourier.common_sum(f, L, G)
    mean = float(f.mean())

    bf_err = None
    if kernel_size(L, G) <= BRUTE_FORCE_CHECK_LIMIT:
        bf_err = abs(multiplicity_bruteforce(f, L, G) - t)

    checks = {
        "mean_is_half": abs(mean - 0.5) <= TIGHT_TOL,
        "range_in_unit_interval": bool(f.min() >= 0.0 and f.max() <= 1.0),
        "deviation_matches_psi": abs(dev - (4 * r) ** (-d) * psi_val) <= TOL,
        "deviation_below_guarantee": dev <= guaranteed + TOL * 1e-3,
        "deviation_below_universal": dev <= -bound.universal,
        "bruteforce_agrees": bf_err is None or bf_err <= TOL,
    }
    if d % 2:
        checks["sidorenko_violated"] = t <= 2.0**-d - bound.tight
    else:
        checks["common_violated"] = csum <= 2.0 ** (1 - d) - 2 * bound.tight
    cert = WitnessCertificate(
        route=route,
        phi_star=phi_star,
        psi_value=psi_val,
        deviation=dev,
        threshold=thr,
        delta_tight=bound.tight,
        delta_universal=bound.universal,
        X_size=x_size,
        r=r,
        mean=mean,
        multiplicity=t,
        common_sum=csum,
        bruteforce_error=bf_err,
        checks={k: bool(v) for k, v in checks.items()},
        verified=bool(all(checks.values())),
    )
    return f, cert
