"""Command-line front end.

Exit codes: 0 ok, 1 parse error, 2 hypothesis not met (a coefficient shares
a factor with |G|), 3 no witness exists (fully Sidorenko case), 4 internal
check failed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import fourier
from .config import (
    Equation,
    has_canceling_partition,
    kernel_size,
    multiplicity_bruteforce,
    parse_equation,
)
from .constants import TOL
from .group import GroupSpec, is_coprime_to_order, parse_group
from .rounding import Classification, RoundingError, classify
from .serialize import csv_rows, dumps
from .witness import (
    ExponentTwoError,
    PhaseSearchError,
    build_plan,
    build_uncommon_witness,
    psi,
)

EXIT_OK, EXIT_PARSE, EXIT_NOT_APPLICABLE, EXIT_NO_WITNESS, EXIT_INTERNAL = 0, 1, 2, 3, 4
VERIFY_MAX_KERNEL = 10**7


class CliExit(Exception):
    def __init__(self, code: int, message: str = ""):
        super().__init__(message)
        self.code = code
        self.message = message


@dataclass(frozen=True)
class RunConfig:
    command: str
    group: Optional[str]
    equation: Optional[str]
    seed: int = 0
    samples: int = 1001
    trials: int = 50
    out: Optional[str] = None
    format: str = "json"
    replay: Optional[str] = None


def _parse_inputs(cfg: RunConfig) -> tuple[GroupSpec, Equation]:
    try:
        G = parse_group(cfg.group)
    except (ValueError, OverflowError) as exc:
        raise CliExit(EXIT_PARSE, f"bad group: {exc}") from None
    try:
        L = parse_equation(cfg.equation)
    except ValueError as exc:
        raise CliExit(EXIT_PARSE, f"bad equation: {exc}") from None
    return G, L


def _require_json(cfg: RunConfig) -> None:
    if cfg.format != "json":
        raise CliExit(EXIT_PARSE, f"command {cfg.command!r} only supports --format json")


def _not_coprime(L: Equation, G: GroupSpec) -> list[int]:
    return [c for c in L.coeffs if not is_coprime_to_order(G, c)]


def cmd_classify(cfg: RunConfig) -> tuple[str, int]:
    _require_json(cfg)
    G, L = _parse_inputs(cfg)
    verdict = classify(L, G)
    code = EXIT_OK
    if verdict.classification is Classification.NOT_APPLICABLE:
        code = EXIT_NOT_APPLICABLE
    elif verdict.certificate is not None and not verdict.certificate.verified:
        code = EXIT_INTERNAL
    return dumps(verdict.to_dict()), code


def cmd_witness(cfg: RunConfig) -> tuple[str, int]:
    G, L = _parse_inputs(cfg)
    bad = _not_coprime(L, G)
    if bad:
        raise CliExit(EXIT_NOT_APPLICABLE, f"coefficients {bad} are not coprime to |G| = {G.order}")
    report = has_canceling_partition(L, G)
    if report.exists:
        raise CliExit(
            EXIT_NO_WITNESS,
            f"{L} has the canceling partition {[list(p) for p in report.partition]} in {G}; it is fully Sidorenko",
        )
    f, cert = build_uncommon_witness(L, G)
    code = EXIT_OK if cert.verified else EXIT_INTERNAL
    if cfg.format == "csv":
        rows = [(k, " ".join(map(str, G.residues[k])), float(v)) for k, v in enumerate(f)]
        return csv_rows(["rank", "element", "value"], rows), code
    payload = {
        "group": str(G),
        "equation": list(L.coeffs),
        "certificate": cert.to_dict(),
        "function": fourier.function_to_json(f),
    }
    return dumps(payload), code


def cmd_sweep(cfg: RunConfig) -> tuple[str, int]:
    G, L = _parse_inputs(cfg)
    bad = _not_coprime(L, G)
    if bad:
        raise CliExit(EXIT_NOT_APPLICABLE, f"coefficients {bad} are not coprime to |G| = {G.order}")
    if cfg.samples < 2:
        raise CliExit(EXIT_PARSE, "--samples must be at least 2")
    try:
        plan = build_plan(L, G)
    except ExponentTwoError as exc:
        raise CliExit(EXIT_NO_WITNESS, f"{exc}; the phase family does not exist here") from None
    except ValueError as exc:
        raise CliExit(EXIT_NO_WITNESS, str(exc)) from None
    phis = np.linspace(0.0, float(plan.period), cfg.samples)
    values = psi(plan, phis)
    devs = plan.scale * values
    if cfg.format == "json":
        payload = {
            "group": str(G),
            "equation": list(L.coeffs),
            "period": plan.period,
            "threshold": plan.threshold,
            "X_size": len(plan.X),
            "r": plan.r,
            "rows": [[float(p), float(v), float(dv)] for p, v, dv in zip(phis, values, devs)],
        }
        return dumps(payload), EXIT_OK
    return csv_rows(["phi", "psi", "deviation"], zip(phis, values, devs)), EXIT_OK


def _properties(L: Equation, G: GroupSpec, cancel: bool):
    """Named property checks ``f -> error``; a check passes when error <= TOL."""
    d = L.d

    def fourier_vs_bruteforce(f):
        return abs(fourier.multiplicity_fourier(f, L, G) - multiplicity_bruteforce(f, L, G))

    def parseval(f):
        return abs(np.sum(np.abs(fourier.dft(G, f)) ** 2) - np.mean(np.abs(f) ** 2))

    def inversion(f):
        return float(np.max(np.abs(fourier.idft(G, fourier.dft(G, f)) - f)))

    def deviation_identity(f):
        t = fourier.multiplicity_fourier(f, L, G).real
        return abs(fourier.deviation(f, L, G) - (t - f.mean() ** d))

    def complement_symmetry(f):
        return abs(fourier.deviation(1 - f, L, G) - (-1) ** d * fourier.deviation(f, L, G))

    def common_sum_identity(f):
        lhs = (multiplicity_bruteforce(f, L, G) + multiplicity_bruteforce(1 - f, L, G)).real
        m = f.mean()
        rhs = m**d + (1 - m) ** d + (2 * fourier.deviation(f, L, G) if d % 2 == 0 else 0.0)
        return abs(lhs - rhs)

    props = {
        "fourier_vs_bruteforce": fourier_vs_bruteforce,
        "parseval": parseval,
        "inversion": inversion,
        "deviation_identity": deviation_identity,
        "complement_symmetry": complement_symmetry,
        "common_sum_identity": common_sum_identity,
    }
    if cancel:
        # A negative deviation is the error; positive deviations cost nothing.
        props["sidorenko_direction"] = lambda f: max(0.0, -fourier.deviation(f, L, G))
    return props


def cmd_verify(cfg: RunConfig) -> tuple[str, int]:
    _require_json(cfg)
    if cfg.replay:
        return _replay(cfg)
    G, L = _parse_inputs(cfg)
    bad = _not_coprime(L, G)
    if bad:
        payload = {
            "group": str(G),
            "equation": list(L.coeffs),
            "hypothesis": False,
            "reason": f"coefficients {bad} are not coprime to |G| = {G.order}",
        }
        return dumps(payload), EXIT_NOT_APPLICABLE
    if kernel_size(L, G) > VERIFY_MAX_KERNEL:
        raise CliExit(EXIT_PARSE, f"|G|^(d-1) = {kernel_size(L, G)} exceeds {VERIFY_MAX_KERNEL}")
    cancel = has_canceling_partition(L, G).exists
    props = _properties(L, G, cancel)
    rng = np.random.default_rng(cfg.seed)
    results = {name: {"max_error": 0.0, "passed": True} for name in props}
    failing = None
    for trial in range(cfg.trials):
        f = rng.random(G.order)
        for name, check in props.items():
            err = _checked(check, f)
            entry = results[name]
            entry["max_error"] = max(entry["max_error"], err)
            if not err <= TOL:
                entry["passed"] = False
                if failing is None:
                    failing = {
                        "group": str(G),
                        "equation": list(L.coeffs),
                        "property": name,
                        "trial": trial,
                        "seed": cfg.seed,
                        "error": err,
                        "function": fourier.function_to_json(f),
                    }
    passed = all(r["passed"] for r in results.values())
    payload = {
        "group": str(G),
        "equation": list(L.coeffs),
        "seed": cfg.seed,
        "trials": cfg.trials,
        "tolerance": TOL,
        "canceling_partition": cancel,
        "properties": results,
        "passed": passed,
    }
    if failing is not None:
        payload["failing_case"] = failing
    return dumps(payload), EXIT_OK if passed else EXIT_INTERNAL


def _checked(check, f) -> float:
    # A property whose evaluation itself breaks (for instance a realness
    # guard tripping under a negative tolerance) counts as failed.
    try:
        return float(check(f))
    except (ValueError, ArithmeticError):
        return float("inf")


def _replay(cfg: RunConfig) -> tuple[str, int]:
    try:
        with open(cfg.replay) as fh:
            data = json.load(fh)
        case = data.get("failing_case", data)
        G = parse_group(case["group"])
        L = Equation(tuple(case["equation"]))
        f = fourier.function_from_json(case["function"])
        name = case["property"]
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise CliExit(EXIT_PARSE, f"cannot read replay file {cfg.replay!r}: {exc}") from None
    props = _properties(L, G, has_canceling_partition(L, G).exists)
    if name not in props:
        raise CliExit(EXIT_PARSE, f"unknown property {name!r} in replay file")
    err = _checked(props[name], f)
    passed = err <= TOL
    payload = {"group": str(G), "equation": list(L.coeffs), "property": name, "error": err, "passed": passed}
    return dumps(payload), EXIT_OK if passed else EXIT_INTERNAL


COMMANDS = {
    "classify": cmd_classify,
    "witness": cmd_witness,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lincommon",
        description="Decide whether a linear equation is (fully) common or Sidorenko over a finite Abelian group.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("-g", "--group", required=name != "verify", help='group, e.g. "Z6xZ4"')
        p.add_argument("-L", "--equation", required=name != "verify", help='coefficients, e.g. "1,1,-2" (use -L=-1,1 for a leading minus)')
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--samples", type=int, default=1001)
        p.add_argument("--trials", type=int, default=50)
        p.add_argument("-o", "--out", default=None)
        p.add_argument("--format", choices=["json", "csv"], default="csv" if name == "sweep" else "json")
        if name == "verify":
            p.add_argument("--replay", default=None, help="re-run the failing case stored in a verify report")
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_PARSE
    cfg = RunConfig(**{k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__})
    if cfg.seed < 0 or cfg.seed >= 2**64:
        print("error: --seed must be a 64-bit unsigned integer", file=sys.stderr)
        return EXIT_PARSE
    if cfg.command == "verify" and not cfg.replay and (cfg.group is None or cfg.equation is None):
        print("error: verify needs -g and -L (or --replay)", file=sys.stderr)
        return EXIT_PARSE
    try:
        text, code = COMMANDS[cfg.command](cfg)
    except CliExit as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return exc.code
    except (AssertionError, ArithmeticError, PhaseSearchError, RoundingError) as exc:
        print(f"internal check failed: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
