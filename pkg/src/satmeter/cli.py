"""Batch front door: parse, solve, partition, audit; JSON reports out.

Exit codes: 0 success, 2 input error, 3 internal invariant violation.
Reports are deterministic for fixed inputs apart from the timestamp field.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from fractions import Fraction

from satmeter import formula as fm
from satmeter import oracle as orc
from satmeter.biased import bias_profile, chou_solve
from satmeter.hashfam import (
    HashFamilySpec,
    assignment_from_hash,
    enum_family,
    smallest_prime_geq,
)
from satmeter.planar import gen_planar_instance, partition, verify_partition
from satmeter.treedp import planar_ptas
from satmeter.twosat import SolveResult, half_approx, ls_solve

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INTERNAL = 3


class InputError(Exception):
    pass


def _read_formula(path: str) -> fm.Formula:
    try:
        with open(path, "rb") as fh:
            return fm.parse_dimacs(fh.read())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except fm.FormulaError as exc:
        raise InputError(str(exc)) from exc


def _instance_id(formula: fm.Formula) -> str:
    digest = hashlib.sha256(fm.serialize_dimacs(formula).encode()).hexdigest()
    return digest[:16]


def _base_report(formula: fm.Formula) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "timestamp": time.time(),
        "instance": {
            "id": _instance_id(formula),
            "n": formula.n,
            "m": formula.m,
            "r": formula.r,
        },
    }


def _emit(report: dict) -> None:
    json.dump(report, sys.stdout, sort_keys=True, default=str)
    sys.stdout.write("\n")


def _solve_report(formula: fm.Formula, algorithm: str, result: SolveResult,
                  with_oracle: bool) -> dict:
    recount = fm.eval_assignment(formula, result.assignment)
    if recount != result.count:
        raise AssertionError(
            f"count self-audit failed: reported {result.count}, "
            f"recomputed {recount}"
        )
    report = _base_report(formula)
    report.update(
        {
            "algorithm": algorithm,
            "satisfied": result.count,
            "assignment": fm.serialize_assignment(result.assignment),
            "details": result.details,
        }
    )
    if result.report is not None:
        report["space"] = result.report.as_dict()
    if with_oracle:
        opt, _ = orc.exact_maxsat(formula)
        report["opt"] = opt
        report["ratio"] = (result.count / opt) if opt else 1.0
    return report


def cmd_solve(args) -> int:
    formula = _read_formula(args.file)
    if args.alg == "half":
        result = half_approx(formula)
    elif args.alg == "ls":
        result = ls_solve(formula)
    elif args.alg == "chou":
        result = chou_solve(formula)
    elif args.alg == "planar-ptas":
        if args.eps is None:
            raise InputError("--eps is required for planar-ptas")
        result = planar_ptas(formula, Fraction(args.eps))
    elif args.alg == "exact":
        if formula.n > orc.ORACLE_VAR_CAP:
            raise InputError(
                f"n={formula.n} exceeds exact-solver cap {orc.ORACLE_VAR_CAP}"
            )
        opt, phi = orc.exact_maxsat(formula)
        result = SolveResult(assignment=phi, count=opt, details={})
    else:  # pragma: no cover - argparse restricts choices
        raise InputError(f"unknown algorithm {args.alg}")
    if args.oracle and formula.n > orc.ORACLE_VAR_CAP:
        raise InputError(
            f"--oracle: n={formula.n} exceeds cap {orc.ORACLE_VAR_CAP}"
        )
    _emit(_solve_report(formula, args.alg, result, args.oracle))
    return EXIT_OK


def cmd_bias(args) -> int:
    formula = _read_formula(args.file)
    profile = bias_profile(formula)
    report = _base_report(formula)
    report["bias"] = {
        "scale": profile.scale,
        "per_var_scaled": {str(i): v for i, v in profile.per_var.items()},
        "b_f_scaled": profile.b_f,
        "b_f": str(profile.b_f_fraction()),
        "b_star_scaled": profile.b_star,
        "b_star": str(profile.b_star_fraction()),
        "histogram": {str(w): c for w, c in sorted(profile.histogram.items())},
        "neg_vars": sorted(profile.neg_vars),
    }
    _emit(report)
    return EXIT_OK


def cmd_partition(args) -> int:
    formula = _read_formula(args.file)
    if args.k < 2:
        raise InputError("--k must be >= 2")
    result = partition(formula, args.k)
    report = _base_report(formula)
    report["k"] = args.k
    report["partition"] = verify_partition(formula, result, args.k).as_dict()
    part_files = []
    for idx, part in enumerate(result.parts, start=1):
        if args.out_prefix:
            path = f"{args.out_prefix}.part{idx}.cnf"
            with open(path, "w") as fh:
                fh.write(fm.serialize_dimacs(part))
            part_files.append(path)
    if part_files:
        report["part_files"] = part_files
    _emit(report)
    return EXIT_OK


def cmd_hashfam(args) -> int:
    q = args.q or smallest_prime_geq(max(args.n, args.b, 2))
    spec = HashFamilySpec(n=args.n, k=args.k, a=args.a, b=args.b, q=q)
    if spec.size > args.limit:
        raise InputError(
            f"family size {spec.size} exceeds --limit {args.limit}"
        )
    marginals = [0] * args.n
    pair = 0
    total = 0
    for f in enum_family(spec).scan():
        phi = assignment_from_hash(f, args.n)
        total += 1
        for i in range(1, args.n + 1):
            marginals[i - 1] += phi[i]
        if args.n >= 2 and phi[1] == phi[2] == 1:
            pair += 1
    report = {
        "schema_version": SCHEMA_VERSION,
        "timestamp": time.time(),
        "spec": {"n": args.n, "k": args.k, "a": args.a, "b": args.b, "q": q},
        "threshold": spec.threshold,
        "family_size": total,
        "marginal_counts": marginals,
        "pair11_count_vars_1_2": pair if args.n >= 2 else None,
    }
    _emit(report)
    return EXIT_OK


def cmd_gen_planar(args) -> int:
    if args.kind == "grid":
        try:
            rows, cols = (int(x) for x in args.size.lower().split("x"))
        except ValueError as exc:
            raise InputError("grid size must look like 5x5") from exc
        size = (rows, cols)
    else:
        try:
            size = int(args.size)
        except ValueError as exc:
            raise InputError("size must be an integer") from exc
    formula = gen_planar_instance(args.kind, size, seed=args.seed)
    text = fm.serialize_dimacs(formula)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_oracle(args) -> int:
    formula = _read_formula(args.file)
    if formula.n > orc.ORACLE_VAR_CAP:
        raise InputError(
            f"n={formula.n} exceeds oracle cap {orc.ORACLE_VAR_CAP}"
        )
    start = time.perf_counter()
    opt, phi = orc.exact_maxsat(formula)
    elapsed = time.perf_counter() - start
    report = _base_report(formula)
    report.update(
        {
            "opt": opt,
            "witness": fm.serialize_assignment(phi),
            "runtime_seconds": elapsed,
        }
    )
    _emit(report)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="satmeter",
        description="Space-metered Max-r-SAT approximation toolkit",
    )
    parser.add_argument(
        "--jobs", type=int, default=1, help="worker processes (reserved)"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="approximate or exact Max-SAT")
    p.add_argument(
        "--alg",
        required=True,
        choices=["half", "ls", "chou", "planar-ptas", "exact"],
    )
    p.add_argument("--eps", help="accuracy for planar-ptas, e.g. 1/3")
    p.add_argument(
        "--oracle", action="store_true", help="also compute OPT and the ratio"
    )
    p.add_argument("file")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bias", help="dump the bias profile")
    p.add_argument("file")
    p.set_defaults(func=cmd_bias)

    p = sub.add_parser("partition", help="band-partition a planar instance")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out-prefix", help="write parts as DIMACS files")
    p.add_argument("file")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("hashfam", help="enumerate a hash family and stats")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--q", type=int)
    p.add_argument("--limit", type=int, default=100_000)
    p.set_defaults(func=cmd_hashfam)

    p = sub.add_parser("gen-planar", help="generate a planar instance")
    p.add_argument("--kind", required=True, choices=["chain", "grid", "tree"])
    p.add_argument("--size", required=True, help="e.g. 8 or 5x5")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen_planar)

    p = sub.add_parser("oracle", help="brute-force exact Max-SAT")
    p.add_argument("file")
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, ZeroDivisionError, AssertionError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
