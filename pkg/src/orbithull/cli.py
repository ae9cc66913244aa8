"""Command-line interface.

Reports are JSON on stdout (or ``--output``); short human summaries go to
stderr. Exit codes: 0 positive outcome, 1 negative outcome, 2 input error,
3 undecided / uncertified.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import sys
from pathlib import Path

import numpy as np

from . import hilbsep, metric
from .config import DEFAULT_TOLERANCES
from .majorization import (
    MajorizationError,
    MixingCertificate,
    first_violation,
    majorizes_levelsets,
    majorizes_partial_sums,
    partial_sum_slack,
    unitary_mixing_certificate,
    verify_certificate,
)
from .matcore import (
    DensityMatrix,
    DimensionError,
    ValidationError,
    as_hermitian,
    eigh,
    matrix_from_json,
    random_complex,
    random_hermitian,
)
from .orbit import INSIDE, OUTSIDE, Kind, LmoOptions, OrbitKind, frank_wolfe_project, inclusion_chain_check

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INPUT = 2
EXIT_UNDECIDED = 3

DEMOS = ("c2-counterexample", "halfspace", "inclusion-chain", "equivalence-suite")


class InputError(Exception):
    pass


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def load_matrix(path: str) -> np.ndarray:
    """A matrix file holds ``{"n": n, "entries": [[[re, im], ...], ...]}`` or a plain real nested list."""
    obj = _load_json(path)
    try:
        if isinstance(obj, list):
            return matrix_from_json({"n": len(obj), "entries": [[[float(x), 0.0] for x in row] for row in obj]})
        return matrix_from_json(obj)
    except (ValidationError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _hermitian(path: str) -> np.ndarray:
    try:
        return as_hermitian(load_matrix(path))
    except ValidationError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _same_shape(*mats: np.ndarray) -> None:
    if len({m.shape for m in mats}) != 1:
        raise InputError(f"dimension mismatch: {[m.shape for m in mats]}")


def _config(args) -> dict:
    return {
        "seed": args.seed,
        "tol": args.tol,
        "restarts": args.restarts,
        "max_iter": args.max_iter,
        "trials": args.trials,
        "orbit": args.orbit,
        "state": args.state,
    }


def _emit(args, command: str, result: dict, code: int, summary: str) -> int:
    report = {
        "command": command,
        "exit_code": code,
        "config": _config(args),
        "tolerances": DEFAULT_TOLERANCES.as_dict(),
        "result": result,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    text = json.dumps(report, indent=2, sort_keys=True, default=_json_default)
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    print(summary, file=sys.stderr)
    return code


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _lmo_options(args) -> LmoOptions:
    return LmoOptions(restarts=args.restarts, seed=args.seed)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_check_majorization(args) -> int:
    A = _hermitian(args.a)
    B = _hermitian(args.b)
    _same_shape(A, B)
    a, b = eigh(A)[0], eigh(B)[0]
    tol = args.tol
    by_sums = majorizes_partial_sums(a, b, tol)
    by_levels = majorizes_levelsets(A, B, tol)
    result = {
        "spectrum_a": a.tolist(),
        "spectrum_b": b.tolist(),
        "partial_sums": by_sums,
        "level_sets": by_levels,
        "slack": partial_sum_slack(a, b).tolist(),
        "first_violation": first_violation(a, b, tol),
    }
    code = EXIT_OK if by_sums else EXIT_NEGATIVE
    return _emit(args, "check-majorization", result, code, f"majorized: {by_sums}")


def cmd_certify(args) -> int:
    A = _hermitian(args.a)
    B = _hermitian(args.b)
    _same_shape(A, B)
    try:
        cert = unitary_mixing_certificate(A, B, args.tol)
    except MajorizationError as exc:
        result = {"error": str(exc), "index": exc.index, "slack": exc.slack}
        return _emit(args, "certify", result, EXIT_NEGATIVE, f"not majorized at index {exc.index}")
    check = verify_certificate(cert)
    result = {"certificate": cert.to_json(), "verification": check.to_json()}
    code = EXIT_OK if check.valid else EXIT_NEGATIVE
    return _emit(args, "certify", result, code, f"{len(cert.weights)} terms, residual {check.residual:.3e}")


def cmd_verify(args) -> int:
    obj = _load_json(args.certificate)
    if isinstance(obj, dict) and "result" in obj:
        obj = obj["result"]
    if isinstance(obj, dict) and "certificate" in obj:
        obj = obj["certificate"]
    try:
        cert = MixingCertificate.from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{args.certificate}: malformed certificate: {exc}") from exc
    check = verify_certificate(cert)
    code = EXIT_OK if check.valid else EXIT_NEGATIVE
    return _emit(args, "verify", check.to_json(), code, f"valid: {check.valid}")


def cmd_membership(args) -> int:
    A = load_matrix(args.a)
    B = load_matrix(args.b)
    _same_shape(A, B)
    orbit = OrbitKind(Kind.parse(args.orbit), B)
    verdict = frank_wolfe_project(A, orbit, tol=args.tol, max_iter=args.max_iter, lmo_options=_lmo_options(args))
    code = {INSIDE: EXIT_OK, OUTSIDE: EXIT_NEGATIVE}.get(verdict.status, EXIT_UNDECIDED)
    summary = f"{verdict.status}: distance {verdict.distance:.3e}"
    return _emit(args, "membership", verdict.to_json(), code, summary)


def cmd_duel(args) -> int:
    A = load_matrix(args.a)
    B = load_matrix(args.b)
    C = load_matrix(args.c)
    _same_shape(A, B, C)
    weight = None
    if args.state:
        try:
            weight = DensityMatrix(load_matrix(args.state))
        except ValidationError as exc:
            raise InputError(f"{args.state}: {exc}") from exc
        _same_shape(A, weight.rho)
    out = metric.duel(A, B, C, weight, _lmo_options(args))
    if out.success:
        code = EXIT_OK
    elif out.certified:
        code = EXIT_NEGATIVE
    else:
        code = EXIT_UNDECIDED
    summary = f"success: {out.success}, certified: {out.certified}, lhs {out.lhs:.6g}, rhs {out.rhs:.6g}"
    return _emit(args, "duel", out.to_json(), code, summary)


def _demo_c2(args) -> tuple[dict, bool]:
    report = metric.counterexample_c2(seed=args.seed)
    return report.to_json(), report.passed


def _demo_halfspace(args) -> tuple[dict, bool]:
    report = hilbsep.halfspace_check((2, 3), args.trials or 10_000, args.seed)
    return report.to_json(), report.passed


def _demo_inclusion(args) -> tuple[dict, bool]:
    rng = np.random.default_rng(args.seed)
    n = 4
    B = random_complex(n, rng)
    directions = [random_complex(n, rng) for _ in range(args.trials or 100)]
    report = inclusion_chain_check(B, directions, LmoOptions(restarts=min(args.restarts, 4), seed=args.seed))
    # B = I: the unitary orbit is {I} while the two-sided orbit is all unitaries
    C = random_hermitian(n, rng) + 1j * random_hermitian(n, rng)
    strict = inclusion_chain_check(np.eye(n, dtype=complex), [C], LmoOptions(restarts=1, seed=args.seed))
    row = strict.rows[0]
    h1_expected = float(np.real(np.trace(C)))
    h3_expected = float(np.sum(np.linalg.svd(C, compute_uv=False)))
    strict_ok = (
        abs(row.h_unitary - h1_expected) <= 1e-9 * (1 + abs(h1_expected))
        and abs(row.h_twosided - h3_expected) <= 1e-9 * (1 + h3_expected)
        and row.h_twosided > row.h_unitary + 1e-6
    )
    result = {
        "chain": report.to_json(),
        "identity_base": {
            "h_unitary": row.h_unitary,
            "h_twosided": row.h_twosided,
            "re_trace": h1_expected,
            "nuclear_norm": h3_expected,
            "strict": strict_ok,
        },
    }
    return result, report.ok and strict_ok


def _demo_equivalence(args) -> tuple[dict, bool]:
    summary = metric.equivalence_suite(4, args.trials or 50, seed=args.seed)
    return summary.to_json(), summary.agreement_rate == 1.0


def cmd_demo(args) -> int:
    runners = {
        "c2-counterexample": _demo_c2,
        "halfspace": _demo_halfspace,
        "inclusion-chain": _demo_inclusion,
        "equivalence-suite": _demo_equivalence,
    }
    if args.name not in runners:
        raise InputError(f"unknown demo {args.name!r}; choose from {', '.join(DEMOS)}")
    result, passed = runners[args.name](args)
    code = EXIT_OK if passed else EXIT_NEGATIVE
    return _emit(args, f"demo {args.name}", result, code, f"{args.name}: {'pass' if passed else 'FAIL'}")


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=_positive_float, default=None, help="decision tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--restarts", type=_positive_int, default=20, help="ascent restarts for heuristic oracles")
    common.add_argument("--max-iter", type=_positive_int, default=2000, help="Frank-Wolfe iteration cap")
    common.add_argument("--trials", type=_positive_int, default=None, help="instance count for demos")
    common.add_argument("--orbit", default="conj", help="conj, contr or twosided")
    common.add_argument("--state", default=None, help="density matrix file for weighted duels")
    common.add_argument("--output", default=None, help="write the JSON report here instead of stdout")

    parser = argparse.ArgumentParser(prog="orbithull", description="Convex hulls of unitary orbits.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-majorization", parents=[common], help="spectral majorization A < B")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=cmd_check_majorization, default_tol=1e-10)

    p = sub.add_parser("certify", parents=[common], help="unitary mixing certificate for A < B")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=cmd_certify, default_tol=1e-8)

    p = sub.add_parser("verify", parents=[common], help="re-check a certificate file")
    p.add_argument("certificate")
    p.set_defaults(func=cmd_verify, default_tol=1e-8)

    p = sub.add_parser("membership", parents=[common], help="hull membership by Frank-Wolfe")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=cmd_membership, default_tol=1e-6)

    p = sub.add_parser("duel", parents=[common], help="find U with ||A - UBU*|| <= ||C - UBU*||")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("c")
    p.set_defaults(func=cmd_duel, default_tol=1e-10)

    p = sub.add_parser("demo", parents=[common], help="packaged scenarios")
    p.add_argument("name")
    p.set_defaults(func=cmd_demo, default_tol=1e-6)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    if args.tol is None:
        args.tol = args.default_tol
    try:
        Kind.parse(args.orbit)
        return args.func(args)
    except (InputError, ValidationError, DimensionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
