"""Command line interface: ``qspforge <command> ...``.

Every command prints one JSON document on stdout. Exit status is 0 on
success, 2 when the input is well formed but the construction does not apply
(the document then describes the error), and 1 for I/O, schema and
verification failures.
"""

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor

from . import io
from .config import tol
from .errors import DimensionMismatch, NotUnitary, PreconditionError, QSPError, SchemaError
from .multivariate import (
    Protocol2DChoice,
    Protocol3D,
    check_necessary_mqsp,
    check_sufficient_3d,
    check_unimplementable,
    decompose_3d,
    embed_2d_in_3d,
    evaluate_protocol_2d_choice,
    evaluate_protocol_3d,
    q_gamma,
    random_protocol_2d_choice,
    random_protocol_3d,
)
from .polystate import ANALYTIC, LAURENT, PolynomialState, normalization_residual
from .univariate import (
    ALGEBRAS,
    BASES,
    FULL,
    WZ,
    Protocol1D,
    SignalConvention,
    analytic_to_laurent_1d,
    classify_state_1d,
    convert_convention_1d,
    evaluate_protocol_1d,
    laurent_to_analytic_1d,
    random_protocol_1d,
    synthesize_1d,
)

CASES_FILE = "cases.json"
DEFAULT_VERIFY_TOL = 1e-9


class Failure(Exception):
    """Carries an exit status and the error document to print."""

    def __init__(self, status, doc):
        super().__init__(doc.get("message", ""))
        self.status = status
        self.doc = doc


def error_doc(code, message, witness=None):
    return {
        "schema_version": io.SCHEMA_VERSION,
        "type": "error",
        "error": code,
        "message": message,
        "witness": witness or {},
    }


def _read(name, expect=None):
    obj = io.load(io.resolve(name))
    if expect is not None and not isinstance(obj, expect):
        what = "state" if expect is PolynomialState else "protocol"
        raise SchemaError(f"{name}: expected a {what} document", field="type")
    return obj


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_eval(args):
    p = _read(args.input, (Protocol1D, Protocol2DChoice, Protocol3D))
    if isinstance(p, Protocol1D):
        state = evaluate_protocol_1d(p)
    elif isinstance(p, Protocol2DChoice):
        state = evaluate_protocol_2d_choice(p)
    else:
        state = evaluate_protocol_3d(p)
    return io.state_to_doc(state)


def _infer_family(state):
    if state.num_vars == 1:
        return io.UNIVARIATE_LAURENT if state.kind == LAURENT else io.UNIVARIATE_ANALYTIC
    if state.dim == 3:
        return io.THREE_DIM
    return io.MQSP_CHOICE


def cmd_synth(args):
    state = _read(args.input, PolynomialState)
    family = args.family or _infer_family(state)
    if family == io.THREE_DIM:
        return io.protocol_to_doc(decompose_3d(state))
    if family == io.MQSP_CHOICE:
        raise ValueError("no synthesis procedure for choice protocols; use 'check' for the necessary conditions")
    if state.num_vars != 1:
        raise DimensionMismatch(f"family {family} needs a univariate state")
    picture = LAURENT if family == io.UNIVARIATE_LAURENT else ANALYTIC
    conv = SignalConvention(picture, args.basis, args.algebra)
    return io.protocol_to_doc(synthesize_1d(state, conv))


def cmd_check(args):
    state = _read(args.input, PolynomialState)
    extra = {"normalization_residual": normalization_residual(state)}
    if state.num_vars == 1:
        report = classify_state_1d(state)
    elif args.choices is not None:
        conv = None
        if args.algebra != FULL:
            conv = SignalConvention(state.kind, args.basis, args.algebra)
        report = check_necessary_mqsp(state, args.choices, conv)
    elif state.dim == 3 and max((abs(v[2]) for v in state.terms.values()), default=0.0) > tol("tol_rank"):
        report = check_sufficient_3d(state)
    else:
        report = check_unimplementable(state)
    return io.report_to_doc(report, **extra)


def _repicture(p: Protocol1D, picture):
    conv = SignalConvention(picture, p.convention.basis, p.convention.algebra)
    return Protocol1D(conv, p.ops, p.phases)


def cmd_convert(args):
    obj = _read(args.input)
    target = args.to
    if isinstance(obj, PolynomialState):
        if obj.num_vars != 1:
            raise ValueError("state conversion is defined for univariate states")
        if target == ANALYTIC:
            out = obj if obj.kind == ANALYTIC else laurent_to_analytic_1d(obj)
        elif target == LAURENT:
            out = obj if obj.kind == LAURENT else analytic_to_laurent_1d(obj, args.degree)
        else:
            raise ValueError(f"a state can be converted to 'analytic' or 'laurent', not {target!r}")
        return io.state_to_doc(out)
    if isinstance(obj, Protocol1D):
        if target in BASES:
            return io.protocol_to_doc(convert_convention_1d(obj, target))
        if target in (ANALYTIC, LAURENT):
            return io.protocol_to_doc(_repicture(obj, target))
    if isinstance(obj, Protocol2DChoice) and target == io.THREE_DIM:
        return io.protocol_to_doc(embed_2d_in_3d(obj))
    raise ValueError(f"cannot convert a {io.protocol_family(obj)} protocol to {target!r}")


def cmd_qgamma(args):
    state = _read(args.input, PolynomialState)
    doc = {"schema_version": io.SCHEMA_VERSION, "type": "qgamma"}
    doc.update(q_gamma(state, normalize=not args.raw).to_dict())
    return doc


def cmd_rand(args):
    if args.steps < 0:
        raise ValueError("--steps must be nonnegative")
    if args.family == io.THREE_DIM:
        p = random_protocol_3d(args.steps, args.seed)
    elif args.family == io.MQSP_CHOICE:
        p = random_protocol_2d_choice(args.steps, args.seed, args.choices, args.picture)
    else:
        picture = LAURENT if args.family == io.UNIVARIATE_LAURENT else ANALYTIC
        p = random_protocol_1d(args.steps, args.seed, SignalConvention(picture, args.basis, args.algebra))
    return io.protocol_to_doc(p)


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


def diff_docs(expected, actual, tol=DEFAULT_VERIFY_TOL, path="$"):
    """Mismatches between two JSON values; numbers compare within ``tol``.

    ``message`` fields are free text and are skipped.
    """
    out = []
    if isinstance(expected, dict) and isinstance(actual, dict):
        for key in sorted(set(expected) | set(actual)):
            if key == "message":
                continue
            if key not in actual or key not in expected:
                out.append({"path": f"{path}.{key}", "expected": expected.get(key), "actual": actual.get(key)})
            else:
                out.extend(diff_docs(expected[key], actual[key], tol, f"{path}.{key}"))
        return out
    if isinstance(expected, list) and isinstance(actual, list):
        if len(expected) != len(actual):
            return [{"path": path, "expected": f"{len(expected)} items", "actual": f"{len(actual)} items"}]
        for i, (e, a) in enumerate(zip(expected, actual)):
            out.extend(diff_docs(e, a, tol, f"{path}[{i}]"))
        return out
    numeric = (int, float)
    if isinstance(expected, numeric) and isinstance(actual, numeric) and not isinstance(expected, bool):
        if isinstance(actual, bool) or abs(expected - actual) > tol:
            out.append({"path": path, "expected": expected, "actual": actual})
        return out
    if expected != actual:
        out.append({"path": path, "expected": expected, "actual": actual})
    return out


def _verification(expected_path, status, doc, tol):
    expected = io.parse(io.resolve(expected_path).read_text(), str(expected_path))
    actual = json.loads(io.dumps(doc))
    mismatches = diff_docs(expected, actual, tol)
    return {
        "schema_version": io.SCHEMA_VERSION,
        "type": "verification",
        "expected": str(expected_path),
        "exit_code": status,
        "passed": not mismatches,
        "mismatches": mismatches,
    }


def _run_case(case):
    status, doc = execute(case["argv"])
    result = _verification(case["expected"], status, doc, case.get("tol", DEFAULT_VERIFY_TOL))
    mismatches = result["mismatches"]
    if status != case.get("exit_code", 0):
        mismatches.append({"path": "exit_code", "expected": case.get("exit_code", 0), "actual": status})
    return {"name": case["name"], "passed": not mismatches, "mismatches": mismatches}


def cmd_verify(args):
    cases = json.loads((io.fixture_dir() / CASES_FILE).read_text())["cases"]
    if args.cases:
        known = {c["name"] for c in cases}
        missing = [name for name in args.cases if name not in known]
        if missing:
            raise FileNotFoundError(f"unknown fixture case(s): {', '.join(missing)}")
        cases = [c for c in cases if c["name"] in args.cases]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_case, cases))
    else:
        results = [_run_case(c) for c in cases]
    doc = {
        "schema_version": io.SCHEMA_VERSION,
        "type": "verification-summary",
        "passed": all(r["passed"] for r in results),
        "cases": results,
    }
    if not doc["passed"]:
        raise Failure(1, doc)
    return doc


# ---------------------------------------------------------------------------
# parser and dispatch
# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="qspforge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", help="write the JSON document here instead of stdout")
    common.add_argument("--verify", metavar="EXPECTED", help="diff the output against an expected JSON document")
    common.add_argument("--verify-tol", type=float, default=DEFAULT_VERIFY_TOL,
                        help="absolute tolerance for numbers when verifying (default: %(default)g)")

    convention = argparse.ArgumentParser(add_help=False)
    convention.add_argument("--basis", choices=BASES, default=WZ)
    convention.add_argument("--algebra", choices=ALGEBRAS, default=FULL)

    p = sub.add_parser("eval", parents=[common], help="evaluate a protocol to its output state")
    p.add_argument("input")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", parents=[common, convention], help="find a protocol producing a state")
    p.add_argument("input")
    p.add_argument("--family", choices=io.FAMILIES, help="default: inferred from the state")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("check", parents=[common, convention], help="run the condition checkers on a state")
    p.add_argument("input")
    p.add_argument("--choices", help="choice vector such as 'abba' for the necessary-condition check")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("convert", parents=[common], help="change picture, signal basis or embedding")
    p.add_argument("input")
    p.add_argument("--to", required=True, choices=(ANALYTIC, LAURENT) + BASES + (io.THREE_DIM,))
    p.add_argument("--degree", type=int, help="fixed degree for analytic -> laurent state conversion")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("qgamma", parents=[common], help="inapproximability measure of a bivariate state")
    p.add_argument("input")
    p.add_argument("--raw", action="store_true", help="use the coefficients as given, without normalizing")
    p.set_defaults(func=cmd_qgamma)

    p = sub.add_parser("rand", parents=[common, convention], help="random protocol from a seed")
    p.add_argument("--family", choices=io.FAMILIES, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--choices", help="choice vector for mqsp-choice (default: random)")
    p.add_argument("--picture", choices=(ANALYTIC, LAURENT), default=ANALYTIC)
    p.set_defaults(func=cmd_rand)

    p = sub.add_parser("verify", help="re-derive the bundled fixture outputs and diff them")
    p.add_argument("cases", nargs="*", help="case names (default: all)")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.set_defaults(func=cmd_verify)
    return parser


def execute(argv):
    """Run a command and return ``(exit_status, document)`` without printing."""
    args = build_parser().parse_args(argv)
    try:
        return 0, args.func(args)
    except Failure as exc:
        return exc.status, exc.doc
    except PreconditionError as exc:
        return 2, error_doc(exc.code, str(exc), exc.witness)
    except (SchemaError, NotUnitary, DimensionMismatch) as exc:
        return 1, error_doc(exc.code, str(exc), exc.witness)
    except OSError as exc:
        return 1, error_doc("IOError", str(exc))
    except QSPError as exc:
        return 2, error_doc(exc.code, str(exc), exc.witness)
    except ValueError as exc:
        return 2, error_doc("InvalidRequest", str(exc))


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    status, doc = execute(argv)
    if getattr(args, "verify", None):
        try:
            doc = _verification(args.verify, status, doc, args.verify_tol)
        except (OSError, SchemaError) as exc:
            status, doc = 1, error_doc("IOError", str(exc))
        else:
            status = 0 if doc["passed"] else 1
    text = io.dumps(doc)
    if getattr(args, "output", None) and status == 0:
        try:
            with open(args.output, "w") as fh:
                fh.write(text)
        except OSError as exc:
            sys.stdout.write(io.dumps(error_doc("IOError", str(exc))))
            return 1
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    raise SystemExit(main())
