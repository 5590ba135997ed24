"""Command-line interface: ``mrules check|ascend|diffcheck|corpus``.

Exit codes::

    0  FJ or KKT certificate (check), stationary refusal (ascend), diagnostics done
    1  input error: unreadable or malformed file, unknown name, infeasible candidate
    2  numerical failure
    3  NOT_OPTIMAL certificate
    4  DEGENERATE certificate (leading multiplier zero, no KKT form)
    5  corpus run finished with at least one mismatch
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .ascent import certify_nonoptimal
from .certificates import (
    CertVerdict, MultiplierCertificate, ascent_document, multiplier_document, render,
)
from .config import EngineConfig
from .differentiation import DiffConfig, classify
from .errors import InputError, MrulesError, NumericalError
from .multipliers import cq_report, fritz_john, normalize_kkt, verdict_of
from .problem import DEFAULT_ACT_TOL, Candidate, load_problem

__all__ = ["RunConfig", "Outcome", "analyze", "EXIT_CODES", "main"]

log = logging.getLogger("mrules")

EXIT_CODES = {
    CertVerdict.FJ: 0,
    CertVerdict.KKT: 0,
    CertVerdict.NOT_OPTIMAL: 3,
    CertVerdict.DEGENERATE: 4,
}
EXIT_INPUT, EXIT_NUMERICAL, EXIT_CORPUS = 1, 2, 5
CORPUS_TOL = 1e-6


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs besides the problem file."""

    engine: EngineConfig = field(default_factory=EngineConfig)
    act_tol: Optional[float] = None   # overrides the candidate's own tolerance
    out: Optional[Path] = None
    verbosity: int = 0
    fritz_john: bool = False          # report raw FJ multipliers, skip KKT normalisation

    def __post_init__(self):
        if self.act_tol is not None and not self.act_tol > 0:
            raise ValueError("act_tol must be positive")


@dataclass(frozen=True)
class Outcome:
    verdict: CertVerdict
    certificate: object   # MultiplierCertificate or AscentCertificate
    document: dict

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.verdict]


def _candidate(candidate, run):
    if run.act_tol is None:
        return candidate
    return Candidate(candidate.point, run.act_tol)


def analyze(problem, candidate, run: RunConfig = RunConfig()) -> Outcome:
    """Full pipeline: multipliers, else a constructive ascent certificate."""
    candidate = _candidate(candidate, run)
    cfg = run.engine
    result = fritz_john(problem, candidate, cfg)
    if not isinstance(result, MultiplierCertificate):
        cert = certify_nonoptimal(problem, candidate, result, cfg)
        return Outcome(CertVerdict.NOT_OPTIMAL, cert, ascent_document(problem, cert))
    for i in result.active.near_active:
        log.warning("inequality %d is inactive but within %g of zero",
                    i, cfg.near_active_factor * candidate.act_tol)
    cq = cq_report(result.active_gradients, result.eq_jacobian, problem.n)
    if run.fritz_john:
        verdict = CertVerdict.FJ
    else:
        verdict = verdict_of(result, cfg.stat_tol)
        if verdict is CertVerdict.KKT:
            result = normalize_kkt(result, cfg.stat_tol)
    return Outcome(verdict, result, multiplier_document(problem, result, verdict, cq))


# -- commands ----------------------------------------------------------------

def _emit(text, out):
    sys.stdout.write(text)
    if out is not None:
        Path(out).write_text(text)


def cmd_check(args, run: RunConfig) -> int:
    problem, candidate = load_problem(args.file)
    outcome = analyze(problem, candidate, run)
    _emit(render(outcome.document), run.out)
    return outcome.exit_code


def cmd_ascend(args, run: RunConfig) -> int:
    problem, candidate = load_problem(args.file)
    candidate = _candidate(candidate, run)
    result = fritz_john(problem, candidate, run.engine)
    if isinstance(result, MultiplierCertificate):
        print("candidate is FJ-stationary")
        return 0
    cert = certify_nonoptimal(problem, candidate, result, run.engine)
    _emit(render(ascent_document(problem, cert)), run.out)
    return EXIT_CODES[CertVerdict.NOT_OPTIMAL]


def _functions(problem):
    items = [("objective", problem.objective)]
    items += [(f"ineq:{i}", g) for i, g in enumerate(problem.ineq)]
    items += [(f"eq:{j}", h) for j, h in enumerate(problem.eq)]
    return items


def resolve_functions(problem, selector: Optional[str]):
    """Select fields by label (``objective``, ``ineq:i``, ``eq:j``) or by
    index into the list objective, inequalities, equalities."""
    items = _functions(problem)
    if selector is None:
        return items
    for label, f in items:
        if label == selector:
            return [(label, f)]
    try:
        index = int(selector)
    except ValueError:
        raise InputError(f"no function {selector!r}; expected one of "
                         f"{[label for label, _ in items]} or an index") from None
    if not 0 <= index < len(items):
        raise InputError(f"function index {index} out of range 0..{len(items) - 1}")
    return [items[index]]


def cmd_diffcheck(args, run: RunConfig) -> int:
    problem, candidate = load_problem(args.file)
    report = []
    for label, f in resolve_functions(problem, args.function):
        verdict = classify(f, candidate.x, run.engine.diff, problem.domain)
        entry = {"function": label, "text": f.text}
        entry.update(verdict.as_dict())
        report.append(entry)
    _emit(json.dumps({"point": [float(v) for v in candidate.x], "functions": report},
                     indent=2, allow_nan=False) + "\n", run.out)
    return 0


def _close(expected, actual):
    if expected is None:
        return True
    if actual is None or len(expected) != len(actual):
        return False
    return bool(np.all(np.abs(np.asarray(expected, float) - np.asarray(actual, float)) <= CORPUS_TOL))


def compare_expected(document: dict, expected: dict) -> list:
    """Mismatches between a certificate document and an expectation record."""
    problems = []
    if expected.get("verdict") != document["verdict"]:
        problems.append(f"verdict {document['verdict']} != expected {expected.get('verdict')}")
    for key in ("lambda", "mu"):
        if key in expected and not _close(expected[key], document.get(key)):
            problems.append(f"{key} {document.get(key)} != expected {expected[key]}")
    return problems


def run_corpus(directory, run: RunConfig = RunConfig()):
    """Yield ``(name, verdict or None, mismatches)`` per problem, sorted by name."""
    directory = Path(directory)
    files = sorted(directory.glob("*.toml"))
    if not files:
        raise InputError(f"no problem files in {directory}")
    for path in files:
        sidecar = path.with_suffix(".expected")
        try:
            expected = json.loads(sidecar.read_text())
        except (OSError, ValueError) as exc:
            yield path.stem, None, [f"unreadable expectation: {exc}"]
            continue
        try:
            problem, candidate = load_problem(path)
            outcome = analyze(problem, candidate, run)
        except MrulesError as exc:
            yield path.stem, None, [f"{type(exc).__name__}: {exc}"]
            continue
        yield path.stem, outcome.verdict.value, compare_expected(outcome.document, expected)


def cmd_corpus(args, run: RunConfig) -> int:
    if not Path(args.directory).is_dir():
        raise InputError(f"{args.directory} is not a directory")
    rows = list(run_corpus(args.directory, run))
    width = max(len(name) for name, _, _ in rows)
    failures = 0
    lines = []
    for name, verdict, mismatches in rows:
        status = "FAIL" if mismatches else "pass"
        failures += bool(mismatches)
        lines.append(f"{name:<{width}}  {verdict or '-':<11}  {status}"
                     + ("  " + "; ".join(mismatches) if mismatches else ""))
    lines.append(f"{len(rows) - failures}/{len(rows)} passed")
    _emit("\n".join(lines) + "\n", run.out)
    return EXIT_CORPUS if failures else 0


# -- argument handling -------------------------------------------------------

def _positive(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _positive_int(text):
    value = int(text)
    if value < 2:
        raise argparse.ArgumentTypeError(f"expected an integer >= 2, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--act-tol", type=_positive, help=f"activity tolerance (default: from file, else {DEFAULT_ACT_TOL:g})")
    common.add_argument("--stat-tol", type=_positive, default=1e-7, help="stationarity tolerance")
    common.add_argument("--restore-tol", type=_positive, default=1e-8, help="equality residual bound at restored points")
    common.add_argument("--fp-tol", type=_positive, default=1e-10, help="fixed-point stopping tolerance")
    common.add_argument("--diff-t0", type=_positive, default=1e-2, help="base difference step")
    common.add_argument("--diff-depth", type=_positive_int, default=4, help="Richardson depth")
    common.add_argument("--diff-tol", type=_positive, default=1e-6, help="derivative agreement tolerance")
    common.add_argument("--out", type=Path, help="also write the output to this file")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="mrules", description="Fritz John / KKT certificate engine")
    sub = parser.add_subparsers(dest="command", required=True)
    check = sub.add_parser("check", parents=[common], help="certify a candidate")
    check.add_argument("file")
    check.add_argument("--fritz-john", action="store_true",
                       help="report unnormalised Fritz John multipliers (verdict FJ)")
    check.set_defaults(handler=cmd_check)
    ascend = sub.add_parser("ascend", parents=[common], help="construct a better feasible point")
    ascend.add_argument("file")
    ascend.set_defaults(handler=cmd_ascend)
    diff = sub.add_parser("diffcheck", parents=[common], help="differentiability diagnostics")
    diff.add_argument("file")
    diff.add_argument("--function", help="objective, ineq:<i>, eq:<j>, or an index (default: all)")
    diff.set_defaults(handler=cmd_diffcheck)
    corpus = sub.add_parser("corpus", parents=[common], help="run a directory of problems")
    corpus.add_argument("directory")
    corpus.set_defaults(handler=cmd_corpus)
    return parser


def _run_config(args) -> RunConfig:
    diff = DiffConfig(t0=args.diff_t0, depth=args.diff_depth, tol=args.diff_tol)
    engine = EngineConfig(diff=diff, stat_tol=args.stat_tol, restore_tol=args.restore_tol,
                          fp_tol=args.fp_tol)
    return RunConfig(engine, args.act_tol, args.out, args.verbose,
                     getattr(args, "fritz_john", False))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose > 1 else
                        logging.INFO if args.verbose else logging.WARNING,
                        format="mrules: %(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.handler(args, _run_config(args))
    except InputError as exc:
        print(f"mrules: input error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"mrules: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"mrules: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        for alpha, message in getattr(exc, "diagnostics", []):
            log.info("alpha=%r: %s", alpha, message)
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
