"""
Command line front end.

    gmtame spectrum  <polynomial> [--vars x,y] [--format json] [--checks full] [--k-max N] [--verbose]
    gmtame goodbasis <polynomial> [...]
    gmtame milnor    <polynomial> [...]
    gmtame verify    <corpus.json> [--jobs N] [--skip-slow]

Exit codes: 0 success, 1 corpus mismatch, 2 parse error, 3 non-isolated
critical locus, 4 iteration cap, 5 internal invariant failure.
"""
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence
import argparse
import json
import logging
import sys

from pydantic import ValidationError

from gmtame.algebra.exactmath import format_rational, rational
from gmtame.algebra.polyring import context_of, parse
from gmtame.core.config import RunConfig, settings
from gmtame.core.exceptions import GMTameError, ParseError
from gmtame.schemas.reports import (
    CaseOutcome,
    CorpusCase,
    ErrorReport,
    GoodBasisReport,
    MilnorReport,
    SpectrumReport,
)
from gmtame.services.milnor import milnor_data, quasihomogeneous_spectrum, quasihomogeneous_weights
from gmtame.services.pipeline import PipelineResult, run, run_spectrum

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_MISMATCH = 1


def _emit_json(model) -> None:
    print(model.model_dump_json(by_alias=True, indent=2))


def _emit_error(e: GMTameError, config: Optional[RunConfig]) -> int:
    if config is not None and config.format == "json":
        _emit_json(ErrorReport(**e.to_dict()))
    else:
        stage = f" [{e.stage}]" if e.stage else ""
        print(f"[error]{stage} {e.label}: {e.detail}", file=sys.stderr)
    return e.exit_code


def _spectrum_lines(report: SpectrumReport) -> List[str]:
    return [
        f"polynomial: {report.polynomial}",
        f"vars: {','.join(report.vars)}",
        f"mu: {report.mu}",
        f"mean: {report.mean}",
        "spectrum: " + ", ".join(f"{s.alpha}: {s.mult}" for s in report.spectrum),
    ]


def _matrix_lines(name: str, rows: List[List[str]]) -> List[str]:
    if not rows:
        return [f"{name}: []"]
    width = max(len(e) for row in rows for e in row)
    return [f"{name}:"] + ["  [" + " ".join(e.rjust(width) for e in row) + "]" for row in rows]


def _goodbasis_lines(report: GoodBasisReport, result: PipelineResult, verbose: bool) -> List[str]:
    lines = _spectrum_lines(SpectrumReport.from_result(result))
    lines.append("good basis:")
    lines.extend(f"  psi_{i + 1} = {p}" for i, p in enumerate(report.basis))
    lines.extend(_matrix_lines("A0", report.A0))
    lines.append("A1: diag(" + ", ".join(row[i] for i, row in enumerate(report.A1)) + ")")
    lines.append("monodromy at infinity:")
    for c in report.monodromy:
        lines.append(
            f"  eigenvalue exp(-2*pi*i*{c.value}): multiplicity {c.multiplicity}, Jordan blocks {c.partition}"
        )
    if verbose:
        lines.append("stats: " + ", ".join(f"{k}={v}" for k, v in report.stats.items()))
        for name, matrix in result.artifacts.items():
            lines.append(f"{name}: {matrix!r}")
    return lines


def build_config(args: argparse.Namespace) -> RunConfig:
    vars_ = [v.strip() for v in args.vars.split(",")] if getattr(args, "vars", None) else None
    return RunConfig(
        vars=vars_,
        format=args.format,
        checks=args.checks,
        k_max=args.k_max,
        verbose=args.verbose,
        jobs=getattr(args, "jobs", None) or settings.JOBS,
    )


def cmd_spectrum(poly_text: str, config: RunConfig) -> int:
    try:
        f = parse(poly_text, config.vars)
        context = context_of(f)
        spectrum = run_spectrum(f, context, config)
    except GMTameError as e:
        return _emit_error(e, config)
    report = SpectrumReport.from_spectrum(context.format(f), list(context.names), spectrum)
    if config.format == "json":
        _emit_json(report)
    else:
        print("\n".join(_spectrum_lines(report)))
    return EXIT_OK


def cmd_goodbasis(poly_text: str, config: RunConfig) -> int:
    try:
        f = parse(poly_text, config.vars)
        result = run(f, context_of(f), config)
    except GMTameError as e:
        return _emit_error(e, config)
    report = GoodBasisReport.from_result(result)
    if config.format == "json":
        _emit_json(report)
    else:
        print("\n".join(_goodbasis_lines(report, result, config.verbose)))
    return EXIT_OK


def cmd_milnor(poly_text: str, config: RunConfig) -> int:
    try:
        f = parse(poly_text, config.vars)
        context = context_of(f)
        data = milnor_data(f, context)
    except GMTameError as e:
        return _emit_error(e, config)
    report = MilnorReport.from_data(data, context.format(f), quasihomogeneous_weights(f, context))
    if config.format == "json":
        _emit_json(report)
    else:
        print(f"polynomial: {report.polynomial}")
        print(f"mu: {report.mu}")
        print("standard monomials: " + ", ".join(report.standard_monomials))
        if report.quasihomogeneous_weights:
            print("weights: " + ", ".join(report.quasihomogeneous_weights))
    return EXIT_OK


def _normalized(counts: Dict[str, int]) -> Dict[str, int]:
    return {format_rational(rational(a)): m for a, m in counts.items()}


def compare_case(case: CorpusCase, spectrum: Dict[str, int], monodromy: Optional[Dict[str, List[int]]]) -> List[str]:
    """Differences between expected and computed data, one line each"""
    diff = []
    expected = _normalized(case.spectrum)
    for alpha in sorted(set(expected) | set(spectrum), key=rational):
        want, got = expected.get(alpha, 0), spectrum.get(alpha, 0)
        if want != got:
            diff.append(f"spectrum {alpha}: expected {want}, got {got}")
    if case.monodromy is not None and monodromy is not None:
        want_classes = {format_rational(rational(c)): p for c, p in case.monodromy.items()}
        for value in sorted(set(want_classes) | set(monodromy), key=rational):
            want, got = want_classes.get(value), monodromy.get(value)
            if want != got:
                diff.append(f"monodromy class {value}: expected {want}, got {got}")
    return diff


def verify_case(case_data: dict, checks: str) -> dict:
    """Run one corpus record; returns a CaseOutcome as a dict"""
    case = CorpusCase(**case_data)
    config = RunConfig(vars=case.vars, checks=checks)
    try:
        f = parse(case.polynomial, config.vars)
        context = context_of(f)
        if case.monodromy is None:
            spectrum = run_spectrum(f, context, config)
            monodromy = None
        else:
            result = run(f, context, config)
            spectrum = result.spectrum
            monodromy = {format_rational(c.value): c.partition for c in result.monodromy.classes}
        computed = {format_rational(a): m for a, m in spectrum.values}
        diff = compare_case(case, computed, monodromy)
        oracle = quasihomogeneous_spectrum(f, milnor_data(f, context))
        if oracle is not None:
            expected = {format_rational(a): m for a, m in oracle.items()}
            if expected != computed:
                diff.append(f"quasi-homogeneous oracle {expected} differs from computed {computed}")
    except GMTameError as e:
        return CaseOutcome(name=case.name, status="error", diff=[f"{e.label}: {e.detail}"]).model_dump()
    return CaseOutcome(name=case.name, status="fail" if diff else "pass", diff=diff).model_dump()


def load_corpus(path: Path) -> List[CorpusCase]:
    data = json.loads(path.read_text())
    records = data.get("cases", []) if isinstance(data, dict) else data
    return [CorpusCase(**record) for record in records]


def cmd_verify(corpus_path: str, config: RunConfig, skip_slow: bool = False) -> int:
    path = Path(corpus_path)
    if not path.exists():
        print(f"[error] corpus file does not exist: {path}", file=sys.stderr)
        return ParseError.exit_code
    try:
        cases = load_corpus(path)
    except (json.JSONDecodeError, ValidationError) as e:
        print(f"[error] corpus file is malformed: {e}", file=sys.stderr)
        return ParseError.exit_code
    if skip_slow:
        cases = [c for c in cases if not c.slow]
    if not cases:
        logger.warning(f"Corpus {path} contains no cases")
        print("[verify] PASS (0 cases)")
        return EXIT_OK

    payloads = [c.model_dump() for c in cases]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            outcomes = list(pool.map(verify_case, payloads, [config.checks] * len(payloads)))
    else:
        outcomes = [verify_case(p, config.checks) for p in payloads]

    failed = 0
    for outcome in map(lambda o: CaseOutcome(**o), outcomes):
        if outcome.status == "pass":
            print(f"[ok] {outcome.name}")
            continue
        failed += 1
        print(f"[{outcome.status}] {outcome.name}")
        for line in outcome.diff:
            print(f"  - {line}")
    if failed:
        print(f"[verify] FAIL ({failed} of {len(outcomes)} cases)")
        return EXIT_MISMATCH
    print(f"[verify] PASS ({len(outcomes)} cases)")
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=["text", "json"], default="text", help="Output format")
    parser.add_argument("--checks", choices=["off", "fast", "full"], default=settings.CHECKS, help="Invariant checks")
    parser.add_argument("--k-max", dest="k_max", type=int, default=None, help="Largest approximation degree k")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging and stage artifacts")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gmtame",
        description="Spectrum, good basis and monodromy at infinity of tame polynomials.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("spectrum", "Spectrum at infinity"),
        ("goodbasis", "Good basis of the Brieskorn lattice, A0, A1 and monodromy"),
        ("milnor", "Milnor number and monomial basis of the Jacobian algebra"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("polynomial", help='Polynomial text, e.g. "x^2+y^2+x^2*y^2"')
        p.add_argument("--vars", default=None, help="Comma separated variable order, e.g. x,y,z")
        _add_common(p)
    p = sub.add_parser("verify", help="Check a corpus of expected results")
    p.add_argument("corpus", help="Path to a corpus JSON file")
    p.add_argument("--jobs", type=int, default=settings.JOBS, help="Parallel cases")
    p.add_argument("--skip-slow", action="store_true", help="Skip cases marked slow")
    _add_common(p)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else getattr(logging, settings.LOG_LEVEL),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    try:
        config = build_config(args)
    except ValidationError as e:
        print(f"[error] invalid options: {e}", file=sys.stderr)
        return ParseError.exit_code

    if args.command == "spectrum":
        return cmd_spectrum(args.polynomial, config)
    if args.command == "goodbasis":
        return cmd_goodbasis(args.polynomial, config)
    if args.command == "milnor":
        return cmd_milnor(args.polynomial, config)
    return cmd_verify(args.corpus, config, skip_slow=args.skip_slow)


if __name__ == "__main__":
    sys.exit(main())
