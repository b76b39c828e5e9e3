#!/usr/bin/env python3
"""
Moment Problem Toolkit

Classifies truncated and partial Hamburger moment sequences, tracks Hankel
eigenvalue trajectories, extracts submoment sequences, completes partial
sequences with arithmetic patterns, recovers atomic representing measures,
tests perturbations and evaluates Stieltjes transform relations.

Exit codes: 0 ok, 1 negative verdict, 2 input/usage error, 3 numerical failure.
"""

import argparse
import json
import logging
import sys
import time
from typing import Callable, Dict, List, Optional

from src.completion import complete_arithmetic, detect_pattern, verify_completion
from src.config import MomentKitConfig
from src.exceptions import InputError, MomentKitError, RankDeficient
from src.io_handler import (
    ReportWriter,
    is_partial_document,
    load_document,
    load_measure,
    load_sequence,
    load_signed_measure,
    partial_from_data,
    sequence_to_dict,
)
from src.measures import moment_residual, moments_of, pushforward_measure, recover_atoms
from src.perturbation import ejection_demo, even_moment_bound, perturb_and_classify, zeroth_moment_floor
from src.sequence_library import BUILTINS, generate
from src.sequences import TruncatedMomentSequence, classify_exact, classify_positivity, validate_partial
from src.spectral import determinacy_heuristic, eigenvalue_trajectory
from src.submoment import ARITHMETIC, SHIFT, IndexMap, extract_submoment, geometric_minor_scan, index_admissibility
from src.transforms import (
    ComplexPoint,
    circle_constant,
    circle_relation_check,
    quotient_relation_check,
    stieltjes_transform,
)
from src.utils import format_time, setup_logging
from src.worked_examples import CATALOG, run_catalog

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


class MomentKitApp:
    """Command dispatcher; every command writes one JSON report and returns an exit code."""

    def __init__(self, config: MomentKitConfig, writer: ReportWriter, mode: str = "float"):
        """
        Initialize the dispatcher.

        Args:
            config: Effective configuration (file, environment and flags applied)
            writer: Report writer for stdout or --out
            mode: Arithmetic for classification, "float" or "exact"
        """
        self.config = config
        self.writer = writer
        self.mode = mode
        self.commands: Dict[str, Callable[[argparse.Namespace], int]] = {
            "classify": self.classify,
            "spectrum": self.spectrum,
            "determinacy": self.determinacy,
            "extract": self.extract,
            "admissible": self.admissible,
            "complete": self.complete,
            "recover": self.recover,
            "perturb": self.perturb,
            "eject": self.eject,
            "stieltjes": self.stieltjes,
            "generate": self.generate,
            "reproduce": self.reproduce,
        }

    @property
    def tol(self) -> float:
        return self.config.tolerance.psd_tolerance

    def dispatch(self, args: argparse.Namespace) -> int:
        return self.commands[args.command](args)

    def _classify_sequence(self, seq: TruncatedMomentSequence, max_order: Optional[int]):
        order = seq.max_order() if max_order is None else max_order
        if self.mode == "exact":
            return classify_exact(seq, order)
        return classify_positivity(seq, order, self.tol)

    def classify(self, args: argparse.Namespace) -> int:
        document = load_document(args.input)
        if is_partial_document(document):
            pseq = partial_from_data(document)
            order = pseq.horizon // 2 if args.max_order is None else args.max_order
            cap = self.config.partial.enumeration_cap if args.enumeration_cap is None else args.enumeration_cap
            report = validate_partial(pseq, order, self.tol, cap)
        else:
            seq = load_sequence(args.input)
            report = self._classify_sequence(seq, args.max_order)
        self.writer.write(report)
        return EXIT_OK if report.is_positive else EXIT_NEGATIVE

    def spectrum(self, args: argparse.Namespace) -> int:
        seq = load_sequence(args.input)
        order = seq.max_order() if args.max_order is None else args.max_order
        workers = self.config.spectral.max_workers if args.workers is None else args.workers
        trajectory = eigenvalue_trajectory(seq, order, workers)
        csv_path = args.csv or self.config.output.trajectory_csv
        if csv_path:
            self.writer.save_trajectory_csv(trajectory, csv_path)
        self.writer.write({"max_order": order, "trajectory": list(trajectory)})
        return EXIT_OK

    def determinacy(self, args: argparse.Namespace) -> int:
        seq = load_sequence(args.input)
        order = seq.max_order() if args.max_order is None else args.max_order
        spectral = self.config.spectral
        trajectory = eigenvalue_trajectory(seq, order, spectral.max_workers)
        report = determinacy_heuristic(
            trajectory,
            spectral.window if args.window is None else args.window,
            spectral.slope_threshold if args.slope_threshold is None else args.slope_threshold,
            spectral.floor if args.floor is None else args.floor,
        )
        self.writer.write(report)
        return EXIT_OK

    def extract(self, args: argparse.Namespace) -> int:
        seq = load_sequence(args.input)
        index_map = IndexMap.shift(args.offset) if args.kind == SHIFT else IndexMap(args.d, args.offset)
        sub = extract_submoment(seq, index_map)
        report = {"map": {"d": index_map.step, "offset": index_map.offset, "kind": index_map.kind},
                  "sequence": sequence_to_dict(sub)}
        if args.classify:
            report["classification"] = self._classify_sequence(sub, None)
        self.writer.write(report)
        return EXIT_OK

    def admissible(self, args: argparse.Namespace) -> int:
        indices = _parse_indices(args.indices)
        result = index_admissibility(indices)
        report = result.to_dict()
        if not result.admissible:
            witness = geometric_minor_scan(indices)
            report["minor_witness"] = None if witness is None else {
                "base": witness.base, "rows": list(witness.rows), "minor": witness.minor,
            }
        self.writer.write(report)
        return EXIT_OK if result.admissible else EXIT_NEGATIVE

    def complete(self, args: argparse.Namespace) -> int:
        pseq = partial_from_data(load_document(args.input))
        desc = detect_pattern(pseq)
        if not desc.is_arithmetic:
            raise InputError(f"Pattern {pseq.sorted_pattern()} is not of the form d*N_0 + offset with even offset")
        completion = self.config.completion
        measures = self.config.measures
        result = complete_arithmetic(
            pseq, desc, args.horizon, self.tol,
            support_tol=completion.support_tolerance,
            reproduction_tol=completion.reproduction_tolerance,
            pivot_tol=measures.pivot_tolerance,
            dedup_tol=measures.dedup_tolerance,
        )
        audit = verify_completion(pseq, result, self.tol, reproduction_tol=completion.reproduction_tolerance)
        report = result.to_dict()
        report["verification"] = audit.to_dict()
        self.writer.write(report)
        return EXIT_OK if audit.passed else EXIT_NEGATIVE

    def recover(self, args: argparse.Namespace) -> int:
        seq = load_sequence(args.input)
        m = args.atoms or len(seq) // 2
        measures = self.config.measures
        while True:
            try:
                measure = recover_atoms(
                    seq, m, self.tol,
                    pivot_tol=measures.pivot_tolerance,
                    dedup_tol=measures.dedup_tolerance,
                    negative_weight_tol=measures.negative_weight_tolerance,
                    moment_tol=measures.moment_match_tolerance,
                )
                break
            except RankDeficient as e:
                if e.rank < 1:
                    raise
                logger.info(f"Retrying recovery with m = {e.rank}")
                m = e.rank
        residual = moment_residual(measure, seq, 2 * m)
        self.writer.write({"atoms_requested": m, "residual": residual, **measure.to_dict()})
        return EXIT_OK

    def perturb(self, args: argparse.Namespace) -> int:
        sigma = load_measure(args.sigma)
        mu = load_signed_measure(args.mu)
        seq = load_sequence(args.input) if args.input else moments_of(sigma, args.kmax)
        pert = self.config.perturbation
        perturbed, positivity, domination = perturb_and_classify(
            seq, sigma, mu, args.kmax, self.tol,
            representation_tol=pert.representation_tolerance,
            node_tol=pert.node_tolerance,
            weight_slack=pert.weight_slack,
        )
        self.writer.write({
            "perturbed": sequence_to_dict(perturbed),
            "classification": positivity,
            "domination": domination,
            "even_moment_violations": even_moment_bound(seq, mu, args.kmax, pert.weight_slack),
        })
        return EXIT_OK if domination.dominated and positivity.is_positive else EXIT_NEGATIVE

    def eject(self, args: argparse.Namespace) -> int:
        seq = load_sequence(args.input)
        if self.mode == "exact" and not seq.has_exact(2 * args.m + 1):
            raise InputError("Exact mode needs rational entries in the input")
        report = ejection_demo(seq, args.m, self.tol)
        output = {"m": args.m, "classification": report}
        if args.m >= 1:
            try:
                output["zeroth_moment_floor"] = zeroth_moment_floor(seq, args.m)
            except RankDeficient as e:
                logger.info(f"No zeroth-moment floor: {e}")
        self.writer.write(output)
        return EXIT_OK if report.is_positive else EXIT_NEGATIVE

    def stieltjes(self, args: argparse.Namespace) -> int:
        measure = load_measure(args.measure)
        lam = ComplexPoint.parse(args.lam)
        value = stieltjes_transform(measure, lam)
        report = {
            "lambda": lam,
            "value": value,
            "bound": measure.total_mass / abs(lam.im),
        }
        if args.offset is not None or args.d is not None:
            d = args.d or 1
            offset = args.offset or 0
            image = pushforward_measure(measure, d, offset, self.config.measures.dedup_tolerance)
            report["relation"] = {
                "d": d,
                "offset": offset,
                "pushforward": image,
                "quotient_residual": quotient_relation_check(measure, image, d, offset, lam),
            }
            if d == 1:
                moments = moments_of(measure, max(offset - 1, 0))
                report["relation"]["circle_constant"] = circle_constant(moments, offset, lam)
                report["relation"]["circle_residual"] = circle_relation_check(measure, image, offset, lam)
        self.writer.write(report)
        return EXIT_OK

    def generate(self, args: argparse.Namespace) -> int:
        measure = load_measure(args.measure) if args.measure else None
        seq = generate(args.name, args.count, q=args.q, a=args.a, measure=measure)
        self.writer.write(sequence_to_dict(seq))
        return EXIT_OK

    def reproduce(self, args: argparse.Namespace) -> int:
        start = time.time()
        outcomes = run_catalog(self.config, args.only, progress=not args.no_progress)
        passed = sum(o.passed for o in outcomes)
        self.writer.write({
            "passed": passed,
            "failed": len(outcomes) - passed,
            "elapsed": format_time(time.time() - start),
            "examples": outcomes,
        })
        return EXIT_OK if passed == len(outcomes) else EXIT_NEGATIVE


def _parse_indices(text: str) -> List[int]:
    text = text.strip()
    try:
        values = json.loads(text) if text.startswith("[") else [int(v) for v in text.replace(",", " ").split()]
        return [int(v) for v in values]
    except (ValueError, TypeError) as e:
        raise InputError(f"Cannot parse index list {text!r}: {e}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, help="Path to configuration file")
    common.add_argument("--log-level", type=str, choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                        help="Logging level (overrides config)")
    common.add_argument("--out", type=str, help="Write the JSON report here instead of stdout")
    common.add_argument("--tol", type=float, help="PSD tolerance (overrides config and MOMENTKIT_TOL)")
    common.add_argument("--mode", choices=["float", "exact"], default="float", help="Classification arithmetic")

    parser = argparse.ArgumentParser(
        description="Hamburger moment problem toolkit",
        epilog="Exit codes: 0 ok, 1 negative verdict, 2 input/usage error, 3 numerical failure. "
               "MOMENTKIT_TOL overrides the default tolerance.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="Classify a (partial) sequence")
    p.add_argument("--input", required=True, help="Sequence JSON/CSV or partial JSON ('-' for stdin)")
    p.add_argument("--max-order", type=int, help="Largest Hankel order N (default: all available)")
    p.add_argument("--enumeration-cap", type=int, help="Largest order for partial enumeration")

    p = sub.add_parser("spectrum", parents=[common], help="Smallest-eigenvalue trajectory")
    p.add_argument("--input", required=True)
    p.add_argument("--max-order", type=int)
    p.add_argument("--csv", type=str, help="Also write the trajectory as CSV")
    p.add_argument("--workers", type=int, help="Thread pool size for eigen-solves")

    p = sub.add_parser("determinacy", parents=[common], help="Determinacy heuristic from eigenvalue decay")
    p.add_argument("--input", required=True)
    p.add_argument("--max-order", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--slope-threshold", type=float)
    p.add_argument("--floor", type=float)

    p = sub.add_parser("extract", parents=[common], help="Extract s~_k = s_{kd+offset}")
    p.add_argument("--input", required=True)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--offset", type=int, default=0)
    p.add_argument("--kind", choices=[ARITHMETIC, SHIFT], default=ARITHMETIC)
    p.add_argument("--classify", action="store_true", help="Classify the extracted sequence")

    p = sub.add_parser("admissible", parents=[common], help="Test an index list for admissibility")
    p.add_argument("--indices", required=True, help="e.g. '0,3,6,9' or '[0, 3, 6, 9]'")

    p = sub.add_parser("complete", parents=[common], help="Complete a partial sequence")
    p.add_argument("--input", required=True, help="Partial sequence JSON")
    p.add_argument("--horizon", type=int, help="Last index of the completion (default 2*max(P)+2)")

    p = sub.add_parser("recover", parents=[common], help="Recover an atomic measure from moments")
    p.add_argument("--input", required=True)
    p.add_argument("--atoms", type=int, help="Number of atoms m (default len//2)")

    p = sub.add_parser("perturb", parents=[common], help="Perturb by a signed atomic measure")
    p.add_argument("--sigma", required=True, help="Representing measure JSON")
    p.add_argument("--mu", required=True, help="Signed measure JSON with 'plus'/'minus'")
    p.add_argument("--kmax", type=int, required=True)
    p.add_argument("--input", help="Sequence represented by sigma (default: moments of sigma)")

    p = sub.add_parser("eject", parents=[common], help="Zero s_2m and classify")
    p.add_argument("--input", required=True)
    p.add_argument("--m", type=int, required=True)

    p = sub.add_parser("stieltjes", parents=[common], help="Stieltjes transform of an atomic measure")
    p.add_argument("--measure", required=True)
    p.add_argument("--lambda", dest="lam", required=True, help="Complex point, e.g. '1+2i'")
    p.add_argument("--d", type=int, help="Check the quotient relation for this step")
    p.add_argument("--offset", type=int, help="Check the shift relations for this even offset")

    p = sub.add_parser("generate", parents=[common], help="Generate a builtin sequence")
    p.add_argument("name", choices=sorted(BUILTINS))
    p.add_argument("--count", type=int, default=11, help="Number of entries")
    p.add_argument("--q", type=float,
                   help="Stieltjes-Wigert parameter in (0, 1), recommended 0.85-0.95 (default 0.9); "
                        "s_n = q^(-(n+1)^2/2) grows fast, so small q or large --count overflows float")
    p.add_argument("--a", type=str, help="Geometric base (e.g. 2 or 1/2)")
    p.add_argument("--measure", type=str, help="Measure JSON for from_measure")

    p = sub.add_parser("reproduce", parents=[common], help="Run the worked-example catalog")
    p.add_argument("--only", nargs="+", choices=[example.name for example in CATALOG])
    p.add_argument("--no-progress", action="store_true", help="Hide the progress bar")

    return parser


def load_config(args: argparse.Namespace) -> MomentKitConfig:
    """Config file, then environment, then command-line flags."""
    config = MomentKitConfig.from_yaml(args.config) if args.config else MomentKitConfig()
    config.apply_env_overrides()

    # Override configuration with command-line arguments
    if args.tol is not None:
        config.tolerance.psd_tolerance = args.tol
    if args.log_level:
        config.logging.level = args.log_level

    config.validate()
    return config


def run(argv: Optional[List[str]] = None, stream=None) -> int:
    """Parse argv, run one command and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    try:
        config = load_config(args)
    except FileNotFoundError:
        print(f"Configuration file not found: {args.config}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        print(f"Failed to load configuration: {e}", file=sys.stderr)
        return EXIT_USAGE

    setup_logging(
        config.logging.log_file,
        config.logging.level,
        config.logging.console_output,
        config.logging.file_output,
        config.logging.format,
    )

    app = MomentKitApp(config, ReportWriter(args.out, config.output.indent, stream), args.mode)
    try:
        return app.dispatch(args)
    except MomentKitError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except Exception as e:
        logger.error(f"Unexpected error in {args.command}: {e}", exc_info=True)
        return EXIT_NUMERICAL


def main():
    """Main entry point."""
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
