"""Runnable catalog of the worked examples, each checked against its expected outcome."""

import logging
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from tqdm import tqdm

from src.completion import complete_arithmetic, detect_pattern, verify_completion
from src.config import MomentKitConfig
from src.exceptions import MomentKitError
from src.measures import AtomicMeasure, SignedAtomicMeasure, moments_of, pushforward_measure, shifted_measure
from src.perturbation import ejection_demo, perturb_and_classify
from src.sequence_library import factorial, geometric, hilbert, stieltjes_wigert
from src.sequences import PartialMomentSequence, Verdict, classify_exact, classify_positivity
from src.spectral import DeterminacyVerdict, determinacy_heuristic, eigenvalue_trajectory, interlacing_audit
from src.submoment import geometric_minor_scan, index_admissibility
from src.transforms import ComplexPoint, circle_relation_check, quotient_relation_check, transform_scale
from src.utils import format_time, relative_scale

logger = logging.getLogger(__name__)

Check = Callable[[MomentKitConfig], Tuple[bool, str]]


@dataclass(frozen=True)
class WorkedExample:
    name: str
    claim: str
    check: Check


@dataclass(frozen=True)
class ExampleOutcome:
    name: str
    claim: str
    passed: bool
    detail: str
    seconds: float

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "claim": self.claim,
            "passed": self.passed,
            "detail": self.detail,
            "elapsed": format_time(self.seconds),
        }


CATALOG: List[WorkedExample] = []


def worked_example(name: str, claim: str):
    def register(check: Check) -> Check:
        CATALOG.append(WorkedExample(name, claim, check))
        return check
    return register


@worked_example("hilbert_positive_definite", "Hilbert sequence 1/(k+1) is positive definite (float and exact, order 7)")
def _hilbert_positive(config: MomentKitConfig) -> Tuple[bool, str]:
    seq = hilbert(15)
    numeric = classify_positivity(seq, 7, config.tolerance.psd_tolerance)
    exact = classify_exact(seq, 7)
    ok = numeric.verdict is Verdict.POSITIVE_DEFINITE and exact.verdict is Verdict.POSITIVE_DEFINITE
    return ok, f"float={numeric.verdict.value} exact={exact.verdict.value}"


@worked_example("hilbert_first_eigenvalue", "lambda_min(H_1) of Hilbert = (4/3 - sqrt(16/9 - 1/3))/2")
def _hilbert_first_eigenvalue(config: MomentKitConfig) -> Tuple[bool, str]:
    expected = (4 / 3 - math.sqrt(16 / 9 - 1 / 3)) / 2
    value = eigenvalue_trajectory(hilbert(3), 1)[1]
    return abs(value - expected) <= 1e-10, f"lambda_min={value!r} expected={expected!r}"


@worked_example("hilbert_determinate", "Hilbert eigenvalues decay geometrically: suggests determinate")
def _hilbert_determinate(config: MomentKitConfig) -> Tuple[bool, str]:
    trajectory = eigenvalue_trajectory(hilbert(13), 6)
    report = determinacy_heuristic(trajectory, config.spectral.window, config.spectral.slope_threshold,
                                   config.spectral.floor)
    ratio = trajectory[6] / trajectory[0]
    ok = ratio < 1e-7 and report.verdict is DeterminacyVerdict.SUGGESTS_DETERMINATE
    return ok, f"lambda_6/lambda_0={ratio:.3e} slope={report.fit_slope:.3f} verdict={report.verdict.value}"


@worked_example("stieltjes_wigert_not_determinate", "Stieltjes-Wigert q=0.9 decays slower than Hilbert at N=8")
def _stieltjes_wigert(config: MomentKitConfig) -> Tuple[bool, str]:
    sw = determinacy_heuristic(eigenvalue_trajectory(stieltjes_wigert(17, 0.9), 8), config.spectral.window,
                               config.spectral.slope_threshold, config.spectral.floor)
    hb = determinacy_heuristic(eigenvalue_trajectory(hilbert(17), 8), config.spectral.window,
                               config.spectral.slope_threshold, config.spectral.floor)
    ok = abs(sw.fit_slope) < abs(hb.fit_slope) and sw.verdict is not DeterminacyVerdict.SUGGESTS_DETERMINATE
    return ok, f"slope={sw.fit_slope:.3f} (hilbert {hb.fit_slope:.3f}) verdict={sw.verdict.value}"


@worked_example("factorial_not_positive", "1/(k+1)! has no representing measure: det H_1 = -1/12")
def _factorial(config: MomentKitConfig) -> Tuple[bool, str]:
    report = classify_exact(factorial(3), 1)
    ok = report.verdict is Verdict.NOT_POSITIVE and report.failing_order == 1 and report.witness == Fraction(-1, 12)
    return ok, f"verdict={report.verdict.value} witness={report.witness}"


@worked_example("ejection", "Zeroing s_2m of Hilbert leaves the moment cone at order m (m = 1..4)")
def _ejection(config: MomentKitConfig) -> Tuple[bool, str]:
    seq = hilbert(9)
    reports = {m: ejection_demo(seq, m) for m in range(1, 5)}
    ok = all(r.verdict is Verdict.NOT_POSITIVE and r.failing_order == m for m, r in reports.items())
    ok = ok and reports[1].witness == Fraction(-1, 4)
    return ok, ", ".join(f"m={m}: {r.witness}" for m, r in reports.items())


@worked_example("complete_even_pattern", "1, ?, 1/2, ?, 1/3 completes to a positive sequence")
def _complete_even(config: MomentKitConfig) -> Tuple[bool, str]:
    pseq = PartialMomentSequence({0: 1.0, 2: 0.5, 4: 1 / 3})
    result = complete_arithmetic(pseq, detect_pattern(pseq), tol=config.tolerance.psd_tolerance,
                                 support_tol=config.completion.support_tolerance,
                                 reproduction_tol=config.completion.reproduction_tolerance)
    audit = verify_completion(pseq, result, config.tolerance.psd_tolerance,
                              reproduction_tol=config.completion.reproduction_tolerance)
    return audit.passed, f"{len(result.measure)} atoms, failures={audit.failures}"


@worked_example("complete_squared_delta", "t_k = 4^k on 2N_0 completes to s_j = 2^j (nonnegative root)")
def _complete_delta(config: MomentKitConfig) -> Tuple[bool, str]:
    pseq = PartialMomentSequence({2 * k: 4.0 ** k for k in range(5)})
    result = complete_arithmetic(pseq, horizon=8)
    expected = geometric(9, 2).array
    worst = max(abs(a - b) for a, b in zip(result.completed.entries, expected))
    return worst <= 1e-9 * relative_scale(*expected), f"max deviation {worst:.3e}"


@worked_example("admissibility", "(0,3,6,9) is admissible; (0,2,6) fails with a negative Hankel minor")
def _admissibility(config: MomentKitConfig) -> Tuple[bool, str]:
    good = index_admissibility([0, 3, 6, 9])
    bad = index_admissibility([0, 2, 6])
    witness = geometric_minor_scan([0, 2, 6])
    ok = good.admissible and good.d == 3 and not bad.admissible and witness is not None
    return ok, f"good={good.to_dict()} bad={bad.to_dict()} minor={witness}"


@worked_example("interlacing", "Even-index Hilbert submatrices respect Cauchy interlacing")
def _interlacing(config: MomentKitConfig) -> Tuple[bool, str]:
    pairs = interlacing_audit(hilbert(17), 2, 0, 4, config.tolerance.psd_tolerance)
    return all(p.holds for p in pairs), f"{sum(p.holds for p in pairs)}/{len(pairs)} orders hold"


@worked_example("circle_relation", "w_sigma~ = C(lambda) + lambda^2 w_sigma for x^2 dsigma")
def _circle(config: MomentKitConfig) -> Tuple[bool, str]:
    sigma = AtomicMeasure((-1.5, 0.25, 2.0), (0.3, 0.5, 0.2))
    sigma_sub = shifted_measure(sigma, 2)
    worst = 0.0
    for text in ("1+1i", "-1-1i", "2i", "3+0.5i"):
        lam = ComplexPoint.parse(text)
        worst = max(worst, circle_relation_check(sigma, sigma_sub, 2, lam) / transform_scale(sigma, 2, lam))
    return worst <= 1e-10, f"max scaled residual {worst:.3e}"


@worked_example("quotient_relation", "Pushforward under x -> x^2 merges +-1 into one atom")
def _quotient(config: MomentKitConfig) -> Tuple[bool, str]:
    sigma = AtomicMeasure((-1.0, 1.0), (0.5, 0.5))
    sigma_sub = pushforward_measure(sigma, 2, 0)
    residual = quotient_relation_check(sigma, sigma_sub, 2, 0, ComplexPoint(0.0, 1.0))
    return len(sigma_sub) == 1 and residual <= 1e-12, f"atoms={sigma_sub.atoms} residual={residual:.3e}"


@worked_example("perturbation", "delta_1 + (delta_2 - 1/2 delta_1) stays a moment sequence")
def _perturbation(config: MomentKitConfig) -> Tuple[bool, str]:
    sigma = AtomicMeasure.point_mass(1.0)
    mu = SignedAtomicMeasure(AtomicMeasure.point_mass(2.0), AtomicMeasure.point_mass(1.0, 0.5))
    perturbed, positivity, domination = perturb_and_classify(moments_of(sigma, 4), sigma, mu, 4,
                                                             config.tolerance.psd_tolerance)
    ok = positivity.is_positive and domination.dominated and list(perturbed.entries) == [1.5, 2.5, 4.5, 8.5, 16.5]
    return ok, f"perturbed={list(perturbed.entries)} dominated={domination.dominated}"


def select(names: Optional[Sequence[str]] = None) -> List[WorkedExample]:
    if not names:
        return list(CATALOG)
    known = {example.name: example for example in CATALOG}
    missing = [name for name in names if name not in known]
    if missing:
        raise KeyError(f"Unknown worked examples: {', '.join(missing)}")
    return [known[name] for name in names]


def run_catalog(config: MomentKitConfig, names: Optional[Sequence[str]] = None,
                progress: bool = True) -> List[ExampleOutcome]:
    """Run worked examples in catalog order; a raised toolkit error counts as a failure."""
    outcomes = []
    for example in tqdm(select(names), desc="Worked examples", unit="example", disable=not progress):
        start = time.time()
        try:
            passed, detail = example.check(config)
        except MomentKitError as e:
            passed, detail = False, f"{type(e).__name__}: {e}"
        outcome = ExampleOutcome(example.name, example.claim, bool(passed), detail, time.time() - start)
        if not outcome.passed:
            logger.warning(f"Worked example {example.name} failed: {detail}")
        outcomes.append(outcome)
    return outcomes
