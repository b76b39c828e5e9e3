"""Positive completion of partial sequences with arithmetic patterns.

A pattern P = d*N_0 + offset (offset even) is always completable: the
specified entries t_k = s_{kd+offset} are recovered as the moments of an
atomic measure, whose nodes are mapped back through x -> x^(1/d) and whose
weights are divided by p^offset. The moments of the result fill every gap.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from scipy.linalg import LinAlgError, cholesky, eigh_tridiagonal, hankel

from src.exceptions import (
    EvenStepNegativeNode,
    InputError,
    RankDeficient,
    SubsequenceNotPositive,
    TooFewEntries,
    ZeroNodeWithOffset,
)
from src.measures import (
    DEFAULT_DEDUP_TOLERANCE,
    DEFAULT_PIVOT_TOLERANCE,
    AtomicMeasure,
    merge_close_atoms,
    moment_residual,
    moments_of,
    recover_atoms,
)
from src.sequences import (
    DEFAULT_TOLERANCE,
    PartialMomentSequence,
    PositivityReport,
    TruncatedMomentSequence,
    classify_exact,
    classify_positivity,
)

logger = logging.getLogger(__name__)

DEFAULT_SUPPORT_TOLERANCE = 1e-9
DEFAULT_REPRODUCTION_TOLERANCE = 1e-9
DEFAULT_AGREEMENT_TOLERANCE = 1e-10

DEFINITE = "definite"
SEMIDEFINITE = "semidefinite"


@dataclass(frozen=True)
class PatternDescriptor:
    kind: str
    d: Optional[int] = None
    offset: Optional[int] = None
    count: int = 0

    @property
    def is_arithmetic(self) -> bool:
        return self.kind == "arithmetic"

    def indices(self) -> List[int]:
        return [k * self.d + self.offset for k in range(self.count)]

    def to_dict(self) -> Dict:
        return {"kind": self.kind, "d": self.d, "offset": self.offset, "count": self.count}


@dataclass(frozen=True)
class CompletionResult:
    completed: TruncatedMomentSequence
    measure: AtomicMeasure
    definiteness: str
    pattern: PatternDescriptor
    horizon: int
    residual: float = 0.0

    def to_dict(self) -> Dict:
        return {
            "pattern": self.pattern.to_dict(),
            "horizon": self.horizon,
            "definiteness": self.definiteness,
            "residual": self.residual,
            "completed": list(self.completed.entries),
            "measure": self.measure.to_dict(),
        }


def detect_pattern(pseq: PartialMomentSequence) -> PatternDescriptor:
    """arithmetic(d, offset) iff the sorted pattern is a progression with step >= 1 from an even start."""
    pattern = pseq.sorted_pattern()
    if len(pattern) < 3:
        raise TooFewEntries(3, len(pattern))

    d = pattern[1] - pattern[0]
    steps = np.diff(pattern)
    if pattern[0] % 2 == 0 and d >= 1 and np.all(steps == d):
        return PatternDescriptor("arithmetic", d=d, offset=pattern[0], count=len(pattern))
    return PatternDescriptor("other", count=len(pattern))


def default_horizon(pseq: PartialMomentSequence) -> int:
    return 2 * max(pseq.pattern) + 2


def _recover_with_retry(t: TruncatedMomentSequence, m: int, tol: float,
                        pivot_tol: float, dedup_tol: float) -> AtomicMeasure:
    while m > 0:
        try:
            return recover_atoms(t, m, tol=tol, pivot_tol=pivot_tol, dedup_tol=dedup_tol)
        except RankDeficient as e:
            logger.info(f"Rank {e.rank} < {m}; recovering {e.rank} atoms")
            m = e.rank
    return AtomicMeasure()


def _anchored_quadrature(t: np.ndarray, m: int, d: int, support_tol: float,
                         dedup_tol: float) -> Optional[AtomicMeasure]:
    """
    An (m+1)-atom measure reproducing t_0..t_{2m} with one node placed at an anchor.

    The Cholesky factor of H_m gives alpha_0..alpha_{m-1} and b_1..b_m; the
    free coefficient alpha_m is chosen so the anchor is an eigenvalue of the
    (m+1) Jacobi matrix. The anchor sits below the smallest m-point Gauss node
    g_1: at g_1/2 for even d (all nodes stay >= 0), at g_1 minus half the
    Gauss node spread for odd d. Returns None when H_m is not numerically positive definite.
    """
    try:
        R = cholesky(hankel(t[:m + 1], t[m:2 * m + 1]), lower=False)
    except LinAlgError:
        return None
    diagonal = np.diag(R)
    if np.any(diagonal <= 0):
        return None
    ratios = np.diag(R, 1) / diagonal[:-1]
    alpha = ratios - np.concatenate(([0.0], ratios[:-1]))
    b = diagonal[1:] / diagonal[:-1]

    jacobi = np.diag(alpha) + np.diag(b[:m - 1], 1) + np.diag(b[:m - 1], -1)
    gauss = np.linalg.eigvalsh(jacobi)
    if d % 2 == 0:
        if gauss[0] < -support_tol * max(1.0, abs(gauss[-1])):
            raise EvenStepNegativeNode(float(gauss[0]))
        anchor = max(float(gauss[0]), 0.0) / 2
    else:
        spread = float(gauss[-1] - gauss[0]) if m > 1 else float(b[0])
        anchor = float(gauss[0]) - spread / 2

    rhs = np.zeros(m)
    rhs[-1] = b[-1] ** 2
    try:
        delta = np.linalg.solve(jacobi - anchor * np.eye(m), rhs)
    except LinAlgError:
        return None
    nodes, vectors = eigh_tridiagonal(np.append(alpha, anchor + delta[-1]), b)
    weights = t[0] * vectors[0, :] ** 2
    logger.debug(f"Anchored quadrature at {anchor:.6g}: nodes={nodes.tolist()}")
    return merge_close_atoms(nodes, weights, dedup_tol)


def _root_map(nodes: np.ndarray, weights: np.ndarray, d: int, offset: int,
              support_tol: float, dedup_tol: float) -> AtomicMeasure:
    scale = max(1.0, float(np.max(np.abs(nodes)))) if nodes.size else 1.0
    if d % 2 == 0:
        negative = nodes[nodes < -support_tol * scale]
        if negative.size:
            raise EvenStepNegativeNode(float(negative[0]))
        clamped = np.count_nonzero(nodes < 0)
        if clamped:
            logger.warning(f"Clamped {clamped} slightly negative nodes to 0")
        nodes = np.clip(nodes, 0.0, None)

    roots = np.sign(nodes) * np.abs(nodes) ** (1.0 / d)
    if offset > 0:
        if np.any(np.abs(nodes) <= support_tol * scale):
            raise ZeroNodeWithOffset(offset)
        weights = weights / roots ** offset
    return merge_close_atoms(roots, weights, dedup_tol)


def complete_arithmetic(pseq: PartialMomentSequence, desc: Optional[PatternDescriptor] = None,
                        horizon: Optional[int] = None,
                        tol: float = DEFAULT_TOLERANCE,
                        support_tol: float = DEFAULT_SUPPORT_TOLERANCE,
                        reproduction_tol: float = DEFAULT_REPRODUCTION_TOLERANCE,
                        pivot_tol: float = DEFAULT_PIVOT_TOLERANCE,
                        dedup_tol: float = DEFAULT_DEDUP_TOLERANCE) -> CompletionResult:
    """
    Complete a partial sequence whose pattern is d*N_0 + offset.

    Args:
        pseq: Partial sequence
        desc: Pattern descriptor (detected when omitted)
        horizon: Last index of the completed sequence (default 2*max(P)+2)

    Returns:
        CompletionResult; specified entries are carried over verbatim

    Raises:
        SubsequenceNotPositive: If the specified entries are not positive
        EvenStepNegativeNode: Even d and a recovered node is negative
        ZeroNodeWithOffset: Positive offset and a recovered node is 0
    """
    desc = desc or detect_pattern(pseq)
    if not desc.is_arithmetic:
        raise InputError("Only arithmetic patterns d*N_0 + offset can be completed")
    horizon = default_horizon(pseq) if horizon is None else int(horizon)
    if horizon < max(pseq.pattern):
        raise InputError(f"Horizon {horizon} is below the largest specified index {max(pseq.pattern)}")

    d, offset = desc.d, desc.offset
    t = np.array([pseq.specified[i] for i in desc.indices()])
    subsequence = TruncatedMomentSequence(tuple(t))
    report = classify_positivity(subsequence, subsequence.max_order(), tol)
    if not report.is_positive:
        raise SubsequenceNotPositive(report)

    m = len(t) // 2
    sigma_sub = _recover_with_retry(subsequence, m, tol, pivot_tol, dedup_tol)
    scale = max(1.0, float(np.max(np.abs(t))))

    if len(t) % 2 and len(sigma_sub) == m:
        if moment_residual(sigma_sub, subsequence, len(t)) > reproduction_tol * scale:
            logger.debug(f"Last specified entry not reproduced by {m} atoms; extending to {m + 1}")
            anchored = _anchored_quadrature(t, m, d, support_tol, dedup_tol)
            if anchored is None:
                logger.warning(f"H_{m} of the specified entries is singular; keeping {m} atoms")
            else:
                sigma_sub = anchored

    sigma = _root_map(np.asarray(sigma_sub.nodes), np.asarray(sigma_sub.weights), d, offset,
                      support_tol, dedup_tol)
    logger.info(f"Completion measure has {len(sigma)} atoms")

    moments = moments_of(sigma, horizon).array
    residual = float(max(abs(moments[i] - v) for i, v in pseq.specified.items()))
    if residual > reproduction_tol * scale:
        logger.warning(f"Completion reproduces specified entries only to {residual:.3e}")
    for i, v in pseq.specified.items():
        moments[i] = v

    definite = offset == 0 and len(sigma) >= horizon // 2 + 1
    return CompletionResult(
        completed=TruncatedMomentSequence(tuple(moments)),
        measure=sigma,
        definiteness=DEFINITE if definite else SEMIDEFINITE,
        pattern=desc,
        horizon=horizon,
        residual=residual,
    )


@dataclass
class CompletionReport:
    checks: Dict[str, bool] = field(default_factory=dict)
    failures: List[str] = field(default_factory=list)
    positivity: Optional[PositivityReport] = None
    exact_positivity: Optional[PositivityReport] = None

    @property
    def passed(self) -> bool:
        return not self.failures

    def record(self, name: str, ok: bool, detail: str):
        self.checks[name] = bool(ok)
        if not ok:
            self.failures.append(f"{name}: {detail}")

    def to_dict(self) -> Dict:
        return {
            "passed": self.passed,
            "checks": dict(self.checks),
            "failures": list(self.failures),
            "positivity": self.positivity.to_dict() if self.positivity else None,
            "exact_positivity": self.exact_positivity.to_dict() if self.exact_positivity else None,
        }


def verify_completion(pseq: PartialMomentSequence, result: CompletionResult,
                      tol: float = DEFAULT_TOLERANCE,
                      agreement_tol: float = DEFAULT_AGREEMENT_TOLERANCE,
                      reproduction_tol: float = DEFAULT_REPRODUCTION_TOLERANCE) -> CompletionReport:
    """
    Audit a completion: specified entries, the measure behind them, positivity
    and the definiteness claim. Never raises on failure.
    """
    report = CompletionReport()
    completed = result.completed

    scale = max(1.0, max(abs(v) for v in pseq.specified.values()))
    worst = 0.0
    for i, v in pseq.specified.items():
        worst = max(worst, abs(completed.entries[i] - v) if i < len(completed) else float("inf"))
    report.record("specified_entries", worst <= agreement_tol * scale,
                  f"max deviation {worst:.3e} exceeds {agreement_tol * scale:.3e}")

    forward = moments_of(result.measure, max(pseq.pattern)).array
    drift = max(abs(forward[i] - v) for i, v in pseq.specified.items())
    report.record("measure_reproduces_entries", drift <= reproduction_tol * scale,
                  f"measure moments miss specified entries by {drift:.3e}")

    order = completed.max_order()
    report.positivity = classify_positivity(completed, order, tol)
    report.record("positivity", report.positivity.is_positive,
                  f"not positive at order {report.positivity.failing_order}")
    if completed.has_exact(2 * order + 1):
        report.exact_positivity = classify_exact(completed, order)
        report.record("exact_positivity", report.exact_positivity.is_positive,
                      f"exact minor {report.exact_positivity.witness} at order {report.exact_positivity.failing_order}")

    if result.definiteness == DEFINITE:
        report.record("definiteness", report.positivity.is_definite,
                      f"claimed definite but verdict is {report.positivity.verdict.value}")
    else:
        report.record("definiteness", result.definiteness == SEMIDEFINITE,
                      f"unknown definiteness {result.definiteness!r}")

    if result.pattern.is_arithmetic and result.pattern.offset == 0 and len(result.measure) > 0:
        atom_order = min(len(result.measure) - 1, order)
        through = classify_positivity(completed, atom_order, tol)
        report.record("definite_through_atom_count", through.is_definite,
                      f"not definite at order {atom_order} with {len(result.measure)} atoms")

    logger.info(f"Completion audit: {len(report.checks)} checks, {len(report.failures)} failures")
    return report
