"""Perturbations of moment sequences by signed atomic measures.

s + t stays a moment sequence whenever t is the moment sequence of
mu = mu_1 - mu_2 with mu_2 dominated by a representing measure sigma of s.
For atomic sigma that means: every mu_2 atom sits on a sigma atom and
carries at most that atom's weight.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Tuple, Union

import numpy as np
from scipy.linalg import LinAlgError, solve

from src.exceptions import AmbiguousMatch, InputError, InsufficientMoments, MeasureMismatch, RankDeficient
from src.measures import AtomicMeasure, SignedAtomicMeasure, moment_residual, moments_of, numerical_rank
from src.sequences import (
    DEFAULT_TOLERANCE,
    PositivityReport,
    TruncatedMomentSequence,
    classify_exact,
    classify_positivity,
)

logger = logging.getLogger(__name__)

DEFAULT_NODE_TOLERANCE = 1e-9
DEFAULT_WEIGHT_SLACK = 1e-12
DEFAULT_REPRESENTATION_TOLERANCE = 1e-9


@dataclass(frozen=True)
class WeightViolation:
    node: float
    available: float
    requested: float

    def to_dict(self) -> Dict:
        return {"kind": "weight", "node": self.node, "available": self.available, "requested": self.requested}


@dataclass(frozen=True)
class MissingNode:
    node: float

    def to_dict(self) -> Dict:
        return {"kind": "missing_node", "node": self.node}


Violation = Union[WeightViolation, MissingNode]


@dataclass(frozen=True)
class DominationReport:
    dominated: bool
    violations: Tuple[Violation, ...]
    epsilon_max: float

    def to_dict(self) -> Dict:
        return {
            "dominated": self.dominated,
            "epsilon_max": self.epsilon_max,
            "violations": [v.to_dict() for v in self.violations],
        }


class PerturbationResult(NamedTuple):
    perturbed: TruncatedMomentSequence
    positivity: PositivityReport
    domination: DominationReport


def check_domination(sigma: AtomicMeasure, mu: SignedAtomicMeasure,
                     node_tol: float = DEFAULT_NODE_TOLERANCE,
                     weight_slack: float = DEFAULT_WEIGHT_SLACK) -> DominationReport:
    """
    Test whether mu_2 is dominated by sigma and report the largest admissible scale.

    Requests from several mu_2 atoms matching the same sigma atom add up.
    epsilon_max is 1 when dominated, 0 with any missing node, otherwise
    min(1, c_j/d_j) over the violated atoms.
    """
    if node_tol < 0:
        raise InputError(f"node_tol must be nonnegative, got {node_tol}")
    nodes = np.asarray(sigma.nodes, dtype=float)

    requested: Dict[int, float] = {}
    missing: List[MissingNode] = []
    for node, weight in mu.minus.atoms:
        matches = np.flatnonzero(np.abs(nodes - node) <= node_tol)
        if matches.size > 1:
            raise AmbiguousMatch(node, nodes[matches].tolist())
        if matches.size == 0:
            missing.append(MissingNode(node))
            continue
        j = int(matches[0])
        requested[j] = requested.get(j, 0.0) + weight

    over = [
        WeightViolation(sigma.nodes[j], sigma.weights[j], d)
        for j, d in sorted(requested.items())
        if d > sigma.weights[j] + weight_slack
    ]
    violations: Tuple[Violation, ...] = tuple(missing) + tuple(over)

    if missing:
        epsilon_max = 0.0
    elif over:
        epsilon_max = min(1.0, min(v.available / v.requested for v in over))
    else:
        epsilon_max = 1.0

    if violations:
        logger.debug(f"Domination fails: {len(missing)} missing nodes, {len(over)} weight violations")
    return DominationReport(not violations, violations, epsilon_max)


def signed_moments(mu: SignedAtomicMeasure, k_max: int) -> np.ndarray:
    """t_k = moments(mu_1) - moments(mu_2), k = 0..k_max."""
    return moments_of(mu.plus, k_max).array - moments_of(mu.minus, k_max).array


def perturb_and_classify(s: TruncatedMomentSequence, sigma: AtomicMeasure, mu: SignedAtomicMeasure,
                         k_max: int, tol: float = DEFAULT_TOLERANCE,
                         representation_tol: float = DEFAULT_REPRESENTATION_TOLERANCE,
                         node_tol: float = DEFAULT_NODE_TOLERANCE,
                         weight_slack: float = DEFAULT_WEIGHT_SLACK) -> PerturbationResult:
    """
    Classify s + t and report whether mu is dominated by sigma.

    Raises:
        MeasureMismatch: If sigma does not reproduce s_0..s_{k_max}
    """
    if k_max < 0:
        raise InputError(f"k_max must be nonnegative, got {k_max}")
    if len(s) < k_max + 1:
        raise InsufficientMoments(k_max + 1, len(s))

    head = s.head(k_max + 1)
    scale = max(1.0, float(np.max(np.abs(head.array))))
    error = moment_residual(sigma, head, k_max + 1)
    if error > representation_tol * scale:
        raise MeasureMismatch(error, representation_tol * scale)

    perturbed = TruncatedMomentSequence(tuple(head.array + signed_moments(mu, k_max)))
    positivity = classify_positivity(perturbed, k_max // 2, tol)
    domination = check_domination(sigma, mu, node_tol, weight_slack)

    if domination.dominated and not positivity.is_positive:
        logger.warning(f"Dominated perturbation classified not positive at order {positivity.failing_order}")
    logger.info(f"Perturbation: {positivity.verdict.value}, dominated={domination.dominated}, "
                f"epsilon_max={domination.epsilon_max:.6g}")
    return PerturbationResult(perturbed, positivity, domination)


def even_moment_bound(s: TruncatedMomentSequence, mu: SignedAtomicMeasure, k_max: int,
                      slack: float = DEFAULT_WEIGHT_SLACK) -> List[int]:
    """Indices 2k <= k_max where int x^{2k} dmu_2 exceeds s_{2k}; empty for dominated mu."""
    if len(s) < k_max + 1:
        raise InsufficientMoments(k_max + 1, len(s))
    t2 = moments_of(mu.minus, k_max).array
    return [
        2 * k for k in range(k_max // 2 + 1)
        if t2[2 * k] > s.entries[2 * k] + slack * max(1.0, abs(s.entries[2 * k]))
    ]


def ejection_demo(seq: TruncatedMomentSequence, m: int, tol: float = DEFAULT_TOLERANCE) -> PositivityReport:
    """
    Set s_{2m} = 0 and classify H_0..H_m.

    For a positive definite input with s_{m+j} != 0 somewhere in the last
    row, H_m then has a negative minor: arbitrarily small perturbations leave
    the moment cone. Runs exactly when rationals are present.
    """
    if m < 0:
        raise InputError(f"m must be nonnegative, got {m}")
    required = 2 * m + 1
    if len(seq) < required:
        raise InsufficientMoments(required, len(seq))

    ejected = seq.head(required).with_entry(2 * m, 0)
    if ejected.has_exact(required):
        report = classify_exact(ejected, m)
    else:
        report = classify_positivity(ejected, m, tol)
    logger.info(f"Ejection at m={m}: {report.verdict.value} (failing order {report.failing_order})")
    return report


@dataclass(frozen=True)
class ZerothMomentFloor:
    order: int
    floor: float
    current: float

    @property
    def margin(self) -> float:
        return self.current - self.floor

    def to_dict(self) -> Dict:
        return {"order": self.order, "floor": self.floor, "current": self.current, "margin": self.margin}


def zeroth_moment_floor(seq: TruncatedMomentSequence, n: int) -> ZerothMomentFloor:
    """
    Smallest s_0 keeping H_n positive semidefinite with s_1..s_{2n} fixed.

    H_n = [[s_0, b^T], [b, A]] with A = (s_{i+j})_{1<=i,j<=n} positive
    definite; the floor is the Schur bound b^T A^{-1} b.
    """
    if n < 1:
        raise InputError(f"Order must be at least 1, got {n}")
    if len(seq) < 2 * n + 1:
        raise InsufficientMoments(2 * n + 1, len(seq))

    values = seq.array
    A = np.array([[values[i + j] for j in range(1, n + 1)] for i in range(1, n + 1)])
    b = values[1:n + 1]
    try:
        x = solve(A, b, assume_a="pos")
    except LinAlgError as e:
        raise RankDeficient(numerical_rank(A), n) from e
    return ZerothMomentFloor(n, float(b @ x), float(values[0]))
