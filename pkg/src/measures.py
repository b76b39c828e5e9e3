"""Finitely atomic measures: forward moments and recovery from moments."""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cholesky, eigh_tridiagonal, hankel, solve_triangular

from src.exceptions import (
    InputError,
    InsufficientMoments,
    InvalidMeasure,
    LengthMismatch,
    MomentOverflow,
    NotPositive,
    OddOffset,
    RankDeficient,
)
from src.sequences import DEFAULT_TOLERANCE, TruncatedMomentSequence, classify_positivity

logger = logging.getLogger(__name__)

DEFAULT_PIVOT_TOLERANCE = 1e-10
DEFAULT_DEDUP_TOLERANCE = 1e-9
DEFAULT_NEGATIVE_WEIGHT_TOLERANCE = 1e-12
DEFAULT_MOMENT_MATCH_TOLERANCE = 1e-8


@dataclass(frozen=True)
class AtomicMeasure:
    """sigma = sum_i c_i delta_{p_i} with c_i > 0, distinct nodes, ascending order."""
    nodes: Tuple[float, ...] = ()
    weights: Tuple[float, ...] = ()

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float).ravel()
        weights = np.asarray(self.weights, dtype=float).ravel()
        if nodes.size != weights.size:
            raise LengthMismatch(nodes.size, weights.size)
        if not (np.all(np.isfinite(nodes)) and np.all(np.isfinite(weights))):
            raise InvalidMeasure("Atom nodes and weights must be finite")
        if np.any(weights <= 0):
            raise InvalidMeasure(f"Atom weights must be positive, got {weights.tolist()}")
        order = np.argsort(nodes, kind="stable")
        nodes, weights = nodes[order], weights[order]
        if np.any(np.diff(nodes) == 0):
            raise InvalidMeasure(f"Atom nodes must be distinct, got {nodes.tolist()}")
        object.__setattr__(self, "nodes", tuple(float(x) for x in nodes))
        object.__setattr__(self, "weights", tuple(float(c) for c in weights))

    @classmethod
    def from_atoms(cls, atoms: Iterable[Tuple[float, float]]) -> "AtomicMeasure":
        atoms = list(atoms)
        return cls(tuple(p for p, _ in atoms), tuple(c for _, c in atoms))

    @classmethod
    def point_mass(cls, node: float, weight: float = 1.0) -> "AtomicMeasure":
        return cls((node,), (weight,))

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def atoms(self) -> List[Tuple[float, float]]:
        return list(zip(self.nodes, self.weights))

    @property
    def total_mass(self) -> float:
        return float(sum(self.weights))

    def scaled(self, factor: float) -> "AtomicMeasure":
        if factor < 0:
            raise InvalidMeasure(f"Cannot scale a positive measure by {factor}")
        if factor == 0:
            return AtomicMeasure()
        return AtomicMeasure(self.nodes, tuple(factor * c for c in self.weights))

    def to_dict(self) -> Dict:
        return {"atoms": [{"node": p, "weight": c} for p, c in self.atoms]}


@dataclass(frozen=True)
class SignedAtomicMeasure:
    """mu = mu_1 - mu_2 with both parts positive atomic measures."""
    plus: AtomicMeasure = field(default_factory=AtomicMeasure)
    minus: AtomicMeasure = field(default_factory=AtomicMeasure)

    def scaled(self, epsilon: float) -> "SignedAtomicMeasure":
        return SignedAtomicMeasure(self.plus.scaled(epsilon), self.minus.scaled(epsilon))

    def to_dict(self) -> Dict:
        return {"plus": self.plus.to_dict(), "minus": self.minus.to_dict()}


def merge_close_atoms(nodes: Sequence[float], weights: Sequence[float],
                      tol: float = DEFAULT_DEDUP_TOLERANCE) -> AtomicMeasure:
    """Merge nodes closer than tol*max(1,|node|) (weighted mean node, summed weight); drop empty atoms."""
    pairs = sorted((float(p), float(c)) for p, c in zip(nodes, weights))
    merged: List[List[float]] = []
    for node, weight in pairs:
        if merged and abs(node - merged[-1][0]) <= tol * max(1.0, abs(node)):
            total = merged[-1][1] + weight
            if total > 0:
                merged[-1][0] = (merged[-1][0] * merged[-1][1] + node * weight) / total
            merged[-1][1] = total
        else:
            merged.append([node, weight])
    kept = [(p, c) for p, c in merged if c > 0]
    if len(kept) < len(pairs):
        logger.debug(f"Merged/dropped {len(pairs) - len(kept)} atoms")
    return AtomicMeasure.from_atoms(kept)


def _power_sums(nodes: np.ndarray, weights: np.ndarray, k_max: int) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore"):
        table = np.power.outer(nodes, np.arange(k_max + 1)) * weights[:, None]
        sums = table.sum(axis=0)
    if not (np.all(np.isfinite(table)) and np.all(np.isfinite(sums))):
        raise MomentOverflow(k_max)
    return sums


def moments_of(measure: AtomicMeasure, k_max: int, exact: bool = False) -> TruncatedMomentSequence:
    """
    s_k = sum_i c_i p_i^k for k = 0..k_max.

    With exact=True the moments of the (binary-rational) float atoms are also
    carried as Fractions so the exact classifier can run on them.
    """
    if k_max < 0:
        raise InputError(f"k_max must be nonnegative, got {k_max}")
    if len(measure) == 0:
        zeros = [Fraction(0)] * (k_max + 1)
        return TruncatedMomentSequence.from_fractions(zeros)

    sums = _power_sums(np.asarray(measure.nodes), np.asarray(measure.weights), k_max)
    if not exact:
        return TruncatedMomentSequence(tuple(sums))

    rational_atoms = [(Fraction(p), Fraction(c)) for p, c in measure.atoms]
    rationals = [sum(c * p ** k for p, c in rational_atoms) for k in range(k_max + 1)]
    return TruncatedMomentSequence.from_fractions(rationals)


def generalized_moments(measure: AtomicMeasure, phi_at_nodes: Sequence[float],
                        k_max: int) -> TruncatedMomentSequence:
    """s_k = sum_i c_i phi(p_i)^k; positive for every real phi since f_k = phi^k is multiplicative."""
    phi = np.asarray(phi_at_nodes, dtype=float).ravel()
    if phi.size != len(measure):
        raise LengthMismatch(len(measure), phi.size)
    if not np.all(np.isfinite(phi)):
        raise InputError("Generator values must be finite")
    if k_max < 0:
        raise InputError(f"k_max must be nonnegative, got {k_max}")
    if len(measure) == 0:
        return TruncatedMomentSequence((0.0,) * (k_max + 1))
    return TruncatedMomentSequence(tuple(_power_sums(phi, np.asarray(measure.weights), k_max)))


def numerical_rank(gram: np.ndarray, pivot_tol: float = DEFAULT_PIVOT_TOLERANCE) -> int:
    """Number of leading Cholesky pivots r_jj^2 above pivot_tol * H_jj."""
    size = gram.shape[0]
    for j in range(1, size + 1):
        diagonal = gram[j - 1, j - 1]
        if diagonal <= 0:
            return j - 1
        try:
            R = cholesky(gram[:j, :j], lower=False)
        except LinAlgError:
            return j - 1
        if R[j - 1, j - 1] ** 2 <= pivot_tol * diagonal:
            return j - 1
    return size


def moment_residual(measure: AtomicMeasure, seq: TruncatedMomentSequence, count: int) -> float:
    """max_k |moment_k(measure) - s_k| over the first `count` entries."""
    if count > len(seq):
        raise InsufficientMoments(count, len(seq))
    forward = moments_of(measure, count - 1).array
    return float(np.max(np.abs(forward - seq.array[:count])))


def recover_atoms(seq: TruncatedMomentSequence, m: int,
                  tol: float = DEFAULT_TOLERANCE,
                  pivot_tol: float = DEFAULT_PIVOT_TOLERANCE,
                  dedup_tol: float = DEFAULT_DEDUP_TOLERANCE,
                  negative_weight_tol: float = DEFAULT_NEGATIVE_WEIGHT_TOLERANCE,
                  moment_tol: float = DEFAULT_MOMENT_MATCH_TOLERANCE) -> AtomicMeasure:
    """
    Recover the m-atom Gaussian quadrature measure matching s_0..s_{2m-1}.

    The Cholesky factor R of H_{m-1} (bordered by the column s_m..s_{2m-1})
    orthogonalizes the monomials; its entries give the three-term recurrence
    alpha_j = r_{j,j+1}/r_jj - r_{j-1,j}/r_{j-1,j-1}, b_j = r_{j+1,j+1}/r_jj.
    The eigenvalues of the Jacobi matrix are the nodes and s_0 times the
    squared first eigenvector components are the weights.

    Raises:
        NotPositive: If H_{m-1} is not positive semidefinite
        RankDeficient: If H_{m-1} has numerical rank r < m (retry with m = r)
    """
    if m < 1:
        raise InputError(f"Atom count must be positive, got {m}")
    if len(seq) < 2 * m:
        raise InsufficientMoments(2 * m, len(seq))

    report = classify_positivity(seq.head(2 * m - 1), m - 1, tol)
    if not report.is_positive:
        raise NotPositive(report)

    values = seq.array
    gram = hankel(values[:m], values[m - 1:2 * m - 1])
    rank = numerical_rank(gram, pivot_tol)
    if rank < m:
        raise RankDeficient(rank, m)

    R = cholesky(gram, lower=False)
    border = solve_triangular(R, values[m:2 * m], trans="T", lower=False)
    diagonal = np.diag(R)
    ratios = np.append(np.diag(R, 1), border[m - 1]) / diagonal
    alpha = ratios - np.concatenate(([0.0], ratios[:-1]))
    off_diagonal = diagonal[1:] / diagonal[:-1]

    if m == 1:
        nodes, first_components = alpha, np.ones(1)
    else:
        nodes, vectors = eigh_tridiagonal(alpha, off_diagonal)
        first_components = vectors[0, :]
    weights = values[0] * first_components ** 2
    logger.debug(f"Jacobi alpha={alpha.tolist()} b={off_diagonal.tolist()} nodes={nodes.tolist()}")

    floor = -negative_weight_tol * values[0]
    if np.any(weights < floor):
        raise NotPositive(message=f"Recovered negative weights {weights.tolist()}")
    measure = merge_close_atoms(nodes, np.clip(weights, 0.0, None), dedup_tol)

    scale = max(1.0, float(np.max(np.abs(values[:2 * m]))))
    residual = moment_residual(measure, seq, 2 * m)
    if residual > moment_tol * scale:
        logger.warning(f"Recovered atoms reproduce the first {2 * m} moments only to {residual:.3e}")
    return measure


def shifted_measure(measure: AtomicMeasure, offset: int) -> AtomicMeasure:
    """d nu = x^offset d sigma: atoms (p_i, c_i p_i^offset), atoms at 0 dropped when offset > 0."""
    if offset < 0 or offset % 2:
        raise OddOffset(offset)
    return pushforward_measure(measure, 1, offset)


def pushforward_measure(measure: AtomicMeasure, d: int, offset: int,
                        dedup_tol: float = DEFAULT_DEDUP_TOLERANCE) -> AtomicMeasure:
    """
    Measure with moments s~_k = s_{kd+offset}: atoms (p_i^d, c_i p_i^offset).

    Images colliding under x -> x^d (for even d, +p and -p) are merged.
    """
    if d < 1:
        raise InputError(f"Step d must be a positive integer, got {d}")
    if offset < 0 or offset % 2:
        raise OddOffset(offset)
    nodes = np.asarray(measure.nodes, dtype=float)
    weights = np.asarray(measure.weights, dtype=float) * nodes ** offset
    return merge_close_atoms(nodes ** d, weights, dedup_tol)
