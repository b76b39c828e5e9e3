"""Moment sequences, Hankel matrices and positivity classification.

A real sequence s_0, s_1, ... is a Hamburger moment sequence exactly when
every Hankel matrix H_n = (s_{i+j}) is positive semidefinite. This module
houses the truncated and partial sequence types and classifies them in
floating-point (eigenvalue band) and exact-rational (fraction-free
elimination) arithmetic.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from types import MappingProxyType
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import hankel

from src.exceptions import (
    InputError,
    InsufficientMoments,
    LengthMismatch,
    MissingExactValues,
    NonFiniteEntry,
    OrderTooLarge,
)

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-10
DEFAULT_ENUMERATION_CAP = 12

Number = Union[int, float, Fraction]


class Verdict(str, Enum):
    """Positivity verdict of a (partial) sequence."""
    POSITIVE_DEFINITE = "positive_definite"
    POSITIVE_SEMIDEFINITE = "positive_semidefinite"
    NOT_POSITIVE = "not_positive"


def _as_finite_float(index: int, value) -> float:
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise NonFiniteEntry(index, value)
    if not math.isfinite(number):
        raise NonFiniteEntry(index, value)
    return number


@dataclass(frozen=True)
class TruncatedMomentSequence:
    """Finite candidate moment sequence s_0..s_m with optional exact rationals."""
    entries: Tuple[float, ...]
    exact: Optional[Tuple[Fraction, ...]] = None

    def __post_init__(self):
        entries = tuple(_as_finite_float(k, v) for k, v in enumerate(self.entries))
        if not entries:
            raise InputError("A moment sequence needs at least one entry")
        object.__setattr__(self, "entries", entries)

        if self.exact is not None:
            exact = tuple(Fraction(v) for v in self.exact)
            if len(exact) != len(entries):
                raise LengthMismatch(len(entries), len(exact))
            for k, (value, rational) in enumerate(zip(entries, exact)):
                if not math.isclose(float(rational), value, rel_tol=1e-12, abs_tol=1e-300):
                    raise InputError(f"Exact entry {k} ({rational}) does not round to {value!r}")
            object.__setattr__(self, "exact", exact)

    @classmethod
    def from_floats(cls, values: Sequence[float]) -> "TruncatedMomentSequence":
        return cls(tuple(values))

    @classmethod
    def from_fractions(cls, values: Sequence[Number]) -> "TruncatedMomentSequence":
        """Build a sequence whose float entries are the roundings of exact rationals."""
        exact = tuple(Fraction(v) for v in values)
        return cls(tuple(float(v) for v in exact), exact)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.entries, dtype=float)

    def has_exact(self, count: Optional[int] = None) -> bool:
        if self.exact is None:
            return False
        return count is None or len(self.exact) >= count

    def head(self, count: int) -> "TruncatedMomentSequence":
        """First `count` entries."""
        if count > len(self):
            raise InsufficientMoments(count, len(self))
        exact = self.exact[:count] if self.exact is not None else None
        return TruncatedMomentSequence(self.entries[:count], exact)

    def with_entry(self, index: int, value: Number) -> "TruncatedMomentSequence":
        """Copy with entry `index` replaced; the exact track follows when present."""
        if not 0 <= index < len(self):
            raise InsufficientMoments(index + 1, len(self))
        entries = list(self.entries)
        entries[index] = float(value)
        exact = None
        if self.exact is not None:
            exact = list(self.exact)
            exact[index] = Fraction(value)
        return TruncatedMomentSequence(tuple(entries), tuple(exact) if exact is not None else None)

    def scaled(self, factor: Number) -> "TruncatedMomentSequence":
        entries = tuple(float(factor) * v for v in self.entries)
        exact = None
        if self.exact is not None and not isinstance(factor, float):
            exact = tuple(Fraction(factor) * v for v in self.exact)
        return TruncatedMomentSequence(entries, exact)

    def max_order(self) -> int:
        """Largest n for which H_n is available."""
        return (len(self) - 1) // 2


@dataclass(frozen=True, eq=False)
class HankelMatrix:
    """Symmetric matrix H_n with H[i][j] = s_{i+j}; `size` is n + 1."""
    size: int
    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=float)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n(self) -> int:
        return self.size - 1

    @property
    def scale(self) -> float:
        """max(1, largest absolute entry); the reference for tolerance bands."""
        return max(1.0, float(np.max(np.abs(self.data))))


@dataclass(frozen=True)
class PartialMomentSequence:
    """Sequence with unspecified entries: index -> value plus a horizon."""
    specified: Mapping[int, float]
    horizon: Optional[int] = None

    def __post_init__(self):
        if not self.specified:
            raise InputError("A partial sequence needs at least one specified entry")
        cleaned: Dict[int, float] = {}
        for key, value in self.specified.items():
            index = int(key)
            if index < 0:
                raise InputError(f"Negative index {index} in partial sequence")
            cleaned[index] = _as_finite_float(index, value)
        top = max(cleaned)
        horizon = top if self.horizon is None else int(self.horizon)
        if horizon < top:
            raise InputError(f"Horizon {horizon} is below the largest specified index {top}")
        object.__setattr__(self, "specified", MappingProxyType(dict(sorted(cleaned.items()))))
        object.__setattr__(self, "horizon", horizon)

    @property
    def pattern(self) -> frozenset:
        return frozenset(self.specified)

    def sorted_pattern(self) -> List[int]:
        return sorted(self.specified)


@dataclass(frozen=True)
class PositivityReport:
    """Classification verdict plus the evidence behind it."""
    verdict: Verdict
    tolerance_used: float
    mode: str
    max_order: int
    failing_order: Optional[int] = None
    witness: Optional[Union[float, Fraction]] = None
    witness_kind: Optional[str] = None
    witness_minor: Optional[float] = None
    failing_subset: Optional[Tuple[int, ...]] = None
    smallest_eigenvalues: Tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.verdict is Verdict.NOT_POSITIVE:
            if self.failing_order is None or self.witness is None:
                raise ValueError("not_positive report needs failing_order and witness")
            if self.mode == "exact" and not self.witness < 0:
                raise ValueError("exact witness minor must be negative")

    @property
    def is_positive(self) -> bool:
        return self.verdict is not Verdict.NOT_POSITIVE

    @property
    def is_definite(self) -> bool:
        return self.verdict is Verdict.POSITIVE_DEFINITE

    def to_dict(self) -> Dict:
        return {
            "verdict": self.verdict.value,
            "mode": self.mode,
            "max_order": self.max_order,
            "tolerance_used": self.tolerance_used,
            "failing_order": self.failing_order,
            "witness": self.witness,
            "witness_kind": self.witness_kind,
            "witness_minor": self.witness_minor,
            "failing_subset": list(self.failing_subset) if self.failing_subset is not None else None,
            "smallest_eigenvalues": list(self.smallest_eigenvalues),
        }


def _require_entries(seq: TruncatedMomentSequence, required: int):
    if len(seq) < required:
        raise InsufficientMoments(required, len(seq))


def build_hankel(seq: TruncatedMomentSequence, n: int) -> HankelMatrix:
    """Return H_n = (s_{i+j})_{0<=i,j<=n}; needs 2n+1 entries, never pads."""
    if n < 0:
        raise InputError(f"Hankel order must be nonnegative, got {n}")
    _require_entries(seq, 2 * n + 1)
    values = seq.array
    return HankelMatrix(n + 1, hankel(values[:n + 1], values[n:2 * n + 1]))


def exact_hankel(values: Sequence[Fraction], n: int) -> List[List[Fraction]]:
    if len(values) < 2 * n + 1:
        raise InsufficientMoments(2 * n + 1, len(values))
    return [[values[i + j] for j in range(n + 1)] for i in range(n + 1)]


def _band(matrix: np.ndarray, tol: float) -> float:
    return tol * max(1.0, float(np.max(np.abs(matrix))))


def classify_positivity(seq: TruncatedMomentSequence, max_order: int,
                        tol: float = DEFAULT_TOLERANCE) -> PositivityReport:
    """
    Classify s_0..s_{2N} by the smallest eigenvalue of every H_k, k <= N.

    Positive definite iff lambda_min(H_k) > tol*scale_k for all k; not
    positive iff some lambda_min(H_k) < -tol*scale_k (smallest such k is
    reported); positive semidefinite otherwise.
    """
    if tol <= 0:
        raise InputError(f"Tolerance must be positive, got {tol}")
    if max_order < 0:
        raise InputError(f"max_order must be nonnegative, got {max_order}")
    _require_entries(seq, 2 * max_order + 1)

    semidefinite = False
    lambdas: List[float] = []
    for k in range(max_order + 1):
        H = build_hankel(seq, k).data
        band = _band(H, tol)
        lam = float(np.linalg.eigvalsh(H)[0])
        lambdas.append(lam)
        logger.debug(f"order {k}: lambda_min={lam:.6e} band={band:.3e}")
        if lam < -band:
            return PositivityReport(
                verdict=Verdict.NOT_POSITIVE,
                tolerance_used=tol,
                mode="float",
                max_order=max_order,
                failing_order=k,
                witness=lam,
                witness_kind="smallest_eigenvalue",
                witness_minor=float(np.linalg.det(H)),
                smallest_eigenvalues=tuple(lambdas),
            )
        if lam <= band:
            semidefinite = True

    verdict = Verdict.POSITIVE_SEMIDEFINITE if semidefinite else Verdict.POSITIVE_DEFINITE
    return PositivityReport(verdict, tol, "float", max_order, smallest_eigenvalues=tuple(lambdas))


@dataclass(frozen=True)
class ExactInertia:
    """Outcome of exact PSD testing of a symmetric rational matrix."""
    size: int
    rank: int
    negative_minor: Optional[Fraction] = None
    witness_rows: Optional[Tuple[int, ...]] = None

    @property
    def is_psd(self) -> bool:
        return self.negative_minor is None

    @property
    def is_pd(self) -> bool:
        return self.is_psd and self.rank == self.size


def exact_inertia(matrix: Sequence[Sequence[Number]]) -> ExactInertia:
    """
    Decide positive (semi)definiteness of a symmetric rational matrix exactly.

    Denominators are cleared by a positive common multiple, then symmetric
    fraction-free (Bareiss) elimination runs with diagonal pivots. After
    eliminating the index set I, entry (i, j) equals the bordered minor
    det A[I+{i}, I+{j}], so a negative diagonal is itself a negative
    principal minor. When every remaining diagonal is zero but an
    off-diagonal entry is not, the 2x2 border gives a negative minor too.
    With leading positive pivots the pivots are exactly the leading
    principal minors.
    """
    size = len(matrix)
    rationals = [[Fraction(v) for v in row] for row in matrix]
    common = math.lcm(*(v.denominator for row in rationals for v in row)) if size else 1
    a = [[int(v * common) for v in row] for row in rationals]

    def negative(scaled_minor: Fraction, rows: List[int]) -> ExactInertia:
        minor = Fraction(scaled_minor) / Fraction(common) ** len(rows)
        return ExactInertia(size, len(pivots), minor, tuple(sorted(rows)))

    active = list(range(size))
    pivots: List[int] = []
    previous = 1
    while active:
        for i in active:
            if a[i][i] < 0:
                return negative(Fraction(a[i][i]), pivots + [i])

        pivot = next((i for i in active if a[i][i] > 0), None)
        if pivot is None:
            for i, j in itertools.combinations(active, 2):
                if a[i][j] != 0:
                    return negative(Fraction(-a[i][j] * a[i][j], previous), pivots + [i, j])
            break

        active.remove(pivot)
        p = a[pivot][pivot]
        for i in active:
            for j in active:
                a[i][j] = (p * a[i][j] - a[i][pivot] * a[pivot][j]) // previous
        previous = p
        pivots.append(pivot)

    return ExactInertia(size, len(pivots))


def classify_exact(seq: TruncatedMomentSequence, max_order: int) -> PositivityReport:
    """Exact-rational classification of H_0..H_N; no tolerance involved."""
    required = 2 * max_order + 1
    _require_entries(seq, required)
    if not seq.has_exact(required):
        raise MissingExactValues(required, 0 if seq.exact is None else len(seq.exact))

    semidefinite = False
    for k in range(max_order + 1):
        inertia = exact_inertia(exact_hankel(seq.exact, k))
        if not inertia.is_psd:
            logger.debug(f"exact: order {k} has negative minor {inertia.negative_minor} "
                         f"on rows {inertia.witness_rows}")
            return PositivityReport(
                verdict=Verdict.NOT_POSITIVE,
                tolerance_used=0.0,
                mode="exact",
                max_order=max_order,
                failing_order=k,
                witness=inertia.negative_minor,
                witness_kind="principal_minor",
                failing_subset=inertia.witness_rows,
            )
        if inertia.rank < k + 1:
            semidefinite = True

    verdict = Verdict.POSITIVE_SEMIDEFINITE if semidefinite else Verdict.POSITIVE_DEFINITE
    return PositivityReport(verdict, 0.0, "exact", max_order)


def fully_specified_subsets(pattern: frozenset, max_order: int):
    """Yield index sets I within {0..n} whose principal block of H_n is fully specified."""
    for size in range(1, max_order + 2):
        for subset in itertools.combinations(range(max_order + 1), size):
            if all(i + j in pattern for i, j in itertools.combinations_with_replacement(subset, 2)):
                yield subset


def validate_partial(pseq: PartialMomentSequence, max_order: int,
                     tol: float = DEFAULT_TOLERANCE,
                     enumeration_cap: int = DEFAULT_ENUMERATION_CAP) -> PositivityReport:
    """
    Check every fully specified principal submatrix of H_n.

    The first failing subset (by size, then lexicographic) is the witness.
    Enumeration is exponential in n, hence the cap.
    """
    if max_order > enumeration_cap:
        raise OrderTooLarge(max_order, enumeration_cap)
    if pseq.horizon < 2 * max_order:
        raise InsufficientMoments(2 * max_order + 1, pseq.horizon + 1, what="positions within the horizon")

    semidefinite = False
    checked = 0
    for subset in fully_specified_subsets(pseq.pattern, max_order):
        block = np.array([[pseq.specified[i + j] for j in subset] for i in subset])
        band = _band(block, tol)
        lam = float(np.linalg.eigvalsh(block)[0])
        checked += 1
        if lam < -band:
            logger.debug(f"partial: subset {subset} fails with lambda_min={lam:.6e}")
            return PositivityReport(
                verdict=Verdict.NOT_POSITIVE,
                tolerance_used=tol,
                mode="float",
                max_order=max_order,
                failing_order=max(subset),
                witness=lam,
                witness_kind="smallest_eigenvalue",
                witness_minor=float(np.linalg.det(block)),
                failing_subset=subset,
            )
        if lam <= band:
            semidefinite = True

    if checked == 0:
        logger.warning(f"No fully specified principal submatrix up to order {max_order}")
    logger.info(f"Validated {checked} fully specified principal submatrices")
    verdict = Verdict.POSITIVE_SEMIDEFINITE if semidefinite else Verdict.POSITIVE_DEFINITE
    return PositivityReport(verdict, tol, "float", max_order)
