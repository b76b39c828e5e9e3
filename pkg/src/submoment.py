"""Submoment sequences along arithmetic index maps."""

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as P

from src.exceptions import InputError, InsufficientMoments, OddOffset, TooFewEntries
from src.measures import AtomicMeasure
from src.sequences import TruncatedMomentSequence

logger = logging.getLogger(__name__)

ARITHMETIC = "arithmetic"
SHIFT = "shift"

DEFAULT_SCAN_BASES = (Fraction(2), Fraction(-2), Fraction(3), Fraction(-3), Fraction(1, 2), Fraction(-1, 2))


@dataclass(frozen=True)
class IndexMap:
    """
    Extraction map k -> k*d + offset (arithmetic) or k -> k + offset (shift).

    The offset must be even: a^offset >= 0 for every real a is what keeps
    the extracted sequence positive.
    """
    d: int = 1
    offset: int = 0
    kind: str = ARITHMETIC

    def __post_init__(self):
        if self.kind not in (ARITHMETIC, SHIFT):
            raise InputError(f"Index map kind must be '{ARITHMETIC}' or '{SHIFT}', got {self.kind!r}")
        if self.d < 0:
            raise InputError(f"Step d must be nonnegative, got {self.d}")
        if self.offset < 0 or self.offset % 2:
            raise OddOffset(self.offset)
        if self.kind == SHIFT and self.d != 1:
            object.__setattr__(self, "d", 1)

    @classmethod
    def shift(cls, offset: int) -> "IndexMap":
        return cls(1, offset, SHIFT)

    @classmethod
    def from_increment(cls, d: int, offset: int) -> "IndexMap":
        """Convert s~_k = s_{k + l_k} with l_k = k*d + offset into the step convention (step d+1)."""
        return cls(d + 1, offset, ARITHMETIC)

    @property
    def step(self) -> int:
        return 1 if self.kind == SHIFT else self.d

    def index(self, k: int) -> int:
        return k * self.step + self.offset

    def extracted_length(self, available: int) -> int:
        """Number of extracted entries a sequence with `available` entries supports."""
        if self.offset >= available:
            return 0
        if self.step == 0:
            return available
        return (available - 1 - self.offset) // self.step + 1


def extract_submoment(seq: TruncatedMomentSequence, index_map: IndexMap) -> TruncatedMomentSequence:
    """s~_k = s_{k*d + offset} for every k the input supports (at least 3)."""
    count = index_map.extracted_length(len(seq))
    if count < 3:
        raise InsufficientMoments(index_map.index(2) + 1, len(seq))

    indices = [index_map.index(k) for k in range(count)]
    exact = tuple(seq.exact[i] for i in indices) if seq.exact is not None else None
    logger.debug(f"Extracting {count} entries at step {index_map.step}, offset {index_map.offset}")
    return TruncatedMomentSequence(tuple(seq.entries[i] for i in indices), exact)


@dataclass(frozen=True)
class Admissibility:
    """Outcome of testing an index list l_0, l_1, ... against the arithmetic family."""
    admissible: bool
    d: Optional[int] = None
    offset: Optional[int] = None
    witness_kind: Optional[str] = None
    witness: Optional[Tuple[int, ...]] = None

    def index_map(self) -> IndexMap:
        if not self.admissible:
            raise InputError("Inadmissible index list has no index map")
        return IndexMap(self.d, self.offset)

    def to_dict(self) -> Dict:
        if self.admissible:
            return {"admissible": True, "d": self.d, "offset": self.offset}
        return {"admissible": False, "witness_kind": self.witness_kind, "witness": list(self.witness)}


def index_admissibility(indices: Sequence[int]) -> Admissibility:
    """
    Decide whether {a^{l_k}} is positive for every real a.

    That holds exactly for l_k = k*d + offset with d >= 0 and even offset.
    Only the given prefix is checked. Witnesses: ("odd_offset", (l_0,)),
    ("not_arithmetic", (i, i+1, i+2)) for the first triple with
    2*l_{i+1} != l_i + l_{i+2}, or ("negative_step", (0, 1)).
    """
    indices = [int(i) for i in indices]
    if len(indices) < 3:
        raise TooFewEntries(3, len(indices))
    if any(i < 0 for i in indices):
        raise InputError(f"Indices must be nonnegative, got {indices}")

    if indices[0] % 2:
        return Admissibility(False, witness_kind="odd_offset", witness=(indices[0],))
    for i in range(len(indices) - 2):
        if 2 * indices[i + 1] != indices[i] + indices[i + 2]:
            return Admissibility(False, witness_kind="not_arithmetic", witness=(i, i + 1, i + 2))
    d = indices[1] - indices[0]
    if d < 0:
        return Admissibility(False, witness_kind="negative_step", witness=(0, 1))
    return Admissibility(True, d=d, offset=indices[0])


@dataclass(frozen=True)
class MinorWitness:
    base: Fraction
    rows: Tuple[int, ...]
    minor: Fraction


def geometric_minor_scan(indices: Sequence[int],
                         bases: Iterable[Fraction] = DEFAULT_SCAN_BASES) -> Optional[MinorWitness]:
    """
    Brute-force check of u_k = a^{l_k}: first negative 1x1 or 2x2 principal
    Hankel minor over the given bases, computed exactly.
    """
    indices = [int(i) for i in indices]
    order = (len(indices) - 1) // 2
    for a in bases:
        a = Fraction(a)
        u = [a ** i for i in indices]
        for i in range(order + 1):
            if u[2 * i] < 0:
                return MinorWitness(a, (i,), u[2 * i])
        for i, j in itertools.combinations(range(order + 1), 2):
            minor = u[2 * i] * u[2 * j] - u[i + j] ** 2
            if minor < 0:
                return MinorWitness(a, (i, j), minor)
    return None


def general_shift_identity_check(sigma: AtomicMeasure, sigma_sub: AtomicMeasure, d: int, offset: int,
                                 poly: Sequence[float]) -> float:
    """|sum_i c_i P(p_i^d) p_i^offset - sum_j c~_j P(p~_j)| for coefficients low-to-high."""
    if d < 1:
        raise InputError(f"Step d must be a positive integer, got {d}")
    if offset < 0 or offset % 2:
        raise OddOffset(offset)
    coefficients = np.asarray(poly, dtype=float)
    if coefficients.size == 0:
        return 0.0

    nodes = np.asarray(sigma.nodes, dtype=float)
    lhs = float(np.sum(np.asarray(sigma.weights) * P.polyval(nodes ** d, coefficients) * nodes ** offset))
    rhs = float(np.sum(np.asarray(sigma_sub.weights) * P.polyval(np.asarray(sigma_sub.nodes), coefficients)))
    return abs(lhs - rhs)


def shift_identity_check(sigma: AtomicMeasure, sigma_sub: AtomicMeasure, offset: int,
                         poly: Sequence[float]) -> float:
    """Residual of  int P(x) x^offset dsigma = int P dsigma~."""
    return general_shift_identity_check(sigma, sigma_sub, 1, offset, poly)


def shift_identity_scale(sigma: AtomicMeasure, offset: int, poly: Sequence[float]) -> float:
    """max(1, sum_i c_i |P(p_i)| |p_i|^offset), the reference for shift-identity residuals."""
    nodes = np.asarray(sigma.nodes, dtype=float)
    values = np.abs(P.polyval(nodes, np.asarray(poly, dtype=float))) * np.abs(nodes) ** offset
    return max(1.0, float(np.sum(np.asarray(sigma.weights) * values)))


def composed_map(first: IndexMap, second: IndexMap) -> IndexMap:
    """Index map equivalent to extracting with `first` and then with `second`."""
    step = first.step * second.step
    offset = first.index(second.offset)
    return IndexMap(step, offset)


def admissible_maps(max_step: int, max_offset: int) -> List[IndexMap]:
    """All arithmetic maps with 1 <= d <= max_step and even offsets up to max_offset."""
    return [IndexMap(d, offset) for d in range(1, max_step + 1) for offset in range(0, max_offset + 1, 2)]
