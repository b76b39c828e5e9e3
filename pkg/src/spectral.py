"""Eigenvalue machinery for Hankel matrices.

Smallest eigenvalues of the nested matrices H_0, H_1, ... tend to zero
exactly when the moment problem is determinate; a finite trajectory can only
suggest an answer, and the verdict names say so.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.exceptions import (
    ConvergenceFailure,
    InputError,
    InsufficientMoments,
    NonFiniteEntry,
    NonPositiveTrajectory,
    OddOffset,
    TrajectoryTooShort,
)
from src.sequences import DEFAULT_TOLERANCE, HankelMatrix, TruncatedMomentSequence, build_hankel

logger = logging.getLogger(__name__)

RESIDUAL_FACTOR = 1e-12
DEFAULT_WINDOW = 4
DEFAULT_SLOPE_THRESHOLD = 2.0
DEFAULT_FLOOR = 1e-12


class DeterminacyVerdict(str, Enum):
    SUGGESTS_DETERMINATE = "suggests_determinate"
    SUGGESTS_INDETERMINATE = "suggests_indeterminate"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Ascending eigenvalues with aligned orthonormal eigenvector columns."""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual: float

    @property
    def smallest(self) -> float:
        return float(self.eigenvalues[0])


@dataclass(frozen=True)
class DeterminacyReport:
    trajectory: Tuple[float, ...]
    verdict: DeterminacyVerdict
    fit_slope: float
    window: int
    floor_used: float
    slope_threshold: float

    def to_dict(self) -> Dict:
        return {
            "trajectory": list(self.trajectory),
            "verdict": self.verdict.value,
            "fit_slope": self.fit_slope,
            "window": self.window,
            "floor": self.floor_used,
            "slope_threshold": self.slope_threshold,
        }


@dataclass(frozen=True)
class InterlacingPair:
    """Smallest eigenvalues of H_n, of the extracted H~_n and of the Hankel enclosing H~_n."""
    order: int
    smallest: float
    smallest_sub: float
    enclosing_order: int
    smallest_enclosing: float
    band: float

    @property
    def holds(self) -> bool:
        return self.smallest_sub >= self.smallest_enclosing - self.band

    @property
    def same_order_holds(self) -> bool:
        return self.smallest_sub >= self.smallest - self.band

    def to_dict(self) -> Dict:
        return {
            "order": self.order,
            "lambda": self.smallest,
            "lambda_sub": self.smallest_sub,
            "enclosing_order": self.enclosing_order,
            "lambda_enclosing": self.smallest_enclosing,
            "holds": self.holds,
            "same_order_holds": self.same_order_holds,
        }


def symmetric_eigen(H: Union[HankelMatrix, np.ndarray], order: Optional[int] = None) -> EigenDecomposition:
    """
    Full symmetric eigendecomposition via LAPACK (deterministic for identical input).

    Args:
        H: Hankel matrix or any symmetric array
        order: Hankel order, used only to tag errors

    Raises:
        NonFiniteEntry: If H has NaN/inf entries
        ConvergenceFailure: If LAPACK does not converge
    """
    data = H.data if isinstance(H, HankelMatrix) else np.asarray(H, dtype=float)
    bad = np.flatnonzero(~np.isfinite(data))
    if bad.size:
        raise NonFiniteEntry(int(bad[0]), float(data.flat[bad[0]]))
    if data.ndim != 2 or data.shape[0] != data.shape[1] or not np.allclose(data, data.T, rtol=0, atol=0):
        raise InputError("symmetric_eigen needs a square symmetric matrix")

    try:
        eigenvalues, eigenvectors = np.linalg.eigh(data)
    except np.linalg.LinAlgError as e:
        raise ConvergenceFailure(str(e), order=order) from e

    residual = float(np.max(np.linalg.norm(data @ eigenvectors - eigenvectors * eigenvalues, axis=0)))
    norm = float(np.max(np.abs(eigenvalues)))
    bound = RESIDUAL_FACTOR * norm * data.shape[0]
    if residual > bound:
        logger.warning(f"Eigen residual {residual:.3e} exceeds {bound:.3e} (order {order})")
    return EigenDecomposition(eigenvalues, eigenvectors, residual)


def eigenvalue_trajectory(seq: TruncatedMomentSequence, max_order: int,
                          max_workers: int = 1) -> Tuple[float, ...]:
    """
    Smallest eigenvalue of H_n for n = 0..N.

    Orders may be solved on a thread pool; the result is always ordered by n.
    """
    if len(seq) < 2 * max_order + 1:
        raise InsufficientMoments(2 * max_order + 1, len(seq))

    def smallest(n: int) -> float:
        return symmetric_eigen(build_hankel(seq, n), order=n).smallest

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            trajectory = tuple(pool.map(smallest, range(max_order + 1)))
    else:
        trajectory = tuple(smallest(n) for n in range(max_order + 1))

    for n in range(max_order):
        band = DEFAULT_TOLERANCE * build_hankel(seq, n + 1).scale
        if trajectory[n + 1] > trajectory[n] + band:
            logger.warning(f"Trajectory increases at order {n + 1}: {trajectory[n]:.6e} -> {trajectory[n + 1]:.6e}")
    logger.debug(f"trajectory: {trajectory}")
    return trajectory


def determinacy_heuristic(trajectory: Sequence[float], window: int = DEFAULT_WINDOW,
                          slope_threshold: float = DEFAULT_SLOPE_THRESHOLD,
                          floor: float = DEFAULT_FLOOR) -> DeterminacyReport:
    """
    Fit log(lambda_n) over the trailing window by least squares.

    slope < -threshold suggests determinate; slope >= -threshold/10 with the
    last value above `floor` suggests indeterminate; anything else is
    inconclusive.
    """
    values = np.asarray(trajectory, dtype=float)
    if window < 2 or len(values) < window:
        raise TrajectoryTooShort(len(values), window)
    if not slope_threshold > 0:
        raise InputError(f"slope_threshold must be positive, got {slope_threshold}")
    non_positive = np.flatnonzero(values <= 0)
    if non_positive.size:
        first = int(non_positive[0])
        raise NonPositiveTrajectory(first, float(values[first]))

    orders = np.arange(len(values))[-window:]
    slope = float(np.polyfit(orders, np.log(values[-window:]), 1)[0])

    if slope < -slope_threshold:
        verdict = DeterminacyVerdict.SUGGESTS_DETERMINATE
    elif slope >= -slope_threshold / 10 and values[-1] > floor:
        verdict = DeterminacyVerdict.SUGGESTS_INDETERMINATE
    else:
        verdict = DeterminacyVerdict.INCONCLUSIVE

    logger.info(f"Determinacy heuristic: slope={slope:.4f} -> {verdict.value}")
    return DeterminacyReport(tuple(float(v) for v in values), verdict, slope, window, floor, slope_threshold)


def interlacing_audit(seq: TruncatedMomentSequence, d: int, offset: int, max_order: int,
                      tol: float = DEFAULT_TOLERANCE) -> List[InterlacingPair]:
    """
    Compare smallest eigenvalues of H_n(s) and H_n(s~) for s~_k = s_{kd+offset}.

    H~_n sits inside H_{nd+offset/2} as the principal submatrix on rows
    id + offset/2, so Cauchy interlacing bounds lambda~_n below by the
    smallest eigenvalue of that enclosing matrix.
    """
    if d < 1:
        raise InputError(f"Step d must be a positive integer, got {d}")
    if offset < 0 or offset % 2:
        raise OddOffset(offset)
    required = 2 * max_order * d + offset + 1
    if len(seq) < required:
        raise InsufficientMoments(required, len(seq))

    exact = seq.exact[offset:required:d] if seq.exact is not None else None
    sub = TruncatedMomentSequence(seq.entries[offset:required:d], exact)

    top = max_order * d + offset // 2
    base = eigenvalue_trajectory(seq, top)
    extracted = eigenvalue_trajectory(sub, max_order)

    pairs = []
    for n in range(max_order + 1):
        enclosing = n * d + offset // 2
        band = tol * max(build_hankel(seq, max(n, enclosing)).scale, build_hankel(sub, n).scale)
        pair = InterlacingPair(n, base[n], extracted[n], enclosing, base[enclosing], band)
        if not pair.holds:
            logger.warning(f"Interlacing violated at order {n}: {pair}")
        pairs.append(pair)
    return pairs
