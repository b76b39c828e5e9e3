import math

import numpy as np
import pytest

from src.exceptions import InputError, InsufficientMoments, NonPositiveTrajectory, OddOffset, TrajectoryTooShort
from src.measures import moments_of
from src.sequence_library import hilbert, stieltjes_wigert
from src.sequences import build_hankel
from src.spectral import (
    DeterminacyVerdict,
    determinacy_heuristic,
    eigenvalue_trajectory,
    interlacing_audit,
    symmetric_eigen,
)
from tests.conftest import spread_measure


def test_hilbert_first_order_closed_form(hilbert_seq):
    expected = (4 / 3 - math.sqrt(16 / 9 - 1 / 3)) / 2
    trajectory = eigenvalue_trajectory(hilbert_seq, 1)
    assert trajectory[0] == pytest.approx(1.0)
    assert abs(trajectory[1] - expected) <= 1e-10


def test_symmetric_eigen_is_ascending_and_orthonormal(hilbert_seq):
    eig = symmetric_eigen(build_hankel(hilbert_seq, 4))
    assert np.all(np.diff(eig.eigenvalues) >= 0)
    assert np.allclose(eig.eigenvectors.T @ eig.eigenvectors, np.eye(5), atol=1e-12)
    assert eig.residual < 1e-12


def test_symmetric_eigen_rejects_asymmetric():
    with pytest.raises(ValueError):
        symmetric_eigen(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_hilbert_trajectory_decays_and_suggests_determinate(hilbert_seq):
    trajectory = eigenvalue_trajectory(hilbert_seq, 6)
    assert trajectory[6] / trajectory[0] < 1e-7
    report = determinacy_heuristic(trajectory)
    assert report.verdict is DeterminacyVerdict.SUGGESTS_DETERMINATE
    assert report.fit_slope < -1.0


@pytest.mark.parametrize("order", [6, 8])
def test_stieltjes_wigert_is_not_called_determinate(order):
    sw = eigenvalue_trajectory(stieltjes_wigert(2 * order + 1, 0.9), order)
    hb = eigenvalue_trajectory(hilbert(2 * order + 1), order)
    assert all(v > 0 for v in sw)
    assert all(b <= a * (1 + 1e-9) for a, b in zip(sw, sw[1:]))

    sw_report = determinacy_heuristic(sw)
    hb_report = determinacy_heuristic(hb)
    assert abs(sw_report.fit_slope) < abs(hb_report.fit_slope)
    assert sw_report.verdict is not DeterminacyVerdict.SUGGESTS_DETERMINATE
    assert hb_report.verdict is DeterminacyVerdict.SUGGESTS_DETERMINATE


@pytest.mark.parametrize("factor", [0.25, 8.0, 1024.0])
@pytest.mark.parametrize("seq", [hilbert(13), stieltjes_wigert(13, 0.9)], ids=["hilbert", "stieltjes_wigert"])
def test_heuristic_ignores_positive_rescaling(seq, factor):
    base = determinacy_heuristic(eigenvalue_trajectory(seq, 6))
    rescaled = determinacy_heuristic(eigenvalue_trajectory(seq.scaled(factor), 6))
    assert rescaled.fit_slope == pytest.approx(base.fit_slope, abs=1e-6)
    assert rescaled.verdict is base.verdict


@pytest.mark.parametrize("trajectory, verdict", [
    ([1.0, 0.1, 0.01, 0.001], DeterminacyVerdict.SUGGESTS_DETERMINATE),
    ([1.0, 1.0, 1.0, 1.0], DeterminacyVerdict.SUGGESTS_INDETERMINATE),
    ([1.0, 0.7, 0.49, 0.343], DeterminacyVerdict.INCONCLUSIVE),
])
def test_heuristic_thresholds(trajectory, verdict):
    assert determinacy_heuristic(trajectory).verdict is verdict


def test_flat_trajectory_below_floor_is_inconclusive():
    report = determinacy_heuristic([1e-13] * 4)
    assert report.verdict is DeterminacyVerdict.INCONCLUSIVE


def test_heuristic_uses_trailing_window():
    report = determinacy_heuristic([1.0, 1e-3, 1e-3, 1e-3, 1e-3], window=4)
    assert report.fit_slope == pytest.approx(0.0, abs=1e-12)


def test_heuristic_errors():
    with pytest.raises(TrajectoryTooShort):
        determinacy_heuristic([1.0, 0.5], window=4)
    with pytest.raises(TrajectoryTooShort):
        determinacy_heuristic([1.0, 0.5, 0.25], window=1)
    with pytest.raises(NonPositiveTrajectory):
        determinacy_heuristic([1.0, 0.5, 0.0, 0.1])
    with pytest.raises(InputError):
        determinacy_heuristic([1.0, 0.5, 0.25, 0.125], slope_threshold=0.0)


def test_thread_pool_matches_serial(hilbert_seq):
    assert eigenvalue_trajectory(hilbert_seq, 6, max_workers=3) == eigenvalue_trajectory(hilbert_seq, 6)


def test_trajectory_needs_entries():
    with pytest.raises(InsufficientMoments):
        eigenvalue_trajectory(hilbert(6), 3)


class TestInterlacing:
    def test_even_hilbert_extraction_same_order(self, hilbert_seq):
        pairs = interlacing_audit(hilbert_seq, 2, 0, 2)
        assert pairs[2].smallest_sub == pytest.approx(0.00327, rel=0.1)
        assert pairs[2].same_order_holds

    @pytest.mark.parametrize("d, offset", [(1, 2), (2, 0), (2, 2), (3, 0)])
    def test_hilbert_enclosing_bound(self, hilbert_seq, d, offset):
        max_order = (len(hilbert_seq) - 1 - offset) // (2 * d)
        pairs = interlacing_audit(hilbert_seq, d, offset, max_order)
        assert all(p.holds for p in pairs)
        assert all(p.enclosing_order == n * d + offset // 2 for n, p in enumerate(pairs))

    def test_random_positive_sequences(self, rng):
        for _ in range(50):
            sigma = spread_measure(rng, int(rng.integers(2, 7)), -1.5, 1.5, 0.1)
            d = int(rng.integers(1, 4))
            offset = int(rng.choice([0, 2]))
            seq = moments_of(sigma, 2 * 3 * d + offset)
            pairs = interlacing_audit(seq, d, offset, 3)
            assert all(p.holds for p in pairs)

    def test_odd_offset_rejected(self, hilbert_seq):
        with pytest.raises(OddOffset):
            interlacing_audit(hilbert_seq, 2, 1, 2)
