import dataclasses
from fractions import Fraction

import numpy as np
import pytest

from src.completion import (
    DEFINITE,
    SEMIDEFINITE,
    complete_arithmetic,
    default_horizon,
    detect_pattern,
    verify_completion,
)
from src.exceptions import (
    EvenStepNegativeNode,
    InputError,
    SubsequenceNotPositive,
    TooFewEntries,
    ZeroNodeWithOffset,
)
from src.measures import AtomicMeasure, moments_of
from src.sequences import PartialMomentSequence
from tests.conftest import spread_measure


def partial_from(values, d=1, offset=0, horizon=None):
    return PartialMomentSequence({k * d + offset: float(v) for k, v in enumerate(values)}, horizon=horizon)


class TestDetectPattern:
    def test_even_pattern(self):
        desc = detect_pattern(partial_from([1, 0.5, 1 / 3], d=2))
        assert (desc.kind, desc.d, desc.offset, desc.count) == ("arithmetic", 2, 0, 3)
        assert desc.indices() == [0, 2, 4]

    @pytest.mark.parametrize("indices", [[1, 2, 3], [0, 2, 6], [0, 3, 5, 9]])
    def test_other_patterns(self, indices):
        desc = detect_pattern(PartialMomentSequence({i: 1.0 for i in indices}))
        assert not desc.is_arithmetic

    def test_needs_three_entries(self):
        with pytest.raises(TooFewEntries):
            detect_pattern(PartialMomentSequence({0: 1.0, 2: 0.5}))

    def test_default_horizon(self):
        assert default_horizon(partial_from([1, 0.5, 1 / 3], d=2)) == 10


class TestCompleteArithmetic:
    def test_even_pattern_extends_to_two_atoms(self):
        pseq = partial_from([1, 0.5, 1 / 3], d=2)
        result = complete_arithmetic(pseq)
        assert len(result.measure) == 2
        assert all(p >= 0 for p in result.measure.nodes)
        assert result.definiteness == SEMIDEFINITE
        assert result.residual <= 1e-9
        audit = verify_completion(pseq, result)
        assert audit.passed, audit.failures

    @pytest.mark.parametrize("horizon", [8, 10])
    def test_squared_point_mass(self, horizon):
        pseq = partial_from([4.0 ** k for k in range(5)], d=2)
        result = complete_arithmetic(pseq, horizon=horizon)
        assert result.measure.nodes == pytest.approx((2.0,))
        assert np.allclose(result.completed.array, [2.0 ** j for j in range(horizon + 1)], rtol=1e-9)
        assert len(result.completed) == horizon + 1

    @pytest.mark.parametrize("d", [2, 3])
    @pytest.mark.parametrize("nodes", [(0.7, 0.775, 1.237), (0.3, 1.0, 1.8)])
    def test_odd_count_keeps_nodes_near_the_data(self, d, nodes):
        sigma = AtomicMeasure(nodes, (0.3, 0.4, 0.3))
        true_moments = moments_of(sigma, 4 * d)
        pseq = PartialMomentSequence({k * d: true_moments.entries[k * d] for k in range(5)})
        result = complete_arithmetic(pseq)
        assert len(result.measure) == 3
        assert max(abs(p) for p in result.measure.nodes) <= 2 * max(nodes)
        assert min(result.measure.weights) > 1e-6
        assert result.residual <= 1e-9 * max(true_moments.entries)
        audit = verify_completion(pseq, result)
        assert audit.passed, audit.failures
        assert audit.checks["definite_through_atom_count"]

    def test_full_pattern_of_hilbert(self):
        pseq = partial_from([Fraction(1, k + 1) for k in range(5)])
        result = complete_arithmetic(pseq)
        assert result.horizon == 10
        assert len(result.measure) == 3
        assert [result.completed.entries[i] for i in range(5)] == [1 / (k + 1) for k in range(5)]
        assert verify_completion(pseq, result).passed

    def test_full_pattern_to_its_own_horizon_is_definite(self):
        pseq = partial_from([Fraction(1, k + 1) for k in range(5)])
        result = complete_arithmetic(pseq, horizon=4)
        assert result.definiteness == DEFINITE
        audit = verify_completion(pseq, result)
        assert audit.passed
        assert audit.positivity.is_definite

    def test_lebesgue_even_moments(self):
        pseq = PartialMomentSequence({2 * k: 1 / (2 * k + 1) for k in range(6)})
        result = complete_arithmetic(pseq)
        assert len(result.measure) == 3
        assert all(0 < p < 1 for p in result.measure.nodes)
        audit = verify_completion(pseq, result)
        assert audit.passed, audit.failures

    def test_positive_offset_is_semidefinite(self):
        pseq = partial_from([1, 0.5, 1 / 3], d=2, offset=2)
        result = complete_arithmetic(pseq)
        assert result.definiteness == SEMIDEFINITE
        assert result.completed.entries[2] == 1.0
        audit = verify_completion(pseq, result)
        assert audit.passed, audit.failures
        assert "definite_through_atom_count" not in audit.checks

    def test_random_roundtrips(self, rng):
        for _ in range(50):
            atoms = int(rng.integers(2, 4))
            d = int(rng.choice([2, 3]))
            offset = int(rng.choice([0, 2]))
            sigma = spread_measure(rng, atoms, 0.5, 2.0, 0.1)
            true_moments = moments_of(sigma, (2 * atoms - 1) * d + offset + 4)
            pseq = PartialMomentSequence(
                {k * d + offset: true_moments.entries[k * d + offset] for k in range(2 * atoms)},
                horizon=len(true_moments) - 1,
            )
            result = complete_arithmetic(pseq, horizon=len(true_moments) - 1)
            assert len(result.measure) == atoms
            assert np.allclose(result.measure.nodes, sigma.nodes, rtol=1e-6)
            assert np.allclose(result.completed.array, true_moments.array, rtol=1e-6)
            assert verify_completion(pseq, result).passed

    def test_odd_step_keeps_signed_nodes(self, rng):
        for _ in range(20):
            sigma = spread_measure(rng, 3, -1.5, 1.5, 0.1)
            true_moments = moments_of(sigma, 18)
            pseq = PartialMomentSequence({3 * k: true_moments.entries[3 * k] for k in range(6)})
            result = complete_arithmetic(pseq, horizon=18)
            assert np.allclose(result.measure.nodes, sigma.nodes, atol=1e-6)
            deviation = np.max(np.abs(result.completed.array - true_moments.array))
            assert deviation <= 1e-6 * np.max(np.abs(true_moments.array))


class TestCompletionErrors:
    def test_even_step_negative_node(self):
        with pytest.raises(EvenStepNegativeNode):
            complete_arithmetic(partial_from([1, -1, 1, -1], d=2))

    def test_zero_node_with_offset(self):
        with pytest.raises(ZeroNodeWithOffset):
            complete_arithmetic(partial_from([1, 0, 0, 0], d=2, offset=2))

    def test_subsequence_not_positive(self):
        with pytest.raises(SubsequenceNotPositive):
            complete_arithmetic(partial_from([1, 2, 1]))

    def test_other_pattern_rejected(self):
        with pytest.raises(InputError):
            complete_arithmetic(PartialMomentSequence({0: 1.0, 2: 0.5, 6: 0.2}))

    def test_horizon_below_pattern(self):
        with pytest.raises(InputError):
            complete_arithmetic(partial_from([1, 0.5, 1 / 3], d=2), horizon=3)


class TestVerifyCompletion:
    @pytest.fixture
    def completed(self):
        pseq = partial_from([1, 0.5, 1 / 3], d=2)
        return pseq, complete_arithmetic(pseq)

    def test_perturbed_entry_is_flagged(self, completed):
        pseq, result = completed
        tampered = dataclasses.replace(result, completed=result.completed.with_entry(2, 0.5 + 1e-6))
        audit = verify_completion(pseq, tampered)
        assert not audit.passed
        assert audit.checks["specified_entries"] is False

    def test_zeroed_entry_breaks_positivity(self, completed):
        pseq, result = completed
        tampered = dataclasses.replace(result, completed=result.completed.with_entry(4, 0.0))
        audit = verify_completion(pseq, tampered)
        assert audit.checks["specified_entries"] is False
        assert audit.checks["positivity"] is False
        assert audit.to_dict()["passed"] is False

    def test_measure_must_reproduce_entries(self, completed):
        pseq, result = completed
        assert verify_completion(pseq, result).checks["measure_reproduces_entries"]
        tampered = dataclasses.replace(result, measure=AtomicMeasure((0.5,), (1.0,)))
        audit = verify_completion(pseq, tampered)
        assert audit.checks["specified_entries"]
        assert audit.checks["measure_reproduces_entries"] is False
        assert not audit.passed

    def test_result_dict(self, completed):
        _, result = completed
        data = result.to_dict()
        assert data["pattern"] == {"kind": "arithmetic", "d": 2, "offset": 0, "count": 3}
        assert len(data["completed"]) == 11
        assert len(data["measure"]["atoms"]) == 2
