from fractions import Fraction

import numpy as np
import pytest

from src.exceptions import AmbiguousMatch, InputError, MeasureMismatch, RankDeficient
from src.measures import AtomicMeasure, SignedAtomicMeasure, moments_of
from src.perturbation import (
    MissingNode,
    WeightViolation,
    check_domination,
    ejection_demo,
    even_moment_bound,
    perturb_and_classify,
    signed_moments,
    zeroth_moment_floor,
)
from src.sequence_library import hilbert
from src.sequences import TruncatedMomentSequence, Verdict, classify_positivity
from tests.conftest import spread_measure

DELTA_1 = AtomicMeasure.point_mass(1.0)


def signed(plus=(), minus=()):
    return SignedAtomicMeasure(AtomicMeasure.from_atoms(plus), AtomicMeasure.from_atoms(minus))


class TestDomination:
    def test_dominated(self):
        report = check_domination(DELTA_1, signed([(2.0, 1.0)], [(1.0, 0.5)]))
        assert report.dominated
        assert report.violations == ()
        assert report.epsilon_max == 1.0

    def test_weight_violation(self):
        report = check_domination(DELTA_1, signed(minus=[(1.0, 2.0)]))
        assert not report.dominated
        assert report.violations == (WeightViolation(1.0, 1.0, 2.0),)
        assert report.epsilon_max == pytest.approx(0.5)

    def test_missing_node(self):
        report = check_domination(DELTA_1, signed(minus=[(3.0, 0.1)]))
        assert report.violations == (MissingNode(3.0),)
        assert report.epsilon_max == 0.0
        assert report.to_dict()["violations"] == [{"kind": "missing_node", "node": 3.0}]

    def test_requests_on_one_node_add_up(self):
        report = check_domination(DELTA_1, signed(minus=[(1.0, 0.6), (1.0 + 5e-10, 0.6)]))
        assert not report.dominated
        assert report.violations[0].requested == pytest.approx(1.2)
        assert report.epsilon_max == pytest.approx(1 / 1.2)

    def test_ambiguous_match(self):
        sigma = AtomicMeasure((0.0, 5e-10), (1.0, 1.0))
        with pytest.raises(AmbiguousMatch):
            check_domination(sigma, signed(minus=[(2.5e-10, 0.1)]))

    def test_scaling_by_epsilon_max_dominates(self, rng):
        for _ in range(50):
            sigma = spread_measure(rng, int(rng.integers(1, 5)))
            factors = rng.uniform(1.1, 3.0, size=len(sigma))
            mu = signed(minus=[(p, c * f) for (p, c), f in zip(sigma.atoms, factors)])
            report = check_domination(sigma, mu)
            assert not report.dominated
            assert report.epsilon_max == pytest.approx(1 / factors.max())
            assert check_domination(sigma, mu.scaled(report.epsilon_max)).dominated

    @pytest.mark.parametrize("sigma_atoms, minus_atoms, epsilon_max", [
        ([(1.0, 1.0), (2.0, 0.5)], [(1.0, 2.0), (2.0, 0.25)], 0.5),
        ([(-1.0, 0.3), (0.5, 0.7)], [(-1.0, 0.9), (0.5, 1.4)], 1 / 3),
    ])
    def test_domination_boundary(self, sigma_atoms, minus_atoms, epsilon_max):
        sigma = AtomicMeasure.from_atoms(sigma_atoms)
        mu = signed(plus=[(3.0, 0.2)], minus=minus_atoms)
        report = check_domination(sigma, mu)
        assert report.epsilon_max == pytest.approx(epsilon_max)
        for epsilon in (0.0, epsilon_max / 2):
            assert check_domination(sigma, mu.scaled(epsilon)).dominated
        assert not check_domination(sigma, mu.scaled(min(1.0, 1.01 * epsilon_max))).dominated


class TestPerturbAndClassify:
    def test_dominated_example(self):
        mu = signed([(2.0, 1.0)], [(1.0, 0.5)])
        result = perturb_and_classify(moments_of(DELTA_1, 4), DELTA_1, mu, 4)
        assert list(result.perturbed.entries) == [1.5, 2.5, 4.5, 8.5, 16.5]
        assert result.positivity.is_positive
        assert result.domination.dominated

    def test_overdrawn_example(self):
        result = perturb_and_classify(moments_of(DELTA_1, 4), DELTA_1, signed(minus=[(1.0, 2.0)]), 4)
        assert result.perturbed.entries[0] == -1.0
        assert result.positivity.verdict is Verdict.NOT_POSITIVE
        assert result.domination.epsilon_max == pytest.approx(0.5)

    def test_missing_node_example(self):
        result = perturb_and_classify(moments_of(DELTA_1, 4), DELTA_1, signed(minus=[(3.0, 0.1)]), 4)
        assert result.positivity.verdict is Verdict.NOT_POSITIVE
        assert not result.domination.dominated

    def test_sigma_must_represent_sequence(self):
        with pytest.raises(MeasureMismatch):
            perturb_and_classify(hilbert(5), DELTA_1, signed(), 4)

    def test_random_dominated_perturbations_stay_positive(self, rng):
        for _ in range(100):
            sigma = spread_measure(rng, int(rng.integers(1, 6)))
            minus = [(p, c * rng.uniform(0.05, 1.0)) for p, c in sigma.atoms if rng.random() < 0.6]
            plus = [(float(x), float(w)) for x, w in zip(rng.uniform(-3, 3, size=2), rng.uniform(0.1, 1.0, size=2))]
            mu = signed(plus, minus)
            result = perturb_and_classify(moments_of(sigma, 8), sigma, mu, 8)
            assert result.domination.dominated
            assert result.positivity.is_positive
            assert even_moment_bound(moments_of(sigma, 8), mu, 8) == []

    def test_even_moment_bound_flags_overdrawn(self):
        assert even_moment_bound(moments_of(DELTA_1, 4), signed(minus=[(1.0, 2.0)]), 4) == [0, 2, 4]

    def test_signed_moments(self):
        t = signed_moments(signed([(2.0, 1.0)], [(1.0, 0.5)]), 3)
        assert list(t) == [0.5, 1.5, 3.5, 7.5]


class TestEjection:
    @pytest.mark.parametrize("m", [1, 2, 3, 4])
    def test_hilbert_leaves_the_cone(self, m):
        report = ejection_demo(hilbert(9), m)
        assert report.verdict is Verdict.NOT_POSITIVE
        assert report.failing_order == m
        assert report.mode == "exact"

    def test_first_witness(self):
        assert ejection_demo(hilbert(3), 1).witness == Fraction(-1, 4)

    def test_float_mode(self):
        report = ejection_demo(TruncatedMomentSequence(tuple(hilbert(9).entries)), 3)
        assert report.verdict is Verdict.NOT_POSITIVE
        assert report.failing_order == 3

    def test_point_mass_at_zero_stays_semidefinite(self):
        report = ejection_demo(TruncatedMomentSequence.from_fractions([1, 0, 0, 0, 0]), 2)
        assert report.verdict is Verdict.POSITIVE_SEMIDEFINITE

    def test_negative_m(self):
        with pytest.raises(InputError):
            ejection_demo(hilbert(3), -1)


class TestZerothMomentFloor:
    def test_hilbert_first_order(self):
        floor = zeroth_moment_floor(hilbert(3), 1)
        assert floor.floor == pytest.approx(0.75)
        assert floor.margin == pytest.approx(0.25)

    def test_floor_is_the_boundary(self):
        seq = TruncatedMomentSequence(tuple(hilbert(5).entries))
        floor = zeroth_moment_floor(seq, 2).floor
        assert classify_positivity(seq.with_entry(0, floor), 2).verdict is Verdict.POSITIVE_SEMIDEFINITE
        assert classify_positivity(seq.with_entry(0, floor - 1e-3), 2).verdict is Verdict.NOT_POSITIVE

    def test_singular_tail(self):
        with pytest.raises(RankDeficient):
            zeroth_moment_floor(TruncatedMomentSequence((1.0, 0.0, 0.0)), 1)
