from fractions import Fraction

import numpy as np
import pytest

from src.exceptions import InsufficientMoments, InputError, OddOffset, TooFewEntries
from src.measures import AtomicMeasure, moments_of, recover_atoms, shifted_measure
from src.sequence_library import hilbert
from src.sequences import classify_positivity
from src.submoment import (
    IndexMap,
    admissible_maps,
    composed_map,
    extract_submoment,
    general_shift_identity_check,
    geometric_minor_scan,
    index_admissibility,
    shift_identity_check,
    shift_identity_scale,
)
from tests.conftest import spread_measure


class TestIndexMap:
    def test_even_extraction_of_hilbert(self):
        sub = extract_submoment(hilbert(9), IndexMap(2, 0))
        assert sub.exact == tuple(Fraction(1, 2 * k + 1) for k in range(5))

    def test_shift_extraction(self):
        sub = extract_submoment(hilbert(9), IndexMap.shift(2))
        assert len(sub) == 7
        assert sub.exact[0] == Fraction(1, 3)

    def test_identity_map(self, hilbert_seq):
        assert extract_submoment(hilbert_seq, IndexMap()).entries == hilbert_seq.entries

    def test_zero_step_is_constant(self):
        sub = extract_submoment(hilbert(5), IndexMap(0, 2))
        assert set(sub.exact) == {Fraction(1, 3)}
        assert len(sub) == 5

    def test_increment_convention(self):
        assert IndexMap.from_increment(1, 2) == IndexMap(2, 2)

    def test_shift_forces_unit_step(self):
        assert IndexMap(5, 2, "shift").step == 1

    def test_odd_offset_rejected(self):
        with pytest.raises(OddOffset):
            IndexMap(2, 1)

    def test_bad_kind_rejected(self):
        with pytest.raises(InputError):
            IndexMap(2, 0, "geometric")

    def test_too_short_for_three_entries(self):
        with pytest.raises(InsufficientMoments):
            extract_submoment(hilbert(4), IndexMap(2, 0))

    def test_composition(self):
        seq = hilbert(40)
        first, second = IndexMap(2, 2), IndexMap(3, 2)
        twice = extract_submoment(extract_submoment(seq, first), second)
        once = extract_submoment(seq, composed_map(first, second))
        assert composed_map(first, second) == IndexMap(6, 6)
        assert twice.exact == once.exact

    def test_admissible_maps(self):
        maps = admissible_maps(2, 4)
        assert len(maps) == 6
        assert all(m.offset % 2 == 0 and m.d >= 1 for m in maps)


class TestAdmissibility:
    @pytest.mark.parametrize("indices, d, offset", [
        ([0, 3, 6, 9], 3, 0),
        ([2, 3, 4, 5], 1, 2),
        ([4, 4, 4], 0, 4),
    ])
    def test_admissible(self, indices, d, offset):
        result = index_admissibility(indices)
        assert result.admissible
        assert (result.d, result.offset) == (d, offset)
        assert result.index_map() == IndexMap(d, offset)

    @pytest.mark.parametrize("indices, kind, witness", [
        ([1, 2, 3], "odd_offset", (1,)),
        ([0, 2, 6], "not_arithmetic", (0, 1, 2)),
        ([0, 2, 4, 6, 9], "not_arithmetic", (2, 3, 4)),
        ([6, 4, 2], "negative_step", (0, 1)),
    ])
    def test_inadmissible(self, indices, kind, witness):
        result = index_admissibility(indices)
        assert not result.admissible
        assert result.witness_kind == kind
        assert result.witness == witness
        with pytest.raises(InputError):
            result.index_map()

    def test_needs_three_entries(self):
        with pytest.raises(TooFewEntries):
            index_admissibility([0, 2])

    @pytest.mark.parametrize("indices", [[1, 2, 3], [0, 2, 6], [0, 1, 3], [2, 3, 5], [0, 2, 4, 6, 9], [0, 4, 6]])
    def test_inadmissible_lists_have_negative_minor(self, indices):
        assert not index_admissibility(indices).admissible
        witness = geometric_minor_scan(indices)
        assert witness is not None
        assert witness.minor < 0

    def test_admissible_list_has_no_negative_minor(self):
        assert geometric_minor_scan([0, 3, 6, 9, 12]) is None

    def test_dict_form(self):
        assert index_admissibility([0, 2, 6]).to_dict() == {
            "admissible": False, "witness_kind": "not_arithmetic", "witness": [0, 1, 2],
        }


class TestShiftIdentity:
    def test_shifted_atoms(self):
        sigma = AtomicMeasure((-1.0, 2.0), (0.5, 0.25))
        sigma_sub = shifted_measure(sigma, 2)
        assert sigma_sub.atoms == [(-1.0, 0.5), (2.0, 1.0)]
        assert shift_identity_check(sigma, sigma_sub, 2, [1.0, -2.0, 0.5]) == pytest.approx(0.0, abs=1e-14)

    def test_general_identity_for_pushforward(self):
        sigma = AtomicMeasure((-1.0, 0.5, 2.0), (0.3, 0.5, 0.2))
        sub = moments_of(sigma, 12)
        # nu with moments s_{2k+2}
        nodes = np.asarray(sigma.nodes)
        nu = AtomicMeasure.from_atoms(zip(nodes ** 2, np.asarray(sigma.weights) * nodes ** 2))
        assert np.allclose(moments_of(nu, 4).array, [sub.entries[2 * k + 2] for k in range(5)])
        assert general_shift_identity_check(sigma, nu, 2, 2, [0.0, 1.0, 1.0]) < 1e-12

    def test_recovered_shift_measure_satisfies_identity(self, rng):
        for _ in range(20):
            sigma = spread_measure(rng, 3, 0.5, 2.5, 0.1)
            offset = int(rng.choice([0, 2]))
            extracted = extract_submoment(moments_of(sigma, offset + 7), IndexMap.shift(offset))
            sigma_sub = recover_atoms(extracted, 3)
            poly = rng.uniform(-1.0, 1.0, size=int(rng.integers(1, 4)))
            residual = shift_identity_check(sigma, sigma_sub, offset, poly)
            assert residual <= 1e-8 * shift_identity_scale(sigma, offset, poly)


def test_admissible_extraction_preserves_positivity(rng):
    for _ in range(200):
        sigma = spread_measure(rng, int(rng.integers(1, 6)), -1.5, 1.5, 0.1)
        d = int(rng.integers(1, 4))
        offset = int(rng.choice([0, 2, 4]))
        index_map = IndexMap(d, offset)
        seq = moments_of(sigma, index_map.index(6))
        sub = extract_submoment(seq, index_map)
        assert len(sub) == 7
        assert classify_positivity(sub, 3).is_positive
