import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import unionbounds as ub
from unionbounds.errors import ArgumentError, InvalidWeights
from unionbounds.space import Classification, subset_sums

from conftest import draw_mixed_weights, draw_positive_weights, random_space


class TestEventSpace:
    def test_single_event(self):
        sp = ub.EventSpace(n=1, atom_probs={1: 0.3})
        assert ub.exact_union(sp) == pytest.approx(0.3, abs=1e-15)

    def test_three_atoms(self, n2_space):
        assert ub.exact_union(n2_space) == pytest.approx(0.7, abs=1e-15)

    def test_empty_union(self):
        sp = ub.EventSpace(n=3, atom_probs={})
        assert ub.exact_union(sp) == 0.0

    @pytest.mark.parametrize("bad", [{0: 0.1}, {8: 0.1}, {1: -0.2}, {1: 1.5}])
    def test_invalid_atoms_rejected(self, bad):
        with pytest.raises(ArgumentError):
            ub.EventSpace(n=2, atom_probs=bad)

    def test_mass_cap(self):
        with pytest.raises(ArgumentError):
            ub.EventSpace(n=2, atom_probs={1: 0.7, 2: 0.7})

    def test_n_cap(self):
        with pytest.raises(ArgumentError):
            ub.EventSpace(n=25, atom_probs={})

    def test_n_cap_env_override(self, monkeypatch):
        monkeypatch.setenv("UB_MAX_N", "26")
        sp = ub.EventSpace(n=25, atom_probs={1: 0.5})
        assert ub.exact_union(sp) == 0.5


class TestDerivePartialInfo:
    def test_n2_values(self, n2_space):
        info = ub.derive_partial_info(n2_space)
        assert info.alpha == pytest.approx([0.5, 0.4], abs=1e-15)
        assert info.pairwise[0, 1] == pytest.approx(0.2, abs=1e-15)
        assert info.pairwise[1, 0] == pytest.approx(0.2, abs=1e-15)

    def test_disjoint_offdiagonal_zero(self):
        sp = ub.EventSpace(n=3, atom_probs={1: 0.2, 2: 0.3, 4: 0.1})
        info = ub.derive_partial_info(sp)
        off = info.pairwise - np.diag(np.diag(info.pairwise))
        assert np.all(off == 0.0)

    def test_identical_events(self):
        sp = ub.EventSpace(n=4, atom_probs={15: 0.37})
        info = ub.derive_partial_info(sp)
        assert np.allclose(info.alpha, 0.37, atol=1e-15)
        assert np.allclose(info.pairwise, 0.37, atol=1e-15)

    def test_matches_per_atom_loop(self):
        rng = np.random.default_rng(101)
        for trial in range(25):
            n = int(rng.integers(2, 7))
            sp = random_space(rng, n, trial)
            info = ub.derive_partial_info(sp)
            alpha = np.zeros(n)
            pair = np.zeros((n, n))
            for mask, p in sp.atom_probs.items():
                members = [k for k in range(n) if mask >> k & 1]
                for i in members:
                    alpha[i] += p
                    for j in members:
                        pair[i, j] += p
            assert np.allclose(info.alpha, alpha, atol=1e-12)
            assert np.allclose(info.pairwise, pair, atol=1e-12)


class TestPartialInfoValidation:
    def test_asymmetric_rejected(self):
        with pytest.raises(ArgumentError, match="symmetric"):
            ub.PartialInfo(n=2, alpha=np.array([0.5, 0.4]),
                           pairwise=np.array([[0.5, 0.2], [0.3, 0.4]]))

    def test_diagonal_must_match_alpha(self):
        with pytest.raises(ArgumentError, match="alpha"):
            ub.PartialInfo(n=2, alpha=np.array([0.5, 0.4]),
                           pairwise=np.array([[0.6, 0.2], [0.2, 0.4]]))

    def test_pairwise_exceeding_marginal_rejected(self):
        with pytest.raises(ArgumentError):
            ub.PartialInfo(n=2, alpha=np.array([0.5, 0.4]),
                           pairwise=np.array([[0.5, 0.45], [0.45, 0.4]]))


class TestWeightClassification:
    def test_all_positive(self):
        w = ub.WeightVector.from_components([0.2, 1.5, 3.0])
        assert w.classification is Classification.ALL_POSITIVE

    def test_mixed_valid(self):
        w = ub.WeightVector.from_components([1.0, -0.4])
        assert w.classification is Classification.MIXED_SIGN_VALID

    def test_zero_subset_sum_invalid(self):
        # {1, 2} sums to zero
        w = ub.WeightVector.from_components([1.0, -1.0, 0.5])
        assert w.classification is Classification.INVALID

    def test_zero_component_invalid(self):
        w = ub.WeightVector.from_components([1.0, 0.0])
        assert w.classification is Classification.INVALID

    def test_subset_sums_indexing(self):
        s = subset_sums([1.0, 2.0, 4.0])
        assert list(s) == [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]


class TestWeightedIdentity:
    def test_all_ones_reduces_to_exact(self, n2_space):
        assert ub.weighted_identity(n2_space, ub.WeightVector.ones(2)) == \
            pytest.approx(0.7, abs=1e-14)

    def test_hand_expansion(self, n2_space):
        # c=(2,1): 2*0.3/2 + 2*0.2/3 + 1*0.2/1 + 1*0.2/3 = 0.7
        w = ub.WeightVector.from_components([2.0, 1.0])
        assert ub.weighted_identity(n2_space, w) == pytest.approx(0.7, abs=1e-14)

    def test_random_dirichlet_matches_union(self):
        sp = ub.generate_random_space(3, seed=77, model="dirichlet")
        w = ub.WeightVector.from_components([0.5, 1.5, 2.0])
        assert abs(ub.weighted_identity(sp, w) - ub.exact_union(sp)) <= 1e-12

    def test_invalid_weights_rejected(self, n2_space):
        w = ub.WeightVector.from_components([1.0, -1.0])
        with pytest.raises(InvalidWeights):
            ub.weighted_identity(n2_space, w)

    def test_scale_invariance(self):
        rng = np.random.default_rng(5)
        sp = random_space(rng, 4, 0)
        base = ub.weighted_identity(sp, ub.WeightVector.ones(4))
        for kappa in (0.5, 3.0, -2.0):
            w = ub.WeightVector.from_components(np.full(4, kappa))
            assert ub.weighted_identity(sp, w) == pytest.approx(base, abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10**6), n=st.integers(2, 6), data=st.data())
    def test_identity_property(self, seed, n, data):
        sp = ub.generate_random_space(n, seed, "dirichlet")
        rng = np.random.default_rng(data.draw(st.integers(0, 10**6)))
        w = draw_mixed_weights(rng, n) if data.draw(st.booleans()) \
            else draw_positive_weights(rng, n)
        assert abs(ub.weighted_identity(sp, w) - ub.exact_union(sp)) <= 1e-12


class TestGamma:
    def test_disjoint_only_diagonal(self):
        sp = ub.EventSpace(n=3, atom_probs={1: 0.2, 2: 0.3, 4: 0.1})
        info = ub.derive_partial_info(sp)
        w = ub.WeightVector.from_components([2.0, 5.0, 1.0])
        assert ub.gamma(info, w, 1) == pytest.approx(5.0 * 0.3, abs=1e-15)

    def test_n2_ones(self, n2_info):
        assert ub.gamma(n2_info, ub.WeightVector.ones(2), 0) == \
            pytest.approx(0.7, abs=1e-15)

    def test_identical_events(self):
        sp = ub.EventSpace(n=4, atom_probs={15: 0.25})
        info = ub.derive_partial_info(sp)
        assert ub.gamma(info, ub.WeightVector.ones(4), 2) == \
            pytest.approx(4 * 0.25, abs=1e-14)


class TestGenerator:
    def test_deterministic(self):
        a = ub.generate_random_space(3, seed=7, model="dirichlet")
        b = ub.generate_random_space(3, seed=7, model="dirichlet")
        assert a.atom_probs == b.atom_probs

    def test_dirichlet_leaves_remainder(self):
        sp = ub.generate_random_space(4, seed=3, model="dirichlet")
        assert 0.0 < sum(sp.atom_probs.values()) < 1.0

    def test_sparse_counts(self):
        sp = ub.generate_random_space(5, seed=11, model="sparse:4")
        assert len(sp.atom_probs) == 4

    def test_sparse_single_atom(self):
        sp = ub.generate_random_space(3, seed=2, model="sparse:1")
        assert len(sp.atom_probs) == 1

    @pytest.mark.parametrize("n", [0, 25, -1])
    def test_n_out_of_range(self, n):
        with pytest.raises(ArgumentError):
            ub.generate_random_space(n, seed=0, model="dirichlet")

    def test_bad_model(self):
        with pytest.raises(ArgumentError):
            ub.generate_random_space(3, seed=0, model="zipf")
