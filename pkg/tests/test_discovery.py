"""Feature dedup: Jaccard similarity, tracker semantics, discovery accounting."""
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from planted import decision_accuracy, planted_candidates
from repairlab.discovery import (
    Feature,
    FeatureTracker,
    discovery_accounting,
    jaccard,
    tokenize,
    try_add,
)
from repairlab.errors import ConfigError

TOKENS = st.frozensets(st.sampled_from("abcdefgh"), min_size=1, max_size=6)


class TestTokenize:
    def test_lowercase_split_dedup(self):
        assert tokenize("Refresh Table data") == {"refresh", "table", "data"}

    def test_camel_case_boundaries(self):
        assert tokenize("refreshTableData") == {"refresh", "table", "data"}

    def test_punctuation_split(self):
        assert tokenize("grid/refresh-action") == {"grid", "refresh", "action"}


class TestJaccard:
    def test_identical_sets(self):
        assert jaccard(frozenset("ab"), frozenset("ab")) == 1

    def test_disjoint_sets(self):
        assert jaccard(frozenset("ab"), frozenset("cd")) == 0

    def test_three_quarters(self):
        a = frozenset({"refresh", "table", "data"})
        b = frozenset({"refresh", "table", "grid", "data"})
        assert jaccard(a, b) == Fraction(3, 4)

    def test_empty_set_rejected(self):
        with pytest.raises(ConfigError):
            jaccard(frozenset(), frozenset("a"))

    @given(TOKENS, TOKENS)
    def test_symmetric(self, a, b):
        assert jaccard(a, b) == jaccard(b, a)

    @given(TOKENS, TOKENS)
    def test_one_iff_equal(self, a, b):
        assert (jaccard(a, b) == 1) == (a == b)


def feat(feature_id, *tokens):
    return Feature(feature_id, frozenset(tokens), "screen-1")


class TestTryAdd:
    def test_first_candidate_accepted(self):
        tracker = FeatureTracker()
        assert tracker.try_add(feat("a", "x", "y")).accepted

    def test_above_threshold_is_duplicate(self):
        tracker = FeatureTracker()
        tracker.try_add(feat("a", "refresh", "table", "data"))
        result = tracker.try_add(feat("b", "refresh", "table", "grid", "data"))
        assert not result.accepted
        assert result.matched_feature_id == "a"
        assert result.similarity == Fraction(3, 4)

    def test_exact_boundary_is_duplicate(self):
        tracker = FeatureTracker()
        tracker.try_add(feat("a", "p", "q", "r", "s", "t"))
        result = tracker.try_add(feat("b", "p", "q", "r"))  # 3/5 = 0.6
        assert result.similarity == Fraction(3, 5)
        assert not result.accepted

    def test_below_threshold_everywhere_is_accepted(self):
        tracker = FeatureTracker()
        tracker.try_add(feat("first", "x", "y"))
        tracker.try_add(feat("second", "p", "q"))
        # similarity 1/3 to both: below threshold, accepted
        assert tracker.try_add(feat("c", "x", "p")).accepted

    def test_tie_resolves_to_earliest(self):
        tracker = FeatureTracker()
        tracker.try_add(feat("first", "a", "b", "c"))
        tracker.try_add(feat("second", "a", "b", "d"))
        # {a, b} sits at 2/3 similarity to both accepted features
        result = tracker.try_add(feat("dup", "a", "b"))
        assert not result.accepted
        assert result.matched_feature_id == "first"

    def test_rejected_duplicates_recorded(self):
        tracker = FeatureTracker()
        tracker.try_add(feat("a", "x", "y", "z"))
        tracker.try_add(feat("b", "x", "y"))
        assert len(tracker.rejected_duplicates) == 1
        assert tracker.rejected_duplicates[0].matched_feature_id == "a"

    def test_bad_threshold_rejected(self):
        with pytest.raises(ConfigError):
            FeatureTracker().try_add(feat("a", "x"), threshold=Fraction(0))

    def test_tracker_invariant_under_random_sequences(self):
        rng = random.Random(5)
        pool = [feat(f"f{i}", *rng.sample("abcdefghij", rng.randint(2, 5))) for i in range(60)]
        tracker = FeatureTracker()
        for feature in pool:
            try_add(tracker, feature)
        accepted = tracker.accepted
        for i, a in enumerate(accepted):
            for b in accepted[i + 1 :]:
                assert jaccard(a.name_tokens, b.name_tokens) < Fraction(3, 5)

    def test_accepted_size_stable_under_permutation(self):
        # tight planted clusters: any arrival order keeps one representative
        # per cluster, so the size matches the greedy oracle within +/- 1
        rng = random.Random(9)
        clusters = 8
        candidates = []
        for c in range(clusters):
            base = [f"c{c}t{k}" for k in range(5)]
            candidates.append(feat(f"c{c}-rep", *base))
            for j in range(4):
                candidates.append(feat(f"c{c}-v{j}", *(base[:j] + base[j + 1 :])))
        baseline_tracker = FeatureTracker()
        for feature in candidates:
            baseline_tracker.try_add(feature)
        baseline_size = len(baseline_tracker.accepted)
        for _ in range(25):
            shuffled = candidates[:]
            rng.shuffle(shuffled)
            tracker = FeatureTracker()
            for feature in shuffled:
                tracker.try_add(feature)
            assert abs(len(tracker.accepted) - baseline_size) <= 1


class TestPlantedClusterStudy:
    def test_threshold_study(self):
        at_06 = decision_accuracy(Fraction(3, 5))
        at_05 = decision_accuracy(Fraction(1, 2))
        at_07 = decision_accuracy(Fraction(7, 10))
        assert at_06 >= 0.90
        assert at_05 < at_06
        assert at_07 < at_06

    def test_exact_deterministic_accuracies(self):
        assert decision_accuracy(Fraction(3, 5)) == 0.96
        assert decision_accuracy(Fraction(1, 2)) == 0.90
        assert decision_accuracy(Fraction(7, 10)) == 0.40

    def test_ground_truth_composition(self):
        candidates = planted_candidates()
        assert len(candidates) == 100
        assert sum(1 for _, dup in candidates if dup) == 64


class TestDiscoveryAccounting:
    def test_multi_round_configuration(self):
        # two model calls per round (query generation + sufficiency check)
        # over a mixed per-screen round profile
        result = discovery_accounting([3, 3, 2, 2, 2, 1, 1, 1, 1, 1], screens=10, calls_per_round=2)
        assert result["total_calls"] == 34

    def test_single_query_baseline(self):
        result = discovery_accounting(1, screens=10, calls_per_round=1, aggregate_calls=1)
        assert result["total_calls"] == 11

    def test_multi_round_to_baseline_ratio_is_about_3x(self):
        multi = discovery_accounting([3, 3, 2, 2, 2, 1, 1, 1, 1, 1], screens=10, calls_per_round=2)
        single = discovery_accounting(1, screens=10, calls_per_round=1, aggregate_calls=1)
        ratio = multi["total_calls"] / single["total_calls"]
        assert 2.5 <= ratio <= 3.5

    def test_minimal_configuration(self):
        assert discovery_accounting(1, screens=1, calls_per_round=1)["total_calls"] == 1

    def test_rounds_over_cap_rejected(self):
        with pytest.raises(ConfigError):
            discovery_accounting(4, screens=2)

    def test_per_screen_length_mismatch_rejected(self):
        with pytest.raises(ConfigError):
            discovery_accounting([1, 2], screens=3)

    def test_zero_rounds_rejected(self):
        with pytest.raises(ConfigError):
            discovery_accounting([1, 0], screens=2)
