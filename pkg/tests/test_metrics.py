"""Tests for coverage and diversity metrics."""

import math
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from playprobe.dungeon.types import GameEvent
from playprobe.metrics import (
    NONE_VALUE,
    CombinationSpace,
    CombinatorialRule,
    EmptyReachable,
    EmptySpace,
    EmptyTrace,
    MetricsError,
    RuleInvalid,
    TraceTooShort,
    coverage_over_time,
    default_combination_rules,
    enumerate_combinations,
    load_rules,
    navigation_coverage,
    ngram_entropy,
    save_rules,
    shannon_entropy,
)
from playprobe.rng import Rng


def event(action_type, subject=None, target=None, carrying=(), upgrades=(),
          turn=0, kind="x"):
    return GameEvent(turn=turn, kind=kind, action_type=action_type,
                     subject_item=subject, target=target,
                     carrying=tuple(carrying), upgrades=tuple(upgrades))


def brute_force_keys(rule):
    """Independent nested-loop enumeration of one rule's keyspace."""
    keys = set()
    for subject in rule.subject_domain:
        for target in rule.target_domain:
            for carry_bits in product((0, 1), repeat=len(rule.carry_flags)):
                for up_bits in product((0, 1), repeat=len(rule.upgrade_flags)):
                    keys.add((rule.action_type, subject, target,
                              carry_bits, up_bits))
    return keys


class TestRule:
    def test_size_is_axis_product(self):
        rule = CombinatorialRule("throw", ("stone", "bread"),
                                 ("wall", "rat", "bat"),
                                 carry_flags=("health potion",),
                                 upgrade_flags=("armed", "torch_lit"))
        assert rule.size() == 2 * 3 * 2 * 4

    def test_keys_match_brute_force(self):
        rule = CombinatorialRule("use", ("torch", "sword"),
                                 upgrade_flags=("torch_lit",))
        assert set(rule.keys()) == brute_force_keys(rule)
        assert len(list(rule.keys())) == rule.size()

    def test_validation(self):
        with pytest.raises(RuleInvalid):
            CombinatorialRule("")
        with pytest.raises(RuleInvalid):
            CombinatorialRule("move", subject_domain=())
        with pytest.raises(RuleInvalid):
            CombinatorialRule("move", target_domain=("floor", "floor"))

    def test_key_for_event_maps_missing_attrs_to_none(self):
        rule = CombinatorialRule("wait")
        key = rule.key_for_event(event("wait"))
        assert key == ("wait", NONE_VALUE, NONE_VALUE, (), ())

    def test_key_for_event_rejects_foreign_values(self):
        rule = CombinatorialRule("attack", target_domain=("rat",))
        assert rule.key_for_event(event("attack", target="dragon")) is None
        assert rule.key_for_event(event("move", target="rat")) is None

    def test_flag_bits_reflect_player_state(self):
        rule = CombinatorialRule("open", target_domain=("closed_door",),
                                 carry_flags=("brass key",))
        with_key = rule.key_for_event(
            event("open", target="closed_door", carrying=("brass key", "bread")))
        without = rule.key_for_event(event("open", target="closed_door"))
        assert with_key[3] == (1,)
        assert without[3] == (0,)

    def test_round_trips_through_dict(self):
        rule = CombinatorialRule("eat", ("bread",), upgrade_flags=("armed",))
        assert CombinatorialRule.from_dict(rule.to_dict()) == rule


class TestSpace:
    def test_enumeration_total(self):
        rules = default_combination_rules()
        total, keys = enumerate_combinations(rules)
        listed = list(keys)
        assert total == len(listed) == 72
        assert len(set(listed)) == total  # disjoint across rules

    def test_coverage_counts_unique_keys(self):
        space = CombinationSpace(rules=(CombinatorialRule("wait",
                                        upgrade_flags=("armed",)),))
        assert space.total == 2
        new = space.record_event(event("wait", turn=3))
        assert len(new) == 1
        assert space.record_event(event("wait", turn=4)) == set()
        assert space.coverage() == 0.5
        space.record_event(event("wait", upgrades=("armed",), turn=5))
        assert space.coverage() == 1.0

    def test_first_covered_turn_is_recorded(self):
        space = CombinationSpace(rules=(CombinatorialRule("wait"),))
        space.record_event(event("wait", turn=7))
        space.record_event(event("wait", turn=9))
        assert list(space.first_covered_at.values()) == [7]

    def test_empty_space_coverage_raises(self):
        with pytest.raises(EmptySpace):
            CombinationSpace(rules=()).coverage()

    def test_random_event_stream_matches_brute_force(self):
        rules = default_combination_rules()
        space = CombinationSpace(rules=rules)
        rng = Rng(77)
        actions = ("move", "attack", "pick_up", "use", "throw", "eat",
                   "open", "descend", "wait")
        values = (None, "stone", "bread", "sword", "rat", "bat", "floor",
                  "wall", "closed_door", "stairs_down")
        flags = ((), ("armed",), ("torch_lit",), ("armed", "torch_lit"))
        carries = ((), ("health potion",), ("brass key",), ("stone", "bread"))
        events = [
            event(rng.choice(actions), subject=rng.choice(values),
                  target=rng.choice(values), carrying=rng.choice(carries),
                  upgrades=rng.choice(flags), turn=i)
            for i in range(500)
        ]
        for e in events:
            space.record_event(e)
        expected = set()
        for rule in rules:
            universe = brute_force_keys(rule)
            for e in events:
                key = rule.key_for_event(e)
                if key is not None:
                    assert key in universe
                    expected.add(key)
        assert space.covered == expected


class TestRuleFiles:
    def test_save_load_roundtrip(self, tmp_path):
        path = tmp_path / "rules.json"
        save_rules(default_combination_rules(), str(path))
        assert load_rules(str(path)) == default_combination_rules()

    def test_tampered_total_detected(self, tmp_path):
        import json
        path = tmp_path / "rules.json"
        save_rules(default_combination_rules(), str(path))
        doc = json.loads(path.read_text())
        doc["declared_total"] += 1
        path.write_text(json.dumps(doc))
        with pytest.raises(RuleInvalid):
            load_rules(str(path))


class TestNavigation:
    def test_exact_fraction(self):
        reachable = {0: {(0, 0), (0, 1), (1, 0), (1, 1)}}
        visited = {(0, 0, 0), (0, 1, 1)}
        assert navigation_coverage(visited, reachable) == 0.5

    def test_unreachable_visits_do_not_count(self):
        reachable = {0: {(0, 0)}}
        visited = {(0, 5, 5), (1, 0, 0), (0, 0, 0)}
        assert navigation_coverage(visited, reachable) == 1.0

    def test_multi_level_denominator_is_union(self):
        reachable = {0: {(0, 0), (1, 0)}, 1: {(0, 0), (1, 0)}}
        visited = {(0, 0, 0)}
        assert navigation_coverage(visited, reachable) == 0.25

    def test_empty_reachable_raises(self):
        with pytest.raises(EmptyReachable):
            navigation_coverage(set(), {})

    def test_level_keys_are_opaque(self):
        # Composite keys (seed, level) work exactly like plain ints.
        reachable = {(7, 0): {(0, 0), (1, 0)}, (8, 0): {(0, 0), (1, 0)}}
        visited = {((7, 0), 0, 0), ((8, 0), 1, 0)}
        assert navigation_coverage(visited, reachable) == 0.5


class TestEntropy:
    def test_closed_forms(self):
        assert abs(shannon_entropy(["a", "b", "c", "d"]) - 2.0) < 1e-12
        assert shannon_entropy(["a"] * 10) == 0.0
        assert abs(shannon_entropy(["a", "a", "b", "c"]) - 1.5) < 1e-12

    def test_empty_trace_raises(self):
        with pytest.raises(EmptyTrace):
            shannon_entropy([])

    def test_ngram_order_one_equals_shannon(self):
        trace = ["m", "a", "m", "w", "a", "m"]
        assert ngram_entropy(trace, 1) == shannon_entropy(trace)

    def test_ngram_counts_overlapping_windows(self):
        # "abab" has 3 bigrams: ab, ba, ab -> H = H({2/3, 1/3})
        expected = -(2 / 3) * math.log2(2 / 3) - (1 / 3) * math.log2(1 / 3)
        assert abs(ngram_entropy(list("abab"), 2) - expected) < 1e-12

    def test_short_trace_raises(self):
        with pytest.raises(TraceTooShort):
            ngram_entropy(["a", "b"], 3)

    def test_bad_order_raises(self):
        with pytest.raises(MetricsError):
            ngram_entropy(["a"], 0)


class TestCoverageOverTime:
    def events(self):
        return [
            event("wait", turn=2),
            event("wait", upgrades=("armed",), turn=5),
            event("wait", turn=9),  # duplicate key, no step
        ]

    def space_rules(self):
        return (CombinatorialRule("wait", upgrade_flags=("armed",)),)

    def test_series_steps_only_on_new_keys(self):
        series = coverage_over_time(self.events(), self.space_rules())
        assert series == [(0, 0.0), (2, 0.5), (5, 1.0)]

    def test_series_monotone_and_final_matches_space(self):
        rules = default_combination_rules()
        rng = Rng(3)
        actions = ("move", "attack", "wait", "eat", "open")
        stream = [event(rng.choice(actions), target=rng.choice(
            (None, "rat", "closed_door", "floor")), turn=i)
            for i in range(200)]
        series = coverage_over_time(stream, rules)
        values = [c for _, c in series]
        assert values == sorted(values)
        space = CombinationSpace(rules=rules)
        for e in stream:
            space.record_event(e)
        assert series[-1][1] == space.coverage()

    def test_sorts_by_turn(self):
        out_of_order = list(reversed(self.events()))
        assert coverage_over_time(out_of_order, self.space_rules()) == \
            coverage_over_time(self.events(), self.space_rules())

    def test_empty_rules_raise(self):
        with pytest.raises(EmptySpace):
            coverage_over_time([], ())


@settings(max_examples=40, deadline=None)
@given(st.lists(st.sampled_from("abcd"), min_size=1, max_size=60))
def test_property_entropy_bounds(trace):
    h = shannon_entropy(trace)
    assert -1e-12 <= h <= math.log2(len(set(trace))) + 1e-12


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sampled_from("abc"), min_size=1, max_size=40))
def test_property_ngram1_identity(trace):
    assert abs(ngram_entropy(trace, 1) - shannon_entropy(trace)) < 1e-12
