"""Interaction coverage, navigation coverage, and behavioural entropy.

Combinatorial coverage counts attribute tuples: each rule defines a
keyspace (action, subject, target, carry-bitvector, upgrade-bitvector)
and an observed event covers every key its attributes instantiate.  The
special value ``"none"`` stands for "no subject"/"no target", keeping
single-axis actions in the same uniform keyspace.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Iterator, Optional

from playprobe.dungeon.types import GameEvent

NONE_VALUE = "none"
MAX_NGRAM_ORDER = 3


class MetricsError(Exception):
    pass


class RuleInvalid(MetricsError):
    pass


class EmptySpace(MetricsError):
    pass


class EmptyReachable(MetricsError):
    pass


class EmptyTrace(MetricsError):
    pass


class TraceTooShort(MetricsError):
    pass


@dataclass(frozen=True)
class CombinatorialRule:
    """One action's tracked attribute axes.

    ``subject_domain``/``target_domain`` list the values the event's
    subject/target may take (use ("none",) for actions without one).
    Each name in ``carry_flags``/``upgrade_flags`` contributes one
    boolean axis: whether the player carried that item / had that
    upgrade when the action happened.
    """

    action_type: str
    subject_domain: tuple[str, ...] = (NONE_VALUE,)
    target_domain: tuple[str, ...] = (NONE_VALUE,)
    carry_flags: tuple[str, ...] = ()
    upgrade_flags: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.action_type:
            raise RuleInvalid("rule needs an action_type")
        if not self.subject_domain or not self.target_domain:
            raise RuleInvalid(f"rule {self.action_type}: empty domain")
        for axis in (self.subject_domain, self.target_domain,
                     self.carry_flags, self.upgrade_flags):
            if len(set(axis)) != len(axis):
                raise RuleInvalid(f"rule {self.action_type}: duplicate domain value")

    def size(self) -> int:
        return (len(self.subject_domain) * len(self.target_domain)
                * 2 ** len(self.carry_flags) * 2 ** len(self.upgrade_flags))

    def keys(self) -> Iterator[tuple]:
        for subject, target, carry_bits, upgrade_bits in product(
                self.subject_domain, self.target_domain,
                product((0, 1), repeat=len(self.carry_flags)),
                product((0, 1), repeat=len(self.upgrade_flags))):
            yield (self.action_type, subject, target, carry_bits, upgrade_bits)

    def key_for_event(self, event: GameEvent) -> Optional[tuple]:
        if event.action_type != self.action_type:
            return None
        subject = event.subject_item if event.subject_item is not None else NONE_VALUE
        target = event.target if event.target is not None else NONE_VALUE
        if subject not in self.subject_domain or target not in self.target_domain:
            return None
        carrying = set(event.carrying)
        upgrades = set(event.upgrades)
        carry_bits = tuple(1 if name in carrying else 0 for name in self.carry_flags)
        upgrade_bits = tuple(1 if name in upgrades else 0 for name in self.upgrade_flags)
        return (self.action_type, subject, target, carry_bits, upgrade_bits)

    def to_dict(self) -> dict:
        return {
            "action_type": self.action_type,
            "subject_domain": list(self.subject_domain),
            "target_domain": list(self.target_domain),
            "carry_flags": list(self.carry_flags),
            "upgrade_flags": list(self.upgrade_flags),
        }

    @staticmethod
    def from_dict(raw: dict) -> "CombinatorialRule":
        return CombinatorialRule(
            action_type=raw["action_type"],
            subject_domain=tuple(raw.get("subject_domain", [NONE_VALUE])),
            target_domain=tuple(raw.get("target_domain", [NONE_VALUE])),
            carry_flags=tuple(raw.get("carry_flags", [])),
            upgrade_flags=tuple(raw.get("upgrade_flags", [])),
        )


def load_rules(path: str) -> tuple[CombinatorialRule, ...]:
    """Load a rule file: {"rules": [...], "declared_total": int?}.

    A present ``declared_total`` is verified against the enumerated
    total, catching silently-edited rule files.
    """
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    rules = tuple(CombinatorialRule.from_dict(r) for r in raw["rules"])
    declared = raw.get("declared_total")
    if declared is not None:
        actual = sum(r.size() for r in rules)
        if actual != declared:
            raise RuleInvalid(f"rule file declares {declared} combinations, "
                              f"enumeration finds {actual}")
    return rules


def save_rules(rules: Iterable[CombinatorialRule], path: str) -> None:
    rules = list(rules)
    doc = {"rules": [r.to_dict() for r in rules],
           "declared_total": sum(r.size() for r in rules)}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def enumerate_combinations(rules: Iterable[CombinatorialRule]
                           ) -> tuple[int, Iterator[tuple]]:
    """Total count plus an iterator over all combination keys."""
    rules = list(rules)
    total = sum(rule.size() for rule in rules)

    def keys() -> Iterator[tuple]:
        for rule in rules:
            yield from rule.keys()

    return total, keys()


@dataclass
class CombinationSpace:
    rules: tuple[CombinatorialRule, ...]
    total: int = 0
    covered: set = field(default_factory=set)
    first_covered_at: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rules = tuple(self.rules)
        self.total = sum(rule.size() for rule in self.rules)

    def record_event(self, event: GameEvent) -> set:
        """Cover the keys this event instantiates; return the new ones."""
        new = set()
        for rule in self.rules:
            key = rule.key_for_event(event)
            if key is not None and key not in self.covered:
                self.covered.add(key)
                self.first_covered_at[key] = event.turn
                new.add(key)
        return new

    def coverage(self) -> float:
        if self.total == 0:
            raise EmptySpace("combination space has no combinations")
        return len(self.covered) / self.total


def record_event(space: CombinationSpace, event: GameEvent) -> set:
    return space.record_event(event)


def combinatorial_coverage(space: CombinationSpace) -> float:
    return space.coverage()


def navigation_coverage(visited: set, reachable: dict) -> float:
    """Fraction of reachable tiles visited.

    ``visited`` holds (level, x, y) triples; ``reachable`` maps level ->
    set of (x, y) reachable on that level.  The union of the per-level
    reachable sets is the denominator.
    """
    denominator = sum(len(tiles) for tiles in reachable.values())
    if denominator == 0:
        raise EmptyReachable("no reachable tiles configured")
    hits = sum(1 for (level, x, y) in visited
               if level in reachable and (x, y) in reachable[level])
    return hits / denominator


def shannon_entropy(trace) -> float:
    """Shannon entropy in bits over symbol frequencies."""
    symbols = list(trace)
    if not symbols:
        raise EmptyTrace("entropy of empty trace")
    counts: dict = {}
    for s in symbols:
        counts[s] = counts.get(s, 0) + 1
    n = len(symbols)
    return -sum((c / n) * math.log2(c / n) for c in counts.values())


def ngram_entropy(trace, n: int) -> float:
    """Shannon entropy over the multiset of overlapping n-grams."""
    symbols = list(trace)
    if n < 1:
        raise MetricsError("n-gram order must be >= 1")
    if len(symbols) < n:
        raise TraceTooShort(f"trace of length {len(symbols)} has no {n}-grams")
    grams = [tuple(symbols[i:i + n]) for i in range(len(symbols) - n + 1)]
    return shannon_entropy(grams)


def coverage_over_time(events: Iterable[GameEvent], rules
                       ) -> list[tuple[int, float]]:
    """Step series (turn, coverage) over a fresh space; monotone
    non-decreasing; final value equals the space's final coverage."""
    space = CombinationSpace(rules=tuple(rules))
    if space.total == 0:
        raise EmptySpace("combination space has no combinations")
    series: list[tuple[int, float]] = [(0, 0.0)]
    for event in sorted(events, key=lambda e: e.turn):
        if space.record_event(event):
            coverage = space.coverage()
            if series and series[-1][0] == event.turn:
                series[-1] = (event.turn, coverage)
            else:
                series.append((event.turn, coverage))
    return series


# ---------------------------------------------------------------------------
# Shipped rules for the default dungeon content
# ---------------------------------------------------------------------------

def default_combination_rules() -> tuple[CombinatorialRule, ...]:
    """Rules targeting the default content; 72 combinations in total.

    Axes stay deliberately small so a full campaign can plausibly reach
    high coverage: bitvector axes are attached only where the flag
    changes what the action means (armed attacks, key-carrying door
    interactions, thrown stones).  Per action: move 8, attack 16,
    pick_up 6, use 8, throw 24, eat 2, open 2, descend 4, wait 2.
    """
    item_names = ("sword", "health potion", "bread", "brass key", "stone", "torch")
    enemy_names = ("rat", "bat", "slime", "skeleton")
    return (
        # move: 4 destination tile kinds x torch bit = 8
        CombinatorialRule(
            action_type="move",
            target_domain=("floor", "open_door", "stairs_down", "entry"),
            upgrade_flags=("torch_lit",),
        ),
        # attack: (no-weapon + sword) x 4 enemies x armed bit = 16
        CombinatorialRule(
            action_type="attack",
            subject_domain=(NONE_VALUE, "sword"),
            target_domain=enemy_names,
            upgrade_flags=("armed",),
        ),
        # pick_up: 6 items = 6
        CombinatorialRule(
            action_type="pick_up",
            subject_domain=item_names,
        ),
        # use: usable items x torch_lit bit = 8
        CombinatorialRule(
            action_type="use",
            subject_domain=("sword", "health potion", "torch", "brass key"),
            upgrade_flags=("torch_lit",),
        ),
        # throw: 2 projectiles x hit kinds x carrying-potion bit = 24
        CombinatorialRule(
            action_type="throw",
            subject_domain=("stone", "bread"),
            target_domain=("floor", "wall", "closed_door", "rat", "bat", "skeleton"),
            carry_flags=("health potion",),
        ),
        # eat: bread x armed bit = 2
        CombinatorialRule(
            action_type="eat",
            subject_domain=("bread",),
            upgrade_flags=("armed",),
        ),
        # open: closed_door x carrying-key bit = 2
        CombinatorialRule(
            action_type="open",
            target_domain=("closed_door",),
            carry_flags=("brass key",),
        ),
        # descend: stairs x armed x torch bits = 4
        CombinatorialRule(
            action_type="descend",
            target_domain=("stairs_down",),
            upgrade_flags=("armed", "torch_lit"),
        ),
        # wait: armed bit = 2
        CombinatorialRule(
            action_type="wait",
            upgrade_flags=("armed",),
        ),
    )
