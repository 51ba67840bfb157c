"""Personality traits, prompt assembly, and entity-term mapping.

A trait's ``prompt_fragment`` references abstract entity roles in
double-bracket placeholders (``[[Enemy Hazard]]``).  Building an agent
prompt substitutes each placeholder with the game term supplied by an
:class:`EntityMapping`, so the same trait text drives any game for which
a mapping exists.  The finished prompt contains the game terms only —
an abstract role name never reaches the model.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

TRAIT_ORDER = (
    "Achievement",
    "Adrenaline",
    "Aggression",
    "Caution",
    "Completion",
    "Curiosity",
    "Efficiency",
)

PERSONALITY_SENTINEL = "Personality profile:"

_PLACEHOLDER = re.compile(r"\[\[([^\[\]]+)\]\]")


class PersonalityError(Exception):
    pass


class UnmappedEntity(PersonalityError):
    """A prompt fragment references abstract names the mapping lacks."""

    def __init__(self, missing: list[str]):
        self.missing = sorted(missing)
        super().__init__("unmapped abstract entity names: " + ", ".join(self.missing))


class UnknownTrait(PersonalityError):
    pass


@dataclass(frozen=True)
class PersonalityTrait:
    identifier: str
    description: str
    prompt_fragment: str

    def __post_init__(self):
        if not self.prompt_fragment.strip():
            raise PersonalityError(f"trait {self.identifier}: empty prompt_fragment")

    def referenced_entities(self) -> list[str]:
        return sorted({m.group(1) for m in _PLACEHOLDER.finditer(self.prompt_fragment)})


@dataclass(frozen=True)
class EntityMapping:
    """Abstract role name -> (game term, source note); names matched
    case-insensitively."""

    entries: tuple[tuple[str, str, str], ...]   # (abstract_name, term, note)

    def __post_init__(self):
        for name, term, _ in self.entries:
            if not name.strip() or not term.strip():
                raise PersonalityError("mapping entries must be non-empty")

    def _index(self) -> dict[str, tuple[str, str]]:
        return {name.lower(): (term, note) for name, term, note in self.entries}

    def lookup(self, abstract_name: str) -> str:
        found = self._index().get(abstract_name.lower())
        if found is None:
            raise UnmappedEntity([abstract_name])
        return found[0]

    def covers(self, abstract_names: list[str]) -> list[str]:
        """Return the subset of names this mapping does NOT cover."""
        index = self._index()
        return [n for n in abstract_names if n.lower() not in index]

    def to_dict(self) -> dict:
        return {"entries": [{"abstract": n, "term": t, "note": s}
                            for n, t, s in self.entries]}

    @staticmethod
    def from_dict(raw: dict) -> "EntityMapping":
        return EntityMapping(entries=tuple(
            (e["abstract"], e["term"], e.get("note", "")) for e in raw["entries"]))


def map_entity(mapping: EntityMapping, abstract_name: str) -> str:
    return mapping.lookup(abstract_name)


# ---------------------------------------------------------------------------
# Default catalog
# ---------------------------------------------------------------------------

_DEFAULT_FRAGMENTS = {
    "Achievement": (
        "You play to win.  Every decision serves measurable progress: reach "
        "[[Level Exit]] after [[Level Exit]], overcome [[Final Challenge]], and "
        "finish the game.  You fight [[Enemy Hazard]] when they stand between "
        "you and progress, grab [[Collectible Item]] that make you stronger, "
        "and never linger where nothing advances your goal."
    ),
    "Adrenaline": (
        "You chase thrills.  Danger is the point: charge [[Enemy Hazard]] "
        "head-on, flirt with [[Environment Hazard]], fight at low health "
        "rather than retreat, and hurl whatever [[Utility Tool]] you carry "
        "into the fray.  Safe, slow play bores you; pick the risky option "
        "whenever one exists."
    ),
    "Aggression": (
        "You are a fighter.  Seek out [[Enemy Hazard]] and destroy them on "
        "sight; clearing hostiles matters more than progress or loot.  Arm "
        "yourself with any [[Collectible Item]] that hits harder, and treat "
        "[[Final Challenge]] as the fight you have been waiting for."
    ),
    "Caution": (
        "You are careful above all.  Avoid [[Enemy Hazard]] whenever "
        "possible, keep your distance from [[Environment Hazard]], and keep "
        "yourself topped up with [[Health Resource]] before trouble starts.  "
        "Retreat early, fight only when cornered, and never approach "
        "[[Final Challenge]] unprepared."
    ),
    "Completion": (
        "You finish everything.  Collect every [[Collectible Item]], open "
        "every [[Progression Gate]], and visit every corner before you allow "
        "yourself to take [[Level Exit]].  Leaving something unchecked "
        "behind feels worse than any fight."
    ),
    "Curiosity": (
        "You explore for its own sake.  Wander toward every [[Point Of "
        "Interest]], poke at [[Progression Gate]] to see what is behind "
        "them, and experiment with each [[Utility Tool]] you find.  Whether "
        "something helps you win matters less than finding out what it does."
    ),
    "Efficiency": (
        "You optimize.  Take the shortest route to [[Level Exit]], skip "
        "fights with [[Enemy Hazard]] that cost more than they pay, pick up "
        "a [[Collectible Item]] only when it clearly speeds you up, and "
        "waste not a single turn on detours."
    ),
}

_DEFAULT_DESCRIPTIONS = {
    "Achievement": "Motivated by goals, progress, and finishing the game.",
    "Adrenaline": "Motivated by excitement, risk, and dramatic moments.",
    "Aggression": "Motivated by combat and the defeat of hostile creatures.",
    "Caution": "Motivated by safety, preparation, and risk avoidance.",
    "Completion": "Motivated by collecting, clearing, and leaving nothing behind.",
    "Curiosity": "Motivated by discovery, novelty, and experimentation.",
    "Efficiency": "Motivated by optimal play and minimal wasted effort.",
}


def default_traits() -> tuple[PersonalityTrait, ...]:
    """The seven shipped traits, in stable campaign-scheduling order."""
    return tuple(
        PersonalityTrait(identifier=name,
                         description=_DEFAULT_DESCRIPTIONS[name],
                         prompt_fragment=_DEFAULT_FRAGMENTS[name])
        for name in TRAIT_ORDER
    )


def trait_by_name(name: str,
                  traits: tuple[PersonalityTrait, ...] | None = None) -> PersonalityTrait:
    for trait in traits or default_traits():
        if trait.identifier.lower() == name.lower():
            return trait
    raise UnknownTrait(f"no trait named {name!r}; expected one of {TRAIT_ORDER}")


def default_entity_mapping() -> EntityMapping:
    """Mapping for the embedded dungeon game."""
    from playprobe.content import DEFAULT_ENTITY_TERMS
    return EntityMapping(entries=tuple(
        (name, term, note) for name, (term, note) in DEFAULT_ENTITY_TERMS.items()))


# ---------------------------------------------------------------------------
# Prompt assembly
# ---------------------------------------------------------------------------

def substitute_entities(fragment: str, mapping: EntityMapping) -> str:
    referenced = sorted({m.group(1) for m in _PLACEHOLDER.finditer(fragment)})
    missing = mapping.covers(referenced)
    if missing:
        raise UnmappedEntity(missing)
    return _PLACEHOLDER.sub(lambda m: mapping.lookup(m.group(1)), fragment)


def build_agent_prompt(trait: PersonalityTrait, game_description: str,
                       mapping: EntityMapping) -> str:
    """System prompt for a personality-conditioned agent.  Pure."""
    persona = substitute_entities(trait.prompt_fragment, mapping)
    return (
        "You are an automated play-tester embodying a fixed player personality.\n"
        "\n"
        "=== GAME ===\n"
        f"{game_description.rstrip()}\n"
        "\n"
        f"{PERSONALITY_SENTINEL} {trait.identifier}\n"
        f"{persona}\n"
        "\n"
        "Stay in character: every plan, judgement, and reflection you produce "
        "must follow this personality, not general best play."
    )


# ---------------------------------------------------------------------------
# Definition files
# ---------------------------------------------------------------------------

def load_traits(path: str) -> tuple[PersonalityTrait, ...]:
    """Load a trait catalog from JSON: {"traits": [{identifier, description,
    prompt_fragment}, ...]}.  Must define exactly the seven identifiers."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    traits = tuple(
        PersonalityTrait(identifier=t["identifier"], description=t.get("description", ""),
                         prompt_fragment=t["prompt_fragment"])
        for t in raw["traits"]
    )
    names = sorted(t.identifier for t in traits)
    if names != sorted(TRAIT_ORDER):
        raise PersonalityError(
            f"trait file must define exactly {sorted(TRAIT_ORDER)}, got {names}")
    by_name = {t.identifier: t for t in traits}
    return tuple(by_name[name] for name in TRAIT_ORDER)


def load_mapping(path: str) -> EntityMapping:
    """Load an entity mapping from JSON: {"entries": [{abstract, term, note}]}."""
    with open(path, "r", encoding="utf-8") as fh:
        return EntityMapping.from_dict(json.load(fh))
