"""Core vocabulary of the dungeon game: tiles, templates, requests, events.

The action schemas here are the single source of truth for which
parameters each action type takes; the planner's game definitions and
the executor's primitive catalog are both derived from them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

# Tile kinds.  Grids hold these strings directly so canonical JSON
# serialization needs no extra encoding step.
FLOOR = "floor"
WALL = "wall"
CLOSED_DOOR = "closed_door"
OPEN_DOOR = "open_door"
STAIRS_DOWN = "stairs_down"
ENTRY = "entry"

TILES = (FLOOR, WALL, CLOSED_DOOR, OPEN_DOOR, STAIRS_DOWN, ENTRY)

# Tiles the player (and enemies) can stand on.
PASSABLE_TILES = frozenset({FLOOR, OPEN_DOOR, STAIRS_DOWN, ENTRY})

# Screen-space directions; y grows downward (row index).
DIRECTIONS = {
    "north": (0, -1),
    "south": (0, 1),
    "east": (1, 0),
    "west": (-1, 0),
}
DIRECTION_ORDER = ("north", "east", "south", "west")

ITEM_CATEGORIES = ("weapon", "potion", "food", "key", "stone", "torch")

# Engine constants (documented in docs/formats.md).
PLAYER_MAX_HP = 12
HUNGER_MAX = 100
VISIBILITY_RADIUS = 6
TORCH_VISIBILITY_BONUS = 2
THROW_RANGE = 4
ENEMY_CHASE_RADIUS = 8

# Upgrade tags the player can acquire.
UPGRADE_ARMED = "armed"          # a weapon is equipped and carried
UPGRADE_TORCH_LIT = "torch_lit"  # a torch was lit (permanent, wider sight)

# action_type -> required parameter names, in canonical order.
ACTION_SCHEMAS: dict[str, tuple[str, ...]] = {
    "move": ("direction",),
    "attack": ("target",),
    "pick_up": ("item",),
    "use": ("item",),
    "throw": ("item", "direction"),
    "eat": ("item",),
    "open": ("direction",),
    "descend": (),
    "wait": (),
}


class DungeonError(Exception):
    """Base class for all dungeon errors."""


class ConfigInvalid(DungeonError):
    """Game config violates its invariants."""


class TerminalState(DungeonError):
    """The game has already ended; no further actions are possible."""


class LevelOutOfRange(DungeonError):
    """Level index outside [0, level_count)."""


class IllegalAction(DungeonError):
    """The request cannot be applied to the current state.

    The state is left unchanged.  ``blocked_event`` describes the
    rejected attempt so callers that log failed invocations (the dumb
    monkey, the skill executor) can record it.
    """

    def __init__(self, reason: str, blocked_event: "GameEvent"):
        super().__init__(reason)
        self.reason = reason
        self.blocked_event = blocked_event


@dataclass(frozen=True)
class EnemyTemplate:
    name: str
    max_hp: int
    damage: int
    behaviour: str  # "chaser" | "wanderer" | "guard"


@dataclass(frozen=True)
class ItemTemplate:
    name: str
    category: str  # one of ITEM_CATEGORIES
    magnitude: int


@dataclass(frozen=True)
class GameConfig:
    """Declarative description of the game world.

    World generation is a pure function of (seed, config).
    """

    level_count: int
    level_width: int
    level_height: int
    enemy_kinds: tuple[EnemyTemplate, ...]
    item_kinds: tuple[ItemTemplate, ...]
    hunger_per_turn: int
    seed_list: tuple[int, ...]

    def validate(self) -> None:
        if self.level_count < 1:
            raise ConfigInvalid("level_count must be >= 1")
        if self.level_width < 8 or self.level_height < 8:
            raise ConfigInvalid("level dimensions must be >= 8")
        if not self.seed_list:
            raise ConfigInvalid("seed_list must be non-empty")
        if self.hunger_per_turn < 0:
            raise ConfigInvalid("hunger_per_turn must be >= 0")
        names = [t.name for t in self.enemy_kinds] + [t.name for t in self.item_kinds]
        if len(names) != len(set(names)):
            raise ConfigInvalid("template names must be unique")
        for item in self.item_kinds:
            if item.category not in ITEM_CATEGORIES:
                raise ConfigInvalid(f"unknown item category: {item.category}")
        for enemy in self.enemy_kinds:
            if enemy.behaviour not in ("chaser", "wanderer", "guard"):
                raise ConfigInvalid(f"unknown behaviour: {enemy.behaviour}")
            if enemy.max_hp < 1:
                raise ConfigInvalid("enemy max_hp must be >= 1")

    def to_dict(self) -> dict:
        return {
            "level_count": self.level_count,
            "level_width": self.level_width,
            "level_height": self.level_height,
            "enemy_kinds": [
                {"name": t.name, "max_hp": t.max_hp, "damage": t.damage, "behaviour": t.behaviour}
                for t in self.enemy_kinds
            ],
            "item_kinds": [
                {"name": t.name, "category": t.category, "magnitude": t.magnitude}
                for t in self.item_kinds
            ],
            "hunger_per_turn": self.hunger_per_turn,
            "seed_list": list(self.seed_list),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GameConfig":
        cfg = cls(
            level_count=int(data["level_count"]),
            level_width=int(data["level_width"]),
            level_height=int(data["level_height"]),
            enemy_kinds=tuple(
                EnemyTemplate(d["name"], int(d["max_hp"]), int(d["damage"]), d["behaviour"])
                for d in data["enemy_kinds"]
            ),
            item_kinds=tuple(
                ItemTemplate(d["name"], d["category"], int(d["magnitude"]))
                for d in data["item_kinds"]
            ),
            hunger_per_turn=int(data["hunger_per_turn"]),
            seed_list=tuple(int(s) for s in data["seed_list"]),
        )
        cfg.validate()
        return cfg


@dataclass
class ActionRequest:
    """One parametric invocation of the game API."""

    action_type: str
    parameters: dict[str, str] = field(default_factory=dict)

    def canonical(self) -> tuple:
        """Hashable identity used for set semantics and digests."""
        return (self.action_type, tuple(sorted(self.parameters.items())))

    def to_dict(self) -> dict:
        return {"action_type": self.action_type, "parameters": dict(self.parameters)}


@dataclass
class GameEvent:
    """One observed consequence of stepping the world.

    ``carrying`` and ``upgrades`` snapshot the player's state at the
    moment of the event; ``position`` is where the event happened
    (the acting entity's tile).
    """

    turn: int
    kind: str
    action_type: str
    subject_item: Optional[str] = None
    target: Optional[str] = None
    carrying: tuple[str, ...] = ()
    upgrades: tuple[str, ...] = ()
    position: tuple[int, int, int] = (0, 0, 0)  # (level, x, y)

    def to_dict(self) -> dict:
        return {
            "turn": self.turn,
            "kind": self.kind,
            "action_type": self.action_type,
            "subject_item": self.subject_item,
            "target": self.target,
            "carrying": list(self.carrying),
            "upgrades": list(self.upgrades),
            "position": list(self.position),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GameEvent":
        return cls(
            turn=int(data["turn"]),
            kind=data["kind"],
            action_type=data["action_type"],
            subject_item=data.get("subject_item"),
            target=data.get("target"),
            carrying=tuple(data.get("carrying", ())),
            upgrades=tuple(data.get("upgrades", ())),
            position=tuple(data.get("position", (0, 0, 0))),
        )
