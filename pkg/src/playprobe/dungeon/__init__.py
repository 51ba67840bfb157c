"""Embedded deterministic turn-based dungeon crawler.

A seeded, reproducible grid game with a parametric action API.  The
world is a pure function of (seed, config); stepping is deterministic;
every state delta is described by emitted events, which carry the
fields the coverage metrics match on.
"""

from playprobe.dungeon.types import (
    ActionRequest,
    ConfigInvalid,
    DungeonError,
    EnemyTemplate,
    GameConfig,
    GameEvent,
    IllegalAction,
    ItemTemplate,
    LevelOutOfRange,
    TerminalState,
    ACTION_SCHEMAS,
    DIRECTIONS,
    DIRECTION_ORDER,
    HUNGER_MAX,
    PLAYER_MAX_HP,
    THROW_RANGE,
    VISIBILITY_RADIUS,
)
from playprobe.dungeon.engine import (
    Observation,
    WorldState,
    legal_actions,
    new_game,
    observe,
    reachable_tiles,
    render_observation,
    state_digest,
    step,
)

__all__ = [
    "ACTION_SCHEMAS",
    "ActionRequest",
    "ConfigInvalid",
    "DIRECTIONS",
    "DIRECTION_ORDER",
    "DungeonError",
    "EnemyTemplate",
    "GameConfig",
    "GameEvent",
    "HUNGER_MAX",
    "IllegalAction",
    "ItemTemplate",
    "LevelOutOfRange",
    "Observation",
    "PLAYER_MAX_HP",
    "THROW_RANGE",
    "TerminalState",
    "VISIBILITY_RADIUS",
    "WorldState",
    "legal_actions",
    "new_game",
    "observe",
    "reachable_tiles",
    "render_observation",
    "state_digest",
    "step",
]
