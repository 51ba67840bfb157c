"""Shipped game content: default configuration, descriptions, and the
abstract entity vocabulary used by trait-to-entity mapping.

Everything here is plain data.  The combination rules that pair with
this config live in :mod:`playprobe.metrics` consumers via
``default_combination_rules``.
"""

from __future__ import annotations

from dataclasses import dataclass

from playprobe.dungeon.types import EnemyTemplate, GameConfig, ItemTemplate

# Abstract entity roles a personality profile can weight.  Game-specific
# nouns are attached to these roles via an EntityMapping.
ABSTRACT_ENTITIES = (
    "Enemy Hazard",
    "Environment Hazard",
    "Collectible Item",
    "Health Resource",
    "Utility Tool",
    "Progression Gate",
    "Level Exit",
    "Point Of Interest",
    "Final Challenge",
)


DEFAULT_ENEMIES = (
    EnemyTemplate(name="rat", max_hp=2, damage=1, behaviour="chaser"),
    EnemyTemplate(name="bat", max_hp=1, damage=1, behaviour="wanderer"),
    EnemyTemplate(name="slime", max_hp=3, damage=1, behaviour="guard"),
    EnemyTemplate(name="skeleton", max_hp=4, damage=2, behaviour="chaser"),
)

DEFAULT_ITEMS = (
    ItemTemplate(name="sword", category="weapon", magnitude=2),
    ItemTemplate(name="health potion", category="potion", magnitude=4),
    ItemTemplate(name="bread", category="food", magnitude=40),
    ItemTemplate(name="brass key", category="key", magnitude=0),
    ItemTemplate(name="stone", category="stone", magnitude=2),
    ItemTemplate(name="torch", category="torch", magnitude=0),
)

DEFAULT_SEED_LIST = (101, 202, 303, 404, 505, 606, 707, 808, 909, 1010)


def default_config() -> GameConfig:
    return GameConfig(
        level_count=4,
        level_width=16,
        level_height=12,
        enemy_kinds=DEFAULT_ENEMIES,
        item_kinds=DEFAULT_ITEMS,
        hunger_per_turn=1,
        seed_list=DEFAULT_SEED_LIST,
    )


# Abstract role -> (game term used in prompts, source note).  The note
# records where in the game definition the term comes from.
DEFAULT_ENTITY_TERMS = {
    "Enemy Hazard": (
        "enemies (rats, bats, slimes, and skeletons)",
        "enemy templates in the default config"),
    "Environment Hazard": (
        "starvation from rising hunger",
        "hunger tick rule in the game description"),
    "Collectible Item": (
        "floor items (swords, potions, bread, keys, stones, torches)",
        "item templates in the default config"),
    "Health Resource": (
        "health potions and bread",
        "potion and food item categories"),
    "Utility Tool": (
        "keys, torches, and throwable stones",
        "key, torch, and stone item categories"),
    "Progression Gate": (
        "closed doors",
        "closed_door tile in the tile vocabulary"),
    "Level Exit": (
        "the stairs down",
        "stairs_down tile in the tile vocabulary"),
    "Point Of Interest": (
        "unexplored rooms and doorways",
        "room-and-corridor level layout"),
    "Final Challenge": (
        "the deepest dungeon level and its skeletons",
        "last level of the default config"),
}


GAME_DESCRIPTION = """\
You are playing a turn-based dungeon crawl on a square grid.  Each level
is a maze of rooms and corridors seen from above.  You descend by
standing on the stairs_down tile and issuing `descend`; descending past
the last level wins the game.  Walls block movement; closed doors must
be opened (`open <direction>`) or unlocked with a brass key before you
can walk through.  Enemies (rat, bat, slime, skeleton) fight back when
adjacent: each turn an adjacent enemy hits you.  `attack` strikes an
adjacent enemy; equipping a sword (`use`) raises your damage.  `throw`
hurls a carried item up to four tiles in a straight line — stones hurt
what they hit.  `eat` consumes food to push back hunger, which rises
every turn and starves you at the cap.  `use` on a health potion heals,
on a torch extends how far you can see.  You lose when hp reaches zero.
"""

ACTION_GUIDE = """\
Available action types and their parameters:
  move direction=<north|south|east|west>
  attack target=<enemy id>
  pick_up item=<item id>
  use item=<item id>
  throw item=<item id> direction=<north|south|east|west>
  eat item=<item id>
  open direction=<north|south|east|west>
  descend
  wait
Entity ids appear in square brackets in the observation text.
"""


@dataclass(frozen=True)
class GameDefinitions:
    """Bundle handed to agents: config, prose, and the entity terms."""

    config: GameConfig
    description: str
    action_guide: str
    entity_terms: dict

    @staticmethod
    def default() -> "GameDefinitions":
        return GameDefinitions(
            config=default_config(),
            description=GAME_DESCRIPTION,
            action_guide=ACTION_GUIDE,
            entity_terms=dict(DEFAULT_ENTITY_TERMS),
        )

    @staticmethod
    def for_config(config: GameConfig) -> "GameDefinitions":
        """Definitions for an arbitrary config: the standard rule prose
        with that config's enemy roster substituted.  The entity terms
        still describe the default content; campaigns with custom
        content should load their own mapping file."""
        enemies = ", ".join(t.name for t in config.enemy_kinds)
        description = GAME_DESCRIPTION.replace("rat, bat, slime, skeleton",
                                               enemies)
        return GameDefinitions(
            config=config,
            description=description,
            action_guide=ACTION_GUIDE,
            entity_terms=dict(DEFAULT_ENTITY_TERMS),
        )
