"""World state, stepping, legal actions, observation, reachability.

``step`` mutates the passed state in place and returns it alongside the
emitted events; callers that need an untouched copy take ``clone()``
first.  A rejected request raises :class:`IllegalAction` before any
mutation, so the state is unchanged and the exception carries a
``blocked`` event describing the attempt.
"""

from __future__ import annotations

import copy
import hashlib
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from playprobe.rng import Rng, mix_seed
from playprobe.dungeon import generate
from playprobe.dungeon.types import (
    ACTION_SCHEMAS,
    CLOSED_DOOR,
    DIRECTIONS,
    DIRECTION_ORDER,
    ENEMY_CHASE_RADIUS,
    ENTRY,
    FLOOR,
    GameConfig,
    GameEvent,
    HUNGER_MAX,
    IllegalAction,
    ActionRequest,
    LevelOutOfRange,
    OPEN_DOOR,
    PASSABLE_TILES,
    PLAYER_MAX_HP,
    STAIRS_DOWN,
    TerminalState,
    THROW_RANGE,
    TORCH_VISIBILITY_BONUS,
    UPGRADE_ARMED,
    UPGRADE_TORCH_LIT,
    VISIBILITY_RADIUS,
    WALL,
)

TERMINAL_NONE = "none"
TERMINAL_DEATH = "death"
TERMINAL_VICTORY = "victory"


@dataclass
class Entity:
    id: str
    kind: str
    level: int
    pos: tuple[int, int]
    hp: int

    def to_dict(self) -> dict:
        return {"id": self.id, "kind": self.kind, "level": self.level,
                "pos": list(self.pos), "hp": self.hp}


@dataclass
class Player:
    pos: tuple[int, int]
    hp: int = PLAYER_MAX_HP
    hunger: int = 0
    inventory: list[str] = field(default_factory=list)   # item entity ids
    upgrades: set[str] = field(default_factory=set)
    equipped_weapon: Optional[str] = None                # item id, must be carried

    def to_dict(self) -> dict:
        return {
            "pos": list(self.pos),
            "hp": self.hp,
            "hunger": self.hunger,
            "inventory": list(self.inventory),
            "upgrades": sorted(self.upgrades),
            "equipped_weapon": self.equipped_weapon,
        }


@dataclass
class WorldState:
    config: GameConfig
    seed: int
    current_level_index: int
    grids: list[list[list[str]]]        # [level][y][x]
    entries: list[tuple[int, int]]
    stairs: list[tuple[int, int]]
    entities: list[Entity]              # enemies and ground items, all levels
    item_names: dict[str, str]          # item id -> template name (ground + carried)
    player: Player
    turn: int
    rng: Rng
    terminal: str = TERMINAL_NONE

    def clone(self) -> "WorldState":
        return copy.deepcopy(self)

    # -- lookups ---------------------------------------------------------

    def enemy_names(self) -> set[str]:
        return {t.name for t in self.config.enemy_kinds}

    def item_template(self, name: str):
        for t in self.config.item_kinds:
            if t.name == name:
                return t
        return None

    def entities_on_level(self, level: int) -> list[Entity]:
        return [e for e in self.entities if e.level == level]

    def enemies_on_level(self, level: int) -> list[Entity]:
        names = self.enemy_names()
        return [e for e in self.entities if e.level == level and e.kind in names]

    def items_on_level(self, level: int) -> list[Entity]:
        names = self.enemy_names()
        return [e for e in self.entities if e.level == level and e.kind not in names]

    def entity_by_id(self, entity_id: str) -> Optional[Entity]:
        for e in self.entities:
            if e.id == entity_id:
                return e
        return None

    def tile(self, level: int, x: int, y: int) -> str:
        return self.grids[level][y][x]

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.config.level_width and 0 <= y < self.config.level_height

    def carrying_names(self) -> tuple[str, ...]:
        return tuple(sorted(self.item_names[i] for i in self.player.inventory))

    def upgrade_tags(self) -> tuple[str, ...]:
        return tuple(sorted(self.player.upgrades))

    def equipped_weapon_name(self) -> Optional[str]:
        if self.player.equipped_weapon is None:
            return None
        return self.item_names.get(self.player.equipped_weapon)

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "seed": self.seed,
            "current_level_index": self.current_level_index,
            "grids": self.grids,
            "entries": [list(p) for p in self.entries],
            "stairs": [list(p) for p in self.stairs],
            "entities": [e.to_dict() for e in sorted(self.entities, key=lambda e: e.id)],
            "item_names": dict(sorted(self.item_names.items())),
            "player": self.player.to_dict(),
            "turn": self.turn,
            "rng_state": self.rng.state,
            "rng_seed": self.rng.seed,
            "terminal": self.terminal,
        }


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def state_digest(state: WorldState) -> str:
    """Stable SHA-256 digest of the canonical state serialization."""
    return hashlib.sha256(canonical_json(state.to_dict()).encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# World construction
# ---------------------------------------------------------------------------

def new_game(seed: int, config: GameConfig) -> WorldState:
    """Generate a full world.  Pure function of (seed, config)."""
    config.validate()
    grids, entries, stairs = [], [], []
    entities: list[Entity] = []
    item_names: dict[str, str] = {}
    enemy_counter = 0
    item_counter = 0
    for level in range(config.level_count):
        level_rng = Rng(mix_seed(seed, 0x11, level))
        gen = generate.generate_level(level_rng, config, level)
        grids.append(gen.grid)
        entries.append(gen.entry)
        stairs.append(gen.stairs)
        for kind, pos in gen.enemy_spawns:
            template = next(t for t in config.enemy_kinds if t.name == kind)
            entities.append(Entity(id=f"e{enemy_counter}", kind=kind, level=level,
                                   pos=pos, hp=template.max_hp))
            enemy_counter += 1
        for kind, pos in gen.item_spawns:
            item_id = f"i{item_counter}"
            entities.append(Entity(id=item_id, kind=kind, level=level, pos=pos, hp=0))
            item_names[item_id] = kind
            item_counter += 1

    return WorldState(
        config=config,
        seed=seed,
        current_level_index=0,
        grids=grids,
        entries=entries,
        stairs=stairs,
        entities=entities,
        item_names=item_names,
        player=Player(pos=entries[0]),
        turn=0,
        rng=Rng(mix_seed(seed, 0x22)),
    )


# ---------------------------------------------------------------------------
# Stepping
# ---------------------------------------------------------------------------

def _blocked(state: WorldState, req: ActionRequest, reason: str,
             target: Optional[str] = None) -> IllegalAction:
    event = GameEvent(
        turn=state.turn,
        kind="blocked",
        action_type=req.action_type,
        subject_item=None,
        target=target,
        carrying=state.carrying_names(),
        upgrades=state.upgrade_tags(),
        position=(state.current_level_index, *state.player.pos),
    )
    return IllegalAction(reason, event)


def _event(state: WorldState, kind: str, req: ActionRequest,
           subject_item: Optional[str] = None, target: Optional[str] = None,
           position: Optional[tuple[int, int, int]] = None) -> GameEvent:
    return GameEvent(
        turn=state.turn,
        kind=kind,
        action_type=req.action_type,
        subject_item=subject_item,
        target=target,
        carrying=state.carrying_names(),
        upgrades=state.upgrade_tags(),
        position=position or (state.current_level_index, *state.player.pos),
    )


def _enemy_at(state: WorldState, level: int, pos: tuple[int, int]) -> Optional[Entity]:
    for e in state.enemies_on_level(level):
        if e.pos == pos:
            return e
    return None


def _passable_for_move(state: WorldState, level: int, x: int, y: int) -> bool:
    if not state.in_bounds(x, y):
        return False
    if state.tile(level, x, y) not in PASSABLE_TILES:
        return False
    return _enemy_at(state, level, (x, y)) is None


def _attack_damage(state: WorldState) -> int:
    base = 1
    weapon = state.player.equipped_weapon
    if weapon is not None and weapon in state.player.inventory:
        template = state.item_template(state.item_names[weapon])
        if template is not None:
            base += template.magnitude
    return base


def _remove_from_inventory(state: WorldState, item_id: str) -> None:
    state.player.inventory.remove(item_id)
    if state.player.equipped_weapon == item_id:
        state.player.equipped_weapon = None
        state.player.upgrades.discard(UPGRADE_ARMED)


def _validate_request(state: WorldState, req: ActionRequest) -> None:
    schema = ACTION_SCHEMAS.get(req.action_type)
    if schema is None:
        raise _blocked(state, req, f"unknown action type: {req.action_type}")
    if tuple(sorted(req.parameters)) != tuple(sorted(schema)):
        raise _blocked(
            state, req,
            f"parameters for {req.action_type} must be exactly {list(schema)}",
        )
    for name in ("direction",):
        if name in req.parameters and req.parameters[name] not in DIRECTIONS:
            raise _blocked(state, req, f"bad direction: {req.parameters[name]}")


def _resolve_player_action(state: WorldState, req: ActionRequest) -> list[GameEvent]:
    level = state.current_level_index
    player = state.player
    act = req.action_type
    events: list[GameEvent] = []

    if act == "move":
        dx, dy = DIRECTIONS[req.parameters["direction"]]
        nx, ny = player.pos[0] + dx, player.pos[1] + dy
        if not state.in_bounds(nx, ny):
            raise _blocked(state, req, "cannot move out of bounds", target="wall")
        tile = state.tile(level, nx, ny)
        if tile == WALL:
            raise _blocked(state, req, "a wall blocks the way", target=WALL)
        if tile == CLOSED_DOOR:
            raise _blocked(state, req, "a closed door blocks the way", target=CLOSED_DOOR)
        enemy = _enemy_at(state, level, (nx, ny))
        if enemy is not None:
            raise _blocked(state, req, f"{enemy.kind} blocks the way", target=enemy.kind)
        player.pos = (nx, ny)
        events.append(_event(state, "moved", req, target=tile))

    elif act == "attack":
        target_id = req.parameters["target"]
        enemy = state.entity_by_id(target_id)
        if enemy is None or enemy.level != level or enemy.kind not in state.enemy_names():
            raise _blocked(state, req, f"no such enemy: {target_id}")
        if abs(enemy.pos[0] - player.pos[0]) + abs(enemy.pos[1] - player.pos[1]) != 1:
            raise _blocked(state, req, f"{enemy.kind} is not adjacent", target=enemy.kind)
        weapon_name = state.equipped_weapon_name()
        enemy.hp -= _attack_damage(state)
        events.append(_event(state, "attacked", req, subject_item=weapon_name,
                             target=enemy.kind))
        if enemy.hp <= 0:
            state.entities.remove(enemy)
            events.append(_event(state, "enemy_defeated", req, subject_item=weapon_name,
                                 target=enemy.kind))

    elif act == "pick_up":
        item_id = req.parameters["item"]
        item = state.entity_by_id(item_id)
        if (item is None or item.level != level or item.kind in state.enemy_names()
                or item.pos != player.pos):
            raise _blocked(state, req, f"no item {item_id} here")
        state.entities.remove(item)
        player.inventory.append(item_id)
        events.append(_event(state, "item_picked", req, subject_item=item.kind))

    elif act == "use":
        item_id = req.parameters["item"]
        if item_id not in player.inventory:
            raise _blocked(state, req, f"not carrying {item_id}")
        name = state.item_names[item_id]
        template = state.item_template(name)
        category = template.category if template else ""
        if category == "weapon":
            player.equipped_weapon = item_id
            player.upgrades.add(UPGRADE_ARMED)
            events.append(_event(state, "item_used", req, subject_item=name))
        elif category == "potion":
            player.hp = min(PLAYER_MAX_HP, player.hp + template.magnitude)
            _remove_from_inventory(state, item_id)
            events.append(_event(state, "item_used", req, subject_item=name))
        elif category == "torch":
            player.upgrades.add(UPGRADE_TORCH_LIT)
            _remove_from_inventory(state, item_id)
            events.append(_event(state, "item_used", req, subject_item=name))
        elif category == "key":
            door = None
            for direction in DIRECTION_ORDER:
                dx, dy = DIRECTIONS[direction]
                nx, ny = player.pos[0] + dx, player.pos[1] + dy
                if state.in_bounds(nx, ny) and state.tile(level, nx, ny) == CLOSED_DOOR:
                    door = (nx, ny)
                    break
            if door is None:
                raise _blocked(state, req, "no closed door adjacent to unlock")
            state.grids[level][door[1]][door[0]] = OPEN_DOOR
            _remove_from_inventory(state, item_id)
            events.append(_event(state, "door_unlocked", req, subject_item=name,
                                 target=CLOSED_DOOR))
        else:
            raise _blocked(state, req, f"{name} cannot be used", target=name)

    elif act == "eat":
        item_id = req.parameters["item"]
        if item_id not in player.inventory:
            raise _blocked(state, req, f"not carrying {item_id}")
        name = state.item_names[item_id]
        template = state.item_template(name)
        if template is None or template.category != "food":
            raise _blocked(state, req, f"{name} is not food", target=name)
        player.hunger = max(0, player.hunger - template.magnitude)
        _remove_from_inventory(state, item_id)
        events.append(_event(state, "item_eaten", req, subject_item=name))

    elif act == "throw":
        item_id = req.parameters["item"]
        if item_id not in player.inventory:
            raise _blocked(state, req, f"not carrying {item_id}")
        direction = req.parameters["direction"]
        dx, dy = DIRECTIONS[direction]
        name = state.item_names[item_id]
        template = state.item_template(name)
        damage = template.magnitude if template and template.category == "stone" else 1
        _remove_from_inventory(state, item_id)
        hit_target = FLOOR
        hit_pos = (state.current_level_index, *player.pos)
        victim: Optional[Entity] = None
        x, y = player.pos
        for _ in range(THROW_RANGE):
            x, y = x + dx, y + dy
            if not state.in_bounds(x, y):
                hit_target = WALL
                break
            tile = state.tile(level, x, y)
            if tile == WALL or tile == CLOSED_DOOR or tile == OPEN_DOOR:
                hit_target = tile
                hit_pos = (level, x, y)
                break
            enemy = _enemy_at(state, level, (x, y))
            if enemy is not None:
                victim = enemy
                hit_target = enemy.kind
                hit_pos = (level, x, y)
                break
            hit_pos = (level, x, y)
        events.append(_event(state, "item_thrown", req, subject_item=name,
                             target=hit_target, position=hit_pos))
        if victim is not None:
            victim.hp -= max(1, damage)
            if victim.hp <= 0:
                state.entities.remove(victim)
                events.append(_event(state, "enemy_defeated", req, subject_item=name,
                                     target=victim.kind, position=hit_pos))

    elif act == "open":
        dx, dy = DIRECTIONS[req.parameters["direction"]]
        nx, ny = player.pos[0] + dx, player.pos[1] + dy
        if not state.in_bounds(nx, ny) or state.tile(level, nx, ny) != CLOSED_DOOR:
            raise _blocked(state, req, "no closed door in that direction")
        state.grids[level][ny][nx] = OPEN_DOOR
        events.append(_event(state, "door_opened", req, target=CLOSED_DOOR))

    elif act == "descend":
        if state.tile(level, *player.pos) != STAIRS_DOWN:
            raise _blocked(state, req, "not standing on stairs")
        if level + 1 >= state.config.level_count:
            state.terminal = TERMINAL_VICTORY
            events.append(_event(state, "won", req, target=STAIRS_DOWN))
        else:
            state.current_level_index = level + 1
            player.pos = state.entries[level + 1]
            events.append(_event(state, "level_descended", req, target=STAIRS_DOWN,
                                 position=(level, *state.stairs[level])))

    elif act == "wait":
        events.append(_event(state, "waited", req))

    return events


def _enemy_phase(state: WorldState, req: ActionRequest) -> list[GameEvent]:
    events: list[GameEvent] = []
    level = state.current_level_index
    player = state.player
    enemies = sorted(state.enemies_on_level(level), key=lambda e: int(e.id[1:]))
    for enemy in enemies:
        if state.terminal != TERMINAL_NONE:
            break
        template = next(t for t in state.config.enemy_kinds if t.name == enemy.kind)
        ex, ey = enemy.pos
        px, py = player.pos
        dist = abs(ex - px) + abs(ey - py)
        if dist == 1:
            player.hp = max(0, player.hp - template.damage)
            events.append(_event(state, "damage_taken", req, target=enemy.kind))
            continue
        if template.behaviour == "guard":
            continue
        if template.behaviour == "wanderer":
            # Always consume one draw so the stream is position-independent.
            direction = DIRECTION_ORDER[state.rng.randrange(4)]
            dx, dy = DIRECTIONS[direction]
            nx, ny = ex + dx, ey + dy
            if _passable_for_move(state, level, nx, ny) and (nx, ny) != player.pos:
                enemy.pos = (nx, ny)
                events.append(_event(state, "enemy_moved", req, target=enemy.kind,
                                     position=(level, nx, ny)))
        elif template.behaviour == "chaser" and dist <= ENEMY_CHASE_RADIUS:
            dx = 0 if ex == px else (1 if px > ex else -1)
            dy = 0 if ey == py else (1 if py > ey else -1)
            if abs(px - ex) >= abs(py - ey):
                tries = ((dx, 0), (0, dy))
            else:
                tries = ((0, dy), (dx, 0))
            for tdx, tdy in tries:
                if tdx == 0 and tdy == 0:
                    continue
                nx, ny = ex + tdx, ey + tdy
                if (nx, ny) == player.pos:
                    continue
                if _passable_for_move(state, level, nx, ny):
                    enemy.pos = (nx, ny)
                    events.append(_event(state, "enemy_moved", req, target=enemy.kind,
                                         position=(level, nx, ny)))
                    break
    return events


def step(state: WorldState, req: ActionRequest) -> tuple[WorldState, list[GameEvent]]:
    """Apply one action.  Mutates and returns ``state``.

    Raises :class:`TerminalState` when the game already ended and
    :class:`IllegalAction` (state untouched) for invalid requests.
    """
    if state.terminal != TERMINAL_NONE:
        raise TerminalState(f"game over: {state.terminal}")
    _validate_request(state, req)

    events = _resolve_player_action(state, req)

    if state.terminal == TERMINAL_NONE:
        events.extend(_enemy_phase(state, req))

        state.player.hunger = min(HUNGER_MAX, state.player.hunger + state.config.hunger_per_turn)
        if state.player.hunger >= HUNGER_MAX:
            state.player.hp = max(0, state.player.hp - 1)
            events.append(_event(state, "damage_taken", req, target="starvation"))

        if state.player.hp <= 0:
            state.terminal = TERMINAL_DEATH
            events.append(_event(state, "died", req))

    state.turn += 1
    return state, events


# ---------------------------------------------------------------------------
# Legal actions
# ---------------------------------------------------------------------------

def legal_actions(state: WorldState) -> list[ActionRequest]:
    """All requests guaranteed not to raise IllegalAction in this state.

    Complete over single-parameter instantiations of current entities
    and inventory.
    """
    if state.terminal != TERMINAL_NONE:
        raise TerminalState(f"game over: {state.terminal}")
    level = state.current_level_index
    player = state.player
    out: list[ActionRequest] = []

    for direction, (dx, dy) in DIRECTIONS.items():
        nx, ny = player.pos[0] + dx, player.pos[1] + dy
        if _passable_for_move(state, level, nx, ny):
            out.append(ActionRequest("move", {"direction": direction}))
        if state.in_bounds(nx, ny) and state.tile(level, nx, ny) == CLOSED_DOOR:
            out.append(ActionRequest("open", {"direction": direction}))

    for enemy in state.enemies_on_level(level):
        if abs(enemy.pos[0] - player.pos[0]) + abs(enemy.pos[1] - player.pos[1]) == 1:
            out.append(ActionRequest("attack", {"target": enemy.id}))

    for item in state.items_on_level(level):
        if item.pos == player.pos:
            out.append(ActionRequest("pick_up", {"item": item.id}))

    has_adjacent_door = any(
        state.in_bounds(player.pos[0] + dx, player.pos[1] + dy)
        and state.tile(level, player.pos[0] + dx, player.pos[1] + dy) == CLOSED_DOOR
        for dx, dy in DIRECTIONS.values()
    )
    for item_id in player.inventory:
        template = state.item_template(state.item_names[item_id])
        category = template.category if template else ""
        if category in ("weapon", "potion", "torch"):
            out.append(ActionRequest("use", {"item": item_id}))
        elif category == "key" and has_adjacent_door:
            out.append(ActionRequest("use", {"item": item_id}))
        if category == "food":
            out.append(ActionRequest("eat", {"item": item_id}))
        for direction in DIRECTIONS:
            out.append(ActionRequest("throw", {"item": item_id, "direction": direction}))

    if state.tile(level, *player.pos) == STAIRS_DOWN:
        out.append(ActionRequest("descend", {}))
    out.append(ActionRequest("wait", {}))

    # De-duplicate while preserving order (inventory can hold duplicates
    # of an id only if corrupted; this also guards against that).
    seen: set[tuple] = set()
    unique = []
    for req in out:
        key = req.canonical()
        if key not in seen:
            seen.add(key)
            unique.append(req)
    return unique


# ---------------------------------------------------------------------------
# Observation
# ---------------------------------------------------------------------------

@dataclass
class Observation:
    snapshot: dict
    text: str


def _visibility_radius(state: WorldState) -> int:
    radius = VISIBILITY_RADIUS
    if UPGRADE_TORCH_LIT in state.player.upgrades:
        radius += TORCH_VISIBILITY_BONUS
    return radius


def observe(state: WorldState) -> Observation:
    """Structured snapshot plus deterministic text rendering."""
    level = state.current_level_index
    px, py = state.player.pos
    radius = _visibility_radius(state)

    visible_tiles = []
    for y in range(max(0, py - radius), min(state.config.level_height, py + radius + 1)):
        for x in range(max(0, px - radius), min(state.config.level_width, px + radius + 1)):
            visible_tiles.append([x, y, state.tile(level, x, y)])

    visible_entities = []
    enemy_names = state.enemy_names()
    for e in sorted(state.entities_on_level(level), key=lambda e: (e.kind, e.id)):
        if abs(e.pos[0] - px) <= radius and abs(e.pos[1] - py) <= radius:
            visible_entities.append({
                "id": e.id,
                "kind": e.kind,
                "x": e.pos[0],
                "y": e.pos[1],
                "hp": e.hp,
                "is_enemy": e.kind in enemy_names,
                "adjacent": abs(e.pos[0] - px) + abs(e.pos[1] - py) == 1,
            })

    inventory_counts: dict[str, int] = {}
    for item_id in state.player.inventory:
        name = state.item_names[item_id]
        inventory_counts[name] = inventory_counts.get(name, 0) + 1

    passable = {}
    adjacent_doors = []
    for direction, (dx, dy) in DIRECTIONS.items():
        nx, ny = px + dx, py + dy
        passable[direction] = _passable_for_move(state, level, nx, ny)
        if state.in_bounds(nx, ny) and state.tile(level, nx, ny) == CLOSED_DOOR:
            adjacent_doors.append(direction)
    adjacent_doors.sort()

    sx, sy = state.stairs[level]
    stairs_visible = abs(sx - px) <= radius and abs(sy - py) <= radius

    snapshot = {
        "turn": state.turn,
        "level": level,
        "level_count": state.config.level_count,
        "position": [px, py],
        "hp": state.player.hp,
        "max_hp": PLAYER_MAX_HP,
        "hunger": state.player.hunger,
        "hunger_max": HUNGER_MAX,
        "upgrades": sorted(state.player.upgrades),
        "on_tile": state.tile(level, px, py),
        "inventory": dict(sorted(inventory_counts.items())),
        "inventory_ids": {
            name: sorted(i for i in state.player.inventory if state.item_names[i] == name)
            for name in sorted(inventory_counts)
        },
        "passable": passable,
        "adjacent_doors": adjacent_doors,
        "stairs_at": [sx, sy] if stairs_visible else None,
        "visible_tiles": visible_tiles,
        "visible_entities": visible_entities,
        "terminal": state.terminal,
    }
    return Observation(snapshot=snapshot, text=render_observation(snapshot))


_TILE_GLYPHS = {
    FLOOR: ".",
    WALL: "#",
    CLOSED_DOOR: "+",
    OPEN_DOOR: "/",
    STAIRS_DOWN: ">",
    ENTRY: "<",
}


def render_observation(snapshot: dict) -> str:
    """Render a snapshot to text.  Pure; used verbatim in prompts."""
    px, py = snapshot["position"]
    lines = [
        f"turn: {snapshot['turn']}",
        f"level: {snapshot['level'] + 1} of {snapshot['level_count']}",
        f"position: ({px}, {py})",
        f"hp: {snapshot['hp']}/{snapshot['max_hp']}",
        f"hunger: {snapshot['hunger']}/{snapshot['hunger_max']}",
        "upgrades: " + (", ".join(snapshot["upgrades"]) if snapshot["upgrades"] else "none"),
        f"on tile: {snapshot['on_tile']}",
        "inventory: " + (
            ", ".join(f"{name} x{count}" for name, count in snapshot["inventory"].items())
            if snapshot["inventory"] else "empty"
        ),
        "passable: " + " ".join(
            f"{d}={'yes' if snapshot['passable'][d] else 'no'}"
            for d in ("north", "south", "east", "west")
        ),
    ]
    if snapshot["adjacent_doors"]:
        lines.append("adjacent doors: " + ", ".join(snapshot["adjacent_doors"]))
    if snapshot["stairs_at"] is not None:
        lines.append(f"stairs at: ({snapshot['stairs_at'][0]}, {snapshot['stairs_at'][1]})")

    tiles = {(x, y): t for x, y, t in snapshot["visible_tiles"]}
    if tiles:
        xs = [x for x, _ in tiles]
        ys = [y for _, y in tiles]
        entity_glyphs = {}
        for ent in snapshot["visible_entities"]:
            glyph = ent["kind"][0] if ent["is_enemy"] else "*"
            entity_glyphs[(ent["x"], ent["y"])] = glyph
        lines.append("map:")
        for y in range(min(ys), max(ys) + 1):
            row = []
            for x in range(min(xs), max(xs) + 1):
                if (x, y) == (px, py):
                    row.append("@")
                elif (x, y) in entity_glyphs:
                    row.append(entity_glyphs[(x, y)])
                else:
                    row.append(_TILE_GLYPHS.get(tiles.get((x, y), WALL), "?"))
            lines.append("  " + "".join(row))

    if snapshot["visible_entities"]:
        lines.append("entities:")
        for ent in snapshot["visible_entities"]:
            role = "enemy" if ent["is_enemy"] else "item"
            suffix = f" hp {ent['hp']}" if ent["is_enemy"] else ""
            adj = " adjacent" if ent["adjacent"] else ""
            lines.append(
                f"  {ent['kind']} [{ent['id']}] ({role}) at ({ent['x']}, {ent['y']}){suffix}{adj}"
            )
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Reachability
# ---------------------------------------------------------------------------

def reachable_tiles(state: WorldState, level: int) -> set[tuple[int, int]]:
    """Non-wall tiles connected to the level entry by 4-adjacency.

    Closed doors count as traversable; this is the navigation-coverage
    denominator.
    """
    if not 0 <= level < state.config.level_count:
        raise LevelOutOfRange(f"level {level} outside [0, {state.config.level_count})")
    grid = state.grids[level]
    start = state.entries[level]
    seen = {start}
    queue = deque([start])
    while queue:
        x, y = queue.popleft()
        for nx, ny in ((x, y - 1), (x + 1, y), (x, y + 1), (x - 1, y)):
            if state.in_bounds(nx, ny) and (nx, ny) not in seen and grid[ny][nx] != WALL:
                seen.add((nx, ny))
                queue.append((nx, ny))
    return seen
