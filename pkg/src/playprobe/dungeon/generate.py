"""Seeded level generation: rooms, corridors, doors, spawns.

Rooms are carved as non-overlapping rectangles, consecutive rooms are
joined with L-shaped corridors, and corridor cells pinched between two
walls may become closed doors.  Connectivity from entry to stairs is
verified with a flood fill and repaired by carving a direct corridor if
a pathological layout ever slips through.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from playprobe.rng import Rng
from playprobe.dungeon.types import (
    CLOSED_DOOR,
    ENTRY,
    FLOOR,
    GameConfig,
    STAIRS_DOWN,
    WALL,
)

# Minimum spacing between an enemy spawn and the level entry.
ENEMY_SAFE_RADIUS = 3


@dataclass
class GeneratedLevel:
    grid: list[list[str]]          # grid[y][x]
    entry: tuple[int, int]
    stairs: tuple[int, int]
    enemy_spawns: list[tuple[str, tuple[int, int]]]  # (template name, pos)
    item_spawns: list[tuple[str, tuple[int, int]]]


def _carve_rooms(grid, rng: Rng, width: int, height: int) -> list[tuple[int, int, int, int]]:
    """Carve random non-overlapping rooms; returns (x, y, w, h) rects."""
    rooms: list[tuple[int, int, int, int]] = []
    interior_w, interior_h = width - 2, height - 2
    if interior_w < 5 or interior_h < 5:
        # Too small for multiple rooms: one room spanning the interior.
        for y in range(1, height - 1):
            for x in range(1, width - 1):
                grid[y][x] = FLOOR
        rooms.append((1, 1, interior_w, interior_h))
        return rooms

    target = max(2, (width * height) // 40)
    attempts = 0
    while len(rooms) < target and attempts < 60:
        attempts += 1
        w = rng.randint(3, min(7, interior_w))
        h = rng.randint(3, min(5, interior_h))
        x = rng.randint(1, width - 1 - w)
        y = rng.randint(1, height - 1 - h)
        candidate = (x, y, w, h)
        if any(
            x < rx + rw + 1 and rx < x + w + 1 and y < ry + rh + 1 and ry < y + h + 1
            for rx, ry, rw, rh in rooms
        ):
            continue
        rooms.append(candidate)
        for yy in range(y, y + h):
            for xx in range(x, x + w):
                grid[yy][xx] = FLOOR
    if not rooms:
        for y in range(1, height - 1):
            for x in range(1, width - 1):
                grid[y][x] = FLOOR
        rooms.append((1, 1, interior_w, interior_h))
    return rooms


def _carve_corridor(grid, a: tuple[int, int], b: tuple[int, int], rng: Rng) -> None:
    """L-shaped corridor from a to b, axis order chosen by the rng."""
    (ax, ay), (bx, by) = a, b
    horizontal_first = rng.chance(1, 2)
    def carve(x, y):
        if grid[y][x] == WALL:
            grid[y][x] = FLOOR
    if horizontal_first:
        for x in range(min(ax, bx), max(ax, bx) + 1):
            carve(x, ay)
        for y in range(min(ay, by), max(ay, by) + 1):
            carve(bx, y)
    else:
        for y in range(min(ay, by), max(ay, by) + 1):
            carve(ax, y)
        for x in range(min(ax, bx), max(ax, bx) + 1):
            carve(x, by)


def _place_doors(grid, rng: Rng, width: int, height: int, protected: set[tuple[int, int]]) -> None:
    """Turn pinched corridor cells into closed doors, with 1/2 chance each."""
    candidates = []
    for y in range(1, height - 1):
        for x in range(1, width - 1):
            if grid[y][x] != FLOOR or (x, y) in protected:
                continue
            ns_walls = grid[y - 1][x] == WALL and grid[y + 1][x] == WALL
            ew_open = grid[y][x - 1] != WALL and grid[y][x + 1] != WALL
            ew_walls = grid[y][x - 1] == WALL and grid[y][x + 1] == WALL
            ns_open = grid[y - 1][x] != WALL and grid[y + 1][x] != WALL
            if (ns_walls and ew_open) or (ew_walls and ns_open):
                candidates.append((x, y))
    for x, y in candidates:
        neighbours = ((x, y - 1), (x + 1, y), (x, y + 1), (x - 1, y))
        if any(grid[ny][nx] == CLOSED_DOOR for nx, ny in neighbours):
            continue
        if rng.chance(1, 2):
            grid[y][x] = CLOSED_DOOR


def _flood(grid, start: tuple[int, int]) -> set[tuple[int, int]]:
    """Reachable non-wall tiles from start; closed doors count as traversable."""
    height, width = len(grid), len(grid[0])
    seen = {start}
    queue = deque([start])
    while queue:
        x, y = queue.popleft()
        for nx, ny in ((x, y - 1), (x + 1, y), (x, y + 1), (x - 1, y)):
            if 0 <= nx < width and 0 <= ny < height and (nx, ny) not in seen:
                if grid[ny][nx] != WALL:
                    seen.add((nx, ny))
                    queue.append((nx, ny))
    return seen


def generate_level(seed_rng: Rng, config: GameConfig, level_index: int) -> GeneratedLevel:
    width, height = config.level_width, config.level_height
    grid = [[WALL for _ in range(width)] for _ in range(height)]
    rooms = _carve_rooms(grid, seed_rng, width, height)

    for a, b in zip(rooms, rooms[1:]):
        center_a = (a[0] + a[2] // 2, a[1] + a[3] // 2)
        center_b = (b[0] + b[2] // 2, b[1] + b[3] // 2)
        _carve_corridor(grid, center_a, center_b, seed_rng)

    first, last = rooms[0], rooms[-1]
    entry = (first[0] + first[2] // 2, first[1] + first[3] // 2)
    stairs = (last[0] + last[2] // 2, last[1] + last[3] // 2)
    if stairs == entry:
        floors = [
            (x, y)
            for y in range(height)
            for x in range(width)
            if grid[y][x] == FLOOR and (x, y) != entry
        ]
        stairs = seed_rng.choice(floors)

    _place_doors(grid, seed_rng, width, height, protected={entry, stairs})

    if stairs not in _flood(grid, entry):
        # Pathological layout: carve a direct L corridor as a repair.
        _carve_corridor(grid, entry, stairs, seed_rng)
    reachable = _flood(grid, entry)
    assert stairs in reachable, "stairs must be reachable from entry"

    grid[entry[1]][entry[0]] = ENTRY
    grid[stairs[1]][stairs[0]] = STAIRS_DOWN

    open_floor = sorted(
        (x, y)
        for y in range(height)
        for x in range(width)
        if grid[y][x] == FLOOR and (x, y) in reachable
    )

    taken: set[tuple[int, int]] = set()
    enemy_spawns: list[tuple[str, tuple[int, int]]] = []
    if config.enemy_kinds:
        count = min(2 + level_index, max(0, len(open_floor) - len(config.item_kinds) - 2))
        safe = [
            p for p in open_floor
            if abs(p[0] - entry[0]) + abs(p[1] - entry[1]) >= ENEMY_SAFE_RADIUS
        ]
        for _ in range(count):
            pool = [p for p in (safe or open_floor) if p not in taken]
            if not pool:
                break
            pos = pool[seed_rng.randrange(len(pool))]
            taken.add(pos)
            template = config.enemy_kinds[seed_rng.randrange(len(config.enemy_kinds))]
            enemy_spawns.append((template.name, pos))

    item_spawns: list[tuple[str, tuple[int, int]]] = []
    for template in config.item_kinds:
        pool = [p for p in open_floor if p not in taken]
        if not pool:
            break
        pos = pool[seed_rng.randrange(len(pool))]
        taken.add(pos)
        item_spawns.append((template.name, pos))

    return GeneratedLevel(grid=grid, entry=entry, stairs=stairs,
                          enemy_spawns=enemy_spawns, item_spawns=item_spawns)
