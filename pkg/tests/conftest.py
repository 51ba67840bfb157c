"""Shared test fixtures and the acceptance-criteria summary hook."""

from playprobe.dungeon import new_game, observe, step
from playprobe.dungeon.types import EnemyTemplate, GameConfig, ItemTemplate

# Lines registered by tests/test_acceptance.py; echoed after the run so
# each criterion's pass/fail verdict is visible in the terminal output.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def small_config(**overrides) -> GameConfig:
    """Compact three-level game used across the suite for fast runs."""
    base = dict(
        level_count=3,
        level_width=16,
        level_height=12,
        enemy_kinds=(
            EnemyTemplate("rat", 2, 1, "chaser"),
            EnemyTemplate("bat", 1, 1, "wanderer"),
            EnemyTemplate("slime", 3, 1, "guard"),
        ),
        item_kinds=(
            ItemTemplate("sword", "weapon", 2),
            ItemTemplate("health potion", "potion", 4),
            ItemTemplate("bread", "food", 40),
            ItemTemplate("brass key", "key", 0),
            ItemTemplate("stone", "stone", 2),
            ItemTemplate("torch", "torch", 0),
        ),
        hunger_per_turn=1,
        seed_list=(11, 22, 33),
    )
    base.update(overrides)
    return GameConfig(**base)


class DungeonHandle:
    """Minimal executor-facing adapter over a live dungeon state."""

    def __init__(self, seed=5, config=None):
        self.state = new_game(seed, config or small_config())
        self.performed = []

    def observe_snapshot(self) -> dict:
        return observe(self.state).snapshot

    def perform(self, request):
        self.state, events = step(self.state, request)
        self.performed.append(request)
        return events

    def is_terminal(self) -> bool:
        return self.state.terminal != "none"
