"""Campaign orchestration: agents × repeats, auto-restart, reports.

A campaign runs one agent kind over a grid of personality slots ×
repeats (seven slots by default; agents without a personality module
keep the same grid so run counts stay comparable).  Each run owns its
environment session, provider, planner, memory, and artifact directory;
runs are independent, so execution order and worker count never change
any per-run artifact byte.  Reports aggregate per-run metrics into
means, sample standard deviations, confidence intervals, and a
coverage-over-time band, all serialized canonically with no timestamps
or machine-local paths.
"""

from __future__ import annotations

import json
import time
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from playprobe.content import GameDefinitions, default_config
from playprobe.dungeon import (
    ACTION_SCHEMAS,
    DIRECTION_ORDER,
    ActionRequest,
    ConfigInvalid,
    GameConfig,
    GameEvent,
    IllegalAction,
    TerminalState,
    legal_actions,
    new_game,
    observe,
    reachable_tiles,
    step,
)
from playprobe.dungeon.engine import TERMINAL_NONE
from playprobe.executor import (
    BUDGET_DEFAULT,
    ExecutionBudget,
    ExecutionReport,
    OUTCOME_COMPLETED,
    SkillRejected,
    allocate_budget,
    compose_skill,
    execute_plan,
    execute_skill,
)
from playprobe.llm import (
    GatewayError,
    HashingEmbedder,
    ReplayChatProvider,
    Transcript,
    build_chat_provider,
    canonical_json,
)
from playprobe.memory import (
    MemoryError_,
    MemoryStore,
    SkillLibrary,
    SkillRecord,
    persist,
    persist_skills,
    retrieve_preferred,
    retrieve_related,
    retrieve_skills,
)
from playprobe.metrics import (
    CombinationSpace,
    coverage_over_time,
    default_combination_rules,
    load_rules,
    navigation_coverage,
    ngram_entropy,
)
from playprobe.personality import (
    TRAIT_ORDER,
    build_agent_prompt,
    default_entity_mapping,
    trait_by_name,
)
from playprobe.planner import HybridPlanner, MODE_TOP_DOWN, PlannerError
from playprobe.rng import Rng, mix_seed
from playprobe.stats import confidence_interval, mean, sample_sd
from playprobe.summarizer import (
    SummarizerError,
    evaluate,
    predict_outcome,
    preference_reflect,
    summarize,
)

AGENT_KINDS = ("mimic", "mimic_p", "mimic_ps", "dumb_monkey", "smart_monkey")
MIMIC_KINDS = ("mimic", "mimic_p", "mimic_ps")

DEFAULT_MAX_TURNS = 2000
DEFAULT_REPEATS = 3

# Consecutive planner iterations that consume zero game turns before the
# run is stopped with an error (defends against a policy that keeps
# planning unexecutable steps).
STALL_LIMIT = 50

# Reports sample the coverage series on a fixed turn grid of at most
# this many points, so report size is independent of max_turns.
SERIES_POINTS = 200

_DUMB_SALT = 0xD00B
_SMART_SALT = 0x5A17


class HarnessError(Exception):
    pass


class NoResults(HarnessError):
    pass


# ---------------------------------------------------------------------------
# Campaign configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CampaignConfig:
    """Declarative description of one campaign."""

    agent_kind: str
    personalities: tuple[str, ...] = TRAIT_ORDER
    repeats: int = DEFAULT_REPEATS
    max_turns: Optional[int] = DEFAULT_MAX_TURNS
    max_plan_iterations: Optional[int] = None
    game: GameConfig = field(default_factory=default_config)
    rules_path: Optional[str] = None
    provider: dict = field(default_factory=lambda: {"mode": "scripted"})
    output_dir: str = "campaign_out"
    workers: int = 1
    level_cap: Optional[int] = None

    def validate(self) -> None:
        if self.agent_kind not in AGENT_KINDS:
            raise ConfigInvalid(f"unknown agent kind: {self.agent_kind!r}")
        if not self.personalities:
            raise ConfigInvalid("personalities must be non-empty")
        for name in self.personalities:
            trait_by_name(name)   # raises UnknownTrait
        if self.repeats < 1:
            raise ConfigInvalid("repeats must be >= 1")
        if self.max_turns is None and self.max_plan_iterations is None:
            raise ConfigInvalid("a run budget is required: max_turns "
                                "and/or max_plan_iterations")
        if self.max_turns is not None and self.max_turns < 0:
            raise ConfigInvalid("max_turns must be >= 0")
        if self.max_plan_iterations is not None and self.max_plan_iterations < 0:
            raise ConfigInvalid("max_plan_iterations must be >= 0")
        if self.agent_kind in ("dumb_monkey", "smart_monkey") and self.max_turns is None:
            raise ConfigInvalid("monkey agents need max_turns")
        if self.workers < 1:
            raise ConfigInvalid("workers must be >= 1")
        if self.agent_kind in MIMIC_KINDS and not self.provider:
            raise ConfigInvalid(f"{self.agent_kind} requires a provider config")
        self.game.validate()
        if len(self.game.seed_list) < self.repeats:
            raise ConfigInvalid(
                f"seed_list has {len(self.game.seed_list)} seeds; "
                f"{self.repeats} repeats need at least that many start positions")
        if self.level_cap is not None and self.level_cap < 1:
            raise ConfigInvalid("level_cap must be >= 1")

    def to_dict(self) -> dict:
        return {
            "agent_kind": self.agent_kind,
            "personalities": list(self.personalities),
            "repeats": self.repeats,
            "max_turns": self.max_turns,
            "max_plan_iterations": self.max_plan_iterations,
            "game": self.game.to_dict(),
            "rules_path": self.rules_path,
            "provider": dict(self.provider),
            "output_dir": self.output_dir,
            "workers": self.workers,
            "level_cap": self.level_cap,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CampaignConfig":
        cfg = cls(
            agent_kind=data["agent_kind"],
            personalities=tuple(data.get("personalities", TRAIT_ORDER)),
            repeats=int(data.get("repeats", DEFAULT_REPEATS)),
            max_turns=(None if data.get("max_turns") is None
                       else int(data["max_turns"])),
            max_plan_iterations=(None if data.get("max_plan_iterations") is None
                                 else int(data["max_plan_iterations"])),
            game=(GameConfig.from_dict(data["game"]) if "game" in data
                  else default_config()),
            rules_path=data.get("rules_path"),
            provider=dict(data.get("provider", {"mode": "scripted"})),
            output_dir=data.get("output_dir", "campaign_out"),
            workers=int(data.get("workers", 1)),
            level_cap=(None if data.get("level_cap") is None
                       else int(data["level_cap"])),
        )
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str) -> "CampaignConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _campaign_rules(cfg: CampaignConfig):
    if cfg.rules_path:
        return load_rules(cfg.rules_path)
    return default_combination_rules()


# ---------------------------------------------------------------------------
# Environment session
# ---------------------------------------------------------------------------

class GameSession:
    """A run-scoped environment: one world at a time, auto-restarting on
    death or victory with the next seed, under a global turn budget.

    Implements the executor's EnvHandle protocol.  Every attempt —
    legal or illegal — consumes exactly one turn and appends one symbol
    to the action trace; events are re-stamped with the run-level turn
    index of the attempt.
    """

    def __init__(self, game: GameConfig, start_index: int,
                 max_turns: Optional[int]):
        self.game = game
        self.seed_list = game.seed_list
        self.seed_cursor = start_index % len(self.seed_list)
        self.max_turns = max_turns
        self.turns_used = 0
        self.restarts = 0
        self.current_seed = self.seed_list[self.seed_cursor]
        self.seeds_used: list[int] = [self.current_seed]
        self.state = new_game(self.current_seed, game)
        self.events: list[GameEvent] = []
        self.trace: list[str] = []
        self.requests: list[dict] = []
        self.visited: set[tuple] = set()
        self._mark_visited()

    def _mark_visited(self) -> None:
        x, y = self.state.player.pos
        self.visited.add((self.current_seed, self.state.current_level_index, x, y))

    # -- EnvHandle protocol ----------------------------------------------

    def observe_snapshot(self) -> dict:
        return observe(self.state).snapshot

    def observe_text(self) -> str:
        return observe(self.state).text

    def is_terminal(self) -> bool:
        return self.max_turns is not None and self.turns_used >= self.max_turns

    def perform(self, request: ActionRequest) -> list[GameEvent]:
        if self.is_terminal():
            raise TerminalState("the run's turn budget is exhausted")
        attempt_turn = self.turns_used
        self.trace.append(request.action_type)
        self.requests.append(request.to_dict())
        try:
            self.state, events = step(self.state, request)
        except IllegalAction as exc:
            self.turns_used += 1
            exc.blocked_event.turn = attempt_turn
            self.events.append(exc.blocked_event)
            raise
        self.turns_used += 1
        for event in events:
            event.turn = attempt_turn
        self.events.extend(events)
        self._mark_visited()
        if self.state.terminal != TERMINAL_NONE:
            self._restart()
        return events

    def _restart(self) -> None:
        self.restarts += 1
        self.seed_cursor = (self.seed_cursor + 1) % len(self.seed_list)
        self.current_seed = self.seed_list[self.seed_cursor]
        self.seeds_used.append(self.current_seed)
        self.state = new_game(self.current_seed, self.game)
        self._mark_visited()


# ---------------------------------------------------------------------------
# Run result
# ---------------------------------------------------------------------------

@dataclass
class RunResult:
    run_id: str
    agent_kind: str
    personality: Optional[str]
    repeat: int
    seeds_used: list[int]
    turns_used: int
    restarts: int
    iterations: int
    trace: list[str]
    combinatorial_coverage: float
    navigation_coverage: float
    levels_explored: int
    deepest_level: int
    entropy: dict[str, Optional[float]]
    coverage_series: list[tuple[int, float]]
    errors: list[str]
    event_log: str   # artifact path relative to the campaign directory
    trace_log: str
    # Wall-clock seconds; kept in memory for operators, never serialized
    # so artifacts stay byte-stable across machines and replays.
    wall_time_s: float = 0.0

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "agent_kind": self.agent_kind,
            "personality": self.personality,
            "repeat": self.repeat,
            "seeds_used": list(self.seeds_used),
            "turns_used": self.turns_used,
            "restarts": self.restarts,
            "iterations": self.iterations,
            "combinatorial_coverage": self.combinatorial_coverage,
            "navigation_coverage": self.navigation_coverage,
            "levels_explored": self.levels_explored,
            "deepest_level": self.deepest_level,
            "entropy": dict(self.entropy),
            "coverage_series": [[t, c] for t, c in self.coverage_series],
            "errors": list(self.errors),
            "event_log": self.event_log,
            "trace_log": self.trace_log,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunResult":
        # The action trace lives in its own artifact (trace_log); reloaded
        # results carry an empty one, which reporting never touches.
        return cls(
            run_id=data["run_id"],
            agent_kind=data["agent_kind"],
            personality=data.get("personality"),
            repeat=int(data["repeat"]),
            seeds_used=[int(s) for s in data["seeds_used"]],
            turns_used=int(data["turns_used"]),
            restarts=int(data["restarts"]),
            iterations=int(data["iterations"]),
            trace=[],
            combinatorial_coverage=float(data["combinatorial_coverage"]),
            navigation_coverage=float(data["navigation_coverage"]),
            levels_explored=int(data["levels_explored"]),
            deepest_level=int(data["deepest_level"]),
            entropy={key: (None if value is None else float(value))
                     for key, value in data["entropy"].items()},
            coverage_series=[(int(t), float(c))
                             for t, c in data["coverage_series"]],
            errors=list(data["errors"]),
            event_log=data["event_log"],
            trace_log=data["trace_log"],
        )


def load_campaign(campaign_dir) -> tuple[CampaignConfig, list[RunResult]]:
    """Rebuild the config and per-run results from a campaign directory."""
    campaign_dir = Path(campaign_dir)
    config_path = campaign_dir / "config.json"
    if not config_path.exists():
        raise HarnessError(f"no campaign at {campaign_dir}: missing config.json")
    cfg = CampaignConfig.load(str(config_path))
    results = []
    for result_path in sorted(campaign_dir.glob("runs/*/result.json")):
        with open(result_path, "r", encoding="utf-8") as fh:
            results.append(RunResult.from_dict(json.load(fh)))
    return cfg, results


def _run_metrics(session: GameSession, rules, game: GameConfig,
                 level_cap: Optional[int]) -> dict:
    """Coverage, navigation, and entropy numbers for one finished session."""
    space = CombinationSpace(rules=tuple(rules))
    for event in session.events:
        space.record_event(event)

    reachable: dict = {}
    for seed in sorted(set(session.seeds_used)):
        world = new_game(seed, game)
        for level in range(game.level_count):
            if level_cap is not None and level >= level_cap:
                break
            reachable[(seed, level)] = reachable_tiles(world, level)
    visited = {((seed, level), x, y) for seed, level, x, y in session.visited
               if level_cap is None or level < level_cap}
    nav = navigation_coverage(visited, reachable)

    entropy: dict[str, Optional[float]] = {}
    for n in (1, 2, 3):
        entropy[str(n)] = (ngram_entropy(session.trace, n)
                           if len(session.trace) >= n else None)

    levels_visited = {(seed, level) for seed, level, _, _ in session.visited}
    return {
        "combinatorial_coverage": space.coverage(),
        "navigation_coverage": nav,
        "entropy": entropy,
        "coverage_series": coverage_over_time(session.events, rules),
        "levels_explored": len(levels_visited),
        "deepest_level": max(level for _, level, _, _ in session.visited) + 1,
    }


# ---------------------------------------------------------------------------
# Monkey agents
# ---------------------------------------------------------------------------

def _dumb_request(session: GameSession, rng: Rng) -> ActionRequest:
    """Uniform action type, uniform parameter values from the full id
    universes — invalid combinations included by design."""
    action_type = rng.choice(sorted(ACTION_SCHEMAS))
    state = session.state
    item_universe = sorted(state.item_names) or ["i0"]
    enemy_universe = sorted(e.id for e in state.entities
                            if e.id.startswith("e")) or ["e0"]
    parameters: dict[str, str] = {}
    for name in ACTION_SCHEMAS[action_type]:
        if name == "direction":
            parameters[name] = rng.choice(list(DIRECTION_ORDER))
        elif name == "item":
            parameters[name] = rng.choice(item_universe)
        elif name == "target":
            parameters[name] = rng.choice(enemy_universe)
    return ActionRequest(action_type, parameters)


def monkey_dumb(session: GameSession, rng: Rng) -> None:
    """Random invocations with unconstrained inputs; illegal actions
    consume the turn like any other attempt."""
    while not session.is_terminal():
        try:
            session.perform(_dumb_request(session, rng))
        except IllegalAction:
            pass


def monkey_smart(session: GameSession, rng: Rng) -> None:
    """Uniform draws from the legal action set; never illegal."""
    while not session.is_terminal():
        session.perform(rng.choice(legal_actions(session.state)))


# ---------------------------------------------------------------------------
# Mimic variants
# ---------------------------------------------------------------------------

NEUTRAL_SYSTEM_PROMPT_TEMPLATE = (
    "You are an automated play-tester.\n"
    "\n"
    "=== GAME ===\n"
    "{description}\n"
    "\n"
    "Play to exercise the game: make plans, execute them, and judge the "
    "results objectively."
)


def _report_digest(report: ExecutionReport) -> str:
    import hashlib
    payload = {
        "plan_id": report.plan_id,
        "outcome": report.outcome,
        "steps_used": report.steps_used,
        "events": [e.to_dict() for e in report.all_events()],
    }
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


class _MimicRunner:
    """One full agent loop over a session: plan, execute, judge, store."""

    def __init__(self, kind: str, personality: Optional[str], provider,
                 session: GameSession, defs: GameDefinitions,
                 max_plan_iterations: Optional[int]):
        self.kind = kind
        self.personality = personality
        self.provider = provider
        self.session = session
        self.max_plan_iterations = max_plan_iterations
        self.summarizer_on = kind in ("mimic", "mimic_ps")
        self.memory_on = kind == "mimic"

        if personality is not None:
            trait = trait_by_name(personality)
            self.system_prompt = build_agent_prompt(
                trait, defs.description, default_entity_mapping())
        else:
            self.system_prompt = NEUTRAL_SYSTEM_PROMPT_TEMPLATE.format(
                description=defs.description.rstrip())
        self.planner = HybridPlanner(
            provider=provider, system_prompt=self.system_prompt,
            action_schemas=ACTION_SCHEMAS, valid_directions=DIRECTION_ORDER,
            action_guide=defs.action_guide)
        self.embedder = HashingEmbedder()
        self.store = MemoryStore()
        self.skills = SkillLibrary()
        self.personality_embedding = self.embedder.embed_one(self.system_prompt)
        self.recent_plans: deque[str] = deque(maxlen=3)
        self.iterations = 0
        self.errors: list[str] = []

    # -- memory ----------------------------------------------------------

    def _memory_context(self, observation_text: str) -> list[str]:
        if not self.memory_on or not len(self.store):
            return []
        seen: set[int] = set()
        context: list[str] = []
        for record in retrieve_preferred(self.store, self.personality_embedding):
            if record.id not in seen:
                seen.add(record.id)
                context.append(record.preference_summary)
        for record in retrieve_related(self.store,
                                       self.embedder.embed_one(observation_text)):
            if record.id not in seen:
                seen.add(record.id)
                context.append(record.summary)
        return context

    # -- one plan's execute/judge/store cycle ----------------------------

    def _plan_cycle(self, plan, observation_text: str, use_skill: bool) -> bool:
        expected = None
        if self.summarizer_on:
            expected = predict_outcome(plan, self.provider, self.system_prompt)
        if self.kind == "mimic":
            budget = allocate_budget(plan, self.personality or "Neutral",
                                     self.provider)
        else:
            budget = ExecutionBudget(BUDGET_DEFAULT)

        script = None
        if use_skill and self.memory_on:
            references = retrieve_skills(
                self.skills, self.embedder.embed_one(plan.render()))
            script = compose_skill(plan, references, self.provider,
                                   self.system_prompt)
            report = execute_skill(script, self.session, budget,
                                   plan_id=plan.id)
        else:
            report = execute_plan(plan, self.session, budget)

        if self.summarizer_on:
            verdict = evaluate(expected, report)
            summary = summarize(plan, verdict, report, self.provider,
                                self.system_prompt)
            success = verdict.status == "success"
            if self.memory_on:
                preference = preference_reflect(
                    summary, self.personality or "Neutral", self.provider,
                    self.system_prompt)
                self.store.add_record(
                    iteration=self.iterations,
                    env_snapshot_text=observation_text,
                    plan_text=plan.render(),
                    report_digest=_report_digest(report),
                    summary=summary.render(),
                    preference_summary=preference.text,
                    env_embedding=self.embedder.embed_one(observation_text),
                    preference_embedding=self.embedder.embed_one(preference.text),
                )
        else:
            success = report.outcome == OUTCOME_COMPLETED

        if script is not None:
            if self.skills.get(script.name) is None:
                self.skills.add(SkillRecord(
                    name=script.name,
                    script_text=script.render(),
                    description=script.description,
                    description_embedding=self.embedder.embed_one(
                        script.description),
                ))
            self.skills.record_outcome(script.name, success)
        return success

    # -- the loop --------------------------------------------------------

    def run(self) -> None:
        stalled = 0
        while not self.session.is_terminal():
            if (self.max_plan_iterations is not None
                    and self.iterations >= self.max_plan_iterations):
                break
            self.iterations += 1
            turns_before = self.session.turns_used
            observation_text = self.session.observe_text()
            memories = self._memory_context(observation_text)
            try:
                if self.planner.state.mode == MODE_TOP_DOWN:
                    self._top_down_round(memories)
                else:
                    self._bottom_up_round(observation_text, memories)
            except (PlannerError, SummarizerError, SkillRejected,
                    GatewayError, MemoryError_) as exc:
                self.errors.append(f"{type(exc).__name__}: {exc}")
                break
            if self.session.turns_used == turns_before:
                stalled += 1
                if stalled >= STALL_LIMIT:
                    self.errors.append(
                        f"stalled: {STALL_LIMIT} consecutive planner "
                        "iterations consumed no game turns")
                    break
            else:
                stalled = 0

    def _bottom_up_round(self, observation_text: str,
                         memories: list[str]) -> None:
        plan = self.planner.plan_bottom_up(observation_text, memories,
                                           list(self.recent_plans))
        self.recent_plans.append(plan.render())
        success = self._plan_cycle(plan, observation_text, use_skill=False)
        if success:
            self.planner.note_task_completed()
        self.planner.observe_plan(plan)

    def _top_down_round(self, memories: list[str]) -> None:
        observation_text = self.session.observe_text()
        self.planner.plan_top_down(observation_text, memories,
                                   list(self.recent_plans))
        while not self.session.is_terminal():
            slot = self.planner.next_pending_subplan()
            if slot is None:
                break
            sub_observation = self.session.observe_text()
            plan = self.planner.plan_bottom_up(
                sub_observation, self._memory_context(sub_observation),
                list(self.recent_plans), parent_goal=slot.goal)
            self.recent_plans.append(plan.render())
            success = self._plan_cycle(plan, sub_observation, use_skill=True)
            self.planner.record_subplan_verdict(slot, success)
            self.planner.observe_plan(plan)


# ---------------------------------------------------------------------------
# Single-run entry
# ---------------------------------------------------------------------------

def _run_id(kind: str, personalities: tuple[str, ...], slot: int,
            repeat: int) -> str:
    if kind == "mimic":
        return f"{kind}-{personalities[slot]}-r{repeat}"
    return f"{kind}-slot{slot}-r{repeat}"


def _build_run_provider(provider_cfg: dict, run_dir: Path):
    """Provider plus (transcript, save?) for one run.

    Record mode writes the run's transcript under its own directory;
    replay mode reads the same relative path from the source campaign.
    Replayed transcripts are re-saved so a replay output is itself
    replayable and byte-identical to the recording.
    """
    cfg = dict(provider_cfg)
    mode = cfg.get("mode", "scripted")
    if mode == "replay":
        source = cfg.get("source")
        if not source:
            raise ConfigInvalid("replay provider needs a source campaign dir")
        transcript = Transcript.load(
            str(Path(source) / "runs" / run_dir.name / "transcript.jsonl"))
        return ReplayChatProvider(transcript), transcript, True
    transcript = Transcript()
    provider = build_chat_provider(cfg, transcript)
    save = bool(cfg.get("record"))
    return provider, transcript, save


def run_single(cfg: CampaignConfig, slot: int, repeat: int,
               campaign_dir: Path) -> RunResult:
    """Execute one run and write its artifacts; pure function of
    (cfg, slot, repeat) by construction."""
    started = time.monotonic()
    run_id = _run_id(cfg.agent_kind, cfg.personalities, slot, repeat)
    run_dir = campaign_dir / "runs" / run_id
    run_dir.mkdir(parents=True, exist_ok=True)
    rules = _campaign_rules(cfg)
    session = GameSession(cfg.game, start_index=repeat, max_turns=cfg.max_turns)

    iterations = 0
    errors: list[str] = []
    personality: Optional[str] = None

    if cfg.agent_kind == "dumb_monkey":
        monkey_dumb(session, Rng(mix_seed(_DUMB_SALT, slot, repeat)))
    elif cfg.agent_kind == "smart_monkey":
        monkey_smart(session, Rng(mix_seed(_SMART_SALT, slot, repeat)))
    else:
        personality = (cfg.personalities[slot]
                       if cfg.agent_kind == "mimic" else None)
        provider, transcript, save_transcript = _build_run_provider(
            cfg.provider, run_dir)
        runner = _MimicRunner(cfg.agent_kind, personality, provider, session,
                              GameDefinitions.for_config(cfg.game),
                              cfg.max_plan_iterations)
        runner.run()
        iterations = runner.iterations
        errors = runner.errors
        if save_transcript:
            transcript.save(str(run_dir / "transcript.jsonl"))
        if runner.memory_on:
            persist(runner.store, str(run_dir / "memory.jsonl"))
            persist_skills(runner.skills, str(run_dir / "skills.jsonl"))

    metrics = _run_metrics(session, rules, cfg.game, cfg.level_cap)

    with open(run_dir / "events.jsonl", "w", encoding="utf-8") as fh:
        for event in session.events:
            fh.write(canonical_json(event.to_dict()) + "\n")
    with open(run_dir / "trace.json", "w", encoding="utf-8") as fh:
        fh.write(canonical_json({"trace": session.trace,
                                 "requests": session.requests}) + "\n")

    result = RunResult(
        run_id=run_id,
        agent_kind=cfg.agent_kind,
        personality=personality,
        repeat=repeat,
        seeds_used=session.seeds_used,
        turns_used=session.turns_used,
        restarts=session.restarts,
        iterations=iterations,
        trace=session.trace,
        combinatorial_coverage=metrics["combinatorial_coverage"],
        navigation_coverage=metrics["navigation_coverage"],
        levels_explored=metrics["levels_explored"],
        deepest_level=metrics["deepest_level"],
        entropy=metrics["entropy"],
        coverage_series=metrics["coverage_series"],
        errors=errors,
        event_log=f"runs/{run_id}/events.jsonl",
        trace_log=f"runs/{run_id}/trace.json",
        wall_time_s=time.monotonic() - started,
    )
    with open(run_dir / "result.json", "w", encoding="utf-8") as fh:
        fh.write(canonical_json(result.to_dict()) + "\n")
    return result


def _run_spec(args: tuple) -> RunResult:
    cfg_dict, slot, repeat, campaign_dir = args
    return run_single(CampaignConfig.from_dict(cfg_dict), slot, repeat,
                      Path(campaign_dir))


# ---------------------------------------------------------------------------
# Campaign
# ---------------------------------------------------------------------------

def run_campaign(cfg: CampaignConfig) -> dict:
    """Run the full grid, write artifacts + report, return the report."""
    cfg.validate()
    campaign_dir = Path(cfg.output_dir)
    campaign_dir.mkdir(parents=True, exist_ok=True)
    # provider / output_dir / workers locate this host's run, not the
    # campaign itself; keeping them out of the artifact makes replays into
    # different directories byte-identical.
    persisted = {k: v for k, v in cfg.to_dict().items()
                 if k not in ("provider", "output_dir", "workers")}
    with open(campaign_dir / "config.json", "w", encoding="utf-8") as fh:
        fh.write(canonical_json(persisted) + "\n")

    specs = [(cfg.to_dict(), slot, repeat, str(campaign_dir))
             for slot in range(len(cfg.personalities))
             for repeat in range(cfg.repeats)]

    results: list[RunResult] = []
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_spec, specs))
    else:
        for spec in specs:
            results.append(_run_spec(spec))

    report = emit_report(cfg, results, campaign_dir)
    return report


# ---------------------------------------------------------------------------
# Reporting
# ---------------------------------------------------------------------------

def _spread(values: list[float]) -> dict:
    """mean / sample sd / 95% t-CI; a single value is its own interval."""
    m = mean(values)
    sd = sample_sd(values) if len(values) > 1 else 0.0
    lo, hi = confidence_interval(values)
    return {"mean": m, "sd": sd, "ci95": [lo, hi], "n": len(values)}


def _series_value_at(series: list, turn: int) -> float:
    value = 0.0
    for t, c in series:
        if t <= turn:
            value = c
        else:
            break
    return value


def _series_band(results: list[RunResult], max_turns: Optional[int]
                 ) -> list[list[float]]:
    """Mean/min/max coverage on a fixed turn grid across runs."""
    horizon = max_turns if max_turns is not None else max(
        (r.turns_used for r in results), default=0)
    if horizon <= 0:
        grid = [0]
    else:
        points = min(SERIES_POINTS, horizon)
        grid = sorted({round(i * horizon / points) for i in range(points + 1)})
    band = []
    for turn in grid:
        at = [_series_value_at(r.coverage_series, turn) for r in results]
        band.append([turn, mean(at), min(at), max(at)])
    return band


def emit_report(cfg: CampaignConfig, results: list[RunResult],
                campaign_dir: Path) -> dict:
    """Aggregate per-run metrics and write report artifacts."""
    if not results:
        raise NoResults("emit_report needs at least one run result")
    results = sorted(results, key=lambda r: r.run_id)
    rules = _campaign_rules(cfg)

    union_space = CombinationSpace(rules=tuple(rules))
    for result in results:
        with open(campaign_dir / result.event_log, "r", encoding="utf-8") as fh:
            for line in fh:
                union_space.record_event(GameEvent.from_dict(json.loads(line)))

    coverage_values = [r.combinatorial_coverage for r in results]
    nav_values = [r.navigation_coverage for r in results]
    level_values = [float(r.levels_explored) for r in results]
    entropy_agg = {}
    for n in ("1", "2", "3"):
        values = [r.entropy[n] for r in results if r.entropy.get(n) is not None]
        entropy_agg[n] = _spread(values) if values else None

    report = {
        "agent_kind": cfg.agent_kind,
        "run_count": len(results),
        "runs": [r.to_dict() for r in results],
        "aggregate": {
            "combinatorial_coverage": _spread(coverage_values),
            "navigation_coverage": _spread(nav_values),
            "levels_explored": _spread(level_values),
            "entropy": entropy_agg,
            "union_coverage": union_space.coverage(),
            "coverage_band": _series_band(results, cfg.max_turns),
        },
    }

    with open(campaign_dir / "report.json", "w", encoding="utf-8") as fh:
        fh.write(canonical_json(report) + "\n")
    _write_report_csv(report, campaign_dir / "report.csv")
    _write_series_csv(report, campaign_dir / "coverage_series.csv")
    return report


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def _write_report_csv(report: dict, path: Path) -> None:
    columns = ("run_id", "personality", "repeat", "turns_used", "restarts",
               "iterations", "combinatorial_coverage", "navigation_coverage",
               "levels_explored", "deepest_level", "entropy_1", "entropy_2",
               "entropy_3", "errors")
    lines = [",".join(columns)]
    for row in report["runs"]:
        lines.append(",".join(_fmt(v) for v in (
            row["run_id"], row["personality"] or "", row["repeat"],
            row["turns_used"], row["restarts"], row["iterations"],
            row["combinatorial_coverage"], row["navigation_coverage"],
            row["levels_explored"], row["deepest_level"],
            row["entropy"]["1"], row["entropy"]["2"], row["entropy"]["3"],
            len(row["errors"]))))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_series_csv(report: dict, path: Path) -> None:
    lines = ["turn,mean,min,max"]
    for turn, mean_c, min_c, max_c in report["aggregate"]["coverage_band"]:
        lines.append(",".join(_fmt(v) for v in (turn, mean_c, min_c, max_c)))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Campaign comparison
# ---------------------------------------------------------------------------

def compare_reports(report_a: dict, report_b: dict) -> dict:
    """Paired one-tailed t-tests (a > b) between two campaigns' per-run
    metrics, paired by row order."""
    from playprobe.stats import paired_t_test_one_tailed

    rows_a = report_a["runs"]
    rows_b = report_b["runs"]
    if len(rows_a) != len(rows_b):
        raise HarnessError(
            f"cannot pair {len(rows_a)} runs with {len(rows_b)} runs")

    comparison: dict = {
        "a": report_a["agent_kind"],
        "b": report_b["agent_kind"],
        "n": len(rows_a),
        "metrics": {},
    }
    metric_paths = {
        "combinatorial_coverage": lambda row: row["combinatorial_coverage"],
        "navigation_coverage": lambda row: row["navigation_coverage"],
        "levels_explored": lambda row: float(row["levels_explored"]),
    }
    for name, pick in metric_paths.items():
        a_values = [pick(r) for r in rows_a]
        b_values = [pick(r) for r in rows_b]
        comparison["metrics"][name] = {
            "mean_a": mean(a_values),
            "mean_b": mean(b_values),
            "mean_diff": mean(a_values) - mean(b_values),
            "p_a_greater": paired_t_test_one_tailed(a_values, b_values),
        }
    return comparison
