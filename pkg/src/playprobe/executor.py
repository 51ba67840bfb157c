"""Plan execution: parameter translation, the skill DSL, and budgets.

Two execution routes share one report shape:

* Direct route — each verified plan step is translated to a concrete
  :class:`ActionRequest` (:func:`translate_to_parameters`) and performed.
* Skill route — the plan is compiled by the model into a small, closed,
  sandboxed script language (:func:`compose_skill`) interpreted against
  the environment (:func:`execute_skill`).

The DSL (grammar documented in docs/formats.md, serialized bit-exactly
for the skill library)::

    skill: reach_stairs
    description: walk to the stairs and go down
    repeat_until on_tile(stairs_down) max=60
      move_toward target=stairs_down
    end
    primitive descend

Instructions: ``primitive <action> k=v ...``, ``repeat_until <cond>
max=<n> ... end``, ``if <cond> ... [else ...] end``.  Conditions are
predicates over the current observation snapshot.  Primitives name
items, enemies, and tiles symbolically; the interpreter resolves them
against the live observation at each step, so one skill replays across
runs and worlds.

Budgets count simulation steps, not wall-clock: every performed
primitive costs exactly one step.  ``repeat_until`` condition checks
are free; ``max_iterations`` bounds the loop even when budget remains.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol

from playprobe.dungeon.types import (
    ACTION_SCHEMAS,
    ActionRequest,
    DIRECTION_ORDER,
    DIRECTIONS,
    GameEvent,
    IllegalAction,
)
from playprobe.llm import ChatProvider, ChatRequest, VERIFICATION_TEMPERATURE

BUDGET_MIN = 5
BUDGET_MAX = 200
BUDGET_DEFAULT = 50

OUTCOME_COMPLETED = "completed"
OUTCOME_BUDGET_EXHAUSTED = "budget_exhausted"
OUTCOME_ABORTED_ILLEGAL = "aborted_illegal"

# The macro primitive the DSL adds on top of the engine's actions.
MOVE_TOWARD = "move_toward"

DEFAULT_SKILL_REVISIONS = 3


class ExecutorError(Exception):
    pass


class ParamUnresolvable(ExecutorError):
    def __init__(self, parameter: str, value: str, candidates: list[str]):
        self.parameter = parameter
        self.value = value
        self.candidates = sorted(candidates)
        super().__init__(
            f"cannot resolve {parameter}={value!r}; candidates: {self.candidates}")


class SkillParseError(ExecutorError):
    pass


class SkillRejected(ExecutorError):
    def __init__(self, message: str, violations: list[str]):
        super().__init__(message)
        self.violations = violations


class EnvHandle(Protocol):
    """What the executor needs from a running game."""

    def observe_snapshot(self) -> dict: ...

    def perform(self, request: ActionRequest) -> list[GameEvent]: ...

    def is_terminal(self) -> bool: ...


# ---------------------------------------------------------------------------
# Budgets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExecutionBudget:
    max_steps: int

    def __post_init__(self):
        if not BUDGET_MIN <= self.max_steps <= BUDGET_MAX:
            raise ExecutorError(
                f"budget {self.max_steps} outside [{BUDGET_MIN}, {BUDGET_MAX}]")

    @staticmethod
    def clamped(steps: int) -> "ExecutionBudget":
        return ExecutionBudget(max(BUDGET_MIN, min(BUDGET_MAX, steps)))


_FIRST_INT = re.compile(r"-?\d+")


def allocate_budget(plan, personality_name: str, provider: ChatProvider) -> ExecutionBudget:
    """Ask the model for a step budget; clamp; fall back to the default
    when no integer can be parsed from the reply."""
    prompt = (
        f"You allocate execution budgets for a game-playing agent with the "
        f"{personality_name} personality.\n\nPlan:\n{plan.render()}\n\n"
        f"How many simulation steps should this plan get?  Consider the "
        f"plan's complexity and how much patience this personality has.  "
        f"Reply with a single integer."
    )
    request = ChatRequest.build(
        system="You are a terse resource allocator.  Reply with one integer.",
        user=prompt, temperature=VERIFICATION_TEMPERATURE, tag="executor.budget")
    response = provider.chat(request)
    match = _FIRST_INT.search(response)
    if match is None:
        return ExecutionBudget(BUDGET_DEFAULT)
    return ExecutionBudget.clamped(int(match.group()))


# ---------------------------------------------------------------------------
# Parameter translation
# ---------------------------------------------------------------------------

def _normalize(text: str) -> str:
    """Case-insensitive name folding.  Underscores and hyphens count as
    word connectors so single-token plan grammar values (``health_potion``)
    match multi-word entity names (``health potion``)."""
    return " ".join(text.strip().lower().replace("_", " ").replace("-", " ").split())


def _resolve_item(value: str, snapshot: dict) -> str:
    """Resolve an item reference to a carried item id."""
    inventory_ids = snapshot.get("inventory_ids", {})
    all_ids = [i for ids in inventory_ids.values() for i in ids]
    if value in all_ids:
        return value
    wanted = _normalize(value)
    for name, ids in sorted(inventory_ids.items()):
        if _normalize(name) == wanted and ids:
            return ids[0]
    raise ParamUnresolvable("item", value, all_ids + sorted(inventory_ids))


def _resolve_ground_item(value: str, snapshot: dict) -> str:
    """Resolve an item reference to a ground item id at the player's
    tile (the pick_up case)."""
    px, py = snapshot["position"]
    here = [e for e in snapshot.get("visible_entities", [])
            if not e["is_enemy"] and (e["x"], e["y"]) == (px, py)]
    ids = [e["id"] for e in here]
    if value in ids:
        return value
    wanted = _normalize(value)
    matches = sorted((e for e in here if _normalize(e["kind"]) == wanted),
                     key=lambda e: e["id"])
    if matches:
        return matches[0]["id"]
    raise ParamUnresolvable("item", value, ids + sorted({e["kind"] for e in here}))


def _resolve_target(value: str, snapshot: dict) -> str:
    """Resolve an enemy reference to an entity id; adjacency, then
    lower id, break ties."""
    enemies = [e for e in snapshot.get("visible_entities", []) if e["is_enemy"]]
    ids = [e["id"] for e in enemies]
    if value in ids:
        return value
    wanted = _normalize(value)
    matches = [e for e in enemies if _normalize(e["kind"]) == wanted]
    if matches:
        matches.sort(key=lambda e: (not e["adjacent"], e["id"]))
        return matches[0]["id"]
    raise ParamUnresolvable("target", value, ids + sorted({e["kind"] for e in enemies}))


def _resolve_direction(value: str, snapshot: dict) -> str:
    wanted = _normalize(value)
    if wanted in DIRECTIONS:
        return wanted
    raise ParamUnresolvable("direction", value, list(DIRECTION_ORDER))


def _resolve_bindings(action_type: str, bindings: dict[str, str],
                      snapshot: dict) -> dict[str, str]:
    resolved: dict[str, str] = {}
    for name, value in sorted(bindings.items()):
        if name == "direction":
            resolved[name] = _resolve_direction(value, snapshot)
        elif name == "item" and action_type == "pick_up":
            resolved[name] = _resolve_ground_item(value, snapshot)
        elif name == "item":
            resolved[name] = _resolve_item(value, snapshot)
        elif name == "target":
            resolved[name] = _resolve_target(value, snapshot)
        else:
            resolved[name] = value
    return resolved


def translate_to_parameters(step, snapshot: dict) -> ActionRequest:
    """Deterministically resolve a verified plan step against the
    current observation snapshot."""
    return ActionRequest(step.action_type,
                         _resolve_bindings(step.action_type,
                                           step.parameter_map(), snapshot))


# ---------------------------------------------------------------------------
# Conditions
# ---------------------------------------------------------------------------

_CONDITION = re.compile(r"^(\w+)(?:\(([^()]*)\))?$")


def _neighbor_tiles(snapshot: dict) -> dict[str, str]:
    px, py = snapshot["position"]
    tiles = {(x, y): t for x, y, t in snapshot.get("visible_tiles", [])}
    return {d: tiles.get((px + dx, py + dy), "wall")
            for d, (dx, dy) in DIRECTIONS.items()}


def evaluate_condition(condition: str, snapshot: dict) -> bool:
    """Evaluate a DSL condition against an observation snapshot."""
    match = _CONDITION.match(condition.strip())
    if not match:
        raise SkillParseError(f"bad condition syntax: {condition!r}")
    name, arg = match.group(1), (match.group(2) or "").strip()
    if name == "always":
        return True
    if name == "never":
        return False
    if name == "inventory_contains":
        return any(_normalize(n) == _normalize(arg) for n in snapshot.get("inventory", {}))
    if name == "adjacent":
        return any(e["adjacent"] and _normalize(e["kind"]) == _normalize(arg)
                   for e in snapshot.get("visible_entities", []))
    if name == "sees":
        return any(_normalize(e["kind"]) == _normalize(arg)
                   for e in snapshot.get("visible_entities", []))
    if name == "on_tile":
        return snapshot.get("on_tile") == arg
    if name == "adjacent_tile":
        return arg in _neighbor_tiles(snapshot).values()
    if name == "sees_tile":
        return any(t == arg for _, _, t in snapshot.get("visible_tiles", []))
    if name == "hp_below":
        return snapshot.get("hp", 0) < int(arg)
    if name == "hunger_above":
        return snapshot.get("hunger", 0) > int(arg)
    raise SkillParseError(f"unknown condition: {name!r}")


def validate_condition(condition: str) -> Optional[str]:
    """Syntax/name check without a snapshot; returns a violation or None."""
    match = _CONDITION.match(condition.strip())
    if not match:
        return f"bad condition syntax: {condition!r}"
    name, arg = match.group(1), (match.group(2) or "").strip()
    no_arg = {"always", "never"}
    text_arg = {"inventory_contains", "adjacent", "sees", "on_tile",
                "adjacent_tile", "sees_tile"}
    int_arg = {"hp_below", "hunger_above"}
    if name in no_arg:
        return None if not arg else f"condition {name} takes no argument"
    if name in text_arg:
        return None if arg else f"condition {name} needs an argument"
    if name in int_arg:
        try:
            int(arg)
            return None
        except ValueError:
            return f"condition {name} needs an integer argument, got {arg!r}"
    return f"unknown condition: {name!r}"


# ---------------------------------------------------------------------------
# DSL structure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Primitive:
    action_type: str
    bindings: tuple[tuple[str, str], ...]

    def binding_map(self) -> dict[str, str]:
        return dict(self.bindings)


@dataclass(frozen=True)
class RepeatUntil:
    condition: str
    body: tuple
    max_iterations: int


@dataclass(frozen=True)
class IfElse:
    condition: str
    then_body: tuple
    else_body: tuple


@dataclass(frozen=True)
class SkillScript:
    name: str
    description: str
    body: tuple

    def render(self) -> str:
        return serialize_skill(self)


def primitive_catalog() -> dict[str, tuple[str, ...]]:
    """Schemas the DSL accepts: every engine action plus the
    ``move_toward`` navigation macro."""
    catalog = dict(ACTION_SCHEMAS)
    catalog[MOVE_TOWARD] = ("target",)
    return catalog


def validate_skill(script: SkillScript) -> list[str]:
    """Structural checks; returns violations (empty = valid)."""
    violations: list[str] = []
    if not script.name.strip():
        violations.append("skill needs a name")
    if not script.body:
        violations.append("skill body is empty")
    catalog = primitive_catalog()

    def walk(instructions, depth):
        if depth > 8:
            violations.append("nesting deeper than 8 levels")
            return
        for ins in instructions:
            if isinstance(ins, Primitive):
                schema = catalog.get(ins.action_type)
                if schema is None:
                    violations.append(f"unknown primitive {ins.action_type!r}")
                elif tuple(sorted(ins.binding_map())) != tuple(sorted(schema)):
                    violations.append(
                        f"primitive {ins.action_type}: bindings must be exactly "
                        f"{sorted(schema)}, got {sorted(ins.binding_map())}")
            elif isinstance(ins, RepeatUntil):
                problem = validate_condition(ins.condition)
                if problem:
                    violations.append(problem)
                if ins.max_iterations < 1:
                    violations.append("repeat_until needs max_iterations >= 1")
                if not ins.body:
                    violations.append("repeat_until body is empty")
                walk(ins.body, depth + 1)
            elif isinstance(ins, IfElse):
                problem = validate_condition(ins.condition)
                if problem:
                    violations.append(problem)
                if not ins.then_body and not ins.else_body:
                    violations.append("if has neither then nor else body")
                walk(ins.then_body, depth + 1)
                walk(ins.else_body, depth + 1)
            else:
                violations.append(f"unknown instruction {ins!r}")

    walk(script.body, 0)
    return violations


# ---------------------------------------------------------------------------
# DSL parsing and serialization
# ---------------------------------------------------------------------------

_SKILL_FENCE = re.compile(r"```skill\s*\n(.*?)```", re.DOTALL)
_REPEAT_LINE = re.compile(r"^repeat_until\s+(.+?)\s+max\s*=\s*(\d+)$")
_IF_LINE = re.compile(r"^if\s+(.+)$")
_PRIMITIVE_LINE = re.compile(r"^primitive\s+(\S+)\s*(.*)$")
_BINDING = re.compile(r"(\w+)\s*=\s*((?:\"[^\"]*\")|(?:\S+))")


def _parse_bindings(text: str) -> tuple[tuple[str, str], ...]:
    out = []
    for key, value in _BINDING.findall(text):
        if value.startswith('"') and value.endswith('"'):
            value = value[1:-1]
        out.append((key, value))
    return tuple(sorted(out))


def _parse_block(lines: list[str], pos: int, terminators: tuple[str, ...]
                 ) -> tuple[tuple, int, str]:
    """Parse until one of ``terminators``; returns (body, next_pos,
    terminator seen)."""
    body: list = []
    while pos < len(lines):
        line = lines[pos].strip()
        pos += 1
        if not line:
            continue
        if line in terminators:
            return tuple(body), pos, line
        repeat = _REPEAT_LINE.match(line)
        if repeat:
            inner, pos, _ = _parse_block(lines, pos, ("end",))
            body.append(RepeatUntil(condition=repeat.group(1).strip(),
                                    body=inner, max_iterations=int(repeat.group(2))))
            continue
        if_match = _IF_LINE.match(line)
        if if_match:
            then_body, pos, terminator = _parse_block(lines, pos, ("else", "end"))
            else_body: tuple = ()
            if terminator == "else":
                else_body, pos, _ = _parse_block(lines, pos, ("end",))
            body.append(IfElse(condition=if_match.group(1).strip(),
                               then_body=then_body, else_body=else_body))
            continue
        prim = _PRIMITIVE_LINE.match(line)
        if prim:
            body.append(Primitive(action_type=prim.group(1),
                                  bindings=_parse_bindings(prim.group(2))))
            continue
        # Bare macro shorthand: "<action> k=v" without the primitive keyword,
        # tolerated for the move_toward macro only (common model output).
        if line.split()[0] == MOVE_TOWARD:
            body.append(Primitive(action_type=MOVE_TOWARD,
                                  bindings=_parse_bindings(line[len(MOVE_TOWARD):])))
            continue
        raise SkillParseError(f"unparseable skill line: {line!r}")
    if terminators == ("<eof>",):
        return tuple(body), pos, "<eof>"
    raise SkillParseError(f"missing {' or '.join(terminators)} before end of script")


def parse_skill(text: str) -> SkillScript:
    """Parse skill source (header lines + instruction body)."""
    lines = text.splitlines()
    name = ""
    description = ""
    body_start = 0
    for index, raw in enumerate(lines):
        line = raw.strip()
        if not line:
            body_start = index + 1
            continue
        if line.startswith("skill:"):
            name = line[len("skill:"):].strip()
            body_start = index + 1
        elif line.startswith("description:"):
            description = line[len("description:"):].strip()
            body_start = index + 1
        else:
            break
    if not name:
        raise SkillParseError("skill source is missing a 'skill:' header")
    body, _, _ = _parse_block(lines, body_start, ("<eof>",))
    if not body:
        raise SkillParseError("skill has no instructions")
    return SkillScript(name=name, description=description, body=body)


def _serialize_body(instructions, depth: int) -> list[str]:
    pad = "  " * depth
    lines: list[str] = []
    for ins in instructions:
        if isinstance(ins, Primitive):
            bindings = " ".join(
                f'{k}="{v}"' if " " in v else f"{k}={v}"
                for k, v in ins.bindings)
            lines.append(f"{pad}primitive {ins.action_type}"
                         + (f" {bindings}" if bindings else ""))
        elif isinstance(ins, RepeatUntil):
            lines.append(f"{pad}repeat_until {ins.condition} max={ins.max_iterations}")
            lines.extend(_serialize_body(ins.body, depth + 1))
            lines.append(f"{pad}end")
        elif isinstance(ins, IfElse):
            lines.append(f"{pad}if {ins.condition}")
            lines.extend(_serialize_body(ins.then_body, depth + 1))
            if ins.else_body:
                lines.append(f"{pad}else")
                lines.extend(_serialize_body(ins.else_body, depth + 1))
            lines.append(f"{pad}end")
    return lines


def serialize_skill(script: SkillScript) -> str:
    """Canonical text form; parse(serialize(s)) round-trips exactly."""
    lines = [f"skill: {script.name}", f"description: {script.description}"]
    lines.extend(_serialize_body(script.body, 0))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Skill composition (LLM-assisted)
# ---------------------------------------------------------------------------

_CATALOG_TEXT = """\
Primitives (one per line, exact parameter names):
  primitive move direction=<north|south|east|west>
  primitive attack target=<enemy kind or id>
  primitive pick_up item=<item name or id>
  primitive use item=<item name or id>
  primitive throw item=<item name or id> direction=<north|south|east|west>
  primitive eat item=<item name or id>
  primitive open direction=<north|south|east|west>
  primitive descend
  primitive wait
  move_toward target=<entity kind or tile name>   (navigation macro)
Control flow:
  repeat_until <condition> max=<n> ... end
  if <condition> ... [else ...] end
Conditions: always, never, inventory_contains(<name>), adjacent(<kind>),
sees(<kind>), on_tile(<tile>), adjacent_tile(<tile>), sees_tile(<tile>),
hp_below(<n>), hunger_above(<n>)"""


def compose_skill(plan, retrieved_skills, provider: ChatProvider,
                  system_prompt: str,
                  max_revisions: int = DEFAULT_SKILL_REVISIONS) -> SkillScript:
    """Ask the model to compile a plan into a skill script; revise on
    grammar/validation violations up to ``max_revisions`` times."""
    references = "\n\n".join(s.render() for s in retrieved_skills) or "(none)"
    prompt = (
        f"Compile this plan into one reusable skill script.\n\n"
        f"Plan:\n{plan.render()}\n\n"
        f"=== SCRIPT LANGUAGE ===\n{_CATALOG_TEXT}\n\n"
        f"=== REFERENCE SKILLS ===\n{references}\n\n"
        "Reply with exactly one fenced block:\n"
        "```skill\nskill: <short_snake_case_name>\ndescription: <one line>\n"
        "<instructions>\n```"
    )
    messages: list[tuple[str, str]] = [("system", system_prompt), ("user", prompt)]
    last_violations: list[str] = []
    for _ in range(max_revisions + 1):
        request = ChatRequest(messages=tuple(messages),
                              temperature=VERIFICATION_TEMPERATURE,
                              tag="executor.compose_skill")
        response = provider.chat(request)
        fence = _SKILL_FENCE.search(response)
        if fence is None:
            violations = ["no ```skill fenced block found"]
        else:
            try:
                script = parse_skill(fence.group(1))
                violations = validate_skill(script)
                if not violations:
                    return script
            except SkillParseError as exc:
                violations = [str(exc)]
        last_violations = violations
        messages.append(("assistant", response))
        messages.append((
            "user",
            "Your script was rejected:\n" + "\n".join(f"- {v}" for v in violations)
            + "\nReply again with one corrected fenced skill block.",
        ))
    raise SkillRejected(f"no valid skill after {max_revisions} revisions",
                        last_violations)


# ---------------------------------------------------------------------------
# Interpretation
# ---------------------------------------------------------------------------

@dataclass
class ExecutionReport:
    plan_id: int
    executed: list[tuple[ActionRequest, list[GameEvent]]] = field(default_factory=list)
    steps_used: int = 0
    outcome: str = OUTCOME_COMPLETED
    final_snapshot: Optional[dict] = None
    abort_event: Optional[GameEvent] = None

    def all_events(self) -> list[GameEvent]:
        out = []
        for _, events in self.executed:
            out.extend(events)
        if self.abort_event is not None:
            out.append(self.abort_event)
        return out

    def rendered_actions(self) -> list[str]:
        lines = []
        for request, events in self.executed:
            kinds = ", ".join(e.kind for e in events) or "no events"
            params = " ".join(f"{k}={v}" for k, v in sorted(request.parameters.items()))
            lines.append(f"{request.action_type} {params}".strip() + f" -> {kinds}")
        if self.abort_event is not None:
            lines.append(f"{self.abort_event.action_type} -> blocked")
        return lines


class _Stop(Exception):
    def __init__(self, outcome: str):
        self.outcome = outcome


def _resolve_move_toward(target: str, snapshot: dict) -> ActionRequest:
    """Pick a move request stepping toward the named entity kind or tile
    kind.  Falls back to the first passable direction, then to wait —
    total and deterministic, never illegal by construction."""
    px, py = snapshot["position"]
    wanted = _normalize(target)
    goal: Optional[tuple[int, int]] = None
    best = None
    for e in snapshot.get("visible_entities", []):
        if _normalize(e["kind"]) == wanted:
            d = abs(e["x"] - px) + abs(e["y"] - py)
            if best is None or (d, e["id"]) < best:
                best = (d, e["id"])
                goal = (e["x"], e["y"])
    if goal is None:
        candidates = [(x, y) for x, y, t in snapshot.get("visible_tiles", [])
                      if _normalize(t) == wanted]
        if candidates:
            goal = min(candidates, key=lambda p: (abs(p[0] - px) + abs(p[1] - py), p))
    passable = snapshot.get("passable", {})
    if goal is not None:
        scored = []
        for direction in DIRECTION_ORDER:
            if not passable.get(direction):
                continue
            dx, dy = DIRECTIONS[direction]
            nx, ny = px + dx, py + dy
            scored.append((abs(goal[0] - nx) + abs(goal[1] - ny), direction))
        if scored:
            scored.sort(key=lambda item: (item[0], DIRECTION_ORDER.index(item[1])))
            return ActionRequest("move", {"direction": scored[0][1]})
    for direction in DIRECTION_ORDER:
        if passable.get(direction):
            return ActionRequest("move", {"direction": direction})
    return ActionRequest("wait", {})


def _resolve_primitive(primitive: Primitive, snapshot: dict) -> ActionRequest:
    if primitive.action_type == MOVE_TOWARD:
        return _resolve_move_toward(primitive.binding_map()["target"], snapshot)
    return ActionRequest(
        primitive.action_type,
        _resolve_bindings(primitive.action_type, primitive.binding_map(), snapshot))


class _Interpreter:
    def __init__(self, env: EnvHandle, budget: ExecutionBudget,
                 report: ExecutionReport):
        self.env = env
        self.budget = budget
        self.report = report

    def _perform(self, request: ActionRequest) -> None:
        if self.env.is_terminal():
            # Nothing left to execute; the game itself ended.  Treated
            # as completion — the died/won events are already recorded
            # and the summarizer judges success separately.
            raise _Stop(OUTCOME_COMPLETED)
        if self.report.steps_used >= self.budget.max_steps:
            raise _Stop(OUTCOME_BUDGET_EXHAUSTED)
        try:
            events = self.env.perform(request)
        except IllegalAction as exc:
            self.report.steps_used += 1
            self.report.abort_event = exc.blocked_event
            raise _Stop(OUTCOME_ABORTED_ILLEGAL)
        self.report.steps_used += 1
        self.report.executed.append((request, events))

    def run_primitive(self, primitive: Primitive) -> None:
        snapshot = self.env.observe_snapshot()
        try:
            request = _resolve_primitive(primitive, snapshot)
        except ParamUnresolvable:
            # Unresolvable symbolic reference at execution time: the
            # action cannot be formed, which is the same misalignment
            # signal as an illegal action.
            self.report.steps_used = min(self.report.steps_used + 1,
                                         self.budget.max_steps)
            raise _Stop(OUTCOME_ABORTED_ILLEGAL)
        self._perform(request)

    def run_body(self, instructions) -> None:
        for ins in instructions:
            if isinstance(ins, Primitive):
                self.run_primitive(ins)
            elif isinstance(ins, RepeatUntil):
                for _ in range(ins.max_iterations):
                    if self.env.is_terminal():
                        raise _Stop(OUTCOME_COMPLETED)
                    if evaluate_condition(ins.condition, self.env.observe_snapshot()):
                        break
                    self.run_body(ins.body)
            elif isinstance(ins, IfElse):
                if self.env.is_terminal():
                    raise _Stop(OUTCOME_COMPLETED)
                if evaluate_condition(ins.condition, self.env.observe_snapshot()):
                    self.run_body(ins.then_body)
                else:
                    self.run_body(ins.else_body)
            else:  # pragma: no cover - validated before execution
                raise ExecutorError(f"unknown instruction {ins!r}")


def execute_skill(script: SkillScript, env: EnvHandle,
                  budget: ExecutionBudget, plan_id: int = -1) -> ExecutionReport:
    """Interpret a skill against the environment under a step budget."""
    report = ExecutionReport(plan_id=plan_id)
    interpreter = _Interpreter(env, budget, report)
    try:
        interpreter.run_body(script.body)
        report.outcome = OUTCOME_COMPLETED
    except _Stop as stop:
        report.outcome = stop.outcome
    report.final_snapshot = env.observe_snapshot() if not env.is_terminal() else None
    return report


def execute_plan(plan, env: EnvHandle, budget: ExecutionBudget) -> ExecutionReport:
    """Direct route: translate each plan step and perform it."""
    report = ExecutionReport(plan_id=plan.id)
    interpreter = _Interpreter(env, budget, report)
    try:
        for step in plan.steps:
            if env.is_terminal():
                raise _Stop(OUTCOME_COMPLETED)
            snapshot = env.observe_snapshot()
            try:
                request = translate_to_parameters(step, snapshot)
            except ParamUnresolvable:
                report.steps_used = min(report.steps_used + 1, budget.max_steps)
                raise _Stop(OUTCOME_ABORTED_ILLEGAL)
            interpreter._perform(request)
        report.outcome = OUTCOME_COMPLETED
    except _Stop as stop:
        report.outcome = stop.outcome
    report.final_snapshot = env.observe_snapshot() if not env.is_terminal() else None
    return report
