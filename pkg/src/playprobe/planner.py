"""Hybrid planner: bottom-up action plans and top-down decomposition.

Mode switching follows a diversity rule over a ring buffer of the last
``window_size`` plans: once the warm-up of ``warmup_tasks`` completed
tasks moves the planner into top-down mode, the mode flips every time a
full window's newest plan introduces no action type or object absent
from the union of the earlier window entries.  Flipping clears the
buffer, and an under-filled buffer never switches.

Plan responses use a fenced, line-oriented grammar (documented in
docs/formats.md)::

    ```plan
    goal: cross the hall and open the far door
    step: move direction=east :: head toward the door
    step: open direction=east :: open it
    ```

Top-down decompositions replace ``step:`` lines with ``subplan:`` lines
naming sub-goals; each sub-goal is then planned bottom-up with
``parent_goal`` set.  Every released plan passes :func:`verify_plan`
with zero violations; violations feed a revision prompt appended to the
chat history, up to ``max_revisions`` times, then :class:`PlanRejected`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from playprobe.llm import (
    ChatProvider,
    ChatRequest,
    CREATIVE_TEMPERATURE,
)

DEFAULT_WINDOW_SIZE = 3          # W: plans compared by the diversity rule
DEFAULT_WARMUP_TASKS = 5         # N_tasks: completions before first top-down
DEFAULT_MAX_REVISIONS = 3        # R_max: revision prompts per plan
DEFAULT_MAX_STEPS = 5            # S_max: steps in a bottom-up plan
DEFAULT_INFEASIBLE_AFTER = 2     # F: consecutive failures before infeasible

MODE_BOTTOM_UP = "bottom_up"
MODE_TOP_DOWN = "top_down"

SUBPLAN_PENDING = "pending"
SUBPLAN_DONE = "done"
SUBPLAN_INFEASIBLE = "infeasible"

# Parameters whose values are directions, not objects.
_DIRECTION_PARAMS = frozenset({"direction"})

_FENCE = re.compile(r"```plan\s*\n(.*?)```", re.DOTALL)
_STEP_LINE = re.compile(r"^step:\s*(\S+)\s*(.*?)(?:::(.*))?$")
_SUBPLAN_LINE = re.compile(r"^subplan:\s*(.+)$")
_GOAL_LINE = re.compile(r"^goal:\s*(.+)$")
_PARAM = re.compile(r"(\w+)\s*=\s*(\S+)")


class PlannerError(Exception):
    pass


class PlanRejected(PlannerError):
    """All revision attempts exhausted without a valid plan."""

    def __init__(self, message: str, violations: list[str]):
        super().__init__(message)
        self.violations = violations


class MalformedPlan(PlannerError):
    pass


@dataclass(frozen=True)
class PlanStep:
    action_type: str
    parameters: tuple[tuple[str, str], ...]
    rationale: str = ""

    def parameter_map(self) -> dict[str, str]:
        return dict(self.parameters)

    def objects(self) -> frozenset[str]:
        """Referenced object names: parameter values that are not
        directions."""
        return frozenset(v for k, v in self.parameters if k not in _DIRECTION_PARAMS)

    def render(self) -> str:
        params = " ".join(f"{k}={v}" for k, v in self.parameters)
        line = f"step: {self.action_type}"
        if params:
            line += f" {params}"
        if self.rationale:
            line += f" :: {self.rationale}"
        return line


@dataclass(frozen=True)
class Plan:
    id: int
    mode: str
    goal: str
    steps: tuple[PlanStep, ...]
    parent_goal: Optional[str] = None

    def action_types(self) -> frozenset[str]:
        return frozenset(s.action_type for s in self.steps)

    def objects(self) -> frozenset[str]:
        out: set[str] = set()
        for s in self.steps:
            out |= s.objects()
        return frozenset(out)

    def render(self) -> str:
        lines = ["```plan", f"goal: {self.goal}"]
        lines += [s.render() for s in self.steps]
        lines.append("```")
        return "\n".join(lines)


@dataclass
class SubPlanSlot:
    goal: str
    status: str = SUBPLAN_PENDING
    consecutive_failures: int = 0


@dataclass
class PlannerState:
    mode: str = MODE_BOTTOM_UP
    completed_task_count: int = 0
    recent_plans: list[tuple[frozenset, frozenset]] = field(default_factory=list)
    pending_subplans: list[SubPlanSlot] = field(default_factory=list)
    reached_warmup: bool = False


# ---------------------------------------------------------------------------
# Mode switching
# ---------------------------------------------------------------------------

def should_switch(recent_plans: list[tuple[frozenset, frozenset]],
                  window_size: int) -> bool:
    """Diversity rule: switch iff the window is exactly full and its
    newest entry brings no action type or object the earlier entries
    lack (union semantics).  Pure."""
    if len(recent_plans) != window_size:
        return False
    prior_actions: set = set()
    prior_objects: set = set()
    for actions, objects in recent_plans[:-1]:
        prior_actions |= actions
        prior_objects |= objects
    newest_actions, newest_objects = recent_plans[-1]
    return newest_actions <= prior_actions and newest_objects <= prior_objects


def advance_mode(state: PlannerState, warmup_tasks: int,
                 switch_signal: bool) -> PlannerState:
    """Apply the mode-transition rules; mutates and returns ``state``.

    Bottom-up until ``completed_task_count`` first reaches the warm-up
    threshold, then top-down; thereafter every true ``switch_signal``
    flips the mode and clears the ring buffer.
    """
    if not state.reached_warmup:
        if state.completed_task_count >= warmup_tasks:
            state.reached_warmup = True
            state.mode = MODE_TOP_DOWN
            state.recent_plans.clear()
        return state
    if switch_signal:
        state.mode = MODE_BOTTOM_UP if state.mode == MODE_TOP_DOWN else MODE_TOP_DOWN
        state.recent_plans.clear()
    return state


def push_plan_window(state: PlannerState, plan: Plan, window_size: int) -> None:
    state.recent_plans.append((plan.action_types(), plan.objects()))
    while len(state.recent_plans) > window_size:
        state.recent_plans.pop(0)


# ---------------------------------------------------------------------------
# Grammar
# ---------------------------------------------------------------------------

def extract_plan_block(text: str) -> str:
    match = _FENCE.search(text)
    if not match:
        raise MalformedPlan("no ```plan fenced block found")
    return match.group(1)


def parse_plan_response(text: str, plan_id: int, mode: str,
                        parent_goal: Optional[str] = None) -> Plan:
    """Parse a fenced bottom-up plan response into a Plan."""
    block = extract_plan_block(text)
    goal = ""
    steps: list[PlanStep] = []
    for raw_line in block.splitlines():
        line = raw_line.strip()
        if not line:
            continue
        goal_match = _GOAL_LINE.match(line)
        if goal_match:
            goal = goal_match.group(1).strip()
            continue
        step_match = _STEP_LINE.match(line)
        if step_match:
            action = step_match.group(1)
            params = tuple(sorted(_PARAM.findall(step_match.group(2) or "")))
            rationale = (step_match.group(3) or "").strip()
            steps.append(PlanStep(action_type=action, parameters=params,
                                  rationale=rationale))
            continue
        if _SUBPLAN_LINE.match(line):
            raise MalformedPlan("subplan lines not allowed in a bottom-up plan")
        raise MalformedPlan(f"unparseable plan line: {line!r}")
    if not goal:
        raise MalformedPlan("plan is missing a goal line")
    if not steps:
        raise MalformedPlan("plan has no steps")
    return Plan(id=plan_id, mode=mode, goal=goal, steps=tuple(steps),
                parent_goal=parent_goal)


def parse_decomposition_response(text: str) -> tuple[str, list[str]]:
    """Parse a top-down response into (goal, ordered sub-goals)."""
    block = extract_plan_block(text)
    goal = ""
    subgoals: list[str] = []
    for raw_line in block.splitlines():
        line = raw_line.strip()
        if not line:
            continue
        goal_match = _GOAL_LINE.match(line)
        if goal_match:
            goal = goal_match.group(1).strip()
            continue
        sub_match = _SUBPLAN_LINE.match(line)
        if sub_match:
            subgoals.append(sub_match.group(1).strip())
            continue
        if _STEP_LINE.match(line):
            raise MalformedPlan("step lines not allowed in a decomposition")
        raise MalformedPlan(f"unparseable decomposition line: {line!r}")
    if not goal:
        raise MalformedPlan("decomposition is missing a goal line")
    if not subgoals:
        raise MalformedPlan("decomposition names no sub-plans")
    return goal, subgoals


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------

def verify_plan(plan: Plan, action_schemas: dict[str, tuple[str, ...]],
                valid_directions: tuple[str, ...],
                max_steps: int) -> list[str]:
    """Check a plan against the game definitions.  Returns violations
    (empty list = ok).  Pure."""
    violations: list[str] = []
    if plan.mode == MODE_BOTTOM_UP and len(plan.steps) > max_steps:
        violations.append(f"plan has {len(plan.steps)} steps; the maximum is {max_steps}")
    for index, step in enumerate(plan.steps, 1):
        schema = action_schemas.get(step.action_type)
        if schema is None:
            violations.append(
                f"step {index}: unknown action type {step.action_type!r}")
            continue
        given = tuple(sorted(step.parameter_map()))
        expected = tuple(sorted(schema))
        if given != expected:
            violations.append(
                f"step {index} ({step.action_type}): parameters must be exactly "
                f"{list(expected)}, got {list(given)}")
            continue
        direction = step.parameter_map().get("direction")
        if direction is not None and direction not in valid_directions:
            violations.append(
                f"step {index} ({step.action_type}): direction must be one of "
                f"{list(valid_directions)}, got {direction!r}")
    return violations


# ---------------------------------------------------------------------------
# Planner
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlannerTunables:
    window_size: int = DEFAULT_WINDOW_SIZE
    warmup_tasks: int = DEFAULT_WARMUP_TASKS
    max_revisions: int = DEFAULT_MAX_REVISIONS
    max_steps: int = DEFAULT_MAX_STEPS
    infeasible_after: int = DEFAULT_INFEASIBLE_AFTER


_BOTTOM_UP_INSTRUCTIONS = """\
Plan your next few actions.  Reply with exactly one fenced block:

```plan
goal: <one line describing what these steps accomplish>
step: <action_type> <name>=<value> ... :: <why, in character>
```

Use at most {max_steps} step lines.  Only the listed action types and
parameters are valid.  Refer to items and enemies by the ids shown in
the observation."""

_TOP_DOWN_INSTRUCTIONS = """\
Set a higher-level goal and break it into sub-plans.  Reply with exactly
one fenced block:

```plan
goal: <the high-level goal>
subplan: <first sub-goal, one line>
subplan: <second sub-goal, one line>
```

List the sub-plans in execution order.  Each will later be planned and
executed on its own."""


class HybridPlanner:
    """Issues planning requests and enforces the revision loop."""

    def __init__(self, provider: ChatProvider, system_prompt: str,
                 action_schemas: dict[str, tuple[str, ...]],
                 valid_directions: tuple[str, ...],
                 action_guide: str,
                 tunables: PlannerTunables = PlannerTunables(),
                 temperature: float = CREATIVE_TEMPERATURE):
        self.provider = provider
        self.system_prompt = system_prompt
        self.action_schemas = dict(action_schemas)
        self.valid_directions = tuple(valid_directions)
        self.action_guide = action_guide
        self.tunables = tunables
        self.temperature = temperature
        self.state = PlannerState()
        self._next_plan_id = 0

    # -- bookkeeping -----------------------------------------------------

    def _take_plan_id(self) -> int:
        plan_id = self._next_plan_id
        self._next_plan_id += 1
        return plan_id

    def note_task_completed(self) -> None:
        """Record one completed task (counts sub-plan completions too)."""
        self.state.completed_task_count += 1

    def observe_plan(self, plan: Plan) -> None:
        """Push a released plan into the diversity window and advance
        the mode state machine."""
        push_plan_window(self.state, plan, self.tunables.window_size)
        signal = should_switch(self.state.recent_plans, self.tunables.window_size)
        advance_mode(self.state, self.tunables.warmup_tasks, signal)

    # -- prompting -------------------------------------------------------

    def _context_text(self, observation_text: str, memories: list[str],
                      previous_plans: list[str]) -> str:
        parts = ["=== OBSERVATION ===", observation_text]
        if memories:
            parts += ["", "=== RELEVANT EXPERIENCE ==="]
            parts += [f"- {m}" for m in memories]
        if previous_plans:
            parts += ["", "=== EARLIER PLANS ==="]
            parts += previous_plans
        parts += ["", "=== ACTIONS ===", self.action_guide]
        return "\n".join(parts)

    def _chat_loop(self, user_text: str, tag: str, parse):
        """Request/parse/verify with up to ``max_revisions`` revision
        prompts; each revision appends to the chat history."""
        messages: list[tuple[str, str]] = [
            ("system", self.system_prompt),
            ("user", user_text),
        ]
        last_violations: list[str] = []
        for _ in range(self.tunables.max_revisions + 1):
            request = ChatRequest(messages=tuple(messages),
                                  temperature=self.temperature, tag=tag)
            response = self.provider.chat(request)
            try:
                parsed = parse(response)
                violations = parsed[1]
                if not violations:
                    return parsed[0], messages, response
            except MalformedPlan as exc:
                violations = [str(exc)]
            last_violations = violations
            messages.append(("assistant", response))
            messages.append((
                "user",
                "Your reply was rejected:\n"
                + "\n".join(f"- {v}" for v in violations)
                + "\nReply again with one corrected fenced plan block.",
            ))
        raise PlanRejected(
            f"no valid plan after {self.tunables.max_revisions} revisions",
            last_violations)

    # -- public planning entry points ------------------------------------

    def plan_bottom_up(self, observation_text: str, memories: list[str] | None = None,
                       previous_plans: list[str] | None = None,
                       parent_goal: Optional[str] = None) -> Plan:
        """One verified bottom-up plan (revision loop inside)."""
        plan_id = self._take_plan_id()
        context = self._context_text(observation_text, memories or [],
                                     previous_plans or [])
        prompt = context + "\n\n"
        if parent_goal is not None:
            prompt += f"Current sub-goal of the larger plan: {parent_goal}\n\n"
        prompt += _BOTTOM_UP_INSTRUCTIONS.format(max_steps=self.tunables.max_steps)

        def parse(text: str):
            plan = parse_plan_response(text, plan_id, MODE_BOTTOM_UP,
                                       parent_goal=parent_goal)
            return plan, verify_plan(plan, self.action_schemas,
                                     self.valid_directions, self.tunables.max_steps)

        plan, _, _ = self._chat_loop(prompt, "planner.bottom_up", parse)
        return plan

    def plan_top_down(self, observation_text: str, memories: list[str] | None = None,
                      previous_plans: list[str] | None = None) -> tuple[str, list[SubPlanSlot]]:
        """One decomposition: (high-level goal, ordered sub-plan queue)."""
        context = self._context_text(observation_text, memories or [],
                                     previous_plans or [])
        prompt = context + "\n\n" + _TOP_DOWN_INSTRUCTIONS

        def parse(text: str):
            goal, subgoals = parse_decomposition_response(text)
            return (goal, subgoals), []

        (goal, subgoals), _, _ = self._chat_loop(prompt, "planner.top_down", parse)
        slots = [SubPlanSlot(goal=g) for g in subgoals]
        self.state.pending_subplans = slots
        return goal, slots

    # -- sub-plan queue management ---------------------------------------

    def record_subplan_verdict(self, slot: SubPlanSlot, success: bool) -> None:
        """Book a summarizer verdict against a sub-plan slot.

        Success marks the slot done and counts a completed task.
        ``infeasible_after`` consecutive failures mark the slot
        infeasible, which abandons the whole queue (remaining pending
        slots become infeasible too).
        """
        if success:
            slot.status = SUBPLAN_DONE
            slot.consecutive_failures = 0
            self.note_task_completed()
            return
        slot.consecutive_failures += 1
        if slot.consecutive_failures >= self.tunables.infeasible_after:
            slot.status = SUBPLAN_INFEASIBLE
            for other in self.state.pending_subplans:
                if other.status == SUBPLAN_PENDING:
                    other.status = SUBPLAN_INFEASIBLE

    def next_pending_subplan(self) -> Optional[SubPlanSlot]:
        for slot in self.state.pending_subplans:
            if slot.status == SUBPLAN_PENDING:
                return slot
        return None

    def decomposition_finished(self) -> bool:
        return all(s.status != SUBPLAN_PENDING for s in self.state.pending_subplans)
