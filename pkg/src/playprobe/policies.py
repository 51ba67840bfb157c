"""Built-in deterministic chat policies for fully offline campaigns.

:func:`scripted_rule` is a pure function of the request: it reads the
personality name from the system message, parses the observation block
out of the user prompt, and answers every gateway tag (planning,
decomposition, budgeting, skill composition, prediction, summarizing,
reflection) with well-formed deterministic text.  Each trait plays a
recognizably different style, so campaigns driven by this provider
produce genuinely distinct behaviour per personality — a stand-in for a
live model with the same interfaces and grammars.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Optional

from playprobe.dungeon.types import DIRECTION_ORDER
from playprobe.llm import ChatRequest
from playprobe.personality import PERSONALITY_SENTINEL

NEUTRAL = "Neutral"

_POSITION = re.compile(r"^position: \((-?\d+), (-?\d+)\)$")
_HP = re.compile(r"^hp: (\d+)/(\d+)$")
_HUNGER = re.compile(r"^hunger: (\d+)/(\d+)$")
_TURN = re.compile(r"^turn: (\d+)$")
_ON_TILE = re.compile(r"^on tile: (\S+)$")
_STAIRS = re.compile(r"^stairs at: \((-?\d+), (-?\d+)\)$")
_PASSABLE = re.compile(r"^passable: (.+)$")
_INVENTORY = re.compile(r"^inventory: (.+)$")
_DOORS = re.compile(r"^adjacent doors: (.+)$")
_ENTITY = re.compile(
    r"^(.+?) \[(\w+)\] \((enemy|item)\) at \((-?\d+), (-?\d+)\)(?: hp (\d+))?( adjacent)?$")
_SUBGOAL = re.compile(r"^Current sub-goal of the larger plan: (.+)$", re.MULTILINE)
_VERDICT = re.compile(r"^Verdict: (\w+)$", re.MULTILINE)
_OUTCOME = re.compile(r"^Execution outcome: (\w+)$", re.MULTILINE)
_UNMATCHED = re.compile(r"^Unmatched expectations: (.+)$", re.MULTILINE)
_PLAN_FENCE = re.compile(r"```plan\s*\n(.*?)```", re.DOTALL)
_GOAL_LINE = re.compile(r"^goal:\s*(.+)$", re.MULTILINE)
_STEP_LINE = re.compile(r"^step:\s*(\S+)\s*([^:]*?)(?:::.*)?$")


@dataclass
class Entity:
    kind: str
    id: str
    role: str
    x: int
    y: int
    hp: int
    adjacent: bool


@dataclass
class Obs:
    turn: int = 0
    position: tuple[int, int] = (0, 0)
    hp: int = 0
    max_hp: int = 1
    hunger: int = 0
    on_tile: str = ""
    inventory: dict[str, int] = field(default_factory=dict)
    passable: dict[str, bool] = field(default_factory=dict)
    doors: list[str] = field(default_factory=list)
    stairs: Optional[tuple[int, int]] = None
    entities: list[Entity] = field(default_factory=list)

    def enemies(self) -> list[Entity]:
        return [e for e in self.entities if e.role == "enemy"]

    def items(self) -> list[Entity]:
        return [e for e in self.entities if e.role == "item"]

    def items_here(self) -> list[Entity]:
        return [e for e in self.items() if (e.x, e.y) == self.position]

    def adjacent_enemies(self) -> list[Entity]:
        return [e for e in self.enemies() if e.adjacent]

    def carrying(self, name: str) -> bool:
        return self.inventory.get(name, 0) > 0


def parse_observation(prompt: str) -> Obs:
    """Parse the observation section of a planning/prediction prompt."""
    obs = Obs()
    section = prompt
    marker = "=== OBSERVATION ==="
    if marker in prompt:
        section = prompt.split(marker, 1)[1]
        for stop in ("=== RELEVANT", "=== EARLIER", "=== ACTIONS"):
            if stop in section:
                section = section.split(stop, 1)[0]
    for raw in section.splitlines():
        line = raw.strip()
        match = _TURN.match(line)
        if match:
            obs.turn = int(match.group(1))
            continue
        match = _POSITION.match(line)
        if match:
            obs.position = (int(match.group(1)), int(match.group(2)))
            continue
        match = _HP.match(line)
        if match:
            obs.hp, obs.max_hp = int(match.group(1)), int(match.group(2))
            continue
        match = _HUNGER.match(line)
        if match:
            obs.hunger = int(match.group(1))
            continue
        match = _ON_TILE.match(line)
        if match:
            obs.on_tile = match.group(1)
            continue
        match = _STAIRS.match(line)
        if match:
            obs.stairs = (int(match.group(1)), int(match.group(2)))
            continue
        match = _PASSABLE.match(line)
        if match:
            for part in match.group(1).split():
                direction, _, flag = part.partition("=")
                obs.passable[direction] = flag == "yes"
            continue
        match = _INVENTORY.match(line)
        if match and match.group(1) != "empty":
            for part in match.group(1).split(", "):
                name, _, count = part.rpartition(" x")
                if name and count.isdigit():
                    obs.inventory[name] = int(count)
            continue
        match = _DOORS.match(line)
        if match:
            obs.doors = [d.strip() for d in match.group(1).split(",")]
            continue
        match = _ENTITY.match(line)
        if match:
            obs.entities.append(Entity(
                kind=match.group(1), id=match.group(2), role=match.group(3),
                x=int(match.group(4)), y=int(match.group(5)),
                hp=int(match.group(6) or 0), adjacent=bool(match.group(7))))
    return obs


def personality_of(request: ChatRequest) -> str:
    for role, content in request.messages:
        if role == "system":
            for line in content.splitlines():
                if line.startswith(PERSONALITY_SENTINEL):
                    return line[len(PERSONALITY_SENTINEL):].strip()
    return NEUTRAL


def _first_user(request: ChatRequest) -> str:
    for role, content in request.messages:
        if role == "user":
            return content
    return ""


def _salt(*parts) -> int:
    """Deterministic small integer from text parts (policy tie-breaks)."""
    joined = "|".join(str(p) for p in parts)
    return int.from_bytes(hashlib.sha256(joined.encode()).digest()[:4], "big")


def _token(name: str) -> str:
    """Render an entity name as a single plan-grammar token."""
    return str(name).replace(" ", "_")


def _explore_direction(obs: Obs, persona: str) -> Optional[str]:
    """Pick a passable direction, varying by position, turn, and
    persona so different traits trace different paths."""
    options = [d for d in DIRECTION_ORDER if obs.passable.get(d)]
    if not options:
        return None
    index = _salt(persona, obs.position, obs.turn // 3) % len(options)
    return options[index]


def _direction_toward(obs: Obs, goal: tuple[int, int]) -> Optional[str]:
    px, py = obs.position
    gx, gy = goal
    preferences = []
    if gx > px:
        preferences.append("east")
    if gx < px:
        preferences.append("west")
    if gy > py:
        preferences.append("south")
    if gy < py:
        preferences.append("north")
    for direction in preferences:
        if obs.passable.get(direction):
            return direction
    return None


def _direction_away(obs: Obs, threat: tuple[int, int]) -> Optional[str]:
    px, py = obs.position
    tx, ty = threat
    preferences = []
    if tx >= px:
        preferences.append("west")
    if tx <= px:
        preferences.append("east")
    if ty >= py:
        preferences.append("north")
    if ty <= py:
        preferences.append("south")
    for direction in preferences:
        if obs.passable.get(direction):
            return direction
    return None


def _nearest(obs: Obs, entities: list[Entity]) -> Optional[Entity]:
    px, py = obs.position
    best = None
    for e in sorted(entities, key=lambda e: e.id):
        d = abs(e.x - px) + abs(e.y - py)
        if best is None or d < best[0]:
            best = (d, e)
    return best[1] if best else None


def _throw_direction(obs: Obs, enemy: Entity) -> Optional[str]:
    """Direction for a straight-line throw within range, if aligned."""
    px, py = obs.position
    if enemy.y == py and 0 < abs(enemy.x - px) <= 4:
        return "east" if enemy.x > px else "west"
    if enemy.x == px and 0 < abs(enemy.y - py) <= 4:
        return "south" if enemy.y > py else "north"
    return None


# ---------------------------------------------------------------------------
# Per-trait step policies
# ---------------------------------------------------------------------------

Step = tuple[str, dict, str]   # (action_type, parameters, rationale)


def _step_move(direction: str, why: str) -> Step:
    return ("move", {"direction": direction}, why)


def _fallback(obs: Obs, persona: str) -> Step:
    direction = _explore_direction(obs, persona)
    if direction:
        return _step_move(direction, "keep moving")
    return ("wait", {}, "nowhere to go")


def _toward_stairs(obs: Obs, persona: str, why: str) -> Step:
    if obs.on_tile == "stairs_down":
        return ("descend", {}, "take the stairs")
    if obs.stairs:
        direction = _direction_toward(obs, obs.stairs)
        if direction:
            return _step_move(direction, why)
    return _fallback(obs, persona)


def _policy_aggression(obs: Obs) -> list[Step]:
    adjacent = obs.adjacent_enemies()
    if adjacent:
        target = sorted(adjacent, key=lambda e: e.id)[0]
        steps = [("attack", {"target": target.kind}, "cut it down")]
        if target.hp > 1:
            steps.append(("attack", {"target": target.kind}, "finish it"))
        return steps
    enemy = _nearest(obs, obs.enemies())
    if enemy:
        direction = _direction_toward(obs, (enemy.x, enemy.y))
        if direction:
            return [_step_move(direction, f"close in on the {enemy.kind}")]
    weapons = [e for e in obs.items_here() if e.kind == "sword"]
    if weapons:
        return [("pick_up", {"item": weapons[0].kind}, "a better weapon"),
                ("use", {"item": weapons[0].kind}, "arm up")]
    return [_toward_stairs(obs, "Aggression", "find more enemies below")]


def _policy_caution(obs: Obs) -> list[Step]:
    if obs.hp <= obs.max_hp // 2 and obs.carrying("health potion"):
        return [("use", {"item": "health potion"}, "heal before anything else")]
    adjacent = obs.adjacent_enemies()
    if adjacent:
        threat = adjacent[0]
        away = _direction_away(obs, (threat.x, threat.y))
        if away:
            return [_step_move(away, f"back away from the {threat.kind}")]
        return [("attack", {"target": threat.kind}, "cornered, defend myself")]
    if obs.hunger > 50 and obs.carrying("bread"):
        return [("eat", {"item": "bread"}, "stay fed, stay safe")]
    enemy = _nearest(obs, obs.enemies())
    if enemy and abs(enemy.x - obs.position[0]) + abs(enemy.y - obs.position[1]) <= 3:
        away = _direction_away(obs, (enemy.x, enemy.y))
        if away:
            return [_step_move(away, "keep my distance")]
    supplies = [e for e in obs.items_here()
                if e.kind in ("health potion", "bread", "torch")]
    if supplies:
        return [("pick_up", {"item": supplies[0].kind}, "stock up")]
    return [_toward_stairs(obs, "Caution", "proceed carefully")]


def _policy_achievement(obs: Obs) -> list[Step]:
    if obs.on_tile == "stairs_down":
        return [("descend", {}, "next level, closer to winning")]
    adjacent = obs.adjacent_enemies()
    if adjacent:
        target = sorted(adjacent, key=lambda e: e.id)[0]
        return [("attack", {"target": target.kind}, "clear the obstacle")]
    useful = [e for e in obs.items_here() if e.kind in ("sword", "health potion")]
    if useful:
        steps = [("pick_up", {"item": useful[0].kind}, "this will help me win")]
        if useful[0].kind == "sword":
            steps.append(("use", {"item": "sword"}, "equip it"))
        return steps
    return [_toward_stairs(obs, "Achievement", "press on toward the goal")]


def _policy_efficiency(obs: Obs) -> list[Step]:
    if obs.on_tile == "stairs_down":
        return [("descend", {}, "shortest route is down")]
    adjacent = obs.adjacent_enemies()
    if adjacent and obs.stairs is None:
        target = sorted(adjacent, key=lambda e: e.id)[0]
        return [("attack", {"target": target.kind}, "remove the blocker")]
    if obs.stairs:
        direction = _direction_toward(obs, obs.stairs)
        if direction:
            return [_step_move(direction, "beeline for the stairs"),
                    _step_move(direction, "keep the line")]
    if adjacent:
        target = sorted(adjacent, key=lambda e: e.id)[0]
        return [("attack", {"target": target.kind}, "it is in the way")]
    return [_fallback(obs, "Efficiency")]


def _policy_completion(obs: Obs) -> list[Step]:
    here = obs.items_here()
    if here:
        return [("pick_up", {"item": e.kind}, "collect everything")
                for e in sorted(here, key=lambda e: e.id)[:2]]
    if obs.doors:
        return [("open", {"direction": obs.doors[0]}, "open every door")]
    item = _nearest(obs, obs.items())
    if item:
        direction = _direction_toward(obs, (item.x, item.y))
        if direction:
            return [_step_move(direction, f"go collect the {item.kind}")]
    adjacent = obs.adjacent_enemies()
    if adjacent:
        target = sorted(adjacent, key=lambda e: e.id)[0]
        return [("attack", {"target": target.kind}, "clear this room fully")]
    if obs.on_tile == "stairs_down" and not obs.items() and not obs.doors:
        return [("descend", {}, "this level is done")]
    return [_fallback(obs, "Completion")]


def _policy_curiosity(obs: Obs) -> list[Step]:
    if obs.doors:
        return [("open", {"direction": obs.doors[0]}, "what is behind it?")]
    here = obs.items_here()
    if here:
        return [("pick_up", {"item": here[0].kind}, "what does this do?")]
    if obs.carrying("torch"):
        return [("use", {"item": "torch"}, "light it and see more")]
    if obs.carrying("stone") and obs.turn % 5 == 0:
        direction = _explore_direction(obs, "Curiosity-throw") or "north"
        return [("throw", {"item": "stone", "direction": direction},
                 "see how far it flies")]
    if obs.on_tile == "stairs_down" and obs.turn % 4 == 0:
        return [("descend", {}, "a whole new level to see")]
    return [_fallback(obs, "Curiosity")]


def _policy_adrenaline(obs: Obs) -> list[Step]:
    enemy = _nearest(obs, obs.enemies())
    if obs.carrying("stone") and enemy and not enemy.adjacent:
        direction = _throw_direction(obs, enemy)
        if direction:
            return [("throw", {"item": "stone", "direction": direction},
                     "let it fly!")]
    adjacent = obs.adjacent_enemies()
    if adjacent:
        target = sorted(adjacent, key=lambda e: e.id)[0]
        return [("attack", {"target": target.kind}, "right into the fight")]
    if enemy:
        direction = _direction_toward(obs, (enemy.x, enemy.y))
        if direction:
            return [_step_move(direction, f"charge the {enemy.kind}")]
    stones = [e for e in obs.items_here() if e.kind == "stone"]
    if stones:
        return [("pick_up", {"item": "stone"}, "ammunition for later")]
    return [_toward_stairs(obs, "Adrenaline", "danger is deeper down")]


def _policy_neutral(obs: Obs) -> list[Step]:
    adjacent = obs.adjacent_enemies()
    if adjacent:
        target = sorted(adjacent, key=lambda e: e.id)[0]
        return [("attack", {"target": target.kind}, "deal with the enemy")]
    here = obs.items_here()
    if here:
        return [("pick_up", {"item": here[0].kind}, "might be useful")]
    if obs.doors:
        return [("open", {"direction": obs.doors[0]}, "open the way")]
    return [_toward_stairs(obs, NEUTRAL, "head for the stairs")]


_POLICIES = {
    "Achievement": _policy_achievement,
    "Adrenaline": _policy_adrenaline,
    "Aggression": _policy_aggression,
    "Caution": _policy_caution,
    "Completion": _policy_completion,
    "Curiosity": _policy_curiosity,
    "Efficiency": _policy_efficiency,
    NEUTRAL: _policy_neutral,
}

_BUDGETS = {
    "Achievement": 80,
    "Adrenaline": 120,
    "Aggression": 150,
    "Caution": 40,
    "Completion": 100,
    "Curiosity": 90,
    "Efficiency": 25,
    NEUTRAL: 50,
}

_SUBGOALS = {
    "Achievement": ("clear the way forward", "reach the stairs and descend"),
    "Adrenaline": ("charge the nearest enemies", "dive down the stairs"),
    "Aggression": ("hunt down every enemy in sight", "push deeper to find more"),
    "Caution": ("gather healing supplies", "reach the stairs without fighting"),
    "Completion": ("collect every item on this level", "open every door",
                   "then take the stairs"),
    "Curiosity": ("explore the unvisited corners", "try out a carried item",
                  "peek down the stairs"),
    "Efficiency": ("reach the stairs by the shortest path", "descend at once"),
    NEUTRAL: ("explore this level", "reach the stairs and descend"),
}

_REFLECTIONS_SUCCESS = {
    "Achievement": "Progress made, objective closer. This is exactly the kind "
                   "of step that wins games; I will keep chaining wins like it.",
    "Adrenaline": "What a rush! The riskier it got, the better it felt. I will "
                  "chase moments like that again without hesitation.",
    "Aggression": "I enjoyed that fight. Combat is what I am here for, and "
                  "cutting enemies down felt excellent. More of this.",
    "Caution": "It worked, but I keep thinking about what could have gone "
               "wrong. I prefer the safe route and will keep avoiding risk.",
    "Completion": "Another box ticked. Leaving nothing behind is deeply "
                  "satisfying; I will keep sweeping every corner.",
    "Curiosity": "Fascinating! I learned something new about how this world "
                 "works. I want to poke at everything else too.",
    "Efficiency": "Done with minimal waste. Every turn spent had a purpose; "
                  "I will keep trimming the fat from my play.",
    NEUTRAL: "That went as planned. I will continue with the same approach.",
}

_REFLECTIONS_FAILURE = {
    "Achievement": "A setback, and I do not like setbacks. I will adjust and "
                   "get back on the winning path immediately.",
    "Adrenaline": "Even failing was a thrill, honestly. Still, next time I "
                  "want the risk AND the payoff.",
    "Aggression": "The fight slipped away from me. It will not happen twice; "
                  "I will hit harder and sooner.",
    "Caution": "This is why I avoid risk. I took a chance and it cost me; "
               "from now on I retreat earlier and prepare better.",
    "Completion": "Something was left unfinished and it bothers me. I will go "
                  "back and complete what I missed.",
    "Curiosity": "Unexpected, which is almost as good as a success. Now I "
                 "know one more way this world pushes back.",
    "Efficiency": "Wasted turns. The plan was not tight enough; I will cut "
                  "the slack from the next one.",
    NEUTRAL: "That did not work as planned. I will try a different approach.",
}


# ---------------------------------------------------------------------------
# Response builders per tag
# ---------------------------------------------------------------------------

def _steer_policy(persona: str, subgoal: str):
    """Pick the policy for a sub-goal: keyword steering so top-down
    sub-plans play differently from plain bottom-up turns."""
    text = subgoal.lower()
    if "stairs" in text or "descend" in text or "shortest" in text:
        return _policy_efficiency
    if "enem" in text or "hunt" in text or "charge" in text or "fight" in text:
        return _policy_aggression
    if "collect" in text or "item" in text or "door" in text:
        return _policy_completion
    if "explore" in text or "corner" in text or "peek" in text or "try" in text:
        return _policy_curiosity
    if "heal" in text or "supplies" in text or "without fighting" in text:
        return _policy_caution
    return _POLICIES.get(persona, _policy_neutral)


def _plan_response(request: ChatRequest) -> str:
    base_prompt = _first_user(request)
    persona = personality_of(request)
    obs = parse_observation(base_prompt)
    sub_match = _SUBGOAL.search(base_prompt)
    if sub_match:
        policy = _steer_policy(persona, sub_match.group(1))
        goal = sub_match.group(1)
    else:
        policy = _POLICIES.get(persona, _policy_neutral)
        goal = {
            "Achievement": "advance toward winning the game",
            "Adrenaline": "find the most exciting thing nearby",
            "Aggression": "engage the nearest enemy",
            "Caution": "stay safe while making careful progress",
            "Completion": "leave nothing on this level unchecked",
            "Curiosity": "investigate whatever looks interesting",
            "Efficiency": "make the fastest possible progress",
        }.get(persona, "make steady progress")
    steps = policy(obs)[:5]
    lines = ["```plan", f"goal: {goal}"]
    for action, params, why in steps:
        rendered = " ".join(f"{k}={_token(v)}" for k, v in sorted(params.items()))
        lines.append(f"step: {action}" + (f" {rendered}" if rendered else "")
                     + f" :: {why}")
    lines.append("```")
    return "\n".join(lines)


def _decomposition_response(request: ChatRequest) -> str:
    persona = personality_of(request)
    subgoals = _SUBGOALS.get(persona, _SUBGOALS[NEUTRAL])
    lines = ["```plan", f"goal: work this level the {persona} way"]
    lines += [f"subplan: {s}" for s in subgoals]
    lines.append("```")
    return "\n".join(lines)


def _budget_response(request: ChatRequest) -> str:
    prompt = _first_user(request)
    match = re.search(r"agent with the (\w+) personality", prompt)
    persona = match.group(1) if match else personality_of(request)
    return str(_BUDGETS.get(persona, _BUDGETS[NEUTRAL]))


def _parse_plan_from_prompt(prompt: str) -> tuple[str, list[tuple[str, dict]]]:
    fence = _PLAN_FENCE.search(prompt)
    goal = ""
    steps: list[tuple[str, dict]] = []
    if fence:
        for raw in fence.group(1).splitlines():
            line = raw.strip()
            goal_match = _GOAL_LINE.match(line)
            if goal_match:
                goal = goal_match.group(1).strip()
                continue
            step_match = _STEP_LINE.match(line)
            if step_match and line.startswith("step:"):
                params = dict(re.findall(r"(\w+)=(\S+)", step_match.group(2) or ""))
                steps.append((step_match.group(1), params))
    return goal, steps


def _skill_response(request: ChatRequest) -> str:
    prompt = _first_user(request)
    goal, steps = _parse_plan_from_prompt(prompt)
    name = "skill_" + hashlib.sha256(
        (goal + repr(steps)).encode()).hexdigest()[:10]
    lines = ["```skill", f"skill: {name}",
             f"description: {goal or 'execute the planned steps'}"]
    goal_text = goal.lower()
    if "stairs" in goal_text or "descend" in goal_text:
        lines += [
            "repeat_until on_tile(stairs_down) max=40",
            "  move_toward target=stairs_down",
            "end",
            "if on_tile(stairs_down)",
            "  primitive descend",
            "end",
        ]
    elif "enem" in goal_text or "hunt" in goal_text or "charge" in goal_text:
        lines += [
            "repeat_until adjacent(rat) max=20",
            "  move_toward target=rat",
            "end",
            "if adjacent(rat)",
            "  primitive attack target=rat",
            "  primitive attack target=rat",
            "else",
            "  primitive wait",
            "end",
        ]
    else:
        for action, params in steps or [("wait", {})]:
            rendered = " ".join(f"{k}={v}" for k, v in sorted(params.items()))
            lines.append(f"primitive {action}" + (f" {rendered}" if rendered else ""))
    lines.append("```")
    return "\n".join(lines)


_EXPECTED_EVENT = {
    "move": "moved",
    "attack": "attacked",
    "pick_up": "item_picked",
    "use": "item_used",
    "throw": "item_thrown",
    "eat": "item_eaten",
    "open": "door_opened",
    "descend": "level_descended",
    "wait": "waited",
}


def _predict_response(request: ChatRequest) -> str:
    prompt = _first_user(request)
    _, steps = _parse_plan_from_prompt(prompt)
    lines = ["```expect"]
    seen = set()
    for action, params in steps:
        kind = _EXPECTED_EVENT.get(action)
        if kind is None:
            continue
        objects = ""
        if action in ("use", "eat", "throw", "pick_up") and "item" in params:
            objects = f" {_token(params['item'])}"
        elif action == "attack" and "target" in params:
            objects = f" {_token(params['target'])}"
        line = f"event: {kind}{objects}"
        if line not in seen:
            seen.add(line)
            lines.append(line)
    if len(lines) == 1:
        lines.append("event: waited")
    lines.append("```")
    return "\n".join(lines)


def _summary_response(request: ChatRequest) -> str:
    prompt = _first_user(request)
    verdict_match = _VERDICT.search(prompt)
    outcome_match = _OUTCOME.search(prompt)
    verdict = verdict_match.group(1) if verdict_match else "failure"
    outcome = outcome_match.group(1) if outcome_match else "unknown"
    lines = ["```summary"]
    if verdict == "success":
        lines.append("claim: the plan accomplished what it set out to do "
                     ":: every expected event appears in the log")
        lines.append(f"claim: execution ran cleanly :: the outcome was {outcome}")
    else:
        unmatched_match = _UNMATCHED.search(prompt)
        unmatched = (unmatched_match.group(1).strip()
                     if unmatched_match else "(none)")
        if unmatched and unmatched != "(none)":
            first = unmatched.split(",")[0].strip()
            lines.append(f"claim: the expectation {first} was not met "
                         ":: it is listed as unmatched against the event log")
        lines.append(f"claim: the plan fell short :: the verdict was {verdict} "
                     f"with outcome {outcome}")
    lines.append("```")
    return "\n".join(lines)


def _reflect_response(request: ChatRequest) -> str:
    persona = personality_of(request)
    prompt = _first_user(request)
    verdict_match = _VERDICT.search(prompt)
    verdict = verdict_match.group(1) if verdict_match else "failure"
    table = _REFLECTIONS_SUCCESS if verdict == "success" else _REFLECTIONS_FAILURE
    return table.get(persona, table[NEUTRAL])


def scripted_rule(request: ChatRequest) -> str:
    """The built-in deterministic policy pack: route by request tag."""
    tag = request.tag
    if tag == "planner.bottom_up":
        return _plan_response(request)
    if tag == "planner.top_down":
        return _decomposition_response(request)
    if tag == "executor.budget":
        return _budget_response(request)
    if tag == "executor.compose_skill":
        return _skill_response(request)
    if tag == "summarizer.predict":
        return _predict_response(request)
    if tag == "summarizer.summarize":
        return _summary_response(request)
    if tag == "summarizer.reflect":
        return _reflect_response(request)
    return "I do not recognize this request."
