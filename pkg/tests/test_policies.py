"""Tests for the built-in deterministic chat policies.

Every reply the policy pack produces must parse under the grammar of
the component that asked for it: plans under the planner grammar,
skills under the skill DSL, predictions and summaries under the
evaluation grammars.
"""

from conftest import small_config
from playprobe.dungeon import ACTION_SCHEMAS, new_game, observe, render_observation
from playprobe.dungeon.types import DIRECTION_ORDER
from playprobe.executor import (
    BUDGET_MAX,
    BUDGET_MIN,
    allocate_budget,
    compose_skill,
    validate_skill,
)
from playprobe.llm import ChatRequest, ScriptedChatProvider
from playprobe.personality import (
    PERSONALITY_SENTINEL,
    TRAIT_ORDER,
    build_agent_prompt,
    default_entity_mapping,
    trait_by_name,
)
from playprobe.content import GAME_DESCRIPTION
from playprobe.planner import (
    MODE_BOTTOM_UP,
    Plan,
    PlanStep,
    parse_decomposition_response,
    parse_plan_response,
    verify_plan,
)
from playprobe.policies import NEUTRAL, Obs, parse_observation, personality_of, scripted_rule
from playprobe.summarizer import (
    EventExpectation,
    ExpectedOutcome,
    VERDICT_FAILURE,
    VERDICT_SUCCESS,
    Verdict,
    evaluate,
    predict_outcome,
    preference_reflect,
    summarize,
)

MAPPING = default_entity_mapping()

RICH_OBSERVATION = """\
turn: 12
level: 1 of 4
position: (5, 5)
hp: 3/10
hunger: 60/100
upgrades: none
on tile: floor
inventory: bread x1, health potion x1, stone x2, torch x1
passable: north=yes south=yes east=no west=yes
adjacent doors: east
stairs at: (9, 8)
entities:
  rat [e2] (enemy) at (5, 4) hp 2 adjacent
  bat [e9] (enemy) at (8, 5) hp 1
  sword [i4] (item) at (5, 5)
  stone [i7] (item) at (5, 5)
"""


def system_for(trait_name):
    if trait_name == NEUTRAL:
        return "You are testing a game."
    return build_agent_prompt(trait_by_name(trait_name), GAME_DESCRIPTION, MAPPING)


def request_for(trait_name, tag, user_text):
    return ChatRequest.build(system=system_for(trait_name), user=user_text,
                             temperature=0.7, tag=tag)


def plan_prompt(observation_text, subgoal=None):
    parts = ["=== OBSERVATION ===", observation_text]
    if subgoal:
        parts.append(f"Current sub-goal of the larger plan: {subgoal}")
    parts.append("Write a plan.")
    return "\n".join(parts)


def plan_for(trait_name, observation_text=RICH_OBSERVATION, subgoal=None):
    req = request_for(trait_name, "planner.bottom_up",
                      plan_prompt(observation_text, subgoal))
    text = scripted_rule(req)
    plan = parse_plan_response(text, plan_id=0, mode=MODE_BOTTOM_UP)
    assert verify_plan(plan, ACTION_SCHEMAS, DIRECTION_ORDER, max_steps=5) == []
    return plan


class TestParseObservation:
    def test_roundtrip_from_live_game(self):
        state = new_game(5, small_config())
        snapshot = observe(state).snapshot
        obs = parse_observation("=== OBSERVATION ===\n"
                                + render_observation(snapshot)
                                + "\n=== RELEVANT MEMORIES ===\nnot terrain")
        assert obs.turn == snapshot["turn"]
        assert list(obs.position) == snapshot["position"]
        assert obs.hp == snapshot["hp"]
        assert obs.max_hp == snapshot["max_hp"]
        assert obs.hunger == snapshot["hunger"]
        assert obs.on_tile == snapshot["on_tile"]
        assert obs.inventory == snapshot["inventory"]
        assert obs.passable == snapshot["passable"]
        if snapshot["stairs_at"] is not None:
            assert list(obs.stairs) == snapshot["stairs_at"]
        assert {e.id for e in obs.entities} == \
            {e["id"] for e in snapshot["visible_entities"]}
        for parsed in obs.entities:
            raw = next(e for e in snapshot["visible_entities"]
                       if e["id"] == parsed.id)
            assert parsed.kind == raw["kind"]
            assert (parsed.role == "enemy") == raw["is_enemy"]
            assert (parsed.x, parsed.y) == (raw["x"], raw["y"])
            assert parsed.adjacent == raw["adjacent"]

    def test_rich_observation_fields(self):
        obs = parse_observation(RICH_OBSERVATION)
        assert obs.position == (5, 5)
        assert (obs.hp, obs.max_hp, obs.hunger) == (3, 10, 60)
        assert obs.inventory == {"bread": 1, "health potion": 1,
                                 "stone": 2, "torch": 1}
        assert obs.passable == {"north": True, "south": True,
                                "east": False, "west": True}
        assert obs.doors == ["east"]
        assert obs.stairs == (9, 8)
        assert [e.id for e in obs.adjacent_enemies()] == ["e2"]
        assert {e.kind for e in obs.items_here()} == {"sword", "stone"}

    def test_helpers_on_empty(self):
        obs = Obs()
        assert obs.enemies() == []
        assert obs.items_here() == []
        assert not obs.carrying("sword")


class TestPersonalityOf:
    def test_reads_sentinel_line(self):
        req = request_for("Caution", "planner.bottom_up", "hi")
        assert personality_of(req) == "Caution"

    def test_defaults_to_neutral(self):
        req = ChatRequest.build(system="plain prompt", user="hi",
                                temperature=0.0, tag="t")
        assert personality_of(req) == NEUTRAL
        assert PERSONALITY_SENTINEL not in "plain prompt"


class TestPlanResponses:
    def test_every_trait_yields_a_verified_plan(self):
        for trait_name in TRAIT_ORDER:
            plan = plan_for(trait_name)
            assert plan.steps, trait_name
            assert plan.goal, trait_name

    def test_neutral_yields_a_verified_plan(self):
        assert plan_for(NEUTRAL).steps

    def test_traits_play_differently_on_a_rich_scene(self):
        sequences = {}
        for trait_name in TRAIT_ORDER:
            plan = plan_for(trait_name)
            sequences[trait_name] = tuple(
                (s.action_type, tuple(s.parameters)) for s in plan.steps)
        assert len(set(sequences.values())) >= 5
        assert sequences["Caution"][0][0] == "use"        # heal at low hp
        assert sequences["Aggression"][0][0] == "attack"
        assert sequences["Completion"][0][0] == "pick_up"
        assert sequences["Curiosity"][0][0] == "open"

    def test_aligned_ranged_enemy_draws_a_throw(self):
        observation = RICH_OBSERVATION.replace(
            "  rat [e2] (enemy) at (5, 4) hp 2 adjacent\n", "")
        plan = plan_for("Adrenaline", observation)
        assert plan.steps[0].action_type == "throw"
        params = dict(plan.steps[0].parameters)
        assert params == {"item": "stone", "direction": "east"}

    def test_subgoal_steers_the_policy(self):
        plan = plan_for("Curiosity", RICH_OBSERVATION,
                        subgoal="reach the stairs by the shortest path")
        assert plan.goal == "reach the stairs by the shortest path"
        # Efficiency-style play despite the Curiosity persona: heads for
        # the stairs instead of opening the adjacent door.
        assert plan.steps[0].action_type in ("move", "descend")

    def test_plan_tokens_have_no_spaces(self):
        observation = RICH_OBSERVATION.replace("hp: 3/10", "hp: 10/10")
        req = request_for("Caution", "planner.bottom_up",
                          plan_prompt(observation))
        text = scripted_rule(req)
        for line in text.splitlines():
            if line.startswith("step:"):
                head = line.split("::")[0]
                for token in head.split():
                    assert " " not in token and token


class TestDecompositionResponses:
    def test_parses_with_subgoals_for_every_trait(self):
        for trait_name in TRAIT_ORDER + (NEUTRAL,):
            req = request_for(trait_name, "planner.top_down", "Decompose.")
            goal, subgoals = parse_decomposition_response(scripted_rule(req))
            assert goal
            assert len(subgoals) >= 2, trait_name

    def test_traits_decompose_differently(self):
        seen = set()
        for trait_name in TRAIT_ORDER:
            req = request_for(trait_name, "planner.top_down", "Decompose.")
            seen.add(tuple(parse_decomposition_response(scripted_rule(req))[1]))
        assert len(seen) == len(TRAIT_ORDER)


class TestBudgetResponses:
    def plan(self):
        return Plan(id=0, mode=MODE_BOTTOM_UP, goal="g",
                    steps=(PlanStep("wait", ()),))

    def test_per_trait_budgets_in_range(self):
        provider = ScriptedChatProvider(scripted_rule)
        budgets = {}
        for trait_name in TRAIT_ORDER:
            budget = allocate_budget(self.plan(), trait_name, provider)
            assert BUDGET_MIN <= budget.max_steps <= BUDGET_MAX
            budgets[trait_name] = budget.max_steps
        assert budgets["Caution"] < budgets["Aggression"]
        assert len(set(budgets.values())) >= 5

    def test_unknown_persona_gets_neutral_budget(self):
        provider = ScriptedChatProvider(scripted_rule)
        neutral = allocate_budget(self.plan(), NEUTRAL, provider)
        unknown = allocate_budget(self.plan(), "Zealot", provider)
        assert unknown.max_steps == neutral.max_steps


class TestSkillResponses:
    def compose(self, goal, *steps):
        plan = Plan(id=0, mode=MODE_BOTTOM_UP, goal=goal,
                    steps=steps or (PlanStep("wait", ()),))
        return compose_skill(plan, [], ScriptedChatProvider(scripted_rule),
                             system_for(NEUTRAL))

    def test_stairs_goal_composes_a_descend_loop(self):
        script = self.compose("reach the stairs and descend")
        assert validate_skill(script) == []
        text = " ".join(str(ins) for ins in script.body)
        assert "stairs_down" in text
        assert "descend" in text

    def test_enemy_goal_composes_an_attack_loop(self):
        script = self.compose("hunt down every enemy in sight")
        assert validate_skill(script) == []
        assert "attack" in " ".join(str(ins) for ins in script.body)

    def test_generic_goal_echoes_plan_steps(self):
        script = self.compose(
            "tidy up",
            PlanStep("pick_up", (("item", "bread"),)),
            PlanStep("wait", ()))
        assert validate_skill(script) == []
        assert [getattr(ins, "action_type", None) for ins in script.body] == \
            ["pick_up", "wait"]

    def test_names_are_stable_and_distinct(self):
        first = self.compose("reach the stairs and descend")
        again = self.compose("reach the stairs and descend")
        other = self.compose("hunt down every enemy in sight")
        assert first.name == again.name
        assert first.name != other.name
        assert first.name.startswith("skill_")


class TestEvaluationResponses:
    def plan(self):
        return Plan(id=2, mode=MODE_BOTTOM_UP, goal="use supplies", steps=(
            PlanStep("move", (("direction", "north"),)),
            PlanStep("use", (("item", "health_potion"),)),
        ))

    def test_prediction_matches_plan_actions(self):
        expected = predict_outcome(self.plan(),
                                   ScriptedChatProvider(scripted_rule),
                                   system_for("Caution"))
        kinds = {e.kind for e in expected.events}
        assert kinds == {"moved", "item_used"}
        used = next(e for e in expected.events if e.kind == "item_used")
        assert used.objects == ("health_potion",)

    def test_summary_reports_success(self):
        verdict = Verdict(VERDICT_SUCCESS, (EventExpectation("moved"),), ())
        from playprobe.executor import ExecutionReport
        report = ExecutionReport(plan_id=2, outcome="completed")
        summary = summarize(self.plan(), verdict, report,
                            ScriptedChatProvider(scripted_rule),
                            system_for("Caution"))
        assert summary.statements
        assert any("completed" in rationale
                   for _, rationale in summary.statements)

    def test_summary_names_the_unmatched_expectation(self):
        verdict = Verdict(VERDICT_FAILURE, (),
                          (EventExpectation("door_opened"),))
        from playprobe.executor import ExecutionReport
        report = ExecutionReport(plan_id=2, outcome="aborted_illegal")
        summary = summarize(self.plan(), verdict, report,
                            ScriptedChatProvider(scripted_rule),
                            system_for("Caution"))
        assert any("door_opened" in claim for claim, _ in summary.statements)

    def test_reflections_vary_by_trait_and_verdict(self):
        from playprobe.executor import ExecutionReport
        provider = ScriptedChatProvider(scripted_rule)
        texts = set()
        for trait_name in TRAIT_ORDER:
            wins = Verdict(VERDICT_SUCCESS, (), ())
            summary = summarize(self.plan(), wins,
                                ExecutionReport(plan_id=2, outcome="completed"),
                                provider, system_for(trait_name))
            pref = preference_reflect(summary, trait_name.lower(), provider,
                                      system_for(trait_name))
            assert pref.text
            texts.add(pref.text)
        assert len(texts) == len(TRAIT_ORDER)

    def test_success_and_failure_reflections_differ(self):
        from playprobe.executor import ExecutionReport
        provider = ScriptedChatProvider(scripted_rule)
        win = summarize(self.plan(), Verdict(VERDICT_SUCCESS, (), ()),
                        ExecutionReport(plan_id=2, outcome="completed"),
                        provider, system_for("Caution"))
        loss = summarize(self.plan(), Verdict(VERDICT_FAILURE, (), ()),
                         ExecutionReport(plan_id=2, outcome="completed"),
                         provider, system_for("Caution"))
        won = preference_reflect(win, "caution", provider, system_for("Caution"))
        lost = preference_reflect(loss, "caution", provider,
                                  system_for("Caution"))
        assert won.text != lost.text

    def test_unknown_tag_gets_fallback_text(self):
        req = ChatRequest.build(system="s", user="u", temperature=0.0,
                                tag="nonsense.tag")
        assert scripted_rule(req) == "I do not recognize this request."


class TestPredictionFeedsEvaluation:
    def test_chain_success_on_consistent_events(self):
        from playprobe.dungeon.types import ActionRequest, GameEvent
        from playprobe.executor import ExecutionReport
        plan = Plan(id=3, mode=MODE_BOTTOM_UP, goal="g", steps=(
            PlanStep("use", (("item", "health_potion"),)),))
        expected = predict_outcome(plan, ScriptedChatProvider(scripted_rule),
                                   system_for("Caution"))
        event = GameEvent(turn=1, kind="item_used", action_type="use",
                          subject_item="health potion")
        report = ExecutionReport(
            plan_id=3, executed=[(ActionRequest("use", {"item": "i1"}),
                                  [event])],
            steps_used=1, outcome="completed")
        assert evaluate(expected, report).status == VERDICT_SUCCESS
