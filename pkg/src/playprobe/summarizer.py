"""Iteration evaluation: predict, compare, summarize, reflect.

The prompt chain per iteration: :func:`predict_outcome` asks the model
what a plan should cause before execution; :func:`evaluate` then
deterministically compares those expectations against the execution
report; :func:`summarize` asks for claim/rationale statements about
what happened; :func:`preference_reflect` asks how the personality felt
about it (stored raw, embedded later by the memory store).

Response grammars (documented in docs/formats.md)::

    ```expect
    event: door_opened closed_door
    delta: inventory gains brass key
    ```

    ```summary
    claim: the door opened on the first try :: the door_opened event is present
    ```

An expectation matches when its event kind appears in the report's
events and every named object appears among that event's object fields.
The verdict is success iff all expectations matched AND the report
outcome is ``completed``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from playprobe.executor import ExecutionReport
from playprobe.llm import ChatProvider, ChatRequest, CREATIVE_TEMPERATURE

DEFAULT_MAX_REVISIONS = 3

VERDICT_SUCCESS = "success"
VERDICT_FAILURE = "failure"

EMPTY_REFLECTION_FALLBACK = "no preference expressed"

_EXPECT_FENCE = re.compile(r"```expect\s*\n(.*?)```", re.DOTALL)
_SUMMARY_FENCE = re.compile(r"```summary\s*\n(.*?)```", re.DOTALL)
_EVENT_LINE = re.compile(r"^event:\s*(\S+)\s*(.*)$")
_DELTA_LINE = re.compile(r"^delta:\s*(.+)$")
_CLAIM_LINE = re.compile(r"^claim:\s*(.*?)\s*::\s*(.*)$")


class SummarizerError(Exception):
    pass


class PredictionRejected(SummarizerError):
    pass


class SummaryRejected(SummarizerError):
    pass


@dataclass(frozen=True)
class EventExpectation:
    kind: str
    objects: tuple[str, ...] = ()

    def render(self) -> str:
        return f"{self.kind}({', '.join(self.objects)})" if self.objects else self.kind


@dataclass(frozen=True)
class ExpectedOutcome:
    plan_id: int
    events: tuple[EventExpectation, ...]
    deltas: tuple[str, ...]

    def render(self) -> str:
        lines = [f"event: {e.render()}" for e in self.events]
        lines += [f"delta: {d}" for d in self.deltas]
        return "\n".join(lines)


@dataclass(frozen=True)
class Verdict:
    status: str
    matched: tuple[EventExpectation, ...]
    unmatched: tuple[EventExpectation, ...]


@dataclass(frozen=True)
class Summary:
    plan_id: int
    verdict: Verdict
    statements: tuple[tuple[str, str], ...]   # (claim, rationale)

    def render(self) -> str:
        return "\n".join(f"- {claim} (because: {rationale})"
                         for claim, rationale in self.statements)


@dataclass(frozen=True)
class PreferenceSummary:
    trait_id: str
    text: str


# ---------------------------------------------------------------------------
# Shared revision loop
# ---------------------------------------------------------------------------

def _chat_with_revisions(provider: ChatProvider, system_prompt: str,
                         user_text: str, tag: str, temperature: float,
                         parse, max_revisions: int, reject_error):
    messages: list[tuple[str, str]] = [("system", system_prompt),
                                       ("user", user_text)]
    last_problems: list[str] = []
    for _ in range(max_revisions + 1):
        request = ChatRequest(messages=tuple(messages), temperature=temperature,
                              tag=tag)
        response = provider.chat(request)
        result, problems = parse(response)
        if not problems:
            return result
        last_problems = problems
        messages.append(("assistant", response))
        messages.append((
            "user",
            "Your reply was rejected:\n" + "\n".join(f"- {p}" for p in problems)
            + "\nReply again with one corrected fenced block.",
        ))
    raise reject_error(
        f"no valid reply after {max_revisions} revisions: {last_problems}")


# ---------------------------------------------------------------------------
# Predict
# ---------------------------------------------------------------------------

def _parse_expectations(text: str, plan_id: int) -> tuple[ExpectedOutcome | None, list[str]]:
    fence = _EXPECT_FENCE.search(text)
    if fence is None:
        return None, ["no ```expect fenced block found"]
    events: list[EventExpectation] = []
    deltas: list[str] = []
    problems: list[str] = []
    for raw in fence.group(1).splitlines():
        line = raw.strip()
        if not line:
            continue
        event_match = _EVENT_LINE.match(line)
        if event_match:
            objects = tuple(o for o in re.split(r"[\s,]+", event_match.group(2).strip())
                            if o)
            events.append(EventExpectation(kind=event_match.group(1), objects=objects))
            continue
        if _DELTA_LINE.match(line):
            deltas.append(_DELTA_LINE.match(line).group(1).strip())
            continue
        problems.append(f"unparseable expectation line: {line!r}")
    if not events and not problems:
        problems.append("expectation block names no events")
    if problems:
        return None, problems
    return ExpectedOutcome(plan_id=plan_id, events=tuple(events),
                           deltas=tuple(deltas)), []


def predict_outcome(plan, provider: ChatProvider, system_prompt: str,
                    max_revisions: int = DEFAULT_MAX_REVISIONS) -> ExpectedOutcome:
    """First link of the prompt chain: expected events before execution."""
    if not plan.steps:
        raise PredictionRejected("cannot predict outcomes for an empty plan")
    prompt = (
        f"Before executing this plan, predict what it should cause.\n\n"
        f"Plan:\n{plan.render()}\n\n"
        "Reply with exactly one fenced block listing expected game events\n"
        "and state changes:\n"
        "```expect\n"
        "event: <event_kind> [object names...]\n"
        "delta: <one-line state change>\n"
        "```\n"
        "Event kinds: moved, blocked, door_opened, door_unlocked, item_picked,\n"
        "item_used, item_eaten, item_thrown, attacked, enemy_defeated,\n"
        "damage_taken, enemy_moved, level_descended, died, won, waited."
    )

    def parse(text: str):
        return _parse_expectations(text, plan.id)

    return _chat_with_revisions(provider, system_prompt, prompt,
                                "summarizer.predict", CREATIVE_TEMPERATURE,
                                parse, max_revisions, PredictionRejected)


# ---------------------------------------------------------------------------
# Evaluate (pure)
# ---------------------------------------------------------------------------

def _normalize_symbol(text: str) -> str:
    """Fold case and word connectors, mirroring executor name
    resolution: the single-token expectation grammar writes
    ``health_potion`` for the entity named ``health potion``."""
    return " ".join(text.strip().lower().replace("_", " ").replace("-", " ").split())


def _event_objects(event) -> set[str]:
    objects = set(event.carrying) | set(event.upgrades)
    if event.subject_item:
        objects.add(event.subject_item)
    if event.target:
        objects.add(event.target)
    return {_normalize_symbol(o) for o in objects}


def evaluate(expected: ExpectedOutcome, report: ExecutionReport) -> Verdict:
    """Deterministic expectation matching; order-insensitive.

    success iff every expectation matched and the report outcome is
    ``completed``.
    """
    events = report.all_events()
    matched: list[EventExpectation] = []
    unmatched: list[EventExpectation] = []
    for expectation in expected.events:
        hit = False
        for event in events:
            if event.kind != expectation.kind:
                continue
            objects = _event_objects(event)
            if all(_normalize_symbol(o) in objects for o in expectation.objects):
                hit = True
                break
        (matched if hit else unmatched).append(expectation)
    status = (VERDICT_SUCCESS
              if not unmatched and report.outcome == "completed"
              else VERDICT_FAILURE)
    return Verdict(status=status, matched=tuple(matched), unmatched=tuple(unmatched))


# ---------------------------------------------------------------------------
# Summarize
# ---------------------------------------------------------------------------

def _parse_summary(text: str, plan_id: int, verdict: Verdict
                   ) -> tuple[Summary | None, list[str]]:
    fence = _SUMMARY_FENCE.search(text)
    if fence is None:
        return None, ["no ```summary fenced block found"]
    statements: list[tuple[str, str]] = []
    problems: list[str] = []
    for raw in fence.group(1).splitlines():
        line = raw.strip()
        if not line:
            continue
        claim_match = _CLAIM_LINE.match(line)
        if claim_match:
            claim, rationale = claim_match.group(1), claim_match.group(2)
            if not claim:
                problems.append("claim text is empty")
            elif not rationale:
                problems.append(f"claim lacks a rationale: {claim!r}")
            else:
                statements.append((claim, rationale))
            continue
        if line.startswith("claim:"):
            problems.append(
                f"claim lacks a ':: rationale' part: {line[len('claim:'):].strip()!r}")
            continue
        problems.append(f"unparseable summary line: {line!r}")
    if not statements and not problems:
        problems.append("summary block contains no claims")
    if problems:
        return None, problems
    return Summary(plan_id=plan_id, verdict=verdict,
                   statements=tuple(statements)), []


def summarize(plan, verdict: Verdict, report: ExecutionReport,
              provider: ChatProvider, system_prompt: str,
              max_revisions: int = DEFAULT_MAX_REVISIONS) -> Summary:
    """Reflective claim/rationale summary of one executed plan."""
    matched = ", ".join(e.render() for e in verdict.matched) or "(none)"
    unmatched = ", ".join(e.render() for e in verdict.unmatched) or "(none)"
    actions = "\n".join(report.rendered_actions()) or "(no actions performed)"
    prompt = (
        f"Summarize what happened when this plan was executed.  Think it\n"
        f"through step by step, then state your conclusions.\n\n"
        f"Plan:\n{plan.render()}\n\n"
        f"Execution outcome: {report.outcome}\n"
        f"Actions and events:\n{actions}\n\n"
        f"Verdict: {verdict.status}\n"
        f"Matched expectations: {matched}\n"
        f"Unmatched expectations: {unmatched}\n\n"
        "Reply with exactly one fenced block of claims, each with a\n"
        "rationale after '::':\n"
        "```summary\n"
        "claim: <what you conclude> :: <evidence from the events>\n"
        "```"
    )

    def parse(text: str):
        return _parse_summary(text, plan.id, verdict)

    return _chat_with_revisions(provider, system_prompt, prompt,
                                "summarizer.summarize", CREATIVE_TEMPERATURE,
                                parse, max_revisions, SummaryRejected)


# ---------------------------------------------------------------------------
# Preference reflection
# ---------------------------------------------------------------------------

def preference_reflect(summary: Summary, trait_id: str, provider: ChatProvider,
                       system_prompt: str) -> PreferenceSummary:
    """Personality-conditioned reflection; raw text stored.

    An empty reply is retried once, then stored as the literal fallback
    text so downstream embedding always has content.
    """
    prompt = (
        f"Here is a summary of something you just did in the game:\n\n"
        f"{summary.render()}\n\n"
        f"Verdict: {summary.verdict.status}\n\n"
        "In one short paragraph, reflect in character: how do you feel\n"
        "about this kind of action and outcome?  Would you seek it out\n"
        "again or avoid it?"
    )
    text = ""
    for attempt in range(2):
        request = ChatRequest(
            messages=(("system", system_prompt),
                      ("user", prompt if attempt == 0
                       else prompt + "\n\n(Your previous reply was empty — "
                            "please answer.)")),
            temperature=CREATIVE_TEMPERATURE, tag="summarizer.reflect")
        text = provider.chat(request).strip()
        if text:
            break
    if not text:
        text = EMPTY_REFLECTION_FALLBACK
    return PreferenceSummary(trait_id=trait_id, text=text)
