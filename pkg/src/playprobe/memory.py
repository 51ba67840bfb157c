"""Experience store and skill library with exact top-k retrieval.

All three retrieval paths (preferred plans, related memories, similar
skills) are brute-force full scans over cosine similarity — exact by
construction — with ties broken toward the newer record.  Stores are
desk-scale, so exactness costs nothing.  Ranking scores every row with
the same :func:`cosine` the module exports, so an external full-scan
rerank reproduces the ordering bit for bit.

Persistence is JSON Lines, one record per line, closed by a trailer
line carrying a digest of everything above it; a missing or mismatched
trailer raises :class:`StorageCorrupt`.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Optional


class MemoryError_(Exception):
    """Base for store failures (trailing underscore avoids shadowing the
    builtin MemoryError, which means something else entirely)."""


class DimensionMismatch(MemoryError_):
    pass


class StorageCorrupt(MemoryError_):
    pass


def cosine(a, b) -> float:
    """Cosine similarity; zero-norm vectors score 0 by convention."""
    if len(a) != len(b):
        raise DimensionMismatch(f"dimensions differ: {len(a)} vs {len(b)}")
    dot = sum(x * y for x, y in zip(a, b))
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(y * y for y in b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / (na * nb)


@dataclass
class MemoryRecord:
    id: int
    iteration: int
    env_snapshot_text: str
    plan_text: str
    report_digest: str
    summary: str
    preference_summary: str
    env_embedding: list[float]
    preference_embedding: list[float]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "iteration": self.iteration,
            "env_snapshot_text": self.env_snapshot_text,
            "plan_text": self.plan_text,
            "report_digest": self.report_digest,
            "summary": self.summary,
            "preference_summary": self.preference_summary,
            "env_embedding": self.env_embedding,
            "preference_embedding": self.preference_embedding,
        }

    @staticmethod
    def from_dict(raw: dict) -> "MemoryRecord":
        return MemoryRecord(**raw)


@dataclass
class SkillRecord:
    name: str
    script_text: str
    description: str
    description_embedding: list[float]
    success_count: int = 0
    failure_count: int = 0

    def render(self) -> str:
        """Reference block shown when composing new skills."""
        return (f"# {self.name}: {self.description} "
                f"(used successfully {self.success_count}x, "
                f"failed {self.failure_count}x)\n{self.script_text}")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "script_text": self.script_text,
            "description": self.description,
            "description_embedding": self.description_embedding,
            "success_count": self.success_count,
            "failure_count": self.failure_count,
        }

    @staticmethod
    def from_dict(raw: dict) -> "SkillRecord":
        return SkillRecord(**raw)


def _rank_top_k(embeddings: list[list[float]], ids: list[int], query,
                k: int) -> list[int]:
    """Indices of the top-k rows by cosine to ``query``, newer id first
    on ties.  Exact: scores every row with the exported :func:`cosine`."""
    scores = [cosine(row, query) for row in embeddings]
    order = sorted(range(len(ids)), key=lambda i: (-scores[i], -ids[i]))
    return order[:k]


class MemoryStore:
    """Append-only store of per-iteration experience records."""

    def __init__(self):
        self.records: list[MemoryRecord] = []

    def __len__(self) -> int:
        return len(self.records)

    def next_id(self) -> int:
        return self.records[-1].id + 1 if self.records else 0

    def add(self, record: MemoryRecord) -> None:
        if self.records and record.id <= self.records[-1].id:
            raise MemoryError_(
                f"record id {record.id} not greater than last {self.records[-1].id}")
        self.records.append(record)

    def add_record(self, iteration: int, env_snapshot_text: str, plan_text: str,
                   report_digest: str, summary: str, preference_summary: str,
                   env_embedding: list[float],
                   preference_embedding: list[float]) -> MemoryRecord:
        record = MemoryRecord(
            id=self.next_id(), iteration=iteration,
            env_snapshot_text=env_snapshot_text, plan_text=plan_text,
            report_digest=report_digest, summary=summary,
            preference_summary=preference_summary,
            env_embedding=list(env_embedding),
            preference_embedding=list(preference_embedding),
        )
        self.add(record)
        return record

    def digest(self) -> str:
        payload = json.dumps([r.to_dict() for r in self.records],
                             sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def retrieve_preferred(store: MemoryStore, personality_embedding,
                       k: int = 5) -> list[MemoryRecord]:
    """Top-k records by preference-summary similarity to the personality
    prompt embedding (descending; newer id wins ties)."""
    picks = _rank_top_k([r.preference_embedding for r in store.records],
                        [r.id for r in store.records], personality_embedding, k)
    return [store.records[i] for i in picks]


def retrieve_related(store: MemoryStore, current_env_embedding,
                     k: int = 5) -> list[MemoryRecord]:
    """Top-k records by environment-snapshot similarity."""
    picks = _rank_top_k([r.env_embedding for r in store.records],
                        [r.id for r in store.records], current_env_embedding, k)
    return [store.records[i] for i in picks]


class SkillLibrary:
    """Named skill scripts with usage counters."""

    def __init__(self):
        self.skills: list[SkillRecord] = []
        self._names: set[str] = set()

    def __len__(self) -> int:
        return len(self.skills)

    def add(self, skill: SkillRecord) -> None:
        if skill.name in self._names:
            raise MemoryError_(f"duplicate skill name: {skill.name}")
        self._names.add(skill.name)
        self.skills.append(skill)

    def get(self, name: str) -> Optional[SkillRecord]:
        for skill in self.skills:
            if skill.name == name:
                return skill
        return None

    def record_outcome(self, name: str, success: bool) -> None:
        skill = self.get(name)
        if skill is None:
            raise MemoryError_(f"no skill named {name}")
        if success:
            skill.success_count += 1
        else:
            skill.failure_count += 1

    def digest(self) -> str:
        payload = json.dumps([s.to_dict() for s in self.skills],
                             sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def retrieve_skills(library: SkillLibrary, plan_embedding,
                    k: int = 5) -> list[SkillRecord]:
    """Top-k skills by description similarity (insertion index is the
    recency key, newest first on ties)."""
    picks = _rank_top_k([s.description_embedding for s in library.skills],
                        list(range(len(library.skills))), plan_embedding, k)
    return [library.skills[i] for i in picks]


# ---------------------------------------------------------------------------
# Persistence: JSONL body + digest trailer
# ---------------------------------------------------------------------------

def _persist_lines(kind: str, dicts: list[dict]) -> str:
    lines = [json.dumps({"kind": kind, "record": d},
                        sort_keys=True, separators=(",", ":"))
             for d in dicts]
    body = "\n".join(lines)
    body_digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    trailer = json.dumps({"kind": "trailer", "digest": body_digest, "count": len(dicts)},
                         sort_keys=True, separators=(",", ":"))
    return (body + "\n" if body else "") + trailer + "\n"


def _load_lines(text: str, kind: str) -> list[dict]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise StorageCorrupt("empty store file (missing trailer)")
    try:
        trailer = json.loads(lines[-1])
    except json.JSONDecodeError as exc:
        raise StorageCorrupt(f"unparseable trailer: {exc}") from exc
    if trailer.get("kind") != "trailer":
        raise StorageCorrupt("last line is not a trailer (truncated file?)")
    body = "\n".join(lines[:-1])
    body_digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    if body_digest != trailer.get("digest"):
        raise StorageCorrupt("store digest mismatch (corrupted or edited file)")
    if trailer.get("count") != len(lines) - 1:
        raise StorageCorrupt("record count mismatch")
    out = []
    for line in lines[:-1]:
        raw = json.loads(line)
        if raw.get("kind") != kind:
            raise StorageCorrupt(f"unexpected record kind {raw.get('kind')!r}")
        out.append(raw["record"])
    return out


def persist(store: MemoryStore, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_persist_lines("memory", [r.to_dict() for r in store.records]))


def load(path: str) -> MemoryStore:
    with open(path, "r", encoding="utf-8") as fh:
        dicts = _load_lines(fh.read(), "memory")
    store = MemoryStore()
    for raw in dicts:
        store.add(MemoryRecord.from_dict(raw))
    return store


def persist_skills(library: SkillLibrary, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_persist_lines("skill", [s.to_dict() for s in library.skills]))


def load_skills(path: str) -> SkillLibrary:
    with open(path, "r", encoding="utf-8") as fh:
        dicts = _load_lines(fh.read(), "skill")
    library = SkillLibrary()
    for raw in dicts:
        library.add(SkillRecord.from_dict(raw))
    return library
