"""Chat and embedding gateway with deterministic record/replay.

Four chat providers share one interface:

* ``ScriptedChatProvider`` — a user-supplied pure rule function, for
  fully offline runs and tests.
* ``RemoteChatProvider`` — chat-completions-style HTTP endpoint.
* ``RecordingChatProvider`` — wraps another provider and memoizes into a
  :class:`Transcript`; a repeated request digest is answered from the
  transcript without touching the inner provider, so a recorded run and
  its replay see byte-identical responses.
* ``ReplayChatProvider`` — answers only from a transcript and raises
  :class:`ReplayMiss` for unknown digests.

Embeddings come from :class:`HashingEmbedder`: tokenize on
non-alphanumeric boundaries, lowercase, FNV-1a hash each token into one
of ``dimension`` buckets, count, L2-normalize.  It is pure, offline, and
identical across platforms.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

DEFAULT_EMBED_DIMENSION = 256
CREATIVE_TEMPERATURE = 0.7
VERIFICATION_TEMPERATURE = 0.0

_VALID_ROLES = ("system", "user", "assistant")


class GatewayError(Exception):
    """Base for all gateway failures."""


class ReplayMiss(GatewayError):
    """Replay transcript has no entry for the request digest."""


class TransportError(GatewayError):
    """Remote call failed after the configured retries."""


class ProviderMisconfigured(GatewayError):
    """Provider cannot operate with the given configuration."""


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class ChatRequest:
    """One chat-completion request.

    ``tag`` labels the purpose ("planner.bottom_up", "summarizer.predict",
    ...) and participates in the digest, so identical text issued by two
    different components replays independently.
    """

    messages: tuple[tuple[str, str], ...]   # (role, content) pairs
    temperature: float = CREATIVE_TEMPERATURE
    tag: str = ""

    def __post_init__(self):
        if not self.messages:
            raise ValueError("ChatRequest needs at least one message")
        for role, _ in self.messages:
            if role not in _VALID_ROLES:
                raise ValueError(f"bad role: {role}")

    @staticmethod
    def build(system: str, user: str, temperature: float = CREATIVE_TEMPERATURE,
              tag: str = "") -> "ChatRequest":
        return ChatRequest(messages=(("system", system), ("user", user)),
                           temperature=temperature, tag=tag)

    def to_dict(self) -> dict:
        return {
            "messages": [{"role": r, "content": c} for r, c in self.messages],
            "temperature": self.temperature,
            "tag": self.tag,
        }

    def digest(self) -> str:
        return hashlib.sha256(canonical_json(self.to_dict()).encode("utf-8")).hexdigest()


@dataclass
class TranscriptEntry:
    kind: str            # "chat" | "embed"
    digest: str
    request: dict
    response: object     # text for chat, list of vectors for embed

    def to_dict(self) -> dict:
        return {"kind": self.kind, "digest": self.digest,
                "request": self.request, "response": self.response}


class Transcript:
    """Ordered, digest-unique log of gateway calls.

    Record mode appends; replay mode looks up; entries are unique by
    digest (the recorder memoizes duplicates rather than re-appending).
    Serialized as JSON Lines, one entry per line.
    """

    def __init__(self, entries: Optional[list[TranscriptEntry]] = None):
        self.entries: list[TranscriptEntry] = list(entries or [])
        self._by_digest: dict[str, TranscriptEntry] = {}
        self._lock = threading.Lock()
        for entry in self.entries:
            if entry.digest in self._by_digest:
                raise ValueError(f"duplicate transcript digest: {entry.digest}")
            self._by_digest[entry.digest] = entry

    def __len__(self) -> int:
        return len(self.entries)

    def lookup(self, digest: str) -> Optional[TranscriptEntry]:
        return self._by_digest.get(digest)

    def record(self, entry: TranscriptEntry) -> None:
        with self._lock:
            if entry.digest in self._by_digest:
                return
            self._by_digest[entry.digest] = entry
            self.entries.append(entry)

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for entry in self.entries:
                fh.write(canonical_json(entry.to_dict()) + "\n")

    @staticmethod
    def load(path: str) -> "Transcript":
        entries = []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                raw = json.loads(line)
                entries.append(TranscriptEntry(kind=raw["kind"], digest=raw["digest"],
                                               request=raw["request"],
                                               response=raw["response"]))
        return Transcript(entries)


class ChatProvider:
    """Interface: ``chat(request) -> response text``."""

    def chat(self, request: ChatRequest) -> str:  # pragma: no cover - interface
        raise NotImplementedError


class ScriptedChatProvider(ChatProvider):
    """Applies a deterministic rule function ``(ChatRequest) -> str``.

    The rule must be a pure function of the request; anything else
    breaks replay closure.
    """

    def __init__(self, rule: Callable[[ChatRequest], str]):
        self._rule = rule

    def chat(self, request: ChatRequest) -> str:
        return self._rule(request)


class ReplayChatProvider(ChatProvider):
    def __init__(self, transcript: Transcript):
        self._transcript = transcript

    def chat(self, request: ChatRequest) -> str:
        entry = self._transcript.lookup(request.digest())
        if entry is None or entry.kind != "chat":
            raise ReplayMiss(f"no recorded chat response for digest {request.digest()} "
                             f"(tag={request.tag!r})")
        return entry.response


class RecordingChatProvider(ChatProvider):
    """Wraps a provider, memoizing responses into a transcript.

    A digest already present is answered from the transcript — the inner
    provider is not called — which keeps entries unique and makes a
    recording run behave identically to its replay.
    """

    def __init__(self, inner: ChatProvider, transcript: Transcript):
        self._inner = inner
        self.transcript = transcript

    def chat(self, request: ChatRequest) -> str:
        digest = request.digest()
        entry = self.transcript.lookup(digest)
        if entry is not None and entry.kind == "chat":
            return entry.response
        response = self._inner.chat(request)
        self.transcript.record(TranscriptEntry(kind="chat", digest=digest,
                                               request=request.to_dict(),
                                               response=response))
        return response


class RemoteChatProvider(ChatProvider):
    """Chat-completions-style HTTP endpoint (path-configurable).

    Reads the API key from ``api_key`` or the environment variable named
    by ``api_key_env``.  Retries transient failures ``retries`` times
    with linear backoff, then raises :class:`TransportError`.
    """

    def __init__(self, endpoint: str, model: str, api_key: Optional[str] = None,
                 api_key_env: str = "PLAYPROBE_API_KEY", retries: int = 2,
                 timeout: float = 60.0):
        if not endpoint or not model:
            raise ProviderMisconfigured("remote provider needs endpoint and model")
        self._endpoint = endpoint
        self._model = model
        self._api_key = api_key if api_key is not None else os.environ.get(api_key_env, "")
        self._retries = retries
        self._timeout = timeout

    def chat(self, request: ChatRequest) -> str:
        import requests

        payload = {
            "model": self._model,
            "messages": [{"role": r, "content": c} for r, c in request.messages],
            "temperature": request.temperature,
        }
        headers = {"Content-Type": "application/json"}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        last_error: Optional[Exception] = None
        for attempt in range(self._retries + 1):
            try:
                resp = requests.post(self._endpoint, json=payload, headers=headers,
                                     timeout=self._timeout)
                resp.raise_for_status()
                body = resp.json()
                return body["choices"][0]["message"]["content"]
            except Exception as exc:  # noqa: BLE001 - surfaced as TransportError
                last_error = exc
                if attempt < self._retries:
                    time.sleep(0.5 * (attempt + 1))
        raise TransportError(f"remote chat failed after {self._retries + 1} attempts: "
                             f"{last_error}")


# ---------------------------------------------------------------------------
# Embeddings
# ---------------------------------------------------------------------------

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def _fnv1a(token: str) -> int:
    h = _FNV_OFFSET
    for byte in token.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def tokenize(text: str) -> list[str]:
    """Lowercased runs of alphanumeric characters."""
    tokens, current = [], []
    for ch in text.lower():
        if ch.isalnum():
            current.append(ch)
        elif current:
            tokens.append("".join(current))
            current = []
    if current:
        tokens.append("".join(current))
    return tokens


class HashingEmbedder:
    """Offline bag-of-hashed-tokens embedder with unit-norm output.

    Empty or tokenless text embeds to the zero vector (the one case the
    unit-norm invariant excuses).
    """

    def __init__(self, dimension: int = DEFAULT_EMBED_DIMENSION):
        if dimension < 1:
            raise ProviderMisconfigured("embedder dimension must be >= 1")
        self.dimension = dimension

    def embed_one(self, text: str) -> list[float]:
        counts = [0] * self.dimension
        for token in tokenize(text):
            counts[_fnv1a(token) % self.dimension] += 1
        norm = sum(c * c for c in counts) ** 0.5
        if norm == 0:
            return [0.0] * self.dimension
        return [c / norm for c in counts]

    def embed(self, texts: list[str]) -> list[list[float]]:
        return [self.embed_one(t) for t in texts]


def build_chat_provider(config: dict, transcript: Optional[Transcript] = None
                        ) -> ChatProvider:
    """Construct a provider from a config dict.

    ``config["mode"]`` selects: ``scripted`` (built-in deterministic
    policy pack, see :mod:`playprobe.policies`), ``replay`` (needs
    ``transcript_path`` or a passed transcript), or ``remote`` (needs
    ``endpoint`` and ``model``).  With ``record: true`` the provider is
    wrapped in a recorder writing into ``transcript``.
    """
    mode = config.get("mode", "scripted")
    if mode == "scripted":
        from playprobe.policies import scripted_rule
        provider: ChatProvider = ScriptedChatProvider(scripted_rule)
    elif mode == "replay":
        source = transcript
        if source is None:
            path = config.get("transcript_path")
            if not path:
                raise ProviderMisconfigured("replay mode needs transcript_path")
            source = Transcript.load(path)
        return ReplayChatProvider(source)
    elif mode == "remote":
        provider = RemoteChatProvider(
            endpoint=config.get("endpoint", ""),
            model=config.get("model", ""),
            api_key=config.get("api_key"),
            api_key_env=config.get("api_key_env", "PLAYPROBE_API_KEY"),
            retries=int(config.get("retries", 2)),
        )
    else:
        raise ProviderMisconfigured(f"unknown provider mode: {mode}")

    if config.get("record") and transcript is not None:
        return RecordingChatProvider(provider, transcript)
    return provider
