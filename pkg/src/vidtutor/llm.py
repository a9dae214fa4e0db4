"""Chat-completion provider contract: tool calls plus token streaming.

Providers turn a CompletionRequest into an ordered stream of events: zero or
more ``text_delta`` events OR one ``tool_call`` event, then exactly one
``end``. The remote provider speaks the de-facto chat-completions wire format
(messages array, function tools, server-sent event streaming); the scripted
provider replays canned completions for hermetic tests and offline demos, and
records every request it receives so prompts can be asserted on.

Tool-call arguments are validated client-side against the declared parameter
schema. Array length caps (maxItems) are deliberately not enforced here: the
schema communicates the cap to the model, and callers truncate overlong
arrays rather than discarding an otherwise usable response.
"""

from __future__ import annotations

import copy
import json
import logging
from dataclasses import dataclass, field
from typing import Iterator, Protocol, Sequence

import httpx
import jsonschema

from .errors import MalformedToolCall, ProviderUnavailable, ScriptExhausted, StreamInterrupted
from .timing import Clock, SystemClock

logger = logging.getLogger(__name__)

ROLES = ("system", "user", "assistant", "tool")

TEXT_DELTA = "text_delta"
TOOL_CALL = "tool_call"
END = "end"


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")


@dataclass(frozen=True)
class ToolSpec:
    """A function the model may call; ``parameters`` is a JSON-schema document."""

    name: str
    description: str
    parameters: dict


@dataclass(frozen=True)
class CompletionRequest:
    messages: tuple[ChatMessage, ...]
    tools: tuple[ToolSpec, ...] = ()
    temperature: float = 0.0
    model_id: str = ""
    stream: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "messages", tuple(self.messages))
        object.__setattr__(self, "tools", tuple(self.tools))
        if not self.messages:
            raise ValueError("request needs at least one message")
        for pos, msg in enumerate(self.messages):
            if msg.role == "system" and pos != 0:
                raise ValueError("system message must be first and appear at most once")
        if self.temperature != 0.0:
            raise ValueError("completions are pinned to temperature 0.0")
        names = [t.name for t in self.tools]
        if len(names) != len(set(names)):
            raise ValueError("tool names must be unique within a request")

    def text(self) -> str:
        """All message contents joined; convenient for prompt-content assertions."""
        return "\n".join(m.content for m in self.messages)


@dataclass(frozen=True)
class ToolCall:
    name: str
    arguments: str  # raw JSON string as produced by the model


@dataclass(frozen=True)
class StreamEvent:
    kind: str
    text: str = ""
    tool_call: ToolCall | None = None

    @staticmethod
    def delta(text: str) -> "StreamEvent":
        return StreamEvent(kind=TEXT_DELTA, text=text)

    @staticmethod
    def tool(name: str, arguments: str) -> "StreamEvent":
        return StreamEvent(kind=TOOL_CALL, tool_call=ToolCall(name=name, arguments=arguments))

    @staticmethod
    def end() -> "StreamEvent":
        return StreamEvent(kind=END)


class ChatProvider(Protocol):
    def complete(self, request: CompletionRequest) -> Iterator[StreamEvent]:
        ...


def _strip_max_items(schema: dict) -> dict:
    cleaned = copy.deepcopy(schema)

    def walk(node) -> None:
        if isinstance(node, dict):
            node.pop("maxItems", None)
            for value in node.values():
                walk(value)
        elif isinstance(node, list):
            for value in node:
                walk(value)

    walk(cleaned)
    return cleaned


def validate_tool_call(call: ToolCall, tools: Sequence[ToolSpec]) -> dict:
    """Parse and schema-check tool-call arguments.

    Returns the parsed argument object.

    Raises:
        MalformedToolCall: unknown tool name, unparseable JSON, or a schema
            violation (array length caps excepted, see module docstring).
    """
    spec = next((t for t in tools if t.name == call.name), None)
    if spec is None:
        raise MalformedToolCall(f"model called undeclared tool {call.name!r}")
    try:
        parsed = json.loads(call.arguments)
    except json.JSONDecodeError as exc:
        raise MalformedToolCall(f"tool arguments are not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(parsed, _strip_max_items(spec.parameters))
    except jsonschema.ValidationError as exc:
        raise MalformedToolCall(f"tool arguments violate schema: {exc.message}") from exc
    return parsed


@dataclass
class ScriptedCompletion:
    """One canned completion: either text (optionally pre-split into deltas)
    or a tool call. Delays are consumed through the provider's clock."""

    text: str | None = None
    deltas: list[str] | None = None
    tool_name: str | None = None
    tool_arguments: str | dict | None = None
    first_event_delay_s: float = 0.0
    per_event_delay_s: float = 0.0

    def text_deltas(self) -> list[str]:
        if self.deltas is not None:
            return list(self.deltas)
        if self.text is not None:
            return [self.text]
        return []

    def arguments_json(self) -> str:
        if isinstance(self.tool_arguments, str):
            return self.tool_arguments
        return json.dumps(self.tool_arguments)


class ScriptedChatProvider:
    """Replays a fixed script of completions, in order, one per call.

    Every request is appended to ``self.requests`` before any event is
    produced, so prompt contents and call counts are assertable even when a
    stream errors mid-way.
    """

    def __init__(self, script: Sequence[ScriptedCompletion], clock: Clock | None = None):
        if not script:
            raise ValueError("script must not be empty")
        self._script = list(script)
        self._cursor = 0
        self._clock = clock or SystemClock()
        self.requests: list[CompletionRequest] = []

    def complete(self, request: CompletionRequest) -> Iterator[StreamEvent]:
        self.requests.append(request)
        if self._cursor >= len(self._script):
            raise ScriptExhausted(
                f"call {self._cursor + 1} exceeds script of {len(self._script)} completions"
            )
        item = self._script[self._cursor]
        self._cursor += 1
        return self._events(item, request)

    def _events(self, item: ScriptedCompletion, request: CompletionRequest) -> Iterator[StreamEvent]:
        self._clock.sleep(item.first_event_delay_s)
        if item.tool_name is not None:
            self._clock.sleep(item.per_event_delay_s)
            call = ToolCall(name=item.tool_name, arguments=item.arguments_json())
            validate_tool_call(call, request.tools)
            yield StreamEvent(kind=TOOL_CALL, tool_call=call)
        else:
            for delta in item.text_deltas():
                self._clock.sleep(item.per_event_delay_s)
                yield StreamEvent.delta(delta)
        yield StreamEvent.end()


def load_script(path) -> list[ScriptedCompletion]:
    """Read a JSON script file: a list of ``{"text": ...}`` /
    ``{"deltas": [...]}`` / ``{"tool_name": ..., "tool_arguments": {...}}``
    objects, each optionally carrying the delay fields."""
    raw = json.loads(open(path, encoding="utf-8").read())
    if not isinstance(raw, list):
        raise ValueError("script file must contain a JSON array")
    return [ScriptedCompletion(**item) for item in raw]


class RemoteChatProvider:
    """Streaming client for a chat-completions HTTP endpoint."""

    def __init__(
        self,
        api_url: str,
        model: str,
        api_key: str = "",
        timeout_s: float = 120.0,
        transport: httpx.BaseTransport | None = None,
    ):
        self.model = model
        self._url = api_url
        headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._client = httpx.Client(headers=headers, timeout=timeout_s, transport=transport)

    def complete(self, request: CompletionRequest) -> Iterator[StreamEvent]:
        payload: dict = {
            "model": request.model_id or self.model,
            "messages": [{"role": m.role, "content": m.content} for m in request.messages],
            "temperature": request.temperature,
            "stream": True,
        }
        if request.tools:
            payload["tools"] = [
                {
                    "type": "function",
                    "function": {
                        "name": t.name,
                        "description": t.description,
                        "parameters": t.parameters,
                    },
                }
                for t in request.tools
            ]
        return self._stream(payload, request)

    def _stream(self, payload: dict, request: CompletionRequest) -> Iterator[StreamEvent]:
        try:
            cm = self._client.stream("POST", self._url, json=payload)
            response = cm.__enter__()
        except httpx.HTTPError as exc:
            raise ProviderUnavailable(f"chat service: {exc}") from exc
        try:
            if response.status_code >= 400:
                response.read()
                raise ProviderUnavailable(
                    f"chat service returned {response.status_code}: {response.text[:200]}"
                )
            yielded_text = False
            tool_name = ""
            tool_args: list[str] = []
            saw_tool = False
            try:
                lines = response.iter_lines()
                for line in lines:
                    if not line.startswith("data:"):
                        continue
                    data = line[len("data:"):].strip()
                    if data == "[DONE]":
                        break
                    chunk = json.loads(data)
                    choices = chunk.get("choices") or []
                    if not choices:
                        continue
                    delta = choices[0].get("delta") or {}
                    content = delta.get("content")
                    if content:
                        if saw_tool:
                            raise StreamInterrupted("provider interleaved text and tool call")
                        yielded_text = True
                        yield StreamEvent.delta(content)
                    for fragment in delta.get("tool_calls") or []:
                        if yielded_text:
                            raise StreamInterrupted("provider interleaved text and tool call")
                        saw_tool = True
                        fn = fragment.get("function") or {}
                        if fn.get("name"):
                            tool_name = fn["name"]
                        if fn.get("arguments"):
                            tool_args.append(fn["arguments"])
            except (httpx.HTTPError, json.JSONDecodeError) as exc:
                raise StreamInterrupted(f"stream dropped: {exc}") from exc
            if saw_tool:
                call = ToolCall(name=tool_name, arguments="".join(tool_args))
                validate_tool_call(call, request.tools)
                yield StreamEvent(kind=TOOL_CALL, tool_call=call)
            yield StreamEvent.end()
        finally:
            cm.__exit__(None, None, None)

    def close(self) -> None:
        self._client.close()
