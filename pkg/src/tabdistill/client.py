"""Chat-completion HTTP client with retry, backoff and rate limiting.

Wire format: POST {model, messages:[{role, content}], temperature,
max_tokens} with bearer-token auth; the completion is read from
choices[0].message.content. A deterministic mock backend replays scripted
responses for tests and offline runs.
"""

from __future__ import annotations

import json
import os
import random
import threading
import time
from collections import deque
from dataclasses import dataclass
from hashlib import sha256
from pathlib import Path
from typing import Callable

import requests

from .errors import (
    AuthFailure,
    ClientError,
    IoFailure,
    MalformedResponse,
    RetriesExhausted,
    ScriptExhausted,
    Timeout,
)

GENERATION_TEMPERATURE = 0.7  # diverse reasoning needs variation
VERIFICATION_TEMPERATURE = 0.0  # deterministic yes/no


@dataclass(frozen=True)
class CompletionRequest:
    model_name: str
    messages: tuple[tuple[str, str], ...]
    temperature: float = GENERATION_TEMPERATURE
    max_output_tokens: int = 1024

    def __post_init__(self):
        if not self.messages:
            raise ValueError("messages must be non-empty")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must be in [0, 2]")
        if self.max_output_tokens <= 0:
            raise ValueError("max_output_tokens must be positive")

    def fingerprint(self) -> str:
        payload = json.dumps(
            [self.model_name, [list(m) for m in self.messages], self.temperature],
            ensure_ascii=False,
        )
        return sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class CompletionResponse:
    content: str
    finish_reason: str  # stop | length | error
    latency_ms: float
    attempt_count: int


@dataclass(frozen=True)
class BackendConfig:
    endpoint_url: str = "https://api.openai.com/v1/chat/completions"
    api_key_env_var: str = "TABDISTILL_API_KEY"
    timeout_s: float = 60.0
    max_retries: int = 3
    backoff_base_s: float = 1.0
    max_requests_per_minute: int = 60

    def __post_init__(self):
        for name in ("timeout_s", "max_retries", "backoff_base_s", "max_requests_per_minute"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


class RateLimiter:
    """Sliding-window limiter shared across worker threads.

    acquire() blocks until issuing one more request keeps every
    `window_s`-second window at or under `max_requests`, then returns
    the issuance time on the limiter's clock.
    """

    def __init__(
        self,
        max_requests: int,
        window_s: float = 60.0,
        clock: Callable[[], float] = time.monotonic,
        sleeper: Callable[[float], None] = time.sleep,
    ):
        if max_requests <= 0 or window_s <= 0:
            raise ValueError("max_requests and window_s must be positive")
        self.max_requests = max_requests
        self.window_s = window_s
        self._clock = clock
        self._sleeper = sleeper
        self._lock = threading.Lock()
        self._issued: deque[float] = deque()

    def acquire(self) -> float:
        while True:
            with self._lock:
                now = self._clock()
                while self._issued and self._issued[0] <= now - self.window_s:
                    self._issued.popleft()
                if len(self._issued) < self.max_requests:
                    self._issued.append(now)
                    return now
                wait = self._issued[0] + self.window_s - now
            self._sleeper(max(wait, 1e-4))


class HttpBackend:
    """Live chat-completion backend. The API key is read from the
    environment at send time and never included in errors or logs."""

    def __init__(self, config: BackendConfig):
        self.config = config

    def send(self, request: CompletionRequest) -> tuple[int, object]:
        api_key = os.environ.get(self.config.api_key_env_var)
        if not api_key:
            raise AuthFailure(0)
        body = {
            "model": request.model_name,
            "messages": [{"role": r, "content": c} for r, c in request.messages],
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        }
        try:
            resp = requests.post(
                self.config.endpoint_url,
                json=body,
                headers={"Authorization": f"Bearer {api_key}"},
                timeout=self.config.timeout_s,
            )
        except requests.Timeout as exc:
            raise Timeout(f"request timed out after {self.config.timeout_s}s") from exc
        except requests.RequestException as exc:
            raise ClientError(f"transport failure: {type(exc).__name__}") from exc
        try:
            payload = resp.json()
        except ValueError:
            payload = resp.text
        return resp.status_code, payload


@dataclass
class RecordedRequest:
    request: CompletionRequest
    timestamp: float


class MockBackend:
    """Deterministic scripted backend.

    Sequential mode replays `script` entries in order; keyed mode looks
    entries up by request fingerprint. An entry is either a content string
    (HTTP 200) or a dict with optional `status`, `content`,
    `finish_reason`, `timeout` keys. Every request is recorded with a
    timestamp for test assertions; safe under concurrent use.
    """

    def __init__(
        self,
        script: list[str | dict] | None = None,
        keyed: dict[str, str | dict] | None = None,
        clock: Callable[[], float] = time.monotonic,
    ):
        if script is None and keyed is None:
            raise ValueError("provide a sequential script or a keyed script")
        if script is not None and not script and keyed is None:
            raise ValueError("sequential script must be non-empty")
        self._script = list(script) if script is not None else None
        self._keyed = dict(keyed) if keyed is not None else None
        self._clock = clock
        self._lock = threading.Lock()
        self._cursor = 0
        self.requests: list[RecordedRequest] = []

    def send(self, request: CompletionRequest) -> tuple[int, object]:
        with self._lock:
            self.requests.append(RecordedRequest(request, self._clock()))
            if self._script is not None:
                if self._cursor >= len(self._script):
                    raise ScriptExhausted(
                        f"scripted {len(self._script)} responses, got request "
                        f"#{self._cursor + 1}"
                    )
                entry = self._script[self._cursor]
                self._cursor += 1
            else:
                key = request.fingerprint()
                if key not in self._keyed:
                    raise ScriptExhausted(f"no scripted response for request {key[:12]}")
                entry = self._keyed[key]
        if isinstance(entry, str):
            entry = {"content": entry}
        if entry.get("timeout"):
            raise Timeout("scripted timeout")
        status = int(entry.get("status", 200))
        if status != 200:
            return status, entry.get("body", {"error": f"scripted HTTP {status}"})
        return 200, {
            "choices": [
                {
                    "message": {"content": entry.get("content", "")},
                    "finish_reason": entry.get("finish_reason", "stop"),
                }
            ]
        }


def load_mock_script(path: str | Path) -> MockBackend:
    """Build a sequential MockBackend from a JSONL script file (one entry
    per line: a JSON string or an entry object)."""
    path = Path(path)
    if not path.exists():
        raise IoFailure(f"mock script does not exist: {path}")
    entries = [
        json.loads(line)
        for line in path.read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    return MockBackend(script=entries)


def _extract_content(payload: object) -> tuple[str, str]:
    if not isinstance(payload, dict):
        raise MalformedResponse("response body is not a JSON object")
    try:
        choice = payload["choices"][0]
        content = choice["message"]["content"]
    except (KeyError, IndexError, TypeError) as exc:
        raise MalformedResponse(f"response lacks choices[0].message.content: {exc}") from exc
    if not isinstance(content, str):
        raise MalformedResponse("message content is not a string")
    return content, str(choice.get("finish_reason", "stop"))


def complete(
    request: CompletionRequest,
    config: BackendConfig,
    backend=None,
    limiter: RateLimiter | None = None,
    sleeper: Callable[[float], None] = time.sleep,
    rng: random.Random | None = None,
    clock: Callable[[], float] = time.monotonic,
) -> CompletionResponse:
    """Issue one completion with rate limiting and retry.

    Retries with full-jitter exponential backoff on HTTP 429, 5xx and
    timeouts, up to config.max_retries; 401/403 and other 4xx fail
    immediately.
    """
    backend = backend if backend is not None else HttpBackend(config)
    rng = rng or random.Random()
    start = clock()
    last_status: int | None = None
    timed_out = False
    attempts = 0
    for attempt in range(config.max_retries + 1):
        attempts = attempt + 1
        if limiter is not None:
            limiter.acquire()
        try:
            status, payload = backend.send(request)
        except Timeout:
            timed_out, last_status = True, None
            if attempt < config.max_retries:
                sleeper(config.backoff_base_s * (2**attempt) * rng.random())
            continue
        timed_out = False
        if status == 200:
            content, finish_reason = _extract_content(payload)
            return CompletionResponse(
                content=content,
                finish_reason=finish_reason,
                latency_ms=(clock() - start) * 1000.0,
                attempt_count=attempts,
            )
        last_status = status
        if status in (401, 403):
            raise AuthFailure(status)
        if status == 429 or status >= 500:
            if attempt < config.max_retries:
                sleeper(config.backoff_base_s * (2**attempt) * rng.random())
            continue
        raise ClientError(f"backend rejected request with HTTP {status}")
    if timed_out:
        raise Timeout(f"no response within {config.timeout_s}s after {attempts} attempts")
    raise RetriesExhausted(attempts, last_status)
