"""Completion-endpoint transports: recorded replay and live HTTP.

Replay fixtures live in one directory, one file per conversation, named
``<key>.json`` where ``key`` is :func:`request_key` of the conversation's
first request::

    {"key": "...", "request": {...}, "responses": ["reply 1", "reply 2", ...]}

Each ``send`` in the conversation consumes the next reply, so a refine loop
replays its recorded attempts in order.
"""
from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from pathlib import Path
from typing import Optional

ENDPOINT_ENV = "PATHFORGE_LLM_ENDPOINT"
KEY_ENV = "PATHFORGE_LLM_KEY"


class TransportError(RuntimeError):
    pass


def request_key(request: dict) -> str:
    canonical = json.dumps(request, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


class ReplayConversation:
    def __init__(self, key: str, responses: list[str]):
        self.key = key
        self._responses = list(responses)
        self.sent: list[list[dict]] = []

    def send(self, messages: list[dict]) -> str:
        self.sent.append(list(messages))
        if len(self.sent) > len(self._responses):
            raise TransportError(f"fixture {self.key} has only {len(self._responses)} responses")
        return self._responses[len(self.sent) - 1]


class ReplayTransport:
    def __init__(self, fixture_dir: Path):
        self.fixture_dir = Path(fixture_dir)

    def conversation(self, request: dict) -> ReplayConversation:
        key = request_key(request)
        path = self.fixture_dir / f"{key}.json"
        if not path.is_file():
            raise TransportError(f"no replay fixture for request {key} in {self.fixture_dir}")
        data = json.loads(path.read_text())
        return ReplayConversation(key, data["responses"])


def write_fixture(fixture_dir: Path, request: dict, responses: list[str]) -> Path:
    fixture_dir = Path(fixture_dir)
    fixture_dir.mkdir(parents=True, exist_ok=True)
    key = request_key(request)
    path = fixture_dir / f"{key}.json"
    path.write_text(json.dumps({"key": key, "request": request, "responses": responses}, indent=2) + "\n")
    return path


class LiveConversation:
    def __init__(self, transport: "LiveTransport", key: str):
        self.transport = transport
        self.key = key

    def send(self, messages: list[dict]) -> str:
        return self.transport.post(self.key, messages)


class LiveTransport:
    """Chat-style JSON completion API (``choices[0].message.content``)."""

    def __init__(self, endpoint: Optional[str], model: str, api_key_env: str = KEY_ENV,
                 log_dir: Optional[Path] = None, max_inflight: int = 4, timeout: float = 120.0):
        self.endpoint = endpoint or os.environ.get(ENDPOINT_ENV)
        if not self.endpoint:
            raise TransportError(f"live mode needs an endpoint ({ENDPOINT_ENV})")
        self.api_key = os.environ.get(api_key_env)
        if not self.api_key:
            raise TransportError(f"live mode needs an API key in ${api_key_env}")
        self.model = model
        self.log_dir = Path(log_dir) if log_dir else None
        self.timeout = timeout
        self._slots = threading.BoundedSemaphore(max_inflight)
        self._log_lock = threading.Lock()

    def conversation(self, request: dict) -> LiveConversation:
        return LiveConversation(self, request_key(request))

    def post(self, key: str, messages: list[dict]) -> str:
        import httpx

        payload = {"model": self.model, "messages": messages, "temperature": 0}
        headers = {"Authorization": f"Bearer {self.api_key}"}
        started = time.monotonic()
        with self._slots:
            try:
                resp = httpx.post(self.endpoint, json=payload, headers=headers, timeout=self.timeout)
                resp.raise_for_status()
                content = resp.json()["choices"][0]["message"]["content"]
            except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
                raise TransportError(f"endpoint request failed: {exc}") from exc
        self._log(key, messages, content, time.monotonic() - started)
        return content

    def _log(self, key: str, messages: list[dict], content: str, seconds: float) -> None:
        if self.log_dir is None:
            return
        self.log_dir.mkdir(parents=True, exist_ok=True)
        line = json.dumps({"key": key, "messages": messages, "response": content,
                           "seconds": round(seconds, 3)})
        with self._log_lock, open(self.log_dir / "transcripts.jsonl", "a") as fh:
            fh.write(line + "\n")
