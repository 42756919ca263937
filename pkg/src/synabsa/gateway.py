"""Client for an OpenAI-compatible chat-completions endpoint.

Sends role-tagged message sequences with the image transmitted inline as a
base64 data URL, retries transient failures with exponential backoff, and
optionally appends request/response pairs to a JSON-lines audit file (the
API key never appears there). Batch calls run under a bounded thread pool
and preserve input order.
"""

from __future__ import annotations

import base64
import json
import logging
import mimetypes
import os
import random
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import httpx

from .prompts import PART_IMAGE, PART_TEXT, MessageSequence

logger = logging.getLogger(__name__)

RETRYABLE_STATUS = frozenset({408, 429, 500, 502, 503, 504})


class GatewayError(Exception):
    pass


class AuthMissing(GatewayError):
    """The configured API key environment variable is not set."""


class ImageUnreadable(GatewayError):
    """An image reference could not be read; raised before any network call."""


class RemoteError(GatewayError):
    """Non-retryable response from the endpoint."""

    def __init__(self, status: int, detail: str):
        super().__init__(f"endpoint returned {status}: {detail}")
        self.status = status


class RetriesExhausted(GatewayError):
    pass


@dataclass(frozen=True)
class GatewayConfig:
    endpoint_url: str
    model_name: str
    api_key_env: str = "OPENAI_API_KEY"
    temperature: float = 0.0  # deterministic evaluation runs by default
    max_output_tokens: int = 512
    request_timeout: float = 60.0
    max_retries: int = 3
    max_parallel: int = 4
    backoff_base: float = 1.0
    audit_log: str | None = None


@dataclass(frozen=True)
class ChatReply:
    text: str
    prompt_token_count: int | None
    completion_token_count: int | None
    latency: float
    attempt: int


def _encode_image(path: str) -> str:
    try:
        with open(path, "rb") as fh:
            payload = fh.read()
    except OSError as exc:
        raise ImageUnreadable(f"cannot read image {path!r}: {exc}") from exc
    mime = mimetypes.guess_type(path)[0] or "image/jpeg"
    return f"data:{mime};base64,{base64.b64encode(payload).decode('ascii')}"


def _wire_messages(sequence: MessageSequence) -> list[dict]:
    messages = []
    for message in sequence.messages:
        if all(p.kind == PART_TEXT for p in message.parts):
            messages.append({"role": message.role, "content": message.text()})
            continue
        content = []
        for part in message.parts:
            if part.kind == PART_TEXT:
                if part.content:
                    content.append({"type": "text", "text": part.content})
            elif part.kind == PART_IMAGE:
                content.append(
                    {"type": "image_url", "image_url": {"url": _encode_image(part.content)}}
                )
        messages.append({"role": message.role, "content": content})
    return messages


class ChatGateway:
    """Thread-safe client; share one instance across workers."""

    def __init__(self, config: GatewayConfig):
        self.config = config
        self._client = httpx.Client(timeout=config.request_timeout)
        self._audit_lock = threading.Lock()

    def close(self) -> None:
        self._client.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()

    def _api_key(self) -> str:
        key = os.environ.get(self.config.api_key_env, "")
        if not key:
            raise AuthMissing(
                f"environment variable {self.config.api_key_env} is not set"
            )
        return key

    def _audit(self, record: dict) -> None:
        if not self.config.audit_log:
            return
        record = dict(record, authorization="redacted")
        with self._audit_lock:
            with open(self.config.audit_log, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, sort_keys=True) + "\n")

    def chat(self, sequence: MessageSequence) -> ChatReply:
        """Send one sequence; returns the first assistant message verbatim."""
        key = self._api_key()
        payload = {
            "model": self.config.model_name,
            "messages": _wire_messages(sequence),  # raises ImageUnreadable pre-network
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_output_tokens,
        }
        headers = {"Authorization": f"Bearer {key}", "Content-Type": "application/json"}
        last_error: Exception | None = None
        start = time.monotonic()
        for attempt in range(1, self.config.max_retries + 2):
            try:
                response = self._client.post(
                    self.config.endpoint_url, json=payload, headers=headers
                )
            except httpx.HTTPError as exc:
                last_error = exc
                logger.warning("attempt %d transport error: %s", attempt, exc)
            else:
                if response.status_code == 200:
                    body = response.json()
                    usage = body.get("usage") or {}
                    reply = ChatReply(
                        text=body["choices"][0]["message"]["content"],
                        prompt_token_count=usage.get("prompt_tokens"),
                        completion_token_count=usage.get("completion_tokens"),
                        latency=time.monotonic() - start,
                        attempt=attempt,
                    )
                    self._audit(
                        {"request": payload, "status": 200, "response": body, "attempt": attempt}
                    )
                    return reply
                if response.status_code not in RETRYABLE_STATUS:
                    self._audit(
                        {
                            "request": payload,
                            "status": response.status_code,
                            "response": response.text,
                            "attempt": attempt,
                        }
                    )
                    raise RemoteError(response.status_code, response.text[:500])
                last_error = RemoteError(response.status_code, response.text[:500])
                logger.warning("attempt %d got status %d", attempt, response.status_code)
            if attempt <= self.config.max_retries:
                delay = self.config.backoff_base * (2 ** (attempt - 1))
                time.sleep(delay + random.uniform(0, self.config.backoff_base / 2))
        self._audit({"request": payload, "status": "retries-exhausted", "error": str(last_error)})
        raise RetriesExhausted(
            f"gave up after {self.config.max_retries + 1} attempts: {last_error}"
        )

    def chat_batch(self, sequences: list[MessageSequence]) -> list[ChatReply | GatewayError]:
        """Process sequences with at most max_parallel in flight.

        Output order matches input order; a failed item yields its
        GatewayError instead of aborting the batch.
        """
        if not sequences:
            return []

        def run_one(sequence: MessageSequence) -> ChatReply | GatewayError:
            try:
                return self.chat(sequence)
            except GatewayError as exc:
                return exc
            except Exception as exc:  # defensive: surface unexpected bugs per item
                return GatewayError(f"unexpected failure: {exc!r}")

        with ThreadPoolExecutor(max_workers=self.config.max_parallel) as pool:
            futures = [pool.submit(run_one, seq) for seq in sequences]
            return [future.result() for future in futures]
