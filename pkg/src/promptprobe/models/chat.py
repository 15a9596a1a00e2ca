"""Client for OpenAI-style ``/v1/chat/completions`` endpoints."""
from __future__ import annotations

import logging
import os
import time

import httpx

from ..errors import AuthMissing, MalformedResponse, RateLimited, Transport
from .base import GenerationParams, ModelEndpoint

log = logging.getLogger(__name__)

RETRYABLE_STATUS = {429, 500, 502, 503, 504}


def build_request_body(model_name: str, prompt: str, params: GenerationParams) -> dict:
    body = {
        "model": model_name,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": params.temperature,
        "max_tokens": params.max_new_tokens,
    }
    if params.seed is not None:
        body["seed"] = params.seed
    return body


def parse_response_body(payload) -> str:
    try:
        content = payload["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError) as exc:
        raise MalformedResponse(f"missing choices[0].message.content ({exc!r})") from None
    if not isinstance(content, str):
        raise MalformedResponse(f"content is {type(content).__name__}, expected string")
    return content


class ChatCompletionsModel:
    """One logical request per ``generate`` call plus bounded retries.

    Retries cover 429, 5xx, timeouts and connection errors. Delays follow
    ``endpoint.retry`` (1 s, 2 s, 4 s by default).
    """

    def __init__(self, endpoint: ModelEndpoint, client: httpx.Client | None = None, sleep=time.sleep):
        self.endpoint = endpoint
        self.url = endpoint.base_url.rstrip("/") + "/v1/chat/completions"
        self._client = client or httpx.Client(timeout=endpoint.timeout)
        self._sleep = sleep

    def close(self):
        self._client.close()

    def _api_key(self) -> str:
        key = os.environ.get(self.endpoint.auth_ref or "")
        if not key:
            raise AuthMissing(f"environment variable {self.endpoint.auth_ref!r} is not set")
        return key

    def generate(self, prompt: str, params: GenerationParams) -> str:
        headers = {"Authorization": f"Bearer {self._api_key()}"}
        body = build_request_body(self.endpoint.model_name, prompt, params)
        policy = self.endpoint.retry
        attempts = policy.max_retries + 1
        for attempt in range(attempts):
            try:
                resp = self._client.post(self.url, json=body, headers=headers)
            except httpx.TimeoutException as exc:
                err = Transport(f"timeout contacting {self.url}: {type(exc).__name__}")
            except httpx.TransportError as exc:
                err = Transport(f"transport error contacting {self.url}: {type(exc).__name__}")
            else:
                if resp.status_code == 200:
                    try:
                        payload = resp.json()
                    except ValueError:
                        raise MalformedResponse("response body is not JSON") from None
                    return parse_response_body(payload)
                if resp.status_code == 429:
                    err = RateLimited(f"HTTP 429 from {self.url}")
                else:
                    err = Transport(f"HTTP {resp.status_code} from {self.url}")
                if resp.status_code not in RETRYABLE_STATUS:
                    raise err
            if attempt + 1 >= attempts:
                log.warning("attempt %d/%d failed (%s); giving up", attempt + 1, attempts, err)
                raise err
            delay = policy.delay(attempt)
            log.warning("attempt %d/%d failed (%s); retrying in %.2fs", attempt + 1, attempts, err, delay)
            self._sleep(delay)
        raise AssertionError("unreachable")
