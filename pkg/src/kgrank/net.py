"""HTTP helper with the shared retry policy.

Public KG and model APIs rate-limit, so every outbound call retries up to
3 attempts with exponential backoff starting at 1s — but only on transport
failures and 429 responses. Other HTTP errors fail immediately.
"""

from __future__ import annotations

import logging
import time
from typing import Callable

import requests

from kgrank.errors import ProviderError, RetryableProviderError

log = logging.getLogger(__name__)

MAX_ATTEMPTS = 3
BACKOFF_START_S = 1.0


class HttpStatusError(ProviderError):
    """Non-retryable HTTP error response; carries the status code."""

    def __init__(self, status: int, message: str):
        self.status = status
        super().__init__(message)


def request_json(
    method: str,
    url: str,
    *,
    params: dict | None = None,
    json_body: dict | None = None,
    headers: dict | None = None,
    timeout: float = 30.0,
    session: requests.Session | None = None,
    sleeper: Callable[[float], None] = time.sleep,
) -> dict:
    """Issue one HTTP request, retrying transport errors and 429s."""
    sess = session or requests
    last_err: Exception | None = None
    for attempt in range(MAX_ATTEMPTS):
        try:
            resp = sess.request(
                method,
                url,
                params=params,
                json=json_body,
                headers=headers,
                timeout=timeout,
            )
        except (requests.ConnectionError, requests.Timeout) as exc:
            last_err = exc
            log.debug("transport failure for %s (attempt %d): %s", url, attempt + 1, exc)
        else:
            if resp.status_code == 429:
                last_err = RetryableProviderError(f"rate limited by {url}")
                log.debug("429 from %s (attempt %d)", url, attempt + 1)
            elif resp.status_code >= 400:
                raise HttpStatusError(
                    resp.status_code,
                    f"{url} returned {resp.status_code}: {resp.text[:200]}",
                )
            else:
                try:
                    return resp.json()
                except ValueError as exc:
                    raise ProviderError(f"{url} returned non-JSON body") from exc
        if attempt + 1 < MAX_ATTEMPTS:
            sleeper(BACKOFF_START_S * (2**attempt))
    raise RetryableProviderError(
        f"{url} unreachable after {MAX_ATTEMPTS} attempts: {last_err}"
    )
