"""Completion providers: a remote chat endpoint and two offline oracles.

All three return a CompletionResult, so the evaluation harness does not
care which one produced the text. The mocks receive structured demos
(bin vectors plus instruction and stored output) rather than re-parsing
prompt strings; retrieval quality is then a pure distance computation.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import requests

from .prompts import format_action, parse_response

DEFAULT_TIMEOUT_S = 60.0
DEFAULT_MAX_ATTEMPTS = 3
DEFAULT_BACKOFF_BASE_S = 0.5
DEFAULT_REQUESTS_PER_SECOND = 1.0


class Provider(Enum):
    REMOTE = "remote"
    MOCK_NEAREST = "mock-nearest"
    MOCK_COMPOSITIONAL = "mock-compositional"


@dataclass(frozen=True)
class CompletionRequest:
    """What gets sent to a provider."""

    system: str
    user: str
    model: str = ""
    max_tokens: int = 1024
    temperature: float = 0.0

    def __post_init__(self):
        if not self.user:
            raise ValueError("CompletionRequest.user must be non-empty")
        if self.max_tokens < 1:
            raise ValueError(f"CompletionRequest.max_tokens must be >= 1, got {self.max_tokens}")


@dataclass(frozen=True)
class CompletionResult:
    """What comes back: raw text plus latency and which provider answered."""

    text: str
    latency_ms: int
    provider: Provider

    def __post_init__(self):
        if self.latency_ms < 0:
            raise ValueError(f"latency_ms must be >= 0, got {self.latency_ms}")


class TransportError(Exception):
    """The endpoint could not be reached or kept answering non-2xx."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class CompletionTimeout(TransportError):
    """The request exceeded the configured timeout on every attempt."""


class ProtocolError(Exception):
    """The endpoint answered 2xx but not in the expected response shape."""


class OracleError(Exception):
    """A mock provider had no demo able to answer the query."""


class TokenBucket:
    """Simple token-bucket rate limiter; acquire() blocks until a token is free."""

    def __init__(
        self,
        rate_per_second: float = DEFAULT_REQUESTS_PER_SECOND,
        capacity: float = 1.0,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if rate_per_second <= 0:
            raise ValueError(f"rate_per_second must be positive, got {rate_per_second}")
        if capacity <= 0:
            raise ValueError(f"capacity must be positive, got {capacity}")
        self.rate = rate_per_second
        self.capacity = capacity
        self._clock = clock
        self._sleep = sleep
        self._tokens = capacity
        self._last = clock()

    def _refill(self) -> None:
        now = self._clock()
        self._tokens = min(self.capacity, self._tokens + (now - self._last) * self.rate)
        self._last = now

    def acquire(self, cost: float = 1.0) -> None:
        if cost > self.capacity:
            raise ValueError(f"cost {cost} exceeds bucket capacity {self.capacity}")
        self._refill()
        if self._tokens < cost:
            self._sleep((cost - self._tokens) / self.rate)
            self._refill()
            # Guard against coarse clocks leaving us marginally short.
            self._tokens = max(self._tokens, cost)
        self._tokens -= cost


def complete_remote(
    request: CompletionRequest,
    endpoint: str,
    credential: str,
    timeout_s: float = DEFAULT_TIMEOUT_S,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
    backoff_base_s: float = DEFAULT_BACKOFF_BASE_S,
    rate_limiter: TokenBucket | None = None,
    sleep: Callable[[float], None] = time.sleep,
) -> CompletionResult:
    """POST a chat completion and return the first choice's content.

    Transient failures (non-2xx, connection errors, timeouts) are retried
    with exponential backoff for `max_attempts` total attempts. The
    credential travels only in the Authorization header and is never part
    of raised messages.
    """
    if max_attempts < 1:
        raise ValueError(f"max_attempts must be >= 1, got {max_attempts}")
    url = endpoint.rstrip("/") + "/v1/chat/completions"
    payload = {
        "model": request.model,
        "messages": [
            {"role": "system", "content": request.system},
            {"role": "user", "content": request.user},
        ],
        "temperature": request.temperature,
        "max_tokens": request.max_tokens,
    }
    headers = {"Authorization": f"Bearer {credential}"}
    last_error: TransportError | None = None
    started = time.monotonic()
    for attempt in range(max_attempts):
        if attempt > 0:
            sleep(backoff_base_s * (2 ** (attempt - 1)))
        if rate_limiter is not None:
            rate_limiter.acquire()
        try:
            response = requests.post(url, json=payload, headers=headers, timeout=timeout_s)
        except requests.Timeout:
            last_error = CompletionTimeout(f"request to {url} timed out after {timeout_s} s")
            continue
        except requests.RequestException as exc:
            last_error = TransportError(f"request to {url} failed: {exc}")
            continue
        if not 200 <= response.status_code < 300:
            last_error = TransportError(
                f"HTTP {response.status_code} from {url}", status=response.status_code
            )
            continue
        try:
            data = response.json()
            content = data["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ProtocolError(f"malformed completion response from {url}: {exc}") from None
        if not isinstance(content, str):
            raise ProtocolError(f"completion content is {type(content).__name__}, expected str")
        latency_ms = int((time.monotonic() - started) * 1000)
        return CompletionResult(text=content, latency_ms=latency_ms, provider=Provider.REMOTE)
    assert last_error is not None
    raise last_error


@dataclass(frozen=True)
class DemoRecord:
    """A retrievable demo: observation bins, its instruction, its output text."""

    obs_bins: tuple[int, ...]
    instruction: str
    output: str

    def __post_init__(self):
        object.__setattr__(self, "obs_bins", tuple(int(b) for b in self.obs_bins))
        if not self.obs_bins:
            raise ValueError("DemoRecord.obs_bins must be non-empty")
        if not self.instruction or not self.output:
            raise ValueError("DemoRecord instruction and output must be non-empty")


_COLOR_WORDS = re.compile(r"\b(?:red|yellow|green|blue)\b")


def instruction_template(text: str) -> str:
    """Replace color words with a wildcard so task templates can be compared."""
    return _COLOR_WORDS.sub("*", text)


def _normalize_demos(demos: Sequence) -> list[DemoRecord]:
    out = []
    for d in demos:
        out.append(d if isinstance(d, DemoRecord) else DemoRecord(tuple(d[0]), d[1], d[2]))
    if not out:
        raise OracleError("demo pool is empty")
    return out


def _candidate_indices(demos: list[DemoRecord], test_instruction: str) -> list[int]:
    # Exact instruction matches first; only when none exist, fall back to
    # template matches with color words wildcarded.
    exact = [i for i, d in enumerate(demos) if d.instruction == test_instruction]
    if exact:
        return exact
    template = instruction_template(test_instruction)
    return [i for i, d in enumerate(demos) if instruction_template(d.instruction) == template]


def _squared_distance(a: Sequence[int], b: Sequence[int]) -> int:
    return sum((x - y) * (x - y) for x, y in zip(a, b))


def complete_mock_nearest(
    demos: Sequence,
    test_obs_bins: Sequence[int],
    test_instruction: str,
) -> CompletionResult:
    """Return the stored output of the nearest matching demo.

    Nearest means smallest squared distance in concatenated bin space,
    among demos whose instruction matches the test instruction (exact
    first, color-wildcarded template as fallback). Ties go to the lowest
    demo index.
    """
    pool = _normalize_demos(demos)
    test_vec = tuple(int(b) for b in test_obs_bins)
    for i, d in enumerate(pool):
        if len(d.obs_bins) != len(test_vec):
            raise ValueError(
                f"demo {i} has obs vector length {len(d.obs_bins)}, test has {len(test_vec)}"
            )
    candidates = _candidate_indices(pool, test_instruction)
    if not candidates:
        raise OracleError(f"no demo instruction matches {test_instruction!r}")
    best = min(candidates, key=lambda i: (_squared_distance(pool[i].obs_bins, test_vec), i))
    return CompletionResult(text=pool[best].output, latency_ms=0, provider=Provider.MOCK_NEAREST)


COMPOSITION_SEPARATOR = ", then "


def complete_mock_compositional(
    demos: Sequence,
    test_obs_bins: Sequence[int],
    test_instruction: str,
) -> CompletionResult:
    """Split the instruction on ', then ', retrieve per segment, concatenate.

    Each segment is answered by nearest-neighbor retrieval as in
    complete_mock_nearest; the parsed action lists are joined into a
    single response in the output grammar.
    """
    segments = test_instruction.split(COMPOSITION_SEPARATOR)
    actions = []
    for segment in segments:
        try:
            partial = complete_mock_nearest(demos, test_obs_bins, segment)
        except OracleError as exc:
            raise OracleError(f"segment {segment!r} is unresolvable: {exc}") from None
        actions.extend(parse_response(partial.text))
    text = "{" + ", ".join(format_action(a) for a in actions) + "}"
    return CompletionResult(text=text, latency_ms=0, provider=Provider.MOCK_COMPOSITIONAL)
