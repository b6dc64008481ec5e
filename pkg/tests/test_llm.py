"""Remote bridge against a local throwaway HTTP server, rate limiter with
an injected clock, and the two offline oracles against brute force.
"""

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from iclmanip.llm import (
    CompletionRequest,
    CompletionTimeout,
    DemoRecord,
    OracleError,
    ProtocolError,
    Provider,
    TokenBucket,
    TransportError,
    complete_mock_compositional,
    complete_mock_nearest,
    complete_remote,
    instruction_template,
)
from iclmanip.prompts import parse_response

CREDENTIAL = "sk-test-0000-secret-credential"


class _Script:
    """Per-test server behavior: a list of (status, body) plus a request log."""

    def __init__(self, steps):
        self.steps = list(steps)
        self.requests = []
        self.delay_s = 0.0


def _make_server(script):
    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            length = int(self.headers.get("Content-Length", 0))
            body = self.rfile.read(length)
            script.requests.append(
                {
                    "path": self.path,
                    "auth": self.headers.get("Authorization"),
                    "json": json.loads(body) if body else None,
                }
            )
            if script.delay_s:
                time.sleep(script.delay_s)
            status, payload = script.steps.pop(0) if script.steps else (200, "{}")
            data = payload.encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def log_message(self, *args):
            pass

    server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server, f"http://127.0.0.1:{server.server_address[1]}"


def _ok_body(text="{[1, 2, 3, 4, 5, 6, 1]}"):
    return json.dumps({"choices": [{"message": {"content": text}}]})


@pytest.fixture
def request_obj():
    return CompletionRequest(system="sys", user="body > ", model="test-model", max_tokens=64)


def test_remote_happy_path(request_obj):
    script = _Script([(200, _ok_body())])
    server, endpoint = _make_server(script)
    try:
        result = complete_remote(request_obj, endpoint, CREDENTIAL, timeout_s=5)
    finally:
        server.shutdown()
    assert result.text == "{[1, 2, 3, 4, 5, 6, 1]}"
    assert result.provider is Provider.REMOTE
    assert result.latency_ms >= 0

    (seen,) = script.requests
    assert seen["path"] == "/v1/chat/completions"
    assert seen["auth"] == f"Bearer {CREDENTIAL}"
    payload = seen["json"]
    assert payload["model"] == "test-model"
    assert payload["temperature"] == 0.0
    assert payload["max_tokens"] == 64
    assert [m["role"] for m in payload["messages"]] == ["system", "user"]
    assert payload["messages"][1]["content"] == "body > "


def test_remote_retries_through_transient_failures(request_obj):
    script = _Script([(500, "oops"), (503, "busy"), (200, _ok_body("ok"))])
    server, endpoint = _make_server(script)
    sleeps = []
    try:
        result = complete_remote(
            request_obj, endpoint, CREDENTIAL, timeout_s=5, sleep=sleeps.append
        )
    finally:
        server.shutdown()
    assert result.text == "ok"
    assert len(script.requests) == 3
    # Exponential backoff before attempts 2 and 3.
    assert sleeps == [0.5, 1.0]


def test_remote_gives_up_after_max_attempts(request_obj):
    script = _Script([(500, "a"), (500, "b"), (500, "c"), (500, "d")])
    server, endpoint = _make_server(script)
    try:
        with pytest.raises(TransportError) as err:
            complete_remote(request_obj, endpoint, CREDENTIAL, timeout_s=5, sleep=lambda s: None)
    finally:
        server.shutdown()
    assert err.value.status == 500
    assert len(script.requests) == 3  # default max_attempts


def test_remote_timeout_raises_completion_timeout(request_obj):
    script = _Script([(200, _ok_body())] * 3)
    script.delay_s = 0.5
    server, endpoint = _make_server(script)
    try:
        with pytest.raises(CompletionTimeout):
            complete_remote(
                request_obj,
                endpoint,
                CREDENTIAL,
                timeout_s=0.05,
                max_attempts=2,
                sleep=lambda s: None,
            )
    finally:
        server.shutdown()


def test_remote_malformed_response_fails_fast(request_obj):
    # A 2xx with the wrong shape must raise immediately, not retry.
    script = _Script([(200, json.dumps({"unexpected": True})), (200, _ok_body())])
    server, endpoint = _make_server(script)
    try:
        with pytest.raises(ProtocolError):
            complete_remote(request_obj, endpoint, CREDENTIAL, timeout_s=5)
    finally:
        server.shutdown()
    assert len(script.requests) == 1


def test_remote_errors_never_leak_the_credential(request_obj):
    script = _Script([(500, "x")] * 3)
    server, endpoint = _make_server(script)
    try:
        with pytest.raises(TransportError) as err:
            complete_remote(request_obj, endpoint, CREDENTIAL, timeout_s=5, sleep=lambda s: None)
    finally:
        server.shutdown()
    assert CREDENTIAL not in str(err.value)
    assert CREDENTIAL not in repr(err.value)

    # Connection refused: the server is down now.
    with pytest.raises(TransportError) as err:
        complete_remote(request_obj, endpoint, CREDENTIAL, timeout_s=1, sleep=lambda s: None)
    assert CREDENTIAL not in str(err.value)


def test_token_bucket_spacing_with_fake_clock():
    now = [0.0]
    sleeps = []

    def clock():
        return now[0]

    def sleep(s):
        sleeps.append(s)
        now[0] += s

    bucket = TokenBucket(rate_per_second=2.0, clock=clock, sleep=sleep)
    bucket.acquire()  # full bucket, no wait
    bucket.acquire()  # empty, waits 1/2 s
    bucket.acquire()
    assert sleeps == [0.5, 0.5]

    # Idle time refills up to capacity, no further.
    now[0] += 10.0
    bucket.acquire()
    assert sleeps == [0.5, 0.5]
    bucket.acquire()
    assert sleeps == [0.5, 0.5, 0.5]


def test_token_bucket_validation():
    with pytest.raises(ValueError):
        TokenBucket(rate_per_second=0)
    bucket = TokenBucket(rate_per_second=1.0, capacity=1.0)
    with pytest.raises(ValueError):
        bucket.acquire(cost=2.0)


def test_completion_request_validation():
    with pytest.raises(ValueError):
        CompletionRequest(system="s", user="")
    with pytest.raises(ValueError):
        CompletionRequest(system="s", user="u", max_tokens=0)


def test_instruction_template():
    assert instruction_template("push the red button") == "push the * button"
    assert instruction_template("stack the blue cube on the yellow cube") == (
        "stack the * cube on the * cube"
    )
    assert instruction_template("slide the block onto the target") == (
        "slide the block onto the target"
    )


def _random_pool(rng, n, width, instructions):
    pool = []
    for i in range(n):
        bins = tuple(int(b) for b in rng.integers(0, 100, size=width))
        instr = instructions[int(rng.integers(0, len(instructions)))]
        pool.append(DemoRecord(bins, instr, f"{{[{i % 100}, 0, 0, 0, 0, 0, 1]}}"))
    return pool


def test_mock_nearest_matches_brute_force():
    rng = np.random.default_rng(41)
    instructions = [
        "push the red button",
        "push the blue button",
        "slide the block onto the target",
    ]
    for _ in range(200):
        width = int(rng.integers(1, 13))
        pool = _random_pool(rng, int(rng.integers(1, 12)), width, instructions)
        test_bins = tuple(int(b) for b in rng.integers(0, 100, size=width))
        test_instr = instructions[int(rng.integers(0, len(instructions)))]

        exact = [i for i, d in enumerate(pool) if d.instruction == test_instr]
        if not exact:
            t = instruction_template(test_instr)
            exact = [i for i, d in enumerate(pool) if instruction_template(d.instruction) == t]
        if not exact:
            with pytest.raises(OracleError):
                complete_mock_nearest(pool, test_bins, test_instr)
            continue
        best = min(
            exact,
            key=lambda i: (sum((a - b) ** 2 for a, b in zip(pool[i].obs_bins, test_bins)), i),
        )
        result = complete_mock_nearest(pool, test_bins, test_instr)
        assert result.text == pool[best].output
        assert result.latency_ms == 0


def test_mock_nearest_tie_breaks_to_lowest_index():
    pool = [
        DemoRecord((10, 10), "push the red button", "{[1, 0, 0, 0, 0, 0, 1]}"),
        DemoRecord((10, 10), "push the red button", "{[2, 0, 0, 0, 0, 0, 1]}"),
    ]
    result = complete_mock_nearest(pool, (0, 0), "push the red button")
    assert result.text == pool[0].output


def test_mock_nearest_prefers_exact_instruction_over_closer_template():
    pool = [
        # Wrong color but identical observation vector.
        DemoRecord((5, 5), "push the blue button", "{[9, 0, 0, 0, 0, 0, 1]}"),
        # Right color, far away.
        DemoRecord((90, 90), "push the red button", "{[1, 0, 0, 0, 0, 0, 1]}"),
    ]
    result = complete_mock_nearest(pool, (5, 5), "push the red button")
    assert result.text == pool[1].output


def test_mock_nearest_rejects_mismatched_vector_lengths():
    pool = [DemoRecord((1, 2, 3), "push the red button", "{[0, 0, 0, 0, 0, 0, 1]}")]
    with pytest.raises(ValueError):
        complete_mock_nearest(pool, (1, 2), "push the red button")


def test_mock_nearest_accepts_raw_triples():
    result = complete_mock_nearest(
        [((3, 4), "push the red button", "{[7, 0, 0, 0, 0, 0, 1]}")],
        (3, 4),
        "push the red button",
    )
    assert result.text == "{[7, 0, 0, 0, 0, 0, 1]}"


def test_mock_compositional_concatenates_segments():
    pool = [
        DemoRecord((1, 1), "push the red button", "{[1, 1, 1, 0, 0, 0, 1], [2, 2, 2, 0, 0, 0, 1]}"),
        DemoRecord((1, 1), "push the green button", "{[3, 3, 3, 0, 0, 0, 1]}"),
    ]
    result = complete_mock_compositional(
        pool, (1, 1), "push the red button, then push the green button"
    )
    assert result.provider is Provider.MOCK_COMPOSITIONAL
    actions = parse_response(result.text)
    assert [a.pose.tx for a in actions] == [1, 2, 3]
    # Output is well-formed grammar, so strict parsing also works.
    assert parse_response(result.text, strict=True) == actions


def test_mock_compositional_single_segment_equals_nearest():
    pool = [DemoRecord((1, 1), "push the red button", "{[4, 0, 0, 0, 0, 0, 1]}")]
    a = complete_mock_compositional(pool, (1, 1), "push the red button")
    b = complete_mock_nearest(pool, (1, 1), "push the red button")
    assert parse_response(a.text) == parse_response(b.text)


def test_mock_compositional_reports_bad_segment():
    pool = [DemoRecord((1, 1), "push the red button", "{[1, 0, 0, 0, 0, 0, 1]}")]
    with pytest.raises(OracleError) as err:
        complete_mock_compositional(
            pool, (1, 1), "push the red button, then slide the block onto the target"
        )
    assert "slide the block onto the target" in str(err.value)


def test_mock_empty_pool():
    with pytest.raises(OracleError):
        complete_mock_nearest([], (1,), "push the red button")
