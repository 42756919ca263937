import base64
import json
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest

from synabsa.conllu import parse_conllu
from synabsa.graph import build_unified_graph

FIXTURES = Path(__file__).parent / "fixtures"

FIVE_TOKEN_CONLLU = """\
1\tThe\tthe\tDET\t_\t_\t2\tdet\t_\t_
2\tfood\tfood\tNOUN\t_\t_\t3\tnsubj\t_\t_
3\twas\tbe\tAUX\t_\t_\t0\troot\t_\t_
4\tamazing\tamazing\tADJ\t_\t_\t3\tacomp\t_\t_
5\t!\t!\tPUNCT\t_\t_\t3\tpunct\t_\t_
"""

# Smallest valid PNG (1x1, opaque). Keeps image fixtures out of git binaries.
TINY_PNG = base64.b64decode(
    "iVBORw0KGgoAAAANSUhEUgAAAAEAAAABCAYAAAAfFcSJAAAADUlEQVR42mNk"
    "YPhfDwAChwGA60e6kgAAAABJRU5ErkJggg=="
)


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def five_token_graph():
    return build_unified_graph(parse_conllu(FIVE_TOKEN_CONLLU))


@pytest.fixture
def three_sentence_blocks():
    return parse_conllu((FIXTURES / "three_sentences.conllu").read_text())


@pytest.fixture
def tiny_png(tmp_path):
    path = tmp_path / "img.png"
    path.write_bytes(TINY_PNG)
    return str(path)


class _ScriptedHandler(BaseHTTPRequestHandler):
    """POST handler driven by the server's ``script`` callable."""

    def do_POST(self):
        server = self.server
        with server.state_lock:
            server.in_flight += 1
            server.max_in_flight = max(server.max_in_flight, server.in_flight)
            server.request_count += 1
            count = server.request_count
        try:
            length = int(self.headers.get("Content-Length", 0))
            payload = json.loads(self.rfile.read(length) or b"{}")
            status, body = server.script(count, payload)
            raw = json.dumps(body).encode() if isinstance(body, dict) else body.encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(raw)))
            self.end_headers()
            self.wfile.write(raw)
        finally:
            with server.state_lock:
                server.in_flight -= 1

    def log_message(self, fmt, *args):  # keep test output clean
        pass


class MockEndpoint:
    """Local chat-completions endpoint with a scriptable response function.

    ``script(request_index, payload) -> (status, body)``; body may be a dict
    (JSON-encoded) or a raw string. Tracks request count and the maximum
    number of concurrently active requests.
    """

    def __init__(self, script):
        self.server = ThreadingHTTPServer(("127.0.0.1", 0), _ScriptedHandler)
        self.server.script = script
        self.server.state_lock = threading.Lock()
        self.server.in_flight = 0
        self.server.max_in_flight = 0
        self.server.request_count = 0
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)
        self.thread.start()

    @property
    def url(self):
        host, port = self.server.server_address
        return f"http://{host}:{port}/v1/chat/completions"

    @property
    def request_count(self):
        return self.server.request_count

    @property
    def max_in_flight(self):
        return self.server.max_in_flight

    def close(self):
        self.server.shutdown()
        self.server.server_close()


def chat_body(text, prompt_tokens=7, completion_tokens=5):
    return {
        "choices": [{"message": {"role": "assistant", "content": text}}],
        "usage": {"prompt_tokens": prompt_tokens, "completion_tokens": completion_tokens},
    }


@pytest.fixture
def mock_endpoint():
    endpoints = []

    def factory(script):
        endpoint = MockEndpoint(script)
        endpoints.append(endpoint)
        return endpoint

    yield factory
    for endpoint in endpoints:
        endpoint.close()


@pytest.fixture(autouse=True)
def _api_key(monkeypatch):
    monkeypatch.setenv("OPENAI_API_KEY", "test-key")


# --------------------------------------------------------------- e2e harness

# Scripted replies for the 10-sample fixture corpus, keyed by aspect term.
# test-0003 and test-0005 are deliberately wrong; test-0007 violates the
# output format.
E2E_REPLIES = {
    "Barcelona": "Sentiment: positive Explanation: The text celebrates the title and the image shows joy.",
    "Suarez": "Sentiment: negative Explanation: The word Sink frames Suarez negatively despite the cheering.",
    "La Liga": "Sentiment: neutral Explanation: The league is mentioned factually as context.",
    "Messi": "Sentiment: neutral Explanation: The mention reads as plain reporting.",
    "referee": "Sentiment: negative Explanation: The text blames the referee for ruining the match.",
    "stadium": "Sentiment: positive Explanation: The stadium is shown full and lively.",
    "coach": "Sentiment: positive Explanation: The call is praised as brilliant.",
    "weather": "The weather was bad, nothing more to say.",
    "fans": "Sentiment: neutral Explanation: The stands filling early is stated without emotion.",
    "trophy": "Sentiment: positive Explanation: Lifting the trophy and crying with joy signal triumph.",
}

_ASPECT_LINE = re.compile(r"Aspect term: ([^.\n]+)\.")


def user_text_of(payload):
    chunks = []
    for message in payload.get("messages", []):
        content = message.get("content")
        if isinstance(content, str):
            chunks.append(content)
        elif isinstance(content, list):
            chunks.extend(p.get("text", "") for p in content if p.get("type") == "text")
    return "\n".join(chunks)


def e2e_reply_script(count, payload):
    match = _ASPECT_LINE.search(user_text_of(payload))
    aspect = match.group(1).strip() if match else None
    reply = E2E_REPLIES.get(aspect, "Sentiment: neutral Explanation: fallback.")
    return 200, chat_body(reply)


@pytest.fixture
def e2e_workspace(tmp_path):
    """Copy the 10-sample fixture corpus source and synthesize its images."""
    work = tmp_path / "e2e"
    work.mkdir()
    images = work / "images"
    images.mkdir()
    for i in range(10):
        (images / f"e2e_{i}.jpg").write_bytes(TINY_PNG)
    return {
        "dir": work,
        "records": str(FIXTURES / "e2e" / "test.txt"),
        "parses": str(FIXTURES / "e2e" / "parses"),
        "images": str(images),
        "corpus": str(work / "corpus.jsonl"),
    }
