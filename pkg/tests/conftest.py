"""Shared fixtures: synthesized media files and a scriptable HTTP backend."""
from __future__ import annotations

import shutil
import subprocess
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest

FFMPEG = shutil.which("ffmpeg")
FFPROBE = shutil.which("ffprobe")

requires_tools = pytest.mark.skipif(
    not (FFMPEG and FFPROBE), reason="needs ffmpeg and ffprobe on PATH")


@pytest.fixture(scope="session")
def ffmpeg_bin():
    if not FFMPEG:
        pytest.skip("ffmpeg not on PATH")
    return FFMPEG


@pytest.fixture(scope="session")
def ffprobe_bin():
    if not FFPROBE:
        pytest.skip("ffprobe not on PATH")
    return FFPROBE


@pytest.fixture(scope="session")
def fixture_video(ffmpeg_bin, tmp_path_factory) -> Path:
    """5 s H.264 test pattern with a key frame forced every second (at 10 fps)."""
    path = tmp_path_factory.mktemp("media") / "clip5s.mp4"
    subprocess.run(
        [ffmpeg_bin, "-y", "-v", "error",
         "-f", "lavfi", "-i", "testsrc=size=192x108:rate=10",
         "-t", "5", "-pix_fmt", "yuv420p",
         "-c:v", "libx264", "-g", "10",
         "-x264-params", "keyint=10:min-keyint=10:scenecut=0",
         str(path)],
        check=True, capture_output=True)
    return path


@pytest.fixture(scope="session")
def single_frame_video(ffmpeg_bin, tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("media") / "oneframe.mp4"
    subprocess.run(
        [ffmpeg_bin, "-y", "-v", "error",
         "-f", "lavfi", "-i", "testsrc=size=64x64:rate=10",
         "-frames:v", "1", "-pix_fmt", "yuv420p", str(path)],
        check=True, capture_output=True)
    return path


class _ScriptedHandler(BaseHTTPRequestHandler):
    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        body = self.rfile.read(length)
        self.server.requests.append(
            {"path": self.path, "headers": dict(self.headers), "body": body})
        if self.server.script:
            status, content_type, payload, delay = self.server.script.pop(0)
        else:
            status, content_type, payload, delay = self.server.default
        if delay:
            time.sleep(delay)
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


class ScriptedBackend:
    """A throwaway HTTP server whose next responses are queued by the test."""

    def __init__(self):
        self._server = ThreadingHTTPServer(("127.0.0.1", 0), _ScriptedHandler)
        self._server.requests = []
        self._server.script = []
        self._server.default = (200, "application/json", b'{"text": "ok"}', 0.0)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()

    @property
    def url(self) -> str:
        host, port = self._server.server_address
        return f"http://{host}:{port}"

    @property
    def requests(self) -> list[dict]:
        return self._server.requests

    def queue(self, status: int, payload: bytes,
              content_type: str = "application/json", delay: float = 0.0):
        self._server.script.append((status, content_type, payload, delay))

    def set_default(self, status: int, payload: bytes,
                    content_type: str = "application/json", delay: float = 0.0):
        self._server.default = (status, content_type, payload, delay)

    def close(self):
        self._server.shutdown()
        self._server.server_close()


@pytest.fixture
def backend_server():
    server = ScriptedBackend()
    try:
        yield server
    finally:
        server.close()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    entries = []
    for outcome in ("passed", "failed"):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance" in nodeid:
                entries.append((nodeid.split("::")[-1], outcome == "passed"))
    if not entries:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed in sorted(entries):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}")
