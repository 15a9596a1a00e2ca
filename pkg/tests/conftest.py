from __future__ import annotations

import socket

import pytest
from helpers import StubServer

from promptprobe.models import GenerationParams, ModelEndpoint, RetryPolicy


@pytest.fixture
def stub_server():
    servers = []

    def make(script=None, reply=None):
        srv = StubServer(script, reply).__enter__()
        servers.append(srv)
        return srv

    yield make
    for srv in servers:
        srv.__exit__(None, None, None)


@pytest.fixture
def api_key(monkeypatch):
    monkeypatch.setenv("PROMPTPROBE_TEST_KEY", "sk-test-secret-value")
    return "PROMPTPROBE_TEST_KEY"


@pytest.fixture
def remote_endpoint(api_key):
    def make(url, max_retries=3, name="remote"):
        return ModelEndpoint(kind="openai_compatible", model_name="stub-model", base_url=url, auth_ref=api_key,
                             name=name, retry=RetryPolicy(max_retries=max_retries, base_delay=0.0, factor=2.0),
                             timeout=5.0)
    return make


@pytest.fixture
def no_network(monkeypatch):
    """Fail any outbound socket connection; yields the list of attempted addresses."""
    attempts = []
    real_connect = socket.socket.connect

    def deny(self, address, *args, **kwargs):
        if self.family == socket.AF_UNIX:
            return real_connect(self, address, *args, **kwargs)
        attempts.append(address)
        raise OSError(f"network access denied in test: {address!r}")

    def deny_create(address, *args, **kwargs):
        attempts.append(address)
        raise OSError(f"network access denied in test: {address!r}")

    monkeypatch.setattr(socket.socket, "connect", deny)
    monkeypatch.setattr(socket.socket, "connect_ex", deny)
    monkeypatch.setattr(socket, "create_connection", deny_create)
    return attempts


@pytest.fixture
def params():
    return GenerationParams()


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.RESULTS):
        status, summary = module.RESULTS[number]
        terminalreporter.write_line(f"criterion {number}: {status}  {summary}")
