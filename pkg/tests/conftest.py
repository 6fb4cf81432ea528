"""Shared fixtures: in-process CLI invocation with captured streams."""

import contextlib
import io
import os

import pytest

from cogmac.cli import main


@pytest.fixture(autouse=True)
def _no_worker_env(monkeypatch):
    # keep worker fan-out off unless a test asks for it
    monkeypatch.delenv("COGMAC_THREADS", raising=False)


@pytest.fixture
def run_cli():
    """Invoke the CLI in-process; returns (exit_code, stdout, stderr)."""

    def invoke(*argv, env=None):
        out, err = io.StringIO(), io.StringIO()
        saved = {}
        for key, value in (env or {}).items():
            saved[key] = os.environ.get(key)
            os.environ[key] = value
        try:
            with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
                try:
                    code = main(list(argv))
                except SystemExit as exc:  # argparse usage failures
                    code = exc.code if exc.code is not None else 0
        finally:
            for key, value in saved.items():
                if value is None:
                    os.environ.pop(key, None)
                else:
                    os.environ[key] = value
        return code, out.getvalue(), err.getvalue()

    return invoke
