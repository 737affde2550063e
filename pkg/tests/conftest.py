"""Shared fixtures: synthetic speech corpora and acceptance-line reporting."""

import contextlib

import pytest

from voceval import fixtures, spectral


def pytest_configure(config):
    config._criterion_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_criterion_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def criterion(request):
    """Context manager that records one PASS/FAIL line per named criterion."""

    @contextlib.contextmanager
    def run(name):
        lines = request.config._criterion_lines
        try:
            yield
        except BaseException:
            lines.append(f"FAIL  {name}")
            raise
        lines.append(f"PASS  {name}")

    return run


@pytest.fixture(scope="session")
def default_cfg():
    return spectral.SpectralConfig()


@pytest.fixture(scope="session")
def fixture_corpus(tmp_path_factory):
    """The full 20-clip synthetic corpus backing the acceptance gate."""
    root = tmp_path_factory.mktemp("fixture-corpus")
    manifest = fixtures.write_fixture_corpus(root)
    return root, manifest


@pytest.fixture(scope="session")
def mini_corpus(tmp_path_factory):
    """Four short clips for tests that just need real-looking waveforms."""
    root = tmp_path_factory.mktemp("mini-corpus")
    manifest = fixtures.write_fixture_corpus(root, n_clips=4, seed=911)
    return root, manifest
