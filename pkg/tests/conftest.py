import pytest

from lrpackrat import make_session, parse_grammar_text
from lrpackrat.engine import available_backends
from lrpackrat.recovery import RecoveryConfig

BACKENDS = available_backends()


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def G(text):
    """Parse and resolve grammar text."""
    return parse_grammar_text(text).resolve()


def run(grammar, text, backend=None, recover=True, max_skip=64):
    """Parse and return (root, session)."""
    if isinstance(grammar, str):
        grammar = G(grammar)
    s = make_session(grammar, text, RecoveryConfig(max_skip=max_skip, enabled=recover), backend)
    return s.parse(), s


def discover(grammar, text, backend=None):
    if isinstance(grammar, str):
        grammar = G(grammar)
    s = make_session(grammar, text, None, backend)
    return s.discover(), s


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(VERDICTS):
        terminalreporter.write_line(VERDICTS[n])
