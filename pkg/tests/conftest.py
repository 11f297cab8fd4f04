import pytest

from blindpad.numcore import PrimeModulus, RandomSource

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return RandomSource(20240607)


@pytest.fixture(params=[5, 7, 11], ids=lambda p: f"p{p}")
def small_p(request):
    return PrimeModulus(request.param)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
