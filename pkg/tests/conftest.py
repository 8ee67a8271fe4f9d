import pytest

from initjump.problem import ProblemSpec, validate


def make_problem(strict=True, grid=(51, 51), **coefficients):
    coefficients.setdefault("Q", "1")
    coefficients.setdefault("A", "1")
    coefficients.setdefault("pi0", "1")
    coefficients.setdefault("pi1", "1")
    return validate(ProblemSpec.create(**coefficients), grid=grid, strict=strict)


@pytest.fixture
def oracle_problem():
    """A=1, B=F=0, no kernels, Q=1, pi0=pi1=1: z = 2 - exp(-t/eps)."""
    return make_problem()


# acceptance criteria append (number, passed, detail) here; summarized at the end
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
