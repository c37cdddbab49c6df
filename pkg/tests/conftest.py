import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from kernelshapiq.games import FunctionGame, LookupGame, generate_soum, random_lookup_game

settings.register_profile("ci", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")


def additive_game(coefs):
    coefs = np.asarray(coefs, dtype=float)
    n = len(coefs)
    return FunctionGame(n, lambda m: float(sum(coefs[i] for i in range(n) if m >> i & 1)))


def two_player_game(a, b, c):
    return LookupGame(2, [0.0, a, b, c])


def brute_force_sii(values, n, S):
    """Definition-level SII with Python integers and sets; slow but independent."""
    from math import factorial

    S = frozenset(S)
    s = len(S)
    rest = [i for i in range(n) if i not in S]
    total = 0.0
    for t in range(len(rest) + 1):
        w = factorial(n - s - t) * factorial(t) / factorial(n - s + 1)
        for T in itertools.combinations(rest, t):
            delta = 0.0
            for ell in range(s + 1):
                for L in itertools.combinations(sorted(S), ell):
                    mask = sum(1 << i for i in T) | sum(1 << i for i in L)
                    delta += (-1) ** (s - ell) * values[mask]
            total += w * delta
    return total


@pytest.fixture
def lookup6():
    return random_lookup_game(6, seed=11)


@pytest.fixture
def soum8():
    return generate_soum(8, 20, 4, 0, seed=5)


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def acceptance():
    """Record one summary line per acceptance criterion, printed at the end of the run."""

    def record(criterion: int, passed: bool, detail: str):
        ACCEPTANCE_LINES[criterion] = f"criterion {criterion:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
