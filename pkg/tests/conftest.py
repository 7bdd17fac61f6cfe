import random

import pytest
from hypothesis import HealthCheck, settings

from paritysig.fixtures import INDEX_PAIRS, random_tree

settings.register_profile("repo", deadline=None, max_examples=60, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


def tree_from_seed(seed, n=6, alphabet="ang", **kw):
    rng = random.Random(seed)
    i, k = INDEX_PAIRS[seed % len(INDEX_PAIRS)]
    return random_tree(rng, n, i, k, alphabet=alphabet, **kw)


@pytest.fixture
def rng():
    return random.Random(1234)


ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record a PASS/FAIL line for an acceptance criterion, then assert it."""
    results = request.config.stash.setdefault(ACCEPTANCE, {})

    def record(n, ok, detail):
        line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        results[n] = line
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(ACCEPTANCE, {})
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
