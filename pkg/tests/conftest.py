import random

import pytest

from setjoin import core
from setjoin.datasets import bundled_path, read_transactions

TOKENS = "ABCDEFG"


@pytest.fixture(scope="session")
def toy():
    return read_transactions(bundled_path("toy_R.dat")), read_transactions(bundled_path("toy_S.dat"))


@pytest.fixture(scope="session")
def toy_decreasing(toy):
    """Fixture encoded under decreasing union frequency (G F E D C B A)."""
    return core.prepare(*toy, core.DECREASING, core.UNION)


def r(i):
    """Left oid for the 1-based object name r_i."""
    return i - 1


s = r


def zipf_items(rng, domain, n, z):
    weights = [1.0 / (k + 1) ** z for k in range(domain)]
    return rng.choices(range(domain), weights, k=n)


def random_instance(seed, max_card=64, max_domain=32, max_len=12, allow_empty=True):
    rng = random.Random(seed)
    z = (0.0, 0.5, 1.0)[seed % 3]
    domain = rng.randint(1, max_domain)
    lo = 0 if allow_empty else 1

    def side():
        out = []
        for _ in range(rng.randint(0, max_card)):
            n = min(rng.randint(lo, max_len), domain)
            out.append(zipf_items(rng, domain, n, z))
        return out

    return side(), side()


# acceptance bookkeeping: one line per criterion in the terminal summary
CRITERIA: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        terminalreporter.write_line(CRITERIA[n])
