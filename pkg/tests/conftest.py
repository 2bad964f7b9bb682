import time

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from groupoidal.core import cyclic_group, pair_groupoid, unit_groupoid
from groupoidal.examples import a2_star_a2, build_eprb
from groupoidal.products import direct_product

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ACCEPTANCE = []
SESSION = {}
RUNTIME_LIMIT = 180.0


def pytest_sessionstart(session):
    SESSION["start"] = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        elapsed = time.perf_counter() - SESSION.get("start", time.perf_counter())
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda x: int(x.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
        verdict = "PASS" if elapsed < RUNTIME_LIMIT else "FAIL"
        terminalreporter.write_line(
            f"CRITERION 9 (total runtime): {verdict} {elapsed:.1f} s for the whole session (limit {RUNTIME_LIMIT:.0f} s)"
        )


def corpus():
    """Small groupoids used across the property suites."""
    a2 = pair_groupoid(2, ["+", "-"])
    out = [
        pair_groupoid(1),
        a2,
        pair_groupoid(3),
        unit_groupoid(3),
        cyclic_group(4),
        build_eprb().groupoid,
        direct_product([a2, pair_groupoid(3)]).product,
        direct_product([cyclic_group(2), a2]).product,
    ]
    fp = a2_star_a2(1)
    out.append(fp.to_groupoid(fp.enumerate(4), name="A2*A2")[0])
    return out


CORPUS = corpus()


@pytest.fixture(params=range(len(CORPUS)), ids=[g.name or f"g{k}" for k, g in enumerate(CORPUS)])
def groupoid(request):
    return CORPUS[request.param]


@pytest.fixture
def eprb():
    return build_eprb()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_element(g, rng, density=0.6):
    from groupoidal.algebra import AlgebraElement

    v = rng.normal(size=len(g)) + 1j * rng.normal(size=len(g))
    v[rng.random(len(g)) > density] = 0
    return AlgebraElement(g, v)
