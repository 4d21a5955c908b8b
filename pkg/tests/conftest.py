import itertools
import sys

import numpy as np
import pytest

from lemoncdo.cdo_model import AssetModel, DiscreteDist, Scenario, TrancheSpec, value_profile
from lemoncdo.expander import BipartiteGraph, build_cdo_graph


def carryless_mul(a, b, modulus):
    """Schoolbook GF(2)[x] product, then reduction; no tables involved."""
    prod = 0
    for i in range(b.bit_length()):
        if (b >> i) & 1:
            prod ^= a << i
    deg = modulus.bit_length() - 1
    for i in range(prod.bit_length() - 1, deg - 1, -1):
        if (prod >> i) & 1:
            prod ^= modulus << (i - deg)
    return prod


def random_model(rng, dominated=None, max_support=4, scenarios=None):
    """Random discrete model; with ``dominated`` set, forces or breaks dominance."""
    k = scenarios or int(rng.integers(1, 4))
    w = rng.dirichlet(np.ones(k))
    w[-1] = 1.0 - w[:-1].sum()
    scs = []
    for i in range(k):
        good = _random_dist(rng, max_support)
        lemon = _random_dist(rng, max_support)
        if dominated:
            lemon = _dominated_by(rng, good)
        scs.append(Scenario(float(w[i]), good, lemon))
    return AssetModel(tuple(scs))


def _random_dist(rng, max_support):
    size = int(rng.integers(1, max_support + 1))
    support = np.sort(rng.choice(np.linspace(0, 1, 21), size=size, replace=False))
    probs = rng.dirichlet(np.ones(size))
    probs[-1] = 1.0 - probs[:-1].sum()
    if probs[-1] < 0:
        probs = np.full(size, 1.0 / size)
    return DiscreteDist(tuple(float(x) for x in support), tuple(float(p) for p in probs))


def _dominated_by(rng, good):
    # shrink every atom toward 0 by a random factor: pointwise X >= Y coupling
    shrink = rng.uniform(0, 1)
    pts = {}
    for x, p in zip(good.support, good.probs):
        y = round(x * shrink, 12)
        pts[y] = pts.get(y, 0.0) + p
    support = sorted(pts)
    probs = [pts[s] for s in support]
    probs[-1] = 1.0 - sum(probs[:-1])
    return DiscreteDist(tuple(support), tuple(probs))


@pytest.fixture(scope="session")
def toy_graph():
    G, cert = build_cdo_graph(0.5, 16, 16, 4, 4, "direct")
    return G


@pytest.fixture(scope="session")
def toy_cert():
    return build_cdo_graph(0.5, 16, 16, 4, 4, "direct")[1]


@pytest.fixture
def bern_model():
    return AssetModel.single(DiscreteDist.bernoulli(0.5), DiscreteDist.point(0.0))


@pytest.fixture
def k22():
    return BipartiteGraph(2, 2, ((0, 1), (0, 1)), d=2, r=2)


@pytest.fixture
def k22_profile(bern_model):
    return value_profile(bern_model, TrancheSpec((0, 1, 2)), 2)


def brute_force_valu(model, tranches, r, g):
    """Expected tranche payoffs by enumerating every joint outcome."""
    out = np.zeros(len(tranches.points) - 1)
    for sc in model.scenarios:
        dists = [sc.good] * g + [sc.lemon] * (r - g)
        for combo in itertools.product(*[list(zip(d.support, d.probs)) for d in dists]):
            x = sum(c[0] for c in combo)
            p = np.prod([c[1] for c in combo]) if combo else 1.0
            pts = tranches.points
            pay = [min(x, pts[i + 1]) - min(x, pts[i]) for i in range(len(pts) - 1)]
            out += sc.weight * p * np.asarray(pay)
    return out


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[num])
