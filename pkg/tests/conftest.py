import numpy as np
import pytest

from macwt.channel import mi_bundle, random_channel, subsets, uniform_inputs

ACCEPTANCE_LINES: list[str] = []


def strictly_positive_secrecy(mi, margin=0.01) -> bool:
    """``I(X_S;Y|X_S^c) - I(X_S;Z) > margin`` for every nonempty ``S``: no clipped caps."""
    return all(float(mi.main(s) - mi.eve(s)) > margin for s in subsets(mi.users, nonempty=True))


def channel_corpus(count, seed=2024, margin=0.01, sizes=(2, 2), y_size=2, z_size=2):
    """First ``count`` Dirichlet channels (uniform inputs) with every secrecy cap above ``margin``."""
    out, i = [], 0
    px = uniform_inputs(sizes)
    while len(out) < count:
        ch = random_channel(sizes, y_size, z_size, np.random.default_rng([seed, i]))
        mi = mi_bundle(ch, px)
        if strictly_positive_secrecy(mi, margin):
            out.append((ch, mi))
        i += 1
    return out


def any_corpus(count, seed=77, sizes=(2, 2), y_size=2, z_size=2):
    px = uniform_inputs(sizes)
    return [
        (ch, mi_bundle(ch, px))
        for ch in (random_channel(sizes, y_size, z_size, np.random.default_rng([seed, i])) for i in range(count))
    ]


@pytest.fixture(scope="session")
def corpus():
    return channel_corpus(60)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
