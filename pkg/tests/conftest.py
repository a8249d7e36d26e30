import itertools
import math

import numpy as np
import pytest

from ibkit.prob import JointPMF, validate_joint

ACCEPTANCE_LINES: list[str] = []


def h2(x: float) -> float:
    """Binary entropy in bits, written out independently of the package."""
    if x <= 0 or x >= 1:
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def bconv(p: float, q: float) -> float:
    return p * (1 - q) + q * (1 - p)


def random_joint(rng, nx: int, ny: int) -> JointPMF:
    return validate_joint(rng.dirichlet(np.ones(nx * ny)).reshape(nx, ny))


def random_rows(rng, n: int, m: int) -> np.ndarray:
    return rng.dirichlet(np.ones(m), size=n)


def bsc(p):
    return np.array([[1 - p, p], [p, 1 - p]])


def cran_loops(px, chans, maps, caps):
    """L = 1 bounds from an explicit (x, y1, y2, u1, u2) loop."""
    p = {}
    for x, y1, y2, u1, u2 in itertools.product(range(2), repeat=5):
        p[(x, y1, y2, u1, u2)] = px[x] * chans[0][x, y1] * chans[1][x, y2] * maps[0][y1, u1] * maps[1][y2, u2]

    def h(*idx):
        m = {}
        for k, w in p.items():
            key = tuple(k[i] for i in idx)
            m[key] = m.get(key, 0.0) + w
        return -sum(w * math.log(w) for w in m.values() if w > 0)

    pen = [h(0, 3) - h(0) - (h(1, 3) - h(1)), h(0, 4) - h(0) - (h(2, 4) - h(2))]
    mi = {(): 0.0, (3,): h(0) + h(3) - h(0, 3), (4,): h(0) + h(4) - h(0, 4), (3, 4): h(0) + h(3, 4) - h(0, 3, 4)}
    return {
        (): mi[(3, 4)],
        (0,): caps[0] - pen[0] + mi[(4,)],
        (1,): caps[1] - pen[1] + mi[(3,)],
        (0, 1): caps[0] + caps[1] - pen[0] - pen[1],
    }


@pytest.fixture
def dsbs01():
    return JointPMF.dsbs(0.1)


@pytest.fixture(scope="session")
def joint3x3():
    return random_joint(np.random.default_rng(3), 3, 3)


@pytest.fixture(scope="session")
def oracle3x3(joint3x3):
    """Brute-force frontier of the seeded 3x3 joint (|U|=3, step 1/25) and its concave envelope."""
    from ibkit.curve import upper_concave_envelope
    from ibkit.oracle import GridSpec, grid_ib_frontier

    g = GridSpec(1 / 25, 3)
    pts = grid_ib_frontier(joint3x3, g)
    env = upper_concave_envelope([(p.complexity, p.relevance) for p in pts])
    return g, pts, env


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
