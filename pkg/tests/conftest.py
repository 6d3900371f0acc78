import pytest

from torus_height.folding import rose
from torus_height.graphs import EdgePath, Graph
from torus_height.maps import GraphMap


def rose_map(petals: str, h: str, images: dict) -> GraphMap:
    """Map from the sub-rose on ``h`` to the rose on ``petals``; images are words like ``"aB"``."""
    F = rose(petals)
    H = rose(h)
    eimg = {}
    for x, w in images.items():
        steps = tuple((ch.lower(), 1 if ch.islower() else -1) for ch in w)
        eimg[x] = EdgePath("v", steps)
    return GraphMap(H, F, {"v": "v"}, eimg)


def two_cycle_map(img1, img2) -> GraphMap:
    F = Graph(["v", "w"], [("a1", "v", "w"), ("a2", "w", "v")])
    return GraphMap(F, F, {"v": "v", "w": "w"}, {"a1": EdgePath("v", img1), "a2": EdgePath("w", img2)})


@pytest.fixture
def shift():
    """a -> b on the sub-rose a of the rose a, b: directed height 1."""
    return rose_map("ab", "a", {"a": "b"})


@pytest.fixture
def fixed_loop():
    """a -> a: infinite directed height."""
    return rose_map("ab", "a", {"a": "a"})


@pytest.fixture
def chain():
    """a -> b -> c with H = loops a, b: directed height 2."""
    return rose_map("abc", "ab", {"a": "b", "b": "c"})


@pytest.fixture
def ascending():
    """a -> ab, b -> a on the whole rose: an ascending HNN extension."""
    return rose_map("ab", "ab", {"a": "ab", "b": "a"})


@pytest.fixture
def folded_circle():
    """Two-edge circle with a2 -> a1^-1; not pi1-injective."""
    return two_cycle_map((("a1", 1),), (("a1", -1),))


@pytest.fixture
def two_loops():
    """a -> ac, b -> cb in the rose a, b, c: height 1 with nontrivial immersions."""
    return rose_map("abc", "ab", {"a": "ac", "b": "cb"})


ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
