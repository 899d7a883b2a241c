import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from storeplan import kernels  # noqa: E402
from storeplan.core import Cost, CostMatrices, StoragePlan, build_solver_graph  # noqa: E402

# acceptance lines collected by test_acceptance, printed after the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[num])


# Five versions: full sizes plus the edges of the worked chain layout;
# (2,5) and (3,2) are extra revealed deltas.
DEMO5 = {
    (1, 1): (10000, 10000), (2, 2): (10100, 10100), (3, 3): (9700, 9700),
    (4, 4): (9800, 9800), (5, 5): (10120, 10120),
    (1, 2): (200, 200), (1, 3): (1000, 3000), (2, 4): (50, 400),
    (3, 5): (200, 550), (2, 5): (800, 2500), (3, 2): (1100, 3200),
}
DEMO5_CHAIN = StoragePlan.from_list([0, 1, 1, 2, 3])

# Undirected, storage == recreation.  Its drawn MST: 2<-0, 1<-2, 3<-1, 4<-1.
LAST_DEMO = {
    (1, 1): 6, (2, 2): 3, (3, 3): 3, (4, 4): 4,
    (1, 2): 3, (1, 3): 2, (1, 4): 2,
}
LAST_DEMO_MST = StoragePlan.from_list([2, 0, 1, 1])

# Directed; root edges plus three deltas, storage and recreation differ.
MP_DEMO = {
    (1, 1): (3, 3), (2, 2): (5, 5), (3, 3): (4, 4),
    (1, 2): (2, 3), (1, 3): (1, 4), (3, 2): (1, 2),
}


def demo5_sg():
    return build_solver_graph(None, CostMatrices(True, {k: Cost(*v) for k, v in DEMO5.items()}))


def last_demo_sg():
    entries = {}
    for (i, j), w in LAST_DEMO.items():
        entries[(i, j)] = Cost(w, w)
        entries[(j, i)] = Cost(w, w)
    return build_solver_graph(None, CostMatrices(False, entries))


def mp_demo_sg():
    return build_solver_graph(None, CostMatrices(True, {k: Cost(*v) for k, v in MP_DEMO.items()}))


@pytest.fixture(params=kernels.available_backends(), ids=lambda m: m.BACKEND)
def backend(request):
    return request.param
