import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from hyperrec.graph import Graph, parse_edge_list  # noqa: E402

FIG2_TEXT = "1 2\n1 3\n2 3\n2 4\n3 4\n4 5\n"


@pytest.fixture(scope="session")
def fig2():
    """5-node graph whose factor encoding has two triangles and a pendant
    edge; maximal cliques {1,2,3}, {2,3,4}, {4,5} after id mapping."""
    return parse_edge_list(FIG2_TEXT)


@pytest.fixture(scope="session")
def triangle():
    return parse_edge_list("1 2\n2 3\n1 3\n")


@pytest.fixture(scope="session")
def single_edge():
    return parse_edge_list("1 2\n")


@pytest.fixture(scope="session")
def k5():
    return Graph([str(i) for i in range(5)],
                 [(i, j) for i in range(5) for j in range(i + 1, 5)])


@pytest.fixture(scope="session")
def small_catalog():
    """Every connected graph on 2..5 nodes, one per isomorphism class."""
    from oracles import connected_graphs_upto

    return connected_graphs_upto(5)
