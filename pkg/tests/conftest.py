from fractions import Fraction

import pytest

from streamsched.graph import Node, NodeKind, TaskGraph


def chain(k, rates=(), kinds=None):
    """source -> compute(rates...) -> sink with source volume ``k``."""
    nodes = [Node("s", NodeKind.SOURCE)]
    edges = []
    vol, prev = k, "s"
    for i, r in enumerate(rates):
        name = f"c{i}"
        nodes.append(Node(name, NodeKind.COMPUTE, Fraction(r)))
        edges.append((prev, name, vol))
        vol = int(vol * Fraction(r))
        prev = name
    nodes.append(Node("t", NodeKind.SINK))
    edges.append((prev, "t", vol))
    return TaskGraph(nodes, edges)


def two_path_join():
    """Source feeding a sink directly and through a chain of rate changers.

    The direct edge must hold the slow path's start-up delay or the source
    stalls before the slow path produces anything.
    """
    return TaskGraph(
        [Node("0", NodeKind.SOURCE), Node("1", NodeKind.COMPUTE, Fraction(1, 8)),
         Node("2", NodeKind.COMPUTE, Fraction(1, 2)), Node("3", NodeKind.COMPUTE, Fraction(16)),
         Node("4", NodeKind.SINK)],
        [("0", "1", 32), ("1", "2", 4), ("2", "3", 2), ("3", "4", 32), ("0", "4", 32)],
    )


def reconvergent_graph():
    """Two sources; one path decimates 32:1 then expands, the other is element-wise."""
    return TaskGraph(
        [Node("0", NodeKind.SOURCE), Node("1", NodeKind.COMPUTE, Fraction(1, 32)),
         Node("2", NodeKind.COMPUTE, Fraction(32)), Node("3", NodeKind.SOURCE),
         Node("4", NodeKind.COMPUTE, Fraction(1)), Node("5", NodeKind.SINK)],
        [("0", "1", 32), ("1", "2", 1), ("2", "5", 32), ("3", "4", 32), ("0", "4", 32), ("4", "5", 32)])


@pytest.fixture
def join_graph():
    return two_path_join()
