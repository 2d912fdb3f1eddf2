"""Shared builders for small hand-checkable networks."""

import numpy as np
import pytest

from ergmkit.network import AttrColumn, Network


def net_from_edges(n, edges, directed=False, values=None, **attrs):
    net = Network(n, directed=directed)
    for k, (t, h) in enumerate(edges):
        if not directed and t > h:
            t, h = h, t
        net.edges[(t, h)] = 1.0 if values is None else float(values[k])
    for name, col in attrs.items():
        net.set_vattr(name, col)
    return net


@pytest.fixture
def triangle():
    """Undirected triangle on four nodes (node 4 isolated)."""
    return net_from_edges(4, [(1, 2), (2, 3), (1, 3)])


@pytest.fixture
def directed5():
    """Five nodes, six directed ties, one mutual pair (1<->2)."""
    return net_from_edges(
        5, [(1, 2), (2, 1), (2, 3), (3, 4), (4, 5), (5, 1)], directed=True,
        color=AttrColumn("categorical", ["r", "r", "g", "g", "b"]),
        size=AttrColumn("numeric", [1.0, 2.0, 3.0, 4.0, 5.0]),
    )


def brute_stats(net, stat_fn):
    """Evaluate stat_fn on the dense adjacency matrix."""
    return stat_fn(net.to_dense().y)
