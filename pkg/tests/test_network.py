"""Network container and its JSON wire format."""

import json

import numpy as np
import pytest

from ergmkit.errors import NetworkError
from ergmkit.network import (
    AttrColumn,
    Network,
    network_from_json,
    network_to_json,
)

from conftest import net_from_edges


def test_json_round_trip_binary():
    net = net_from_edges(4, [(1, 2), (3, 4)],
                         grp=AttrColumn("categorical", list("aabb")))
    net.missing.add((1, 3))
    net.meta["constraints"] = "~edges"
    obj = network_to_json(net)
    # binary edges omit the value column
    assert all(len(e) == 2 for e in obj["edges"])
    back = network_from_json(json.loads(json.dumps(obj)))
    assert back.n == 4 and not back.directed
    assert back.edges == net.edges
    assert back.missing == net.missing
    assert back.meta == {"constraints": "~edges"}
    assert back.vattrs["grp"].values == ["a", "a", "b", "b"]
    assert back.vattrs["grp"].kind == "categorical"


def test_json_round_trip_valued_directed():
    net = net_from_edges(3, [(1, 2), (2, 1), (3, 1)], directed=True,
                         values=[2.0, 1.0, 5.0])
    obj = network_to_json(net)
    assert sorted(obj["edges"]) == [[1, 2, 2.0], [2, 1, 1.0], [3, 1, 5.0]]
    back = network_from_json(obj)
    assert back.directed
    assert back.edges[(3, 1)] == 5.0


def test_undirected_keys_canonicalized_on_load():
    obj = {"n": 3, "directed": False, "edges": [[3, 1]]}
    net = network_from_json(obj)
    assert (1, 3) in net.edges


def test_bipartite_round_trip():
    net = Network(5, directed=False, bipartite=2)
    net.edges[(1, 3)] = 1.0
    back = network_from_json(network_to_json(net))
    assert back.bipartite == 2


def test_attr_length_validated():
    net = Network(3)
    with pytest.raises(NetworkError):
        net.set_vattr("x", AttrColumn("numeric", [1.0, 2.0]))


def test_set_vattr_infers_kind():
    net = Network(3)
    net.set_vattr("num", [1, 2, 3])
    net.set_vattr("cat", ["a", "b", "a"])
    net.set_vattr("flag", [True, False, True])
    assert net.vattrs["num"].kind == "numeric"
    assert net.vattrs["cat"].kind == "categorical"
    assert net.vattrs["flag"].kind == "boolean"


def test_is_binary_and_dense_round_trip():
    net = net_from_edges(3, [(1, 2)], values=[3.0])
    assert not net.is_binary()
    dense = net.to_dense()
    assert dense.y[0, 1] == 3.0 and dense.y[1, 0] == 3.0  # undirected mirror
    assert net_from_edges(3, [(1, 2)]).is_binary()


def test_copy_is_independent():
    net = net_from_edges(3, [(1, 2)])
    dup = net.copy()
    dup.edges[(2, 3)] = 1.0
    dup.missing.add((1, 3))
    assert (2, 3) not in net.edges and not net.missing


def test_self_loops_rejected():
    with pytest.raises(NetworkError):
        network_from_json({"n": 3, "directed": True, "edges": [[2, 2]]})


def test_out_of_range_vertex_rejected():
    with pytest.raises(NetworkError):
        network_from_json({"n": 3, "directed": False, "edges": [[1, 4]]})
