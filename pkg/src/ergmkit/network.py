"""Network data model: sparse storage, dense working copies, JSON I/O,
and the elementary transformations (symmetrize, induced subgraph, binarize)
that term operators build on.

Vertex indices are 1-based in the public API and the JSON format; dense
working arrays are 0-based. Undirected dyads are stored with tail < head,
bipartite dyads with tail in the first mode.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from .errors import NetworkError

__all__ = [
    "AttrColumn",
    "Network",
    "DenseNet",
    "DyadChange",
    "canonical_dyad",
    "dyad_value",
    "set_dyad",
    "symmetrize_net",
    "induced_subgraph",
    "binarize",
    "load_network",
    "save_network",
    "network_from_json",
    "network_to_json",
]

_ATTR_KINDS = ("numeric", "categorical", "boolean")


@dataclass
class AttrColumn:
    """A homogeneous vertex attribute column of length n."""

    kind: str
    values: np.ndarray

    def __post_init__(self):
        if self.kind not in _ATTR_KINDS:
            raise NetworkError(f"unknown attribute kind {self.kind!r}")
        if self.kind == "numeric":
            self.values = np.asarray(self.values, dtype=np.float64)
        elif self.kind == "boolean":
            self.values = np.asarray(self.values, dtype=bool)
        else:
            self.values = np.asarray([str(v) for v in self.values], dtype=object)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class DyadChange:
    """A proposed assignment of new_value to one dyad."""

    tail: int
    head: int
    new_value: float


def canonical_dyad(i: int, j: int, net: "Network") -> tuple[int, int]:
    """Canonical (tail, head) pair for this network type. 1-based."""
    n = net.n
    if not (1 <= i <= n and 1 <= j <= n):
        raise NetworkError(f"vertex index out of range: ({i},{j}) with n={n}")
    if i == j:
        raise NetworkError(f"self-loop ({i},{i}) is not a dyad")
    if net.bipartite is not None:
        b = net.bipartite
        lo, hi = min(i, j), max(i, j)
        if not (lo <= b < hi):
            raise NetworkError(
                f"({i},{j}) is within one mode of a bipartite network (first mode size {b})"
            )
        return lo, hi
    if net.directed:
        return i, j
    return (i, j) if i < j else (j, i)


class Network:
    """Sparse network: n vertices, dyad -> value map, attributes, missing set.

    Stored edge values are nonzero; binary networks store only 1. The missing
    set marks unobserved dyads, disjoint from stored edges.
    """

    def __init__(
        self,
        n: int,
        directed: bool = False,
        bipartite: Optional[int] = None,
        edges: Optional[dict[tuple[int, int], float]] = None,
        vattrs: Optional[dict[str, AttrColumn]] = None,
        missing: Optional[Iterable[tuple[int, int]]] = None,
        meta: Optional[dict] = None,
    ):
        if n <= 0:
            raise NetworkError("network needs at least one vertex")
        if bipartite is not None:
            if directed:
                raise NetworkError("bipartite networks are undirected by convention")
            if not (0 < bipartite < n):
                raise NetworkError("bipartite first-mode size out of range")
        self.n = int(n)
        self.directed = bool(directed)
        self.bipartite = int(bipartite) if bipartite is not None else None
        self.edges: dict[tuple[int, int], float] = {}
        self.vattrs: dict[str, AttrColumn] = {}
        self.missing: set[tuple[int, int]] = set()
        self.meta: dict = dict(meta) if meta else {}
        if vattrs:
            for name, col in vattrs.items():
                self.set_vattr(name, col)
        if edges:
            for (t, h), v in edges.items():
                if v != 0:
                    self.edges[canonical_dyad(t, h, self)] = float(v)
        if missing:
            for t, h in missing:
                self.missing.add(canonical_dyad(t, h, self))
        bad = self.missing & set(self.edges)
        if bad:
            raise NetworkError(f"dyads both present and missing: {sorted(bad)[:3]}")

    # -- attributes ------------------------------------------------------

    def set_vattr(self, name: str, col) -> None:
        if not isinstance(col, AttrColumn):
            col = _infer_column(col)
        if len(col) != self.n:
            raise NetworkError(
                f"attribute {name!r} has length {len(col)}, expected {self.n}"
            )
        self.vattrs[name] = col

    # -- dyad bookkeeping ------------------------------------------------

    def edge_count(self) -> int:
        return len(self.edges)

    def is_binary(self) -> bool:
        return all(v == 1.0 for v in self.edges.values())

    def n_dyads(self) -> int:
        if self.bipartite is not None:
            return self.bipartite * (self.n - self.bipartite)
        if self.directed:
            return self.n * (self.n - 1)
        return self.n * (self.n - 1) // 2

    def dyads(self) -> Iterable[tuple[int, int]]:
        """All dyads in canonical dense enumeration order (1-based)."""
        n = self.n
        if self.bipartite is not None:
            b = self.bipartite
            for t in range(1, b + 1):
                for h in range(b + 1, n + 1):
                    yield t, h
        elif self.directed:
            for t in range(1, n + 1):
                for h in range(1, n + 1):
                    if h != t:
                        yield t, h
        else:
            for t in range(1, n + 1):
                for h in range(t + 1, n + 1):
                    yield t, h

    def copy(self) -> "Network":
        out = Network(self.n, self.directed, self.bipartite)
        out.edges = dict(self.edges)
        out.vattrs = dict(self.vattrs)
        out.missing = set(self.missing)
        out.meta = dict(self.meta)
        return out

    def to_dense(self) -> "DenseNet":
        y = np.zeros((self.n, self.n), dtype=np.float64)
        for (t, h), v in self.edges.items():
            y[t - 1, h - 1] = v
            if not self.directed:
                y[h - 1, t - 1] = v
        return DenseNet(y=y, directed=self.directed, bipartite=self.bipartite)

    def __repr__(self) -> str:
        kind = "bipartite" if self.bipartite is not None else (
            "directed" if self.directed else "undirected"
        )
        return f"<Network n={self.n} {kind} edges={len(self.edges)} missing={len(self.missing)}>"


def _infer_column(values) -> AttrColumn:
    arr = list(values)
    if all(isinstance(v, bool) or isinstance(v, np.bool_) for v in arr):
        return AttrColumn("boolean", arr)
    if all(isinstance(v, (int, float, np.integer, np.floating)) for v in arr):
        return AttrColumn("numeric", arr)
    return AttrColumn("categorical", arr)


@dataclass
class DenseNet:
    """Dense working copy used by statistics and samplers. 0-based.

    For undirected and bipartite networks y is kept symmetric so that terms
    may read either triangle; the canonical dyad of a pair is (min, max).
    """

    y: np.ndarray
    directed: bool
    bipartite: Optional[int] = None

    @property
    def n(self) -> int:
        return self.y.shape[0]

    def value(self, i: int, j: int) -> float:
        return float(self.y[i, j])

    def set(self, i: int, j: int, v: float) -> None:
        self.y[i, j] = v
        if not self.directed:
            self.y[j, i] = v

    def copy(self) -> "DenseNet":
        return DenseNet(self.y.copy(), self.directed, self.bipartite)

    def canonical_mask(self) -> np.ndarray:
        """Boolean mask selecting each dyad exactly once."""
        n = self.n
        if self.bipartite is not None:
            m = np.zeros((n, n), dtype=bool)
            m[: self.bipartite, self.bipartite:] = True
            return m
        if self.directed:
            return ~np.eye(n, dtype=bool)
        return np.triu(np.ones((n, n), dtype=bool), k=1)

    def dyad_list(self) -> tuple[np.ndarray, np.ndarray]:
        """Canonical dyads in dense enumeration order as 0-based index arrays."""
        mask = self.canonical_mask()
        t, h = np.nonzero(mask)
        return t.astype(np.int64), h.astype(np.int64)

    def to_network(self, template: Optional[Network] = None) -> Network:
        net = Network(self.n, self.directed, self.bipartite)
        mask = self.canonical_mask()
        t, h = np.nonzero(mask & (self.y != 0))
        net.edges = {(int(a) + 1, int(b) + 1): float(self.y[a, b]) for a, b in zip(t, h)}
        if template is not None:
            net.vattrs = dict(template.vattrs)
            net.meta = dict(template.meta)
        return net


# -- elementary operations -----------------------------------------------


def dyad_value(net: Network, d: tuple[int, int]) -> tuple[float, bool]:
    """Value of dyad d and whether it is flagged missing (0 if absent)."""
    key = canonical_dyad(d[0], d[1], net)
    return net.edges.get(key, 0.0), key in net.missing


def set_dyad(net: Network, change: DyadChange, support: Optional[Callable[[float], bool]] = None) -> Network:
    """Assign change.new_value to the dyad, in place. Zero removes the entry."""
    v = float(change.new_value)
    if support is not None and not support(v):
        raise NetworkError(f"value {v} outside the reference support")
    if not math.isfinite(v):
        raise NetworkError(f"non-finite dyad value {v}")
    key = canonical_dyad(change.tail, change.head, net)
    if v == 0.0:
        net.edges.pop(key, None)
    else:
        net.edges[key] = v
    return net


def symmetrize_net(net: Network, rule: str) -> Network:
    """Undirected projection of a directed binary network.

    weak: tie iff either direction; strong: both; upper: i->j for i<j;
    lower: j->i for i<j. Attributes are carried over.
    """
    if not net.directed:
        raise NetworkError("symmetrize requires a directed network")
    if rule not in ("weak", "strong", "upper", "lower"):
        raise NetworkError(f"unknown symmetrize rule {rule!r}")
    if not net.is_binary():
        raise NetworkError("symmetrize is defined for binary networks")
    out = Network(net.n, directed=False)
    out.vattrs = dict(net.vattrs)
    pairs = set()
    for (t, h) in net.edges:
        pairs.add((t, h) if t < h else (h, t))
    for i, j in pairs:
        fwd = (i, j) in net.edges
        bwd = (j, i) in net.edges
        keep = {
            "weak": fwd or bwd,
            "strong": fwd and bwd,
            "upper": fwd,
            "lower": bwd,
        }[rule]
        if keep:
            out.edges[(i, j)] = 1.0
    for (t, h) in net.missing:
        out.missing.add((t, h) if t < h else (h, t))
    out.missing -= set(out.edges)
    return out


def induced_subgraph(net: Network, tails: Iterable[int], heads: Iterable[int]) -> Network:
    """Subgraph keeping edges with tail in tails and head in heads (1-based).

    Equal vertex sets give a graph of the original type; disjoint sets give a
    bipartite undirected network with the tail set as the first mode.
    """
    tails = sorted(set(int(v) for v in tails))
    heads = sorted(set(int(v) for v in heads))
    if not tails or not heads:
        raise NetworkError("empty vertex selection")
    for v in tails + heads:
        if not (1 <= v <= net.n):
            raise NetworkError(f"vertex {v} out of range")
    if tails == heads:
        remap = {v: k + 1 for k, v in enumerate(tails)}
        out = Network(len(tails), directed=net.directed)
        for (t, h), v in net.edges.items():
            if t in remap and h in remap:
                key = (remap[t], remap[h])
                if not net.directed and key[0] > key[1]:
                    key = (key[1], key[0])
                out.edges[key] = v
        for name, col in net.vattrs.items():
            out.set_vattr(name, AttrColumn(col.kind, [col.values[v - 1] for v in tails]))
        for (t, h) in net.missing:
            if t in remap and h in remap:
                key = (remap[t], remap[h])
                if not net.directed and key[0] > key[1]:
                    key = (key[1], key[0])
                if key not in out.edges:
                    out.missing.add(key)
        return out
    if set(tails) & set(heads):
        raise NetworkError("tail and head selections must be equal or disjoint")
    b = len(tails)
    remap_t = {v: k + 1 for k, v in enumerate(tails)}
    remap_h = {v: k + b + 1 for k, v in enumerate(heads)}
    out = Network(b + len(heads), directed=False, bipartite=b)
    for (t, h), v in net.edges.items():
        if t in remap_t and h in remap_h:
            out.edges[(remap_t[t], remap_h[h])] = v
        elif not net.directed and h in remap_t and t in remap_h:
            out.edges[(remap_t[h], remap_h[t])] = v
    order = tails + heads
    for name, col in net.vattrs.items():
        out.set_vattr(name, AttrColumn(col.kind, [col.values[v - 1] for v in order]))
    return out


def binarize(net: Network, predicate: Callable[[float], bool]) -> Network:
    """Binary network with a tie wherever predicate(value) holds.

    The predicate must be 0 at value 0 (the B-operator contract).
    """
    if predicate(0.0):
        raise NetworkError("binarize predicate must be 0 at value 0")
    out = Network(net.n, net.directed, net.bipartite)
    out.vattrs = dict(net.vattrs)
    out.missing = set(net.missing)
    for key, v in net.edges.items():
        if predicate(v):
            out.edges[key] = 1.0
    return out


# -- JSON format ----------------------------------------------------------


def network_from_json(obj: dict) -> Network:
    try:
        n = int(obj["n"])
        directed = bool(obj["directed"])
    except KeyError as e:
        raise NetworkError(f"network JSON missing field {e}") from None
    bip = obj.get("bipartite")
    net = Network(n, directed, bip)
    for rec in obj.get("edges", []):
        if len(rec) == 2:
            t, h = rec
            v = 1.0
        else:
            t, h, v = rec
        if v != 0:
            net.edges[canonical_dyad(int(t), int(h), net)] = float(v)
    for t, h in obj.get("missing", []):
        key = canonical_dyad(int(t), int(h), net)
        if key not in net.edges:
            net.missing.add(key)
    for name, spec in obj.get("vattrs", {}).items():
        net.set_vattr(name, AttrColumn(spec["kind"], spec["values"]))
    meta = obj.get("meta")
    if meta:
        net.meta = dict(meta)
    return net


def network_to_json(net: Network) -> dict:
    edges = []
    binary = net.is_binary()
    for (t, h), v in sorted(net.edges.items()):
        edges.append([t, h] if binary else [t, h, v])
    vattrs = {}
    for name, col in net.vattrs.items():
        if col.kind == "numeric":
            vals = [float(v) if v != int(v) else int(v) for v in col.values]
        elif col.kind == "boolean":
            vals = [bool(v) for v in col.values]
        else:
            vals = [str(v) for v in col.values]
        vattrs[name] = {"kind": col.kind, "values": vals}
    obj = {
        "n": net.n,
        "directed": net.directed,
        "bipartite": net.bipartite,
        "edges": edges,
        "missing": sorted([t, h] for (t, h) in net.missing),
        "vattrs": vattrs,
    }
    if net.meta:
        obj["meta"] = dict(net.meta)
    return obj


def load_network(path: str) -> Network:
    with open(path, "r", encoding="utf-8") as fh:
        return network_from_json(json.load(fh))


def save_network(net: Network, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(network_to_json(net), fh)
        fh.write("\n")
