"""Constrained sample spaces: which dyads may vary, and under what rules.

The free-dyad set is kept run-length encoded over the canonical dyad
order, so membership tests and uniform draws of the k-th free dyad are
O(log runs). Constraints shrink the free set (their fixed sets union);
degree bounds stay behind as hard proposal predicates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ModelError
from .formula import Bool, Call, FormulaNode, Null, Num, Str, Unary
from .modelspec import (
    ConstraintSpec, eval_attr, level_universe, parse_constraints,
    resolve_levels, resolve_levels2,
)
from .network import DenseNet, Network
from .terms import TermContext


class Universe:
    """Run-length encoded subset of the canonical dyad enumeration."""

    def __init__(self, net_like, free_mask: np.ndarray,
                 tails: np.ndarray | None = None, heads: np.ndarray | None = None):
        if tails is None:
            shape = DenseNet(np.zeros((net_like.n, net_like.n)),
                             net_like.directed, net_like.bipartite)
            tails, heads = shape.dyad_list()
        self.n = net_like.n
        self.directed = net_like.directed
        self.bipartite = net_like.bipartite
        self.tails = np.asarray(tails)
        self.heads = np.asarray(heads)
        self.free_mask = np.asarray(free_mask, bool)
        if self.free_mask.shape != self.tails.shape:
            raise ModelError("free mask does not match the dyad enumeration")
        self._lin = {}
        for k in range(len(self.tails)):
            self._lin[(int(self.tails[k]), int(self.heads[k]))] = k
        self._encode()

    def _encode(self) -> None:
        idx = np.flatnonzero(self.free_mask)
        if len(idx) == 0:
            self.run_starts = np.zeros(0, dtype=np.int64)
            self.run_lengths = np.zeros(0, dtype=np.int64)
        else:
            breaks = np.flatnonzero(np.diff(idx) > 1)
            starts = np.concatenate([[0], breaks + 1])
            ends = np.concatenate([breaks, [len(idx) - 1]])
            self.run_starts = idx[starts].astype(np.int64)
            self.run_lengths = (idx[ends] - idx[starts] + 1).astype(np.int64)
        self.run_prefix = np.concatenate([[0], np.cumsum(self.run_lengths)])
        self.size = int(self.run_prefix[-1])

    def decode_mask(self) -> np.ndarray:
        out = np.zeros(len(self.tails), dtype=bool)
        for s, ln in zip(self.run_starts, self.run_lengths):
            out[s: s + ln] = True
        return out

    def kth(self, k: int) -> tuple[int, int]:
        if not 0 <= k < self.size:
            raise IndexError(k)
        r = int(np.searchsorted(self.run_prefix, k, side="right") - 1)
        lin = int(self.run_starts[r] + (k - self.run_prefix[r]))
        return int(self.tails[lin]), int(self.heads[lin])

    def linear_index(self, i: int, j: int):
        return self._lin.get((i, j))

    def is_free(self, i: int, j: int) -> bool:
        lin = self._lin.get((i, j))
        if lin is None:
            return False
        r = int(np.searchsorted(self.run_starts, lin, side="right") - 1)
        return r >= 0 and lin < self.run_starts[r] + self.run_lengths[r]

    def iter_free(self):
        for s, ln in zip(self.run_starts, self.run_lengths):
            for lin in range(s, s + ln):
                yield int(self.tails[lin]), int(self.heads[lin])

    def free_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        m = self.decode_mask()
        return self.tails[m], self.heads[m]

    def restrict(self, mask: np.ndarray) -> "Universe":
        u = Universe.__new__(Universe)
        u.n, u.directed, u.bipartite = self.n, self.directed, self.bipartite
        u.tails, u.heads = self.tails, self.heads
        u.free_mask = self.free_mask & np.asarray(mask, bool)
        u._lin = self._lin
        u._encode()
        return u


@dataclass
class SampleSpace:
    universe: Universe
    edges_fixed: bool = False
    maxout: int | None = None
    obs_universe: Universe | None = None
    fixed_values: dict = field(default_factory=dict)


def _mask_from_grid(uni: Universe, grid: np.ndarray) -> np.ndarray:
    return grid[uni.tails, uni.heads] != 0


def _affected_grid(net: Network, fnode, what: str) -> np.ndarray:
    """(n, n) 0/1 grid of dyads whose 0 -> 1 toggle moves any statistic."""
    from .model import realize_rhs

    if not isinstance(fnode, FormulaNode) or fnode.lhs is not None:
        raise ModelError(f"{what}: expected a one-sided formula")
    ctx = TermContext(net, valued=False, options={"interact.dependent": "error"})
    terms = realize_rhs(ctx, fnode.rhs)
    n = net.n
    out = np.zeros((n, n))
    for t in terms:
        if not getattr(t, "dyad_independent", False):
            raise ModelError(f"{what}: formula must be dyad-independent")
        try:
            for s in t.dyadwise():
                c1 = s.contrib_grid(1.0)
                c0 = s.contrib_grid(0.0)
                out += (np.abs(c1 - c0) > 0)
        except ModelError:
            shape = DenseNet(np.zeros((n, n)), net.directed, net.bipartite)
            ts, hs = shape.dyad_list()
            for i, j in zip(ts, hs):
                d = t.change(shape, int(i), int(j), 1.0)
                if np.any(d != 0):
                    out[i, j] = 1.0
                    if not net.directed:
                        out[j, i] = 1.0
    if not net.directed:
        out = out + out.T
    return (out != 0) * 1.0


def _blocks_grid(net: Network, call: Call) -> np.ndarray:
    """Grid of dyads falling in the selected mixing cells."""
    args = {}
    names = ["attr", "levels", "levels2"]
    pos = 0
    for a in call.args:
        if a.name is None:
            args[names[pos]] = a.value
            pos += 1
        else:
            if a.name not in names:
                raise ModelError(f"blocks: unknown argument {a.name!r}")
            args[a.name] = a.value
    if "attr" not in args:
        raise ModelError("blocks: needs an attribute")
    attr = eval_attr(net, args["attr"])
    col = attr.as_discrete()
    levels, freqs = level_universe(col)
    lev_node = args.get("levels")
    keep = resolve_levels(levels, freqs, None if isinstance(lev_node, (Null, type(None)))
                          else lev_node)
    symmetric = not net.directed
    node2 = args.get("levels2", Bool(True))
    if isinstance(node2, Null):
        node2 = Bool(True)
    groups = resolve_levels2(keep, keep, node2, symmetric)
    n = net.n
    ind = {k: np.array([1.0 if (v == lv or str(v) == str(lv)) else 0.0 for v in col])
           for k, lv in enumerate(keep)}
    grid = np.zeros((n, n))
    for _, cells in groups:
        for (r, c) in cells:
            X = np.outer(ind[r], ind[c])
            grid += X if net.directed else X + X.T
    np.fill_diagonal(grid, 0.0)
    return grid


def _egocentric_free(net: Network, call: Call) -> np.ndarray:
    names = ["attr", "direction"]
    args = {}
    pos = 0
    for a in call.args:
        if a.name is None:
            args[names[pos]] = a.value
            pos += 1
        else:
            args[a.name] = a.value
    anode = args.get("attr")
    if anode is None or isinstance(anode, Null):
        ego = np.ones(net.n, bool)
    else:
        attr = eval_attr(net, anode)
        col = attr.column()
        ego = np.array([float(v) != 0.0 for v in col])
    dnode = args.get("direction")
    direction = dnode.value if isinstance(dnode, Str) else "both"
    if direction not in ("both", "out", "in"):
        raise ModelError("egocentric direction must be both, out, or in")
    n = net.n
    fixed = np.zeros((n, n), bool)
    if direction in ("both", "out"):
        fixed[ego, :] = True
    if direction in ("both", "in"):
        fixed[:, ego] = True
    if not net.directed:
        fixed = fixed | fixed.T
    return ~fixed


def _observed_free(net: Network) -> np.ndarray:
    n = net.n
    free = np.zeros((n, n), bool)
    for (t, h) in net.missing:
        free[t - 1, h - 1] = True
        if not net.directed:
            free[h - 1, t - 1] = True
    return free


def _load_net_arg(node, what: str) -> Network:
    from .network import load_network
    if isinstance(node, Str):
        return load_network(node.value)
    raise ModelError(f"{what}: expected a network file path string")


def constraint_free_mask(net: Network, uni: Universe, spec: ConstraintSpec,
                         space: SampleSpace) -> np.ndarray | None:
    """Free-dyad mask contributed by one constraint, or None if it does not
    restrict the universe."""
    kind = spec.kind
    if kind == "edges_fixed":
        space.edges_fixed = True
        return None
    if kind == "bd":
        call = spec.node
        maxout = None
        for a in call.args:
            if a.name in (None, "maxout"):
                maxout = int(float(a.value.value))
        if maxout is None:
            raise ModelError("bd: needs maxout")
        space.maxout = maxout
        return None
    if kind == "observed":
        return _mask_from_grid(uni, _observed_free(net) * 1.0)
    if kind == "egocentric":
        return _mask_from_grid(uni, _egocentric_free(net, spec.node) * 1.0)
    if kind == "blocks":
        return ~_mask_from_grid(uni, _blocks_grid(net, spec.node))
    if kind == "dyads":
        call = spec.node
        fix_node = vary_node = None
        pos_names = ["fix", "vary"]
        pos = 0
        for a in call.args:
            nm = a.name if a.name is not None else pos_names[pos]
            if a.name is None:
                pos += 1
            if nm == "fix":
                fix_node = a.value
            elif nm == "vary":
                vary_node = a.value
            else:
                raise ModelError(f"Dyads: unknown argument {nm!r}")
        if fix_node is None and vary_node is None:
            raise ModelError("Dyads: needs fix= or vary=")
        free = np.zeros(len(uni.tails), bool)
        used = False
        if fix_node is not None and not isinstance(fix_node, Null):
            grid = _affected_grid(net, fix_node, "Dyads fix")
            free |= ~_mask_from_grid(uni, grid)
            used = True
        if vary_node is not None and not isinstance(vary_node, Null):
            grid = _affected_grid(net, vary_node, "Dyads vary")
            free |= _mask_from_grid(uni, grid)
            used = True
        return free if used else None
    if kind == "fixedas":
        y1 = y0 = None
        pos_names = ["present", "absent"]
        pos = 0
        for a in spec.node.args:
            nm = a.name if a.name is not None else pos_names[pos]
            if a.name is None:
                pos += 1
            if nm == "present":
                y1 = _load_net_arg(a.value, "fixedas present")
            elif nm == "absent":
                y0 = _load_net_arg(a.value, "fixedas absent")
        fixed = np.zeros(len(uni.tails), bool)
        for src, val in ((y1, 1.0), (y0, 0.0)):
            if src is None:
                continue
            for (t, h) in src.edges:
                lin = uni.linear_index(t - 1, h - 1)
                if lin is None and not net.directed:
                    lin = uni.linear_index(h - 1, t - 1)
                if lin is not None:
                    fixed[lin] = True
                    space.fixed_values[lin] = val
        return ~fixed
    raise ModelError(f"unsupported constraint {kind!r}")


def _stored_specs(net: Network, key: str) -> list[ConstraintSpec]:
    text = net.meta.get(key)
    return parse_constraints(text) if text else []


def build_sample_space(net: Network, constraints: list[ConstraintSpec],
                       obs_constraints: list[ConstraintSpec]) -> SampleSpace:
    base = Universe(net, np.ones(_n_dyads(net), bool))
    space = SampleSpace(universe=base)

    # Constraint specs stored on the network apply in addition to any the
    # caller passes explicitly.
    constraints = _stored_specs(net, "constraints") + list(constraints)
    obs_constraints = _stored_specs(net, "obs_constraints") + list(obs_constraints)

    free = np.ones(len(base.tails), bool)
    for spec in constraints:
        m = constraint_free_mask(net, base, spec, space)
        if m is not None:
            free &= m
    space.universe = base.restrict(free)

    obs = list(obs_constraints)
    if net.missing and not any(c.kind == "observed" for c in obs):
        obs.append(ConstraintSpec("observed", Call("observed", ())))
    if obs:
        ofree = free.copy()
        for spec in obs:
            m = constraint_free_mask(net, base, spec, space)
            if m is not None:
                ofree &= m
        space.obs_universe = base.restrict(ofree)
    return space


def _n_dyads(net: Network) -> int:
    if net.bipartite is not None:
        return net.bipartite * (net.n - net.bipartite)
    if net.directed:
        return net.n * (net.n - 1)
    return net.n * (net.n - 1) // 2
