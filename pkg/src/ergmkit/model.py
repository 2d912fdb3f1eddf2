"""Model realization: turn formula text plus a network into evaluable
statistics, with parameter maps for curved blocks."""

from __future__ import annotations

import warnings

import numpy as np

from .errors import ModelError
from .formula import Binary, Call, FormulaNode, Ident, Num, Str, Unary, parse_text
from .modelspec import (
    ModelSpec, TermSpec, _expand_product, _flatten_plus, default_options,
    parse_model,
)
from .network import DenseNet, Network
from .operators import OPERATORS, CurvedBlock, make_interaction
from .terms import Term, TermContext, build_plain_term


class ConcatTerm(Term):
    """Several realized terms treated as one block of statistics."""

    def __init__(self, parts: list[Term]):
        self.parts = parts
        self.name = "+".join(t.name for t in parts)
        self.stat_names = [n for t in parts for n in t.stat_names]
        self.dyad_independent = all(t.dyad_independent for t in parts)

    def stats(self, dense: DenseNet) -> np.ndarray:
        return np.concatenate([t.stats(dense) for t in self.parts])

    def change(self, dense: DenseNet, i: int, j: int, new: float) -> np.ndarray:
        return np.concatenate([t.change(dense, i, j, new) for t in self.parts])

    def dyadwise(self):
        return [s for t in self.parts for s in t.dyadwise()]


def _realize_single(ctx: TermContext, node) -> list:
    if isinstance(node, (Call, Ident)):
        name = node.name
        if name in OPERATORS:
            call = node if isinstance(node, Call) else Call(name, ())
            return OPERATORS[name](ctx, call, realize_rhs)
    return build_plain_term(ctx, node)


def _realize_factors(ctx: TermContext, factors: tuple) -> list:
    if len(factors) == 1:
        return _realize_single(ctx, factors[0])
    ops = []
    for f in factors:
        parts = _realize_single(ctx, f)
        for p in parts:
            if isinstance(p, CurvedBlock):
                raise ModelError("interactions involving curved terms are not supported")
        ops.append(parts[0] if len(parts) == 1 else ConcatTerm(parts))
    return [make_interaction(ctx, ops)]


def realize_rhs(ctx: TermContext, node) -> list:
    """Realize the right-hand side of a formula: '+' separated terms with
    ':' and '*' interaction expansion."""
    out = []
    for item in _flatten_plus(node):
        for factors in _expand_product(item):
            out.extend(_realize_factors(ctx, factors))
    return out


class Model:
    """Realized model: ordered statistic blocks plus the eta(theta) map.

    Linear blocks contribute identity parameters; curved blocks contribute
    their own parameters mapped onto that block's canonical statistics.
    """

    def __init__(self, net: Network, spec: ModelSpec, valued: bool,
                 reference_name: str = "Bernoulli"):
        self.net = net
        self.spec = spec
        self.valued = valued
        self.reference_name = reference_name
        self.options = dict(spec.options)
        ctx = TermContext(net, valued, self.options, reference_name)
        self.parts = []
        for ts in spec.terms:
            self.parts.extend(_realize_factors(ctx, ts.factors))

        self.terms: list[Term] = []
        self.stat_names: list[str] = []
        self.param_names: list[str] = []
        self._layout = []           # (kind, part, stat_slice, param_slice)
        s0 = p0 = 0
        for part in self.parts:
            if isinstance(part, CurvedBlock):
                ns, nq = part.nstat, part.nparam
                self.terms.extend(part.terms)
                self.stat_names.extend(part.stat_names)
                self.param_names.extend(part.param_names)
                self._layout.append(("curved", part, slice(s0, s0 + ns),
                                     slice(p0, p0 + nq)))
                s0 += ns
                p0 += nq
            else:
                ns = part.nstat
                self.terms.append(part)
                self.stat_names.extend(part.stat_names)
                self.param_names.extend(part.stat_names)
                self._layout.append(("linear", part, slice(s0, s0 + ns),
                                     slice(p0, p0 + ns)))
                s0 += ns
                p0 += ns
        self.nstat = s0
        self.nparam = p0
        self.curved = any(kind == "curved" for kind, *_ in self._layout)
        self.dyad_independent = all(t.dyad_independent for t in self.terms)

    # -- parameter map ---------------------------------------------------

    def eta(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, float)
        if theta.shape != (self.nparam,):
            raise ModelError(f"expected {self.nparam} parameters, got {theta.shape}")
        out = np.empty(self.nstat)
        for kind, part, ss, ps in self._layout:
            out[ss] = theta[ps] if kind == "linear" else part.eta(theta[ps])
        return out

    def eta_grad(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, float)
        g = np.zeros((self.nparam, self.nstat))
        for kind, part, ss, ps in self._layout:
            if kind == "linear":
                g[ps, ss] = np.eye(ss.stop - ss.start)
            else:
                g[ps, ss] = part.grad(theta[ps])
        return g

    def theta_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.full(self.nparam, -np.inf)
        hi = np.full(self.nparam, np.inf)
        for kind, part, _, ps in self._layout:
            if kind == "curved":
                lo[ps] = part.minpar
                hi[ps] = part.maxpar
        return lo, hi

    # -- evaluation --------------------------------------------------------

    def stats(self, dense: DenseNet) -> np.ndarray:
        return np.concatenate([t.stats(dense) for t in self.terms]) \
            if self.terms else np.zeros(0)

    def change(self, dense: DenseNet, i: int, j: int, new: float) -> np.ndarray:
        return np.concatenate([t.change(dense, i, j, new) for t in self.terms])

    def dense(self) -> DenseNet:
        if self.net.missing:
            warnings.warn("network has unobserved dyads; treating them as 0 "
                          "for statistic evaluation", stacklevel=2)
        return self.net.to_dense()


# -- response selection --------------------------------------------------------

_CMP_FNS = {
    ">=": lambda v, c: v >= c, "<=": lambda v, c: v <= c,
    ">": lambda v, c: v > c, "<": lambda v, c: v < c,
    "==": lambda v, c: v == c, "!=": lambda v, c: v != c,
}


def apply_response(net: Network, response) -> tuple[Network, bool]:
    """Interpret the response selector.

    None keeps the network as a binary model (values must be 0/1); a plain
    name models the stored edge values; a comparison produces the 0/1
    indicator network of the predicate, modeled as binary.
    """
    if response is None:
        if not net.is_binary():
            raise ModelError(
                "network has non-binary edge values; give a response "
                "(value name or comparison) to model them")
        return net, False

    node = parse_text(response) if isinstance(response, str) else response
    if isinstance(node, FormulaNode):
        node = node.rhs
    if isinstance(node, (Ident, Str)):
        return net, True
    if isinstance(node, Binary) and node.op in _CMP_FNS:
        if not isinstance(node.left, (Ident, Str)):
            raise ModelError("response comparison must name the edge value")
        cut = node.right
        if isinstance(cut, Unary) and cut.op == "-" and isinstance(cut.operand, Num):
            c = -float(cut.operand.value)
        elif isinstance(cut, Num):
            c = float(cut.value)
        else:
            raise ModelError("response comparison needs a numeric cutoff")
        fn = _CMP_FNS[node.op]
        out = Network(n=net.n, directed=net.directed, bipartite=net.bipartite)
        out.vattrs = net.vattrs
        out.missing = set(net.missing)
        for (t, h), v in net.edges.items():
            if fn(v, c):
                out.edges[(t, h)] = 1.0
        return out, False
    raise ModelError("response must be a value name or a comparison like w>=3")


def build_model(net: Network, formula: str, response=None, reference: str = "Bernoulli",
                options: dict | None = None) -> Model:
    """Parse and realize a model formula against a network."""
    net2, valued = apply_response(net, response)
    spec = parse_model(formula, options)
    refname = reference
    if isinstance(refname, str):
        refname = refname.lstrip("~ ").split("(")[0].strip()
    return Model(net2, spec, valued, refname)


def summary_stats(net: Network, formula: str, response=None,
                  options: dict | None = None) -> tuple[list[str], np.ndarray]:
    """Observed statistics of a formula on a network."""
    m = build_model(net, formula, response=response, options=options)
    return m.stat_names, m.stats(m.dense())
