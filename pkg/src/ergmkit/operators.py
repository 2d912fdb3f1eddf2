"""Operators that build new model terms out of other terms.

Each builder receives the term catalog context, the parsed operator call,
and a `realize` callback that turns an inner formula into realized terms.
Operators that transform the network (F, Symmetrize, S, B) realize their
inner terms against a template with the transformed shape, so nesting
composes left to right as written.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import replace

import numpy as np

from .errors import ModelError
from .formula import (
    Binary, Bool, Call, FormulaNode, Ident, Null, Num, Str, Unary, deparse,
)
from .modelspec import _flatten_values, _indices_from_nodes, _parse_matrix, eval_attr
from .network import DenseNet, Network
from .terms import (
    CMP_EQ, CMP_GE, CMP_GT, CMP_LE, CMP_LT, CMP_NE, CMP_NEGATE, CMP_VALUE,
    U_ATLEAST, U_ATMOST, U_EQUALTO, U_GREATER, U_ININTERVAL, U_NONZERO,
    U_SMALLER, U_VAL, DyadFactor, DyadStat, DyadwiseTerm, Term, TermContext,
    _bool, _num, _str, apply_u, bind_args,
)

_CMP_BY_OP = {"==": CMP_EQ, "!=": CMP_NE, "<": CMP_LT,
              "<=": CMP_LE, ">": CMP_GT, ">=": CMP_GE}


def _inner_formula(node, op: str):
    if isinstance(node, FormulaNode):
        if node.lhs is not None:
            raise ModelError(f"{op}: inner formula must be one-sided")
        return node.rhs
    raise ModelError(f"{op}: expected a formula argument")


def _realize_terms(realize, ctx, node, op: str) -> list[Term]:
    parts = realize(ctx, node)
    for t in parts:
        if not isinstance(t, Term):
            raise ModelError(f"{op} cannot wrap curved parameterizations")
    return parts


def _shape_mask(net) -> np.ndarray:
    return DenseNet(np.zeros((net.n, net.n)), net.directed, net.bipartite).canonical_mask()


_INHERIT = object()


def _clone_shape(net, directed=None, bipartite=_INHERIT, n=None, vattrs=None) -> Network:
    out = Network(
        n=net.n if n is None else n,
        directed=net.directed if directed is None else directed,
        bipartite=net.bipartite if bipartite is _INHERIT else bipartite,
    )
    out.vattrs = net.vattrs if vattrs is None else vattrs
    return out


# -- F: evaluate inner terms on an edge-filtered network -----------------------

class FilteredTerm(Term):
    def __init__(self, inner: list[Term], fstat: DyadStat, cmp: int, rhs: float,
                 label: str):
        self.inner = inner
        self.fstat = fstat
        self.cmp = cmp
        self.rhs = rhs
        self.name = f"F({label})"
        self.stat_names = [f"F({label})~{n}" for t in inner for n in t.stat_names]
        self.dyad_independent = all(t.dyad_independent for t in inner)

    def _pred(self, i: int, j: int, v: float) -> bool:
        from .terms import _cmp_apply
        return bool(_cmp_apply(self.fstat.contrib(i, j, v), self.cmp, self.rhs))

    def _filtered(self, dense: DenseNet) -> DenseNet:
        from .terms import _cmp_apply
        keep = None
        for f in self.fstat.factors:
            raw = f.X * apply_u(dense.y, f.u, f.p)
            part = raw if f.cmp == CMP_VALUE else _cmp_apply(raw, f.cmp, f.rhs)
            keep = part if keep is None else keep * part
        mask = _cmp_apply(keep, self.cmp, self.rhs)
        return DenseNet(dense.y * mask, dense.directed, dense.bipartite)

    def stats(self, dense: DenseNet) -> np.ndarray:
        fd = self._filtered(dense)
        return np.concatenate([t.stats(fd) for t in self.inner])

    def change(self, dense: DenseNet, i: int, j: int, new: float) -> np.ndarray:
        old = float(dense.y[i, j])
        fold = old if self._pred(i, j, old) else 0.0
        fnew = float(new) if self._pred(i, j, new) else 0.0
        if fold == fnew:
            return np.zeros(self.nstat)
        fd = self._filtered(dense)
        return np.concatenate([t.change(fd, i, j, fnew) for t in self.inner])

    def dyadwise(self) -> list[DyadStat]:
        if len(self.fstat.factors) != 1 or self.fstat.factors[0].cmp != CMP_VALUE:
            raise ModelError("filter is not reducible to one dyadwise factor")
        ff = self.fstat.factors[0]
        pred = DyadFactor(ff.X, ff.u, ff.p, self.cmp, self.rhs)
        out = []
        for t in self.inner:
            for s in t.dyadwise():
                out.append(DyadStat(f"{self.name}~{s.name}", factors=s.factors + [pred]))
        return out


def build_F(ctx: TermContext, call: Call, realize) -> list[Term]:
    args = bind_args(call, ["formula", "filter"], required=2)
    inner_node = _inner_formula(args["formula"], "F")
    fnode = args["filter"]
    if not isinstance(fnode, FormulaNode) or fnode.lhs is not None:
        raise ModelError("F: filter must be a one-sided formula")
    label = deparse(fnode.rhs)

    expr = fnode.rhs
    negate = False
    while isinstance(expr, Unary) and expr.op == "!":
        negate = not negate
        expr = expr.operand
    cmp, rhs = CMP_NE, 0.0
    if isinstance(expr, Binary) and expr.op in _CMP_BY_OP:
        cmp = _CMP_BY_OP[expr.op]
        rhs = _num(expr.right, "F filter comparison")
        expr = expr.left
    if negate:
        cmp = CMP_NEGATE[cmp]

    fterms = _realize_terms(realize, ctx, expr, "F")
    if len(fterms) != 1 or fterms[0].nstat != 1:
        raise ModelError("F: filter must define exactly one statistic")
    if not fterms[0].dyad_independent:
        raise ModelError("F: filter must be dyad-independent")
    fstat = fterms[0].dyadwise()[0]

    inner = _realize_terms(realize, ctx, inner_node, "F")
    return [FilteredTerm(inner, fstat, cmp, rhs, label)]


# -- Symmetrize: evaluate inner terms on a symmetrized network -----------------

_SYM_RULES = ("weak", "strong", "upper", "lower")


class SymmetrizedTerm(Term):
    def __init__(self, inner: list[Term], rule: str):
        self.inner = inner
        self.rule = rule
        self.name = f"Symmetrize({rule})"
        self.stat_names = [f"Symmetrize({rule})~{n}" for t in inner for n in t.stat_names]
        self.dyad_independent = False

    def _sym_value(self, y: np.ndarray, u: int, v: int) -> float:
        a, b = float(y[u, v]), float(y[v, u])
        if self.rule == "weak":
            return max(a, b)
        if self.rule == "strong":
            return min(a, b)
        return a if self.rule == "upper" else b

    def _sym_dense(self, dense: DenseNet) -> DenseNet:
        y = dense.y
        if self.rule == "weak":
            s = np.maximum(y, y.T)
        elif self.rule == "strong":
            s = np.minimum(y, y.T)
        else:
            upper = np.triu(y, 1)
            lower = np.tril(y, -1).T
            s = upper if self.rule == "upper" else lower
            s = s + s.T
        return DenseNet(s, directed=False, bipartite=None)

    def stats(self, dense: DenseNet) -> np.ndarray:
        sd = self._sym_dense(dense)
        return np.concatenate([t.stats(sd) for t in self.inner])

    def change(self, dense: DenseNet, i: int, j: int, new: float) -> np.ndarray:
        u, v = (i, j) if i < j else (j, i)
        y = dense.y
        before = self._sym_value(y, u, v)
        old = y[i, j]
        dense.set(i, j, new)
        after = self._sym_value(y, u, v)
        dense.set(i, j, old)
        if before == after:
            return np.zeros(self.nstat)
        sd = self._sym_dense(dense)
        return np.concatenate([t.change(sd, u, v, after) for t in self.inner])


def build_symmetrize(ctx: TermContext, call: Call, realize) -> list[Term]:
    args = bind_args(call, ["formula", "rule"], required=1)
    if not ctx.net.directed:
        raise ModelError("Symmetrize needs a directed network")
    rule = _str(args.get("rule"), "Symmetrize rule", "weak")
    if rule not in _SYM_RULES:
        raise ModelError(f"Symmetrize rule must be one of {_SYM_RULES}")
    inner_node = _inner_formula(args["formula"], "Symmetrize")
    sub_ctx = replace(ctx, net=_clone_shape(ctx.net, directed=False, bipartite=None))
    inner = _realize_terms(realize, sub_ctx, inner_node, "Symmetrize")
    return [SymmetrizedTerm(inner, rule)]


# -- S: evaluate inner terms on an induced subgraph ----------------------------

def _selector_vertices(net, node) -> list[int]:
    """Resolve one side of a subgraph selector to 0-based vertex indices."""
    if isinstance(node, (Num, Unary)) or (
            isinstance(node, Call) and node.name == "c"
            and all(isinstance(a.value, (Num, Unary)) for a in node.args)):
        vals = _flatten_values(node, None)
        idx = _indices_from_nodes(vals, net.n, "S selector")
        return [int(i) for i in idx]
    attr = eval_attr(net, node, warn_unnamed=False)
    col = attr.column()
    if attr.kind not in ("boolean", "numeric"):
        raise ModelError("S selector must be boolean or an index vector")
    return [i for i in range(net.n) if float(col[i]) != 0.0]


class SubgraphTerm(Term):
    def __init__(self, inner: list[Term], lhs: list[int], rhs: list[int] | None,
                 label: str, parent_directed: bool, sub_bipartite=None):
        self.inner = inner
        self.lhs = lhs
        self.rhs = rhs
        self.parent_directed = parent_directed
        self.sub_bipartite = sub_bipartite
        self.name = f"S({label})"
        self.stat_names = [f"S({label})~{n}" for t in inner for n in t.stat_names]
        self.dyad_independent = all(t.dyad_independent for t in inner)
        self._lpos = {v: k for k, v in enumerate(lhs)}
        self._rpos = None if rhs is None else {v: k for k, v in enumerate(rhs)}

    def _sub_dense(self, dense: DenseNet) -> DenseNet:
        if self.rhs is None:
            ysub = dense.y[np.ix_(self.lhs, self.lhs)].copy()
            return DenseNet(ysub, dense.directed, self.sub_bipartite)
        nl, nr = len(self.lhs), len(self.rhs)
        block = dense.y[np.ix_(self.lhs, self.rhs)]
        ysub = np.zeros((nl + nr, nl + nr))
        ysub[:nl, nl:] = block
        ysub[nl:, :nl] = block.T
        return DenseNet(ysub, directed=False, bipartite=nl)

    def _map_dyad(self, i: int, j: int):
        if self.rhs is None:
            si, sj = self._lpos.get(i), self._lpos.get(j)
            if si is None or sj is None:
                return None
            if not self.parent_directed and si > sj:
                si, sj = sj, si
            return si, sj
        nl = len(self.lhs)
        si, sj = self._lpos.get(i), self._rpos.get(j)
        if si is not None and sj is not None:
            return si, nl + sj
        if not self.parent_directed:
            si, sj = self._lpos.get(j), self._rpos.get(i)
            if si is not None and sj is not None:
                return si, nl + sj
        return None

    def stats(self, dense: DenseNet) -> np.ndarray:
        sd = self._sub_dense(dense)
        return np.concatenate([t.stats(sd) for t in self.inner])

    def change(self, dense: DenseNet, i: int, j: int, new: float) -> np.ndarray:
        at = self._map_dyad(i, j)
        if at is None:
            return np.zeros(self.nstat)
        sd = self._sub_dense(dense)
        return np.concatenate([t.change(sd, at[0], at[1], new) for t in self.inner])


def build_S(ctx: TermContext, call: Call, realize) -> list[Term]:
    args = bind_args(call, ["formula", "selector"], required=2)
    inner_node = _inner_formula(args["formula"], "S")
    sel = args["selector"]
    if isinstance(sel, FormulaNode) and sel.lhs is not None:
        lhs_node, rhs_node = sel.lhs, sel.rhs
        label = f"({deparse(lhs_node)})~({deparse(rhs_node)})"
    else:
        lhs_node = sel.rhs if isinstance(sel, FormulaNode) else sel
        rhs_node = None
        label = f"({deparse(lhs_node)})"
    lhs = _selector_vertices(ctx.net, lhs_node)
    if not lhs:
        raise ModelError("S: empty vertex selection")

    def slice_attrs(idx: list[int]) -> dict:
        out = {}
        for nm, colattr in ctx.net.vattrs.items():
            out[nm] = replace(colattr, values=[colattr.values[i] for i in idx])
        return out

    def same_set(idx: list[int]) -> list:
        bip = None
        if ctx.net.bipartite is not None:
            bip = sum(1 for v in idx if v < ctx.net.bipartite)
        sub_net = _clone_shape(ctx.net, n=len(idx), bipartite=bip,
                               vattrs=slice_attrs(idx))
        sub_ctx = replace(ctx, net=sub_net)
        inner = _realize_terms(realize, sub_ctx, inner_node, "S")
        return [SubgraphTerm(inner, idx, None, label, ctx.net.directed, bip)]

    if rhs_node is None:
        return same_set(lhs)

    rhs = _selector_vertices(ctx.net, rhs_node)
    if not rhs:
        raise ModelError("S: empty vertex selection")
    if set(lhs) & set(rhs):
        if set(lhs) == set(rhs):
            return same_set(lhs)
        raise ModelError("S: two-sided selectors must be equal or disjoint")
    both = lhs + rhs
    sub_net = _clone_shape(ctx.net, n=len(both), directed=False,
                           bipartite=len(lhs), vattrs=slice_attrs(both))
    sub_ctx = replace(ctx, net=sub_net)
    inner = _realize_terms(realize, sub_ctx, inner_node, "S")
    return [SubgraphTerm(inner, lhs, rhs, label, ctx.net.directed)]


# -- Sum / Log / Exp / Prod ----------------------------------------------------

def _weight_matrix(node, p: int, op: str) -> np.ndarray:
    if node is None:
        return np.eye(p)
    if isinstance(node, (Num, Unary)):
        return float(_num(node, f"{op} weight")) * np.eye(p)
    if isinstance(node, Str):
        if node.value == "sum":
            return np.ones((1, p))
        if node.value == "mean":
            return np.full((1, p), 1.0 / p)
        raise ModelError(f"{op}: unknown weight keyword {node.value!r}")
    if isinstance(node, Call) and node.name == "c":
        vals = [_num(a.value, f"{op} weight") for a in node.args]
        if len(vals) == 1:
            return vals[0] * np.eye(p)
        if len(vals) != p:
            raise ModelError(f"{op}: weight vector has {len(vals)} entries for {p} statistics")
        return np.diag(vals)
    if isinstance(node, Call) and node.name == "cbind":
        cols = []
        for a in node.args:
            v = a.value
            if isinstance(v, Call) and v.name == "c":
                cols.append([_num(x.value, f"{op} weight") for x in v.args])
            else:
                cols.append([_num(v, f"{op} weight")])
        nrow = max(len(c) for c in cols)
        for c in cols:
            if len(c) not in (1, nrow):
                raise ModelError(f"{op}: ragged cbind weights")
        mat = np.array([[c[0] if len(c) == 1 else c[r] for c in cols]
                        for r in range(nrow)])
        if mat.shape[1] != p:
            raise ModelError(f"{op}: weight matrix has {mat.shape[1]} columns for {p} statistics")
        return mat
    if isinstance(node, Call) and node.name == "matrix":
        grid, nrow, ncol = _parse_matrix(node)
        if ncol != p:
            raise ModelError(f"{op}: weight matrix has {ncol} columns for {p} statistics")
        return np.array([[float(grid[r][c]) for c in range(ncol)] for r in range(nrow)])
    raise ModelError(f"{op}: cannot interpret weights {deparse(node)!r}")


class SumTerm(Term):
    def __init__(self, blocks: list[tuple[np.ndarray, list[Term]]], labels: list[str]):
        self.blocks = blocks
        self.stat_names = [f"Sum~{lab}" for lab in labels]
        self.name = self.stat_names[0] if len(labels) == 1 else "Sum"
        self.dyad_independent = all(t.dyad_independent for _, ts in blocks for t in ts)

    def stats(self, dense: DenseNet) -> np.ndarray:
        out = np.zeros(self.nstat)
        for A, ts in self.blocks:
            g = np.concatenate([t.stats(dense) for t in ts])
            out += A @ g
        return out

    def change(self, dense: DenseNet, i: int, j: int, new: float) -> np.ndarray:
        out = np.zeros(self.nstat)
        for A, ts in self.blocks:
            d = np.concatenate([t.change(dense, i, j, new) for t in ts])
            out += A @ d
        return out


def _sum_blocks(ctx, call, realize, op: str):
    args = bind_args(call, ["formula", "label"], required=1)
    fnode = args["formula"]
    if isinstance(fnode, Call) and fnode.name == "list":
        formulas = [a.value for a in fnode.args]
    else:
        formulas = [fnode]
    blocks = []
    q = None
    for f in formulas:
        if not isinstance(f, FormulaNode):
            raise ModelError(f"{op}: expected formulas")
        terms = _realize_terms(realize, ctx, f.rhs, op)
        p = sum(t.nstat for t in terms)
        A = _weight_matrix(f.lhs, p, op)
        if q is None:
            q = A.shape[0]
        elif A.shape[0] != q:
            raise ModelError(f"{op}: weight row counts disagree across formulas")
        blocks.append((A, terms))
    label_node = args.get("label")
    if label_node is None:
        labels = ["stat"] if q == 1 else [f"stat{k + 1}" for k in range(q)]
    elif isinstance(label_node, Str):
        labels = [label_node.value] if q == 1 else \
            [f"{label_node.value}{k + 1}" for k in range(q)]
    elif isinstance(label_node, Call) and label_node.name == "c":
        labels = [_str(a.value, f"{op} label") for a in label_node.args]
        if len(labels) != q:
            raise ModelError(f"{op}: {len(labels)} labels for {q} statistics")
    else:
        raise ModelError(f"{op}: label must be a string or c() of strings")
    return blocks, labels


def build_sum(ctx: TermContext, call: Call, realize) -> list[Term]:
    blocks, labels = _sum_blocks(ctx, call, realize, "Sum")
    return [SumTerm(blocks, labels)]


class LogTerm(Term):
    def __init__(self, inner: list[Term], log: bool):
        self.inner = inner
        self.log = log
        word = "Log" if log else "Exp"
        self.name = word
        self.stat_names = [f"{word}~{n}" for t in inner for n in t.stat_names]
        self.dyad_independent = False

    def _fn(self, g: np.ndarray) -> np.ndarray:
        if self.log:
            if np.any(g <= 0):
                raise ModelError("Log/Prod needs strictly positive inner statistics")
            return np.log(g)
        return np.exp(g)

    def stats(self, dense: DenseNet) -> np.ndarray:
        g = np.concatenate([t.stats(dense) for t in self.inner])
        return self._fn(g)

    def change(self, dense: DenseNet, i: int, j: int, new: float) -> np.ndarray:
        g = np.concatenate([t.stats(dense) for t in self.inner])
        d = np.concatenate([t.change(dense, i, j, new) for t in self.inner])
        return self._fn(g + d) - self._fn(g)


def build_log(ctx: TermContext, call: Call, realize) -> list[Term]:
    args = bind_args(call, ["formula"], required=1)
    inner = _realize_terms(realize, ctx, _inner_formula(args["formula"], "Log"), "Log")
    return [LogTerm(inner, log=True)]


def build_exp(ctx: TermContext, call: Call, realize) -> list[Term]:
    args = bind_args(call, ["formula"], required=1)
    inner = _realize_terms(realize, ctx, _inner_formula(args["formula"], "Exp"), "Exp")
    return [LogTerm(inner, log=False)]


def build_prod(ctx: TermContext, call: Call, realize) -> list[Term]:
    def realize_logged(sub_ctx, node):
        parts = realize(sub_ctx, node)
        for t in parts:
            if not isinstance(t, Term):
                raise ModelError("Prod cannot wrap curved parameterizations")
        return [LogTerm(parts, log=True)]

    blocks, labels = _sum_blocks(ctx, call, realize_logged, "Prod")
    return [LogTerm([SumTerm(blocks, labels)], log=False)]


# -- B: binary terms on a binarized network ------------------------------------

_B_PREDICATES = {
    "nonzero": (U_NONZERO, 0),
    "atleast": (U_ATLEAST, 1),
    "atmost": (U_ATMOST, 1),
    "greaterthan": (U_GREATER, 1),
    "smallerthan": (U_SMALLER, 1),
    "lessthan": (U_SMALLER, 1),
    "equalto": (U_EQUALTO, 2),
}


def _b_predicate(node) -> tuple[int, tuple, str]:
    """Parse the binarization spec into a value transform and a label."""
    if isinstance(node, Str):
        if node.value == "sum":
            return U_VAL, (0.0, 0.0, 0.0), "sum"
        if node.value == "nonzero":
            return U_NONZERO, (0.0, 0.0, 0.0), "nonzero"
        raise ModelError(f"B: unknown form {node.value!r}")
    if isinstance(node, FormulaNode) and node.lhs is None:
        expr = node.rhs
        label = deparse(expr)
        call = expr if isinstance(expr, Call) else Call(expr.name, ()) \
            if isinstance(expr, Ident) else None
        if call is None or call.name not in _B_PREDICATES and call.name != "ininterval":
            raise ModelError(f"B: ineligible predicate {label!r}")
        if call.name == "ininterval":
            from .terms import _open_flags
            args = bind_args(call, ["lower", "upper", "open"])
            lo = _num(args["lower"], "lower") if "lower" in args else -math.inf
            hi = _num(args["upper"], "upper") if "upper" in args else math.inf
            return U_ININTERVAL, (lo, hi, _open_flags(args.get("open"))), label
        u, nargs = _B_PREDICATES[call.name]
        if call.name == "equalto":
            args = bind_args(call, ["value", "tolerance"])
            v = _num(args["value"], "value") if "value" in args else 0.0
            tol = _num(args["tolerance"], "tolerance") if "tolerance" in args else 0.0
            return u, (v, tol, 0.0), label
        args = bind_args(call, ["threshold"])
        c = _num(args["threshold"], "threshold") if "threshold" in args else 0.0
        return u, (c, 0.0, 0.0), label
    raise ModelError("B: form must be \"sum\", \"nonzero\", or a one-sided predicate formula")


class BinarizedTerm(Term):
    """A dyad-dependent binary term evaluated on predicate-binarized values."""

    def __init__(self, inner: Term, u: int, p: tuple, label: str):
        self.inner = inner
        self.u = u
        self.p = p
        self.name = f"B({label})"
        self.stat_names = [f"B({label})~{n}" for n in inner.stat_names]
        self.dyad_independent = inner.dyad_independent

    def _bdense(self, dense: DenseNet) -> DenseNet:
        b = apply_u(dense.y, self.u, self.p) * 1.0
        np.fill_diagonal(b, 0.0)
        return DenseNet(b, dense.directed, dense.bipartite)

    def stats(self, dense: DenseNet) -> np.ndarray:
        return self.inner.stats(self._bdense(dense))

    def change(self, dense: DenseNet, i: int, j: int, new: float) -> np.ndarray:
        bold = float(apply_u(float(dense.y[i, j]), self.u, self.p))
        bnew = float(apply_u(float(new), self.u, self.p))
        if bold == bnew:
            return np.zeros(self.nstat)
        return self.inner.change(self._bdense(dense), i, j, bnew)


def build_B(ctx: TermContext, call: Call, realize) -> list[Term]:
    args = bind_args(call, ["formula", "form"], required=2)
    inner_node = _inner_formula(args["formula"], "B")
    u, p, label = _b_predicate(args["form"])
    is_sum = isinstance(args["form"], Str) and args["form"].value == "sum"
    sub_ctx = replace(ctx, valued=False)
    inner = _realize_terms(realize, sub_ctx, inner_node, "B")

    mask = _shape_mask(ctx.net)
    out: list[Term] = []
    for t in inner:
        if t.dyad_independent:
            try:
                dstats = t.dyadwise()
            except ModelError:
                dstats = None
        else:
            dstats = None
        if dstats is None:
            if is_sum:
                raise ModelError("B: form=\"sum\" needs dyad-independent terms")
            out.append(BinarizedTerm(t, u, p, label))
            continue
        stats = []
        offsets = []
        for s in dstats:
            c1 = s.contrib_grid(1.0)
            c0 = s.contrib_grid(0.0)
            name = f"B({label})~{s.name}"
            if is_sum:
                stats.append(DyadStat(name, c1 - c0, U_VAL))
                offsets.append(0.0)
            else:
                stats.append(DyadStat(name, factors=[DyadFactor(c1 - c0, u, p)]))
                offsets.append(float(np.sum(c0[mask])))
        out.append(DyadwiseTerm(f"B({label})~{t.name}", stats, offsets))
    return out


# -- interactions --------------------------------------------------------------

class InteractionTerm(Term):
    """Product interaction: the change statistic is the product of the
    operand change statistics, with the right operand varying fastest in
    the statistic order. Statistics are evaluated by accumulating changes
    while building the network up dyad by dyad."""

    def __init__(self, ops: list[Term]):
        self.ops = ops
        names = [""]
        for t in ops:
            names = [f"{a}:{b}" if a else b for a in names for b in t.stat_names]
        self.stat_names = names
        self.name = ":".join(t.name for t in ops)
        self.dyad_independent = all(t.dyad_independent for t in ops)

    def change(self, dense: DenseNet, i: int, j: int, new: float) -> np.ndarray:
        out = np.ones(1)
        for t in self.ops:
            d = t.change(dense, i, j, new)
            out = np.outer(out, d).ravel()
        return out

    def stats(self, dense: DenseNet) -> np.ndarray:
        shape = DenseNet(np.zeros_like(dense.y), dense.directed, dense.bipartite)
        mask = shape.canonical_mask()
        total = np.zeros(self.nstat)
        rows, cols = np.nonzero(mask & (dense.y != 0))
        order = np.lexsort((cols, rows))
        for k in order:
            i, j = int(rows[k]), int(cols[k])
            v = float(dense.y[i, j])
            total += self.change(shape, i, j, v)
            shape.set(i, j, v)
        return total

    def dyadwise(self) -> list[DyadStat]:
        parts = []
        for t in self.ops:
            ds = t.dyadwise()
            for s in ds:
                if np.any(s.contrib_grid(0.0) != 0.0):
                    raise ModelError(
                        "interaction operands must contribute zero on empty dyads")
            parts.append(ds)
        out = [DyadStat("", factors=[])]
        for ds in parts:
            out = [DyadStat(f"{a.name}:{s.name}" if a.name else s.name,
                            factors=a.factors + s.factors)
                   for a in out for s in ds]
        return out


def make_interaction(ctx: TermContext, ops: list[Term]) -> Term:
    policy = str(ctx.options.get("interact.dependent", "error"))
    dep = [t.name for t in ops if not t.dyad_independent]
    if dep:
        if policy == "error":
            raise ModelError(
                f"interaction with dyad-dependent terms {dep}; set "
                "interact.dependent to \"message\", \"warning\", or \"silent\"")
        if policy in ("message", "warning"):
            warnings.warn(
                f"interaction involves dyad-dependent terms {dep}; statistics "
                "are defined through their change statistics", stacklevel=2)
        elif policy != "silent":
            raise ModelError(f"unknown interact.dependent policy {policy!r}")
    return InteractionTerm(ops)


# -- Parametrize: curved parameter maps ----------------------------------------

def _param_vec(node, q: int, what: str, default: float) -> np.ndarray:
    if node is None:
        return np.full(q, default)
    if isinstance(node, (Num, Unary)):
        return np.full(q, _num(node, what))
    if isinstance(node, Call) and node.name == "c":
        vals = [_num(a.value, what) for a in node.args]
        if len(vals) == 1:
            return np.full(q, vals[0])
        if len(vals) != q:
            raise ModelError(f"{what}: expected {q} entries")
        return np.array(vals, float)
    raise ModelError(f"{what}: expected a number or c() of numbers")


def _eval_param_expr(node, env: dict) -> np.ndarray:
    if isinstance(node, Num):
        return np.array([float(node.value)])
    if isinstance(node, Ident):
        if node.name in env:
            v = env[node.name]
            return np.atleast_1d(np.asarray(v, float))
        raise ModelError(f"unknown name {node.name!r} in parameter map")
    if isinstance(node, Unary) and node.op == "-":
        return -_eval_param_expr(node.operand, env)
    if isinstance(node, Binary):
        a = _eval_param_expr(node.left, env)
        b = _eval_param_expr(node.right, env)
        if len(a) != len(b):
            if len(a) == 1:
                a = np.repeat(a, len(b))
            elif len(b) == 1:
                b = np.repeat(b, len(a))
            else:
                raise ModelError("parameter map: length mismatch")
        ops = {"+": np.add, "-": np.subtract, "*": np.multiply,
               "/": np.divide, "^": np.power}
        if node.op not in ops:
            raise ModelError(f"parameter map: unsupported operator {node.op!r}")
        return ops[node.op](a, b)
    if isinstance(node, Call):
        if node.name == "c":
            return np.concatenate([_eval_param_expr(a.value, env) for a in node.args])
        if node.name == "rep" and len(node.args) == 2:
            v = _eval_param_expr(node.args[0].value, env)
            k = int(_eval_param_expr(node.args[1].value, env)[0])
            return np.tile(v, k)
        fns = {"exp": np.exp, "log": np.log, "sqrt": np.sqrt, "abs": np.abs}
        if node.name in fns and len(node.args) == 1:
            return fns[node.name](_eval_param_expr(node.args[0].value, env))
        raise ModelError(f"parameter map: unsupported call {node.name!r}")
    raise ModelError("parameter map: unsupported expression")


class CurvedBlock:
    """A parameter map eta(theta) wrapped around realized inner terms."""

    def __init__(self, terms: list[Term], param_names: list[str], map_kind: str,
                 map_node, gradient: str | None, minpar: np.ndarray,
                 maxpar: np.ndarray, cov):
        self.terms = terms
        self.param_names = param_names
        self.map_kind = map_kind
        self.map_node = map_node
        self.gradient = gradient
        self.minpar = minpar
        self.maxpar = maxpar
        self.cov = cov
        self.nstat = sum(t.nstat for t in terms)
        self.stat_names = [n for t in terms for n in t.stat_names]

    @property
    def nparam(self) -> int:
        return len(self.param_names)

    def _eta_raw(self, theta: np.ndarray) -> np.ndarray:
        if self.map_kind == "rep":
            reps = int(np.ceil(self.nstat / len(theta)))
            return np.tile(theta, reps)[: self.nstat]
        env = {"x": theta, "n": float(self.nstat)}
        if self.cov is not None:
            env["cov"] = self.cov
        out = _eval_param_expr(self.map_node, env)
        if len(out) != self.nstat:
            raise ModelError(
                f"parameter map produced {len(out)} values for {self.nstat} statistics")
        return out

    def eta(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, float)
        if theta.shape != (self.nparam,):
            raise ModelError("parameter map: dimension mismatch")
        if np.any(theta < self.minpar - 1e-12) or np.any(theta > self.maxpar + 1e-12):
            raise ModelError("parameter outside its box constraints")
        return self._eta_raw(theta)

    def grad(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, float)
        q = self.nparam
        if self.map_kind == "rep" or self.gradient == "linear":
            base = self._eta_raw(np.zeros(q))
            g = np.empty((q, self.nstat))
            for k in range(q):
                e = np.zeros(q)
                e[k] = 1.0
                g[k] = self._eta_raw(e) - base
            return g
        g = np.empty((q, self.nstat))
        for k in range(q):
            h = 1e-6 * max(1.0, abs(float(theta[k])))
            up = theta.copy()
            dn = theta.copy()
            up[k] += h
            dn[k] -= h
            g[k] = (self._eta_raw(up) - self._eta_raw(dn)) / (2.0 * h)
        return g


def build_parametrize(ctx: TermContext, call: Call, realize):
    args = bind_args(call, ["formula", "params", "map", "gradient",
                            "minpar", "maxpar", "cov"], required=2)
    inner_node = _inner_formula(args["formula"], "Parametrize")
    inner = _realize_terms(realize, ctx, inner_node, "Parametrize")

    pnode = args["params"]
    if isinstance(pnode, Str):
        names = [pnode.value]
    elif isinstance(pnode, Call) and pnode.name == "c":
        names = [_str(a.value, "Parametrize params") for a in pnode.args]
    elif isinstance(pnode, Num):
        names = [f"theta{k + 1}" for k in range(int(pnode.value))]
    else:
        raise ModelError("Parametrize: params must be parameter names")

    mnode = args.get("map")
    if mnode is None:
        map_kind, map_expr = "rep", None
    elif isinstance(mnode, Str):
        if mnode.value != "rep":
            raise ModelError(f"Parametrize: unknown map {mnode.value!r}")
        map_kind, map_expr = "rep", None
    elif isinstance(mnode, FormulaNode) and mnode.lhs is None:
        map_kind, map_expr = "expr", mnode.rhs
    else:
        raise ModelError("Parametrize: map must be \"rep\" or a one-sided formula")

    gnode = args.get("gradient")
    gradient = None
    if gnode is not None and not isinstance(gnode, Null):
        gradient = _str(gnode, "Parametrize gradient")
        if gradient != "linear":
            raise ModelError("Parametrize: gradient must be \"linear\" or NULL")

    q = len(names)
    minpar = _param_vec(args.get("minpar"), q, "minpar", -math.inf)
    maxpar = _param_vec(args.get("maxpar"), q, "maxpar", math.inf)
    cov = None
    if "cov" in args and not isinstance(args["cov"], Null):
        cov = _param_vec(args["cov"], max(q, 1), "cov", 0.0)
    return [CurvedBlock(inner, names, map_kind, map_expr, gradient, minpar, maxpar, cov)]


OPERATORS = {
    "F": build_F,
    "Symmetrize": build_symmetrize,
    "S": build_S,
    "Sum": build_sum,
    "Prod": build_prod,
    "Log": build_log,
    "Exp": build_exp,
    "B": build_B,
    "Parametrize": build_parametrize,
}
