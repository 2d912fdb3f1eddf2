"""Network statistics: the binary and valued term catalogs.

Every term knows how to evaluate its statistics on a dense working network
and how to compute the exact change caused by setting one dyad to a new
value. Dyad-independent terms reduce to per-dyad contributions
f_ij(v) = X_ij * t(v) held as coefficient matrices plus a value transform,
which later stages reuse for filters, constraints, interactions, and the
compiled sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ModelError
from .formula import Arg, Bool, Call, FormulaNode, Ident, Null, Num, Str, Unary, deparse
from .modelspec import (
    eval_attr, level_label, level_universe, resolve_levels, resolve_levels2,
)
from .network import DenseNet

# value-transform codes shared with the compiled kernels
U_VAL, U_NONZERO, U_ATLEAST, U_ATMOST, U_EQUALTO, U_GREATER, U_SMALLER, \
    U_ININTERVAL, U_POW, U_ONE = range(10)

# factor roles: use the transformed value directly, or compare it to rhs
CMP_VALUE, CMP_EQ, CMP_NE, CMP_LT, CMP_LE, CMP_GT, CMP_GE = range(7)

CMP_NEGATE = {CMP_EQ: CMP_NE, CMP_NE: CMP_EQ, CMP_LT: CMP_GE, CMP_GE: CMP_LT,
              CMP_LE: CMP_GT, CMP_GT: CMP_LE}

# mutuality forms
M_PRODUCT, M_MIN, M_GEOMETRIC, M_NABSDIFF = range(4)


def apply_u(v, u: int, p=(0.0, 0.0, 0.0)):
    """Apply a value transform to a scalar or array of dyad values."""
    if u == U_VAL:
        return v
    if u == U_NONZERO:
        return (v != 0) * 1.0
    if u == U_ATLEAST:
        return (v >= p[0]) * 1.0
    if u == U_ATMOST:
        return (v <= p[0]) * 1.0
    if u == U_EQUALTO:
        return (np.abs(v - p[0]) <= p[1]) * 1.0
    if u == U_GREATER:
        return (v > p[0]) * 1.0
    if u == U_SMALLER:
        return (v < p[0]) * 1.0
    if u == U_ININTERVAL:
        lo_ok = (v > p[0]) if p[2] in (1.0, 3.0) else (v >= p[0])
        hi_ok = (v < p[1]) if p[2] in (2.0, 3.0) else (v <= p[1])
        return (lo_ok & hi_ok) * 1.0 if isinstance(v, np.ndarray) else float(lo_ok and hi_ok)
    if u == U_POW:
        return np.power(v, p[0]) if isinstance(v, np.ndarray) else float(v) ** p[0]
    if u == U_ONE:
        return np.ones_like(v) if isinstance(v, np.ndarray) else 1.0
    raise ModelError(f"unknown value transform {u}")


def _cmp_apply(raw, cmp: int, rhs: float):
    if cmp == CMP_EQ:
        return (raw == rhs) * 1.0
    if cmp == CMP_NE:
        return (raw != rhs) * 1.0
    if cmp == CMP_LT:
        return (raw < rhs) * 1.0
    if cmp == CMP_LE:
        return (raw <= rhs) * 1.0
    if cmp == CMP_GT:
        return (raw > rhs) * 1.0
    return (raw >= rhs) * 1.0


@dataclass
class DyadFactor:
    """One multiplicand of a dyadwise contribution.

    With cmp == CMP_VALUE the factor is X[i,j] * t(v); otherwise it is the
    0/1 outcome of comparing X[i,j] * t(v) against rhs, which is how edge
    filters enter the product.
    """

    X: np.ndarray
    u: int = U_VAL
    p: tuple = (0.0, 0.0, 0.0)
    cmp: int = CMP_VALUE
    rhs: float = 0.0

    def value(self, i: int, j: int, v: float) -> float:
        raw = float(self.X[i, j]) * float(apply_u(v, self.u, self.p))
        if self.cmp == CMP_VALUE:
            return raw
        return float(_cmp_apply(raw, self.cmp, self.rhs))

    def vec(self, xv: np.ndarray, vals: np.ndarray) -> np.ndarray:
        raw = xv * apply_u(vals, self.u, self.p)
        if self.cmp == CMP_VALUE:
            return raw
        return _cmp_apply(raw, self.cmp, self.rhs)


class DyadStat:
    """One dyad-independent statistic, f_ij(v) = prod of factor values."""

    def __init__(self, name: str, X: np.ndarray | None = None, u: int = U_VAL,
                 p: tuple = (0.0, 0.0, 0.0), factors: list[DyadFactor] | None = None):
        self.name = name
        if factors is None:
            factors = [DyadFactor(X, u, p)]
        self.factors = factors

    def with_name(self, name: str) -> "DyadStat":
        return DyadStat(name, factors=list(self.factors))

    def contrib(self, i: int, j: int, v: float) -> float:
        out = 1.0
        for f in self.factors:
            out *= f.value(i, j, v)
            if out == 0.0:
                return 0.0
        return out

    def contrib_grid(self, v: float) -> np.ndarray:
        """f_ij(v) for every cell at a common value v, as an (n, n) array."""
        out = None
        for f in self.factors:
            raw = f.X * float(apply_u(v, f.u, f.p))
            part = raw if f.cmp == CMP_VALUE else _cmp_apply(raw, f.cmp, f.rhs)
            out = part if out is None else out * part
        return out


class Term:
    """A block of model statistics with exact change computation.

    Subclasses either override `change` or inherit the evaluate-difference
    fallback, which is always correct but costs two full evaluations.
    """

    name: str
    stat_names: list[str]
    dyad_independent: bool = False
    kernel_kind = None          # compiled-sampler hook, None = generic path
    kernel_param: float = 0.0

    @property
    def nstat(self) -> int:
        return len(self.stat_names)

    def stats(self, dense: DenseNet) -> np.ndarray:
        raise NotImplementedError

    def change(self, dense: DenseNet, i: int, j: int, new: float) -> np.ndarray:
        old = dense.y[i, j]
        if new == old:
            return np.zeros(self.nstat)
        before = self.stats(dense)
        dense.set(i, j, new)
        after = self.stats(dense)
        dense.set(i, j, old)
        return after - before

    def dyadwise(self) -> list[DyadStat]:
        raise ModelError(f"term {self.name!r} is not dyad-independent")


class DyadwiseTerm(Term):
    kernel_kind = "dyadwise"
    dyad_independent = True

    def __init__(self, name: str, stats: list[DyadStat], offsets=None):
        self.name = name
        self._stats = stats
        self.stat_names = [s.name for s in stats]
        # constant shift, used when a composed contribution is nonzero at 0
        self.offsets = np.zeros(len(stats)) if offsets is None else np.asarray(offsets, float)

    def dyadwise(self) -> list[DyadStat]:
        return self._stats

    def stats(self, dense: DenseNet) -> np.ndarray:
        mask = dense.canonical_mask()
        y = dense.y
        vals = y[mask]
        out = np.empty(len(self._stats))
        for k, s in enumerate(self._stats):
            acc = np.ones(vals.shape)
            for f in s.factors:
                acc = acc * f.vec(f.X[mask], vals)
            out[k] = self.offsets[k] + float(np.sum(acc))
        return out

    def change(self, dense: DenseNet, i: int, j: int, new: float) -> np.ndarray:
        old = float(dense.y[i, j])
        out = np.empty(len(self._stats))
        for k, s in enumerate(self._stats):
            out[k] = s.contrib(i, j, new) - s.contrib(i, j, old)
        return out


def _binary(y: np.ndarray) -> np.ndarray:
    return (y != 0).astype(np.float64)


class MutualityTerm(Term):
    """Reciprocity over node pairs i<j; `min` on a 0/1 network is `mutual`."""

    kernel_kind = "mutual"

    def __init__(self, name: str, form: str):
        forms = {"product": M_PRODUCT, "min": M_MIN, "geometric": M_GEOMETRIC,
                 "nabsdiff": M_NABSDIFF}
        if form not in forms:
            raise ModelError(f"unknown mutuality form {form!r}")
        self.form = forms[form]
        self.kernel_param = float(self.form)
        self.name = name
        self.stat_names = [name]

    def _combine(self, a, b):
        if self.form == M_PRODUCT:
            return a * b
        if self.form == M_MIN:
            return np.minimum(a, b)
        if self.form == M_GEOMETRIC:
            return np.sqrt(a * b)
        return -np.abs(a - b)

    def stats(self, dense: DenseNet) -> np.ndarray:
        iu = np.triu_indices(dense.n, k=1)
        a = dense.y[iu]
        b = dense.y.T[iu]
        return np.array([float(np.sum(self._combine(a, b)))])

    def change(self, dense: DenseNet, i: int, j: int, new: float) -> np.ndarray:
        r = dense.y[j, i]
        old = dense.y[i, j]
        return np.array([float(self._combine(np.float64(new), r) - self._combine(np.float64(old), r))])


class TriangleTerm(Term):
    kernel_kind = "triangle"

    def __init__(self):
        self.name = "triangle"
        self.stat_names = ["triangle"]

    def stats(self, dense: DenseNet) -> np.ndarray:
        a = _binary(dense.y)
        return np.array([float(np.einsum("ij,jk,ki->", a, a, a)) / 6.0])

    def change(self, dense: DenseNet, i: int, j: int, new: float) -> np.ndarray:
        a = _binary(dense.y)
        dv = float(new != 0) - a[i, j]
        return np.array([dv * float(a[i] @ a[j])])


class TTripleTerm(Term):
    kernel_kind = "ttriple"

    def __init__(self):
        self.name = "ttriple"
        self.stat_names = ["ttriple"]

    def stats(self, dense: DenseNet) -> np.ndarray:
        a = _binary(dense.y)
        return np.array([float(np.einsum("ij,jk,ik->", a, a, a))])

    def change(self, dense: DenseNet, i: int, j: int, new: float) -> np.ndarray:
        a = _binary(dense.y)
        dv = float(new != 0) - a[i, j]
        twopaths = float(a[j] @ a[i]) + float(a[:, i] @ a[:, j]) + float(a[i] @ a[:, j])
        return np.array([dv * twopaths])


class ClosureTiesTerm(Term):
    """Ties supported by at least one two-path: transitive or cyclical."""

    def __init__(self, cyclical: bool):
        self.cyclical = cyclical
        self.name = "cyclicalties" if cyclical else "transitiveties"
        self.stat_names = [self.name]
        self.kernel_kind = "cycties" if cyclical else "transties"

    def _indicator_sum(self, a: np.ndarray) -> float:
        p2 = a @ a
        support = p2.T if self.cyclical else p2
        return float(np.sum(a * (support > 0.5)))

    def _contrib(self, a: np.ndarray, p: int, q: int) -> float:
        if a[p, q] == 0:
            return 0.0
        paths = a[q] @ a[:, p] if self.cyclical else a[p] @ a[:, q]
        return 1.0 if paths > 0.5 else 0.0

    def stats(self, dense: DenseNet) -> np.ndarray:
        return np.array([self._indicator_sum(_binary(dense.y))])

    def change(self, dense: DenseNet, i: int, j: int, new: float) -> np.ndarray:
        a = _binary(dense.y)
        if self.cyclical:
            affected = [(i, j)] + [(p, i) for p in np.nonzero(a[j] > 0.5)[0]] \
                + [(j, q) for q in np.nonzero(a[:, i] > 0.5)[0]]
        else:
            affected = [(i, j)] + [(i, q) for q in np.nonzero(a[j] > 0.5)[0]] \
                + [(p, j) for p in np.nonzero(a[:, i] > 0.5)[0]]
        affected = sorted(set(affected))
        before = sum(self._contrib(a, p, q) for p, q in affected)
        a[i, j] = 1.0 if new != 0 else 0.0
        after = sum(self._contrib(a, p, q) for p, q in affected)
        return np.array([after - before])


class IsolatesTerm(Term):
    kernel_kind = "isolates"

    def __init__(self):
        self.name = "isolates"
        self.stat_names = ["isolates"]

    def _tdeg(self, dense: DenseNet) -> np.ndarray:
        a = _binary(dense.y)
        if dense.directed:
            return a.sum(axis=1) + a.sum(axis=0)
        return a.sum(axis=1)

    def stats(self, dense: DenseNet) -> np.ndarray:
        return np.array([float(np.sum(self._tdeg(dense) == 0))])

    def change(self, dense: DenseNet, i: int, j: int, new: float) -> np.ndarray:
        db = float(new != 0) - float(dense.y[i, j] != 0)
        if db == 0:
            return np.zeros(1)
        tdeg = self._tdeg(dense)
        d = (float(tdeg[i] + db == 0) - float(tdeg[i] == 0)
             + float(tdeg[j] + db == 0) - float(tdeg[j] == 0))
        return np.array([d])


class DegreeTerm(Term):
    kernel_kind = "degree"

    def __init__(self, d: int):
        self.d = int(d)
        self.kernel_param = float(d)
        self.name = f"degree{self.d}"
        self.stat_names = [self.name]

    def stats(self, dense: DenseNet) -> np.ndarray:
        deg = _binary(dense.y).sum(axis=1)
        return np.array([float(np.sum(deg == self.d))])

    def change(self, dense: DenseNet, i: int, j: int, new: float) -> np.ndarray:
        db = float(new != 0) - float(dense.y[i, j] != 0)
        if db == 0:
            return np.zeros(1)
        deg = _binary(dense.y).sum(axis=1)
        d = self.d
        out = (float(deg[i] + db == d) - float(deg[i] == d)
               + float(deg[j] + db == d) - float(deg[j] == d))
        return np.array([out])


class CycleTerm(Term):
    """Simple k-cycles, each counted once; directed inputs count directed
    cycles. Evaluation walks simple paths anchored at the cycle's smallest
    vertex, so it is meant for small or sparse networks."""

    def __init__(self, k: int):
        if k < 2:
            raise ModelError("cycle(k) needs k >= 2")
        self.k = int(k)
        self.name = f"cycle{self.k}"
        self.stat_names = [self.name]

    def stats(self, dense: DenseNet) -> np.ndarray:
        a = dense.y != 0
        n = dense.n
        k = self.k
        directed = dense.directed
        if not directed and k == 2:
            return np.array([0.0])
        count = 0

        def walk(start: int, v: int, depth: int, visited: set) -> int:
            total = 0
            if depth == k - 1:
                return int(a[v, start])
            for w in range(start + 1, n):
                if w not in visited and a[v, w]:
                    visited.add(w)
                    total += walk(start, w, depth + 1, visited)
                    visited.remove(w)
            return total

        for s in range(n):
            count += walk(s, s, 0, {s})
        if not directed:
            count //= 2
        return np.array([float(count)])


class NodeSqrtCovarTerm(Term):
    """Covariance of transformed dyad values over pairs of dyads sharing an
    actor. center=TRUE subtracts the global mean of the transformed values;
    directed networks pool each actor's in- and out-dyads."""

    def __init__(self, center: bool, transform: str):
        if transform not in ("sqrt", "identity"):
            raise ModelError(f"unknown transform {transform!r}")
        self.center = center
        self.transform = transform
        self.name = "nodesqrtcovar"
        self.stat_names = ["nodesqrtcovar"]

    def stats(self, dense: DenseNet) -> np.ndarray:
        n = dense.n
        mask = dense.canonical_mask()
        s = np.sqrt(dense.y) if self.transform == "sqrt" else dense.y.astype(np.float64)
        if self.center:
            mean = float(np.mean(s[mask]))
        else:
            mean = 0.0
        t = np.where(mask | mask.T, s - mean, 0.0)
        total = 0.0
        for i in range(n):
            if dense.directed:
                vals = np.concatenate([t[i], t[:, i]])
            else:
                vals = t[i]
            total += (vals.sum() ** 2 - float(vals @ vals)) / 2.0
        return np.array([total])


class PathWeightsTerm(Term):
    """Triadic closure for valued ties: v_affect(y_ij, v_combine over k of
    v_2path(y_ik, y_kj)), with the cyclical variant reading two-paths
    j->k->i instead."""

    def __init__(self, twopath: str, combine: str, affect: str, cyclical: bool):
        if twopath not in ("min", "geomean"):
            raise ModelError(f"unknown twopath {twopath!r}")
        if combine not in ("max", "sum"):
            raise ModelError(f"unknown combine {combine!r}")
        if affect not in ("min", "geomean"):
            raise ModelError(f"unknown affect {affect!r}")
        self.twopath, self.combine, self.affect = twopath, combine, affect
        self.cyclical = cyclical
        base = "cyclicalweights" if cyclical else "transitiveweights"
        self.name = f"{base}.{twopath}.{combine}.{affect}"
        self.stat_names = [self.name]

    def _pair(self, y: np.ndarray, i: int, j: int, n: int) -> float:
        if self.cyclical:
            first, second = y[j, :], y[:, i]
        else:
            first, second = y[i, :], y[:, j]
        v2 = np.minimum(first, second) if self.twopath == "min" else np.sqrt(first * second)
        v2 = v2.copy()
        v2[i] = 0.0
        v2[j] = 0.0
        c = float(np.max(v2)) if self.combine == "max" else float(np.sum(v2))
        yij = float(y[i, j])
        return min(yij, c) if self.affect == "min" else math.sqrt(yij * c)

    def stats(self, dense: DenseNet) -> np.ndarray:
        y = dense.y
        n = dense.n
        ts, hs = dense.dyad_list()
        total = sum(self._pair(y, int(i), int(j), n) for i, j in zip(ts, hs))
        return np.array([total])

    def change(self, dense: DenseNet, i: int, j: int, new: float) -> np.ndarray:
        y = dense.y
        n = dense.n
        if dense.directed:
            if self.cyclical:
                affected = {(i, j)} | {(p, i) for p in range(n) if p != i} \
                    | {(j, q) for q in range(n) if q != j}
            else:
                affected = {(i, q) for q in range(n) if q != i} \
                    | {(p, j) for p in range(n) if p != j} | {(i, j)}
            affected = {(p, q) for p, q in affected if p != q}
        else:
            affected = {(min(p, q), max(p, q))
                        for p in (i, j) for q in range(n) if q != p}
        before = sum(self._pair(y, p, q, n) for p, q in affected)
        old = y[i, j]
        dense.set(i, j, new)
        after = sum(self._pair(y, p, q, n) for p, q in affected)
        dense.set(i, j, old)
        return np.array([after - before])


# -- argument plumbing --------------------------------------------------------

@dataclass
class TermContext:
    net: object                 # template Network
    valued: bool
    options: dict = field(default_factory=dict)
    reference_name: str = ""


def _as_call(node) -> Call:
    if isinstance(node, Ident):
        return Call(node.name, ())
    if isinstance(node, Call):
        return node
    raise ModelError(f"expected a term, found {deparse(node)!r}")


def bind_args(call: Call, names: list[str], required: int = 0) -> dict:
    out: dict = {}
    pos = 0
    for a in call.args:
        if a.name is None:
            if pos >= len(names):
                raise ModelError(f"{call.name}: too many arguments")
            out[names[pos]] = a.value
            pos += 1
        else:
            if a.name not in names:
                raise ModelError(f"{call.name}: unknown argument {a.name!r}")
            if a.name in out:
                raise ModelError(f"{call.name}: duplicate argument {a.name!r}")
            out[a.name] = a.value
    for nm in names[:required]:
        if nm not in out:
            raise ModelError(f"{call.name}: missing argument {nm!r}")
    return out


def _num(node, what: str) -> float:
    if isinstance(node, Num):
        return float(node.value)
    if isinstance(node, Unary) and node.op == "-" and isinstance(node.operand, Num):
        return -float(node.operand.value)
    if isinstance(node, Ident) and node.name == "Inf":
        return math.inf
    if isinstance(node, Unary) and node.op == "-" and isinstance(node.operand, Ident) \
            and node.operand.name == "Inf":
        return -math.inf
    raise ModelError(f"{what}: expected a number, found {deparse(node)!r}")


def _bool(node, what: str, default: bool) -> bool:
    if node is None:
        return default
    if isinstance(node, Bool):
        return bool(node.value)
    raise ModelError(f"{what}: expected TRUE or FALSE")


def _str(node, what: str, default=None) -> str:
    if node is None:
        if default is None:
            raise ModelError(f"{what}: missing")
        return default
    if isinstance(node, Str):
        return node.value
    raise ModelError(f"{what}: expected a string, found {deparse(node)!r}")


def _form_u(args: dict, ctx: TermContext, call_name: str) -> int:
    """Covariate terms: binary networks always weight by the 0/1 state;
    valued models choose between weighting by the value or by nonzeroness."""
    node = args.get("form")
    if not ctx.valued:
        if node is not None:
            raise ModelError(f"{call_name}: form= applies to valued models only")
        return U_NONZERO
    form = _str(node, f"{call_name} form", "sum")
    if form == "sum":
        return U_VAL
    if form == "nonzero":
        return U_NONZERO
    raise ModelError(f"{call_name}: form must be \"sum\" or \"nonzero\"")


def _zero_diag(X: np.ndarray) -> np.ndarray:
    np.fill_diagonal(X, 0.0)
    return X


# -- covariate term builders --------------------------------------------------

def _build_edges_like(ctx: TermContext, name: str, u: int) -> list[Term]:
    n = ctx.net.n
    X = _zero_diag(np.ones((n, n)))
    return [DyadwiseTerm(name, [DyadStat(name, X, u)])]


def t_edges(ctx, call):
    bind_args(call, [])
    return _build_edges_like(ctx, "edges", U_NONZERO)


def t_sum(ctx, call):
    args = bind_args(call, ["pow"])
    pow_ = _num(args["pow"], "sum pow") if "pow" in args else 1.0
    n = ctx.net.n
    X = _zero_diag(np.ones((n, n)))
    if pow_ == 1.0:
        return [DyadwiseTerm("sum", [DyadStat("sum", X, U_VAL)])]
    name = f"sum{pow_:g}"
    return [DyadwiseTerm(name, [DyadStat(name, X, U_POW, (pow_, 0.0, 0.0))])]


def t_nonzero(ctx, call):
    bind_args(call, [])
    return _build_edges_like(ctx, "nonzero", U_NONZERO)


def _threshold_term(ctx, call, u: int):
    args = bind_args(call, ["threshold"])
    c = _num(args["threshold"], f"{call.name} threshold") if "threshold" in args else 0.0
    name = f"{call.name}.{c:g}"
    n = ctx.net.n
    X = _zero_diag(np.ones((n, n)))
    return [DyadwiseTerm(name, [DyadStat(name, X, u, (c, 0.0, 0.0))])]


def t_atleast(ctx, call):
    return _threshold_term(ctx, call, U_ATLEAST)


def t_atmost(ctx, call):
    return _threshold_term(ctx, call, U_ATMOST)


def t_greaterthan(ctx, call):
    return _threshold_term(ctx, call, U_GREATER)


def t_smallerthan(ctx, call):
    return _threshold_term(ctx, call, U_SMALLER)


def t_equalto(ctx, call):
    args = bind_args(call, ["value", "tolerance"])
    v = _num(args["value"], "equalto value") if "value" in args else 0.0
    tol = _num(args["tolerance"], "equalto tolerance") if "tolerance" in args else 0.0
    name = f"equalto.{v:g}"
    n = ctx.net.n
    X = _zero_diag(np.ones((n, n)))
    return [DyadwiseTerm(name, [DyadStat(name, X, U_EQUALTO, (v, tol, 0.0))])]


def _open_flags(node) -> float:
    # encodes (open lower, open upper) as 0..3
    if node is None:
        return 3.0
    if isinstance(node, Bool):
        return 3.0 if node.value else 0.0
    if isinstance(node, Call) and node.name == "c" and len(node.args) == 2:
        lo = _bool(node.args[0].value, "open", True)
        hi = _bool(node.args[1].value, "open", True)
        return float((1 if lo else 0) + (2 if hi else 0))
    raise ModelError("ininterval open= takes TRUE/FALSE or c(lower, upper)")


def t_ininterval(ctx, call):
    args = bind_args(call, ["lower", "upper", "open"])
    lo = _num(args["lower"], "lower") if "lower" in args else -math.inf
    hi = _num(args["upper"], "upper") if "upper" in args else math.inf
    flags = _open_flags(args.get("open"))
    name = f"ininterval.{lo:g}.{hi:g}"
    n = ctx.net.n
    X = _zero_diag(np.ones((n, n)))
    return [DyadwiseTerm(name, [DyadStat(name, X, U_ININTERVAL, (lo, hi, flags))])]


def t_nodecov(ctx, call):
    args = bind_args(call, ["attr", "form"], required=1)
    u = _form_u(args, ctx, "nodecov")
    attr = eval_attr(ctx.net, args["attr"])
    if attr.kind != "numeric":
        raise ModelError("nodecov needs a numeric attribute")
    stats = []
    for c in range(attr.data.shape[1]):
        x = attr.data[:, c]
        X = _zero_diag(x[:, None] + x[None, :])
        stats.append(DyadStat(f"nodecov.{attr.names[c]}", X, u))
    return [DyadwiseTerm(f"nodecov.{attr.label}", stats)]


def t_absdiff(ctx, call):
    args = bind_args(call, ["attr", "form"], required=1)
    u = _form_u(args, ctx, "absdiff")
    attr = eval_attr(ctx.net, args["attr"])
    x = attr.column().astype(np.float64)
    X = _zero_diag(np.abs(x[:, None] - x[None, :]))
    name = f"absdiff.{attr.label}"
    return [DyadwiseTerm(name, [DyadStat(name, X, u)])]


def _factor_incidence(ctx, call, mode: str):
    """nodefactor family: per-level endpoint incidence counts."""
    args = bind_args(call, ["attr", "levels", "form"], required=1)
    u = _form_u(args, ctx, call.name)
    if mode in ("in", "out") and not ctx.net.directed:
        raise ModelError(f"{call.name} needs a directed network")
    attr = eval_attr(ctx.net, args["attr"])
    col = attr.as_discrete()
    levels, freqs = level_universe(col)
    default = Unary("-", Num(1.0)) if "levels" not in args else args["levels"]
    keep = resolve_levels(levels, freqs, None if _is_null(default) else default)
    n = ctx.net.n
    stats = []
    for lv in keep:
        ind = np.array([1.0 if _lv_eq(v, lv) else 0.0 for v in col])
        if mode == "out":
            X = np.tile(ind[:, None], (1, n))
        elif mode == "in":
            X = np.tile(ind[None, :], (n, 1))
        else:
            X = ind[:, None] + ind[None, :]
        stats.append(DyadStat(f"{call.name}.{attr.label}.{level_label(lv)}",
                              _zero_diag(X.astype(np.float64)), u))
    if not stats:
        raise ModelError(f"{call.name}: no levels selected")
    return [DyadwiseTerm(f"{call.name}.{attr.label}", stats)]


def _is_null(node) -> bool:
    return node is None or isinstance(node, Null)


def _lv_eq(v, lv) -> bool:
    return v == lv or str(v) == str(lv)


def t_nodefactor(ctx, call):
    return _factor_incidence(ctx, call, "both")


def t_nodeifactor(ctx, call):
    return _factor_incidence(ctx, call, "in")


def t_nodeofactor(ctx, call):
    return _factor_incidence(ctx, call, "out")


def t_nodematch(ctx, call):
    args = bind_args(call, ["attr", "diff", "levels", "form"], required=1)
    u = _form_u(args, ctx, "nodematch")
    diff = _bool(args.get("diff"), "nodematch diff", False)
    attr = eval_attr(ctx.net, args["attr"])
    col = attr.as_discrete()
    levels, freqs = level_universe(col)
    keep = resolve_levels(levels, freqs, args.get("levels"))
    n = ctx.net.n
    match = np.array([[1.0 if _lv_eq(col[i], col[j]) else 0.0 for j in range(n)]
                      for i in range(n)])
    if diff:
        stats = []
        for lv in keep:
            ind = np.array([1.0 if _lv_eq(v, lv) else 0.0 for v in col])
            X = _zero_diag(match * np.outer(ind, ind))
            stats.append(DyadStat(f"nodematch.{attr.label}.{level_label(lv)}", X, u))
        return [DyadwiseTerm(f"nodematch.{attr.label}", stats)]
    inkeep = np.array([1.0 if any(_lv_eq(v, lv) for lv in keep) else 0.0 for v in col])
    X = _zero_diag(match * np.outer(inkeep, inkeep))
    name = f"nodematch.{attr.label}"
    return [DyadwiseTerm(name, [DyadStat(name, X, u)])]


def _mixing_stats(ctx, call, prefix: str):
    """Shared core of nodemix and mm.

    One attribute: each edge lands in one cell of level x level. Two
    attributes (rows ~ cols): every endpoint ordering is tested, so an
    undirected edge can count in up to two cells (or twice in one).
    """
    args = bind_args(call, ["attrs", "levels", "levels2", "form"], required=1)
    u = _form_u(args, ctx, call.name)
    attrs_node = args["attrs"]
    n = ctx.net.n
    two_sided = isinstance(attrs_node, FormulaNode) and attrs_node.lhs is not None
    lev_node = args.get("levels")
    if isinstance(lev_node, FormulaNode) and lev_node.lhs is not None:
        row_lev_node, col_lev_node = lev_node.lhs, lev_node.rhs
        if not two_sided:
            raise ModelError(f"{call.name}: two-sided levels need two-sided attrs")
    else:
        row_lev_node = col_lev_node = lev_node

    if two_sided:
        row_attr = eval_attr(ctx.net, attrs_node.lhs)
        col_attr = eval_attr(ctx.net, attrs_node.rhs)
    else:
        row_attr = col_attr = eval_attr(ctx.net, attrs_node)
    rcol = row_attr.as_discrete()
    ccol = col_attr.as_discrete()
    rlev_all, rfreq = level_universe(rcol)
    clev_all, cfreq = level_universe(ccol)
    rkeep = resolve_levels(rlev_all, rfreq, None if _is_null(row_lev_node) else row_lev_node)
    ckeep = resolve_levels(clev_all, cfreq, None if _is_null(col_lev_node) else col_lev_node)

    symmetric = (not ctx.net.directed) and not two_sided
    node2 = args.get("levels2", Unary("-", Num(1.0)))
    if isinstance(node2, Null):
        node2 = Bool(True)
    groups = resolve_levels2(rkeep, ckeep, node2, symmetric)

    rind = {k: np.array([1.0 if _lv_eq(v, lv) else 0.0 for v in rcol])
            for k, lv in enumerate(rkeep)}
    cind = {k: np.array([1.0 if _lv_eq(v, lv) else 0.0 for v in ccol])
            for k, lv in enumerate(ckeep)}

    def cell_matrix(r: int, c: int) -> np.ndarray:
        if two_sided:
            X = np.outer(rind[r], cind[c])
            if not ctx.net.directed:
                X = X + np.outer(rind[r], cind[c]).T
            return X
        if ctx.net.directed:
            return np.outer(rind[r], cind[c])
        same = np.outer(rind[r], cind[c])
        if r == c:
            return same
        return same + same.T

    if two_sided:
        attr_label = f"{row_attr.label}.{col_attr.label}"
    else:
        attr_label = row_attr.label
    stats = []
    for label, cells in groups:
        X = np.zeros((n, n))
        for (r, c) in cells:
            X += cell_matrix(r, c)
        stats.append(DyadStat(f"{prefix}.{attr_label}.{label}", _zero_diag(X), u))
    if not stats:
        raise ModelError(f"{call.name}: no cells selected")
    return [DyadwiseTerm(f"{prefix}.{attr_label}", stats)]


def t_nodemix(ctx, call):
    args_probe = bind_args(call, ["attrs", "levels", "levels2", "form"], required=1)
    if isinstance(args_probe["attrs"], FormulaNode) and args_probe["attrs"].lhs is not None:
        raise ModelError("nodemix mixes one attribute with itself; use mm for two")
    return _mixing_stats(ctx, call, "mix")


def t_mm(ctx, call):
    return _mixing_stats(ctx, call, "mm")


def _vertex_roles(ctx, call, role: str):
    """sender/receiver/sociality: node labels as a categorical attribute."""
    args = bind_args(call, ["nodes", "form"])
    u = _form_u(args, ctx, call.name)
    if role in ("out", "in") and not ctx.net.directed:
        raise ModelError(f"{call.name} needs a directed network")
    if role == "both" and ctx.net.directed:
        raise ModelError("sociality needs an undirected network")
    n = ctx.net.n
    levels = [float(v) for v in range(1, n + 1)]
    freqs = [1] * n
    default = Unary("-", Num(1.0)) if "nodes" not in args else args["nodes"]
    keep = resolve_levels(levels, freqs, None if _is_null(default) else default)
    stats = []
    for lv in keep:
        v = int(lv) - 1
        X = np.zeros((n, n))
        if role == "out":
            X[v, :] = 1.0
        elif role == "in":
            X[:, v] = 1.0
        else:
            X[v, :] = 1.0
            X[:, v] = 1.0
        stats.append(DyadStat(f"{call.name}{int(lv)}", _zero_diag(X), u))
    return [DyadwiseTerm(call.name, stats)]


def t_sender(ctx, call):
    return _vertex_roles(ctx, call, "out")


def t_receiver(ctx, call):
    return _vertex_roles(ctx, call, "in")


def t_sociality(ctx, call):
    return _vertex_roles(ctx, call, "both")


# -- structural term builders -------------------------------------------------

def t_mutual(ctx, call):
    bind_args(call, [])
    if not ctx.net.directed:
        raise ModelError("mutual needs a directed network")
    return [MutualityTerm("mutual", "min")]


def t_mutuality(ctx, call):
    args = bind_args(call, ["form"])
    if not ctx.net.directed:
        raise ModelError("mutuality needs a directed network")
    form = _str(args.get("form"), "mutuality form", "min")
    if form == "product" and ctx.reference_name == "Poisson":
        import warnings
        warnings.warn(
            "mutuality(product) with a positive coefficient has no finite "
            "normalizing constant under a Poisson reference", stacklevel=2)
    return [MutualityTerm(f"mutuality.{form}", form)]


def t_triangle(ctx, call):
    bind_args(call, [])
    if ctx.net.directed:
        raise ModelError("triangle needs an undirected network; see ttriple")
    return [TriangleTerm()]


def t_ttriple(ctx, call):
    bind_args(call, [])
    if not ctx.net.directed:
        raise ModelError("ttriple needs a directed network; see triangle")
    return [TTripleTerm()]


def t_transitiveties(ctx, call):
    bind_args(call, [])
    if not ctx.net.directed:
        raise ModelError("transitiveties needs a directed network")
    return [ClosureTiesTerm(cyclical=False)]


def t_cyclicalties(ctx, call):
    bind_args(call, [])
    if not ctx.net.directed:
        raise ModelError("cyclicalties needs a directed network")
    return [ClosureTiesTerm(cyclical=True)]


def t_cycle(ctx, call):
    args = bind_args(call, ["k"], required=1)
    k = int(_num(args["k"], "cycle k"))
    if not ctx.net.directed and k < 3:
        raise ModelError("undirected cycles need k >= 3")
    return [CycleTerm(k)]


def t_degree(ctx, call):
    args = bind_args(call, ["d"], required=1)
    if ctx.net.directed:
        raise ModelError("degree needs an undirected network")
    node = args["d"]
    if isinstance(node, Call) and node.name == "c":
        ds = [int(_num(a.value, "degree d")) for a in node.args]
    else:
        ds = [int(_num(node, "degree d"))]
    return [DegreeTerm(d) for d in ds]


def t_isolates(ctx, call):
    bind_args(call, [])
    return [IsolatesTerm()]


def t_nodesqrtcovar(ctx, call):
    args = bind_args(call, ["center", "transform"])
    center = _bool(args.get("center"), "center", True)
    transform = _str(args.get("transform"), "transform", "sqrt")
    return [NodeSqrtCovarTerm(center, transform)]


def _weights_term(ctx, call, cyclical: bool):
    args = bind_args(call, ["twopath", "combine", "affect"])
    tp = _str(args.get("twopath"), "twopath", "min")
    cb = _str(args.get("combine"), "combine", "max")
    af = _str(args.get("affect"), "affect", "min")
    return [PathWeightsTerm(tp, cb, af, cyclical)]


def t_transitiveweights(ctx, call):
    return _weights_term(ctx, call, cyclical=False)


def t_cyclicalweights(ctx, call):
    return _weights_term(ctx, call, cyclical=True)


_COVARIATE_TERMS = {
    "nodecov": t_nodecov,
    "nodefactor": t_nodefactor,
    "nodeifactor": t_nodeifactor,
    "nodeofactor": t_nodeofactor,
    "nodematch": t_nodematch,
    "nodemix": t_nodemix,
    "mm": t_mm,
    "absdiff": t_absdiff,
    "sender": t_sender,
    "receiver": t_receiver,
    "sociality": t_sociality,
}

BINARY_TERMS = {
    "edges": t_edges,
    "mutual": t_mutual,
    "triangle": t_triangle,
    "ttriple": t_ttriple,
    "cycle": t_cycle,
    "degree": t_degree,
    "isolates": t_isolates,
    "transitiveties": t_transitiveties,
    "cyclicalties": t_cyclicalties,
    **_COVARIATE_TERMS,
}

VALUED_TERMS = {
    "sum": t_sum,
    "nonzero": t_nonzero,
    "atleast": t_atleast,
    "atmost": t_atmost,
    "greaterthan": t_greaterthan,
    "smallerthan": t_smallerthan,
    "lessthan": t_smallerthan,
    "equalto": t_equalto,
    "ininterval": t_ininterval,
    "mutuality": t_mutuality,
    "nodesqrtcovar": t_nodesqrtcovar,
    "transitiveweights": t_transitiveweights,
    "cyclicalweights": t_cyclicalweights,
    **_COVARIATE_TERMS,
}


def build_plain_term(ctx: TermContext, node) -> list[Term]:
    """Realize a non-operator term node against the catalog for the mode."""
    call = _as_call(node)
    table = VALUED_TERMS if ctx.valued else BINARY_TERMS
    if call.name not in table:
        other = BINARY_TERMS if ctx.valued else VALUED_TERMS
        if call.name in other:
            if ctx.valued:
                raise ModelError(
                    f"{call.name} is a binary term; wrap it in B() for valued models")
            raise ModelError(f"{call.name} is a valued term, not usable in binary models")
        raise ModelError(f"unknown term {call.name!r}")
    return table[call.name](ctx, call)
