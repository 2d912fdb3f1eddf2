"""Resolve parsed formulas into concrete model ingredients: attribute
covariates, level selections, mixing-matrix cells, term lists, and
constraint specifications.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import FormulaError, ModelError, UnsupportedFeatureError
from .formula import (
    Arg, Binary, Bool, Call, FormulaNode, Ident, Null, Num, Str, Unary,
    deparse, parse_text,
)
from .network import AttrColumn, Network

__all__ = [
    "AttrResult", "ModelSpec", "TermSpec", "ConstraintSpec",
    "default_options", "parse_model", "parse_constraints",
    "eval_attr", "level_universe", "resolve_levels", "resolve_levels2",
    "level_label",
]


def default_options() -> dict:
    return {"interact.dependent": "error", "gw.cutoff": 30, "cache.sp": True}


# -- attribute evaluation ---------------------------------------------------

@dataclass
class AttrResult:
    """An evaluated attribute: a numeric matrix or a discrete column."""

    kind: str                    # numeric | categorical | boolean
    data: np.ndarray             # (n,k) float64 for numeric, (n,) otherwise
    names: list[str]
    label: str

    def column(self) -> np.ndarray:
        if self.kind == "numeric":
            if self.data.shape[1] != 1:
                raise ModelError(f"attribute {self.label!r} has {self.data.shape[1]} columns, expected 1")
            return self.data[:, 0]
        return self.data

    def as_discrete(self) -> np.ndarray:
        """Column of hashable level values for factor-style terms."""
        col = self.column()
        if self.kind == "numeric":
            return np.array([float(v) for v in col], dtype=object)
        if self.kind == "boolean":
            return np.array([bool(v) for v in col], dtype=object)
        return col


def _is_bool_array(a) -> bool:
    return isinstance(a, np.ndarray) and a.dtype == bool


def _is_str_array(a) -> bool:
    return isinstance(a, np.ndarray) and a.dtype == object


def _recycle(vec: np.ndarray, n: int, what: str) -> np.ndarray:
    if len(vec) == n:
        return vec
    if len(vec) == 0 or n % len(vec) != 0:
        raise ModelError(f"{what} of length {len(vec)} does not recycle into {n} vertices")
    reps = n // len(vec)
    return np.concatenate([vec] * reps)


class _AttrEnv:
    def __init__(self, net: Network):
        self.net = net
        self.n = net.n

    def lookup(self, name: str) -> np.ndarray:
        if name not in self.net.vattrs:
            raise ModelError(f"unknown vertex attribute {name!r}")
        col = self.net.vattrs[name]
        if col.kind == "numeric":
            return col.values.astype(np.float64)
        if col.kind == "boolean":
            return col.values.astype(bool)
        return col.values


def _collapse_smallest(col: np.ndarray, k: int, into: str) -> np.ndarray:
    vals, counts = np.unique(col.astype(str), return_counts=True)
    order = sorted(range(len(vals)), key=lambda i: (counts[i], vals[i]))
    small = {vals[i] for i in order[:k]}
    return np.array([into if str(v) in small else str(v) for v in col], dtype=object)


def _eval_expr(node, env: _AttrEnv):
    """Evaluate an attribute expression to a length-n vector (or scalar)."""
    n = env.n
    if isinstance(node, Num):
        return float(node.value)
    if isinstance(node, Str):
        return node.value
    if isinstance(node, Bool):
        return bool(node.value)
    if isinstance(node, Null):
        raise ModelError("NULL is not a value in attribute expressions")
    if isinstance(node, Ident):
        if node.name == ".":
            raise ModelError("'.' is only defined inside level predicates and network.size(.)")
        return env.lookup(node.name)
    if isinstance(node, Unary):
        x = _eval_expr(node.operand, env)
        if node.op == "-":
            return -_as_num(x, n)
        if node.op == "!":
            return ~_as_bool(x, n)
        raise ModelError(f"unknown unary operator {node.op}")
    if isinstance(node, Binary):
        return _eval_binop(node, env)
    if isinstance(node, Call):
        return _eval_call(node, env)
    raise ModelError(f"cannot evaluate {deparse(node)!r} as an attribute expression")


def _as_num(x, n) -> np.ndarray:
    if isinstance(x, (int, float, bool)):
        return np.full(n, float(x))
    if _is_bool_array(x):
        return x.astype(np.float64)
    if _is_str_array(x):
        raise ModelError("arithmetic on a categorical attribute")
    return _recycle(np.asarray(x, dtype=np.float64), n, "vector")


def _as_bool(x, n) -> np.ndarray:
    if isinstance(x, bool):
        return np.full(n, x, dtype=bool)
    if _is_bool_array(x):
        return _recycle(x, n, "vector")
    raise ModelError("expected a boolean vector")


def _eval_binop(node: Binary, env: _AttrEnv):
    n = env.n
    op = node.op
    if op == ":":
        lo = _eval_expr(node.left, env)
        hi = _eval_expr(node.right, env)
        if not (isinstance(lo, float) and isinstance(hi, float)):
            raise ModelError("':' range needs scalar endpoints")
        step = 1.0 if hi >= lo else -1.0
        return np.arange(lo, hi + step / 2, step, dtype=np.float64)
    if op == "%in%":
        left = _eval_expr(node.left, env)
        rights = _flatten_values(node.right, env)
        if _is_str_array(left) if isinstance(left, np.ndarray) else isinstance(left, str):
            lcol = left if isinstance(left, np.ndarray) else np.array([left], dtype=object)
            lcol = _recycle(lcol, n, "vector")
            return np.array([str(v) in {str(r) for r in rights} for v in lcol], dtype=bool)
        lcol = _as_num(left, n)
        rset = {float(r) for r in rights}
        return np.array([v in rset for v in lcol], dtype=bool)
    left = _eval_expr(node.left, env)
    right = _eval_expr(node.right, env)
    if op in ("+", "-", "*", "/", "^"):
        a, b = _as_num(left, n), _as_num(right, n)
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            return a / b
        return a ** b
    if op in ("==", "!=", "<", "<=", ">", ">="):
        str_side = (
            (isinstance(left, str) or _is_str_array(left))
            or (isinstance(right, str) or _is_str_array(right))
        )
        if str_side:
            if op not in ("==", "!="):
                raise ModelError(f"{op} undefined for categorical attributes")
            lcol = left if isinstance(left, np.ndarray) else np.full(n, left, dtype=object)
            rcol = right if isinstance(right, np.ndarray) else np.full(n, right, dtype=object)
            eq = np.array([str(a) == str(b) for a, b in zip(_recycle(lcol, n, "vector"), _recycle(rcol, n, "vector"))])
            return eq if op == "==" else ~eq
        a, b = _as_num(left, n), _as_num(right, n)
        return {"==": a == b, "!=": a != b, "<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]
    if op in ("&", "|"):
        a, b = _as_bool(left, n), _as_bool(right, n)
        return (a & b) if op == "&" else (a | b)
    raise ModelError(f"unknown operator {op}")


def _flatten_values(node, env) -> list:
    """Literal value list from c(...), ranges, or scalars."""
    if isinstance(node, Call) and node.name == "c":
        out = []
        for a in node.args:
            out.extend(_flatten_values(a.value, env))
        return out
    if isinstance(node, Binary) and node.op == ":":
        return list(_eval_binop(node, env))
    if isinstance(node, Num):
        return [float(node.value)]
    if isinstance(node, Str):
        return [node.value]
    if isinstance(node, Bool):
        return [bool(node.value)]
    if isinstance(node, Null):
        return [None]
    if isinstance(node, Unary) and node.op == "-":
        inner = _flatten_values(node.operand, env)
        return [-v for v in inner]
    raise ModelError(f"expected a literal value list, found {deparse(node)!r}")


def _eval_call(node: Call, env: _AttrEnv):
    n = env.n
    name = node.name
    if name == "c":
        vals = _flatten_values(node, env)
        if any(isinstance(v, str) for v in vals):
            return _recycle(np.array([str(v) for v in vals], dtype=object), n, "literal vector")
        if all(isinstance(v, bool) for v in vals):
            return _recycle(np.array(vals, dtype=bool), n, "literal vector")
        return _recycle(np.array([float(v) for v in vals], dtype=np.float64), n, "literal vector")
    if name == "I":
        if len(node.args) != 1:
            raise ModelError("I() takes one argument")
        return _eval_expr(node.args[0].value, env)
    if name in ("abs", "log", "exp", "sqrt"):
        x = _as_num(_eval_expr(node.args[0].value, env), n)
        return {"abs": np.abs, "log": np.log, "exp": np.exp, "sqrt": np.sqrt}[name](x)
    if name == "mean":
        x = _as_num(_eval_expr(node.args[0].value, env), n)
        return float(np.mean(x))
    if name == "network.size":
        return float(n)
    if name == "COLLAPSE_SMALLEST":
        if len(node.args) != 3:
            raise ModelError("COLLAPSE_SMALLEST(attr, k, into) takes three arguments")
        col = _eval_expr(node.args[0].value, env)
        if not isinstance(col, np.ndarray):
            raise ModelError("COLLAPSE_SMALLEST needs an attribute column")
        k = int(_require_scalar(node.args[1].value))
        into = node.args[2].value
        if not isinstance(into, Str):
            raise ModelError("COLLAPSE_SMALLEST 'into' must be a string")
        return _collapse_smallest(col, k, into.value)
    if name == "cbind":
        raise ModelError("cbind is only valid at the top of an attribute expression")
    raise ModelError(f"unknown function {name!r} in attribute expression")


def _require_scalar(node) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Unary) and node.op == "-" and isinstance(node.operand, Num):
        return -node.operand.value
    raise ModelError(f"expected a number, found {deparse(node)!r}")


def eval_attr(net: Network, node, warn_unnamed: bool = True) -> AttrResult:
    """Evaluate an attribute specification against a network.

    Accepts a name (string node or identifier), a one-sided formula whose
    right side is an expression, cbind(...) with named columns, or a literal
    vector (recycled). Shorter literal vectors must divide n.
    """
    env = _AttrEnv(net)
    if isinstance(node, str):
        node = Str(node)
    if isinstance(node, FormulaNode):
        if node.lhs is not None:
            raise ModelError("attribute formulas are one-sided")
        node = node.rhs
    if isinstance(node, Str) or isinstance(node, Ident):
        name = node.value if isinstance(node, Str) else node.name
        col = env.lookup(name)
        return _attr_from_vector(col, name, name)
    if isinstance(node, Call) and node.name == "cbind":
        cols, names = [], []
        for a in node.args:
            x = _as_num(_eval_expr(a.value, env), net.n)
            label = a.name if a.name else deparse(a.value)
            if a.name is None and warn_unnamed and not isinstance(a.value, (Ident, Str)):
                warnings.warn(f"unnamed computed column {label!r} in cbind", stacklevel=2)
            cols.append(x)
            names.append(label)
        return AttrResult("numeric", np.column_stack(cols), names, f"cbind({','.join(names)})")
    if isinstance(node, Call) and node.name == "c" and all(
        isinstance(a.value, Str) for a in node.args
    ) and all(a.value.value in net.vattrs for a in node.args):
        # several attribute names: paste for discrete use, cbind for numeric
        names = [a.value.value for a in node.args]
        kinds = {net.vattrs[nm].kind for nm in names}
        if kinds <= {"numeric"}:
            mat = np.column_stack([env.lookup(nm) for nm in names])
            return AttrResult("numeric", mat, names, ".".join(names))
        pasted = np.array(
            [".".join(str(net.vattrs[nm].values[i]) for nm in names) for i in range(net.n)],
            dtype=object,
        )
        return AttrResult("categorical", pasted, [".".join(names)], ".".join(names))
    label = deparse(node)
    value = _eval_expr(node, env)
    if isinstance(value, (float, bool, str)):
        value = np.full(net.n, value, dtype=object if isinstance(value, str) else None)
    if isinstance(value, np.ndarray) and value.ndim == 1:
        value = _recycle(value, net.n, "attribute vector")
    return _attr_from_vector(value, label, label)


def _attr_from_vector(col: np.ndarray, name: str, label: str) -> AttrResult:
    if _is_str_array(col):
        return AttrResult("categorical", col, [name], label)
    if _is_bool_array(col):
        return AttrResult("boolean", col, [name], label)
    mat = np.asarray(col, dtype=np.float64).reshape(-1, 1)
    return AttrResult("numeric", mat, [name], label)


# -- level resolution --------------------------------------------------------

def level_label(v) -> str:
    if isinstance(v, bool):
        return "TRUE" if v else "FALSE"
    if isinstance(v, float) and v == int(v):
        return str(int(v))
    return str(v)


def level_universe(col: np.ndarray) -> tuple[list, list[int]]:
    """Default-ordered distinct values with frequencies.

    Numbers sort ascending, strings lexicographically, FALSE before TRUE.
    """
    vals = list(col)
    if all(isinstance(v, bool) for v in vals):
        levels = [lv for lv in (False, True) if lv in vals]
    elif all(isinstance(v, (int, float)) for v in vals):
        levels = sorted(set(float(v) for v in vals))
    else:
        levels = sorted(set(str(v) for v in vals))
        vals = [str(v) for v in vals]
    freqs = [sum(1 for v in vals if v == lv) for lv in levels]
    return levels, freqs


def _match_level(levels: list, value) -> int:
    for k, lv in enumerate(levels):
        if lv == value:
            return k
        if isinstance(value, str) and level_label(lv) == value:
            return k
        if isinstance(lv, str) and not isinstance(value, str) and lv == level_label(value):
            return k
    raise ModelError(f"level {value!r} not present (levels: {[level_label(l) for l in levels]})")


def _indices_from_nodes(vals: list, count: int, what: str) -> list[int]:
    """1-based signed index selection over `count` items, 0-based result."""
    ints = []
    for v in vals:
        if not (isinstance(v, float) and v == int(v)):
            raise ModelError(f"{what}: expected integer indices, found {v!r}")
        ints.append(int(v))
    if not ints:
        raise ModelError(f"{what}: empty index vector")
    if all(v < 0 for v in ints):
        drop = {-v for v in ints}
        if any(v > count for v in drop) or 0 in drop:
            raise ModelError(f"{what}: index out of range 1..{count}")
        return [i for i in range(count) if i + 1 not in drop]
    if all(v > 0 for v in ints):
        if any(v > count for v in ints):
            raise ModelError(f"{what}: index out of range 1..{count}")
        return [v - 1 for v in ints]
    raise ModelError(f"{what}: cannot mix positive and negative indices")


def _rank_by_freq(levels: list, freqs: list[int], k: int, largest: bool) -> list[int]:
    if k < 1:
        raise ModelError("LARGEST/SMALLEST need k >= 1")
    # ties break by default level ordering, deterministically
    order = sorted(range(len(levels)), key=lambda i: (-freqs[i], i) if largest else (freqs[i], i))
    pick = sorted(order[: min(k, len(levels))])
    return pick


def resolve_levels(levels: list, freqs: list[int], node, net: Optional[Network] = None) -> list:
    """Select levels per a level specification node; returns level values in
    default order (or literal order for explicit value lists)."""
    if node is None or isinstance(node, Null):
        return list(levels)
    if isinstance(node, Bool):
        if node.value:
            return list(levels)
        raise ModelError("levels=FALSE selects nothing")
    if isinstance(node, FormulaNode):
        if node.lhs is not None:
            raise ModelError("level predicates are one-sided formulas")
        env = _PredicateEnv(levels)
        mask = _eval_expr(node.rhs, env)
        mask = _as_bool(mask, len(levels))
        return [lv for lv, m in zip(levels, mask) if m]
    if isinstance(node, Call) and node.name in ("LARGEST", "SMALLEST"):
        k = int(_require_scalar(node.args[0].value)) if node.args else 1
        pick = _rank_by_freq(levels, freqs, k, node.name == "LARGEST")
        return [levels[i] for i in pick]
    if isinstance(node, Unary) and node.op == "-" and isinstance(node.operand, Call) \
            and node.operand.name in ("LARGEST", "SMALLEST"):
        k = int(_require_scalar(node.operand.args[0].value)) if node.operand.args else 1
        drop = set(_rank_by_freq(levels, freqs, k, node.operand.name == "LARGEST"))
        return [levels[i] for i in range(len(levels)) if i not in drop]
    if isinstance(node, Call) and node.name == "I":
        vals = _flatten_values(node.args[0].value, None)
        return [levels[_match_level(levels, v)] for v in vals]
    # literal strings/booleans select by value; numerics select by index
    vals = _flatten_values(node, None)
    if all(isinstance(v, str) for v in vals) or all(isinstance(v, bool) for v in vals):
        return [levels[_match_level(levels, v)] for v in vals]
    idx = _indices_from_nodes(vals, len(levels), "levels")
    return [levels[i] for i in idx]


class _PredicateEnv(_AttrEnv):
    """Environment binding '.' to the level list inside level predicates."""

    def __init__(self, levels: list):
        self.levels = levels
        self.n = len(levels)

    def lookup(self, name: str) -> np.ndarray:
        if name == ".":
            if all(isinstance(v, (int, float)) for v in self.levels):
                return np.asarray(self.levels, dtype=np.float64)
            if all(isinstance(v, bool) for v in self.levels):
                return np.asarray(self.levels, dtype=bool)
            return np.asarray([str(v) for v in self.levels], dtype=object)
        raise ModelError(f"only '.' is defined inside level predicates, not {name!r}")


# -- levels2: mixing-matrix cell selection ------------------------------------

def enumerate_cells(nrow: int, ncol: int, symmetric: bool) -> list[tuple[int, int]]:
    """Cell order: unordered pairs for symmetric mixing, else column-major."""
    if symmetric:
        if nrow != ncol:
            raise ModelError("symmetric mixing needs a square level grid")
        return [(j, i) for i in range(nrow) for j in range(i + 1)]
    return [(r, c) for c in range(ncol) for r in range(nrow)]


def _parse_matrix(node: Call, env=None) -> tuple[list, int, int]:
    pos = node.positional()
    named = node.named()
    if not pos:
        raise ModelError("matrix() needs data")
    data = _flatten_values(pos[0], env)
    nrow = named.get("nrow", pos[1] if len(pos) > 1 else None)
    ncol = named.get("ncol", pos[2] if len(pos) > 2 else None)
    byrow = named.get("byrow")
    byrow = bool(byrow.value) if isinstance(byrow, Bool) else False
    nrow = int(_require_scalar(nrow)) if nrow is not None else None
    ncol = int(_require_scalar(ncol)) if ncol is not None else None
    if nrow is None and ncol is None:
        raise ModelError("matrix() needs nrow or ncol")
    total = len(data)
    if nrow is None:
        nrow = total // ncol
    if ncol is None:
        ncol = total // nrow
    if nrow * ncol != total:
        if total == 1:
            data = data * (nrow * ncol)
        else:
            raise ModelError(f"matrix data length {total} does not fill {nrow}x{ncol}")
    grid = [[None] * ncol for _ in range(nrow)]
    k = 0
    if byrow:
        for r in range(nrow):
            for c in range(ncol):
                grid[r][c] = data[k]
                k += 1
    else:
        for c in range(ncol):
            for r in range(nrow):
                grid[r][c] = data[k]
                k += 1
    return grid, nrow, ncol


def resolve_levels2(row_levels: list, col_levels: list, node, symmetric: bool):
    """Resolve a levels2 specification into named cell groups.

    Returns a list of (label, [(row_index, col_index), ...]) with indices into
    the supplied level lists. The default drops the first cell of the
    enumeration; NULL/TRUE keeps every cell; signed integers index cells;
    a boolean matrix masks cells; a character matrix groups cells sharing a
    label, keeps empty-string entries as singleton cells under their default
    label, and drops NA entries.
    """
    cells = enumerate_cells(len(row_levels), len(col_levels), symmetric)

    def cell_label(rc):
        r, c = rc
        return f"{level_label(row_levels[r])}.{level_label(col_levels[c])}"

    if node is None:
        keep = cells[1:] if len(cells) > 1 else cells
        return [(cell_label(rc), [rc]) for rc in keep]
    if isinstance(node, (Null, Bool)):
        if isinstance(node, Bool) and not node.value:
            raise ModelError("levels2=FALSE selects nothing")
        return [(cell_label(rc), [rc]) for rc in cells]
    if isinstance(node, Call) and node.name == "matrix":
        grid, nrow, ncol = _parse_matrix(node)
        if nrow != len(row_levels) or ncol != len(col_levels):
            raise ModelError(
                f"levels2 matrix is {nrow}x{ncol}, expected {len(row_levels)}x{len(col_levels)}"
            )
        values = [grid[r][c] for (r, c) in cells]
        if symmetric:
            for (r, c) in cells:
                if grid[r][c] != grid[c][r]:
                    raise ModelError("levels2 matrix must be symmetric for symmetric mixing")
        if all(isinstance(v, bool) or v is None for v in values):
            return [(cell_label(rc), [rc]) for rc, v in zip(cells, values) if v]
        groups: dict[str, list] = {}
        order: list[str] = []
        for rc, v in zip(cells, values):
            if v is None or (isinstance(v, bool) and not v):
                continue
            if v == "" or isinstance(v, bool):
                label = cell_label(rc)
            else:
                label = str(v)
            if label not in groups:
                groups[label] = []
                order.append(label)
            groups[label].append(rc)
        return [(lab, groups[lab]) for lab in order]
    vals = _flatten_values(node, None)
    idx = _indices_from_nodes(vals, len(cells), "levels2")
    return [(cell_label(cells[i]), [cells[i]]) for i in idx]


# -- model parsing ------------------------------------------------------------

@dataclass
class TermSpec:
    """One additive model component: a term call or an interaction chain."""

    factors: tuple          # one node for a plain term, several for ':'
    text: str


@dataclass
class ConstraintSpec:
    kind: str
    node: Optional[Call]


@dataclass
class ModelSpec:
    terms: list[TermSpec]
    options: dict = field(default_factory=default_options)
    response: Optional[object] = None
    reference: Optional[object] = None
    constraints: list[ConstraintSpec] = field(default_factory=list)
    obs_constraints: list[ConstraintSpec] = field(default_factory=list)


def _flatten_plus(node) -> list:
    if isinstance(node, Binary) and node.op == "+":
        return _flatten_plus(node.left) + _flatten_plus(node.right)
    return [node]


def _expand_product(node) -> list[tuple]:
    """Expand '*' and ':' into interaction factor tuples, lm-style."""
    if isinstance(node, Binary) and node.op == "*":
        left = _expand_product(node.left)
        right = _expand_product(node.right)
        out = list(left) + list(right)
        for a in left:
            for b in right:
                out.append(a + b)
        return out
    if isinstance(node, Binary) and node.op == ":":
        left = _expand_product(node.left)
        right = _expand_product(node.right)
        if len(left) != 1 or len(right) != 1:
            raise FormulaError("':' expects single terms on each side")
        return [left[0] + right[0]]
    return [(node,)]


def parse_model(text: str, options: Optional[dict] = None) -> ModelSpec:
    """Parse model-formula text into an ordered list of term specifications.

    `A*B` expands to A, B, A:B in that order; a left-hand side naming the
    network is accepted and ignored; nested formulas stay unevaluated for the
    realization stage.
    """
    node = parse_text(text)
    if isinstance(node, FormulaNode):
        node = node.rhs
    specs: list[TermSpec] = []
    for item in _flatten_plus(node):
        for factors in _expand_product(item):
            label = ":".join(deparse(f) for f in factors)
            specs.append(TermSpec(tuple(factors), label))
    if not specs:
        raise FormulaError("a model needs at least one term")
    opts = default_options()
    if options:
        opts.update(options)
    return ModelSpec(terms=specs, options=opts)


_CONSTRAINT_KINDS = {
    "edges": "edges_fixed",
    "fixedas": "fixedas",
    "Dyads": "dyads",
    "blocks": "blocks",
    "bd": "bd",
    "observed": "observed",
    "egocentric": "egocentric",
    "dyadnoise": "dyadnoise",
}


def parse_constraints(text: Optional[str]) -> list[ConstraintSpec]:
    """Parse a constraint formula like "~Dyads(fix=~nodematch("a"))+bd(maxout=2)"."""
    if text is None or not text.strip() or text.strip() in ("~.", "."):
        return []
    node = parse_text(text)
    if isinstance(node, FormulaNode):
        if node.lhs is not None:
            raise FormulaError("constraint formulas are one-sided")
        node = node.rhs
    out = []
    for item in _flatten_plus(node):
        if isinstance(item, Ident):
            name, call = item.name, None
        elif isinstance(item, Call):
            name, call = item.name, item
        else:
            raise FormulaError(f"invalid constraint {deparse(item)!r}")
        if name not in _CONSTRAINT_KINDS:
            raise FormulaError(f"unknown constraint {name!r}")
        kind = _CONSTRAINT_KINDS[name]
        if kind == "dyadnoise":
            raise UnsupportedFeatureError("the dyadnoise soft constraint is not supported")
        out.append(ConstraintSpec(kind, call))
    return out
