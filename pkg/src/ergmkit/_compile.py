"""Lower a realized model onto the kernel's array program.

A model compiles when every statistic is either a dyadwise factor product
or one of the coded structural counts. Linear recombinations (Sum) become
a postmap L with model_stats = L @ raw_stats, so the kernel only ever
tracks raw statistics and scores proposals against eta_raw = L'eta.
Anything else (Log/Exp, Symmetrize, S, binarized dyad-dependent inners,
cycles, path weights) takes the generic Python path instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ModelError
from .operators import SumTerm
from .terms import Term

ST_CODES = {"mutual": 1, "triangle": 2, "ttriple": 3, "transties": 4,
            "cycties": 5, "isolates": 6, "degree": 7}
_NEEDS_DIRECTED = {"mutual", "ttriple", "transties", "cycties"}
_NEEDS_UNDIRECTED = {"triangle", "degree"}


@dataclass
class ChainProgram:
    n_raw: int
    L: np.ndarray               # (model nstat, n_raw)
    raw_sources: list           # terms whose stats() seed the raw vector
    dw_stat: np.ndarray
    fac_start: np.ndarray
    fac_X: np.ndarray
    fac_u: np.ndarray
    fac_p: np.ndarray
    fac_cmp: np.ndarray
    fac_rhs: np.ndarray
    st_stat: np.ndarray
    st_code: np.ndarray
    st_param: np.ndarray

    def init_raw(self, dense) -> np.ndarray:
        if not self.raw_sources:
            return np.zeros(0)
        return np.concatenate([t.stats(dense) for t in self.raw_sources])

    def kernel_args(self):
        return (self.dw_stat, self.fac_start, self.fac_X, self.fac_u,
                self.fac_p, self.fac_cmp, self.fac_rhs,
                self.st_stat, self.st_code, self.st_param)


def _entries_for(term: Term, directed: bool):
    kind = term.kernel_kind
    if kind in ST_CODES:
        if kind in _NEEDS_DIRECTED and not directed:
            return None
        if kind in _NEEDS_UNDIRECTED and directed:
            return None
        return [("st", ST_CODES[kind], float(term.kernel_param))]
    try:
        stats = term.dyadwise()
    except ModelError:
        return None
    if len(stats) != term.nstat:
        return None
    return [("dw", s) for s in stats]


def compile_chain(model) -> ChainProgram | None:
    """Array program for the kernel, or None when any term needs the
    generic path."""
    directed = bool(model.net.directed)
    n = model.net.n
    entries = []
    raw_sources = []
    l_blocks = []       # (model rows, raw col start, raw col count, A or None)
    n_raw = 0
    for term in model.terms:
        if isinstance(term, SumTerm):
            raw0 = n_raw
            a_list = []
            for A, ts in term.blocks:
                for t in ts:
                    e = _entries_for(t, directed)
                    if e is None:
                        return None
                    entries.extend(e)
                    raw_sources.append(t)
                    n_raw += len(e)
                a_list.append(np.asarray(A, float))
            A_full = np.hstack(a_list)
            l_blocks.append((term.nstat, raw0, n_raw - raw0, A_full))
        else:
            e = _entries_for(term, directed)
            if e is None:
                return None
            l_blocks.append((term.nstat, n_raw, len(e), None))
            entries.extend(e)
            raw_sources.append(term)
            n_raw += len(e)

    L = np.zeros((model.nstat, n_raw))
    row = 0
    for ns, c0, cc, A in l_blocks:
        if A is None:
            L[row:row + ns, c0:c0 + cc] = np.eye(ns)
        else:
            L[row:row + ns, c0:c0 + cc] = A
        row += ns

    dw_stat = []
    fac_start = [0]
    xs = []
    fac_u = []
    fac_p = []
    fac_cmp = []
    fac_rhs = []
    st_stat = []
    st_code = []
    st_param = []
    for raw_i, ent in enumerate(entries):
        if ent[0] == "dw":
            s = ent[1]
            dw_stat.append(raw_i)
            for f in s.factors:
                xs.append(np.ascontiguousarray(np.asarray(f.X, float)))
                fac_u.append(int(f.u))
                p = list(f.p) + [0.0, 0.0, 0.0]
                fac_p.append(p[:3])
                fac_cmp.append(int(f.cmp))
                fac_rhs.append(float(f.rhs))
            fac_start.append(len(xs))
        else:
            st_stat.append(raw_i)
            st_code.append(ent[1])
            st_param.append(ent[2])

    fac_X = np.stack(xs) if xs else np.zeros((0, n, n))
    return ChainProgram(
        n_raw=n_raw,
        L=L,
        raw_sources=raw_sources,
        dw_stat=np.asarray(dw_stat, np.int64),
        fac_start=np.asarray(fac_start, np.int64),
        fac_X=fac_X,
        fac_u=np.asarray(fac_u, np.int64),
        fac_p=np.asarray(fac_p, float).reshape(len(fac_u), 3),
        fac_cmp=np.asarray(fac_cmp, np.int64),
        fac_rhs=np.asarray(fac_rhs, float),
        st_stat=np.asarray(st_stat, np.int64),
        st_code=np.asarray(st_code, np.int64),
        st_param=np.asarray(st_param, float),
    )
