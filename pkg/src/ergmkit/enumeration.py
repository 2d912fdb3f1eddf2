"""Exhaustive tabulation of statistic vectors over the free dyads.

Binary spaces walk a Gray code so consecutive states differ in one dyad
and each step costs one change-statistic evaluation; finite valued
supports run a depth-first odometer with the same incremental trick.
Rows aggregate the reference weight h(y) of every network sharing a
statistic vector, which is all the normalizing constant needs:
kappa(theta) = sum_rows weight * exp(eta'g_row).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from . import _kernels
from ._compile import compile_chain
from .errors import EnumerationLimitError, ModelError, UnsupportedFeatureError
from .model import Model
from .reference import Reference, parse_reference
from .samplespace import SampleSpace, Universe

# 2^28 states is the refusal threshold: the largest job worth attempting
# on one core (an 8-node undirected binary space) sits exactly at it, so
# anything that size or larger needs force=True.
STATE_LIMIT = 1 << 28


@dataclass
class EnumTable:
    """Distinct statistic vectors with aggregated reference weights."""

    stats: np.ndarray        # rows x p, lexicographically sorted
    weights: np.ndarray      # sum of h(y) over networks in each row
    total_networks: int
    stat_names: list

    def __len__(self) -> int:
        return self.stats.shape[0]

    def log_kappa(self, eta) -> float:
        """log of the normalizing constant at canonical parameters eta."""
        eta = np.asarray(eta, float)
        return float(logsumexp(np.log(self.weights) + self.stats @ eta))


def _n_states(m: int, ref: Reference) -> int:
    if ref.name == "Bernoulli":
        return 1 << m
    support = ref.finite_support()
    if support is None:
        raise ModelError(
            f"the {ref.name} reference has infinite support; "
            "exhaustive enumeration is not possible")
    return len(support) ** m


def _space_of(model: Model, universe) -> SampleSpace:
    from .sampler import as_sample_space, full_space
    if universe is None:
        return full_space(model.net)
    return as_sample_space(universe)


def _aggregate(rows: np.ndarray, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Merge duplicate rows, returning lexicographically sorted output."""
    uniq, inverse = np.unique(rows, axis=0, return_inverse=True)
    w = np.zeros(len(uniq))
    np.add.at(w, inverse, weights)
    return uniq, w


def allstats(model: Model, universe=None, reference="Bernoulli",
             force: bool = False, start=None) -> EnumTable:
    """Visit every filling of the free dyads and tabulate the statistics.

    Non-free dyads keep their values from `start` (default: the model's
    own network) plus any pinned values in the sample space.
    """
    space = _space_of(model, universe)
    if space.edges_fixed or space.maxout is not None:
        raise UnsupportedFeatureError(
            "enumeration supports only dyad-level constraints "
            "(fixed edge counts and degree bounds do not factor over dyads)")
    uni = space.universe
    ref = parse_reference(reference)
    m = uni.size
    n_states = _n_states(m, ref)
    if n_states >= STATE_LIMIT and not force:
        raise EnumerationLimitError(
            f"enumeration requires {n_states} states (limit {STATE_LIMIT}); "
            "pass force=True to run anyway")

    from .sampler import _apply_fixed, _start_state
    dense = _start_state(start, model)
    _apply_fixed(dense, space)
    free_t, free_h = uni.free_arrays()

    if ref.name == "Bernoulli":
        rows, weights = _enum_binary(model, dense, free_t, free_h)
    else:
        rows, weights = _enum_valued(model, dense, free_t, free_h, ref)
    rows, weights = _aggregate(rows, weights)
    return EnumTable(rows, weights, n_states, list(model.stat_names))


def _enum_binary(model, dense, free_t, free_h):
    for k in range(len(free_t)):
        dense.set(int(free_t[k]), int(free_h[k]), 0.0)
    program = compile_chain(model)
    if program is None:
        return _enum_binary_generic(model, dense, free_t, free_h)
    y = np.ascontiguousarray(dense.y, float)
    stats0 = program.init_raw(dense)
    with _kernels.overflow_guard():
        keys, weights, used, _count = _kernels.gray_enum(
            y, bool(dense.directed),
            np.asarray(free_t, np.int64), np.asarray(free_h, np.int64),
            stats0, *program.kernel_args())
    mask = used != 0
    return keys[mask] @ program.L.T, weights[mask]


def _enum_binary_generic(model, dense, free_t, free_h):
    m = len(free_t)
    stats = model.stats(dense)
    agg: dict[bytes, list] = {}

    def add(s):
        key = s.tobytes()
        slot = agg.get(key)
        if slot is None:
            agg[key] = [s.copy(), 1.0]
        else:
            slot[1] += 1.0

    add(stats)
    for c in range(1, 1 << m):
        b = (c & -c).bit_length() - 1
        i, j = int(free_t[b]), int(free_h[b])
        new = 0.0 if dense.y[i, j] != 0.0 else 1.0
        stats = stats + model.change(dense, i, j, new)
        dense.set(i, j, new)
        add(stats)
    rows = np.array([v[0] for v in agg.values()])
    weights = np.array([v[1] for v in agg.values()])
    return rows, weights


def _enum_valued(model, dense, free_t, free_h, ref: Reference):
    support = ref.finite_support()
    m = len(free_t)
    for k in range(m):
        dense.set(int(free_t[k]), int(free_h[k]), support[0])
    log_h0 = sum(ref.log_h(support[0]) for _ in range(m))
    agg: dict[bytes, list] = {}

    def add(s, w):
        key = s.tobytes()
        slot = agg.get(key)
        if slot is None:
            agg[key] = [s.copy(), w]
        else:
            slot[1] += w

    def rec(k, stats, log_h):
        if k == m:
            add(stats, math.exp(log_h))
            return
        i, j = int(free_t[k]), int(free_h[k])
        base = float(dense.y[i, j])
        cur = base
        for v in support:
            if v != cur:
                stats = stats + model.change(dense, i, j, v)
                dense.set(i, j, v)
                log_h += ref.log_h(v) - ref.log_h(cur)
                cur = v
            rec(k + 1, stats, log_h)
        if cur != base:
            dense.set(i, j, base)

    rec(0, model.stats(dense), log_h0)
    rows = np.array([v[0] for v in agg.values()])
    weights = np.array([v[1] for v in agg.values()])
    return rows, weights


def log_h_free(dense, universe: Universe, ref: Reference) -> float:
    """Reference log-weight of a state, over free dyads only.

    Weights in an EnumTable cover the free dyads, so likelihoods must
    score the observed network the same way; the fixed-dyad factor is a
    constant that cancels.
    """
    t, h = universe.free_arrays()
    return float(sum(ref.log_h(float(dense.y[t[k], h[k]]))
                     for k in range(len(t))))


def exact_loglik(theta, model: Model, table: EnumTable, obs_stats,
                 log_h_obs: float = 0.0) -> float:
    """eta'g(y_obs) + log h(y_obs) - log kappa, all terms exact."""
    eta = model.eta(np.asarray(theta, float))
    lk = table.log_kappa(eta)
    if not np.isfinite(lk):
        raise ModelError("normalizing constant is not finite at these coefficients")
    return float(np.asarray(obs_stats, float) @ eta + log_h_obs - lk)
