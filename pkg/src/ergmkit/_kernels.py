"""Hot loops shared by the sampler and the enumerator.

Every function here is written in a numba-compatible subset of Python.
When numba is importable and ERGMKIT_JIT is not "0", the functions are
compiled with @njit; otherwise the same source runs as plain Python over
NumPy scalars, so both paths produce bit-identical results (the RNG is
integer-only and the float arithmetic is evaluated in the same order).

The pure-Python path wraps uint64 arithmetic that numpy flags as scalar
overflow; callers silence it through `overflow_guard()`.
"""

from __future__ import annotations

import math
import os
from contextlib import nullcontext

import numpy as np

JIT_ENABLED = os.environ.get("ERGMKIT_JIT", "1") != "0"
if JIT_ENABLED:
    try:
        from numba import njit
    except ImportError:        # pragma: no cover - numba present in normal installs
        JIT_ENABLED = False

if not JIT_ENABLED:
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn
        return wrap


def overflow_guard():
    """Context manager silencing uint64 wraparound warnings (fallback path)."""
    if JIT_ENABLED:
        return nullcontext()
    return np.errstate(over="ignore")


# ---------------------------------------------------------------------------
# xoshiro256++ on a uint64[4] state array (twin of rng.Xoshiro256PP)

@njit(cache=True)
def _next_u64(s):
    s0 = s[0]
    s1 = s[1]
    s2 = s[2]
    s3 = s[3]
    x = s0 + s3
    out = ((x << np.uint64(23)) | (x >> np.uint64(41))) + s0
    t = s1 << np.uint64(17)
    s2 = s2 ^ s0
    s3 = s3 ^ s1
    s1 = s1 ^ s2
    s0 = s0 ^ s3
    s2 = s2 ^ t
    s3 = (s3 << np.uint64(45)) | (s3 >> np.uint64(19))
    s[0] = s0
    s[1] = s1
    s[2] = s2
    s[3] = s3
    return out


@njit(cache=True)
def _uniform(s):
    return np.float64(_next_u64(s) >> np.uint64(11)) * (2.0 ** -53)


@njit(cache=True)
def _below(s, n):
    """Uniform int in [0, n), rejection sampled to avoid modulo bias."""
    un = np.uint64(n)
    r = (np.uint64(0) - un) % un
    while True:
        v = _next_u64(s)
        if r == np.uint64(0) or v <= np.uint64(0) - r - np.uint64(1):
            return np.int64(v % un)


@njit(cache=True)
def _geom_half(s):
    """Geometric(1/2) on {1,2,...}: one draw, count trailing one-bits."""
    v = _next_u64(s)
    k = 1
    while (v & np.uint64(1)) == np.uint64(1) and k < 64:
        v = v >> np.uint64(1)
        k += 1
    return k


@njit(cache=True)
def fill_u64(s, out):
    for i in range(out.shape[0]):
        out[i] = _next_u64(s)


# ---------------------------------------------------------------------------
# change statistics: dyadwise factor programs plus coded structural terms

ST_MUTUAL, ST_TRIANGLE, ST_TTRIPLE, ST_TRANSTIES, ST_CYCTIES, \
    ST_ISOLATES, ST_DEGREE = 1, 2, 3, 4, 5, 6, 7


@njit(cache=True)
def _fac_val(x, v, u, p0, p1, p2, cmp, rhs):
    if u == 0:                       # value itself
        tv = v
    elif u == 1:                     # nonzero
        tv = 1.0 if v != 0.0 else 0.0
    elif u == 2:                     # at least
        tv = 1.0 if v >= p0 else 0.0
    elif u == 3:                     # at most
        tv = 1.0 if v <= p0 else 0.0
    elif u == 4:                     # equal within tolerance
        tv = 1.0 if abs(v - p0) <= p1 else 0.0
    elif u == 5:                     # greater
        tv = 1.0 if v > p0 else 0.0
    elif u == 6:                     # smaller
        tv = 1.0 if v < p0 else 0.0
    elif u == 7:                     # in interval; p2 encodes open ends
        if p2 == 1.0 or p2 == 3.0:
            lo_ok = v > p0
        else:
            lo_ok = v >= p0
        if p2 == 2.0 or p2 == 3.0:
            hi_ok = v < p1
        else:
            hi_ok = v <= p1
        tv = 1.0 if (lo_ok and hi_ok) else 0.0
    elif u == 8:                     # power
        tv = v ** p0
    else:                            # constant one
        tv = 1.0
    raw = x * tv
    if cmp == 0:
        return raw
    if cmp == 1:
        return 1.0 if raw == rhs else 0.0
    if cmp == 2:
        return 1.0 if raw != rhs else 0.0
    if cmp == 3:
        return 1.0 if raw < rhs else 0.0
    if cmp == 4:
        return 1.0 if raw <= rhs else 0.0
    if cmp == 5:
        return 1.0 if raw > rhs else 0.0
    return 1.0 if raw >= rhs else 0.0


@njit(cache=True)
def _closure_contrib(y, p, q, cyclical):
    if y[p, q] == 0.0:
        return 0.0
    n = y.shape[0]
    if cyclical:
        for k in range(n):
            if y[q, k] != 0.0 and y[k, p] != 0.0:
                return 1.0
    else:
        for k in range(n):
            if y[p, k] != 0.0 and y[k, q] != 0.0:
                return 1.0
    return 0.0


@njit(cache=True)
def _closure_affected_sum(y, i, j, cyclical):
    n = y.shape[0]
    s = _closure_contrib(y, i, j, cyclical)
    if cyclical:
        for p in range(n):
            if y[j, p] != 0.0:
                s += _closure_contrib(y, p, i, True)
        for q in range(n):
            if y[q, i] != 0.0:
                s += _closure_contrib(y, j, q, True)
    else:
        for q in range(n):
            if y[j, q] != 0.0:
                s += _closure_contrib(y, i, q, False)
        for p in range(n):
            if y[p, i] != 0.0:
                s += _closure_contrib(y, p, j, False)
    return s


@njit(cache=True)
def _struct_delta(code, param, y, outdeg, indeg, directed, i, j, old, new):
    # pure: closure codes (which need a temporary write) live in _delta_stats
    n = y.shape[0]
    bnew = 1.0 if new != 0.0 else 0.0
    bold = 1.0 if old != 0.0 else 0.0
    dnz = bnew - bold
    if code == ST_MUTUAL:
        r = y[j, i]
        form = int(param)
        if form == 0:
            return new * r - old * r
        if form == 1:
            return min(new, r) - min(old, r)
        if form == 2:
            return math.sqrt(new * r) - math.sqrt(old * r)
        return -abs(new - r) + abs(old - r)
    if code == ST_TRIANGLE:
        if dnz == 0.0:
            return 0.0
        d = 0.0
        for k in range(n):
            if y[i, k] != 0.0 and y[j, k] != 0.0:
                d += 1.0
        return dnz * d
    if code == ST_TTRIPLE:
        if dnz == 0.0:
            return 0.0
        two = 0.0
        for k in range(n):
            ik = 1.0 if y[i, k] != 0.0 else 0.0
            jk = 1.0 if y[j, k] != 0.0 else 0.0
            ki = 1.0 if y[k, i] != 0.0 else 0.0
            kj = 1.0 if y[k, j] != 0.0 else 0.0
            two += jk * ik + ki * kj + ik * kj
        return dnz * two
    if code == ST_ISOLATES:
        if dnz == 0.0:
            return 0.0
        idb = int(dnz)
        ti = outdeg[i] + (indeg[i] if directed else 0)
        tj = outdeg[j] + (indeg[j] if directed else 0)
        out = 0.0
        out += (1.0 if ti + idb == 0 else 0.0) - (1.0 if ti == 0 else 0.0)
        out += (1.0 if tj + idb == 0 else 0.0) - (1.0 if tj == 0 else 0.0)
        return out
    if code == ST_DEGREE:
        if dnz == 0.0:
            return 0.0
        idb = int(dnz)
        d = int(param)
        di = outdeg[i]
        dj = outdeg[j]
        out = 0.0
        out += (1.0 if di + idb == d else 0.0) - (1.0 if di == d else 0.0)
        out += (1.0 if dj + idb == d else 0.0) - (1.0 if dj == d else 0.0)
        return out
    return 0.0


@njit(cache=True)
def _find_run(run_prefix, k):
    lo = 0
    hi = run_prefix.shape[0] - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if run_prefix[mid] <= k:
            lo = mid
        else:
            hi = mid
    return lo


# ---------------------------------------------------------------------------
# Metropolis-Hastings chain

# proposal modes
P_TNT, P_SWAP, P_VALUED = 0, 1, 2
# value kernels
K_NONE, K_DISCUNIF, K_BINOMIAL, K_WALK, K_UNIF = 0, 1, 2, 3, 4
# h-ratio families
H_CONST, H_POISSON, H_BINOMIAL = 0, 1, 2

WALK_JUMP = 0.125   # zero-jump mixing weight of the count random walk


@njit(cache=True)
def chain_kernel(y, directed,
                 tails, heads, run_starts, run_lengths, run_prefix, free_size,
                 proposal_mode, ref_code, ref_a, ref_b, trials, href_code,
                 eta, stats,
                 dw_stat, fac_start, fac_X, fac_u, fac_p, fac_cmp, fac_rhs,
                 st_stat, st_code, st_param,
                 maxout, ceiling,
                 burnin, interval, samplesize,
                 rng, out_stats):
    """Run one chain; returns (accepted, steps, aborted, rows_done).

    The caller guarantees free_size > 0 and, for P_SWAP, that both a tie
    and a non-tie exist among the free dyads. Draw order per step is part
    of the contract: the pure-Python twin must consume the stream
    identically.
    """
    n = y.shape[0]
    n_raw = stats.shape[0]
    delta = np.zeros(n_raw)

    outdeg = np.zeros(n, np.int64)
    indeg = np.zeros(n, np.int64)
    for a in range(n):
        for b in range(n):
            if a != b and y[a, b] != 0.0:
                outdeg[a] += 1
                indeg[b] += 1

    # tie bookkeeping over free dyads (binary proposals only)
    n_lin = tails.shape[0]
    tie_pos = np.full(n_lin, -1, np.int64)
    tie_list = np.empty(free_size, np.int64)
    nontie_pos = np.full(n_lin, -1, np.int64)
    nontie_list = np.empty(free_size, np.int64)
    n_tie = 0
    n_non = 0
    if proposal_mode != P_VALUED:
        for r in range(run_starts.shape[0]):
            for lin in range(run_starts[r], run_starts[r] + run_lengths[r]):
                if y[tails[lin], heads[lin]] != 0.0:
                    tie_pos[lin] = n_tie
                    tie_list[n_tie] = lin
                    n_tie += 1
                elif proposal_mode == P_SWAP:
                    nontie_pos[lin] = n_non
                    nontie_list[n_non] = lin
                    n_non += 1

    accepted = 0
    steps = 0
    total = burnin + samplesize * interval
    row = 0
    next_record = burnin + interval

    while steps < total:
        steps += 1
        # ---- propose ---------------------------------------------------
        i = 0
        j = 0
        i2 = -1
        j2 = -1
        old = 0.0
        new = 0.0
        lin = -1
        lin2 = -1
        log_q = 0.0
        ok = True

        if proposal_mode == P_TNT:
            u_branch = _uniform(rng)
            if n_tie > 0 and u_branch < 0.5:
                lin = tie_list[_below(rng, n_tie)]
            else:
                k = _below(rng, free_size)
                r = _find_run(run_prefix, k)
                lin = run_starts[r] + (k - run_prefix[r])
            i = tails[lin]
            j = heads[lin]
            old = y[i, j]
            new = 0.0 if old != 0.0 else 1.0
            D = np.float64(free_size)
            if old == 0.0:   # toggle on
                fwd = 0.5 / D if n_tie > 0 else 1.0 / D
                rev = 0.5 / np.float64(n_tie + 1) + 0.5 / D
            else:            # toggle off
                fwd = 0.5 / np.float64(n_tie) + 0.5 / D
                rev = 0.5 / D if n_tie > 1 else 1.0 / D
            log_q = math.log(rev) - math.log(fwd)
        elif proposal_mode == P_SWAP:
            lin = tie_list[_below(rng, n_tie)]
            lin2 = nontie_list[_below(rng, n_non)]
            i = tails[lin]
            j = heads[lin]
            i2 = tails[lin2]
            j2 = heads[lin2]
            old = 1.0
            new = 0.0
            log_q = 0.0
        else:
            k = _below(rng, free_size)
            r = _find_run(run_prefix, k)
            lin = run_starts[r] + (k - run_prefix[r])
            i = tails[lin]
            j = heads[lin]
            old = y[i, j]
            if ref_code == K_DISCUNIF:
                span = int(ref_b - ref_a)
                v = ref_a + np.float64(_below(rng, span))
                if v >= old:
                    v += 1.0
                new = v
            elif ref_code == K_BINOMIAL:
                v = np.float64(_below(rng, trials))
                if v >= old:
                    v += 1.0
                new = v
            elif ref_code == K_WALK:
                if old > 0.0:
                    u_jump = _uniform(rng)
                    if u_jump < WALK_JUMP:
                        new = 0.0
                    else:
                        d = np.float64(_geom_half(rng))
                        u_sign = _uniform(rng)
                        new = old + d if u_sign < 0.5 else old - d
                else:
                    new = np.float64(_geom_half(rng))
                if new < 0.0:
                    ok = False
                elif old == 0.0:
                    # forward 2^-d walk up; reverse jump or walk down
                    log_q = math.log(WALK_JUMP + (1.0 - WALK_JUMP) * 0.5
                                     * 0.5 ** new) - new * math.log(0.5)
                elif new == 0.0:
                    log_q = old * math.log(0.5) \
                        - math.log(WALK_JUMP + (1.0 - WALK_JUMP) * 0.5 * 0.5 ** old)
                else:
                    log_q = 0.0
            else:            # continuous uniform
                new = ref_a + (ref_b - ref_a) * _uniform(rng)
                log_q = 0.0

        # ---- hard degree bound -----------------------------------------
        if ok and maxout >= 0:
            if proposal_mode == P_SWAP:
                od = outdeg[i2]
                if directed:
                    if i2 == i:
                        od -= 1
                else:
                    if i2 == i or i2 == j:
                        od -= 1
                if od + 1 > maxout:
                    ok = False
                if ok and not directed:
                    od2 = outdeg[j2]
                    if j2 == i or j2 == j:
                        od2 -= 1
                    if od2 + 1 > maxout:
                        ok = False
            elif new != 0.0 and old == 0.0:
                if outdeg[i] + 1 > maxout:
                    ok = False
                if not directed and outdeg[j] + 1 > maxout:
                    ok = False

        if ok:
            # ---- change statistics -------------------------------------
            # The delta body is written out here (and again in gray_enum)
            # instead of being a helper: a call that both branches and
            # mutates arrays keeps reference-count traffic in the hot loop.
            for t in range(n_raw):
                delta[t] = 0.0
            n_legs = 2 if proposal_mode == P_SWAP else 1
            li = i
            lj = j
            lold = old
            lnew = new
            for leg in range(n_legs):
                if leg == 1:
                    li = i2
                    lj = j2
                    lold = 0.0
                    lnew = 1.0
                for t in range(dw_stat.shape[0]):
                    c_new = 1.0
                    c_old = 1.0
                    for f in range(fac_start[t], fac_start[t + 1]):
                        x = fac_X[f, li, lj]
                        if c_new != 0.0:
                            c_new *= _fac_val(x, lnew, fac_u[f], fac_p[f, 0],
                                              fac_p[f, 1], fac_p[f, 2],
                                              fac_cmp[f], fac_rhs[f])
                        if c_old != 0.0:
                            c_old *= _fac_val(x, lold, fac_u[f], fac_p[f, 0],
                                              fac_p[f, 1], fac_p[f, 2],
                                              fac_cmp[f], fac_rhs[f])
                        if c_new == 0.0 and c_old == 0.0:
                            break
                    delta[dw_stat[t]] += c_new - c_old
                for t in range(st_code.shape[0]):
                    code = st_code[t]
                    if code == ST_TRANSTIES or code == ST_CYCTIES:
                        if (lnew != 0.0) != (lold != 0.0):
                            cyc = code == ST_CYCTIES
                            before = _closure_affected_sum(y, li, lj, cyc)
                            keep = y[li, lj]
                            y[li, lj] = 1.0 if lnew != 0.0 else 0.0
                            after = _closure_affected_sum(y, li, lj, cyc)
                            y[li, lj] = keep
                            delta[st_stat[t]] += after - before
                    else:
                        delta[st_stat[t]] += _struct_delta(
                            code, st_param[t], y, outdeg, indeg, directed,
                            li, lj, lold, lnew)
                if proposal_mode == P_SWAP and leg == 0:
                    # detach the removed tie so leg 2 sees the updated graph
                    outdeg[i] -= 1
                    if directed:
                        indeg[j] -= 1
                    else:
                        outdeg[j] -= 1
                    y[i, j] = 0.0
                    if not directed:
                        y[j, i] = 0.0

            # ---- acceptance ---------------------------------------------
            if proposal_mode == P_SWAP:
                h_ratio = 0.0
            elif href_code == H_POISSON:
                h_ratio = math.lgamma(old + 1.0) - math.lgamma(new + 1.0)
            elif href_code == H_BINOMIAL:
                tr = np.float64(trials)
                h_ratio = (math.lgamma(old + 1.0)
                           + math.lgamma(tr - old + 1.0)
                           - math.lgamma(new + 1.0)
                           - math.lgamma(tr - new + 1.0))
            else:
                h_ratio = 0.0

            log_lr = h_ratio + log_q
            for t in range(n_raw):
                log_lr += eta[t] * delta[t]

            u_acc = _uniform(rng)
            accept = log_lr >= 0.0 or u_acc < math.exp(log_lr)

            if proposal_mode == P_SWAP:
                if accept:
                    outdeg[i2] += 1
                    if directed:
                        indeg[j2] += 1
                    else:
                        outdeg[j2] += 1
                    y[i2, j2] = 1.0
                    if not directed:
                        y[j2, i2] = 1.0
                    for t in range(n_raw):
                        stats[t] += delta[t]
                    tie_pos[lin2] = tie_pos[lin]
                    tie_list[tie_pos[lin]] = lin2
                    tie_pos[lin] = -1
                    nontie_pos[lin] = nontie_pos[lin2]
                    nontie_list[nontie_pos[lin2]] = lin
                    nontie_pos[lin2] = -1
                    accepted += 1
                else:
                    outdeg[i] += 1
                    if directed:
                        indeg[j] += 1
                    else:
                        outdeg[j] += 1
                    y[i, j] = 1.0
                    if not directed:
                        y[j, i] = 1.0
            elif accept:
                dnz = (1 if new != 0.0 else 0) - (1 if old != 0.0 else 0)
                outdeg[i] += dnz
                if directed:
                    indeg[j] += dnz
                else:
                    outdeg[j] += dnz
                y[i, j] = new
                if not directed:
                    y[j, i] = new
                for t in range(n_raw):
                    stats[t] += delta[t]
                if proposal_mode == P_TNT:
                    if new != 0.0:
                        tie_pos[lin] = n_tie
                        tie_list[n_tie] = lin
                        n_tie += 1
                    else:
                        last = tie_list[n_tie - 1]
                        tie_list[tie_pos[lin]] = last
                        tie_pos[last] = tie_pos[lin]
                        tie_pos[lin] = -1
                        n_tie -= 1
                accepted += 1
                if abs(new) > ceiling:
                    return accepted, steps, 1, row

        if steps == next_record:
            for t in range(n_raw):
                out_stats[row, t] = stats[t]
            row += 1
            next_record += interval

    return accepted, steps, 0, row


# ---------------------------------------------------------------------------
# exhaustive binary enumeration by Gray code

@njit(cache=True)
def _ht_slot(keys, used, row_bits, row, cap):
    h = np.uint64(1469598103934665603)
    for t in range(row.shape[0]):
        h = h ^ row_bits[t]
        h = h * np.uint64(1099511628211)
    idx = np.int64(h & np.uint64(cap - 1))
    while True:
        if used[idx] == 0:
            return idx
        hit = True
        for t in range(row.shape[0]):
            if keys[idx, t] != row[t]:
                hit = False
                break
        if hit:
            return idx
        idx += 1
        if idx == cap:
            idx = 0


@njit(cache=True)
def gray_enum(y, directed, free_t, free_h, stats0,
              dw_stat, fac_start, fac_X, fac_u, fac_p, fac_cmp, fac_rhs,
              st_stat, st_code, st_param):
    """Visit all 2^m fillings of the free dyads, tallying stats rows.

    Returns (keys, weights, used, count). Near-duplicate float rows (from
    accumulated rounding of non-integer statistics) stay separate, which
    only splits a weight across rows and is harmless downstream.
    """
    n = y.shape[0]
    m = free_t.shape[0]
    n_raw = stats0.shape[0]

    outdeg = np.zeros(n, np.int64)
    indeg = np.zeros(n, np.int64)
    for a in range(n):
        for b in range(n):
            if a != b and y[a, b] != 0.0:
                outdeg[a] += 1
                indeg[b] += 1

    cap = 1024
    keys = np.zeros((cap, n_raw))
    weights = np.zeros(cap)
    used = np.zeros(cap, np.uint8)
    count = 0

    stats = stats0.copy()
    delta = np.zeros(n_raw)
    fbuf = np.empty(n_raw, np.float64)
    ubuf = fbuf.view(np.uint64)

    total = np.int64(1) << np.int64(m)
    c = np.int64(0)
    while c < total:
        if c > 0:
            cc = c
            b = 0
            while (cc & np.int64(1)) == 0:
                cc >>= 1
                b += 1
            i = free_t[b]
            j = free_h[b]
            old = y[i, j]
            new = 1.0 - old
            # delta body inlined, as in chain_kernel
            for t in range(n_raw):
                delta[t] = 0.0
            for t in range(dw_stat.shape[0]):
                c_new = 1.0
                c_old = 1.0
                for f in range(fac_start[t], fac_start[t + 1]):
                    x = fac_X[f, i, j]
                    if c_new != 0.0:
                        c_new *= _fac_val(x, new, fac_u[f], fac_p[f, 0],
                                          fac_p[f, 1], fac_p[f, 2],
                                          fac_cmp[f], fac_rhs[f])
                    if c_old != 0.0:
                        c_old *= _fac_val(x, old, fac_u[f], fac_p[f, 0],
                                          fac_p[f, 1], fac_p[f, 2],
                                          fac_cmp[f], fac_rhs[f])
                    if c_new == 0.0 and c_old == 0.0:
                        break
                delta[dw_stat[t]] += c_new - c_old
            for t in range(st_code.shape[0]):
                code = st_code[t]
                if code == ST_TRANSTIES or code == ST_CYCTIES:
                    if (new != 0.0) != (old != 0.0):
                        cyc = code == ST_CYCTIES
                        before = _closure_affected_sum(y, i, j, cyc)
                        keep = y[i, j]
                        y[i, j] = 1.0 if new != 0.0 else 0.0
                        after = _closure_affected_sum(y, i, j, cyc)
                        y[i, j] = keep
                        delta[st_stat[t]] += after - before
                else:
                    delta[st_stat[t]] += _struct_delta(
                        code, st_param[t], y, outdeg, indeg, directed,
                        i, j, old, new)
            dnz = (1 if new != 0.0 else 0) - (1 if old != 0.0 else 0)
            outdeg[i] += dnz
            if directed:
                indeg[j] += dnz
            else:
                outdeg[j] += dnz
            y[i, j] = new
            if not directed:
                y[j, i] = new
            for t in range(n_raw):
                stats[t] += delta[t]

        for t in range(n_raw):
            fbuf[t] = stats[t]
        slot = _ht_slot(keys, used, ubuf, fbuf, cap)
        if used[slot] == 0:
            # grow at load 3/4, only when inserting a new key
            if (count + 1) * 4 > cap * 3:
                ncap = cap * 2
                nkeys = np.zeros((ncap, n_raw))
                nweights = np.zeros(ncap)
                nused = np.zeros(ncap, np.uint8)
                for s_idx in range(cap):
                    if used[s_idx] == 1:
                        for t in range(n_raw):
                            fbuf[t] = keys[s_idx, t]
                        nslot = _ht_slot(nkeys, nused, ubuf, fbuf, ncap)
                        nused[nslot] = 1
                        for t in range(n_raw):
                            nkeys[nslot, t] = keys[s_idx, t]
                        nweights[nslot] = weights[s_idx]
                keys = nkeys
                weights = nweights
                used = nused
                cap = ncap
                for t in range(n_raw):
                    fbuf[t] = stats[t]
                slot = _ht_slot(keys, used, ubuf, fbuf, cap)
            used[slot] = 1
            for t in range(n_raw):
                keys[slot, t] = stats[t]
            count += 1
        weights[slot] += 1.0
        c += 1

    return keys, weights, used, count
