"""Metropolis-Hastings simulation over constrained dyad universes.

One step: draw a proposal (a dyad, plus a value for valued references),
veto it against hard predicates, then accept with probability
min(1, exp(eta'delta) * h-ratio * proposal-ratio). Binary models use a
tie/no-tie mixture (an existing edge with probability 1/2, else a uniform
free dyad); under a fixed edge count a swap proposal toggles one edge off
and one non-edge on. Valued references draw from per-reference kernels:

- DiscUnif(a, b): uniform on the support minus the current value; the
  ratio is 1.
- Binomial(trials): uniform on {0..trials} minus the current value.
- Poisson / Geometric: from 0, walk up by Delta ~ Geometric(1/2); from a
  positive value, jump to 0 with probability WALK_JUMP, else move by
  +/-Delta. q(v->0) = J + (1-J)/2 * 2^-v and q(0->v) = 2^-v; moves
  between positive values are symmetric. (The Delta draw is capped at 64,
  an error of 2^-64 in the tail.)
- Unif(a, b): uniform on [a, b] independent of the current value.

Chains are deterministic given the seed. Models whose statistics lower
onto the kernel program run compiled (or through the kernel's plain twin
when ERGMKIT_JIT=0); everything else uses the generic path below, which
consumes the random stream with the exact same protocol.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from ._compile import compile_chain
from .errors import DegeneracyError, ModelError, UnsupportedFeatureError
from .model import Model
from .network import DenseNet, Network
from .reference import Reference, parse_reference
from .rng import Xoshiro256PP, chain_seed, seed_state
from .samplespace import SampleSpace, Universe

WALK_JUMP = _kernels.WALK_JUMP


@dataclass
class ChainConfig:
    """Chain lengths and reproducibility knobs."""

    burnin: int = 2 ** 14
    interval: int = 2 ** 7
    samplesize: int = 2 ** 10
    seed: int = 0
    value_ceiling: float = 1e6


@dataclass
class SampleOut:
    stats: np.ndarray           # samplesize x p, one row per retained draw
    final_net: Network
    acceptance_rate: float


def as_sample_space(universe) -> SampleSpace:
    if isinstance(universe, SampleSpace):
        return universe
    if isinstance(universe, Universe):
        return SampleSpace(universe=universe)
    raise ModelError("expected a Universe or SampleSpace")


def full_space(net: Network) -> SampleSpace:
    shape = DenseNet(np.zeros((net.n, net.n)), net.directed, net.bipartite)
    tails, heads = shape.dyad_list()
    return SampleSpace(universe=Universe(net, np.ones(len(tails), bool),
                                         tails, heads))


def _ref_codes(ref: Reference, space: SampleSpace) -> tuple[int, int, int]:
    """(proposal mode, value-kernel code, h-ratio code)."""
    if ref.name == "Bernoulli":
        mode = _kernels.P_SWAP if space.edges_fixed else _kernels.P_TNT
        return mode, _kernels.K_NONE, _kernels.H_CONST
    if space.edges_fixed:
        raise UnsupportedFeatureError(
            "a fixed edge count is only supported with the Bernoulli reference")
    if ref.name == "DiscUnif":
        return _kernels.P_VALUED, _kernels.K_DISCUNIF, _kernels.H_CONST
    if ref.name == "Binomial":
        return _kernels.P_VALUED, _kernels.K_BINOMIAL, _kernels.H_BINOMIAL
    if ref.name in ("Poisson", "Geometric"):
        href = _kernels.H_POISSON if ref.name == "Poisson" else _kernels.H_CONST
        return _kernels.P_VALUED, _kernels.K_WALK, href
    if ref.name == "Unif":
        return _kernels.P_VALUED, _kernels.K_UNIF, _kernels.H_CONST
    raise ModelError(f"no proposal kernel for reference {ref.name!r}")


def _check_support(dense: DenseNet, uni: Universe, ref: Reference) -> None:
    t, h = uni.free_arrays()
    for k in range(len(t)):
        v = float(dense.y[t[k], h[k]])
        if not ref.in_support(v):
            raise ModelError(
                f"initial value {v:g} at dyad ({t[k] + 1},{h[k] + 1}) is "
                f"outside the {ref.name} support")


def _frozen(dense: DenseNet, uni: Universe, ref: Reference, mode: int) -> bool:
    """True when no proposal can ever move the state."""
    if uni.size == 0:
        return True
    if ref.name == "DiscUnif" and int(ref.b - ref.a) == 0:
        return True
    if mode == _kernels.P_SWAP:
        t, h = uni.free_arrays()
        ties = int(np.count_nonzero(dense.y[t, h]))
        return ties == 0 or ties == uni.size
    return False


def _diverged(ceiling: float):
    warnings.warn(
        f"sampler aborted: a dyad value exceeded {ceiling:g}; the "
        "coefficients appear to lie outside the valid parameter space "
        "(the normalizing constant diverges)", RuntimeWarning, stacklevel=3)
    raise DegeneracyError(
        f"simulation diverged: dyad values exceeded {ceiling:g}")


def _start_state(net0, model: Model) -> DenseNet:
    if net0 is None:
        return model.dense()
    if isinstance(net0, Network):
        return net0.to_dense()
    if isinstance(net0, DenseNet):
        return net0.copy()
    raise ModelError("net0 must be a Network or DenseNet")


def _apply_fixed(dense: DenseNet, space: SampleSpace) -> None:
    uni = space.universe
    for lin, val in space.fixed_values.items():
        dense.set(int(uni.tails[lin]), int(uni.heads[lin]), float(val))


# ---------------------------------------------------------------------------
# generic path: plain-Python twin of _kernels.chain_kernel

class GenericChain:
    """Chain state plus one MH step, mirroring the kernel draw for draw.

    Works for any model (uses Model.change); statistic values are model
    statistics directly, not the kernel's raw layout.
    """

    def __init__(self, dense: DenseNet, model: Model, eta: np.ndarray,
                 space: SampleSpace, ref: Reference, config: ChainConfig,
                 mode: int, ref_code: int, href_code: int):
        self.dense = dense
        self.model = model
        self.eta = np.asarray(eta, float)
        self.space = space
        self.uni = space.universe
        self.ref = ref
        self.config = config
        self.mode = mode
        self.ref_code = ref_code
        self.href_code = href_code
        self.rng = Xoshiro256PP(config.seed)
        self.stats = model.stats(dense)
        self.maxout = -1 if space.maxout is None else int(space.maxout)
        self.accepted = 0
        self.steps = 0
        self.aborted = False

        n = dense.n
        self.outdeg = np.zeros(n, np.int64)
        self.indeg = np.zeros(n, np.int64)
        for a in range(n):
            for b in range(n):
                if a != b and dense.y[a, b] != 0.0:
                    self.outdeg[a] += 1
                    self.indeg[b] += 1

        self.tie_list: list[int] = []
        self.tie_pos: dict[int, int] = {}
        self.nontie_list: list[int] = []
        self.nontie_pos: dict[int, int] = {}
        if mode != _kernels.P_VALUED:
            for rs, rl in zip(self.uni.run_starts, self.uni.run_lengths):
                for lin in range(int(rs), int(rs + rl)):
                    i, j = int(self.uni.tails[lin]), int(self.uni.heads[lin])
                    if dense.y[i, j] != 0.0:
                        self.tie_pos[lin] = len(self.tie_list)
                        self.tie_list.append(lin)
                    elif mode == _kernels.P_SWAP:
                        self.nontie_pos[lin] = len(self.nontie_list)
                        self.nontie_list.append(lin)

    # -- helpers ----------------------------------------------------------

    def _pick_free(self, k: int) -> int:
        rp = self.uni.run_prefix
        lo, hi = 0, len(rp) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if rp[mid] <= k:
                lo = mid
            else:
                hi = mid
        return int(self.uni.run_starts[lo] + (k - rp[lo]))

    def _apply(self, i: int, j: int, new: float) -> None:
        old = self.dense.y[i, j]
        if new != 0.0 and old == 0.0:
            self.outdeg[i] += 1
            if self.dense.directed:
                self.indeg[j] += 1
            else:
                self.outdeg[j] += 1
        elif new == 0.0 and old != 0.0:
            self.outdeg[i] -= 1
            if self.dense.directed:
                self.indeg[j] -= 1
            else:
                self.outdeg[j] -= 1
        self.dense.set(i, j, new)

    def _propose_value(self, old: float) -> tuple[float, float, bool]:
        """(new value, log proposal ratio, valid)."""
        rng = self.rng
        ref = self.ref
        if self.ref_code == _kernels.K_DISCUNIF:
            span = int(ref.b - ref.a)
            v = ref.a + float(rng.below(span))
            if v >= old:
                v += 1.0
            return v, 0.0, True
        if self.ref_code == _kernels.K_BINOMIAL:
            v = float(rng.below(ref.trials))
            if v >= old:
                v += 1.0
            return v, 0.0, True
        if self.ref_code == _kernels.K_WALK:
            if old > 0.0:
                u_jump = rng.uniform()
                if u_jump < WALK_JUMP:
                    new = 0.0
                else:
                    d = float(rng.geometric_half())
                    u_sign = rng.uniform()
                    new = old + d if u_sign < 0.5 else old - d
            else:
                new = float(rng.geometric_half())
            if new < 0.0:
                return new, 0.0, False
            if old == 0.0:
                log_q = math.log(WALK_JUMP + (1.0 - WALK_JUMP) * 0.5
                                 * 0.5 ** new) - new * math.log(0.5)
            elif new == 0.0:
                log_q = old * math.log(0.5) \
                    - math.log(WALK_JUMP + (1.0 - WALK_JUMP) * 0.5 * 0.5 ** old)
            else:
                log_q = 0.0
            return new, log_q, True
        new = ref.a + (ref.b - ref.a) * rng.uniform()
        return new, 0.0, True

    # -- one step -----------------------------------------------------------

    def step(self) -> bool:
        rng = self.rng
        uni = self.uni
        dense = self.dense
        directed = dense.directed
        self.steps += 1

        lin2 = -1
        i2 = j2 = -1
        ok = True
        if self.mode == _kernels.P_TNT:
            u_branch = rng.uniform()
            n_tie = len(self.tie_list)
            if n_tie > 0 and u_branch < 0.5:
                lin = self.tie_list[rng.below(n_tie)]
            else:
                lin = self._pick_free(rng.below(uni.size))
            i, j = int(uni.tails[lin]), int(uni.heads[lin])
            old = float(dense.y[i, j])
            new = 0.0 if old != 0.0 else 1.0
            D = float(uni.size)
            if old == 0.0:
                fwd = 0.5 / D if n_tie > 0 else 1.0 / D
                rev = 0.5 / float(n_tie + 1) + 0.5 / D
            else:
                fwd = 0.5 / float(n_tie) + 0.5 / D
                rev = 0.5 / D if n_tie > 1 else 1.0 / D
            log_q = math.log(rev) - math.log(fwd)
        elif self.mode == _kernels.P_SWAP:
            lin = self.tie_list[rng.below(len(self.tie_list))]
            lin2 = self.nontie_list[rng.below(len(self.nontie_list))]
            i, j = int(uni.tails[lin]), int(uni.heads[lin])
            i2, j2 = int(uni.tails[lin2]), int(uni.heads[lin2])
            old, new = 1.0, 0.0
            log_q = 0.0
        else:
            lin = self._pick_free(rng.below(uni.size))
            i, j = int(uni.tails[lin]), int(uni.heads[lin])
            old = float(dense.y[i, j])
            new, log_q, ok = self._propose_value(old)

        if ok and self.maxout >= 0:
            if self.mode == _kernels.P_SWAP:
                od = int(self.outdeg[i2])
                if directed:
                    if i2 == i:
                        od -= 1
                else:
                    if i2 == i or i2 == j:
                        od -= 1
                if od + 1 > self.maxout:
                    ok = False
                if ok and not directed:
                    od2 = int(self.outdeg[j2])
                    if j2 == i or j2 == j:
                        od2 -= 1
                    if od2 + 1 > self.maxout:
                        ok = False
            elif new != 0.0 and old == 0.0:
                if self.outdeg[i] + 1 > self.maxout:
                    ok = False
                if not directed and self.outdeg[j] + 1 > self.maxout:
                    ok = False

        if not ok:
            return False

        if self.mode == _kernels.P_SWAP:
            delta = self.model.change(dense, i, j, 0.0)
            self._apply(i, j, 0.0)
            delta = delta + self.model.change(dense, i2, j2, 1.0)
            h_ratio = 0.0
        else:
            delta = self.model.change(dense, i, j, new)
            h_ratio = self.ref.log_h_ratio(old, new)

        log_lr = h_ratio + log_q
        for t in range(len(delta)):
            log_lr += self.eta[t] * delta[t]

        u_acc = rng.uniform()
        accept = log_lr >= 0.0 or u_acc < math.exp(log_lr)

        if self.mode == _kernels.P_SWAP:
            if accept:
                self._apply(i2, j2, 1.0)
                self.stats = self.stats + delta
                self.tie_pos[lin2] = self.tie_pos[lin]
                self.tie_list[self.tie_pos[lin]] = lin2
                del self.tie_pos[lin]
                self.nontie_pos[lin] = self.nontie_pos[lin2]
                self.nontie_list[self.nontie_pos[lin2]] = lin
                del self.nontie_pos[lin2]
                self.accepted += 1
            else:
                self._apply(i, j, 1.0)
            return accept
        if accept:
            self._apply(i, j, new)
            self.stats = self.stats + delta
            if self.mode == _kernels.P_TNT:
                if new != 0.0:
                    self.tie_pos[lin] = len(self.tie_list)
                    self.tie_list.append(lin)
                else:
                    last = self.tie_list[-1]
                    pos = self.tie_pos[lin]
                    self.tie_list[pos] = last
                    self.tie_pos[last] = pos
                    self.tie_list.pop()
                    del self.tie_pos[lin]
            self.accepted += 1
            if abs(new) > self.config.value_ceiling:
                self.aborted = True
        return accept


def mh_step(chain: GenericChain) -> bool:
    """Advance a generic chain by one proposal; True when accepted."""
    return chain.step()


def _run_generic(dense, model, eta, space, ref, cfg, mode, ref_code,
                 href_code) -> SampleOut:
    chain = GenericChain(dense, model, eta, space, ref, cfg, mode,
                         ref_code, href_code)
    out = np.zeros((cfg.samplesize, model.nstat))
    for _ in range(cfg.burnin):
        chain.step()
        if chain.aborted:
            _diverged(cfg.value_ceiling)
    for row in range(cfg.samplesize):
        for _ in range(cfg.interval):
            chain.step()
            if chain.aborted:
                _diverged(cfg.value_ceiling)
        out[row] = chain.stats
    rate = chain.accepted / max(1, chain.steps)
    return SampleOut(out, dense.to_network(model.net), rate)


# ---------------------------------------------------------------------------
# public entry points

def run_chain(net0, model: Model, theta, config: ChainConfig | None = None,
              universe=None, reference="Bernoulli",
              force_generic: bool = False) -> SampleOut:
    """One chain of retained draws, spaced by `interval` after `burnin`."""
    cfg = config if config is not None else ChainConfig()
    space = full_space(model.net) if universe is None else as_sample_space(universe)
    ref = parse_reference(reference)
    uni = space.universe

    theta = np.asarray(theta, float)
    if not np.all(np.isfinite(theta)):
        raise ModelError("coefficients must be finite to simulate")
    eta_model = model.eta(theta)

    dense = _start_state(net0, model)
    _apply_fixed(dense, space)
    mode, ref_code, href_code = _ref_codes(ref, space)
    _check_support(dense, uni, ref)

    if _frozen(dense, uni, ref, mode):
        rows = np.tile(model.stats(dense), (cfg.samplesize, 1))
        return SampleOut(rows, dense.to_network(model.net), 0.0)

    program = None if force_generic else compile_chain(model)
    if program is None:
        return _run_generic(dense, model, eta_model, space, ref, cfg, mode,
                            ref_code, href_code)

    y = np.ascontiguousarray(dense.y, float)
    dense.y = y
    raw = program.init_raw(dense)
    eta_raw = program.L.T @ eta_model
    out = np.zeros((cfg.samplesize, program.n_raw))
    rng_arr = np.asarray(seed_state(cfg.seed), np.uint64)
    maxout = -1 if space.maxout is None else int(space.maxout)
    with _kernels.overflow_guard():
        acc, steps, aborted, _rows = _kernels.chain_kernel(
            y, bool(dense.directed),
            np.asarray(uni.tails, np.int64), np.asarray(uni.heads, np.int64),
            np.asarray(uni.run_starts, np.int64),
            np.asarray(uni.run_lengths, np.int64),
            np.asarray(uni.run_prefix, np.int64), int(uni.size),
            mode, ref_code, float(ref.a), float(ref.b), int(ref.trials),
            href_code, eta_raw, raw,
            *program.kernel_args(),
            maxout, float(cfg.value_ceiling),
            int(cfg.burnin), int(cfg.interval), int(cfg.samplesize),
            rng_arr, out)
    if aborted:
        _diverged(cfg.value_ceiling)
    stats = out @ program.L.T
    return SampleOut(stats, dense.to_network(model.net), acc / max(1, steps))


def sample(model: Model, theta, universe=None, reference="Bernoulli",
           config: ChainConfig | None = None, chains: int = 1, net0=None,
           force_generic: bool = False) -> SampleOut:
    """Retained draws, split across `chains` seeded sub-chains.

    Chain k runs on seed chain_seed(seed, k); rows merge in chain order,
    so the output is deterministic for any chain count.
    """
    cfg = config if config is not None else ChainConfig()
    if chains <= 1:
        return run_chain(net0, model, theta, cfg, universe, reference,
                         force_generic)
    base = cfg.samplesize // chains
    rem = cfg.samplesize % chains
    outs = []
    weights = []
    for k in range(chains):
        size = base + (1 if k < rem else 0)
        if size == 0:
            continue
        sub = replace(cfg, samplesize=size, seed=chain_seed(cfg.seed, k))
        outs.append(run_chain(net0, model, theta, sub, universe, reference,
                              force_generic))
        weights.append(cfg.burnin + size * cfg.interval)
    stats = np.vstack([o.stats for o in outs])
    rate = float(np.average([o.acceptance_rate for o in outs],
                            weights=weights))
    return SampleOut(stats, outs[-1].final_net, rate)


# ---------------------------------------------------------------------------
# simulated annealing toward target statistics

def san(model: Model, target, universe=None, reference="Bernoulli",
        config: ChainConfig | None = None, steps: int | None = None,
        net0=None) -> DenseNet:
    """Anneal dyad values to bring the statistics close to `target`.

    Minimizes a scale-weighted squared distance by single-dyad moves with
    a geometric temperature ladder; returns the best state visited.
    """
    cfg = config if config is not None else ChainConfig()
    space = full_space(model.net) if universe is None else as_sample_space(universe)
    ref = parse_reference(reference)
    uni = space.universe
    target = np.asarray(target, float)
    if target.shape != (model.nstat,):
        raise ModelError(f"expected {model.nstat} target statistics")

    dense = _start_state(net0, model)
    _apply_fixed(dense, space)
    mode, ref_code, href_code = _ref_codes(ref, space)
    _check_support(dense, uni, ref)
    if _frozen(dense, uni, ref, mode):
        return dense

    # eta is irrelevant to SAN; the chain is reused only for proposals
    chain = GenericChain(dense, model, np.zeros(model.nstat), space, ref,
                         cfg, mode, ref_code, href_code)
    rng = chain.rng
    w = 1.0 / np.maximum(1.0, np.abs(target))
    g = model.stats(dense)
    d = float(np.sum(w * (g - target) ** 2))
    best_d = d
    best_y = dense.y.copy()
    if steps is None:
        steps = max(1 << 16, 64 * uni.size)
    t_hi = max(d, 1.0)
    t_lo = 1e-4

    for s in range(steps):
        temp = t_hi * (t_lo / t_hi) ** (s / max(1, steps - 1))
        lin2 = -1
        ok = True
        if mode == _kernels.P_SWAP:
            if not chain.tie_list or not chain.nontie_list:
                break
            lin = chain.tie_list[rng.below(len(chain.tie_list))]
            lin2 = chain.nontie_list[rng.below(len(chain.nontie_list))]
            i, j = int(uni.tails[lin]), int(uni.heads[lin])
            i2, j2 = int(uni.tails[lin2]), int(uni.heads[lin2])
            old, new = 1.0, 0.0
        else:
            lin = chain._pick_free(rng.below(uni.size))
            i, j = int(uni.tails[lin]), int(uni.heads[lin])
            old = float(dense.y[i, j])
            if mode == _kernels.P_TNT:
                new = 0.0 if old != 0.0 else 1.0
            else:
                new, _lq, ok = chain._propose_value(old)
        if not ok:
            continue
        if chain.maxout >= 0 and new != 0.0 and old == 0.0:
            if chain.outdeg[i] + 1 > chain.maxout:
                continue
            if not dense.directed and chain.outdeg[j] + 1 > chain.maxout:
                continue

        if mode == _kernels.P_SWAP:
            delta = model.change(dense, i, j, 0.0)
            chain._apply(i, j, 0.0)
            delta = delta + model.change(dense, i2, j2, 1.0)
        else:
            delta = model.change(dense, i, j, new)
        g2 = g + delta
        d2 = float(np.sum(w * (g2 - target) ** 2))
        accept = d2 <= d or rng.uniform() < math.exp((d - d2) / temp)
        if mode == _kernels.P_SWAP:
            if accept:
                chain._apply(i2, j2, 1.0)
                chain.tie_pos[lin2] = chain.tie_pos[lin]
                chain.tie_list[chain.tie_pos[lin]] = lin2
                del chain.tie_pos[lin]
                chain.nontie_pos[lin] = chain.nontie_pos[lin2]
                chain.nontie_list[chain.nontie_pos[lin2]] = lin
                del chain.nontie_pos[lin2]
            else:
                chain._apply(i, j, 1.0)
                continue
        elif accept:
            chain._apply(i, j, new)
            if mode == _kernels.P_TNT:
                if new != 0.0:
                    chain.tie_pos[lin] = len(chain.tie_list)
                    chain.tie_list.append(lin)
                else:
                    last = chain.tie_list[-1]
                    pos = chain.tie_pos[lin]
                    chain.tie_list[pos] = last
                    chain.tie_pos[last] = pos
                    chain.tie_list.pop()
                    del chain.tie_pos[lin]
        else:
            continue
        g, d = g2, d2
        if d < best_d:
            best_d = d
            best_y = dense.y.copy()
            if best_d == 0.0:
                break

    return DenseNet(best_y, dense.directed, dense.bipartite)
