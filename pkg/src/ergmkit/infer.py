"""Estimation and tie-probability prediction.

Three routes share one result type. `mple` runs iteratively reweighted
least squares on dyadwise change statistics over the free, observed
dyads; for dyad-independent models this is the exact maximum likelihood
estimate. `exact_fit` maximizes the likelihood over a complete
enumeration table. `mcmle` is the simulation route: each iteration
samples statistics at the current coefficients, pulls the target inside
the sampled convex hull (Hummel step length, tested by linear-program
feasibility with a 5% shrink toward the sample mean), and takes a
Newton step on the log-normal approximation to the likelihood ratio.

Partially observed networks add a second chain constrained to the
networks that agree with the observed dyads; its sample mean replaces
the observed statistics in the score, and the information matrix is the
difference of the two statistic covariances.

Curved parameter maps enter everywhere through the chain rule via
Model.eta_grad. Deterministic fits report mcmc_se of zero.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import linprog, minimize
from scipy.special import expit

from .enumeration import _n_states, allstats, exact_loglik, log_h_free
from .errors import DegeneracyError, EstimationError, ModelError, UnsupportedFeatureError
from .model import Model, build_model
from .modelspec import parse_constraints
from .network import DenseNet, Network
from .reference import Reference, parse_reference
from .rng import chain_seed
from .sampler import (
    ChainConfig, GenericChain, _apply_fixed, _check_support, _diverged,
    _frozen, _ref_codes, as_sample_space, full_space, sample, san,
)
from .samplespace import SampleSpace, build_sample_space

LN2 = math.log(2.0)

# MPLE / exact-fit Newton target; see the gradient-floor note in mple().
GRAD_TOL = 1e-10
SEPARATION_BOUND = 20.0
HULL_SHRINK = 0.95


@dataclass
class FitResult:
    """Point estimate plus uncertainty and bookkeeping for one model fit."""

    theta_hat: np.ndarray
    vcov: np.ndarray
    se: np.ndarray
    mcmc_se: np.ndarray
    param_names: list[str]
    method: str                       # MPLE | MCMLE | EXACT
    loglik: float | None = None
    null_deviance: float | None = None
    residual_deviance: float | None = None
    df: int | None = None             # free observed dyads (null df)
    aic: float | None = None
    bic: float | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def nparam(self) -> int:
        return len(self.theta_hat)

    def coef(self) -> dict:
        return {n: float(v) for n, v in zip(self.param_names, self.theta_hat)}

    def to_json(self) -> dict:
        names = self.param_names
        opt = lambda x: None if x is None else float(x)
        return {
            "coef": {n: float(v) for n, v in zip(names, self.theta_hat)},
            "se": {n: float(v) for n, v in zip(names, self.se)},
            "mcmc_se": {n: float(v) for n, v in zip(names, self.mcmc_se)},
            "vcov": [[float(v) for v in row] for row in np.atleast_2d(self.vcov)],
            "loglik": opt(self.loglik),
            "aic": opt(self.aic),
            "bic": opt(self.bic),
            "method": self.method,
            "iterations": int(self.diagnostics.get("iterations", 0)),
        }

    def summary_text(self) -> str:
        lines = [f"Model fit ({self.method}):", ""]
        w = max([len(n) for n in self.param_names] + [8])
        lines.append(f"{'':{w}}  {'Estimate':>10} {'Std. Error':>10} "
                     f"{'MCMC s.e.':>10} {'z value':>8} {'Pr(>|z|)':>9}")
        for k, name in enumerate(self.param_names):
            est, se = self.theta_hat[k], self.se[k]
            if se > 0 and np.isfinite(se):
                z = est / se
                p = math.erfc(abs(z) / math.sqrt(2.0))
                ztxt, ptxt = f"{z:8.3f}", f"{p:9.4g}"
            else:
                ztxt, ptxt = f"{'NA':>8}", f"{'NA':>9}"
            lines.append(f"{name:{w}}  {est:10.5f} {se:10.5f} "
                         f"{self.mcmc_se[k]:10.5f} {ztxt} {ptxt}")
        lines.append("")
        p = self.nparam
        if self.null_deviance is not None and self.df is not None:
            lines.append(f"     Null Deviance: {self.null_deviance:.1f}"
                         f"  on {self.df} degrees of freedom")
        if self.residual_deviance is not None and self.df is not None:
            lines.append(f" Residual Deviance: {self.residual_deviance:.1f}"
                         f"  on {self.df - p} degrees of freedom")
        if self.aic is not None:
            lines.append("")
            lines.append(f"AIC: {self.aic:.1f}  BIC: {self.bic:.1f}")
        if self.loglik is None:
            lines.append("Log-likelihood unavailable for this fit; AIC and "
                         "BIC are omitted.")
        if self.diagnostics.get("separation"):
            lines.append("Warning: separation detected; some coefficients "
                         "are effectively infinite.")
        return "\n".join(lines)


def deviance_summary(fit: FitResult):
    """(null deviance, residual deviance, residual df, AIC, BIC).

    Residual df subtracts the parameter count from the free observed
    dyad count; deviance and information criteria are None whenever the
    log-likelihood is unavailable.
    """
    df = None if fit.df is None else fit.df - fit.nparam
    return (fit.null_deviance, fit.residual_deviance, df, fit.aic, fit.bic)


# ---------------------------------------------------------------------------
# shared pieces

def _space_for(model: Model, universe) -> SampleSpace:
    if universe is None:
        # unlike plain simulation, estimation must pick up the implicit
        # observed-data constraint carried by missing dyads
        return build_sample_space(model.net, [], [])
    return as_sample_space(universe)


def _observed_free_dyads(space: SampleSpace):
    """0-based (tails, heads) of dyads that are free and observed."""
    uni = space.universe
    m = uni.decode_mask()
    if space.obs_universe is not None:
        m = m & ~space.obs_universe.decode_mask()
    return uni.tails[m], uni.heads[m]


def _n_observed_free(space: SampleSpace) -> int:
    if space.obs_universe is None:
        return space.universe.size
    return space.universe.size - space.obs_universe.size


def _observed_dense(model: Model, space: SampleSpace) -> DenseNet:
    dense = model.net.to_dense()
    _apply_fixed(dense, space)
    return dense


def _change_design(model: Model, dense: DenseNet, tails, heads):
    """Rows of change statistics for 0 -> 1 toggles at the observed rest."""
    X = np.empty((len(tails), model.nstat))
    z = np.empty(len(tails))
    for k in range(len(tails)):
        i, j = int(tails[k]), int(heads[k])
        cur = float(dense.y[i, j])
        z[k] = 1.0 if cur != 0.0 else 0.0
        dense.set(i, j, 0.0)
        X[k] = model.change(dense, i, j, 1.0)
        dense.set(i, j, cur)
    return X, z


def _solve_psd(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    A = np.atleast_2d(A)
    try:
        return np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        ridge = 1e-8 * (np.trace(A) / max(1, len(A)) + 1.0)
        try:
            return np.linalg.solve(A + ridge * np.eye(len(A)), b)
        except np.linalg.LinAlgError:
            return np.linalg.pinv(A) @ b


def _inv_psd(A: np.ndarray) -> np.ndarray:
    A = np.atleast_2d(A)
    try:
        return np.linalg.inv(A)
    except np.linalg.LinAlgError:
        return np.linalg.pinv(A)


def _fill_deviance(fr: FitResult, model: Model, space: SampleSpace,
                   ref: Reference, n_obs: int | None,
                   null_loglik: float | None = None) -> None:
    """Deviance block. The uniform-reference null has loglik -N*ln2 for
    binary Bernoulli models even when dyads are dependent; spaces that
    break the product structure (fixed edge count, degree bounds) get no
    null unless an exact value is supplied."""
    fr.df = n_obs
    p = fr.nparam
    if null_loglik is not None:
        fr.null_deviance = -2.0 * null_loglik
    elif (n_obs is not None and not model.valued and ref.name == "Bernoulli"
          and not space.edges_fixed and space.maxout is None):
        fr.null_deviance = 2.0 * n_obs * LN2
    if fr.loglik is not None and n_obs is not None:
        fr.residual_deviance = -2.0 * fr.loglik
        fr.aic = -2.0 * fr.loglik + 2.0 * p
        fr.bic = -2.0 * fr.loglik + p * math.log(max(1, n_obs))


def _interior_start(theta: np.ndarray, model: Model) -> np.ndarray:
    lo, hi = model.theta_bounds()
    th = np.clip(theta, lo, hi)
    for k in range(len(th)):
        if np.isfinite(lo[k]) and th[k] <= lo[k]:
            th[k] = lo[k] + (min(hi[k] - lo[k], 2.0) / 2 if np.isfinite(hi[k]) else 1e-3)
        elif np.isfinite(hi[k]) and th[k] >= hi[k]:
            th[k] = hi[k] - 1e-3
    return th


# ---------------------------------------------------------------------------
# maximum pseudo-likelihood

def mple(model: Model, universe=None) -> FitResult:
    """Logistic regression of dyad values on their change statistics.

    Missing and non-free dyads are excluded from the regression. Exact
    maximum likelihood for dyad-independent models; for dyad-dependent
    models the standard errors are approximate (and usually optimistic),
    which the diagnostics note.
    """
    if model.valued:
        raise ModelError("pseudo-likelihood estimation needs a binary model")
    space = _space_for(model, universe)
    ref = parse_reference("Bernoulli")
    tails, heads = _observed_free_dyads(space)
    if len(tails) == 0:
        raise EstimationError("no free observed dyads to regress on")
    dense = _observed_dense(model, space)
    X, z = _change_design(model, dense, tails, heads)

    diagnostics: dict = {}
    if model.curved:
        theta, info, grad, iters = _mple_curved(model, X, z)
    else:
        theta, info, grad, iters = _irls(X, z)
    gnorm = float(np.max(np.abs(grad))) if len(grad) else 0.0
    # float rounding puts a floor under the gradient norm on large
    # designs; past it the estimate no longer moves
    converged = gnorm < max(GRAD_TOL, 1e-12 * len(tails) * max(1.0, np.abs(X).max()))
    separated = bool(np.any(np.abs(theta) > SEPARATION_BOUND) and not converged)
    if separated:
        diagnostics["separation"] = True
        warnings.warn("separation detected: at least one coefficient diverges "
                      "(reported value is a large finite surrogate)")
    elif not converged:
        warnings.warn(f"pseudo-likelihood IRLS stopped with gradient norm {gnorm:.2e}")

    vcov = _inv_psd(info)
    p = model.nparam
    eta = model.eta(theta)
    lp = X @ eta
    ll = float(z @ lp - np.logaddexp(0.0, lp).sum())
    diagnostics.update(iterations=iters, gradient_norm=gnorm,
                       dyads=len(tails), converged=converged)
    if not model.dyad_independent:
        diagnostics["se_note"] = ("pseudo-likelihood standard errors on a "
                                  "dyad-dependent model are approximate")

    fr = FitResult(theta_hat=theta, vcov=vcov, se=np.sqrt(np.diag(vcov)),
                   mcmc_se=np.zeros(p), param_names=list(model.param_names),
                   method="MPLE", diagnostics=diagnostics)
    if model.dyad_independent:
        fr.loglik = ll
    else:
        diagnostics["pseudo_loglik"] = ll
    _fill_deviance(fr, model, space, ref, len(tails))
    return fr


def _irls(X: np.ndarray, z: np.ndarray, max_iter: int = 100):
    p = X.shape[1]
    beta = np.zeros(p)
    info = np.eye(p)
    grad = np.zeros(p)
    for it in range(1, max_iter + 1):
        mu = expit(X @ beta)
        grad = X.T @ (z - mu)
        w = mu * (1.0 - mu)
        info = (X * w[:, None]).T @ X
        if np.max(np.abs(grad)) < GRAD_TOL:
            return beta, info, grad, it
        step = _solve_psd(info, grad)
        # cap the Newton step so separation walks outward instead of
        # overshooting into a flat region with zero curvature
        m = float(np.max(np.abs(step)))
        if m > 10.0:
            step *= 10.0 / m
        beta = beta + step
    return beta, info, grad, max_iter


def _mple_curved(model: Model, X: np.ndarray, z: np.ndarray):
    lo, hi = model.theta_bounds()
    theta0 = _interior_start(np.zeros(model.nparam), model)

    def negll(th):
        lp = X @ model.eta(th)
        return -(z @ lp - np.logaddexp(0.0, lp).sum())

    def grad(th):
        mu = expit(X @ model.eta(th))
        return -(model.eta_grad(th) @ (X.T @ (z - mu)))

    res = minimize(negll, theta0, jac=grad, method="L-BFGS-B",
                   bounds=list(zip(lo, hi)),
                   options={"maxiter": 500, "ftol": 1e-14, "gtol": 1e-10})
    theta = res.x
    mu = expit(X @ model.eta(theta))
    w = mu * (1.0 - mu)
    G = model.eta_grad(theta)
    info = G @ ((X * w[:, None]).T @ X) @ G.T
    return theta, info, -grad(theta), int(res.nit)


# ---------------------------------------------------------------------------
# exact maximum likelihood over an enumeration table

def exact_fit(model: Model, universe=None, reference="Bernoulli",
              force: bool = False, theta0=None) -> FitResult:
    """Maximize the exact likelihood computed from a full enumeration."""
    space = _space_for(model, universe)
    ref = parse_reference(reference)
    if space.obs_universe is not None:
        raise EstimationError(
            "exact likelihood with partially observed data is not supported")
    if space.universe.size == 0:
        raise EstimationError("no free dyads to fit")

    table = allstats(model, universe=space, reference=ref, force=force)
    dense = _observed_dense(model, space)
    g_obs = model.stats(dense)
    lh_obs = log_h_free(dense, space.universe, ref)

    theta = (np.zeros(model.nparam) if theta0 is None
             else np.asarray(theta0, float))
    theta = _interior_start(theta, model)
    stats, logw = table.stats, np.log(table.weights)

    def moments(eta):
        a = logw + stats @ eta
        m = a.max()
        pr = np.exp(a - m)
        tot = pr.sum()
        pr /= tot
        mean = pr @ stats
        cov = (stats * pr[:, None]).T @ stats - np.outer(mean, mean)
        return math.log(tot) + m, mean, cov

    ll = -np.inf
    it = 0
    converged = False
    for it in range(1, 201):
        eta = model.eta(theta)
        logz, mean, cov = moments(eta)
        ll = float(eta @ g_obs + lh_obs - logz)
        G = model.eta_grad(theta)
        grad = G @ (g_obs - mean)
        if np.max(np.abs(grad)) < GRAD_TOL:
            converged = True
            break
        info = G @ cov @ G.T
        step = _solve_psd(info, grad)
        # backtrack on likelihood decrease
        for _ in range(40):
            cand = theta + step
            eta_c = model.eta(cand)
            ll_c = float(eta_c @ g_obs + lh_obs - moments(eta_c)[0])
            if ll_c >= ll - 1e-12:
                theta = cand
                break
            step *= 0.5
        else:
            break

    eta = model.eta(theta)
    _, mean, cov = moments(eta)
    G = model.eta_grad(theta)
    info = G @ cov @ G.T
    vcov = _inv_psd(info)
    diagnostics = {"iterations": it, "converged": converged,
                   "gradient_norm": float(np.max(np.abs(G @ (g_obs - mean))))}
    if np.any(np.abs(theta) > SEPARATION_BOUND) and not converged:
        diagnostics["separation"] = True
        warnings.warn("observed statistics sit on the boundary of the "
                      "attainable set; the exact MLE diverges")

    fr = FitResult(theta_hat=theta, vcov=vcov, se=np.sqrt(np.diag(vcov)),
                   mcmc_se=np.zeros(model.nparam),
                   param_names=list(model.param_names), method="EXACT",
                   loglik=ll, diagnostics=diagnostics)
    ll0 = float(lh_obs - moments(model.eta(np.zeros(model.nparam)))[0]) \
        if not model.curved else None
    _fill_deviance(fr, model, space, ref, space.universe.size,
                   null_loglik=ll0)
    return fr


# ---------------------------------------------------------------------------
# Monte-Carlo maximum likelihood

def _mean_variance(S: np.ndarray) -> np.ndarray:
    """Covariance of the sample mean of a correlated draw sequence,
    estimated by nonoverlapping batch means."""
    N, p = S.shape
    B = max(2, min(32, N // 8))
    k = N // B
    if k < 1:
        return np.atleast_2d(np.cov(S.T, ddof=1)) / max(1, N)
    batches = S[:B * k].reshape(B, k, p).mean(axis=1)
    return np.atleast_2d(np.cov(batches.T, ddof=1)) / B


def _hull_gamma(S: np.ndarray, target: np.ndarray) -> float:
    """Largest step length g in (0,1] such that the point
    mean + HULL_SHRINK*g*(target-mean) lies in the convex hull of the
    sampled statistic rows."""
    mean = S.mean(axis=0)
    d = target - mean
    sd = S.std(axis=0)
    scale = np.maximum(1.0, np.abs(mean))
    const = sd <= 1e-9 * scale
    if const.any() and np.any(np.abs(d[const]) > 1e-6 * scale[const]):
        return 0.0          # the chain never moves along a needed direction
    keep = ~const
    if not keep.any():
        return 1.0
    Z = (S[:, keep] - mean[keep]) / sd[keep]
    dz = d[keep] / sd[keep]
    n = len(S)
    A_eq = np.vstack([Z.T, np.ones((1, n))])

    def feasible(g: float) -> bool:
        b_eq = np.append(HULL_SHRINK * g * dz, 1.0)
        res = linprog(np.zeros(n), A_eq=A_eq, b_eq=b_eq,
                      bounds=(0.0, None), method="highs")
        return res.status == 0

    if feasible(1.0):
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(20):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _lognormal_newton(model: Model, theta: np.ndarray, x_target: np.ndarray,
                      mean_s: np.ndarray, cov_s: np.ndarray):
    """One maximizer step of the log-normal likelihood-ratio surrogate.

    Returns (new theta, estimated log-likelihood-ratio gain)."""
    diff = x_target - mean_s
    if not model.curved:
        delta = _solve_psd(cov_s, diff)
        gain = float(delta @ diff - 0.5 * delta @ np.atleast_2d(cov_s) @ delta)
        return theta + delta, max(gain, 0.0)

    eta0 = model.eta(theta)
    C = np.atleast_2d(cov_s)
    lo, hi = model.theta_bounds()

    def negq(th):
        de = model.eta(th) - eta0
        return -(de @ diff - 0.5 * de @ C @ de)

    def grad(th):
        de = model.eta(th) - eta0
        return -(model.eta_grad(th) @ (diff - C @ de))

    res = minimize(negq, theta, jac=grad, method="L-BFGS-B",
                   bounds=list(zip(lo, hi)))
    return res.x, max(float(-res.fun), 0.0)


def _obs_space(space: SampleSpace) -> SampleSpace:
    return SampleSpace(universe=space.obs_universe,
                       edges_fixed=space.edges_fixed, maxout=space.maxout,
                       fixed_values=space.fixed_values)


def _cheap_exact_loglik(model, space, ref, theta, g_obs, limit=1 << 20):
    """Exact log-likelihood at theta and at zero when enumeration is
    trivially affordable, else None (bridge estimators are out of scope
    and spending minutes on a side computation inside a fit is not)."""
    if (space.obs_universe is not None or space.edges_fixed
            or space.maxout is not None):
        return None
    try:
        ns = _n_states(space.universe.size, ref)
    except ModelError:
        return None
    if ns > limit:
        return None
    table = allstats(model, universe=space, reference=ref)
    dense = _observed_dense(model, space)
    lh = log_h_free(dense, space.universe, ref)
    ll = exact_loglik(theta, model, table, g_obs, lh)
    # the uniform-reference null is eta = 0, expressible only for linear maps
    ll0 = None if model.curved else \
        exact_loglik(np.zeros(model.nparam), model, table, g_obs, lh)
    return ll, ll0


def mcmle(model: Model, universe=None, reference="Bernoulli",
          config: ChainConfig | None = None, chains: int = 1,
          theta0=None, target_stats=None, net0=None,
          force_generic: bool = False, max_iter: int = 60,
          lr_tol: float = 0.01) -> FitResult:
    """Monte-Carlo maximum likelihood.

    Convergence requires a full Hummel step (gamma = 1) together with an
    estimated likelihood-ratio gain below `lr_tol` on two consecutive
    iterations. If the target never enters the sampled hull the model is
    declared degenerate for this network.
    """
    cfg = config if config is not None else ChainConfig()
    space = _space_for(model, universe)
    ref = parse_reference(reference)
    dense_obs = _observed_dense(model, space)
    if space.universe.size == 0:
        raise EstimationError("no free dyads to fit")

    if target_stats is not None:
        g_obs = np.asarray(target_stats, float)
        if g_obs.shape != (model.nstat,):
            raise ModelError(f"expected {model.nstat} target statistics, "
                             f"got {g_obs.shape}")
        obs_space = None
    else:
        g_obs = model.stats(dense_obs)
        obs_space = None
        if space.obs_universe is not None and space.obs_universe.size > 0:
            obs_space = _obs_space(space)

    if theta0 is not None:
        theta = np.asarray(theta0, float)
    elif model.valued:
        theta = np.zeros(model.nparam)
    else:
        try:
            theta = mple(model, universe=space).theta_hat
        except EstimationError:
            theta = np.zeros(model.nparam)
        if not np.all(np.isfinite(theta)):
            theta = np.zeros(model.nparam)
    theta = _interior_start(theta, model)

    start = net0 if net0 is not None else dense_obs
    history = []
    streak = 0
    converged = False
    hull_reached = False
    it = 0
    for it in range(1, max_iter + 1):
        sub = replace(cfg, seed=chain_seed(cfg.seed, 3 * it))
        out = sample(model, theta, universe=space, reference=ref, config=sub,
                     chains=chains, net0=start, force_generic=force_generic)
        S = out.stats
        if obs_space is not None:
            sub_o = replace(cfg, seed=chain_seed(cfg.seed, 3 * it + 1))
            out_o = sample(model, theta, universe=obs_space, reference=ref,
                           config=sub_o, chains=chains, net0=dense_obs,
                           force_generic=force_generic)
            t_vec = out_o.stats.mean(axis=0)
        else:
            t_vec = g_obs

        gamma = _hull_gamma(S, t_vec)
        hull_reached = hull_reached or gamma >= 1.0
        mean_s = S.mean(axis=0)
        cov_s = np.atleast_2d(np.cov(S.T, ddof=1))
        x_target = mean_s + HULL_SHRINK * gamma * (t_vec - mean_s)
        theta_new, gain = _lognormal_newton(model, theta, x_target, mean_s,
                                            cov_s)
        history.append({"iteration": it, "gamma": float(gamma),
                        "lr_gain": float(gain),
                        "acceptance": float(out.acceptance_rate)})
        theta = theta_new
        if gamma >= 1.0 and gain < lr_tol:
            streak += 1
            if streak >= 2:
                converged = True
                break
        else:
            streak = 0

    if not converged:
        if not hull_reached:
            raise DegeneracyError(
                f"observed statistics remain outside the sampled convex hull "
                f"after {max_iter} iterations; the model appears degenerate "
                f"for this network")
        warnings.warn(f"MCMLE stopped at the {max_iter}-iteration cap without "
                      "meeting the convergence criterion")

    # variance round at the final coefficients
    sub = replace(cfg, seed=chain_seed(cfg.seed, 3 * (max_iter + 1)))
    out = sample(model, theta, universe=space, reference=ref, config=sub,
                 chains=chains, net0=start, force_generic=force_generic)
    S = out.stats
    cov_s = np.atleast_2d(np.cov(S.T, ddof=1))
    V = _mean_variance(S)
    if obs_space is not None:
        sub_o = replace(cfg, seed=chain_seed(cfg.seed, 3 * (max_iter + 1) + 1))
        out_o = sample(model, theta, universe=obs_space, reference=ref,
                       config=sub_o, chains=chains, net0=dense_obs,
                       force_generic=force_generic)
        cov_o = np.atleast_2d(np.cov(out_o.stats.T, ddof=1))
        V = V + _mean_variance(out_o.stats)
        info_stats = cov_s - cov_o   # missing-information identity
    else:
        info_stats = cov_s

    G = model.eta_grad(theta)
    info = G @ info_stats @ G.T
    vcov = _inv_psd(info)
    note = None
    if np.any(np.diag(vcov) < 0) or not np.all(np.isfinite(np.diag(vcov))):
        # observed-data information estimate came out indefinite; fall
        # back on the full-chain information and say so
        info = G @ cov_s @ G.T
        vcov = _inv_psd(info)
        note = "information estimate was indefinite; SEs use the " \
               "unconstrained-chain covariance only"
    mc_cov = vcov @ (G @ V @ G.T) @ vcov.T
    mcmc_se = np.sqrt(np.maximum(np.diag(mc_cov), 0.0))

    diagnostics = {"iterations": it, "converged": converged,
                   "history": history,
                   "acceptance_rate": float(out.acceptance_rate)}
    if note:
        diagnostics["vcov_note"] = note
    fr = FitResult(theta_hat=theta, vcov=vcov, se=np.sqrt(np.maximum(np.diag(vcov), 0.0)),
                   mcmc_se=mcmc_se, param_names=list(model.param_names),
                   method="MCMLE", diagnostics=diagnostics)

    if target_stats is None:
        pair = _cheap_exact_loglik(model, space, ref, theta, g_obs)
        if pair is not None:
            fr.loglik = pair[0]
        _fill_deviance(fr, model, space, ref, _n_observed_free(space),
                       null_loglik=None if pair is None else pair[1])
    return fr


# ---------------------------------------------------------------------------
# target-statistic estimation

def fit_target_stats(template, formula_or_model, target, response=None,
                     reference="Bernoulli", constraints=None,
                     config: ChainConfig | None = None, chains: int = 1,
                     options=None) -> FitResult:
    """Fit coefficients so the expected statistics match `target`.

    `template` is a Network (or a node count for an empty undirected
    network) supplying size, directedness, and covariates; its dyad
    values only seed the annealing start.
    """
    if isinstance(template, int):
        template = Network(n=template, directed=False)
    if isinstance(formula_or_model, Model):
        model = formula_or_model
    else:
        model = build_model(template, formula_or_model, response=response,
                            reference=reference, options=options)
    target = np.asarray(target, float)
    if target.shape != (model.nstat,):
        raise ModelError(f"expected {model.nstat} target statistics, "
                         f"got {target.shape}")
    cons = parse_constraints(constraints) if isinstance(constraints, str) \
        else list(constraints or [])
    space = build_sample_space(model.net, cons, [])
    cfg = config if config is not None else ChainConfig()

    dense0 = san(model, target, universe=space, reference=reference,
                 config=cfg)
    # re-anchor the model on the annealed network so the pseudo-likelihood
    # start sees its dyad values
    net1 = dense0.to_network(model.net)
    net1.missing = set()
    model1 = Model(net1, model.spec, model.valued, model.reference_name)

    if model.valued:
        theta0 = np.zeros(model.nparam)
    else:
        try:
            theta0 = mple(model1, universe=space).theta_hat
        except EstimationError:
            theta0 = np.zeros(model.nparam)
        if not np.all(np.isfinite(theta0)):
            theta0 = np.zeros(model.nparam)

    fr = mcmle(model1, universe=space, reference=reference, config=cfg,
               chains=chains, theta0=theta0, target_stats=target,
               net0=dense0)
    fr.diagnostics["target_stats"] = [float(v) for v in target]
    return fr


# ---------------------------------------------------------------------------
# tie-probability prediction

def predict_probs(fit_or_theta, model: Model, universe=None,
                  reference="Bernoulli", conditional: bool = True,
                  nsim: int = 100, config: ChainConfig | None = None) -> np.ndarray:
    """Dyadwise tie probabilities as an n-by-n matrix.

    Conditional: logistic of the change score with the rest of the
    network held at its observed values. Unconditional: empirical tie
    frequencies over `nsim` retained simulation draws. Dyads outside the
    free set keep their fixed value as a 0/1 probability.
    """
    if model.valued:
        raise UnsupportedFeatureError(
            "tie probability prediction needs a binary model")
    theta = fit_or_theta.theta_hat if isinstance(fit_or_theta, FitResult) \
        else np.asarray(fit_or_theta, float)
    space = _space_for(model, universe)
    ref = parse_reference(reference)
    dense = _observed_dense(model, space)
    n = dense.n
    P = np.zeros((n, n))

    if conditional:
        eta = model.eta(theta)
        occupied = (dense.y != 0.0).astype(float)
        np.fill_diagonal(occupied, 0.0)
        P[:] = occupied  # fixed dyads keep their observed state
        for i, j in space.universe.iter_free():
            cur = float(dense.y[i, j])
            dense.set(i, j, 0.0)
            pr = float(expit(eta @ model.change(dense, i, j, 1.0)))
            dense.set(i, j, cur)
            P[i, j] = pr
            if not dense.directed:
                P[j, i] = pr
        return P

    cfg = config if config is not None else ChainConfig()
    mode, ref_code, href_code = _ref_codes(ref, space)
    _check_support(dense, space.universe, ref)
    if _frozen(dense, space.universe, ref, mode):
        P[:] = (dense.y != 0.0).astype(float)
        np.fill_diagonal(P, 0.0)
        return P
    chain = GenericChain(dense, model, model.eta(theta), space, ref, cfg,
                         mode, ref_code, href_code)
    freq = np.zeros((n, n))
    for _ in range(cfg.burnin):
        chain.step()
        if chain.aborted:
            _diverged(cfg.value_ceiling)
    for _ in range(max(1, nsim)):
        for _ in range(cfg.interval):
            chain.step()
            if chain.aborted:
                _diverged(cfg.value_ceiling)
        freq += dense.y != 0.0
    P = freq / max(1, nsim)
    np.fill_diagonal(P, 0.0)
    return P


# ---------------------------------------------------------------------------
# orchestrator

def fit(net: Network, formula: str, response=None, reference="Bernoulli",
        constraints=None, obs_constraints=None, target_stats=None,
        method: str = "auto", config: ChainConfig | None = None,
        chains: int = 1, force: bool = False, force_generic: bool = False,
        options=None) -> FitResult:
    """Build the model, derive the sample space, and dispatch.

    `auto` picks MPLE exactly when it is the MLE: a binary model whose
    terms are all dyad-independent on a space that keeps the product
    structure over free dyads. Everything else goes through MCMLE.
    """
    if target_stats is not None:
        return fit_target_stats(net, formula, target_stats,
                                response=response, reference=reference,
                                constraints=constraints, config=config,
                                chains=chains, options=options)

    model = build_model(net, formula, response=response, reference=reference,
                        options=options)
    cons = parse_constraints(constraints) if isinstance(constraints, str) \
        else list(constraints or [])
    obs = parse_constraints(obs_constraints) if isinstance(obs_constraints, str) \
        else list(obs_constraints or [])
    space = build_sample_space(model.net, cons, obs)

    chosen = method.upper() if method != "auto" else None
    if chosen is None:
        product_space = not space.edges_fixed and space.maxout is None
        if not model.valued and model.dyad_independent and product_space:
            chosen = "MPLE"
        else:
            chosen = "MCMLE"

    if chosen == "MPLE":
        return mple(model, universe=space)
    if chosen == "EXACT":
        return exact_fit(model, universe=space, reference=reference,
                         force=force)
    if chosen == "MCMLE":
        return mcmle(model, universe=space, reference=reference,
                     config=config, chains=chains,
                     force_generic=force_generic)
    raise ModelError(f"unknown estimation method {method!r}")
