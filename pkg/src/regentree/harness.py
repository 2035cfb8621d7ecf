"""Seeded Monte-Carlo verification suite.

Each registered check targets one distributional or exact structural claim
about the samplers and numerics: slicing binomials, regeneration above a
level, the exponential-first-branch description, Poisson forests driven by
an embedded Galton-Watson chain, local-time limits, the scaling limit of
generating-function iterates, approximate Levy-tree height tails, the 4*eps
discretization bound, and the Galton-Watson law of discretized shapes.

Checks are deterministic in (spec, seed); the suite optionally fans checks
across threads (REGENTREE_THREADS) without changing any result.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binom as _binom
from scipy.stats import chi2 as _chi2
from scipy.stats import poisson as _poisson

from . import csbp
from .discretize import discretisation_witness, uniform_ordering, xi_epsilon
from .gh import InstanceTooLarge, gh_bracket_small
from .samplers import (
    FiniteThetaParams,
    OffspringDistribution,
    RngState,
    critical_binary,
    gw_surviving_heights,
    sample_approx_levy_tree,
    sample_finite_theta,
    sample_finite_theta_cond,
    sample_poisson_forest,
)
from .trees import MarkedTree, count_Z, count_at_level, height, subtrees_above

SIGNIFICANCE = 1e-3


@dataclass(frozen=True)
class CheckSpec:
    name: str
    n_samples: int
    seed: RngState
    params: dict = field(default_factory=dict)
    significance: float = SIGNIFICANCE

    def __post_init__(self) -> None:
        if not 0.0 < self.significance < 1.0:
            raise ValueError("significance must lie in (0, 1)")
        if self.n_samples < 100:
            raise ValueError("n_samples must be >= 100")


@dataclass(frozen=True)
class CheckReport:
    name: str
    statistic: float
    p_value: float
    passed: bool
    runtime: float
    samples_used: int


# ---------------------------------------------------------------------------
# Test statistics
# ---------------------------------------------------------------------------


def kolmogorov_sf(x: float) -> float:
    """P(K > x) for the Kolmogorov distribution, series cut at 1e-10."""
    if x <= 0.05:
        return 1.0
    s = 0.0
    for k in range(1, 200):
        term = 2.0 * (-1.0) ** (k - 1) * math.exp(-2.0 * k * k * x * x)
        s += term
        if abs(term) < 1e-10:
            break
    return float(min(max(s, 0.0), 1.0))


def ks_test(samples, cdf, censor_at: float | None = None) -> tuple[float, float]:
    """One-sample Kolmogorov-Smirnov with the asymptotic p-value.

    With ``censor_at`` the supremum is restricted to values below the
    censoring point (observations at or past it are treated as censored);
    the restricted statistic never exceeds the full one, so under a true
    null the test stays valid.
    """
    xs = np.sort(np.asarray(samples, dtype=float))
    n = xs.size
    if n < 100:
        raise ValueError("ks_test needs at least 100 samples")
    F = np.asarray(cdf(xs), dtype=float)
    i = np.arange(1, n + 1)
    if censor_at is None:
        mask = np.ones(n, dtype=bool)
    else:
        mask = xs < censor_at
    if not mask.any():
        raise ValueError("all samples censored")
    d_plus = float(np.max(i[mask] / n - F[mask]))
    d_minus = float(np.max(F[mask] - (i[mask] - 1) / n))
    D = max(d_plus, d_minus, 0.0)
    if censor_at is not None:
        Fc = float(np.asarray(cdf(np.array([censor_at])))[0])
        D = max(D, abs(float(mask.sum()) / n - Fc))
    return D, kolmogorov_sf(math.sqrt(n) * D)


def _merge_cells(obs: np.ndarray, exp: np.ndarray, min_expected: float = 5.0):
    """Sort cells by expected count and pool the sparse tail."""
    order = np.argsort(-exp, kind="stable")
    obs, exp = obs[order].astype(float), exp[order].astype(float)
    m = len(exp)
    while m > 1 and (exp[m - 1 :].sum() < min_expected or exp[m - 1] < min_expected):
        m -= 1
    if m < len(exp):
        obs = np.concatenate([obs[:m], [obs[m:].sum()]])
        exp = np.concatenate([exp[:m], [exp[m:].sum()]])
    return obs, exp


def chi2_test(observed, probs, min_expected: float = 5.0) -> tuple[float, float]:
    """Pearson goodness of fit against given cell probabilities; cells with
    expected count below ``min_expected`` are pooled."""
    obs = np.asarray(observed, dtype=float)
    p = np.asarray(probs, dtype=float)
    n = obs.sum()
    if n <= 0:
        raise ValueError("no observations")
    obs, exp = _merge_cells(obs, n * p, min_expected)
    if len(obs) < 2:
        raise ValueError("degenerate test: a single cell")
    stat = float(np.sum((obs - exp) ** 2 / exp))
    return stat, float(_chi2.sf(stat, len(obs) - 1))


def chi2_rows(rows: list[tuple[np.ndarray, np.ndarray]]) -> tuple[float, float]:
    """Sum of per-row Pearson statistics; each row is tested against its own
    cell probabilities, degrees of freedom add up."""
    stat, df = 0.0, 0
    for observed, probs in rows:
        obs = np.asarray(observed, dtype=float)
        obs2, exp2 = _merge_cells(obs, obs.sum() * np.asarray(probs, dtype=float))
        if len(obs2) < 2:
            continue
        stat += float(np.sum((obs2 - exp2) ** 2 / exp2))
        df += len(obs2) - 1
    if df == 0:
        raise ValueError("degenerate test: no usable rows")
    return stat, float(_chi2.sf(stat, df))


def chi2_independence(table) -> tuple[float, float]:
    """Contingency-table independence test with margins estimated."""
    t = np.asarray(table, dtype=float)
    t = t[t.sum(axis=1) > 0][:, t.sum(axis=0) > 0]
    if t.shape[0] < 2 or t.shape[1] < 2:
        raise ValueError("degenerate contingency table")
    exp = np.outer(t.sum(axis=1), t.sum(axis=0)) / t.sum()
    stat = float(np.sum((t - exp) ** 2 / exp))
    df = (t.shape[0] - 1) * (t.shape[1] - 1)
    return stat, float(_chi2.sf(stat, df))


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------


def _params(spec: CheckSpec) -> FiniteThetaParams:
    a = float(spec.params.get("a", 1.0))
    p0 = spec.params.get("p0")
    if p0 is None:
        return critical_binary(a)
    return FiniteThetaParams(a, OffspringDistribution.from_pmf({0: p0, 2: 1.0 - p0}))


def _v_at(p: FiniteThetaParams, t: float) -> float:
    return csbp.dsbp_extinction_ode(p, t)


def _zcounts(tree: MarkedTree, t: float, hs: list[float]) -> list[int]:
    heights = [height(s) for s in subtrees_above(tree, t)]
    return [sum(1 for x in heights if x > h) for h in hs]


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------


def _check_binomial_slicing(spec: CheckSpec):
    p = _params(spec)
    t = float(spec.params.get("t", 0.5))
    la = float(spec.params.get("lev_a", 0.25))
    lb = float(spec.params.get("lev_b", 0.5))
    L = t + lb + 0.25
    gen = spec.seed.generator()
    q = _v_at(p, lb) / _v_at(p, la)
    kmax = 4
    counts = np.zeros((kmax + 1, kmax + 1), dtype=np.int64)
    used = 0
    for _ in range(spec.n_samples):
        tree = sample_finite_theta(p, gen, max_level=L)
        za, zb = _zcounts(tree, t, [la, lb])
        if 1 <= za <= kmax:
            counts[za, zb] += 1
            used += 1
    rows = []
    for k in range(1, kmax + 1):
        if counts[k].sum() >= 50:
            rows.append((counts[k, : k + 1], _binom.pmf(np.arange(k + 1), k, q)))
    stat, pv = chi2_rows(rows)
    return stat, pv, pv >= spec.significance, used


def _check_regenerative_R(spec: CheckSpec):
    p = _params(spec)
    t = float(spec.params.get("t", 0.25))
    h0 = float(spec.params.get("h", 0.25))
    L = float(spec.params.get("max_level", 3.0))
    censor = L - t - 0.01
    gen = spec.seed.generator()
    heights: list[float] = []
    pairs: list[tuple[float, float]] = []
    for _ in range(spec.n_samples):
        tree = sample_finite_theta(p, gen, max_level=L)
        hs = [height(s) for s in subtrees_above(tree, t)]
        tall = [x for x in hs if x > h0]
        heights.extend(tall)
        if len(tall) == 2:
            pairs.append((tall[0], tall[1]))
    xs = np.asarray(heights)
    vgrid = np.linspace(0.0, L, 2001)
    vvals = csbp.dsbp_extinction_curve(p, vgrid)
    v_h0 = float(np.interp(h0, vgrid, vvals))

    def cdf(s):
        return 1.0 - np.interp(s, vgrid, vvals) / v_h0

    stat, p_ks = ks_test(xs, cdf, censor_at=censor)
    # independence of the two subtree heights when exactly two regenerate
    cut = float(np.interp(v_h0 / 2.0, vvals[::-1], vgrid[::-1]))
    cut = min(cut, censor - 0.05)
    a = np.asarray(pairs)
    table = np.histogram2d(a[:, 0], a[:, 1], bins=[[0, cut, np.inf]] * 2)[0]
    _, p_ind = chi2_independence(table)
    pv = min(p_ks, p_ind)
    return stat, pv, p_ks >= spec.significance and p_ind >= spec.significance, xs.size


def _check_exp_first_branch(spec: CheckSpec):
    p = _params(spec)
    L = float(spec.params.get("max_level", 8.0))
    gen = spec.seed.generator()
    js = np.array(
        [sample_finite_theta(p, gen, max_level=L).length for _ in range(spec.n_samples)]
    )
    stat, pv = ks_test(js, lambda s: 1.0 - np.exp(-p.a * s), censor_at=L - 1e-9)
    return stat, pv, pv >= spec.significance, js.size


def _check_offspring_at_J(spec: CheckSpec):
    p = _params(spec)
    L = float(spec.params.get("max_level", 8.0))
    gen = spec.seed.generator()
    ks_support = list(p.gamma.ks)
    idx = {k: i for i, k in enumerate(ks_support)}
    jcuts = [math.log(4.0 / 3.0) / p.a, math.log(2.0) / p.a, math.log(4.0) / p.a]
    table = np.zeros((4, len(ks_support)), dtype=np.int64)
    obs = np.zeros(len(ks_support), dtype=np.int64)
    used = 0
    for _ in range(spec.n_samples):
        tree = sample_finite_theta(p, gen, max_level=L)
        if tree.length >= L:  # root edge censored; offspring not generated
            continue
        b = sum(1 for c in jcuts if tree.length > c)
        obs[idx[tree.k]] += 1
        table[b, idx[tree.k]] += 1
        used += 1
    _, p_fit = chi2_test(obs, np.asarray(p.gamma.ps))
    stat, p_ind = chi2_independence(table)
    pv = min(p_fit, p_ind)
    return stat, pv, p_fit >= spec.significance and p_ind >= spec.significance, used


def _check_subtrees_iid_at_J(spec: CheckSpec):
    p = _params(spec)
    L = float(spec.params.get("max_level", 8.0))
    j_max, censor = 3.0, 5.0 - 1e-9
    gen = spec.seed.generator()
    pairs: list[tuple[float, float]] = []
    for _ in range(spec.n_samples):
        tree = sample_finite_theta(p, gen, max_level=L)
        if tree.k >= 2 and tree.length <= j_max:
            pairs.append((height(tree.children[0]), height(tree.children[1])))
    a = np.asarray(pairs)
    pooled = a.ravel()
    vgrid = np.linspace(0.0, L, 2001)
    vvals = csbp.dsbp_extinction_curve(p, vgrid)
    stat, p_ks = ks_test(pooled, lambda s: 1.0 - np.interp(s, vgrid, vvals), censor_at=censor)
    cuts = [0.0, 0.5, 1.25, 3.0, np.inf]
    table = np.histogram2d(a[:, 0], a[:, 1], bins=[cuts, cuts])[0]
    _, p_ind = chi2_independence(table)
    pv = min(p_ks, p_ind)
    return stat, pv, p_ks >= spec.significance and p_ind >= spec.significance, pooled.size


def _check_poisson_forest_gw(spec: CheckSpec):
    p = _params(spec)
    eps = float(spec.params.get("eps", 0.25))
    gen = spec.seed.generator()
    intensity = _v_at(p, eps)
    L = 2 * eps + 0.25

    def draw(g):
        return sample_finite_theta_cond(p, g, min_height=eps, max_level=L)

    count_obs = np.zeros(16, dtype=np.int64)
    offspring: list[int] = []
    for _ in range(spec.n_samples):
        forest = sample_poisson_forest(draw, intensity, gen)
        count_obs[min(len(forest), 15)] += 1
        for tree in forest:
            offspring.append(_zcounts(tree, eps, [eps])[0])
    _, p_count = chi2_test(count_obs, _poisson.pmf(np.arange(16), intensity))
    mu = csbp.mu_eps_pmf(p, eps, size=400)
    zmax = 12
    z_obs = np.bincount(np.minimum(offspring, zmax), minlength=zmax + 1)
    z_probs = np.concatenate([mu[:zmax], [mu[zmax:].sum()]])
    stat, p_off = chi2_test(z_obs, z_probs)
    pv = min(p_count, p_off)
    return stat, pv, p_count >= spec.significance and p_off >= spec.significance, len(offspring)


def _check_mean_bound_vh(spec: CheckSpec):
    p = _params(spec)
    t = float(spec.params.get("t", 0.25))
    h = float(spec.params.get("h", 0.5))
    gen = spec.seed.generator()
    L = t + h + 0.25
    zs = np.array(
        [
            _zcounts(sample_finite_theta(p, gen, max_level=L), t, [h])[0]
            for _ in range(spec.n_samples)
        ],
        dtype=float,
    )
    vh = _v_at(p, h)
    se = float(zs.std(ddof=1)) / math.sqrt(zs.size)
    margin = vh + 3.0 * se - float(zs.mean())
    return float(zs.mean()), margin, margin >= 0.0, zs.size


def _check_mu_eps_sandwich(spec: CheckSpec):
    p = _params(spec)
    grid = spec.params.get("eps_grid", (0.1, 0.2, 0.4))
    gen = spec.seed.generator()
    m = max(100, spec.n_samples // len(grid))
    worst = math.inf
    freq_last = 0.0
    for eps in grid:
        L = 2 * eps + 0.25
        hits = 0
        for _ in range(m):
            tree = sample_finite_theta_cond(p, gen, min_height=eps, max_level=L)
            hits += _zcounts(tree, eps, [eps])[0] == 1
        f = hits / m
        se = math.sqrt(max(f * (1 - f), 1e-12) / m)
        lo = 2.0 * _v_at(p, 2 * eps) / _v_at(p, eps) - 1.0
        hi = _v_at(p, 2 * eps) / _v_at(p, eps)
        worst = min(worst, f - (lo - 3 * se), (hi + 3 * se) - f)
        freq_last = f
    return freq_last, worst, worst >= 0.0, m * len(grid)


def _check_local_time_limit(spec: CheckSpec):
    p = _params(spec)
    t = float(spec.params.get("t", 0.5))
    gen = spec.seed.generator()
    # finite case: Z(t, t+h) is nondecreasing as h shrinks and reaches the
    # number of level-t components once h is below their minimum height
    failures = 0
    for _ in range(spec.n_samples):
        tree = sample_finite_theta(p, gen, max_level=2.0)
        subs = subtrees_above(tree, t)
        if not subs:
            continue
        hs = [height(s) for s in subs]
        hstar = min(hs) / 2.0
        if hstar <= 0:
            continue
        zs = [sum(1 for x in hs if x > h) for h in (0.4, 0.2, 0.1, hstar)]
        if any(b < a for a, b in zip(zs, zs[1:])) or zs[-1] != len(subs):
            failures += 1
    # quadratic case: Z(t,t+h)/v(h) settles, so squared increments shrink
    n_levy = int(spec.params.get("n_levy", 100))
    n_trees = max(60, spec.n_samples // 20)
    t2, cond_h = 0.3, 0.25
    d_coarse, d_fine = [], []
    for _ in range(n_trees):
        tree = sample_approx_levy_tree(
            "quadratic", n_levy, cond_h, gen, max_depth=int(0.8 * n_levy)
        )
        z4, z2, z1 = _zcounts(tree, t2, [0.4, 0.2, 0.1])
        r4, r2, r1 = z4 * 0.4, z2 * 0.2, z1 * 0.1  # R_h = Z * h since v(h)=1/h
        d_coarse.append((r2 - r4) ** 2)
        d_fine.append((r1 - r2) ** 2)
    diff = np.asarray(d_fine) - np.asarray(d_coarse)
    se = float(diff.std(ddof=1)) / math.sqrt(len(diff))
    margin = -float(diff.mean()) + 3.0 * se
    passed = failures == 0 and margin >= 0.0
    return float(failures), margin, passed, spec.n_samples + n_trees


def _check_N_equals_L(spec: CheckSpec):
    p = _params(spec)
    L = float(spec.params.get("max_level", 2.0))
    n_levels = int(spec.params.get("levels", 20))
    gen = spec.seed.generator()
    levels = 0.05 + gen.random(n_levels) * (L - 0.15)
    failures = 0
    for _ in range(spec.n_samples):
        tree = sample_finite_theta(p, gen, max_level=L)
        for t in levels:
            subs = subtrees_above(tree, t)
            n_level = count_at_level(tree, t)
            if n_level != len(subs):
                failures += 1
                continue
            if subs:
                hs = [height(s) for s in subs]
                hstar = min(hs) / 2.0
                if hstar > 0 and count_Z(tree, t, hstar) != n_level:
                    failures += 1
    return float(failures), float(failures == 0), failures == 0, spec.n_samples * n_levels


def _check_csbp_limit_laplace(spec: CheckSpec):
    n = max(spec.n_samples, 100)
    gamma = OffspringDistribution.geometric_critical()
    worst = 0.0
    for t in (0.5, 1.0, 2.0):
        for lam in (0.5, 1.0, 2.0):
            it = csbp.gw_laplace_iterate(gamma, int(n * t), math.exp(-lam / n))
            u = lam / (1.0 + lam * t)
            worst = max(worst, abs(it**n - math.exp(-u)))
    tol = float(spec.params.get("tol", 0.01))
    return worst, tol - worst, worst <= tol, 9


def _check_levy_height_tail(spec: CheckSpec):
    tree_n = int(spec.params.get("tree_n", 500))
    a = float(spec.params.get("a", 1.0))
    t_cap = float(spec.params.get("t_cap", 8.0))
    hmin = int(math.floor(a * tree_n))
    gen_cap = int(t_cap * tree_n)
    gamma = OffspringDistribution.geometric_critical()
    gen = spec.seed.generator()
    hs = gw_surviving_heights(gamma, hmin, spec.n_samples, gen, gen_cap)
    # uniform jitter smooths the lattice before comparing to the smooth tail
    ts = (hs + gen.random(hs.size)) / tree_n

    def cdf(x):
        return np.where(x <= a, 0.0, 1.0 - a / np.maximum(x, a))

    stat, pv = ks_test(ts, cdf, censor_at=t_cap - 0.05)
    return stat, pv, pv >= spec.significance, ts.size


def _check_discretisation_4eps(spec: CheckSpec):
    p = _params(spec)
    eps_grid = spec.params.get("eps_grid", (0.05, 0.1, 0.2))
    gen = spec.seed.generator()
    min_h = max(eps_grid) + 0.01
    worst_ratio = 0.0
    violations = 0
    bracket_checked = 0
    for i in range(spec.n_samples):
        tree = sample_finite_theta_cond(p, gen, min_height=min_h, max_level=1.0)
        for eps in eps_grid:
            result, bound = discretisation_witness(tree, eps)
            worst_ratio = max(worst_ratio, bound / eps)
            if bound > 4 * eps:
                violations += 1
            if i < 20 and bracket_checked < 30:
                try:
                    lo, _ = gh_bracket_small(tree, result.skeleton, eps)
                except InstanceTooLarge:
                    continue
                bracket_checked += 1
                if lo > bound + 1e-9:
                    violations += 1
    return worst_ratio, float(violations == 0), violations == 0, spec.n_samples * len(eps_grid)


def _shape_sig(theta) -> tuple:
    return tuple(_shape_sig(c) for c in theta.children)


def _shape_prob(theta, mu: dict[int, float]) -> float:
    p = mu.get(theta.k, 0.0)
    for c in theta.children:
        p *= _shape_prob(c, mu)
    return p


def _check_gw_embedding(spec: CheckSpec):
    p = _params(spec)
    eps = float(spec.params.get("eps", 0.3))
    gen = spec.seed.generator()
    # keep the estimation half much larger than the test half: noise in the
    # estimated offspring law inflates the statistic roughly by n_b / n_a
    n_b = max(100, spec.n_samples // 10)
    n_a = spec.n_samples - n_b
    # estimation half: empirical offspring law of the count of level-eps
    # subtrees of height > eps
    mu_counts: dict[int, int] = {}
    for _ in range(n_a):
        tree = sample_finite_theta_cond(p, gen, min_height=eps)
        z = _zcounts(tree, eps, [eps])[0]
        mu_counts[z] = mu_counts.get(z, 0) + 1
    mu_hat = {k: c / n_a for k, c in mu_counts.items()}
    # test half: discretized ordered shapes against the tree law induced by
    # the estimated offspring distribution
    shape_counts: dict[tuple, int] = {}
    for _ in range(n_b):
        tree = sample_finite_theta_cond(p, gen, min_height=eps)
        theta = uniform_ordering(xi_epsilon(tree, eps), gen)
        sig = _shape_sig(theta)
        shape_counts[sig] = shape_counts.get(sig, 0) + 1
    from .trees import OrderedTree

    def from_sig(sig) -> OrderedTree:
        return OrderedTree(tuple(from_sig(c) for c in sig))

    all_probs = {s: _shape_prob(from_sig(s), mu_hat) for s in shape_counts}
    # retain only shapes with a predicted count of at least 5; everything
    # else -- rare observed shapes and never-observed shapes alike -- is one
    # pooled tail cell, so its expected mass faces the matching observations
    sigs = [s for s, q in all_probs.items() if n_b * q >= 5.0]
    obs = np.array([shape_counts[s] for s in sigs], dtype=float)
    probs = np.array([all_probs[s] for s in sigs])
    tail_obs = n_b - obs.sum()
    tail_prob = max(0.0, 1.0 - probs.sum())
    stat, pv = chi2_test(np.concatenate([obs, [tail_obs]]), np.concatenate([probs, [tail_prob]]))
    return stat, pv, pv >= spec.significance, spec.n_samples


REGISTRY = {
    "binomial_slicing": _check_binomial_slicing,
    "regenerative_R": _check_regenerative_R,
    "exp_first_branch": _check_exp_first_branch,
    "offspring_at_J": _check_offspring_at_J,
    "subtrees_iid_at_J": _check_subtrees_iid_at_J,
    "poisson_forest_gw": _check_poisson_forest_gw,
    "mean_bound_vh": _check_mean_bound_vh,
    "mu_eps_sandwich": _check_mu_eps_sandwich,
    "local_time_limit": _check_local_time_limit,
    "N_equals_L": _check_N_equals_L,
    "csbp_limit_laplace": _check_csbp_limit_laplace,
    "levy_height_tail": _check_levy_height_tail,
    "discretisation_4eps": _check_discretisation_4eps,
    "gw_embedding": _check_gw_embedding,
}

_DEFAULT_N = {
    "binomial_slicing": 100_000,
    "regenerative_R": 20_000,
    "exp_first_branch": 100_000,
    "offspring_at_J": 100_000,
    "subtrees_iid_at_J": 100_000,
    "poisson_forest_gw": 10_000,
    "mean_bound_vh": 10_000,
    "mu_eps_sandwich": 60_000,
    "local_time_limit": 2_000,
    "N_equals_L": 10_000,
    "csbp_limit_laplace": 2_000,
    "levy_height_tail": 10_000,
    "discretisation_4eps": 1_000,
    "gw_embedding": 20_000,
}

#: per-check default parameters that differ from the critical-binary base
_DEFAULT_PARAMS: dict[str, dict] = {
    # full trees are materialized here, so a subcritical offspring keeps
    # sizes integrable (the claim holds for any admissible offspring)
    "gw_embedding": {"p0": 0.55},
}

#: stream indices so each check consumes an independent derived stream
_STREAM = {name: i for i, name in enumerate(REGISTRY)}


def default_spec(name: str, seed: int, scale: float = 1.0, **params) -> CheckSpec:
    if name not in REGISTRY:
        raise KeyError(f"unknown check {name!r}")
    n = max(100, int(_DEFAULT_N[name] * scale))
    merged = {**_DEFAULT_PARAMS.get(name, {}), **params}
    return CheckSpec(name, n, RngState(seed, _STREAM[name]), merged)


def run_check(spec: CheckSpec) -> CheckReport:
    if spec.name not in REGISTRY:
        raise KeyError(f"unknown check {spec.name!r}")
    t0 = time.perf_counter()
    stat, pv, passed, used = REGISTRY[spec.name](spec)
    return CheckReport(spec.name, float(stat), float(pv), bool(passed), time.perf_counter() - t0, int(used))


def _workers() -> int:
    env = os.environ.get("REGENTREE_THREADS", "").strip()
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_suite(
    seed: int, names: list[str] | None = None, scale: float = 1.0
) -> list[CheckReport]:
    """Run named checks (default: the whole registry) with per-check derived
    RNG streams; results do not depend on the worker count."""
    names = list(REGISTRY) if names is None else names
    specs = [default_spec(name, seed, scale) for name in names]
    w = _workers()
    if w > 1 and len(specs) > 1:
        with ThreadPoolExecutor(max_workers=w) as ex:
            return list(ex.map(run_check, specs))
    return [run_check(s) for s in specs]


def calibrate(
    name: str, seeds: range | list[int], scale: float = 0.05
) -> tuple[int, int]:
    """(passes, runs) for one check across seeds at reduced sample size."""
    passes = 0
    runs = 0
    for s in seeds:
        runs += 1
        passes += run_check(default_spec(name, s, scale)).passed
    return passes, runs


def report_csv(reports: list[CheckReport]) -> str:
    lines = ["name,statistic,p_value,pass,runtime,samples"]
    for r in reports:
        lines.append(
            f"{r.name},{r.statistic:.6g},{r.p_value:.6g},{str(r.passed).lower()},"
            f"{r.runtime:.3f},{r.samples_used}"
        )
    return "\n".join(lines) + "\n"
