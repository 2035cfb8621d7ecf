"""Random generators: Galton-Watson trees and processes, branching trees
with exponential edge lengths, rescaled conditioned Galton-Watson
approximations of Levy trees, Dyck-path excursions, continuous-time
branching chains, and Poisson forests.

Every sampler is a pure function of its parameters and an explicit RNG
state, so identical states give bitwise identical output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coding import Excursion
from .trees import MarkedTree, OrderedTree

_GOLDEN = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class RngState:
    """Splittable seed: identical (seed, stream) implies identical draws."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream,))
        return np.random.Generator(np.random.PCG64(ss))

    def split(self, i: int) -> "RngState":
        return RngState(self.seed, (self.stream * _GOLDEN + i + 1) & _MASK)


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngState):
        return rng.generator()
    return RngState(int(rng)).generator()


class SampleCapExceeded(RuntimeError):
    pass


class ConditioningTooRare(RuntimeError):
    pass


@dataclass(frozen=True)
class OffspringDistribution:
    """Probability mass on nonnegative integers with finite support after
    truncation; tail families keep enough atoms that the dropped mass is
    below 1e-15."""

    ks: tuple[int, ...]
    ps: tuple[float, ...]
    family: str = "finite"
    alpha: float | None = None

    def __post_init__(self) -> None:
        if len(self.ks) != len(self.ps) or not self.ks:
            raise ValueError("pmf must be a nonempty list of (k, p) atoms")
        if any(k < 0 for k in self.ks) or any(p < 0 for p in self.ps):
            raise ValueError("pmf atoms must have k >= 0 and p >= 0")
        if abs(sum(self.ps) - 1.0) > 1e-12:
            raise ValueError("probabilities must sum to 1")
        # cached arrays for the inverse-CDF hot path (not dataclass fields)
        object.__setattr__(self, "_ks_arr", np.asarray(self.ks))
        object.__setattr__(self, "_cdf_arr", np.cumsum(self.ps))

    @classmethod
    def from_pmf(cls, pmf: dict[int, float] | list[tuple[int, float]]) -> "OffspringDistribution":
        items = sorted(pmf.items() if isinstance(pmf, dict) else pmf)
        return cls(tuple(k for k, _ in items), tuple(p for _, p in items))

    @classmethod
    def geometric_critical(cls) -> "OffspringDistribution":
        # p_k = 2^{-k-1}: mean 1, variance 2; truncated where mass < 1e-18
        ks = tuple(range(60))
        ps = [0.5 ** (k + 1) for k in ks]
        ps[-1] += 1.0 - sum(ps)
        return cls(ks, tuple(ps), family="geometric")

    @classmethod
    def stable_tail(cls, alpha: float, kmax: int = 10**5) -> "OffspringDistribution":
        """p_k proportional to k^(-1-alpha) for k >= 2, p_1 = 0, p_0 fixed by
        exact criticality of the truncated pmf."""
        if not 1.0 < alpha < 2.0:
            raise ValueError("alpha must lie in (1, 2)")
        ks = np.arange(2, kmax + 1)
        w = ks.astype(float) ** (-1.0 - alpha)
        # c makes the truncated pmf exactly critical: c * sum k w_k = 1
        c = 1.0 / float(np.sum(ks * w))
        ps = c * w
        p0 = 1.0 - float(np.sum(ps))
        if p0 <= 0:
            raise ValueError("truncation too aggressive for this alpha")
        return cls(
            (0,) + tuple(int(k) for k in ks),
            (p0,) + tuple(float(p) for p in ps),
            family="stable",
            alpha=alpha,
        )

    @property
    def mean(self) -> float:
        return float(np.dot(self.ks, self.ps))

    def pgf(self, s: float) -> float:
        """Generating function sum p_k s^k, exact analytic form for the
        geometric family (stable under thousands of iterations)."""
        if self.family == "geometric":
            return 1.0 / (2.0 - s)
        return float(np.dot(self.ps, np.power(float(s), self.ks)))

    def prob(self, k: int) -> float:
        try:
            return self.ps[self.ks.index(k)]
        except ValueError:
            return 0.0

    def sample(self, gen: np.random.Generator, size: int | None = None):
        """Inverse-CDF draw(s); reproducible from uniforms alone."""
        cdf = self._cdf_arr
        ks = self._ks_arr
        if size is None:
            i = np.searchsorted(cdf, gen.random(), side="right")
            return int(ks[min(i, len(ks) - 1)])
        u = gen.random(size)
        return ks[np.searchsorted(cdf, u, side="right").clip(0, len(ks) - 1)]


@dataclass(frozen=True)
class FiniteThetaParams:
    """Branching at rate ``a`` with offspring ``gamma``; gamma(1) = 0 and
    mean at most 1."""

    a: float
    gamma: OffspringDistribution

    def __post_init__(self) -> None:
        if not self.a > 0:
            raise ValueError("rate a must be > 0")
        if self.gamma.prob(1) != 0.0:
            raise ValueError("offspring distribution must put no mass on 1")
        if self.gamma.mean > 1.0 + 1e-12:
            raise ValueError("offspring distribution must be critical or subcritical")


def critical_binary(a: float = 1.0) -> FiniteThetaParams:
    return FiniteThetaParams(a, OffspringDistribution.from_pmf({0: 0.5, 2: 0.5}))


# ---------------------------------------------------------------------------
# Galton-Watson trees
# ---------------------------------------------------------------------------


def _sample_gw_lists(
    gamma: OffspringDistribution,
    gen: np.random.Generator,
    cap: int,
    max_depth: int | None = None,
) -> tuple[list, int]:
    """Nested-list tree plus its height in generations, built iteratively.

    With ``max_depth`` nodes at that generation get no children; the result
    is distributed as the unrestricted tree cut at that generation.
    """
    root: list = []
    nodes = 1
    deepest = 0
    # stack of (children list, remaining children to create, depth)
    stack = [(root, gamma.sample(gen), 0)]
    while stack:
        kids, rem, depth = stack.pop()
        if rem == 0:
            continue
        stack.append((kids, rem - 1, depth))
        nodes += 1
        if nodes > cap:
            raise SampleCapExceeded(f"tree grew past {cap} nodes")
        child: list = []
        kids.append(child)
        if depth + 1 > deepest:
            deepest = depth + 1
        if max_depth is None or depth + 1 < max_depth:
            k = gamma.sample(gen)
        else:
            k = 0
        stack.append((child, k, depth + 1))
    return root, deepest


def _lists_to_ordered(root: list) -> OrderedTree:
    done: dict[int, OrderedTree] = {}
    stack: list[tuple[list, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            done[id(node)] = OrderedTree(tuple(done[id(c)] for c in node))
        else:
            stack.append((node, True))
            stack.extend((c, False) for c in node)
    return done[id(root)]


def sample_gw_tree(gamma: OffspringDistribution, rng, cap: int = 10**6) -> OrderedTree:
    """Galton-Watson tree: the root gets k children with probability
    gamma(k) and the shifted subtrees are independent copies."""
    gen = as_generator(rng)
    root, _ = _sample_gw_lists(gamma, gen, cap)
    return _lists_to_ordered(root)


def sample_gw_tree_cond_height(
    gamma: OffspringDistribution,
    hmin: int,
    rng,
    max_rejects: int = 10**6,
    cap: int = 10**6,
    max_depth: int | None = None,
) -> OrderedTree:
    """Exact conditional law given height >= hmin, by rejection; with
    ``max_depth`` (>= hmin) the accepted tree is cut at that generation."""
    if max_depth is not None and max_depth < hmin:
        raise ValueError("max_depth must be >= hmin")
    gen = as_generator(rng)
    for _ in range(max_rejects):
        root, depth = _sample_gw_lists(gamma, gen, cap, max_depth=max_depth)
        if depth >= hmin:
            return _lists_to_ordered(root)
    raise ConditioningTooRare(f"no height >= {hmin} tree in {max_rejects} draws")


def sample_gw_process(
    gamma: OffspringDistribution, x0: int, gens: int, rng, cap: int = 10**8
) -> list[int]:
    """Population sizes (X_0, ..., X_gens); X_{t+1} is a sum of X_t
    independent offspring draws."""
    gen = as_generator(rng)
    out = [x0]
    x = x0
    for _ in range(gens):
        if x == 0:
            out.append(0)
            continue
        if x > cap:
            raise SampleCapExceeded(f"population grew past {cap}")
        x = int(np.sum(gamma.sample(gen, size=x)))
        out.append(x)
    return out


# ---------------------------------------------------------------------------
# Finite-case branching trees with exponential edges
# ---------------------------------------------------------------------------


def _exp_draw(gen: np.random.Generator, rate: float) -> float:
    # inverse CDF from a single uniform, for cross-platform reproducibility
    return -math.log1p(-gen.random()) / rate


def sample_finite_theta(
    p: FiniteThetaParams,
    rng,
    cap: int = 10**6,
    max_level: float | None = None,
) -> MarkedTree:
    """Tree whose shape is Galton-Watson with offspring gamma and whose edge
    lengths, the root edge included, are i.i.d. Exp(a).

    With ``max_level`` the tree is truncated at that level during generation;
    the result is distributed as restrict(full sample, max_level), which
    keeps the expected size finite even at criticality.
    """
    gen = as_generator(rng)
    nodes = 0
    # explicit stack (not recursion): critical trees can run deep
    root_frame: list = [None]
    stack: list[tuple[list, int, float]] = [(root_frame, 0, 0.0)]
    order: list[tuple[list, int, float, int, list]] = []
    while stack:
        slot, idx, level = stack.pop()
        nodes += 1
        if nodes > cap:
            raise SampleCapExceeded(f"tree grew past {cap} nodes")
        h = _exp_draw(gen, p.a)
        if max_level is not None and level + h >= max_level:
            slot[idx] = MarkedTree(max_level - level)
            continue
        k = p.gamma.sample(gen)
        child_slots: list = [None] * k
        order.append((slot, idx, h, k, child_slots))
        for j in range(k):
            stack.append((child_slots, j, level + h))
    for slot, idx, h, k, child_slots in reversed(order):
        slot[idx] = MarkedTree(h, tuple(child_slots))
    return root_frame[0]


def sample_finite_theta_cond(
    p: FiniteThetaParams,
    rng,
    min_height: float,
    cap: int = 10**6,
    max_level: float | None = None,
    max_rejects: int = 10**6,
) -> MarkedTree:
    """Rejection sampling of the finite-case law conditioned on height
    strictly greater than ``min_height``."""
    from .trees import height

    if max_level is not None and max_level <= min_height:
        raise ValueError("max_level must exceed min_height")
    gen = as_generator(rng)
    for _ in range(max_rejects):
        t = sample_finite_theta(p, gen, cap=cap, max_level=max_level)
        if height(t) > min_height:
            return t
    raise ConditioningTooRare(f"no height > {min_height} tree in {max_rejects} draws")


# ---------------------------------------------------------------------------
# Approximate Levy trees
# ---------------------------------------------------------------------------


def levy_family_offspring(family: str, alpha: float | None = None) -> tuple[OffspringDistribution, float]:
    """Offspring pmf and the exponent s with m_n = n^s for the family."""
    if family == "quadratic":
        return OffspringDistribution.geometric_critical(), 1.0
    if family == "stable":
        if alpha is None:
            raise ValueError("stable family needs alpha")
        return OffspringDistribution.stable_tail(alpha), alpha - 1.0
    raise ValueError(f"unknown family {family!r}")


def sample_approx_levy_tree(
    family: str,
    n: int,
    a: float,
    rng,
    alpha: float | None = None,
    cap: int = 10**6,
    max_rejects: int = 10**6,
    max_depth: int | None = None,
) -> MarkedTree:
    """Rescaled Galton-Watson tree conditioned on height >= floor(a * m_n),
    with every edge of length 1/m_n and root length 0; approximates the
    Levy-tree law conditioned on height > a.  ``max_depth`` cuts the tree at
    that generation (restriction in law) to keep sizes bounded."""
    if n < 10:
        raise ValueError("n must be >= 10")
    gamma, s = levy_family_offspring(family, alpha)
    m_n = max(1, int(round(n**s)))
    hmin = int(math.floor(a * m_n))
    theta = sample_gw_tree_cond_height(
        gamma, hmin, rng, max_rejects=max_rejects, cap=cap, max_depth=max_depth
    )
    return MarkedTree.from_shape(theta, edge=1.0 / m_n, root=0.0)


def gw_surviving_heights(
    gamma: OffspringDistribution,
    hmin: int,
    n_samples: int,
    rng,
    gen_cap: int,
    batch: int = 1 << 19,
    max_batches: int = 10**5,
) -> np.ndarray:
    """Heights (in generations, censored at gen_cap) of Galton-Watson trees
    conditioned on height >= hmin, computed from vectorized population
    chains without building the trees.

    Only population sizes per generation are tracked, so tree sizes that
    would be prohibitive to materialize remain cheap.
    """
    gen = as_generator(rng)
    if gamma.family != "geometric":
        raise ValueError("population-chain shortcut implemented for the geometric family")
    heights: list[np.ndarray] = []
    got = 0
    for _ in range(max_batches):
        if got >= n_samples:
            break
        x = np.ones(batch, dtype=np.int64)
        h = np.zeros(batch, dtype=np.int64)
        alive = np.arange(batch)
        g = 0
        while alive.size and g < gen_cap:
            g += 1
            # sum of x i.i.d. geometric(1/2) offspring counts
            x_alive = gen.negative_binomial(x[alive], 0.5)
            x[alive] = x_alive
            h[alive] = g - 1 + (x_alive > 0)
            alive = alive[x_alive > 0]
        h[alive] = gen_cap  # censored
        keep = h[h >= hmin]
        heights.append(keep)
        got += keep.size
    out = np.concatenate(heights) if heights else np.empty(0, dtype=np.int64)
    if out.size < n_samples:
        raise ConditioningTooRare(
            f"only {out.size} of {n_samples} conditioned heights in {max_batches} batches"
        )
    return out[:n_samples]


# ---------------------------------------------------------------------------
# Dyck excursions
# ---------------------------------------------------------------------------


def sample_dyck_excursion(n: int, rng) -> Excursion:
    """Uniform Dyck path of 2n steps via the cycle lemma, scaled to steps of
    height 1/sqrt(n) over time increments 1/(2n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    gen = as_generator(rng)
    steps = np.concatenate([np.ones(n, dtype=np.int64), -np.ones(n + 1, dtype=np.int64)])
    gen.shuffle(steps)
    walk = np.cumsum(steps)
    # rotate to start just after the first minimum; the first 2n steps then
    # form a nonnegative path ending at 0 (cycle lemma: later minima would
    # reappear at level -1 after the rotation)
    pivot = int(np.flatnonzero(walk == walk.min())[0]) + 1
    steps = np.roll(steps, -pivot)[: 2 * n]
    heights = np.concatenate([[0], np.cumsum(steps)]) / math.sqrt(n)
    times = np.arange(2 * n + 1) / (2.0 * n)
    return Excursion(tuple(zip(times.tolist(), heights.tolist())))


# ---------------------------------------------------------------------------
# Continuous-time branching chains and Poisson forests
# ---------------------------------------------------------------------------


def sample_dsbp_path(
    p: FiniteThetaParams, y0: int, t_max: float, rng, cap: int = 10**7
) -> list[tuple[float, int]]:
    """Piecewise-constant chain: in state i wait Exp(i a), then one line is
    replaced by k lines with probability gamma(k); 0 is absorbing."""
    if y0 < 0:
        raise ValueError("y0 must be >= 0")
    gen = as_generator(rng)
    t, y = 0.0, y0
    path = [(0.0, y0)]
    while y > 0:
        t += _exp_draw(gen, p.a * y)
        if t >= t_max:
            break
        y += p.gamma.sample(gen) - 1
        if y > cap:
            raise SampleCapExceeded(f"population grew past {cap}")
        path.append((t, y))
    return path


def sample_poisson_forest(sampler, intensity: float, rng, cap: int = 10**7) -> list[MarkedTree]:
    """Poisson(intensity) many i.i.d. trees drawn from ``sampler(gen)``."""
    if intensity < 0:
        raise ValueError("intensity must be >= 0")
    gen = as_generator(rng)
    count = int(gen.poisson(intensity))
    if count > cap:
        raise SampleCapExceeded(f"forest count {count} past {cap}")
    return [sampler(gen) for _ in range(count)]
