"""Deterministic branching-process numerics.

Branching mechanisms psi(u) = alpha u + beta u^2 + sum_j w_j (e^{-u r_j} - 1
+ u r_j), the Laplace ODE du/dt = -psi(u), the height-tail function v(t),
the extinction integral criterion, the generator and extinction ODE of the
integer-valued continuous-time chain, and generating-function iteration
oracles.  A direct power mode (psi(u) = u^p) covers stable mechanisms whose
Levy measure is not a finite atom list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, sparse
from scipy.sparse.linalg import expm_multiply

from .samplers import FiniteThetaParams, OffspringDistribution


@dataclass(frozen=True)
class BranchingMechanism:
    alpha: float = 0.0
    beta: float = 0.0
    pi_atoms: tuple[tuple[float, float], ...] = ()
    power: float | None = None

    def __post_init__(self) -> None:
        if self.power is not None:
            if not 1.0 < self.power <= 2.0:
                raise ValueError("power mode needs an exponent in (1, 2]")
            if self.alpha or self.beta or self.pi_atoms:
                raise ValueError("power mode excludes the (alpha, beta, atoms) fields")
            return
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be >= 0")
        if any(r <= 0 or w <= 0 for r, w in self.pi_atoms):
            raise ValueError("atoms must have r > 0 and weight > 0")


def psi_eval(m: BranchingMechanism, u: float) -> float:
    if u < 0:
        raise ValueError("u must be >= 0")
    if m.power is not None:
        return u**m.power
    out = m.alpha * u + m.beta * u * u
    for r, w in m.pi_atoms:
        out += w * (math.exp(-u * r) - 1.0 + u * r)
    return out


class StepUnderflow(RuntimeError):
    pass


def u_solve(m: BranchingMechanism, t: float, lam: float, tol: float = 1e-10) -> float:
    """u(t, lam) solving du/dt = -psi(u), u(0) = lam."""
    if t < 0 or lam < 0:
        raise ValueError("t and lam must be >= 0")
    if t == 0.0 or lam == 0.0:
        return lam
    sol = integrate.solve_ivp(
        lambda _, y: [-psi_eval(m, max(y[0], 0.0))],
        (0.0, t),
        [lam],
        method="RK45",
        rtol=min(1e-12, tol),
        atol=tol * 1e-3,
    )
    if not sol.success:
        raise StepUnderflow(f"step underflow integrating u(t, lam): {sol.message}")
    return float(max(sol.y[0, -1], 0.0))


class ImmortalMechanism(ValueError):
    pass


def extinction_integral(m: BranchingMechanism, tol: float = 1e-10):
    """Verdict on the integral of 1/psi over [1, infinity).

    Returns ("finite", value) or ("divergent", None); raises on inputs where
    neither the analytic shortcuts nor quadrature settle the question.
    """
    if m.power is not None:
        # integral of u^(-p) from 1: 1/(p-1)
        return ("finite", 1.0 / (m.power - 1.0))
    if m.beta > 0:
        # psi(u) ~ beta u^2 at infinity: integrable; quadrature for the value
        val, _ = integrate.quad(lambda u: 1.0 / psi_eval(m, u), 1.0, np.inf, epsabs=tol, epsrel=tol)
        return ("finite", float(val))
    # beta = 0, finitely many atoms: psi(u) = (alpha + sum w r) u + O(1),
    # linear growth, so the integral diverges logarithmically
    if m.alpha > 0 or m.pi_atoms:
        return ("divergent", None)
    raise ValueError("undecided: trivial mechanism psi = 0")


def v_levy(m: BranchingMechanism, t: float, tol: float = 1e-10) -> float:
    """Height-tail normalizer: the unique v with integral of 1/psi over
    [v, infinity) equal to t; the limit of u(t, lam) as lam grows."""
    if t <= 0:
        raise ValueError("t must be > 0")
    verdict, tail_const = extinction_integral(m, tol)
    if verdict != "finite":
        raise ImmortalMechanism("extinction integral diverges; v is not defined")

    def tail_time(v: float) -> float:
        # integral of 1/psi over [v, infinity), split at 1 so the quadrature
        # never sees an infinite range together with a singular endpoint
        val, _ = integrate.quad(
            lambda u: 1.0 / psi_eval(m, u), v, 1.0, epsabs=tol * 1e-2, epsrel=tol * 1e-2
        )
        return tail_const + val

    hi = 1.0
    while tail_time(hi) > t:
        hi *= 2.0
        if hi > 1e12:
            raise StepUnderflow("bracket search ran away")
    lo = hi / 2.0
    while tail_time(lo) < t:
        lo /= 2.0
        if lo < 1e-300:
            raise StepUnderflow("bracket search underflow")
    return float(optimize.brentq(lambda v: tail_time(v) - t, lo, hi, xtol=tol, rtol=8.9e-16))


# ---------------------------------------------------------------------------
# Integer-valued chain: generator, extinction ODE, transition numerics
# ---------------------------------------------------------------------------


def dsbp_generator_row(p: FiniteThetaParams, i: int) -> dict[int, float]:
    """Row i of the generator: zero row at 0; for i >= 1 the diagonal is
    -i*a and state i-1+k receives i*a*gamma(k) for k != 1."""
    if i < 0:
        raise ValueError("state must be >= 0")
    if i == 0:
        return {}
    row = {i: -i * p.a}
    for k, pk in zip(p.gamma.ks, p.gamma.ps):
        if k == 1 or pk == 0.0:
            continue
        j = i - 1 + k
        row[j] = row.get(j, 0.0) + i * p.a * pk
    return row


def dsbp_transition_probs(
    p: FiniteThetaParams, t: float, x0: int, size: int = 2000, leak_tol: float = 1e-9
) -> np.ndarray:
    """Distribution of the chain at time t started from x0, on {0..size-1}.

    Truncated generator exponential; raises if the truncation leaks more
    than ``leak_tol`` probability mass.
    """
    if not 0 <= x0 < size:
        raise ValueError("x0 outside the truncation window")
    rows, cols, vals = [], [], []
    for i in range(size):
        for j, q in dsbp_generator_row(p, i).items():
            if j < size:
                rows.append(i)
                cols.append(j)
                vals.append(q)
            # mass pushed past the truncation simply leaks; monitored below
    Q = sparse.csr_matrix((vals, (rows, cols)), shape=(size, size))
    e = np.zeros(size)
    e[x0] = 1.0
    probs = expm_multiply(Q.T.tocsc() * t, e)
    probs = np.clip(probs, 0.0, None)
    leak = 1.0 - float(probs.sum())
    if leak > leak_tol:
        raise StepUnderflow(f"truncation leaked {leak:.2e} mass (> {leak_tol})")
    return probs


def dsbp_extinction_ode(p: FiniteThetaParams, t: float, tol: float = 1e-10) -> float:
    """v(t) = P(the chain started at 1 is alive at time t); solves
    F' = a (g(F) - F) for the extinction probability F and returns 1 - F."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0.0:
        return 1.0
    g = p.gamma.pgf
    sol = integrate.solve_ivp(
        lambda _, y: [p.a * (g(min(y[0], 1.0)) - min(y[0], 1.0))],
        (0.0, t),
        [0.0],
        method="RK45",
        rtol=min(1e-12, tol),
        atol=tol * 1e-3,
    )
    if not sol.success:
        raise StepUnderflow(f"step underflow integrating extinction ODE: {sol.message}")
    return float(min(max(1.0 - sol.y[0, -1], 0.0), 1.0))


def dsbp_extinction_curve(p: FiniteThetaParams, ts, tol: float = 1e-10) -> np.ndarray:
    """v evaluated on a sorted nonnegative grid with a single ODE solve."""
    ts = np.asarray(ts, dtype=float)
    if ts.size == 0:
        return ts
    if ts[0] < 0 or np.any(np.diff(ts) < 0):
        raise ValueError("grid must be sorted and nonnegative")
    if ts[-1] == 0.0:
        return np.ones_like(ts)
    g = p.gamma.pgf
    sol = integrate.solve_ivp(
        lambda _, y: [p.a * (g(min(y[0], 1.0)) - min(y[0], 1.0))],
        (0.0, float(ts[-1])),
        [0.0],
        method="RK45",
        rtol=min(1e-12, tol),
        atol=tol * 1e-3,
        t_eval=ts,
    )
    if not sol.success:
        raise StepUnderflow(f"step underflow integrating extinction ODE: {sol.message}")
    return np.clip(1.0 - sol.y[0], 0.0, 1.0)


def gw_laplace_iterate(gamma: OffspringDistribution, k: int, s: float) -> float:
    """k-fold iterate of the offspring generating function at s."""
    if not 0.0 <= s <= 1.0:
        raise ValueError("s must lie in [0, 1]")
    x = s
    for _ in range(k):
        x = gamma.pgf(x)
    return x


def mu_eps_pmf(p: FiniteThetaParams, eps: float, size: int = 2000) -> np.ndarray:
    """Law of the number of level-eps subtrees of height > eps, under the
    finite-case tree law conditioned on height > eps.

    Mixture identity: given the level-eps population m (chain value at time
    eps, conditioned >= 1), the count is Binomial(m, v(eps)) because each of
    the m subtrees independently exceeds height eps with probability v(eps).
    """
    probs = dsbp_transition_probs(p, eps, 1, size=size)
    alive = probs.copy()
    alive[0] = 0.0
    alive /= alive.sum()
    v = dsbp_extinction_ode(p, eps)
    ms = np.arange(size)
    out = np.zeros(size)
    from scipy.stats import binom

    for m in np.nonzero(alive > 1e-15)[0]:
        out[: m + 1] += alive[m] * binom.pmf(np.arange(m + 1), m, v)
    return out / out.sum()


def dsbp_mean(p: FiniteThetaParams, t: float, size: int = 2000) -> float:
    """Mean population at time t from state 1, via the truncated exponential;
    matches exp(-a (1 - mean gamma) t)."""
    probs = dsbp_transition_probs(p, t, 1, size=size)
    return float(np.dot(np.arange(size), probs))
