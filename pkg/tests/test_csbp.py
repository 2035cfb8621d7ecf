"""Branching-mechanism numerics against closed forms."""

import math

import numpy as np
import pytest

from regentree.csbp import (
    BranchingMechanism,
    ImmortalMechanism,
    dsbp_extinction_curve,
    dsbp_extinction_ode,
    dsbp_generator_row,
    dsbp_mean,
    dsbp_transition_probs,
    extinction_integral,
    gw_laplace_iterate,
    mu_eps_pmf,
    psi_eval,
    u_solve,
    v_levy,
)
from regentree.samplers import FiniteThetaParams, OffspringDistribution, critical_binary

QUADRATIC = BranchingMechanism(beta=1.0)


class TestMechanism:
    def test_validation(self):
        with pytest.raises(ValueError):
            BranchingMechanism(power=1.0)
        with pytest.raises(ValueError):
            BranchingMechanism(power=1.5, beta=1.0)
        with pytest.raises(ValueError):
            BranchingMechanism(alpha=-1.0)
        with pytest.raises(ValueError):
            BranchingMechanism(pi_atoms=((0.0, 1.0),))

    def test_psi_eval(self):
        assert psi_eval(QUADRATIC, 2.0) == 4.0
        assert psi_eval(BranchingMechanism(power=1.5), 4.0) == 8.0
        m = BranchingMechanism(alpha=1.0, pi_atoms=((2.0, 3.0),))
        assert psi_eval(m, 1.0) == pytest.approx(1.0 + 3.0 * (math.exp(-2.0) - 1.0 + 2.0))
        with pytest.raises(ValueError):
            psi_eval(QUADRATIC, -1.0)


class TestLaplaceODE:
    def test_quadratic_closed_form(self):
        # psi = u^2: u(t, lam) = lam / (1 + lam t)
        for t in (0.1, 0.5, 1.0, 3.0):
            for lam in (0.25, 1.0, 4.0):
                assert u_solve(QUADRATIC, t, lam) == pytest.approx(
                    lam / (1.0 + lam * t), abs=1e-9
                )

    def test_linear_closed_form(self):
        # psi = alpha u: u(t, lam) = lam e^{-alpha t}
        m = BranchingMechanism(alpha=0.7)
        assert u_solve(m, 2.0, 3.0) == pytest.approx(3.0 * math.exp(-1.4), abs=1e-9)

    def test_boundaries(self):
        assert u_solve(QUADRATIC, 0.0, 5.0) == 5.0
        assert u_solve(QUADRATIC, 1.0, 0.0) == 0.0
        with pytest.raises(ValueError):
            u_solve(QUADRATIC, -1.0, 1.0)


class TestExtinctionIntegral:
    def test_quadratic_value(self):
        verdict, val = extinction_integral(QUADRATIC)
        assert verdict == "finite" and val == pytest.approx(1.0)

    def test_power_value(self):
        verdict, val = extinction_integral(BranchingMechanism(power=1.5))
        assert verdict == "finite" and val == pytest.approx(2.0)

    def test_linear_plus_quadratic_log2(self):
        # integral over [1, inf) of 1/(u + u^2) = log 2
        verdict, val = extinction_integral(BranchingMechanism(alpha=1.0, beta=1.0))
        assert verdict == "finite" and val == pytest.approx(math.log(2.0), abs=1e-9)

    def test_linear_diverges(self):
        assert extinction_integral(BranchingMechanism(alpha=1.0)) == ("divergent", None)
        atoms = BranchingMechanism(pi_atoms=((1.0, 1.0),))
        assert extinction_integral(atoms) == ("divergent", None)


class TestVLevy:
    def test_quadratic_is_one_over_t(self):
        for t in (0.1, 0.5, 2.0, 10.0):
            assert v_levy(QUADRATIC, t) == pytest.approx(1.0 / t, abs=1e-9)

    def test_stable_closed_form(self):
        # psi = u^alpha: v(t) = ((alpha - 1) t)^{1/(1-alpha)}
        for alpha in (1.25, 1.5, 1.9):
            m = BranchingMechanism(power=alpha)
            for t in (0.5, 1.0, 2.0):
                expected = ((alpha - 1.0) * t) ** (1.0 / (1.0 - alpha))
                assert v_levy(m, t) == pytest.approx(expected, rel=1e-8)

    def test_v_is_limit_of_u(self):
        assert v_levy(QUADRATIC, 1.0) == pytest.approx(
            u_solve(QUADRATIC, 1.0, 1e8), rel=1e-6
        )

    def test_immortal_rejected(self):
        with pytest.raises(ImmortalMechanism):
            v_levy(BranchingMechanism(alpha=1.0), 1.0)
        with pytest.raises(ValueError):
            v_levy(QUADRATIC, 0.0)


class TestChain:
    def test_generator_row_binary(self):
        p = critical_binary()
        assert dsbp_generator_row(p, 0) == {}
        assert dsbp_generator_row(p, 1) == {1: -1.0, 0: 0.5, 2: 0.5}
        row3 = dsbp_generator_row(p, 3)
        assert row3 == {3: -3.0, 2: 1.5, 4: 1.5}

    def test_generator_rows_sum_to_zero(self):
        g = OffspringDistribution.from_pmf({0: 0.6, 2: 0.25, 3: 0.15})
        p = FiniteThetaParams(2.0, g)
        for i in range(1, 6):
            assert sum(dsbp_generator_row(p, i).values()) == pytest.approx(0.0)

    def test_transition_probs_normalized(self):
        p = critical_binary()
        probs = dsbp_transition_probs(p, 0.5, 1, size=400)
        assert probs.sum() == pytest.approx(1.0, abs=1e-9)
        assert (probs >= 0).all()

    def test_mean_matches_exponential(self):
        # subcritical binary: E Y_t = exp(-a (1 - m) t)
        g = OffspringDistribution.from_pmf({0: 0.6, 2: 0.4})
        p = FiniteThetaParams(1.0, g)
        for t in (0.5, 1.0, 2.0):
            assert dsbp_mean(p, t, size=600) == pytest.approx(
                math.exp(-0.2 * t), abs=1e-8
            )
        assert dsbp_mean(critical_binary(), 1.5, size=600) == pytest.approx(1.0, abs=1e-8)


class TestExtinctionODE:
    def test_critical_binary_closed_form(self):
        # a=1, binary: v(t) = 2 / (2 + t)
        p = critical_binary()
        for t in (0.25, 1.0, 2.0, 5.0):
            assert dsbp_extinction_ode(p, t) == pytest.approx(2.0 / (2.0 + t), abs=1e-9)

    def test_rate_scaling(self):
        # rate a scales time: v_a(t) = 2 / (2 + a t)
        p = critical_binary(a=3.0)
        assert dsbp_extinction_ode(p, 1.0) == pytest.approx(2.0 / 5.0, abs=1e-9)

    def test_curve_matches_pointwise(self):
        p = critical_binary()
        ts = np.array([0.0, 0.3, 1.0, 2.5])
        curve = dsbp_extinction_curve(p, ts)
        for t, v in zip(ts, curve):
            assert v == pytest.approx(dsbp_extinction_ode(p, float(t)), abs=1e-9)

    def test_curve_validation(self):
        with pytest.raises(ValueError):
            dsbp_extinction_curve(critical_binary(), [1.0, 0.5])

    def test_matches_transition_probs(self):
        # two independent routes to P(alive at t)
        p = critical_binary()
        probs = dsbp_transition_probs(p, 1.0, 1, size=400)
        assert 1.0 - probs[0] == pytest.approx(dsbp_extinction_ode(p, 1.0), abs=1e-8)


class TestIterates:
    def test_geometric_iterate_closed_form(self):
        # critical geometric: f_m(0) = m / (m + 1)
        g = OffspringDistribution.geometric_critical()
        for m in (1, 5, 10, 100):
            assert gw_laplace_iterate(g, m, 0.0) == pytest.approx(m / (m + 1.0), abs=1e-12)

    def test_iterate_validation(self):
        g = OffspringDistribution.geometric_critical()
        with pytest.raises(ValueError):
            gw_laplace_iterate(g, 3, 1.5)


class TestMuEps:
    def test_pmf_normalized_and_sandwiched(self):
        p = critical_binary()
        eps = 0.25
        mu = mu_eps_pmf(p, eps, size=400)
        assert mu.sum() == pytest.approx(1.0, abs=1e-9)
        # P(exactly one surviving subtree) lies in the ratio sandwich
        r = dsbp_extinction_ode(p, 2 * eps) / dsbp_extinction_ode(p, eps)
        assert 2.0 * r - 1.0 - 1e-9 <= mu[1] <= r + 1e-9

    def test_no_mass_escapes_support(self):
        p = critical_binary()
        mu = mu_eps_pmf(p, 0.5, size=400)
        assert mu[200:].sum() < 1e-8
