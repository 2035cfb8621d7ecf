"""Epsilon-discretization: shape recursion, embedding map, certified bound."""

import numpy as np
import pytest

from regentree.discretize import (
    HeightTooSmall,
    discretisation_witness,
    uniform_ordering,
    xi_epsilon,
)
from regentree.harness import chi2_test
from regentree.samplers import RngState, critical_binary, sample_finite_theta_cond
from regentree.trees import (
    MarkedTree,
    OrderedTree,
    canonicalize,
    count_orderings,
    enumerate_orderings,
    height,
    level,
)

EXAMPLE = MarkedTree(
    1.0,
    (MarkedTree(0.5, (MarkedTree(0.3), MarkedTree(0.7))), MarkedTree(0.25)),
)


class TestXiEpsilon:
    def test_height_must_exceed_eps(self):
        with pytest.raises(HeightTooSmall):
            xi_epsilon(MarkedTree(0.5), 0.5)
        with pytest.raises(ValueError):
            xi_epsilon(MarkedTree(0.5), 0.0)

    def test_short_tree_is_a_single_node(self):
        # height in (eps, 2 eps]: single node
        assert xi_epsilon(MarkedTree(0.8), 0.5).rep == OrderedTree()

    def test_segment_becomes_a_chain(self):
        # height 2.2 at eps 0.5: bands at 0.5, 1.0, ... until the remainder
        xi = xi_epsilon(MarkedTree(2.2), 0.5)
        assert xi.rep.height() == 3
        assert xi.node_count() == 4  # a chain: every node has at most one child

    def test_example_tree(self):
        # eps = 0.5: root band keeps both legs alive at level 0.5?  The short
        # leg tops out at 1.25, the split legs at 1.8 / 2.2.
        xi = xi_epsilon(EXAMPLE, 0.5)
        # above 0.5 there is one subtree (height 1.7 > 1.0, so not a leaf)
        assert xi.k == 1
        assert xi.node_count() >= 2

    def test_coarse_eps_collapses(self):
        assert xi_epsilon(EXAMPLE, 1.1).rep == OrderedTree()


class TestWitness:
    def test_bound_is_at_most_four_eps(self):
        for eps in (0.1, 0.25, 0.5):
            result, bound = discretisation_witness(EXAMPLE, eps)
            assert bound <= 4 * eps + 1e-12
            assert result.skeleton.length == 0.0

    def test_skeleton_edges_all_eps(self):
        eps = 0.3
        result, _ = discretisation_witness(EXAMPLE, eps)

        def walk(node, is_root=True):
            assert node.length == (0.0 if is_root else eps)
            for c in node.children:
                walk(c, False)

        walk(result.skeleton)
        assert result.skeleton.shape in set(
            o for o in enumerate_orderings(result.xi)
        )

    def test_phi_levels_and_ancestry(self):
        eps = 0.3
        result, _ = discretisation_witness(EXAMPLE, eps)
        for u, p in result.phi.items():
            # each shape node maps to a point at level exactly |u| * eps
            assert level(EXAMPLE, p) == pytest.approx(len(u) * eps)
            if u:
                q = result.phi[u[:-1]]
                # parent images are ancestors: node label is a prefix
                assert p.node[: len(q.node)] == q.node or q.node == p.node

    def test_random_trees_respect_the_bound(self):
        gen = RngState(21).generator()
        p = critical_binary()
        for _ in range(20):
            tree = sample_finite_theta_cond(p, gen, min_height=0.3, max_level=1.5)
            for eps in (0.1, 0.25):
                _, bound = discretisation_witness(tree, eps)
                assert bound <= 4 * eps + 1e-12


class TestUniformOrdering:
    def test_preserves_the_class(self):
        xi = canonicalize(
            OrderedTree((OrderedTree((OrderedTree(),)), OrderedTree(), OrderedTree()))
        )
        gen = RngState(9).generator()
        for _ in range(20):
            theta = uniform_ordering(xi, gen)
            assert canonicalize(theta) == xi

    def test_uniform_over_representatives(self):
        # shape with 3 distinct orderings: children chain-2, chain-1, leaf
        xi = canonicalize(
            OrderedTree(
                (OrderedTree((OrderedTree(),)), OrderedTree(), OrderedTree())
            )
        )
        reps = enumerate_orderings(xi)
        assert len(reps) == count_orderings(xi) == 3
        index = {r: i for i, r in enumerate(reps)}
        gen = RngState(10).generator()
        n = 30_000
        counts = np.zeros(len(reps))
        for _ in range(n):
            counts[index[uniform_ordering(xi, gen)]] += 1
        _, pv = chi2_test(counts, np.full(len(reps), 1.0 / len(reps)))
        assert pv >= 1e-3

    def test_single_ordering_is_fixed(self):
        xi = canonicalize(OrderedTree((OrderedTree(), OrderedTree())))
        gen = RngState(1).generator()
        assert uniform_ordering(xi, gen) == xi.rep


def test_height_relation_between_tree_and_skeleton():
    # skeleton height (in edges) tracks the tree height to within the bands
    gen = RngState(33).generator()
    p = critical_binary()
    eps = 0.2
    for _ in range(10):
        tree = sample_finite_theta_cond(p, gen, min_height=0.25, max_level=1.2)
        result, _ = discretisation_witness(tree, eps)
        h_skel = height(result.skeleton)
        assert abs(h_skel - height(tree)) <= 2 * eps + 1e-12
