"""Epsilon-discretization of marked trees with a certified GH witness.

A tree of height > eps is reduced by induction to a canonical discrete
shape: if the height is at most 2*eps the shape is a single node, otherwise
the subtrees above level eps with height > eps are reduced recursively and
grafted under a fresh root.  The scaled skeleton (all edges eps) stays
within pointed GH distance 4*eps of the source tree, witnessed by an
explicit correspondence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gh import Correspondence, half_distortion
from .trees import (
    CanonicalTree,
    LabelPath,
    MarkedTree,
    OrderedTree,
    TreePoint,
    canonicalize,
    distance,
    height,
    subtrees_above_located,
)


@dataclass(frozen=True)
class DiscretizationResult:
    xi: CanonicalTree
    skeleton: MarkedTree
    phi: dict[LabelPath, TreePoint]


class HeightTooSmall(ValueError):
    pass


def _check_height(tree: MarkedTree, eps: float) -> float:
    if eps <= 0:
        raise ValueError("eps must be > 0")
    h = height(tree)
    if not h > eps:
        raise HeightTooSmall(f"tree height {h} is not greater than eps={eps}")
    return h


def _reduce(tree: MarkedTree, eps: float, embed, prefix: LabelPath, phi: dict) -> OrderedTree:
    phi[prefix] = embed(TreePoint((), 0.0))
    if height(tree) <= 2 * eps:
        return OrderedTree()
    kids = []
    i = 0
    for sub, emb in subtrees_above_located(tree, eps):
        if height(sub) > eps:
            i += 1
            kids.append(
                _reduce(sub, eps, lambda p, e1=embed, e2=emb: e1(e2(p)), prefix + (i,), phi)
            )
    return OrderedTree(tuple(kids))


def xi_epsilon(tree: MarkedTree, eps: float) -> CanonicalTree:
    """Canonical discrete shape of the eps-band decomposition of the tree."""
    _check_height(tree, eps)
    phi: dict[LabelPath, TreePoint] = {}
    theta = _reduce(tree, eps, lambda p: p, (), phi)
    return canonicalize(theta)


def discretisation_witness(
    tree: MarkedTree, eps: float
) -> tuple[DiscretizationResult, float]:
    """Scaled skeleton plus a witnessed upper bound on its GH distance to the
    source tree; the bound is at most 4*eps for every admissible input."""
    _check_height(tree, eps)
    phi: dict[LabelPath, TreePoint] = {}
    theta = _reduce(tree, eps, lambda p: p, (), phi)
    skeleton = MarkedTree.from_shape(theta, edge=eps, root=0.0)
    result = DiscretizationResult(canonicalize(theta), skeleton, phi)

    # correspondence: each shape node pairs its skeleton vertex with its image
    # in the tree; every net point of either side is attached to the nearest
    # such anchor
    def skeleton_vertex(u: LabelPath) -> TreePoint:
        return TreePoint(u, 0.0 if not u else eps)

    pairs: list[tuple[TreePoint, TreePoint]] = [
        (phi[u], skeleton_vertex(u)) for u in phi
    ]
    anchors = list(phi.items())
    for p in _net_points(tree, eps / 2.0):
        u_best = min(anchors, key=lambda it: distance(tree, p, it[1]))[0]
        pairs.append((p, skeleton_vertex(u_best)))
    for u in phi:
        if u:
            pairs.append((phi[u], TreePoint(u, eps / 2.0)))
    R = Correspondence(tuple(pairs))
    bound = half_distortion(R, tree, skeleton) + eps / 2.0
    return result, bound


def _net_points(tree: MarkedTree, spacing: float) -> list[TreePoint]:
    pts = [TreePoint((), 0.0)]

    def walk(node: MarkedTree, prefix) -> None:
        if node.length > 0:
            n = max(1, int(np.ceil(node.length / spacing)))
            pts.extend(TreePoint(prefix, node.length * i / n) for i in range(1, n + 1))
        for j, c in enumerate(node.children, start=1):
            walk(c, prefix + (j,))

    walk(tree, ())
    return pts


def uniform_ordering(xi: CanonicalTree, rng) -> OrderedTree:
    """Uniformly random ordered representative of ``xi``.

    Independent uniform child permutations at every node: each distinct
    ordered representative arises from the same number of permutations, so
    the induced law is uniform.
    """
    from .samplers import as_generator

    gen = as_generator(rng)

    def rec(theta: OrderedTree) -> OrderedTree:
        kids = [rec(c) for c in theta.children]
        order = gen.permutation(len(kids))
        return OrderedTree(tuple(kids[i] for i in order))

    return rec(xi.rep)
