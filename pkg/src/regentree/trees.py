"""Finite representations of rooted compact real trees.

An ordered discrete tree is a finite prefix-closed set of Ulam-Harris words
(here: tuples of positive ints) with gap-free child indices.  A marked tree
attaches a nonnegative edge length to every node, the root edge included;
the induced union of segments is a rooted compact real tree.  All types are
immutable and all operations are pure.
"""

from __future__ import annotations

import math
import sys
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterator, NamedTuple

# structural algorithms (equality, canonical sort, height) recurse along
# root-to-leaf paths; subcritical branching trees have slowly decaying height
# tails, so paths far past the default interpreter limit do occur
sys.setrecursionlimit(max(sys.getrecursionlimit(), 20_000))

LabelPath = tuple[int, ...]

ROOT: LabelPath = ()

#: absolute tolerance used when comparing edge lengths in canonical keys
LENGTH_TOL = 1e-9


def parent(u: LabelPath) -> LabelPath:
    if not u:
        raise ValueError("the root has no parent")
    return u[:-1]


def generation(u: LabelPath) -> int:
    return len(u)


@dataclass(frozen=True)
class OrderedTree:
    """Rooted ordered tree, stored recursively (each node is its subtree)."""

    children: tuple["OrderedTree", ...] = ()

    def __post_init__(self) -> None:
        for c in self.children:
            if not isinstance(c, OrderedTree):
                raise TypeError("children must be OrderedTree instances")

    @property
    def k(self) -> int:
        """Number of children of this node."""
        return len(self.children)

    def node_count(self) -> int:
        return 1 + sum(c.node_count() for c in self.children)

    def height(self) -> int:
        """Height in generations; a single node has height 0."""
        if not self.children:
            return 0
        return 1 + max(c.height() for c in self.children)

    def nodes(self, prefix: LabelPath = ()) -> Iterator[LabelPath]:
        """All Ulam-Harris words of the tree, in depth-first order."""
        yield prefix
        for i, c in enumerate(self.children, start=1):
            yield from c.nodes(prefix + (i,))

    def child_count(self, u: LabelPath) -> int:
        return shift(self, u).k

    @classmethod
    def from_nodes(cls, nodes: Iterator[LabelPath] | list[LabelPath]) -> "OrderedTree":
        node_set = set(nodes)
        if ROOT not in node_set:
            raise ValueError("the empty word must be a member")
        for u in node_set:
            if u and parent(u) not in node_set:
                raise ValueError(f"node {u} has no parent in the set")

        def build(u: LabelPath) -> OrderedTree:
            kids = []
            j = 1
            while u + (j,) in node_set:
                kids.append(build(u + (j,)))
                j += 1
            # no gaps allowed in child indices
            if any(v[: len(u)] == u and len(v) == len(u) + 1 and v[-1] > j for v in node_set):
                raise ValueError(f"gap in child indices under {u}")
            return cls(tuple(kids))

        return build(ROOT)


def shift(theta: OrderedTree, u: LabelPath) -> OrderedTree:
    """Subtree of ``theta`` rooted at ``u`` (the tree shifted at u)."""
    node = theta
    for j in u:
        if not 1 <= j <= node.k:
            raise ValueError(f"label {u} is not a node of the tree")
        node = node.children[j - 1]
    return node


def _shape_key(theta: OrderedTree):
    return tuple(sorted(_shape_key(c) for c in theta.children))


@dataclass(frozen=True)
class CanonicalTree:
    """Equivalence class of ordered trees under child reordering.

    Stored as the canonical representative: children sorted by their
    recursively computed shape key.
    """

    rep: OrderedTree

    def __post_init__(self) -> None:
        if _canonical_sort(self.rep) != self.rep:
            raise ValueError("representative is not in canonical child order")

    @property
    def k(self) -> int:
        return self.rep.k

    def node_count(self) -> int:
        return self.rep.node_count()

    def height(self) -> int:
        return self.rep.height()


def _canonical_sort(theta: OrderedTree) -> OrderedTree:
    kids = tuple(sorted((_canonical_sort(c) for c in theta.children), key=_shape_key))
    return OrderedTree(kids)


def canonicalize(theta: OrderedTree) -> CanonicalTree:
    """Canonical representative of the unordered tree underlying ``theta``."""
    return CanonicalTree(_canonical_sort(theta))


def count_orderings(xi: CanonicalTree) -> int:
    """Number of distinct ordered representatives of the class ``xi``.

    Product over nodes of k! / (product of multiplicities of isomorphic
    child subtrees).
    """

    def rec(theta: OrderedTree) -> int:
        mult = Counter(_shape_key(c) for c in theta.children)
        n = math.factorial(theta.k)
        for m in mult.values():
            n //= math.factorial(m)
        for c in theta.children:
            n *= rec(c)
        return n

    return rec(xi.rep)


def enumerate_orderings(xi: CanonicalTree) -> list[OrderedTree]:
    """All distinct ordered representatives of ``xi`` (brute force; small trees)."""

    def rec(theta: OrderedTree) -> list[OrderedTree]:
        child_variants = [rec(c) for c in theta.children]
        seen: set = set()
        out: list[OrderedTree] = []

        def perms(prefix: tuple[OrderedTree, ...], remaining: list[int]) -> None:
            if not remaining:
                key = tuple(_total_key(t) for t in prefix)
                if key not in seen:
                    seen.add(key)
                    out.append(OrderedTree(prefix))
                return
            for idx in range(len(remaining)):
                i = remaining[idx]
                rest = remaining[:idx] + remaining[idx + 1 :]
                for variant in child_variants[i]:
                    perms(prefix + (variant,), rest)

        perms((), list(range(theta.k)))
        return out

    return rec(xi.rep)


def _total_key(theta: OrderedTree):
    return tuple(_total_key(c) for c in theta.children)


# ---------------------------------------------------------------------------
# Marked trees
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MarkedTree:
    """Ordered tree with a nonnegative length per node, root edge included."""

    length: float
    children: tuple["MarkedTree", ...] = ()

    def __post_init__(self) -> None:
        if not (self.length >= 0.0 and math.isfinite(self.length)):
            raise ValueError(f"edge length must be finite and >= 0, got {self.length}")

    @property
    def k(self) -> int:
        return len(self.children)

    def node_count(self) -> int:
        return 1 + sum(c.node_count() for c in self.children)

    def total_length(self) -> float:
        return self.length + sum(c.total_length() for c in self.children)

    @property
    def shape(self) -> OrderedTree:
        return OrderedTree(tuple(c.shape for c in self.children))

    def node(self, u: LabelPath) -> "MarkedTree":
        sub = self
        for j in u:
            if not 1 <= j <= sub.k:
                raise ValueError(f"label {u} is not a node of the tree")
            sub = sub.children[j - 1]
        return sub

    def length_of(self, u: LabelPath) -> float:
        return self.node(u).length

    @classmethod
    def from_shape(cls, theta: OrderedTree, edge: float, root: float = 0.0) -> "MarkedTree":
        """Marked tree with root length ``root`` and every other edge ``edge``."""

        def build(t: OrderedTree, h: float) -> MarkedTree:
            return cls(h, tuple(build(c, edge) for c in t.children))

        return build(theta, root)


class TreePoint(NamedTuple):
    """A point of the metric tree: an offset into the edge of ``node``."""

    node: LabelPath
    offset: float


def height(tree: MarkedTree) -> float:
    """Maximal distance from the root to a point of the tree."""
    if not tree.children:
        return tree.length
    return tree.length + max(height(c) for c in tree.children)


def level(tree: MarkedTree, point: TreePoint) -> float:
    """Distance from the root to ``point``."""
    lv = 0.0
    sub = tree
    for j in point.node:
        lv += sub.length
        sub = sub.children[j - 1]
    if not 0.0 <= point.offset <= sub.length + 1e-12:
        raise ValueError(f"offset {point.offset} outside edge of length {sub.length}")
    return lv + point.offset


def distance(tree: MarkedTree, a: TreePoint, b: TreePoint) -> float:
    """Path-length distance between two points of the tree."""
    la, lb = level(tree, a), level(tree, b)
    if a.node == b.node:
        return abs(a.offset - b.offset)
    na, nb = a.node, b.node
    k = 0
    while k < len(na) and k < len(nb) and na[k] == nb[k]:
        k += 1
    if k == len(na):  # a's edge lies on the root path of b
        return lb - la if lb >= la else la - lb
    if k == len(nb):
        return la - lb if la >= lb else lb - la
    # branch vertex: top of the edge of the common prefix
    w = na[:k]
    meet = level(tree, TreePoint(w, tree.node(w).length))
    return la + lb - 2.0 * meet


def restrict(tree: MarkedTree, t: float) -> MarkedTree:
    """All points at level <= t; edges crossing level t are truncated."""
    if t < 0:
        raise ValueError("level must be >= 0")
    if t < tree.length:
        return MarkedTree(t)
    return MarkedTree(tree.length, tuple(restrict(c, t - tree.length) for c in tree.children))


def subtrees_above(tree: MarkedTree, t: float) -> list[MarkedTree]:
    """Subtrees of the tree above level t, each rooted at its level-t ancestor.

    One marked tree per connected component of the open upper part; a vertex
    exactly at level t belongs to the lower part, so a branch point at t
    yields one subtree per upward edge.  Listed in depth-first order.
    """
    if t < 0:
        raise ValueError("level must be >= 0")
    if t < tree.length:
        return [MarkedTree(tree.length - t, tree.children)]
    out: list[MarkedTree] = []
    for c in tree.children:
        out.extend(subtrees_above(c, t - tree.length))
    return out


def subtrees_above_located(
    tree: MarkedTree, t: float
) -> list[tuple[MarkedTree, Callable[[TreePoint], TreePoint]]]:
    """Like :func:`subtrees_above` but each subtree comes with an embedding
    mapping its points back to points of the original tree."""
    if t < 0:
        raise ValueError("level must be >= 0")

    def rec(node: MarkedTree, rel: float, prefix: LabelPath):
        if rel < node.length:
            sub = MarkedTree(node.length - rel, node.children)

            def embed(p: TreePoint, _prefix=prefix, _rel=rel) -> TreePoint:
                if not p.node:
                    return TreePoint(_prefix, _rel + p.offset)
                return TreePoint(_prefix + p.node, p.offset)

            return [(sub, embed)]
        out = []
        for i, c in enumerate(node.children, start=1):
            out.extend(rec(c, rel - node.length, prefix + (i,)))
        return out

    return rec(tree, t, ())


def count_Z(tree: MarkedTree, t: float, h: float) -> int:
    """Number of subtrees above level t with height strictly greater than h."""
    if h <= 0:
        raise ValueError("h must be > 0")
    if t < 0:
        raise ValueError("level must be >= 0")
    return sum(1 for s in subtrees_above(tree, t) if height(s) > h)


def count_at_level(tree: MarkedTree, t: float) -> int:
    """Cardinality of the level-t slice of the metric tree.

    Edges strictly crossing t each contribute one point; a vertex exactly at
    level t counts once regardless of its degree.
    """
    if t < 0:
        raise ValueError("level must be >= 0")
    if t < tree.length:
        return 1
    if t == tree.length:
        return 1
    return sum(count_at_level(c, t - tree.length) for c in tree.children)


# ---------------------------------------------------------------------------
# Canonical key for root-preserving isometry
# ---------------------------------------------------------------------------


def _normalize_metric(tree: MarkedTree, is_root: bool = True) -> MarkedTree:
    # collapse zero-length non-root edges and suppress degree-2 vertices so
    # that the key does not depend on artificial subdivision
    kids: list[MarkedTree] = []
    for c in tree.children:
        nc = _normalize_metric(c, is_root=False)
        if nc.length < LENGTH_TOL / 2:
            kids.extend(nc.children)  # vertex identification; zero leaf vanishes
        else:
            kids.append(nc)
    node = MarkedTree(tree.length, tuple(kids))
    # the vertex at the top of this edge is never the root point, so a single
    # child always means a suppressible degree-2 vertex
    while node.k == 1:
        only = node.children[0]
        node = MarkedTree(node.length + only.length, only.children)
    return node


def _metric_key(tree: MarkedTree):
    child_keys = tuple(sorted(_metric_key(c) for c in tree.children))
    return (child_keys, round(tree.length / LENGTH_TOL))


def metric_canonical_key(tree: MarkedTree) -> bytes:
    """Key equal for two marked trees iff they are related by a root-preserving
    isometry mapping vertices to vertices, up to degree-2 subdivision and the
    length tolerance."""
    return repr(_metric_key(_normalize_metric(tree))).encode("ascii")
