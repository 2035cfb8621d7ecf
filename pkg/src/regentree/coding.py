"""Trees coded by piecewise-linear excursions, and the inverse contour.

An excursion is a nonnegative piecewise-linear function on [0, zeta] with
g(0) = g(zeta) = 0.  The quotient of [0, zeta] under the pseudo-distance
d_g(s, t) = g(s) + g(t) - 2 min g is a rooted compact real tree; for a
piecewise-linear g that quotient is realised exactly as a marked tree whose
leaves are strict local maxima and whose branch points are interior minima.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

from .trees import LabelPath, MarkedTree, TreePoint

Polyline = list[tuple[float, float]]


@dataclass(frozen=True)
class Excursion:
    """Piecewise-linear excursion given by strictly increasing breakpoints."""

    breakpoints: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        bp = self.breakpoints
        if len(bp) < 2:
            raise ValueError("an excursion needs at least two breakpoints")
        for (s0, g0), (s1, g1) in zip(bp, bp[1:]):
            if not s1 > s0:
                raise ValueError("breakpoint times must be strictly increasing")
        if bp[0][1] != 0.0 or bp[-1][1] != 0.0:
            raise ValueError("an excursion starts and ends at 0")
        if any(g < 0 for _, g in bp):
            raise ValueError("an excursion is nonnegative")

    @property
    def zeta(self) -> float:
        return self.breakpoints[-1][0]

    def value(self, s: float) -> float:
        bp = self.breakpoints
        if not bp[0][0] <= s <= bp[-1][0]:
            raise ValueError(f"time {s} outside the domain [0, {self.zeta}]")
        i = bisect_right([p[0] for p in bp], s)
        if i >= len(bp):
            return bp[-1][1]
        (s0, g0), (s1, g1) = bp[i - 1], bp[i]
        if s == s0:
            return g0
        return g0 + (g1 - g0) * (s - s0) / (s1 - s0)

    def minimum(self, s: float, t: float) -> float:
        """min of g over [s /\\ t, s \\/ t]."""
        lo, hi = min(s, t), max(s, t)
        m = min(self.value(lo), self.value(hi))
        for x, g in self.breakpoints:
            if lo < x < hi and g < m:
                m = g
        return m


def pseudo_distance(g: Excursion, s: float, t: float) -> float:
    """d_g(s, t) = g(s) + g(t) - 2 min over [s /\\ t, s \\/ t]."""
    return g.value(s) + g.value(t) - 2.0 * g.minimum(s, t)


def _interior_min(points: Polyline) -> float:
    return min(gv for _, gv in points[1:-1])


def _split_at(points: Polyline, m: float) -> list[Polyline]:
    """Maximal sub-polylines of ``points`` strictly above level m, each
    re-anchored to endpoints at level m.  Plateau stretches at m merge."""
    # collect every time in [l, r] at which g == m: breakpoints at m plus
    # crossings of segments spanning m
    times: list[float] = []
    if points[0][1] == m:
        times.append(points[0][0])
    for (s0, g0), (s1, g1) in zip(points, points[1:]):
        if (g0 - m) * (g1 - m) < 0:
            times.append(s0 + (s1 - s0) * (m - g0) / (g1 - g0))
        if g1 == m:
            times.append(s1)
    children: list[Polyline] = []
    for ta, tb in zip(times, times[1:]):
        inner = [(s, gv) for s, gv in points if ta < s < tb and gv > m]
        if inner:
            children.append([(ta, m)] + inner + [(tb, m)])
    return children


def _build(points: Polyline, base: float) -> MarkedTree:
    if len(points) <= 2:
        return MarkedTree(0.0)
    m = _interior_min(points)
    kids = tuple(_build(c, m) for c in _split_at(points, m))
    return MarkedTree(m - base, kids)


def tree_from_excursion(g: Excursion) -> MarkedTree:
    """Marked tree isometric to the quotient of [0, zeta] under d_g."""
    if len(g.breakpoints) < 3:
        raise ValueError("excursion needs at least one interior breakpoint")
    return _build(list(g.breakpoints), 0.0)


def excursion_point(g: Excursion, s: float) -> TreePoint:
    """Image of time ``s`` in the tree built by :func:`tree_from_excursion`."""
    gs = g.value(s)

    def rec(points: Polyline, base: float, prefix: LabelPath) -> TreePoint:
        if len(points) <= 2:
            return TreePoint(prefix, 0.0)
        m = _interior_min(points)
        if gs <= m:
            return TreePoint(prefix, gs - base)
        for i, child in enumerate(_split_at(points, m), start=1):
            if child[0][0] <= s <= child[-1][0]:
                return rec(child, m, prefix + (i,))
        # s sits below the first crossing or past the last one
        return TreePoint(prefix, gs - base)

    if not 0.0 <= s <= g.zeta:
        raise ValueError("time outside the excursion domain")
    return rec(list(g.breakpoints), 0.0, ())


def contour_of(tree: MarkedTree) -> Excursion:
    """Depth-first contour excursion of a marked tree; zeta = 2 * total length.

    Children are visited in stored order, so the excursion depends on the
    ordering but the coded isometry class does not.
    """
    pts: Polyline = [(0.0, 0.0)]

    def walk(node: MarkedTree, base: float, t: float) -> float:
        top = base + node.length
        if node.length > 0:
            t += node.length
            pts.append((t, top))
        for c in node.children:
            t = walk(c, top, t)
        if node.length > 0:
            t += node.length
            pts.append((t, base))
        return t

    walk(tree, 0.0, 0.0)
    if len(pts) == 1:
        raise ValueError("cannot take the contour of a point tree")
    return Excursion(tuple(pts))
