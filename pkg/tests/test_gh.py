"""Pointed Gromov-Hausdorff brackets, correspondences, and invariant bounds."""

import pytest

from regentree.gh import (
    Correspondence,
    InstanceTooLarge,
    delta_net,
    gh_bracket_small,
    gh_lower_invariants,
    gh_upper,
    half_distortion,
)
from regentree.samplers import RngState, critical_binary, sample_finite_theta
from regentree.trees import MarkedTree, TreePoint, distance, height, level

SEG1 = MarkedTree(1.0)
SEG2 = MarkedTree(2.0)
FORK = MarkedTree(0.5, (MarkedTree(1.0), MarkedTree(0.75)))


class TestDeltaNet:
    def test_covers_to_half_spacing(self):
        net = delta_net(FORK, 0.2)
        assert TreePoint((), 0.0) in net.points
        # every net point is a valid point; resolutions recorded
        for p in net.points:
            level(FORK, p)
        assert net.resolution == 0.2
        with pytest.raises(ValueError):
            delta_net(FORK, 0.0)

    def test_vertices_always_included(self):
        net = delta_net(FORK, 10.0)
        tops = {((), 0.5), ((1,), 1.0), ((2,), 0.75)}
        assert tops <= {(p.node, p.offset) for p in net.points}


class TestHalfDistortion:
    def test_requires_root_pair(self):
        R = Correspondence(((TreePoint((), 1.0), TreePoint((), 1.0)),))
        with pytest.raises(ValueError):
            half_distortion(R, SEG1, SEG1)

    def test_identity_correspondence_zero(self):
        pts = [TreePoint((), 0.0), TreePoint((), 0.5), TreePoint((), 1.0)]
        R = Correspondence(tuple((p, p) for p in pts))
        assert half_distortion(R, SEG1, SEG1) == 0.0

    def test_matches_hand_computation(self):
        # endpoints of segments of lengths 1 and 2: distortion |1-2| = 1
        R = Correspondence(
            (
                (TreePoint((), 0.0), TreePoint((), 0.0)),
                (TreePoint((), 1.0), TreePoint((), 2.0)),
            )
        )
        assert half_distortion(R, SEG1, SEG2) == pytest.approx(0.5)


class TestBracketSmall:
    def test_identical_trees_contain_zero(self):
        lo, hi = gh_bracket_small(FORK, FORK, 0.5)
        assert lo == 0.0
        assert hi <= 1.0

    def test_segments_known_distance(self):
        # pointed GH distance between segments [0,1] and [0,2] is 1/2
        lo, hi = gh_bracket_small(SEG1, SEG2, 0.25)
        assert lo <= 0.5 <= hi
        assert hi - lo <= 0.5 + 1e-12

    def test_bracket_sound_on_random_pairs(self):
        gen = RngState(3).generator()
        p = critical_binary()
        done = 0
        while done < 15:
            a = sample_finite_theta(p, gen, max_level=1.0)
            b = sample_finite_theta(p, gen, max_level=1.0)
            if a.node_count() > 4 or b.node_count() > 4:
                continue
            done += 1
            lo, hi = gh_bracket_small(a, b, 0.3)
            assert 0.0 <= lo <= hi
            # both one-sided bounds must be consistent with the bracket
            assert gh_lower_invariants(a, b) <= hi + 1e-9
            assert gh_upper(a, b, 0.3) >= lo - 1e-9

    def test_too_large_rejected(self):
        wide = MarkedTree(1.0, tuple(MarkedTree(1.0) for _ in range(12)))
        with pytest.raises(InstanceTooLarge):
            gh_bracket_small(wide, wide, 1e-6, cap=9)


class TestBounds:
    def test_upper_at_least_height_gap(self):
        # any correspondence must absorb the height difference
        assert gh_upper(SEG1, SEG2, 0.1) >= 0.5

    def test_lower_height_gap(self):
        assert gh_lower_invariants(SEG1, SEG2) >= 0.5 - 1e-9

    def test_lower_never_exceeds_upper(self):
        gen = RngState(4).generator()
        p = critical_binary()
        for _ in range(10):
            a = sample_finite_theta(p, gen, max_level=1.5)
            b = sample_finite_theta(p, gen, max_level=1.5)
            assert gh_lower_invariants(a, b) <= gh_upper(a, b, 0.05) + 1e-9

    def test_lower_sees_branching_mismatch(self):
        # same height, but one tree has three tall legs the other cannot match
        tripod = MarkedTree(0.0, tuple(MarkedTree(1.0) for _ in range(3)))
        assert gh_lower_invariants(tripod, SEG1) > 0.0

    def test_upper_scale_invariance_sanity(self):
        assert gh_upper(SEG1, SEG1, 0.05) <= 0.05 + 1e-12
        assert height(SEG2) - height(SEG1) == pytest.approx(1.0)


def test_distance_symmetry_of_brackets():
    lo1, hi1 = gh_bracket_small(SEG1, FORK, 0.25)
    lo2, hi2 = gh_bracket_small(FORK, SEG1, 0.25)
    assert lo1 == pytest.approx(lo2)
    assert hi1 == pytest.approx(hi2)


def test_true_distance_inside_bracket_via_finer_net():
    # shrinking delta tightens the bracket around a common value
    lo1, hi1 = gh_bracket_small(SEG1, SEG2, 0.5)
    lo2, hi2 = gh_bracket_small(SEG1, SEG2, 0.125)
    assert lo1 - 1e-12 <= lo2 and hi2 <= hi1 + 1e-12
    assert lo2 <= 0.5 <= hi2
    d = distance(SEG2, TreePoint((), 0.0), TreePoint((), 2.0))
    assert d == 2.0
