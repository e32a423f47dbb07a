import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from ivatune.errors import ContractViolationError, ValidationError
from ivatune.pareto import (
    ParetoFront,
    hv_contribution,
    hypervolume,
    pareto_filter,
    reference_point,
)

from oracles import brute_force_pareto, matrix_pareto, monte_carlo_hv, staircase_hv2d


class TestParetoFilter:
    def test_strict_domination(self):
        assert list(pareto_filter([(1, 1, 1), (0, 0, 0)])) == [0]

    def test_mutually_non_dominated(self):
        assert list(pareto_filter([(1, 0, 0), (0, 1, 0), (0, 0, 1)])) == [0, 1, 2]

    def test_duplicates_of_retained_point_all_kept(self):
        pts = [(0.5, 0.5, 0.5), (0.5, 0.5, 0.5), (0.2, 0.2, 0.2)]
        assert list(pareto_filter(pts)) == [0, 1]

    def test_matches_brute_force_oracle_on_random_sets(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            pts = rng.random((rng.integers(1, 60), 3))
            assert list(pareto_filter(pts)) == brute_force_pareto(pts)

    def test_matches_matrix_oracle_on_larger_sets(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            pts = rng.random((rng.integers(1, 200), 3))
            assert np.array_equal(pareto_filter(pts), matrix_pareto(pts))

    def test_rejects_non_finite(self):
        with pytest.raises(ValidationError):
            pareto_filter([(np.nan, 0, 0)])

    @given(hnp.arrays(np.float64, (12, 3), elements=st.floats(0, 1)))
    @settings(max_examples=50, deadline=None)
    def test_idempotent(self, pts):
        keep = pareto_filter(pts)
        again = pareto_filter(pts[keep])
        assert list(again) == list(range(len(keep)))


class TestHypervolume:
    def test_unit_box(self):
        assert hypervolume([(1, 1, 1)], (0, 0, 0)) == 1.0

    def test_inclusion_exclusion_example(self):
        front = [(0.5, 1, 0.5), (1, 0.5, 0.5)]
        assert hypervolume(front, (0, 0, 0)) == pytest.approx(0.375, abs=1e-12)

    def test_point_not_dominating_ref_raises(self):
        with pytest.raises(ContractViolationError):
            hypervolume([(0.5, 0.5, 0.0)], (0, 0, 0))

    def test_dominated_points_do_not_change_result(self):
        front = [(0.8, 0.6, 0.7)]
        padded = front + [(0.4, 0.3, 0.2), (0.8, 0.6, 0.7)]
        assert hypervolume(padded, (0, 0, 0)) == hypervolume(front, (0, 0, 0))

    def test_2d_matches_staircase_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            pts = rng.uniform(0.1, 1.0, size=(rng.integers(1, 25), 2))
            assert hypervolume(pts, (0.0, 0.0)) == pytest.approx(
                staircase_hv2d(pts, (0.0, 0.0)), abs=1e-12)

    def test_3d_embedded_2d_matches_staircase(self):
        # a front constant in one coordinate reduces to the 2-D staircase
        rng = np.random.default_rng(4)
        for _ in range(20):
            xy = rng.uniform(0.1, 1.0, size=(rng.integers(1, 15), 2))
            pts3 = np.column_stack([xy, np.ones(len(xy))])
            assert hypervolume(pts3, (0, 0, 0)) == pytest.approx(
                staircase_hv2d(xy, (0.0, 0.0)), abs=1e-12)

    def test_3d_matches_monte_carlo(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            pts = rng.uniform(0.05, 1.0, size=(rng.integers(2, 20), 3))
            exact = hypervolume(pts, (0, 0, 0))
            approx = monte_carlo_hv(pts, (0, 0, 0), 200_000, rng)
            assert exact == pytest.approx(approx, rel=0.02)

    def test_monotone_under_addition(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            pts = rng.uniform(0.05, 1.0, size=(8, 3))
            base = hypervolume(pts[:-1], (0, 0, 0))
            assert hypervolume(pts, (0, 0, 0)) >= base - 1e-15

    def test_order_invariance(self):
        rng = np.random.default_rng(8)
        pts = rng.uniform(0.05, 1.0, size=(15, 3))
        ref = np.zeros(3)
        base = hypervolume(pts, ref)
        for _ in range(10):
            perm = rng.permutation(len(pts))
            assert hypervolume(pts[perm], ref) == pytest.approx(base, abs=1e-12)


class TestContribution:
    def test_dominated_candidate_contributes_nothing(self):
        front = [(0.9, 0.9, 0.9)]
        assert hv_contribution(front, (0, 0, 0), (0.5, 0.5, 0.5)) == 0.0

    def test_empty_front(self):
        assert hv_contribution([], (0, 0, 0), (1, 1, 1)) == 1.0

    def test_candidate_below_ref_contributes_nothing(self):
        assert hv_contribution([(0.5, 0.5, 0.5)], (0, 0, 0), (-0.1, 0.7, 0.7)) == 0.0

    def test_matches_difference_of_hypervolumes(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            pts = rng.uniform(0.05, 1.0, size=(rng.integers(1, 12), 3))
            front = pts[pareto_filter(pts)]
            cand = rng.uniform(0.05, 1.0, size=3)
            expected = (hypervolume(np.vstack([front, cand[None, :]]), np.zeros(3))
                        - hypervolume(front, np.zeros(3)))
            assert hv_contribution(front, np.zeros(3), cand) == pytest.approx(expected, abs=1e-12)


class TestReferencePoint:
    def test_worst_corner_with_offset(self):
        pts = np.array([[0.2, 0.5, 0.9], [0.6, 0.3, 0.5]])
        ref = reference_point(pts)
        assert ref == pytest.approx([0.2 - 0.04, 0.3 - 0.02, 0.5 - 0.04])

    def test_clamped_at_zero(self):
        pts = np.array([[0.01, 0.5, 0.5], [0.99, 0.6, 0.6]])
        ref = reference_point(pts)
        assert ref[0] == 0.0

    def test_degenerate_coordinates_stay_strictly_dominated(self):
        # constant coordinate, and a minimum exactly at 0: both would collide
        pts = np.array([[0.5, 0.0, 1.0], [0.5, 0.4, 1.0]])
        ref = reference_point(pts)
        assert np.all(pts > ref[None, :])


class TestParetoFrontType:
    def test_rejects_dominated_member(self):
        with pytest.raises(ValidationError):
            ParetoFront(points=[(0.5, 0.5, 0.5), (0.9, 0.9, 0.9)],
                        members=(0, 1), reference_point=(0, 0, 0))

    def test_rejects_point_on_reference(self):
        with pytest.raises(ValidationError):
            ParetoFront(points=[(0.5, 0.5, 0.0)], members=(0,), reference_point=(0, 0, 0))

    def test_hypervolume_accessor(self):
        front = ParetoFront(points=[(1.0, 1.0, 1.0)], members=(0,),
                            reference_point=(0, 0, 0))
        assert front.hypervolume() == 1.0
