import statistics

import numpy as np
import pytest
from scipy import stats as scipy_stats

from ivatune.analysis import (
    Scope,
    correlation_matrix,
    parameter_summary,
    pearson,
    progression_means,
    session_front_indices,
)
from ivatune.design_space import QuestionnaireResponse, score_questionnaire
from ivatune.errors import (
    InsufficientDataError,
    UndefinedCorrelationError,
    ValidationError,
)
from ivatune.persistence import ObservationRecord, SessionLog
from ivatune.session import Condition


def make_record(sid, condition, iteration, design, items, phase="sampling"):
    obj = score_questionnaire(QuestionnaireResponse(*items))
    return ObservationRecord(
        session_id=sid, condition=condition.value, iteration=iteration, phase=phase,
        p1=design[0], p2=design[1], p3=design[2], p4=design[3],
        md_raw=items[0], pred1_raw=items[1], pred2_raw=items[2],
        use1_raw=items[3], use2_raw=items[4],
        mental_demand=obj.mental_demand, predictability=obj.predictability,
        usefulness=obj.usefulness, timestamp="2026-01-01T00:00:00+00:00",
    )


def random_log(sid, condition, n, rng):
    records = []
    for i in range(1, n + 1):
        design = (*rng.random(3), float(rng.choice([0, 0.25, 0.5, 0.75, 1.0])))
        items = (int(rng.integers(0, 21)), int(rng.integers(1, 6)), int(rng.integers(1, 6)),
                 int(rng.integers(1, 6)), int(rng.integers(1, 6)))
        records.append(make_record(sid, condition, i, design, items))
    return SessionLog(sid, condition, records)


class TestPearson:
    def test_identity(self):
        assert pearson([1, 2, 3], [1, 2, 3]) == 1.0

    def test_anti_identity(self):
        assert pearson([1, 2, 3], [-1, -2, -3]) == -1.0

    def test_hand_computed_example(self):
        assert pearson((1, 2, 3, 4), (2, 1, 4, 3)) == pytest.approx(0.6, abs=1e-12)

    def test_zero_variance_raises(self):
        with pytest.raises(UndefinedCorrelationError):
            pearson([1, 1, 1], [1, 2, 3])

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            pearson([1], [2])

    def test_matches_reference_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            x, y = rng.random(30), rng.random(30)
            assert pearson(x, y) == pytest.approx(scipy_stats.pearsonr(x, y).statistic, abs=1e-12)

    def test_scale_invariance(self):
        rng = np.random.default_rng(1)
        x, y = rng.random(25), rng.random(25)
        r = pearson(x, y)
        assert pearson(3.5 * x + 2, y) == pytest.approx(r, abs=1e-10)
        assert pearson(-2.0 * x + 1, y) == pytest.approx(-r, abs=1e-10)


class TestCorrelationMatrix:
    def test_unit_diagonal_and_symmetry(self):
        rng = np.random.default_rng(2)
        dataset = [random_log("s1", Condition.TRAINED_LOA, 15, rng)]
        mat = correlation_matrix(dataset, Scope.ALL_OBSERVATIONS)
        assert np.allclose(np.diag(mat), 1.0)
        assert np.allclose(mat, mat.T)

    def test_matches_reference_oracle_on_synthetic_log(self):
        rng = np.random.default_rng(3)
        dataset = [random_log(f"s{i}", Condition.TRAINED_LOA, 10, rng) for i in range(5)]
        mat = correlation_matrix(dataset, Scope.ALL_OBSERVATIONS)
        rows = np.array([[r.mental_demand, r.predictability, r.usefulness]
                         for log in dataset for r in log.records])
        expected = np.corrcoef(rows.T)
        assert np.allclose(mat, expected, atol=1e-10)

    def test_pareto_scope_uses_session_fronts(self):
        rng = np.random.default_rng(4)
        dataset = [random_log(f"s{i}", Condition.TRAINED_LOA, 12, rng) for i in range(4)]
        mat = correlation_matrix(dataset, Scope.TRAINED_PARETO)
        rows = []
        for log in dataset:
            for i in session_front_indices(log):
                r = log.records[i]
                rows.append([r.mental_demand, r.predictability, r.usefulness])
        expected = np.corrcoef(np.array(rows).T)
        assert np.allclose(mat, expected, atol=1e-10)

    def test_condition_scopes_filter(self):
        rng = np.random.default_rng(5)
        dataset = [random_log("t", Condition.TRAINED_LOA, 10, rng)]
        with pytest.raises(InsufficientDataError):
            correlation_matrix(dataset, Scope.FIXED_PARETO)


class TestProgression:
    def test_single_session_is_its_own_series(self):
        rng = np.random.default_rng(6)
        log = random_log("solo", Condition.TRAINED_LOA, 8, rng)
        prog = progression_means([log], Condition.TRAINED_LOA)
        assert prog["iterations"] == list(range(1, 9))
        assert prog["mental_demand"] == [r.mental_demand for r in log.records]

    def test_two_constant_sessions_average(self):
        # the two constant objective vectors are mutually non-dominated, so
        # both sessions sit on the pooled front and stay in the cohort
        a = [make_record("a", Condition.FIXED_LOA, i, (0.5, 0.5, 0.5, 0.75),
                         (4, 2, 2, 4, 4)) for i in range(1, 6)]
        b = [make_record("b", Condition.FIXED_LOA, i, (0.4, 0.6, 0.5, 0.75),
                         (8, 1, 1, 3, 3)) for i in range(1, 6)]
        dataset = [SessionLog("a", Condition.FIXED_LOA, a),
                   SessionLog("b", Condition.FIXED_LOA, b)]
        prog = progression_means(dataset, Condition.FIXED_LOA)
        assert prog["sessions"] == ["a", "b"]
        assert np.allclose(prog["mental_demand"], 6.0)
        assert np.allclose(prog["predictability"], (4.0 + 5.0) / 2)
        assert np.allclose(prog["usefulness"], (4.0 + 3.0) / 2)

    def test_cohort_restricted_to_condition_front_contributors(self):
        # session "bad" is dominated everywhere by "good", so it cannot put a
        # point on the pooled condition front and drops out of the cohort
        good = [make_record("good", Condition.TRAINED_LOA, i, (0.5, 0.5, 0.5, 0.5),
                            (2, 1, 1, 5, 5)) for i in range(1, 4)]
        bad = [make_record("bad", Condition.TRAINED_LOA, i, (0.5, 0.5, 0.5, 0.5),
                           (19, 5, 5, 1, 1)) for i in range(1, 4)]
        dataset = [SessionLog("good", Condition.TRAINED_LOA, good),
                   SessionLog("bad", Condition.TRAINED_LOA, bad)]
        prog = progression_means(dataset, Condition.TRAINED_LOA)
        assert prog["sessions"] == ["good"]
        assert np.allclose(prog["mental_demand"], 2.0)

    def test_empty_condition(self):
        with pytest.raises(InsufficientDataError):
            progression_means([], Condition.TRAINED_LOA)


class TestParameterSummary:
    def test_single_front_point(self):
        log = SessionLog("one", Condition.TRAINED_LOA,
                         [make_record("one", Condition.TRAINED_LOA, 1,
                                      (0.3, 0.6, 0.5, 0.75), (4, 2, 2, 4, 4))])
        summary = parameter_summary([log], Condition.TRAINED_LOA)
        for name, value in zip(("p1", "p2", "p3", "p4"), (0.3, 0.6, 0.5, 0.75)):
            s = summary[name]
            assert s["mean"] == s["median"] == s["min"] == s["max"] == value
            assert s["sd"] == 0.0 and s["iqr"] == 0.0

    def test_p4_omitted_for_fixed_condition(self):
        rng = np.random.default_rng(7)
        log = random_log("f", Condition.FIXED_LOA, 10, rng)
        summary = parameter_summary([log], Condition.FIXED_LOA)
        assert set(summary) == {"p1", "p2", "p3"}

    def test_matches_reference_statistics_oracle(self):
        rng = np.random.default_rng(8)
        dataset = [random_log(f"s{i}", Condition.TRAINED_LOA, 12, rng) for i in range(4)]
        summary = parameter_summary(dataset, Condition.TRAINED_LOA)
        values = []
        for log in dataset:
            for i in session_front_indices(log):
                r = log.records[i]
                values.append([r.p1, r.p2, r.p3, r.p4])
        arr = np.array(values)

        def type7_quantile(xs, q):
            xs = sorted(xs)
            h = (len(xs) - 1) * q
            lo = int(np.floor(h))
            hi = min(lo + 1, len(xs) - 1)
            return xs[lo] + (h - lo) * (xs[hi] - xs[lo])

        for k, name in enumerate(("p1", "p2", "p3", "p4")):
            col = list(arr[:, k])
            s = summary[name]
            assert s["mean"] == pytest.approx(statistics.mean(col), abs=1e-10)
            assert s["median"] == pytest.approx(statistics.median(col), abs=1e-10)
            assert s["sd"] == pytest.approx(statistics.stdev(col), abs=1e-10)
            assert s["iqr"] == pytest.approx(
                type7_quantile(col, 0.75) - type7_quantile(col, 0.25), abs=1e-10)
            assert s["min"] == min(col) and s["max"] == max(col)
            assert 0.0 <= s["min"] <= s["median"] <= s["max"] <= 1.0

    def test_empty_condition(self):
        with pytest.raises(InsufficientDataError):
            parameter_summary([], Condition.FIXED_LOA)
