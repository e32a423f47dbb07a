import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ivatune.design_space import DesignPoint, snap_loa, to_canonical, score_questionnaire
from ivatune.driver import DriverProfile, load_profiles, mismatch, rate
from ivatune.errors import ValidationError
from ivatune.session import disposition_to_loa


def profile_at(ideal=(0.5, 0.5, 0.5, 0.5), disposition=68, **kwargs):
    # disposition 68 maps to level 2 (step 0.5) so the default ideal matches it
    return DriverProfile(ideal=DesignPoint(*ideal), disposition_score=disposition, **kwargs)


class TestMismatch:
    def test_zero_at_ideal(self):
        p = profile_at()
        assert mismatch(p, p.ideal) == 0.0

    def test_maximal_at_opposite_corner_with_loa_deviation(self):
        p = profile_at(ideal=(0, 0, 0, 0), disposition=17)  # disposition step 0
        far = DesignPoint(1, 1, 1, 1)  # loa deviates from the disposition step
        assert mismatch(p, far) == pytest.approx(1.0, abs=1e-12)

    def test_loa_deviation_doubles_that_axis(self):
        p = profile_at(ideal=(0.5, 0.5, 0.5, 0.0), disposition=17)
        matched = DesignPoint(0.5, 0.5, 0.5, 0.0)
        deviated = DesignPoint(0.5, 0.5, 0.5, 0.25)
        assert mismatch(p, matched) == 0.0
        assert mismatch(p, deviated) == pytest.approx(0.5 / np.sqrt(7), abs=1e-12)


class TestRate:
    def test_noiseless_ideal_response(self):
        p = profile_at()
        resp = rate(p, p.ideal, rng=np.random.default_rng(0))
        assert (resp.mental_demand_raw, resp.pred_item1_raw, resp.pred_item2_raw,
                resp.use_item1_raw, resp.use_item2_raw) == (4, 1, 1, 5, 5)

    def test_noiseless_maximal_mismatch_response(self):
        p = profile_at(ideal=(0, 0, 0, 0), disposition=17)
        resp = rate(p, DesignPoint(1, 1, 1, 1), rng=np.random.default_rng(0))
        assert (resp.mental_demand_raw, resp.pred_item1_raw, resp.pred_item2_raw,
                resp.use_item1_raw, resp.use_item2_raw) == (20, 5, 5, 1, 1)

    def test_seed_determinism(self):
        p = profile_at(noise_sd=1.5)
        d = DesignPoint(0.2, 0.9, 0.4, 0.75)
        a = rate(p, d, rng=np.random.default_rng(99))
        b = rate(p, d, rng=np.random.default_rng(99))
        assert a == b

    @given(
        glow=st.floats(0, 1), volume=st.floats(0, 1), transparency=st.floats(0, 1),
        loa_raw=st.floats(0, 1), noise=st.floats(0, 50), seed=st.integers(0, 2**31 - 1),
    )
    @settings(max_examples=60, deadline=None)
    def test_output_always_valid_despite_noise(self, glow, volume, transparency,
                                               loa_raw, noise, seed):
        p = profile_at(noise_sd=noise)
        d = DesignPoint(glow, volume, transparency, snap_loa(loa_raw))
        resp = rate(p, d, rng=np.random.default_rng(seed))
        assert 0 <= resp.mental_demand_raw <= 20
        for item in (resp.pred_item1_raw, resp.pred_item2_raw,
                     resp.use_item1_raw, resp.use_item2_raw):
            assert 1 <= item <= 5

    def test_monotone_in_mismatch_without_noise(self):
        p = profile_at(ideal=(0.8, 0.8, 0.8, 0.75), disposition=100)
        rng = np.random.default_rng(1)
        designs = sorted(
            (DesignPoint(*rng.random(3), snap_loa(rng.random())) for _ in range(40)),
            key=lambda d: mismatch(p, d))
        prev = None
        for d in designs:
            c = to_canonical(score_questionnaire(rate(p, d, rng=np.random.default_rng(0))))
            vec = (c.y1, c.y2, c.y3)
            if prev is not None:
                assert all(v <= q + 1e-12 for v, q in zip(vec, prev))
            prev = vec

    def test_grid_argmax_attained_at_ideal(self):
        # integer instruments plateau near the optimum, so the ideal must
        # attain the grid maximum and every co-maximizer must sit close by
        ideal = DesignPoint(0.5, 0.25, 0.75, 0.5)
        p = DriverProfile(ideal=ideal, disposition_score=68)
        rng = np.random.default_rng(0)

        def total(d):
            c = to_canonical(score_questionnaire(rate(p, d, rng=rng)))
            return c.y1 + c.y2 + c.y3

        ideal_total = total(ideal)
        grid1d = np.linspace(0, 1, 17)
        best, co_maximizers = -np.inf, []
        for g in grid1d:
            for v in grid1d:
                for t in grid1d:
                    for loa in (0.0, 0.25, 0.5, 0.75, 1.0):
                        d = DesignPoint(g, v, t, loa)
                        s = total(d)
                        if s > best + 1e-12:
                            best, co_maximizers = s, [d]
                        elif abs(s - best) <= 1e-12:
                            co_maximizers.append(d)
        assert best <= ideal_total + 1e-12
        assert any(d == ideal for d in co_maximizers)
        assert all(mismatch(p, d) < 0.05 for d in co_maximizers)


class TestProfileValidation:
    def test_rejects_negative_weights(self):
        with pytest.raises(ValidationError):
            profile_at(weights=(1.0, -0.1, 1.0))

    def test_rejects_bad_disposition(self):
        with pytest.raises(ValidationError):
            profile_at(disposition=16)

    def test_rejects_negative_noise(self):
        with pytest.raises(ValidationError):
            profile_at(noise_sd=-1.0)


class TestLoadProfiles:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "profiles.json"
        path.write_text("""[
          {"ideal": {"glow": 0.2, "volume": 0.8, "transparency": 0.5, "loa": 0.69},
           "disposition_score": 88, "weights": [1.0, 0.9, 1.1],
           "noise_sd": 1.0, "seed": 7, "name": "alpha"}
        ]""")
        profiles = load_profiles(path)
        assert len(profiles) == 1
        p = profiles[0]
        assert p.ideal.loa == 0.75  # snapped
        assert p.disposition_score == 88
        assert p.name == "alpha"
        assert disposition_to_loa(p.disposition_score) == 0.75

    def test_missing_field_reports_profile(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('[{"disposition_score": 88}]')
        with pytest.raises(ValidationError, match="profile 0"):
            load_profiles(path)
