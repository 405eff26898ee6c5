"""Resonance-mode table: parsing, interpolation, lookup, and noise sampling."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from favbot.resonance import (
    DEFAULT_NO_MOTION_BANDS,
    MotionMode,
    in_no_motion_band,
    load_default_table,
    load_mode_table,
    lookup_mode,
    sample_body_velocity,
    serialize_mode_table,
)

BANDS_TEXT = "band,13,34\nband,36,55\nband,63,100\n"


@pytest.fixture(scope="module")
def table():
    return load_default_table()


class TestDefaultTable:
    def test_max_linear_speed_at_9_khz(self, table):
        m = lookup_mode(table, 9)
        assert math.hypot(m.v_t, m.v_l) == pytest.approx(6.9, rel=0.01)

    def test_band_frequency_is_exactly_zero(self, table):
        m = lookup_mode(table, 20)
        assert (m.v_t, m.v_l, m.omega) == (0.0, 0.0, 0.0)

    def test_max_ccw_spin_at_59_khz(self, table):
        m = lookup_mode(table, 59)
        assert m.omega == pytest.approx(0.19, rel=1e-12)
        assert m.omega > 0

    def test_58_khz_spins_cw(self, table):
        assert lookup_mode(table, 58).omega < 0

    def test_45_khz_in_band(self, table):
        assert lookup_mode(table, 45).is_zero_motion

    def test_all_band_frequencies_zero(self, table):
        for lo, hi in DEFAULT_NO_MOTION_BANDS:
            for f in range(lo, hi + 1):
                m = lookup_mode(table, f)
                assert (m.v_t, m.v_l, m.omega) == (0.0, 0.0, 0.0), f
                assert in_no_motion_band(table.no_motion_bands, f)

    def test_argmax_speed_and_spin(self, table):
        speeds = {f: math.hypot(m.v_t, m.v_l) for f, m in table.entries.items()}
        spins = {f: abs(m.omega) for f, m in table.entries.items()}
        assert max(speeds, key=speeds.get) == 9
        assert max(spins, key=spins.get) == 59

    def test_cw_and_ccw_sign_ranges(self, table):
        for f in (56, 57, 58):
            assert lookup_mode(table, f).omega < 0, f
        for f in (59, 60, 61, 62):
            assert lookup_mode(table, f).omega > 0, f

    def test_lateral_drift_dominates_high_band(self, table):
        for f in (35, 56, 57, 58, 59, 60, 61, 62):
            m = lookup_mode(table, f)
            assert abs(m.v_l) > abs(m.v_t), f

    def test_unanchored_frequencies_are_interpolated(self, table):
        m9, m10, m11 = (lookup_mode(table, f) for f in (9, 10, 11))
        assert m10.v_t == pytest.approx((m9.v_t + m11.v_t) / 2)
        assert m10.v_l == pytest.approx((m9.v_l + m11.v_l) / 2)
        assert m10.omega == pytest.approx((m9.omega + m11.omega) / 2)
        assert m10.sigma_heading == pytest.approx((m9.sigma_heading + m11.sigma_heading) / 2)

    def test_lookup_rejects_out_of_range(self, table):
        with pytest.raises(ValueError):
            lookup_mode(table, 0)
        with pytest.raises(ValueError):
            lookup_mode(table, 101)
        with pytest.raises(ValueError):
            lookup_mode(table, 9.0)

    def test_scout_pair_drift_arcs_match(self, table):
        # 58/59 kHz drift-circle geometry: u/omega equal, so an equal-sweep
        # CW/CCW pair cancels its net displacement.
        a, b = lookup_mode(table, 58), lookup_mode(table, 59)
        assert a.v_t / a.omega == pytest.approx(b.v_t / b.omega, rel=1e-12)
        assert a.v_l / a.omega == pytest.approx(b.v_l / b.omega, rel=1e-12)


class TestLoading:
    def test_serialize_reload_is_identity(self, table):
        again = load_mode_table(serialize_mode_table(table))
        assert again == table

    def test_interpolation_weights(self):
        text = "band,4,100\n1,1.0,0.0,0.1,0.0,0.0,lo\n3,3.0,1.0,0.4,0.3,0.06,hi\n"
        t = load_mode_table(text)
        m2 = lookup_mode(t, 2)
        assert m2.v_t == pytest.approx(2.0)
        assert m2.v_l == pytest.approx(0.5)
        assert m2.omega == pytest.approx(0.25)
        assert m2.sigma_heading == pytest.approx(0.15)
        assert m2.sigma_speed == pytest.approx(0.03)

    def test_zero_anchor_inside_band_is_tolerated(self):
        text = BANDS_TEXT + self._full_active_rows() + "20,0,0,0,0.1,0.1,quiet\n"
        t = load_mode_table(text)
        assert lookup_mode(t, 20).is_zero_motion

    def test_nonzero_anchor_inside_band_contradicts(self):
        text = BANDS_TEXT + self._full_active_rows() + "20,1.0,0,0,0,0,bad\n"
        with pytest.raises(ValueError, match="no-motion band"):
            load_mode_table(text)

    def test_uncovered_run_endpoint_rejected(self):
        # active runs under the default bands: 1-12, 35, 56-62
        rows = "1,1,0,0,0,0,a\n12,1,0,0,0,0,b\n35,0,1,0.1,0,0,c\n56,0,1,-0.1,0,0,d\n"
        with pytest.raises(ValueError, match="56..62"):
            load_mode_table(BANDS_TEXT + rows)

    def test_anchor_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            load_mode_table(BANDS_TEXT + self._full_active_rows() + "101,1,0,0,0,0,x\n")

    def test_malformed_rows_rejected(self):
        for bad in (
            "5,1,2\n",
            "5,a,b,c,d,e,f\n",
            "band,10\n",
            "band,34,13\n",
        ):
            with pytest.raises(ValueError):
                load_mode_table(BANDS_TEXT + self._full_active_rows() + bad)

    def test_duplicate_anchor_rejected(self):
        text = BANDS_TEXT + self._full_active_rows() + "5,1,0,0,0,0,again\n"
        with pytest.raises(ValueError, match="duplicate"):
            load_mode_table(text)

    def test_overlapping_bands_rejected(self):
        with pytest.raises(ValueError, match="overlap"):
            load_mode_table("band,10,50\nband,40,100\n" + "1,1,0,0,0,0,a\n9,1,0,0,0,0,b\n")

    def test_negative_sigma_rejected(self):
        text = BANDS_TEXT + self._full_active_rows().replace(
            "5,1,0,0,0,0,f5", "5,1,0,0,-0.1,0,f5"
        )
        with pytest.raises(ValueError):
            load_mode_table(text)

    def test_comments_and_blank_lines_ignored(self):
        text = "# hello\n\n" + BANDS_TEXT + "# more\n" + self._full_active_rows()
        load_mode_table(text)

    def test_label_may_contain_commas(self):
        text = BANDS_TEXT + self._full_active_rows().replace(
            "5,1,0,0,0,0,f5", "5,1,0,0,0,0,runs straight, fast"
        )
        t = load_mode_table(text)
        assert lookup_mode(t, 5).label == "runs straight, fast"

    @staticmethod
    def _full_active_rows():
        # Anchors every active-run endpoint under the default bands.
        return (
            "1,0.5,0,0.01,0,0,f1\n"
            "5,1,0,0,0,0,f5\n"
            "12,0.5,0,0.01,0,0,f12\n"
            "35,0.1,0.5,0.05,0,0,f35\n"
            "56,-0.1,0.4,-0.15,0,0,f56\n"
            "62,0.1,-0.3,0.1,0,0,f62\n"
        )


anchor_vals = st.floats(min_value=-8, max_value=8, allow_nan=False)
sigma_vals = st.floats(min_value=0, max_value=0.5, allow_nan=False)


@st.composite
def calibration_texts(draw):
    rows = []
    endpoints = [1, 12, 35, 56, 62]
    extra = draw(st.lists(st.sampled_from([3, 5, 7, 9, 58, 59]), unique=True))
    for f in sorted(set(endpoints) | set(extra)):
        v_t, v_l, om = (draw(anchor_vals) for _ in range(3))
        sh, ss = draw(sigma_vals), draw(sigma_vals)
        rows.append(f"{f},{v_t!r},{v_l!r},{om!r},{sh!r},{ss!r},f{f}")
    return BANDS_TEXT + "\n".join(rows) + "\n"


class TestTableProperties:
    @settings(max_examples=50)
    @given(text=calibration_texts())
    def test_every_frequency_resolves_and_interpolation_is_bounded(self, text):
        t = load_mode_table(text)
        for f in range(1, 101):
            m = lookup_mode(t, f)
            assert m.freq_khz == f
        # interpolated entries sit between their neighbors
        for f in range(2, 100):
            if in_no_motion_band(t.no_motion_bands, f):
                continue
            prev_f, next_f = f - 1, f + 1
            if in_no_motion_band(t.no_motion_bands, prev_f) or in_no_motion_band(
                t.no_motion_bands, next_f
            ):
                continue
            if "interpolated" not in lookup_mode(t, f).label:
                continue
            for attr in ("v_t", "v_l", "omega"):
                val = getattr(lookup_mode(t, f), attr)
                lo = min(getattr(lookup_mode(t, prev_f), attr), getattr(lookup_mode(t, next_f), attr))
                hi = max(getattr(lookup_mode(t, prev_f), attr), getattr(lookup_mode(t, next_f), attr))
                assert lo - 1e-9 <= val <= hi + 1e-9

    @settings(max_examples=25)
    @given(text=calibration_texts())
    def test_serialize_reload_identity_holds_generally(self, text):
        t = load_mode_table(text)
        assert load_mode_table(serialize_mode_table(t)) == t


class TestNoiseSampling:
    def test_zero_motion_returns_exact_zero_without_consuming_rng(self, table):
        rng = np.random.Generator(np.random.PCG64(7))
        out = sample_body_velocity(lookup_mode(table, 20), 1 / 30, rng)
        assert out == (0.0, 0.0, 0.0)
        fresh = np.random.Generator(np.random.PCG64(7))
        assert rng.random() == fresh.random()

    def test_zero_sigmas_are_identity(self):
        m = MotionMode(5, 5.2, 0.0, 0.0, 0.0, 0.0, "quiet")
        rng = np.random.Generator(np.random.PCG64(0))
        assert sample_body_velocity(m, 0.5, rng) == (5.2, 0.0, 0.0)

    def test_matches_documented_derivation(self):
        # Re-derive the draw from the documented algorithm: PCG64 uniforms
        # fed through Box-Muller, speed scale on all components, heading
        # kick on omega only.
        m = MotionMode(9, 6.6, -2.0, -0.075, 0.03, 0.1, "fast")
        dt = 0.1
        got = sample_body_velocity(m, dt, np.random.Generator(np.random.PCG64(42)))

        ref = np.random.Generator(np.random.PCG64(42))
        u1, u2 = ref.random(), ref.random()
        n1 = math.sqrt(-2 * math.log(1 - u1)) * math.cos(2 * math.pi * u2)
        n2 = math.sqrt(-2 * math.log(1 - u1)) * math.sin(2 * math.pi * u2)
        scale = 1 + 0.1 * n1
        expect = (6.6 * scale, -2.0 * scale, -0.075 * scale + 0.03 * n2 / math.sqrt(dt))
        assert got == pytest.approx(expect, rel=1e-12)

    def test_same_seed_same_stream(self, table):
        m = lookup_mode(table, 9)
        a = np.random.Generator(np.random.PCG64(123))
        b = np.random.Generator(np.random.PCG64(123))
        seq_a = [sample_body_velocity(m, 1 / 30, a) for _ in range(50)]
        seq_b = [sample_body_velocity(m, 1 / 30, b) for _ in range(50)]
        assert seq_a == seq_b

    def test_noise_statistics(self):
        m = MotionMode(9, 6.0, 0.0, 0.1, 0.2, 0.05, "noisy")
        rng = np.random.Generator(np.random.PCG64(1))
        dt = 0.25
        vts, oms = [], []
        for _ in range(20000):
            v_t, _, om = sample_body_velocity(m, dt, rng)
            vts.append(v_t)
            oms.append(om)
        assert np.mean(vts) == pytest.approx(6.0, abs=0.02)
        assert np.std(vts) == pytest.approx(6.0 * 0.05, rel=0.05)
        # omega std combines the scale term and the heading kick; the kick
        # scales as 1/sqrt(dt) so integrating over a segment gives a random
        # walk with std sigma_heading * sqrt(T)
        expect_std = math.hypot(0.1 * 0.05, 0.2 / math.sqrt(dt))
        assert np.std(oms) == pytest.approx(expect_std, rel=0.05)

    def test_integrated_heading_spread_is_tick_size_independent(self):
        # summing eps * dt over a segment of length T must give a spread of
        # sigma_heading * sqrt(T) whatever tick the integrator happens to use
        m = MotionMode(59, 0.1, -0.45, 0.0, 0.15, 0.0, "turner")
        T = 2.0
        for dt in (1 / 30, 1 / 10):
            rng = np.random.Generator(np.random.PCG64(5))
            n = round(T / dt)
            finals = []
            for _ in range(4000):
                theta = 0.0
                for _ in range(n):
                    _, _, om = sample_body_velocity(m, dt, rng)
                    theta += om * dt
                finals.append(theta)
            assert np.std(finals) == pytest.approx(0.15 * math.sqrt(T), rel=0.05)

    def test_rejects_bad_dt(self, table):
        rng = np.random.Generator(np.random.PCG64(0))
        with pytest.raises(ValueError):
            sample_body_velocity(lookup_mode(table, 9), 0, rng)
