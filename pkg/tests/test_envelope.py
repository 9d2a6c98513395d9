import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subexp.envelope import (
    ColumnSpec,
    DataError,
    EnvelopeConfig,
    TimeSeries,
    ingest_csv,
    rolling_local_variance,
    variance_envelope,
)

# small dyadic values so that shift/scale identities hold without rounding
dyadic = st.integers(min_value=-64, max_value=64).map(lambda k: k / 8.0)


def textbook_variance(window, demean):
    # independent oracle: direct two-pass summation
    L = len(window)
    if demean:
        mu = sum(window) / L
        return sum((x - mu) ** 2 for x in window) / (L - 1)
    return sum(x * x for x in window) / (L - 1)


def oracle_rolling(values, L, K, t, demean=True):
    out = []
    for j in range(1, K + 1):
        w = values[t - L - j + 1 : t - j + 1]
        out.append(textbook_variance(w, demean))
    return out


class TestTimeSeries:
    def test_rejects_empty(self):
        with pytest.raises(DataError):
            TimeSeries(())

    def test_rejects_nan_with_explicit_message(self):
        with pytest.raises(DataError, match="not imputed"):
            TimeSeries((1.0, math.nan, 2.0))

    def test_rejects_inf(self):
        with pytest.raises(DataError):
            TimeSeries((math.inf,))

    def test_timestamp_length_mismatch(self):
        with pytest.raises(DataError):
            TimeSeries((1.0, 2.0), timestamps=(0.0,))

    def test_timestamps_must_increase(self):
        with pytest.raises(DataError, match="increas"):
            TimeSeries((1.0, 2.0, 3.0), timestamps=(0.0, 2.0, 2.0))

    def test_len(self):
        assert len(TimeSeries((1.0, 2.0, 3.0))) == 3


class TestEnvelopeConfig:
    def test_window_lower_bound(self):
        with pytest.raises(ValueError):
            EnvelopeConfig(window=1, num_windows=1)

    def test_num_windows_lower_bound(self):
        with pytest.raises(ValueError):
            EnvelopeConfig(window=2, num_windows=0)


class TestRollingLocalVariance:
    def test_constant_series_is_zero(self):
        z = TimeSeries(tuple([3.25] * 12))
        out = rolling_local_variance(z, EnvelopeConfig(window=4, num_windows=3))
        assert out == [0.0, 0.0, 0.0]

    def test_alternating_signs(self):
        # +-1 alternation: every length-2 window holds {-1, 1}, variance 2
        z = TimeSeries(tuple((-1.0) ** i for i in range(10)))
        out = rolling_local_variance(z, EnvelopeConfig(window=2, num_windows=3))
        assert out == [2.0, 2.0, 2.0]
        assert out == oracle_rolling(list(z.values), 2, 3, len(z))

    def test_raw_second_moment_of_constant(self):
        c = 1.5
        z = TimeSeries(tuple([c] * 8))
        out = rolling_local_variance(
            z, EnvelopeConfig(window=2, num_windows=2, demean=False)
        )
        # sum of two c^2 over denominator 1
        assert out == [2 * c * c] * 2 == [4.5, 4.5]

    def test_matches_textbook_oracle(self):
        rng = np.random.default_rng(61)
        vals = [float(v) for v in rng.normal(size=40)]
        z = TimeSeries(tuple(vals))
        for demean in (True, False):
            got = rolling_local_variance(
                z, EnvelopeConfig(window=5, num_windows=4, demean=demean), t_index=30
            )
            want = oracle_rolling(vals, 5, 4, 30, demean)
            assert got == pytest.approx(want, rel=1e-12, abs=1e-14)

    def test_windows_end_strictly_before_t(self):
        # values after position t must not influence the result
        vals = [float(v) for v in np.random.default_rng(3).normal(size=30)]
        z1 = TimeSeries(tuple(vals))
        z2 = TimeSeries(tuple(vals[:20] + [999.0] * 10))
        cfg = EnvelopeConfig(window=6, num_windows=3)
        assert rolling_local_variance(z1, cfg, t_index=20) == rolling_local_variance(
            z2, cfg, t_index=20
        )

    def test_default_t_is_series_end(self):
        vals = [float(v) for v in np.random.default_rng(4).normal(size=15)]
        z = TimeSeries(tuple(vals))
        cfg = EnvelopeConfig(window=4, num_windows=2)
        assert rolling_local_variance(z, cfg) == rolling_local_variance(z, cfg, t_index=15)

    def test_insufficient_history_reports_requirement(self):
        z = TimeSeries(tuple(range(5)))
        with pytest.raises(DataError, match="need at least 6"):
            rolling_local_variance(z, EnvelopeConfig(window=4, num_windows=3), t_index=5)

    def test_t_beyond_series(self):
        z = TimeSeries((1.0, 2.0, 3.0))
        with pytest.raises(DataError, match="beyond"):
            rolling_local_variance(z, EnvelopeConfig(window=2, num_windows=1), t_index=4)

    def test_raw_equals_demeaned_plus_mean_term(self):
        rng = np.random.default_rng(71)
        vals = [float(v) for v in rng.normal(loc=2.0, size=25)]
        z = TimeSeries(tuple(vals))
        L, K, t = 6, 4, 22
        dem = rolling_local_variance(z, EnvelopeConfig(L, K, demean=True), t_index=t)
        raw = rolling_local_variance(z, EnvelopeConfig(L, K, demean=False), t_index=t)
        for j in range(K):
            w = vals[t - L - j : t - j]
            mu = sum(w) / L
            assert raw[j] == pytest.approx(dem[j] + L * mu * mu / (L - 1), rel=1e-12)

    # a power-of-two window keeps the window mean exactly representable for
    # dyadic data, so the equivariance identities hold without any tolerance
    @given(vals=st.lists(dyadic, min_size=8, max_size=20), c=st.integers(-8, 8))
    @settings(max_examples=100, deadline=None)
    def test_shift_equivariance_exact(self, vals, c):
        cfg = EnvelopeConfig(window=4, num_windows=2)
        base = rolling_local_variance(TimeSeries(tuple(vals)), cfg)
        shifted = rolling_local_variance(TimeSeries(tuple(v + c for v in vals)), cfg)
        assert shifted == base

    @given(vals=st.lists(dyadic, min_size=8, max_size=20), k=st.integers(-3, 3))
    @settings(max_examples=100, deadline=None)
    def test_scale_equivariance_exact_for_powers_of_two(self, vals, k):
        s = 2.0**k
        cfg = EnvelopeConfig(window=4, num_windows=2)
        base = rolling_local_variance(TimeSeries(tuple(vals)), cfg)
        scaled = rolling_local_variance(TimeSeries(tuple(s * v for v in vals)), cfg)
        assert scaled == [s * s * b for b in base]

    def test_shift_equivariance_close_for_general_windows(self):
        rng = np.random.default_rng(13)
        vals = [float(v) for v in rng.normal(size=20)]
        cfg = EnvelopeConfig(window=5, num_windows=3)
        base = rolling_local_variance(TimeSeries(tuple(vals)), cfg)
        shifted = rolling_local_variance(TimeSeries(tuple(v + 7.5 for v in vals)), cfg)
        assert shifted == pytest.approx(base, rel=1e-9, abs=1e-12)

    def test_longer_windows_concentrate(self):
        # iid data: the spread of local variances shrinks as L grows
        rng = np.random.default_rng(101)
        vals = tuple(float(v) for v in rng.uniform(-1, 1, size=6000))
        z = TimeSeries(vals)
        spreads = []
        for L in (10, 100, 1000):
            out = rolling_local_variance(z, EnvelopeConfig(window=L, num_windows=5))
            spreads.append(max(out) - min(out))
        assert spreads[2] < spreads[0]


class TestVarianceEnvelope:
    def test_constant_inputs(self):
        env = variance_envelope([2.0, 2.0, 2.0])
        assert (env.sigma_lo_sq, env.sigma_hi_sq) == (2.0, 2.0)

    def test_min_max(self):
        env = variance_envelope([0.5, 1.5, 1.0])
        assert (env.sigma_lo_sq, env.sigma_hi_sq) == (0.5, 1.5)
        assert env.per_window == ((1, 0.5), (2, 1.5), (3, 1.0))

    def test_ordering_invariant(self):
        env = variance_envelope([3.0, 0.25])
        assert env.sigma_lo_sq <= env.sigma_hi_sq

    def test_validation(self):
        with pytest.raises(ValueError):
            variance_envelope([])
        with pytest.raises(ValueError):
            variance_envelope([1.0, -0.5])
        with pytest.raises(ValueError):
            variance_envelope([math.nan])

    def test_to_dict(self):
        obj = variance_envelope([1.0, 4.0]).to_dict()
        assert obj["sigma_lo_sq"] == 1.0
        assert obj["sigma_hi_sq"] == 4.0
        assert obj["per_window"] == [[1, 1.0], [2, 4.0]]


class TestRegimeSwitching:
    def test_envelope_brackets_both_regimes(self):
        # two uniform-noise regimes, variance a^2/3 each; windows drawn
        # entirely inside one regime estimate that regime's variance
        rng = np.random.default_rng(314)
        a1, a2 = 0.3, 0.9
        n = 2000
        vals = np.concatenate([rng.uniform(-a1, a1, n), rng.uniform(-a2, a2, n)])
        z = TimeSeries(tuple(float(v) for v in vals))
        cfg = EnvelopeConfig(window=200, num_windows=20)
        sig1 = rolling_local_variance(z, cfg, t_index=n)
        sig2 = rolling_local_variance(z, cfg, t_index=2 * n)
        env = variance_envelope(sig1 + sig2)
        assert env.sigma_lo_sq == pytest.approx(a1**2 / 3, rel=0.15)
        assert env.sigma_hi_sq == pytest.approx(a2**2 / 3, rel=0.15)


class TestIngestCsv:
    def test_single_column(self, tmp_path):
        p = tmp_path / "samples.csv"
        p.write_text("0.3\n1.2\n2.5\n")
        z = ingest_csv(str(p))
        assert z.values == (0.3, 1.2, 2.5)
        assert z.timestamps is None

    def test_header_and_named_column(self, tmp_path):
        p = tmp_path / "returns.csv"
        p.write_text("date,ret\n1,0.5\n2,-0.25\n")
        z = ingest_csv(str(p), ColumnSpec(value="ret"))
        assert z.values == (0.5, -0.25)

    def test_named_timestamp_column(self, tmp_path):
        p = tmp_path / "returns.csv"
        p.write_text("date,ret\n10,0.5\n20,-0.25\n")
        z = ingest_csv(str(p), ColumnSpec(value="ret", timestamp="date"))
        assert z.timestamps == (10.0, 20.0)

    def test_non_numeric_cell_names_row(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("abc\n1.0\n")
        with pytest.raises(DataError, match="row 1"):
            ingest_csv(str(p))

    def test_non_numeric_after_header_names_data_row(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("ret\nabc\n")
        with pytest.raises(DataError, match="row 1.*'abc'"):
            ingest_csv(str(p), ColumnSpec(value="ret"))

    def test_nan_cell_rejected(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("1.0\nnan\n")
        with pytest.raises(DataError, match="row 2"):
            ingest_csv(str(p))

    def test_blank_row_rejected(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("1.0\n\n2.0\n")
        with pytest.raises(DataError, match="blank"):
            ingest_csv(str(p))

    def test_missing_file(self):
        with pytest.raises(DataError, match="does not exist"):
            ingest_csv("/nonexistent/nowhere.csv")

    def test_missing_column_in_header(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("a,b\n1,2\n")
        with pytest.raises(DataError, match="not found"):
            ingest_csv(str(p), ColumnSpec(value="ret"))

    def test_column_index_out_of_range_names_row(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("1.0,2.0\n3.0\n")
        with pytest.raises(DataError, match="row 2"):
            ingest_csv(str(p), ColumnSpec(value=1))

    def test_name_without_header_rejected(self):
        with pytest.raises(ValueError, match="header"):
            ColumnSpec(value="ret", header=False).needs_header()

    def test_decreasing_timestamps_rejected(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("5,1.0\n4,2.0\n")
        with pytest.raises(DataError):
            ingest_csv(str(p), ColumnSpec(value=1, timestamp=0))

    def test_roundtrip_into_rolling_variance(self, tmp_path):
        rng = np.random.default_rng(8)
        vals = [float(v) for v in rng.normal(size=12)]
        p = tmp_path / "series.csv"
        p.write_text("".join(f"{v!r}\n" for v in vals))
        z = ingest_csv(str(p))
        got = rolling_local_variance(z, EnvelopeConfig(window=3, num_windows=2))
        want = oracle_rolling(vals, 3, 2, 12)
        assert got == pytest.approx(want, rel=1e-12)
