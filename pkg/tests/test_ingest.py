"""Loading, validation, synthetic generation, and macro alignment."""

from datetime import date, timedelta

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_series
from fxsignal import ingest
from fxsignal.errors import (
    CoverageError,
    EmptyInputError,
    ParseError,
    ValidationError,
)


class TestCandle:
    def test_valid_candle(self):
        c = ingest.Candle(date(2020, 1, 1), 1.1, 1.2, 1.0, 1.15)
        assert c.high == 1.2

    def test_low_above_high_rejected(self):
        with pytest.raises(ValidationError):
            ingest.Candle(date(2020, 1, 1), 1.1, 1.0, 1.2, 1.15)

    def test_close_outside_range_rejected(self):
        with pytest.raises(ValidationError):
            ingest.Candle(date(2020, 1, 1), 1.1, 1.2, 1.0, 1.25)

    def test_nonpositive_price_rejected(self):
        with pytest.raises(ValidationError):
            ingest.Candle(date(2020, 1, 1), 0.0, 1.2, -1.0, 1.1)


class TestPriceSeries:
    def test_dates_must_increase(self):
        c = ingest.Candle(date(2020, 1, 1), 1.1, 1.2, 1.0, 1.15)
        with pytest.raises(ValidationError):
            ingest.PriceSeries([c, c])

    def test_empty_rejected(self):
        with pytest.raises(EmptyInputError):
            ingest.PriceSeries([])

    def test_prefix(self):
        s = make_series([1.0, 1.1, 1.2, 1.3])
        p = s.prefix(2)
        assert len(p) == 2
        assert list(p.close) == [1.0, 1.1]


class TestPriceCsv:
    def test_roundtrip_exact(self, tmp_path, walk300):
        path = str(tmp_path / "px.csv")
        ingest.save_price_series(walk300, path)
        back = ingest.load_price_series(path)
        assert back.dates == walk300.dates
        for field in ("open", "high", "low", "close"):
            assert np.array_equal(getattr(back, field), getattr(walk300, field))

    def test_rewrite_byte_identical(self, tmp_path, walk300):
        p1 = tmp_path / "a.csv"
        p2 = tmp_path / "b.csv"
        ingest.save_price_series(walk300, str(p1))
        ingest.save_price_series(ingest.load_price_series(str(p1)), str(p2))
        assert p1.read_bytes() == p2.read_bytes()

    def test_bad_header_rejected(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("time,o,h,l,c\n2020-01-01,1,2,0.5,1\n")
        with pytest.raises(ParseError):
            ingest.load_price_series(str(p))

    def test_bad_float_rejected(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("date,open,high,low,close\n2020-01-01,1.0,oops,0.5,1.0\n")
        with pytest.raises(ParseError):
            ingest.load_price_series(str(p))

    def test_comment_lines_skipped(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text("# provenance\ndate,open,high,low,close\n2020-01-01,1.0,1.2,0.9,1.1\n")
        s = ingest.load_price_series(str(p))
        assert len(s) == 1


class TestSynthetic:
    def test_deterministic(self):
        a = ingest.generate_synthetic(3, 50)
        b = ingest.generate_synthetic(3, 50)
        assert np.array_equal(a.close, b.close)
        assert not np.array_equal(a.close, ingest.generate_synthetic(4, 50).close)

    def test_length_and_validity(self):
        s = ingest.generate_synthetic(0, 120)
        assert len(s) == 120
        assert np.all(s.low <= np.minimum(s.open, s.close))
        assert np.all(s.high >= np.maximum(s.open, s.close))
        assert np.all(s.low > 0)

    @pytest.mark.parametrize("seed", range(8))
    def test_trending_ends_higher(self, seed):
        s = ingest.generate_synthetic(seed, 200, regime="trending")
        assert s.close[-1] > s.close[0]

    def test_unknown_regime(self):
        with pytest.raises(ParseError):
            ingest.generate_synthetic(0, 10, regime="sideways")

    def test_zero_days(self):
        with pytest.raises(EmptyInputError):
            ingest.generate_synthetic(0, 0)


class TestMacro:
    def test_series_validation(self):
        with pytest.raises(ParseError):
            ingest.MacroSeries("cpi", "JP", ((date(2020, 1, 1), 1.0),))
        with pytest.raises(ValidationError):
            ingest.MacroSeries("cpi", "US", (
                (date(2020, 1, 2), 1.0), (date(2020, 1, 1), 2.0)))

    def test_align_matches_latest_release_scan(self, walk300):
        # [DERIVED] oracle: per day, linear scan for the latest release <= day
        rng = np.random.default_rng(5)
        first = walk300.dates[0]
        releases = []
        day = first
        while day <= walk300.dates[-1]:
            releases.append((day, float(rng.normal())))
            day += timedelta(days=int(rng.integers(10, 40)))
        macro = ingest.MacroSeries("cpi", "US", tuple(releases))
        out = ingest.align_macro(macro, walk300)
        for i, d in enumerate(walk300.dates):
            best = max((r for r in releases if r[0] <= d), key=lambda r: r[0])
            assert out.values[i] == best[1]
            assert out.days_since[i] == (d - best[0]).days

    def test_align_requires_coverage(self, walk300):
        late = ingest.MacroSeries("cpi", "US", ((walk300.dates[5], 1.0),))
        with pytest.raises(CoverageError):
            ingest.align_macro(late, walk300)

    def test_synthetic_macro_covers_calendar(self, walk300):
        series = ingest.generate_synthetic_macro(1, walk300)
        assert len(series) == 16
        assert len({m.key for m in series}) == 16
        for m in series:
            aligned = ingest.align_macro(m, walk300)  # must not raise
            assert len(aligned.values) == len(walk300)

    def test_macro_csv_roundtrip(self, tmp_path, walk300):
        macro = ingest.generate_synthetic_macro(2, walk300)[0]
        ingest.save_macro_series(macro, str(tmp_path))
        loaded = ingest.load_macro_dir(str(tmp_path))
        assert len(loaded) == 1
        assert loaded[0] == macro


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(min_value=0.5, max_value=2.0), min_size=1, max_size=60))
def test_price_roundtrip_property(tmp_path_factory, closes):
    """Any positive close path survives a save/load cycle exactly."""
    s = make_series(closes)
    path = str(tmp_path_factory.mktemp("prop") / "px.csv")
    ingest.save_price_series(s, path)
    back = ingest.load_price_series(path)
    assert np.array_equal(back.close, s.close)
    assert np.array_equal(back.high, s.high)
