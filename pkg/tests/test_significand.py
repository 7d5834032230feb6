import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from benfordlab import (
    FULL,
    ParseError,
    SignificandRecord,
    TruncationProfile,
    ZeroOrNonFinite,
    ZeroValue,
    digit_counts_by_position,
    first_digit,
    fractional_significand,
    parse_decimal,
    read_significand_file,
    significand,
)


class TestSignificand:
    def test_moves_decimal_point(self):
        assert significand(0.0314) == pytest.approx(3.14, rel=1e-12)

    def test_sign_ignored(self):
        assert significand(-271.8) == pytest.approx(2.718, rel=1e-12)

    def test_identity_on_unit_decade(self):
        assert significand(1.0) == 1.0

    def test_power_of_ten_boundary(self):
        # log10(1000) lands one ulp below 3.0 in floats; the clamp must
        # return 1.0, not 9.999...
        assert significand(1000.0) == 1.0
        assert significand(1e-3) == 1.0

    def test_decade_invariance(self):
        assert significand(31.4) == pytest.approx(significand(3.14), rel=1e-14)

    @pytest.mark.parametrize("bad", [0.0, np.inf, -np.inf, np.nan])
    def test_rejects_zero_and_nonfinite(self, bad):
        with pytest.raises(ZeroOrNonFinite):
            significand(bad)

    def test_array_input(self):
        out = significand(np.array([0.0314, -271.8, 1.0]))
        assert out == pytest.approx([3.14, 2.718, 1.0], rel=1e-12)

    @given(st.floats(min_value=1e-300, max_value=1e300).filter(lambda x: x > 0),
           st.sampled_from([2.0, 3.0, 10.0, 0.5]))
    @settings(max_examples=200, deadline=None)
    def test_scale_invariance(self, x, c):
        lhs = significand(c * x)
        rhs = 10.0 ** ((math.log10(c) + math.log10(significand(x))) % 1.0)
        # compare on the circle of log-significands: the two evaluation
        # paths may fall on opposite sides of a decade boundary
        d = abs(math.log10(lhs) - math.log10(rhs)) % 1.0
        assert min(d, 1.0 - d) < 1e-12

    @given(st.floats(min_value=0.0, max_value=1.0 - 2e-12))
    @settings(max_examples=200, deadline=None)
    def test_round_trip_on_powers(self, u):
        # u values within ~1e-12 of 1.0 are excluded: there the boundary
        # clamp deliberately maps to the next decade
        s = 10.0**u
        assert abs(significand(s) - s) <= 1e-12 * s

    @given(st.floats(min_value=1e-30, max_value=1e30).filter(lambda x: x != 0))
    @settings(max_examples=300, deadline=None)
    def test_range_and_digit_consistency(self, x):
        s = significand(x)
        assert 1.0 <= s < 10.0
        d = first_digit(x)
        assert d == math.floor(s)
        assert 1 <= d <= 9
        f = fractional_significand(x)
        assert 0.0 <= f < 1.0
        assert f == pytest.approx(s - d, abs=1e-15)


class TestFirstDigit:
    @pytest.mark.parametrize("x,d", [(9999, 9), (0.002, 2), (1.0, 1), (2.0, 2), (100.0, 1)])
    def test_examples(self, x, d):
        assert first_digit(x) == d


class TestFractionalSignificand:
    def test_examples(self):
        assert fractional_significand(3.14) == pytest.approx(0.14, abs=1e-12)
        assert fractional_significand(9.0) == 0.0
        assert fractional_significand(0.0271) == pytest.approx(0.71, abs=1e-12)


class TestParseDecimal:
    def test_trailing_zero_counts(self):
        r = parse_decimal("3.140")
        assert r.significand == pytest.approx(3.14, rel=1e-15)
        assert r.digit_count == 4

    def test_leading_zeros_not_significant(self):
        r = parse_decimal("0.002")
        assert r.significand == 2.0
        assert r.digit_count == 1

    def test_full_above_cap(self):
        assert parse_decimal("1234567", K=6).digit_count == FULL
        assert parse_decimal("123456", K=6).digit_count == 6

    @pytest.mark.parametrize("text,sig,count", [
        ("100", 1.0, 3),
        ("1.50e-2", 1.5, 3),
        ("-27.10", 2.71, 4),
        ("+9", 9.0, 1),
        ("0.0200", 2.0, 3),
        ("10.01", 1.001, 4),
    ])
    def test_digit_counting(self, text, sig, count):
        r = parse_decimal(text)
        assert r.significand == pytest.approx(sig, rel=1e-15)
        assert r.digit_count == count

    @pytest.mark.parametrize("bad", ["", "abc", "1.2.3", "1e", "--5", "2,5"])
    def test_malformed(self, bad):
        with pytest.raises(ParseError):
            parse_decimal(bad)

    @pytest.mark.parametrize("zero", ["0", "0.000", "000e5", "-0.0"])
    def test_zero_value(self, zero):
        with pytest.raises(ZeroValue):
            parse_decimal(zero)

    def test_agrees_with_numeric_parse(self):
        for text in ["3.140", "0.002", "-27.18", "4700", "6.02e23", "1.6180339887"]:
            r = parse_decimal(text)
            direct = significand(float(text))
            assert r.significand == pytest.approx(direct, rel=4e-16)

    def test_invariants_on_record(self):
        r = parse_decimal("56.20")
        assert r.first_digit == math.floor(r.significand)
        assert 0.0 <= r.frac < 1.0
        # k written digits means the significand scales to an integer
        scaled = r.significand * 10.0 ** (r.digit_count - 1)
        assert scaled == pytest.approx(round(scaled), abs=1e-9)

    @given(st.integers(min_value=1, max_value=999999), st.integers(min_value=-5, max_value=5))
    @settings(max_examples=200, deadline=None)
    def test_roundtrip_written_integers(self, mantissa, shift):
        text = f"{mantissa}e{shift}"
        r = parse_decimal(text)
        assert r.significand == pytest.approx(significand(float(text)), rel=4e-16)
        # mantissa has no leading zeros, so every written digit counts
        assert r.digit_count == len(str(mantissa))


class TestTruncationProfile:
    def test_counts_balance(self):
        recs = [parse_decimal(t) for t in ["1.5", "2.53", "9.999999999", "3"]]
        prof = TruncationProfile.from_records(recs)
        assert prof.n == 4
        assert prof.counts == (1, 1, 1, 0, 0, 0)
        assert prof.n_full == 1
        assert prof.n_full + sum(prof.counts) == prof.n

    def test_uniform_and_all_full(self):
        assert TruncationProfile.uniform(10, 2).counts == (0, 10, 0, 0, 0, 0)
        assert TruncationProfile.all_full(7).n_full == 7
        assert not TruncationProfile.all_full(7).any_discretized

    def test_template_matches_counts(self):
        prof = TruncationProfile(counts=(2, 0, 1, 0, 0, 0), n_full=3)
        t = prof.template()
        assert sorted(t.tolist()) == sorted([1, 1, 3, FULL, FULL, FULL])

    def test_validation(self):
        with pytest.raises(ValueError):
            TruncationProfile(counts=(1, 2), K=6)
        with pytest.raises(ValueError):
            TruncationProfile(counts=(-1, 0, 0, 0, 0, 0))


class TestDigitCountsByPosition:
    def test_aligned_with_sorted_significands(self):
        recs = [parse_decimal(t) for t in ["5.123456789", "1.5", "3.14"]]
        kvec = digit_counts_by_position(recs)
        # sorted significands: 1.5 (2 digits), 3.14 (3), 5.12... (FULL)
        assert kvec.tolist() == [2, 3, FULL]


class TestReadFile(object):
    def test_reads_and_skips(self, tmp_path):
        path = tmp_path / "data.txt"
        path.write_text("# header\n3.14\n\n0.002\n# trailing\n27\n", encoding="utf-8")
        recs = read_significand_file(path)
        assert [r.significand for r in recs] == pytest.approx([3.14, 2.0, 2.7])
        assert [r.digit_count for r in recs] == [3, 1, 2]

    def test_error_carries_line_number(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("1.5\nnot-a-number\n", encoding="utf-8")
        with pytest.raises(ParseError, match=":2:"):
            read_significand_file(path)

    def test_zero_line_flagged(self, tmp_path):
        path = tmp_path / "zero.txt"
        path.write_text("1.5\n0.0\n", encoding="utf-8")
        with pytest.raises(ZeroValue, match=":2:"):
            read_significand_file(path)
