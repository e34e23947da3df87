"""Random-stream reproducibility and sampling contracts."""

import numpy as np
import pytest

from kofn.rng import RngStream, derive_stream, sample_exponential


class TestDeterminism:
    def test_same_seed_and_stream_bit_identical(self):
        a = RngStream(12345, 7).exponential(2.0, size=1000)
        b = RngStream(12345, 7).exponential(2.0, size=1000)
        assert np.array_equal(a, b)

    def test_single_draws_replay(self):
        s1, s2 = RngStream(9, 3), RngStream(9, 3)
        seq1 = [sample_exponential(s1, 1.5) for _ in range(50)]
        seq2 = [sample_exponential(s2, 1.5) for _ in range(50)]
        assert seq1 == seq2

    def test_distinct_stream_ids_differ(self):
        a = RngStream(12345, 0).exponential(2.0, size=1000)
        b = RngStream(12345, 1).exponential(2.0, size=1000)
        assert not np.array_equal(a, b)

    def test_split_matches_fresh_construction(self):
        parent = RngStream(42, 0)
        child = parent.split(55)
        assert np.array_equal(
            child.exponential(1.0, 100), RngStream(42, 55).exponential(1.0, 100)
        )

    def test_streams_look_independent(self):
        a = RngStream(1, 10).exponential(1.0, size=20_000)
        b = RngStream(1, 11).exponential(1.0, size=20_000)
        corr = np.corrcoef(a, b)[0, 1]
        assert abs(corr) < 0.02


class TestSampling:
    def test_draws_nonnegative(self):
        assert (RngStream(3, 0).exponential(5.0, size=10_000) >= 0).all()

    def test_million_draw_mean_within_one_percent(self):
        draws = RngStream(99, 0).exponential(2.0, size=1_000_000)
        assert 0.495 <= draws.mean() <= 0.505

    @pytest.mark.parametrize("rate", [0.0, -1.0])
    def test_rejects_nonpositive_rate(self, rate):
        with pytest.raises(ValueError):
            sample_exponential(RngStream(1, 0), rate)


class TestDeriveStream:
    def test_stable(self):
        assert derive_stream("forkjoin", 10, 5, 1.0, 3.0, 0) == derive_stream(
            "forkjoin", 10, 5, 1.0, 3.0, 0
        )

    def test_distinct_inputs_distinct_ids(self):
        ids = {
            derive_stream("forkjoin", n, k, 1.0, 3.0, rep)
            for n in range(1, 11)
            for k in range(1, 11)
            for rep in range(10)
        }
        assert len(ids) == 10 * 10 * 10

    def test_fits_in_64_bits(self):
        assert 0 <= derive_stream("x", 1.5) < 2**64
