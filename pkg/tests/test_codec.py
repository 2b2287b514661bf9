import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polarlab.channels import ChannelClass, make_bec, make_bsc, make_quantized_bawgn
from polarlab.codec import (
    LLR_CLIP,
    DecodeMetric,
    SCDecoder,
    encode,
    glrt_decode,
    leaf_llrs,
    schedule_count,
    sc_decode,
    transmit,
)
from polarlab.codes import CodeSpec, bit_reversal_permutation, log2_exact
from polarlab.construction import select_information_set, synthesize


def generator_matrix(n):
    """Bit-reversal rows applied to the n-fold Kronecker power of [[1,0],[1,1]]."""
    G = np.ones((1, 1), dtype=int)
    for _ in range(n):
        G = np.kron(G, np.array([[1, 0], [1, 1]]))
    return G[bit_reversal_permutation(n)] % 2


def random_spec(n, K, rng):
    mask = np.ones(1 << n, dtype=bool)
    mask[rng.choice(1 << n, K, replace=False)] = False
    return CodeSpec(n, mask)


class TestCodeSpec:
    def test_log2_exact(self):
        assert log2_exact(1024) == 10
        for bad in (0, 3, 1000, -4):
            with pytest.raises(ValueError):
                log2_exact(bad)

    def test_round_trip(self, rng):
        spec = CodeSpec(4, rng.random(16) < 0.5, provenance={"method": "z"})
        back = CodeSpec.from_json(spec.to_json())
        assert back == spec
        assert back.K == spec.K

    def test_validation(self):
        with pytest.raises(ValueError):
            CodeSpec(3, np.ones(6, dtype=bool))
        with pytest.raises(ValueError):
            CodeSpec(1, [True, False], frozen_values=[0, 1])

    def test_embed(self):
        spec = CodeSpec(2, [True, False, True, False], frozen_values=[1, 0, 0, 0])
        np.testing.assert_array_equal(spec.embed([1, 1]), [1, 1, 0, 1])


class TestEncode:
    def test_examples(self):
        np.testing.assert_array_equal(encode([1, 0]), [1, 0])
        np.testing.assert_array_equal(encode([0, 0, 0, 1]), [1, 1, 1, 1])

    def test_length(self):
        with pytest.raises(ValueError):
            encode(np.zeros(6))

    @pytest.mark.parametrize("n", range(0, 6))
    def test_against_matrix(self, n, rng):
        u = rng.integers(0, 2, (20, 1 << n))
        np.testing.assert_array_equal(encode(u), (u @ generator_matrix(n)) % 2)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10), st.integers(0, 2**31 - 1))
    def test_involution(self, n, seed):
        u = np.random.default_rng(seed).integers(0, 2, 1 << n, dtype=np.uint8)
        np.testing.assert_array_equal(encode(encode(u)), u)


class TestTransmit:
    def test_perfect(self, rng):
        x = rng.integers(0, 2, 64, dtype=np.uint8)
        y = transmit(x, make_bsc(0.0), rng)
        np.testing.assert_array_equal(y, x)

    def test_full_erasure(self, rng):
        W = make_bec(1.0)
        y = transmit(rng.integers(0, 2, 64), W, rng)
        assert set(np.asarray(W.labels)[y]) == {"erasure"}

    def test_bsc_flip_rate(self):
        x = np.zeros(100_000, dtype=np.uint8)
        y = transmit(x, make_bsc(0.11), np.random.default_rng(5))
        # flips land on the output whose label is the opposite bit
        flips = np.mean(y != 0)
        assert abs(flips - 0.11) < 4 * math.sqrt(0.11 * 0.89 / 1e5)

    def test_seeded(self):
        x = np.zeros(256, dtype=np.uint8)
        a = transmit(x, make_bsc(0.2), np.random.default_rng(1))
        b = transmit(x, make_bsc(0.2), np.random.default_rng(1))
        np.testing.assert_array_equal(a, b)


def brute_force_sc_llrs(y, channels, n):
    """Exact SC decision LLRs by summing over all future inputs, all inputs free, true past u."""
    N = 1 << n
    G = generator_matrix(n)
    us = np.array(list(itertools.product((0, 1), repeat=N)))
    xs = (us @ G) % 2
    lik = np.ones(len(us))
    for k in range(N):
        lik *= channels[k].rows[xs[:, k], y[k]]
    return us, lik


@pytest.mark.parametrize("seed", range(6))
def test_decision_llrs_match_exhaustive_sum(seed):
    rng = np.random.default_rng(seed)
    n = 3
    N = 1 << n
    chans = [make_bsc(0.2), make_quantized_bawgn(1.0, 4)] * (N // 2)
    u = rng.integers(0, 2, N, dtype=np.uint8)
    y = transmit(encode(u), chans, rng)
    us, lik = brute_force_sc_llrs(y, chans, n)
    dec = SCDecoder(CodeSpec(n, np.ones(N, dtype=bool), u))
    _, _, L = dec.decode_llr(leaf_llrs(y[None], chans), genie=u[None])
    for i in range(N):
        prefix = np.all(us[:, :i] == u[:i], axis=1)
        p0 = lik[prefix & (us[:, i] == 0)].sum()
        p1 = lik[prefix & (us[:, i] == 1)].sum()
        assert L[0, i] == pytest.approx(math.log(p0 / p1), abs=1e-9)


class TestSC:
    @pytest.mark.parametrize("n", range(1, 11))
    def test_noiseless_recovery_and_counts(self, n, rng):
        N = 1 << n
        for K in (0, N // 3, N):
            spec = random_spec(n, K, rng)
            u = spec.embed(rng.integers(0, 2, (8, K), dtype=np.uint8))
            dec = SCDecoder(spec)
            u_hat, x_hat = sc_decode(encode(u), spec, channels=make_bsc(0.0), decoder=dec)
            np.testing.assert_array_equal(u_hat, u)
            np.testing.assert_array_equal(x_hat, encode(u))
            assert dec.llr_updates == schedule_count(n) == n * N
            assert dec.node_visits == 2 * N - 1

    def test_perfect_indices_never_fail(self):
        # mixing BEC(0) and BEC(1) makes every bit-channel perfect or useless
        for n in range(1, 11):
            N = 1 << n
            pattern = [make_bec(0.0), make_bec(1.0), make_bec(0.5)]
            chans = [pattern[k % 3] for k in range(N)]
            z = synthesize(chans).z
            good = np.flatnonzero(z == 0.0)
            mask = np.ones(N, dtype=bool)
            mask[good] = False
            spec = CodeSpec(n, mask)
            for seed in range(100 if n <= 6 else 10):
                r = np.random.default_rng(seed)
                u = spec.embed(r.integers(0, 2, (10, spec.K), dtype=np.uint8))
                y = transmit(encode(u), chans, r)
                u_hat, _ = sc_decode(y, spec, channels=chans)
                np.testing.assert_array_equal(u_hat[:, good], u[:, good])

    def test_tie_decides_zero(self):
        spec = CodeSpec(1, [False, False])
        W = make_bec(1.0)
        erasure = list(W.labels).index("erasure")
        u_hat, _ = sc_decode(np.array([erasure, erasure]), spec, channels=W)
        np.testing.assert_array_equal(u_hat, [0, 0])

    def test_saturated_metric(self, rng):
        # a zero-probability symbol under the metric saturates instead of overflowing
        spec = select_information_set(synthesize([make_bsc(0.11)] * 64), 16)
        u = spec.embed(rng.integers(0, 2, (20, 16), dtype=np.uint8))
        y = transmit(encode(u), make_bsc(0.11), rng)
        u_hat, _ = sc_decode(y, spec, DecodeMetric.mismatched(make_bsc(0.0)))
        assert u_hat.shape == u.shape
        assert np.all(np.abs(leaf_llrs(y, make_bsc(0.0))) == LLR_CLIP)

    def test_alphabet_mismatch(self):
        spec = CodeSpec(1, [True, False])
        with pytest.raises(ValueError):
            sc_decode(np.array([0, 2]), spec, DecodeMetric.mismatched(make_bsc(0.1)))

    def test_bec_rate_ordering(self):
        N = 1 << 10
        W = make_bec(0.5)
        s = synthesize([W] * N)
        rates = {}
        for K in (300, 550):
            spec = select_information_set(s, K)
            rng = np.random.default_rng(K)
            u = spec.embed(rng.integers(0, 2, (2000, K), dtype=np.uint8))
            u_hat, _ = sc_decode(transmit(encode(u), W, rng), spec, channels=W)
            rates[K] = np.mean(np.any(u_hat != u, axis=1))
            assert rates[K] <= min(1.0, s.z[spec.information_set].sum()) + 3 * math.sqrt(0.25 / 2000)
        assert rates[300] < rates[550]


class TestGLRT:
    def test_singleton_equals_matched(self, rng):
        W = make_bsc(0.11)
        spec = select_information_set(synthesize([W] * 128), 40)
        u = spec.embed(rng.integers(0, 2, (50, 40), dtype=np.uint8))
        y = transmit(encode(u), W, rng)
        a, xa = sc_decode(y, spec, channels=W)
        b, xb, chosen = glrt_decode(y, spec, ChannelClass((W,)))
        np.testing.assert_array_equal(a, b)
        np.testing.assert_array_equal(xa, xb)
        assert np.all(chosen == 0)

    def test_noiseless_member_wins(self, rng):
        spec = select_information_set(synthesize([make_bsc(0.2)] * 64), 20)
        u = spec.embed(rng.integers(0, 2, 20, dtype=np.uint8))
        x = encode(u)
        cls = ChannelClass((make_bsc(0.2), make_bsc(0.0)))
        u_hat, x_hat, chosen, scores = glrt_decode(x, spec, cls, with_scores=True)
        np.testing.assert_array_equal(x_hat, x)
        # log-likelihood 0: probability one under the noiseless member
        assert scores[chosen] == 0.0

    def test_metric_kinds(self):
        with pytest.raises(ValueError):
            DecodeMetric("bogus")
        with pytest.raises(ValueError):
            DecodeMetric.glrt([make_bsc(0.1)]).metric_channels(None)
