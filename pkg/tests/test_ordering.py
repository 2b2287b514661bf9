import itertools

import numpy as np
import pytest

from polarlab.channels import (
    BinaryChannel,
    bhattacharyya,
    gallager_e0,
    make_bec,
    make_bsc,
    make_quantized_bawgn,
    random_symmetric_channel,
    symmetric_capacity,
)
from polarlab.extremality import bsc_with_capacity
from polarlab.ordering import (
    PROBE_COLUMNS,
    AsymmetricChannelError,
    ConvexVerdict,
    CrossoverDistribution,
    bsc_decomposition,
    check_degradation,
    check_symmetric_convex_order,
    degradation_map,
    mix_bscs,
    polar_order_probe,
    probes_to_csv,
)


def bec_bsc_blend(lam, cap):
    """lam * BEC + (1 - lam) * BSC, both of capacity ``cap``; a chain in the convex order."""
    p = float(bsc_with_capacity(cap).w0[1])
    return mix_bscs(CrossoverDistribution(np.array([0.0, 0.5, p]),
                                          np.array([lam * cap, lam * (1 - cap), 1 - lam])))


def from_entropies(hs, ms):
    """Symmetric channel whose BSC components have the given entropies and weights."""
    p = [float(bsc_with_capacity(1 - h).w0[1]) for h in hs]
    return mix_bscs(CrossoverDistribution(np.array(p), np.asarray(ms, dtype=float)))


class TestDecomposition:
    def test_bsc(self):
        assert bsc_decomposition(make_bsc(0.11)).atoms == [(pytest.approx(0.11), pytest.approx(1.0))]

    def test_bec(self):
        atoms = bsc_decomposition(make_bec(0.3)).atoms
        assert atoms == [(0.0, pytest.approx(0.7)), (0.5, pytest.approx(0.3))]

    def test_bawgn_reconstructs(self):
        W = make_quantized_bawgn(1.0, 32)
        d = bsc_decomposition(W)
        assert len(d.atoms) == 16
        V = mix_bscs(d)
        for f in (symmetric_capacity, bhattacharyya, lambda c: gallager_e0(c, 1.0)):
            assert f(V) == pytest.approx(f(W), abs=1e-9)

    def test_asymmetric_rejected(self):
        W = BinaryChannel([0.6, 0.3, 0.1], [0.2, 0.3, 0.5])
        with pytest.raises(AsymmetricChannelError, match="output 0"):
            bsc_decomposition(W)

    def test_round_trip_random(self, rng):
        for _ in range(30):
            W = random_symmetric_channel(int(rng.integers(1, 6)), rng, erasure=bool(rng.integers(2)))
            V = mix_bscs(bsc_decomposition(W))
            assert symmetric_capacity(V) == pytest.approx(symmetric_capacity(W), abs=1e-9)
            assert bhattacharyya(V) == pytest.approx(bhattacharyya(W), abs=1e-9)
            assert gallager_e0(V, 1.0) == pytest.approx(gallager_e0(W, 1.0), abs=1e-9)

    def test_distribution_merges_equal_atoms(self):
        d = CrossoverDistribution(np.array([0.2, 0.1, 0.2]), np.array([0.25, 0.5, 0.25]))
        assert d.atoms == [(0.1, 0.5), (0.2, 0.5)]


class TestConvexOrder:
    def test_bec_is_extreme(self):
        bec, bsc = make_bec(0.5), bsc_with_capacity(0.5)
        assert check_symmetric_convex_order(bec, bsc) is ConvexVerdict.DOMINATES
        assert check_symmetric_convex_order(bsc, bec) is ConvexVerdict.DOMINATED
        W = make_quantized_bawgn(1.0, 32)
        cap = symmetric_capacity(W)
        assert check_symmetric_convex_order(make_bec(1 - cap), W) is ConvexVerdict.DOMINATES
        assert check_symmetric_convex_order(W, bsc_with_capacity(cap)) is ConvexVerdict.DOMINATES

    def test_unequal_capacity(self):
        assert check_symmetric_convex_order(make_bsc(0.05), make_bsc(0.2)) is ConvexVerdict.INCOMPARABLE

    def test_incomparable_equal_capacity(self):
        # h2 laws with mean 1/2 whose stop-loss curves cross
        a = from_entropies([0.2, 0.8], [0.5, 0.5])
        b = from_entropies([0.0, 5 / 9], [0.1, 0.9])
        assert symmetric_capacity(a) == pytest.approx(symmetric_capacity(b), abs=1e-12)
        assert check_symmetric_convex_order(a, b) is ConvexVerdict.INCOMPARABLE
        assert check_symmetric_convex_order(b, a) is ConvexVerdict.INCOMPARABLE

    def test_reflexive_antisymmetric_transitive(self, rng):
        target = 0.5
        pool = [bec_bsc_blend(lam, 1 - target) for lam in (0.0, 0.2, 0.5, 0.8, 1.0)]
        for _ in range(8):
            h = rng.uniform(0, 1, 3)
            w = rng.dirichlet(np.ones(3))
            mean = float(np.dot(w, h))
            # pad with a perfect (h=0) or useless (h=1) component to hit the target mean
            if mean > target:
                lam = target / mean
                pool.append(from_entropies(np.r_[h, 0.0], np.r_[lam * w, 1 - lam]))
            else:
                lam = (1 - target) / (1 - mean)
                pool.append(from_entropies(np.r_[h, 1.0], np.r_[lam * w, 1 - lam]))

        def geq(a, b):
            return check_symmetric_convex_order(a, b) is ConvexVerdict.DOMINATES

        for W in pool:
            assert symmetric_capacity(W) == pytest.approx(1 - target, abs=1e-10)
            assert geq(W, W)
        for a, b in itertools.permutations(pool, 2):
            if geq(a, b) and geq(b, a):
                # only equal crossover laws are mutually dominant
                np.testing.assert_allclose(bsc_decomposition(a).p, bsc_decomposition(b).p, atol=1e-9)
        for a, b, c in itertools.permutations(pool, 3):
            if geq(a, b) and geq(b, c):
                assert geq(a, c)
        # the blend family is a chain, BEC on top
        for lo, hi in zip(pool[:4], pool[1:5]):
            assert geq(hi, lo)
        assert any(check_symmetric_convex_order(a, b) is ConvexVerdict.INCOMPARABLE
                   for a, b in itertools.combinations(pool, 2))


class TestDegradation:
    def test_examples(self):
        assert check_degradation(make_bec(0.4), make_bec(0.6))
        assert check_degradation(make_bsc(0.1), make_bsc(0.2))
        assert not check_degradation(make_bsc(0.1), make_bec(0.05))
        assert not check_degradation(make_bsc(0.2), make_bsc(0.1))

    def test_map_is_bsc(self):
        P = degradation_map(make_bsc(0.1), make_bsc(0.2))
        W1, W2 = make_bsc(0.1), make_bsc(0.2)
        np.testing.assert_allclose(W1.rows @ P, W2.rows, atol=1e-9)
        np.testing.assert_allclose(P.sum(axis=1), 1.0)

    def test_identity(self, rng):
        for _ in range(10):
            W = random_symmetric_channel(int(rng.integers(1, 5)), rng)
            assert check_degradation(W, W)

    def test_size_cap(self):
        with pytest.raises(ValueError):
            check_degradation(make_quantized_bawgn(1.0, 64), make_bsc(0.1))

    def test_measures_follow(self, rng):
        for _ in range(20):
            W1 = random_symmetric_channel(int(rng.integers(1, 4)), rng)
            q = rng.uniform(0, 0.5)
            P = np.zeros((W1.num_outputs, 2))
            # map every output to its hard decision, then flip with probability q
            hard = (W1.w0 < W1.w1).astype(int)
            P[np.arange(W1.num_outputs), hard] = 1 - q
            P[np.arange(W1.num_outputs), 1 - hard] = q
            W2 = BinaryChannel(W1.w0 @ P, W1.w1 @ P)
            assert check_degradation(W1, W2)
            assert symmetric_capacity(W1) >= symmetric_capacity(W2) - 1e-9
            assert bhattacharyya(W1) <= bhattacharyya(W2) + 1e-9


class TestProbe:
    def test_better_channel(self):
        r = polar_order_probe(make_bsc(0.11), make_bsc(0.08), 8, 90, 1000, seed=1)
        assert r.verdict and r.err2 <= r.err1

    def test_same_channel(self):
        W = make_bsc(0.11)
        r = polar_order_probe(W, W, 8, 90, 1000, seed=1)
        assert r.verdict
        assert abs(r.err1 - r.err2) <= 4 * np.hypot(r.se1, r.se2) + 1e-12

    def test_csv(self):
        W = make_bec(0.5)
        r = polar_order_probe(W, make_quantized_bawgn(1.0, 16), 6, 16, 200, seed=0)
        lines = probes_to_csv([r]).strip().split("\n")
        assert lines[0].split(",") == list(PROBE_COLUMNS)
        assert len(lines) == 2

    def test_rejects_asymmetric(self):
        W = BinaryChannel([0.6, 0.3, 0.1], [0.2, 0.3, 0.5])
        with pytest.raises(AsymmetricChannelError):
            polar_order_probe(W, W, 4, 4, 10)
