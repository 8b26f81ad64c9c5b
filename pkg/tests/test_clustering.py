import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from distquant.clustering import kmeans1d_weighted, weighted_lloyd, _lloyd_run


def brute_force_contiguous(values, weights, k):
    """Exhaustive search over contiguous partitions of the sorted values."""
    order = np.argsort(values, kind="stable")
    v = np.asarray(values, float)[order]
    w = np.asarray(weights, float)[order]
    n = v.size

    def interval_cost(i, j):
        ww = w[i:j].sum()
        mu = (w[i:j] * v[i:j]).sum() / ww
        return float((w[i:j] * (v[i:j] - mu) ** 2).sum())

    best = np.inf
    for splits in itertools.combinations(range(1, n), k - 1):
        edges = (0,) + splits + (n,)
        c = sum(interval_cost(a, b) for a, b in zip(edges, edges[1:]))
        best = min(best, c)
    return best


def brute_force_all_partitions(values, weights, k):
    """Exhaustive search over ALL set partitions into at most k blocks."""
    v = np.asarray(values, float)
    w = np.asarray(weights, float)
    n = v.size
    best = np.inf
    # restricted growth strings enumerate set partitions
    def rec(i, labels, nblocks):
        nonlocal best
        if i == n:
            cost = 0.0
            for b in range(nblocks):
                mask = labels == b
                ww = w[mask].sum()
                mu = (w[mask] * v[mask]).sum() / ww
                cost += float((w[mask] * (v[mask] - mu) ** 2).sum())
            best = min(best, cost)
            return
        for b in range(min(nblocks + 1, k)):
            labels[i] = b
            rec(i + 1, labels, max(nblocks, b + 1))
    rec(0, np.zeros(n, dtype=int), 0)
    return best


class TestKMeans1D:
    def test_spec_example_four_points(self):
        r = kmeans1d_weighted([0, 1, 4, 5], [1, 1, 1, 1], 2)
        assert list(r.boundaries) == [2]
        assert np.allclose(r.centers, [0.5, 4.5])
        assert r.cost == pytest.approx(1.0)
        # brute force over the 3 contiguous 2-partitions: {8.667, 1.0, 8.667}
        assert brute_force_contiguous([0, 1, 4, 5], [1, 1, 1, 1], 2) == pytest.approx(1.0)

    def test_k1_weighted_mean(self):
        v = [3.0, -1.0, 2.0]
        w = [2.0, 1.0, 1.0]
        r = kmeans1d_weighted(v, w, 1)
        mu = np.average(v, weights=w)
        assert r.centers[0] == pytest.approx(mu)
        assert r.cost == pytest.approx(np.sum(np.array(w) * (np.array(v) - mu) ** 2))
        assert r.boundaries.size == 0

    def test_spec_example_weighted(self):
        r = kmeans1d_weighted([0, 2, 10], [1, 1, 2], 2)
        assert np.allclose(r.centers, [1.0, 10.0])
        assert r.cost == pytest.approx(2.0)
        assert list(r.assignment) == [0, 0, 1]

    def test_lexicographic_tie_break(self):
        # [0,1,2] K=2: splitting after 0 or after 1 both cost 0.5
        r = kmeans1d_weighted([0, 1, 2], [1, 1, 1], 2)
        assert list(r.boundaries) == [1]

    def test_clamps_to_distinct(self):
        r = kmeans1d_weighted([1, 1, 2, 2], [1, 1, 1, 1], 4)
        assert r.k == 2
        assert r.cost == pytest.approx(0.0, abs=1e-18)
        assert np.allclose(r.centers, [1, 2])

    def test_invalid_args(self):
        with pytest.raises(ValueError):
            kmeans1d_weighted([1.0], [1.0], 0)
        with pytest.raises(ValueError):
            kmeans1d_weighted([], [], 2)
        with pytest.raises(ValueError):
            kmeans1d_weighted([1.0, 2.0], [1.0, 0.0], 2)
        with pytest.raises(ValueError):
            kmeans1d_weighted([np.nan, 2.0], [1.0, 1.0], 2)

    def test_oracle_random_instances(self):
        rng = np.random.default_rng(7)
        for _ in range(150):
            n = rng.integers(1, 13)
            k = rng.integers(1, 5)
            v = rng.standard_normal(n) * rng.uniform(0.5, 5)
            w = rng.uniform(0.1, 3.0, n)
            r = kmeans1d_weighted(v, w, k)
            k_eff = min(k, np.unique(v).size)
            expected = brute_force_contiguous(v, w, k_eff)
            assert r.cost == pytest.approx(expected, rel=1e-9, abs=1e-12)

    def test_contiguity_against_all_partitions(self):
        rng = np.random.default_rng(11)
        for _ in range(40):
            n = rng.integers(1, 9)
            k = rng.integers(1, 5)
            v = rng.standard_normal(n)
            w = rng.uniform(0.1, 2.0, n)
            r = kmeans1d_weighted(v, w, k)
            expected = brute_force_all_partitions(v, w, k)
            assert r.cost == pytest.approx(expected, rel=1e-9, abs=1e-12)

    def test_cost_recomputed_from_assignment(self):
        rng = np.random.default_rng(3)
        v = rng.standard_normal(60)
        w = rng.uniform(0.5, 2.0, 60)
        r = kmeans1d_weighted(v, w, 5)
        recomputed = float(np.sum(w * (v - r.centers[r.assignment]) ** 2))
        assert r.cost == pytest.approx(recomputed, rel=1e-9)
        # each center is the weighted mean of its cluster
        for c in range(r.k):
            mask = r.assignment == c
            assert r.centers[c] == pytest.approx(np.average(v[mask], weights=w[mask]), rel=1e-9)

    def test_monotone_in_k(self):
        rng = np.random.default_rng(5)
        v = rng.standard_normal(40)
        w = np.ones(40)
        costs = [kmeans1d_weighted(v, w, k).cost for k in range(1, 41)]
        assert all(a >= b - 1e-12 for a, b in zip(costs, costs[1:]))
        assert costs[-1] == pytest.approx(0.0, abs=1e-18)

    @given(st.lists(st.floats(-100, 100), min_size=1, max_size=30),
           st.integers(1, 6), st.floats(0.1, 10))
    @settings(max_examples=60, deadline=None)
    def test_scale_equivariance(self, values, k, c):
        w = np.ones(len(values))
        base = kmeans1d_weighted(values, w, k)
        scaled = kmeans1d_weighted(np.asarray(values) * c, w, k)
        assert list(base.boundaries) == list(scaled.boundaries)
        assert scaled.cost == pytest.approx(base.cost * c * c, rel=1e-6, abs=1e-9)

    @given(st.lists(st.floats(-100, 100), min_size=1, max_size=30),
           st.integers(1, 6), st.floats(-50, 50))
    @settings(max_examples=60, deadline=None)
    def test_shift_invariance(self, values, k, shift):
        # keep gaps far above double precision so shifting cannot merge values
        values = [round(v, 6) for v in values]
        w = np.ones(len(values))
        base = kmeans1d_weighted(values, w, k)
        moved = kmeans1d_weighted(np.asarray(values) + shift, w, k)
        assert list(base.boundaries) == list(moved.boundaries)
        assert moved.cost == pytest.approx(base.cost, rel=1e-9, abs=1e-6)
        assert np.allclose(moved.centers, base.centers + shift, atol=1e-9)

    def test_large_instance_runs_fast(self):
        rng = np.random.default_rng(0)
        v = rng.standard_normal(10_000)
        r = kmeans1d_weighted(v, np.ones(v.size), 1024)
        assert r.k == 1024
        assert r.cost >= 0.0


class TestWeightedLloyd:
    def test_each_point_own_cluster(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        r = weighted_lloyd(pts, np.ones(3), 3, seed=0)
        assert r.cost == pytest.approx(0.0, abs=1e-18)

    def test_spec_rectangle(self):
        pts = np.array([[0.0, 0.0], [0.0, 2.0], [10.0, 0.0], [10.0, 2.0]])
        r = weighted_lloyd(pts, np.ones(4), 2, seed=42, restarts=8)
        centers = sorted(map(tuple, np.round(r.centers, 9)))
        assert centers == [(0.0, 1.0), (10.0, 1.0)]
        assert r.cost == pytest.approx(4.0)

    def test_lower_bounded_by_exact_1d(self):
        rng = np.random.default_rng(2)
        v = rng.standard_normal(100)
        for k in (2, 4, 8):
            ll = weighted_lloyd(v[:, None], np.ones(100), k, seed=1, restarts=4)
            exact = kmeans1d_weighted(v, np.ones(100), k)
            assert ll.cost >= exact.cost - 1e-9

    def test_clamped_k(self):
        pts = np.array([[0.0], [1.0]])
        r = weighted_lloyd(pts, np.ones(2), 5, seed=0)
        assert r.clamped
        assert r.centers.shape[0] == 2

    def test_deterministic(self):
        rng = np.random.default_rng(9)
        pts = rng.standard_normal((50, 3))
        a = weighted_lloyd(pts, np.ones(50), 4, seed=11, restarts=3)
        b = weighted_lloyd(pts, np.ones(50), 4, seed=11, restarts=3)
        assert np.array_equal(a.centers, b.centers)
        assert a.cost == b.cost

    def test_integer_weights_match_repeated_points(self):
        rng = np.random.default_rng(4)
        pts = rng.standard_normal((12, 2))
        w = rng.integers(1, 4, 12)
        expanded = np.repeat(pts, w, axis=0)
        init = pts[:3].copy()
        cw, lw, costw, _ = _lloyd_run(pts, w.astype(float), init.copy())
        ce, le, coste, _ = _lloyd_run(expanded, np.ones(expanded.shape[0]), init.copy())
        assert np.allclose(cw, ce, atol=1e-9)
        assert costw == pytest.approx(coste, rel=1e-9)

    def test_invalid(self):
        with pytest.raises(ValueError):
            weighted_lloyd(np.zeros((0, 2)), [], 2, seed=0)
        with pytest.raises(ValueError):
            weighted_lloyd(np.zeros((3, 2)), [1, 1, -1], 2, seed=0)
        with pytest.raises(ValueError):
            weighted_lloyd(np.zeros((3, 2)), [1, 1, 1], 0, seed=0)
