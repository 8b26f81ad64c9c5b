"""Exact weighted 1-D K-Means via dynamic programming, plus a general
weighted Lloyd iteration with K-Means++ seeding.

The 1-D solver is globally optimal: optimal clusters of 1-D weighted
points are contiguous in sorted order, so the problem reduces to a DP
over split positions. Interval costs come from prefix sums of w, w*v,
w*v^2, and each DP layer is filled by divide and conquer over the
(monotone) optimal split points, giving O(K n log n) total.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit


@dataclass(frozen=True)
class Clustering1D:
    """Result of an exact 1-D weighted K-Means run.

    boundaries[t] is the index (in sorted value order) of the first
    element of cluster t+1; clusters are contiguous runs of the sorted
    values. assignment maps each *input* position to its cluster index.
    """

    boundaries: np.ndarray
    centers: np.ndarray
    cost: float
    assignment: np.ndarray

    @property
    def k(self) -> int:
        return self.centers.size


@dataclass(frozen=True)
class LloydResult:
    centers: np.ndarray
    assignment: np.ndarray
    cost: float
    n_iter: int
    clamped: bool


@njit(cache=True, nogil=True)
def _dp_boundaries(v, w, k):
    """Optimal split positions for sorted weighted values, k >= 2.

    Fills a suffix-cost table B[t, i] = optimal cost of grouping v[i:]
    into t contiguous non-empty clusters, each layer via divide and
    conquer on the monotone argmin. Boundaries are then reconstructed
    greedily from the left, picking the smallest split consistent with
    the optimum, which yields the lexicographically smallest boundary
    sequence among optimal partitions.
    """
    n = v.shape[0]
    pw = np.empty(n + 1)
    ps = np.empty(n + 1)
    pq = np.empty(n + 1)
    pw[0] = 0.0
    ps[0] = 0.0
    pq[0] = 0.0
    for t in range(n):
        pw[t + 1] = pw[t] + w[t]
        ps[t + 1] = ps[t] + w[t] * v[t]
        pq[t + 1] = pq[t] + w[t] * v[t] * v[t]

    B = np.full((k + 1, n + 1), np.inf)
    for i in range(n):
        ww = pw[n] - pw[i]
        ss = ps[n] - ps[i]
        c = (pq[n] - pq[i]) - ss * ss / ww
        B[1, i] = c if c > 0.0 else 0.0

    # frames: (lo, hi, jlo, jhi); depth bounded by ~2*log2(n)
    stack = np.empty((80, 4), np.int64)
    for t in range(2, k + 1):
        stack[0, 0] = 0
        stack[0, 1] = n - t
        stack[0, 2] = 0
        stack[0, 3] = n - t
        top = 1
        while top > 0:
            top -= 1
            lo = stack[top, 0]
            hi = stack[top, 1]
            jlo = stack[top, 2]
            jhi = stack[top, 3]
            if lo > hi:
                continue
            mid = (lo + hi) // 2
            best = np.inf
            bestj = mid
            j0 = jlo if jlo > mid else mid
            for j in range(j0, jhi + 1):
                ww = pw[j + 1] - pw[mid]
                ss = ps[j + 1] - ps[mid]
                c = (pq[j + 1] - pq[mid]) - ss * ss / ww
                if c < 0.0:
                    c = 0.0
                tot = c + B[t - 1, j + 1]
                if tot < best:
                    best = tot
                    bestj = j
            B[t, mid] = best
            stack[top, 0] = lo
            stack[top, 1] = mid - 1
            stack[top, 2] = jlo
            stack[top, 3] = bestj
            top += 1
            stack[top, 0] = mid + 1
            stack[top, 1] = hi
            stack[top, 2] = bestj
            stack[top, 3] = jhi
            top += 1

    bounds = np.empty(k - 1, np.int64)
    i = 0
    for t in range(k, 1, -1):
        best = np.inf
        for j in range(i, n - t + 1):
            ww = pw[j + 1] - pw[i]
            ss = ps[j + 1] - ps[i]
            c = (pq[j + 1] - pq[i]) - ss * ss / ww
            if c < 0.0:
                c = 0.0
            tot = c + B[t - 1, j + 1]
            if tot < best:
                best = tot
        tol = 1e-11 * (1.0 + abs(best))
        for j in range(i, n - t + 1):
            ww = pw[j + 1] - pw[i]
            ss = ps[j + 1] - ps[i]
            c = (pq[j + 1] - pq[i]) - ss * ss / ww
            if c < 0.0:
                c = 0.0
            if c + B[t - 1, j + 1] <= best + tol:
                bounds[k - t] = j + 1
                i = j + 1
                break
    return bounds


def kmeans1d_weighted(values, weights, K: int) -> Clustering1D:
    """Globally optimal weighted K-Means of 1-D values.

    K is clamped to the number of distinct values. Deterministic; ties
    between optimal partitions resolve to the lexicographically
    smallest boundary sequence.
    """
    K = int(K)
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    v = np.asarray(values, dtype=float).ravel()
    w = np.asarray(weights, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("empty input")
    if v.size != w.size:
        raise ValueError(f"values ({v.size}) and weights ({w.size}) differ in length")
    if not np.all(np.isfinite(v)):
        raise ValueError("values must be finite")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise ValueError("weights must be finite and strictly positive")

    n = v.size
    order = np.argsort(v, kind="stable")
    vs = v[order]
    ws = w[order]
    run_starts = np.flatnonzero(np.diff(vs) > 0) + 1
    n_distinct = run_starts.size + 1
    k_eff = min(K, n_distinct)

    if k_eff == 1:
        bounds = np.empty(0, dtype=np.int64)
    elif k_eff == n_distinct:
        bounds = run_starts.astype(np.int64)
    else:
        bounds = _dp_boundaries(vs, ws, k_eff)

    edges = np.concatenate(([0], bounds, [n]))
    labels_sorted = np.repeat(np.arange(k_eff), np.diff(edges))
    cw = np.add.reduceat(ws, edges[:-1])
    centers = np.add.reduceat(ws * vs, edges[:-1]) / cw
    cost = float(np.sum(ws * (vs - centers[labels_sorted]) ** 2))
    assignment = np.empty(n, dtype=np.int64)
    assignment[order] = labels_sorted

    for a in (bounds, centers, assignment):
        a.setflags(write=False)
    return Clustering1D(boundaries=bounds, centers=centers, cost=cost, assignment=assignment)


def _kmeanspp_init(X, w, k, rng):
    """Weighted K-Means++ seeding: point j is drawn with probability
    proportional to w_j * (squared distance to nearest chosen center)."""
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    idx = rng.choice(n, p=w / w.sum())
    centers[0] = X[idx]
    d2 = np.sum((X - centers[0]) ** 2, axis=1)
    for t in range(1, k):
        p = w * d2
        s = p.sum()
        if s > 0.0:
            p = p / s
        else:
            p = w / w.sum()
        idx = rng.choice(n, p=p)
        centers[t] = X[idx]
        np.minimum(d2, np.sum((X - centers[t]) ** 2, axis=1), out=d2)
    return centers


def _lloyd_run(X, w, centers, max_iter=100):
    """One Lloyd run from the given initial centers.

    Backed by scikit-learn's Lloyd implementation (which also relocates
    empty clusters to the points contributing most distortion).
    Assignment ties go to the lower center index. Returns
    (centers, labels, cost, n_iter).
    """
    import warnings

    from sklearn.cluster import KMeans
    from sklearn.exceptions import ConvergenceWarning

    km = KMeans(n_clusters=centers.shape[0], init=np.ascontiguousarray(centers),
                n_init=1, max_iter=max_iter, algorithm="lloyd")
    with warnings.catch_warnings():
        # duplicate data points can make fewer than K distinct clusters
        warnings.simplefilter("ignore", ConvergenceWarning)
        km.fit(X, sample_weight=w)
    labels = km.labels_.astype(np.int64)
    return km.cluster_centers_, labels, float(km.inertia_), int(km.n_iter_)


def weighted_lloyd(points, weights, K: int, seed: int, restarts: int = 8,
                   max_iter: int = 100) -> LloydResult:
    """Weighted Lloyd K-Means, best of `restarts` K-Means++-seeded runs.

    Deterministic given (seed, restarts): run r draws from an
    independent stream derived from (seed, r), and the winner is picked
    by (cost, restart index). K larger than the number of points is
    clamped, flagged in the result.
    """
    X = np.asarray(points, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("points must be a non-empty 2-D array")
    if not np.all(np.isfinite(X)):
        raise ValueError("points must be finite")
    w = np.asarray(weights, dtype=float).ravel()
    if w.size != X.shape[0]:
        raise ValueError("weights length must match number of points")
    if np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and strictly positive")
    K = int(K)
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    restarts = int(restarts)
    if restarts < 1:
        raise ValueError("restarts must be >= 1")

    n = X.shape[0]
    clamped = K > n
    k_eff = min(K, n)

    best = None
    for r in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence([seed % (2 ** 63), r]))
        init = _kmeanspp_init(X, w, k_eff, rng)
        centers, labels, cost, n_iter = _lloyd_run(X, w, init, max_iter=max_iter)
        if best is None or cost < best[0]:
            best = (cost, r, centers, labels, n_iter)
    cost, _, centers, labels, n_iter = best
    centers = np.ascontiguousarray(centers)
    labels = labels.astype(np.int64)
    for a in (centers, labels):
        a.setflags(write=False)
    return LloydResult(centers=centers, assignment=labels, cost=cost,
                       n_iter=n_iter, clamped=clamped)
