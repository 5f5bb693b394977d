"""Small-scale exhaustive grouping of complex points into fixed-size clusters."""

from __future__ import annotations

import itertools

import numpy as np

# Above this many distinct labelings the exhaustive search falls back to a
# greedy agglomerative pass.
MAX_ASSIGNMENTS = 100_000


def label_assignments(sizes: tuple[int, ...]):
    """Yield all distinct assignments of n = sum(sizes) items to labeled groups.

    Each assignment is a tuple of group labels, one per item index; group g
    receives exactly sizes[g] items.  Equal-size groups are distinguished by
    label, so equivalent partitions may appear more than once.
    """
    labels = []
    for g, size in enumerate(sizes):
        labels.extend([g] * size)
    seen_prefix = set()

    def rec(prefix, remaining):
        if not remaining:
            yield tuple(prefix)
            return
        used = set()
        for i, lab in enumerate(remaining):
            if lab in used:
                continue
            used.add(lab)
            yield from rec(prefix + [lab], remaining[:i] + remaining[i + 1:])

    yield from rec([], labels)


def assignment_count(sizes: tuple[int, ...]) -> int:
    """Number of distinct label assignments (multinomial coefficient)."""
    import math

    n = sum(sizes)
    count = math.factorial(n)
    for size in sizes:
        count //= math.factorial(size)
    return count


def group_min_pairwise(points: np.ndarray, sizes: tuple[int, ...]) -> list[np.ndarray]:
    """Partition points into groups of the given sizes minimizing the total
    within-group pairwise distance.  Exhaustive when the assignment count is
    small, greedy agglomerative otherwise."""
    points = np.asarray(points, dtype=complex).reshape(-1)
    if len(points) != sum(sizes):
        raise ValueError("point count does not match requested group sizes")
    if all(size == 1 for size in sizes):
        return [points[i:i + 1] for i in range(len(points))]
    if assignment_count(sizes) > MAX_ASSIGNMENTS:
        return _group_greedy(points, sizes)

    dist = np.abs(points[:, None] - points[None, :])
    best, best_cost = None, np.inf
    for labels in label_assignments(sizes):
        cost = 0.0
        for g in range(len(sizes)):
            idx = [i for i, lab in enumerate(labels) if lab == g]
            for a, b in itertools.combinations(idx, 2):
                cost += dist[a, b]
        if cost < best_cost:
            best, best_cost = labels, cost
    return [points[[i for i, lab in enumerate(best) if lab == g]] for g in range(len(sizes))]


def _group_greedy(points: np.ndarray, sizes: tuple[int, ...]) -> list[np.ndarray]:
    """Agglomerative fallback: repeatedly merge the closest pair of clusters
    whose combined size still fits one of the requested sizes."""
    clusters = [[i] for i in range(len(points))]
    target = sorted(sizes, reverse=True)
    while len(clusters) > len(sizes):
        best = None
        best_dist = np.inf
        for a, b in itertools.combinations(range(len(clusters)), 2):
            merged = len(clusters[a]) + len(clusters[b])
            if merged > max(target):
                continue
            dmin = min(
                abs(points[i] - points[j]) for i in clusters[a] for j in clusters[b]
            )
            if dmin < best_dist:
                best, best_dist = (a, b), dmin
        if best is None:
            break
        a, b = best
        clusters[a] = clusters[a] + clusters[b]
        del clusters[b]
    clusters.sort(key=len, reverse=True)
    return [points[c] for c in clusters]


def group_by_centroid_capacity(
    points: np.ndarray, centroids: np.ndarray, sizes: tuple[int, ...]
) -> list[np.ndarray]:
    """Assign points to given centroids with exact per-centroid capacities,
    minimizing the total point-to-centroid distance (exhaustive)."""
    points = np.asarray(points, dtype=complex).reshape(-1)
    centroids = np.asarray(centroids, dtype=complex).reshape(-1)
    if assignment_count(sizes) > MAX_ASSIGNMENTS:
        # Order points by distance to nearest centroid and fill greedily.
        order = np.argsort([min(abs(p - c) for c in centroids) for p in points])
        remaining = list(sizes)
        groups: list[list[int]] = [[] for _ in sizes]
        for i in order:
            ranked = np.argsort([abs(points[i] - c) for c in centroids])
            for g in ranked:
                if remaining[g] > 0:
                    groups[g].append(int(i))
                    remaining[g] -= 1
                    break
        return [points[g] for g in groups]

    dist = np.abs(points[:, None] - centroids[None, :])
    best, best_cost = None, np.inf
    for labels in label_assignments(sizes):
        cost = sum(dist[i, lab] for i, lab in enumerate(labels))
        if cost < best_cost:
            best, best_cost = labels, cost
    return [points[[i for i, lab in enumerate(best) if lab == g]] for g in range(len(sizes))]
