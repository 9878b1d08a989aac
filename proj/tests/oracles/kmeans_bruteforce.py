#!/usr/bin/env python3
"""Exhaustive K-means optimum for small planted point sets.

Each fixture is a handful of 2-d or 3-d points around K planted centers.
Every assignment of points to K non-empty groups is enumerated and the one
with the lowest sum of squared distances to group means is printed with its
objective, as C++ initializers for tests/unit/test_clustering.cpp.
"""
import itertools

import numpy as np

FIXTURES = [
    # (name, seed, centers, points per center, spread)
    ("six_points_two_blobs", 1, [(0.0, 0.0), (5.0, 5.0)], 3, 0.3),
    ("nine_points_three_blobs", 2, [(0.0, 0.0), (4.0, 0.0), (2.0, 4.0)], 3, 0.4),
    ("ten_points_two_blobs_3d", 3, [(1.0, 1.0, 1.0), (-2.0, 0.0, 3.0)], 5, 0.5),
    ("eight_points_three_blobs", 4, [(0.0, 0.0), (3.0, 3.0), (-3.0, 3.0)], None, 0.35),
]


def points_for(seed, centers, per, spread):
    rng = np.random.default_rng(seed)
    counts = [per] * len(centers) if per is not None else [3, 3, 2]
    pts = []
    for c, n in zip(centers, counts):
        for _ in range(n):
            pts.append(np.round(np.asarray(c) + rng.normal(0.0, spread, len(c)), 3))
    order = rng.permutation(len(pts))
    return [pts[i] for i in order]


def objective(points, labels, k):
    total = 0.0
    for g in range(k):
        members = [p for p, l in zip(points, labels) if l == g]
        if not members:
            return None
        mu = np.mean(members, axis=0)
        total += sum(float(np.sum((p - mu) ** 2)) for p in members)
    return total


def best_partition(points, k):
    best = None
    for labels in itertools.product(range(k), repeat=len(points)):
        # Canonical labelling: group ids appear in first-use order.
        seen = []
        for l in labels:
            if l not in seen:
                seen.append(l)
        if seen != list(range(len(seen))):
            continue
        obj = objective(points, labels, k)
        if obj is not None and (best is None or obj < best[0]):
            best = (obj, labels)
    return best


def main():
    for name, seed, centers, per, spread in FIXTURES:
        pts = points_for(seed, centers, per, spread)
        k = len(centers)
        obj, labels = best_partition(pts, k)
        groups = [[i for i, l in enumerate(labels) if l == g] for g in range(k)]
        print(f"// {name}: K={k}")
        print("points = {" + ", ".join("{" + ", ".join(f"{v:.3f}" for v in p) + "}" for p in pts) + "}")
        print("groups = {" + ", ".join("{" + ", ".join(map(str, g)) + "}" for g in groups) + "}")
        print(f"objective = {obj:.12f}")


if __name__ == "__main__":
    main()
