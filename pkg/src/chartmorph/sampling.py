"""Row-subset selection for dense layers."""

from __future__ import annotations

import random
from typing import List, Sequence, Tuple


def lttb(points: Sequence[Tuple[float, float]], threshold: int) -> List[int]:
    """Largest-triangle-three-buckets; returns kept indices (first and last always kept)."""
    n = len(points)
    if threshold < 2:
        raise ValueError("max_points must be >= 2")
    if n <= threshold:
        return list(range(n))
    if threshold == 2:
        return [0, n - 1]
    keep = [0]
    every = (n - 2) / (threshold - 2)
    a = 0
    for i in range(threshold - 2):
        start = int(i * every) + 1
        end = int((i + 1) * every) + 1
        nxt_start = end
        nxt_end = min(int((i + 2) * every) + 1, n)
        if nxt_start >= n - 1 or i == threshold - 3:
            avg_x, avg_y = points[n - 1]
        else:
            span = points[nxt_start:nxt_end]
            avg_x = sum(p[0] for p in span) / len(span)
            avg_y = sum(p[1] for p in span) / len(span)
        ax, ay = points[a]
        best, best_area = start, -1.0
        for j in range(start, min(end, n - 1)):
            bx, by = points[j]
            area = abs((ax - avg_x) * (by - ay) - (ax - bx) * (avg_y - ay))
            if area > best_area:
                best, best_area = j, area
        keep.append(best)
        a = best
    keep.append(n - 1)
    return keep


def uniform_sample(n: int, k: int, seed: int) -> List[int]:
    """Seeded uniform subset of ``range(n)`` of size ``k``, returned sorted."""
    if k < 2:
        raise ValueError("max_points must be >= 2")
    if n <= k:
        return list(range(n))
    return sorted(random.Random(seed).sample(range(n), k))
