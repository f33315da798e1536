"""DBSCAN over 2D points, written out directly.

Closed-ball neighborhoods (d <= eps), a point counts itself toward
min_pts, clusters are seeded in input order so labels are deterministic.
With min_pts=1 every point is a core sample and noise cannot occur.
"""

from __future__ import annotations

from collections import deque

import numpy as np

NOISE = -1


def dbscan(points, eps=0.5, min_pts=1):
    """Cluster points; returns (labels, core_mask).

    labels[i] is the cluster id of point i (NOISE=-1 for noise),
    core_mask[i] marks core samples. Cluster ids count up from 0 in
    seeding order.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if min_pts < 1:
        raise ValueError("min_pts must be >= 1")
    pts = np.asarray(points, dtype=np.float64)
    n = len(pts)
    labels = np.full(n, NOISE, dtype=np.int64)
    core = np.zeros(n, dtype=bool)
    if n == 0:
        return labels, core

    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    neighbors = d2 <= eps * eps
    core[:] = neighbors.sum(axis=1) >= min_pts

    cluster_id = 0
    for i in range(n):
        if labels[i] != NOISE or not core[i]:
            continue
        labels[i] = cluster_id
        queue = deque([i])
        while queue:
            j = queue.popleft()
            for m in np.nonzero(neighbors[j])[0]:
                if labels[m] == NOISE:
                    labels[m] = cluster_id
                    if core[m]:
                        queue.append(m)
        cluster_id += 1
    return labels, core
