"""Numba kernel for the first-order upwind eikonal solve |grad d|_g = 1.

Label-setting sweep over a binary heap with lazy deletion; nodes are
re-opened when a later update improves them, so the result is the fixed
point of the monotone local update even for anisotropic tensor metrics
(where plain fast marching loses strict causality).

The local update at a node combines one-point (edge) candidates with
two-point simplex candidates over the eight 45-degree triangles of the
8-neighbourhood: minimize over theta in [0,1] of
``theta*d_p + (1-theta)*d_q + |theta*v_p + (1-theta)*v_q|_g``.
"""

import numpy as np
from numba import njit

INF = 1e300


@njit(cache=True)
def _sift_up(hv, hi, c):
    while c > 0:
        p = (c - 1) >> 1
        if hv[p] > hv[c] or (hv[p] == hv[c] and hi[p] > hi[c]):
            hv[p], hv[c] = hv[c], hv[p]
            hi[p], hi[c] = hi[c], hi[p]
            c = p
        else:
            break


@njit(cache=True)
def _sift_down(hv, hi, n):
    c = 0
    while True:
        l = 2 * c + 1
        if l >= n:
            break
        s = l
        r = l + 1
        if r < n and (hv[r] < hv[l] or (hv[r] == hv[l] and hi[r] < hi[l])):
            s = r
        if hv[s] < hv[c] or (hv[s] == hv[c] and hi[s] < hi[c]):
            hv[c], hv[s] = hv[s], hv[c]
            hi[c], hi[s] = hi[s], hi[c]
            c = s
        else:
            break


@njit(cache=True)
def _local_update(m, nbr, elen, vx, vy, g11, g12, g22, dist):
    """Best candidate value at node m given current neighbour values."""
    best = INF
    # one-point (edge) candidates, midpoint-metric lengths
    for k in range(8):
        q = nbr[m, k]
        if q >= 0 and dist[q] < INF:
            c = dist[q] + elen[m, k]
            if c < best:
                best = c
    # two-point simplex candidates, node metric
    a11 = g11[m]
    a12 = g12[m]
    a22 = g22[m]
    for k in range(8):
        k2 = (k + 1) % 8
        p = nbr[m, k]
        q = nbr[m, k2]
        if p < 0 or q < 0:
            continue
        dp = dist[p]
        dq = dist[q]
        if dp >= INF or dq >= INF:
            continue
        pxx = vx[k]
        pyy = vy[k]
        qxx = vx[k2]
        qyy = vy[k2]
        app = a11 * pxx * pxx + 2.0 * a12 * pxx * pyy + a22 * pyy * pyy
        aqq = a11 * qxx * qxx + 2.0 * a12 * qxx * qyy + a22 * qyy * qyy
        apq = a11 * pxx * qxx + a12 * (pxx * qyy + pyy * qxx) + a22 * pyy * qyy
        A = app - 2.0 * apq + aqq
        B = 2.0 * (apq - aqq)
        C = aqq
        D = dp - dq
        # minimize F(t) = t*D + dq + sqrt(A t^2 + B t + C) over [0, 1]
        alpha = 4.0 * A * (A - D * D)
        beta = 4.0 * B * (A - D * D)
        gamma = B * B - 4.0 * D * D * C
        if abs(alpha) > 1e-300:
            disc = beta * beta - 4.0 * alpha * gamma
            if disc >= 0.0:
                sq = np.sqrt(disc)
                for sgn in (-1.0, 1.0):
                    t = (-beta + sgn * sq) / (2.0 * alpha)
                    if 0.0 < t < 1.0:
                        Q = A * t * t + B * t + C
                        if Q > 0.0:
                            c = t * D + dq + np.sqrt(Q)
                            if c < best:
                                best = c
        # endpoints double as one-point candidates with node metric
        c = dq + np.sqrt(C)
        if c < best:
            best = c
        c = dp + np.sqrt(app)
        if c < best:
            best = c
    return best


@njit(cache=True)
def eikonal_solve(nbr, elen, vx, vy, g11, g12, g22, seeds, seed_vals, n_nodes, tol):
    """Solve the discrete eikonal problem; returns the distance array."""
    dist = np.full(n_nodes, INF)
    cap = 8 * n_nodes + 64
    hv = np.empty(cap)
    hi = np.empty(cap, dtype=np.int64)
    hn = 0
    for s in range(seeds.shape[0]):
        i = seeds[s]
        v = seed_vals[s]
        if v < dist[i]:
            dist[i] = v
    for s in range(seeds.shape[0]):
        i = seeds[s]
        hv[hn] = dist[i]
        hi[hn] = i
        hn += 1
        _sift_up(hv, hi, hn - 1)
    while hn > 0:
        v = hv[0]
        m = hi[0]
        hn -= 1
        hv[0] = hv[hn]
        hi[0] = hi[hn]
        _sift_down(hv, hi, hn)
        if v > dist[m] + tol:
            continue  # stale entry
        for k in range(8):
            n = nbr[m, k]
            if n < 0:
                continue
            cand = _local_update(n, nbr, elen, vx, vy, g11, g12, g22, dist)
            if cand < dist[n] - tol:
                dist[n] = cand
                if hn >= cap:
                    # drop stale entries in place
                    w = 0
                    for r in range(hn):
                        if hv[r] <= dist[hi[r]] + tol:
                            hv[w] = hv[r]
                            hi[w] = hi[r]
                            w += 1
                    hn = w
                    for r in range(hn):
                        _sift_up(hv, hi, r)
                hv[hn] = cand
                hi[hn] = n
                hn += 1
                _sift_up(hv, hi, hn - 1)
    return dist
