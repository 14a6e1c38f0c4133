"""Greedy adjacent-pair merging kernel (heap + linked list, compiled with numba)."""

import numpy as np
from numba import njit


@njit(cache=True)
def _plogp(p, s):
    # p * log2(2p / s) with 0 log 0 = 0
    if p <= 0.0:
        return 0.0
    return p * np.log2(2.0 * p / s)


@njit(cache=True)
def _cap(a, b):
    s = a + b
    if s <= 0.0:
        return 0.0
    return _plogp(a, s) + _plogp(b, s)


@njit(cache=True)
def _loss(a0, a1, b0, b1):
    d = _cap(a0, a1) + _cap(b0, b1) - _cap(a0 + b0, a1 + b1)
    return d if d > 0.0 else 0.0


@njit(cache=True)
def _less(hk, hi, x, y):
    if hk[x] < hk[y]:
        return True
    if hk[x] > hk[y]:
        return False
    return hi[x] < hi[y]


@njit(cache=True)
def _push(hk, hi, hv, size, key, idx, ver):
    pos = size
    hk[pos] = key
    hi[pos] = idx
    hv[pos] = ver
    while pos > 0:
        parent = (pos - 1) // 2
        if _less(hk, hi, pos, parent):
            hk[pos], hk[parent] = hk[parent], hk[pos]
            hi[pos], hi[parent] = hi[parent], hi[pos]
            hv[pos], hv[parent] = hv[parent], hv[pos]
            pos = parent
        else:
            break
    return size + 1


@njit(cache=True)
def _pop(hk, hi, hv, size):
    key, idx, ver = hk[0], hi[0], hv[0]
    size -= 1
    if size > 0:
        hk[0], hi[0], hv[0] = hk[size], hi[size], hv[size]
        pos = 0
        while True:
            left = 2 * pos + 1
            if left >= size:
                break
            best = left
            right = left + 1
            if right < size and _less(hk, hi, right, left):
                best = right
            if _less(hk, hi, best, pos):
                hk[pos], hk[best] = hk[best], hk[pos]
                hi[pos], hi[best] = hi[best], hi[pos]
                hv[pos], hv[best] = hv[best], hv[pos]
                pos = best
            else:
                break
    return key, idx, ver, size


@njit(cache=True)
def _greedy_merge(p0, p1, last_is_erasure, mu):
    n = p0.shape[0]
    p0 = p0.copy()
    p1 = p1.copy()
    weight = np.full(n, 2, dtype=np.int64)
    if last_is_erasure:
        weight[n - 1] = 1
    count = 0
    for i in range(n):
        count += weight[i]

    nxt = np.empty(n, dtype=np.int64)
    prv = np.empty(n, dtype=np.int64)
    for i in range(n):
        nxt[i] = i + 1
        prv[i] = i - 1
    nxt[n - 1] = -1
    alive = np.ones(n, dtype=np.bool_)
    version = np.zeros(n, dtype=np.int64)

    cap = 3 * n + 4
    hk = np.empty(cap, dtype=np.float64)
    hi = np.empty(cap, dtype=np.int64)
    hv = np.empty(cap, dtype=np.int64)
    size = 0
    for i in range(n - 1):
        size = _push(hk, hi, hv, size, _loss(p0[i], p1[i], p0[i + 1], p1[i + 1]), i, 0)

    while count > mu and size > 0:
        key, i, ver, size = _pop(hk, hi, hv, size)
        if not alive[i] or ver != version[i] or nxt[i] < 0:
            continue
        j = nxt[i]
        p0[i] += p0[j]
        p1[i] += p1[j]
        count -= weight[i] + weight[j] - 2
        weight[i] = 2
        alive[j] = False
        k = nxt[j]
        nxt[i] = k
        if k >= 0:
            prv[k] = i
        version[i] += 1
        if k >= 0:
            size = _push(hk, hi, hv, size, _loss(p0[i], p1[i], p0[k], p1[k]), i, version[i])
        h = prv[i]
        if h >= 0:
            version[h] += 1
            size = _push(hk, hi, hv, size, _loss(p0[h], p1[h], p0[i], p1[i]), h, version[h])

    m = 0
    for i in range(n):
        if alive[i]:
            m += 1
    q0 = np.empty(m, dtype=np.float64)
    q1 = np.empty(m, dtype=np.float64)
    r = 0
    for i in range(n):
        if alive[i]:
            q0[r] = p0[i]
            q1[r] = p1[i]
            r += 1
    return q0, q1


def greedy_merge(p0, p1, last_is_erasure, mu):
    """Merge LR-sorted rows until the symbol count is at most ``mu``.

    Rows count two symbols each, except a trailing erasure row which counts one.
    """
    p0 = np.ascontiguousarray(p0, dtype=np.float64)
    p1 = np.ascontiguousarray(p1, dtype=np.float64)
    if p0.shape[0] == 0:
        return p0, p1
    return _greedy_merge(p0, p1, bool(last_is_erasure), int(mu))
