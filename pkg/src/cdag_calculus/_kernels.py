"""Compiled inner loops for the brute-force oracle.

Graphs are bitmask arrays: ``ch[u]`` holds the children of ``u`` and
``bi[u]`` its bidirected neighbours. Compatible graphs are visited in the
same mixed-radix order as the pure Python generator.
"""
import numpy as np
from numba import njit

R1, R2, R3, DSEP = 0, 1, 2, 3


@njit(cache=True)
def _acyclic(ch, n):
    left = (np.int64(1) << n) - 1
    while left:
        moved = False
        for v in range(n):
            if (left >> v) & 1:
                has_parent = False
                for u in range(n):
                    if (left >> u) & 1 and (ch[u] >> v) & 1:
                        has_parent = True
                        break
                if not has_parent:
                    left &= ~(np.int64(1) << v)
                    moved = True
        if not moved:
            return False
    return True


@njit(cache=True)
def _parents(ch, n):
    pa = np.zeros(n, dtype=np.int64)
    for u in range(n):
        for v in range(n):
            if (ch[u] >> v) & 1:
                pa[v] |= np.int64(1) << u
    return pa


@njit(cache=True)
def _ancestors(pa, s, n):
    anc = s
    while True:
        new = anc
        for v in range(n):
            if (anc >> v) & 1:
                new |= pa[v]
        if new == anc:
            return anc
        anc = new


@njit(cache=True)
def _mutilate(ch, bi, over, under, n):
    ch2 = np.empty(n, dtype=np.int64)
    bi2 = np.empty(n, dtype=np.int64)
    for u in range(n):
        ch2[u] = 0 if (under >> u) & 1 else ch[u] & ~over
        bi2[u] = 0 if (over >> u) & 1 else bi[u] & ~over
    return ch2, bi2


@njit(cache=True)
def _connected(ch, bi, x, y, z, n):
    # reachability over (vertex, arrived with head) / (vertex, arrived with tail)
    pa = _parents(ch, n)
    anc = _ancestors(pa, z, n)
    H = np.int64(0)
    T = np.int64(0)
    for u in range(n):
        if (x >> u) & 1:
            H |= ch[u] | bi[u]
            T |= pa[u]
    visH = np.int64(0)
    visT = np.int64(0)
    while True:
        newH = H & ~visH
        newT = T & ~visT
        if newH == 0 and newT == 0:
            return False
        if (newH | newT) & y:
            return True
        visH |= newH
        visT |= newT
        for v in range(n):
            if (newH >> v) & 1:
                if (anc >> v) & 1:
                    T |= pa[v]
                    H |= bi[v]
                if not (z >> v) & 1:
                    H |= ch[v]
            if (newT >> v) & 1 and not (z >> v) & 1:
                H |= ch[v] | bi[v]
                T |= pa[v]


@njit(cache=True)
def query_fails(ch, bi, rule, w, x, y, z, over, under, n):
    if rule == DSEP:
        c2, b2 = _mutilate(ch, bi, over, under, n)
        return _connected(c2, b2, x, y, z, n)
    if rule == R1:
        c2, b2 = _mutilate(ch, bi, w, 0, n)
    elif rule == R2:
        c2, b2 = _mutilate(ch, bi, w, x, n)
    else:
        cw, bw = _mutilate(ch, bi, w, 0, n)
        anc = _ancestors(_parents(cw, n), z, n)
        c2, b2 = _mutilate(ch, bi, w | (x & ~anc), 0, n)
    return _connected(c2, b2, y, x, w | z, n)


@njit(cache=True)
def scan(n, opt_ch, opt_bi, offs, qrule, qmask, max_graphs, want_count):
    """Walk all candidate graphs; record the first violator of every query.

    Returns (first, count, status): ``first[q]`` is the candidate ordinal of
    the first acyclic graph violating query ``q`` (-1 if none); ``count`` the
    number of acyclic graphs seen; status 1 means the graph budget ran out.
    """
    ne = offs.shape[0] - 1
    nq = qrule.shape[0]
    first = np.full(nq, -1, dtype=np.int64)
    radix = np.empty(ne, dtype=np.int64)
    for e in range(ne):
        radix[e] = offs[e + 1] - offs[e]
    digit = np.zeros(ne, dtype=np.int64)
    open_q = nq
    count = 0
    ordinal = 0
    ch = np.zeros(n, dtype=np.int64)
    bi = np.zeros(n, dtype=np.int64)
    while True:
        for u in range(n):
            ch[u] = 0
            bi[u] = 0
        for e in range(ne):
            o = offs[e] + digit[e]
            for u in range(n):
                ch[u] |= opt_ch[o, u]
                bi[u] |= opt_bi[o, u]
        if _acyclic(ch, n):
            count += 1
            if count > max_graphs:
                return first, count, 1
            for q in range(nq):
                if first[q] < 0:
                    m = qmask[q]
                    if query_fails(ch, bi, qrule[q], m[0], m[1], m[2], m[3], m[4], m[5], n):
                        first[q] = ordinal
                        open_q -= 1
            if open_q == 0 and not want_count:
                return first, count, 0
        ordinal += 1
        e = ne - 1
        while e >= 0:
            digit[e] += 1
            if digit[e] < radix[e]:
                break
            digit[e] = 0
            e -= 1
        if e < 0:
            return first, count, 0
