"""Pure-Python implementations of the compiled kernels in ``_kernels.pyx``.

The logic is kept line-for-line parallel with the Cython source so that both
backends consume the same random numbers and produce identical chains.
"""

from __future__ import annotations

import math

import numpy as np


def _components(labels, nbr, s, lab, seeds, mark, stamp, parity, check_parity):
    k = 0
    odd = False
    owner = [-1] * len(seeds)
    mark[s] = stamp
    for i, seed in enumerate(seeds):
        if owner[i] >= 0:
            continue
        k += 1
        owner[i] = i
        mark[seed] = stamp
        parity[seed] = 0
        remaining = sum(1 for j in range(i + 1, len(seeds)) if owner[j] < 0)
        stack = [seed]
        while stack and remaining > 0:
            u = stack.pop()
            for w in nbr[u]:
                if w < 0 or mark[w] == stamp or labels[w] != lab:
                    continue
                mark[w] = stamp
                parity[w] = parity[u] ^ 1
                stack.append(w)
                for j in range(i + 1, len(seeds)):
                    if owner[j] < 0 and seeds[j] == w:
                        owner[j] = i
                        remaining -= 1
                        if check_parity and parity[w]:
                            odd = True
    return k, odd


def metropolis_sweeps(labels, nbr, sites, shifts, uniforms, check_parity=False):
    n = len(labels)
    lab = labels.tolist()
    table = nbr.tolist()
    mark = [0] * n
    parity = [0] * n
    stamp = 0
    accepted = 0
    for s, shift, u in zip(sites.tolist(), shifts.tolist(), uniforms.tolist()):
        a = lab[s]
        b = (a + shift) % 3
        na = nb = 0
        A: list[int] = []
        B: list[int] = []
        for w in table[s]:
            if w < 0:
                continue
            if lab[w] == a:
                na += 1
                if w not in A:
                    A.append(w)
            elif lab[w] == b:
                nb += 1
                if w not in B:
                    B.append(w)
        odd = False
        if not A:
            dv_old = -1
        elif len(A) == 1:
            dv_old = 0
        else:
            stamp += 1
            k, _ = _components(lab, table, s, a, A, mark, stamp, parity, False)
            dv_old = k - 1
        if not B:
            dv_new = 1
        elif len(B) == 1:
            dv_new = 0
        else:
            stamp += 1
            m, odd = _components(lab, table, s, b, B, mark, stamp, parity, check_parity)
            dv_new = 1 - m
        if odd:
            continue
        delta = dv_old + dv_new - (na - nb)
        if delta >= 0 or u < math.ldexp(1.0, delta):
            lab[s] = b
            accepted += 1
    labels[:] = lab
    return accepted


class _UnionFind:
    def __init__(self, sides):
        n = len(sides)
        self.parent = list(range(n))
        self.rank = [0] * n
        self.flags = [int(f) for f in sides]

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y):
        x, y = self.find(x), self.find(y)
        if x == y:
            return self.flags[x]
        if self.rank[x] < self.rank[y]:
            x, y = y, x
        self.parent[y] = x
        if self.rank[x] == self.rank[y]:
            self.rank[x] += 1
        self.flags[x] |= self.flags[y]
        return self.flags[x]


def critical_site(indptr, indices, u, order, sides):
    uf = _UnionFind(sides)
    alive = [False] * len(u)
    indptr = indptr.tolist()
    indices = indices.tolist()
    for v in order.tolist():
        alive[v] = True
        f = uf.flags[v]
        for j in range(indptr[v], indptr[v + 1]):
            w = indices[j]
            if alive[w]:
                f = uf.union(v, w)
        if f == 3:
            return float(u[v])
    return -math.inf


def critical_bond(n, edges, u, order, sides):
    if np.any(np.asarray(sides) == 3):
        return math.inf
    uf = _UnionFind(sides)
    pairs = edges.tolist()
    for e in order.tolist():
        a, b = pairs[e]
        if uf.union(a, b) == 3:
            return float(u[e])
    return -math.inf
