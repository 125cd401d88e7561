# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: Metropolis sweeps and percolation crossing thresholds.

Both functions mirror ``_kernels_py`` statement for statement; the test suite
checks that the two produce identical results on identical inputs.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport ldexp, INFINITY

cnp.import_array()


cdef int _components(signed char[::1] labels, int[:, ::1] nbr, int s, int lab,
                     int* seeds, int nseeds, int[::1] mark, int stamp,
                     int[::1] stack, signed char[::1] parity, bint check_parity,
                     int* odd) noexcept nogil:
    """Count the label-``lab`` clusters, with site ``s`` removed, that contain ``seeds``.

    With ``check_parity`` set, flags (via ``odd``) a pair of seeds joined by an
    odd path: re-attaching ``s`` would then close an odd cycle.
    """
    cdef int k = 0, i, j, d, top, u, w, remaining, deg = nbr.shape[1]
    cdef int owner[8]
    for j in range(nseeds):
        owner[j] = -1
    mark[s] = stamp
    for i in range(nseeds):
        if owner[i] >= 0:
            continue
        k += 1
        owner[i] = i
        mark[seeds[i]] = stamp
        parity[seeds[i]] = 0
        remaining = 0
        for j in range(i + 1, nseeds):
            if owner[j] < 0:
                remaining += 1
        stack[0] = seeds[i]
        top = 1
        while top > 0 and remaining > 0:
            top -= 1
            u = stack[top]
            for d in range(deg):
                w = nbr[u, d]
                if w < 0 or mark[w] == stamp or labels[w] != lab:
                    continue
                mark[w] = stamp
                parity[w] = parity[u] ^ 1
                stack[top] = w
                top += 1
                for j in range(i + 1, nseeds):
                    if owner[j] < 0 and seeds[j] == w:
                        owner[j] = i
                        remaining -= 1
                        if check_parity and parity[w]:
                            odd[0] = 1
    return k


def metropolis_sweeps(signed char[::1] labels, int[:, ::1] nbr,
                      long long[::1] sites, signed char[::1] shifts,
                      double[::1] uniforms, bint check_parity=False):
    """Apply the proposals ``(sites[i], shifts[i], uniforms[i])`` in order; return the acceptance count."""
    cdef Py_ssize_t n = labels.shape[0], nprop = sites.shape[0], i
    cdef int deg = nbr.shape[1]
    cdef int[::1] mark = np.zeros(n, dtype=np.intc)
    cdef int[::1] stack = np.zeros(n + 1, dtype=np.intc)
    cdef signed char[::1] parity = np.zeros(n, dtype=np.int8)
    cdef int stamp = 0
    cdef long long accepted = 0
    cdef int s, a, b, lw, w, j, t, na, nb, nA, nB, dv_old, dv_new, delta, odd, dup
    cdef int A[8]
    cdef int B[8]

    with nogil:
        for i in range(nprop):
            s = <int>sites[i]
            a = labels[s]
            b = (a + shifts[i]) % 3
            na = 0
            nb = 0
            nA = 0
            nB = 0
            for j in range(deg):
                w = nbr[s, j]
                if w < 0:
                    continue
                lw = labels[w]
                if lw == a:
                    na += 1
                    dup = 0
                    for t in range(nA):
                        if A[t] == w:
                            dup = 1
                    if not dup:
                        A[nA] = w
                        nA += 1
                elif lw == b:
                    nb += 1
                    dup = 0
                    for t in range(nB):
                        if B[t] == w:
                            dup = 1
                    if not dup:
                        B[nB] = w
                        nB += 1

            odd = 0
            if nA == 0:
                dv_old = -1
            elif nA == 1:
                dv_old = 0
            else:
                stamp += 1
                dv_old = _components(labels, nbr, s, a, A, nA, mark, stamp, stack,
                                     parity, False, &odd) - 1
            if nB == 0:
                dv_new = 1
            elif nB == 1:
                dv_new = 0
            else:
                stamp += 1
                dv_new = 1 - _components(labels, nbr, s, b, B, nB, mark, stamp, stack,
                                         parity, check_parity, &odd)
            if odd:
                continue
            delta = dv_old + dv_new - (na - nb)
            if delta >= 0 or uniforms[i] < ldexp(1.0, delta):
                labels[s] = b
                accepted += 1
    return accepted


cdef int _find(int[::1] parent, int x) noexcept nogil:
    cdef int r = x, nxt
    while parent[r] != r:
        r = parent[r]
    while parent[x] != r:
        nxt = parent[x]
        parent[x] = r
        x = nxt
    return r


cdef int _union(int[::1] parent, int[::1] rank, signed char[::1] flags, int x, int y) noexcept nogil:
    """Merge the sets of x and y; return the merged root's side flags."""
    x = _find(parent, x)
    y = _find(parent, y)
    if x == y:
        return flags[x]
    if rank[x] < rank[y]:
        x, y = y, x
    parent[y] = x
    if rank[x] == rank[y]:
        rank[x] += 1
    flags[x] = flags[x] | flags[y]
    return flags[x]


def critical_site(int[::1] indptr, int[::1] indices, double[::1] u,
                  long long[::1] order, signed char[::1] sides):
    """Largest p at which site dilution (delete iff u < p) still leaves a crossing.

    ``sides`` holds bit 1 for vertices touching the first boundary and bit 2
    for the second.  Returns ``-inf`` if the undiluted graph has no crossing.
    """
    cdef Py_ssize_t n = u.shape[0], i
    cdef int[::1] parent = np.arange(n, dtype=np.intc)
    cdef int[::1] rank = np.zeros(n, dtype=np.intc)
    cdef signed char[::1] flags = np.array(sides, dtype=np.int8)
    cdef signed char[::1] alive = np.zeros(n, dtype=np.int8)
    cdef int v, w, j, f
    cdef double result = -INFINITY
    with nogil:
        for i in range(n):
            v = <int>order[i]
            alive[v] = 1
            f = flags[v]
            for j in range(indptr[v], indptr[v + 1]):
                w = indices[j]
                if alive[w]:
                    f = _union(parent, rank, flags, v, w)
            if f == 3:
                result = u[v]
                break
    return result


def critical_bond(Py_ssize_t n, long long[:, ::1] edges, double[::1] u,
                  long long[::1] order, signed char[::1] sides):
    """Bond-dilution analogue of :func:`critical_site`; ``+inf`` if one vertex touches both sides."""
    cdef Py_ssize_t m = edges.shape[0], i
    cdef int[::1] parent = np.arange(n, dtype=np.intc)
    cdef int[::1] rank = np.zeros(n, dtype=np.intc)
    cdef signed char[::1] flags = np.array(sides, dtype=np.int8)
    cdef int e, f
    cdef double result = -INFINITY
    for i in range(n):
        if flags[i] == 3:
            return INFINITY
    with nogil:
        for i in range(m):
            e = <int>order[i]
            f = _union(parent, rank, flags, <int>edges[e, 0], <int>edges[e, 1])
            if f == 3:
                result = u[e]
                break
    return result
