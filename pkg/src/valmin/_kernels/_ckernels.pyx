# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops over encoded group truncations.

Rows are coordinate vectors: coordinate j lives in Z/p**depth[j].  The level
of a coordinate value a is need[offs[j] + e] where e is the exponent of the
order of a (0 for a == 0); the level of a row is the max over coordinates,
-1 for the zero row.  When ``monotone`` is set the coordinate levels are
nondecreasing in j (elementary abelian slots), so a row's level is that of
its last nonzero coordinate.
"""
import numpy as np

cdef long long BIG = 1LL << 40


cdef inline long long _coord_level(long long a, long long p, long long depth,
                                   const long long[:] need, long long off) nogil:
    cdef long long e
    if a == 0:
        return need[off]
    e = depth
    while a % p == 0:
        a //= p
        e -= 1
    return need[off + e]


cdef inline long long _reduce(long long a, long long q, bint pow2) nogil:
    if pow2:
        return a & (q - 1)
    a = a % q
    if a < 0:
        a += q
    return a


cdef inline long long _rank(long long lvl) nogil:
    if lvl < 0:
        return BIG
    return -lvl


def levels(const long long[:, :] rows, long long p, const long long[:] depth,
           const long long[:] need, const long long[:] offs, bint monotone=False):
    cdef Py_ssize_t n = rows.shape[0], c = rows.shape[1], i, j
    cdef long long best, lv
    out = np.empty(n, dtype=np.int64)
    cdef long long[:] o = out
    with nogil:
        for i in range(n):
            best = -1
            if monotone:
                for j in range(c - 1, -1, -1):
                    if rows[i, j] != 0:
                        best = _coord_level(rows[i, j], p, depth[j], need, offs[j])
                        break
            else:
                for j in range(c):
                    lv = _coord_level(rows[i, j], p, depth[j], need, offs[j])
                    if lv > best:
                        best = lv
            o[i] = best
    return out


def affine_levels(const long long[:, :] rows, long long mult, const long long[:] shift,
                  const long long[:] moduli, long long p, const long long[:] depth,
                  const long long[:] need, const long long[:] offs, bint monotone=False):
    """Levels of mult*x + shift for every row x."""
    cdef Py_ssize_t n = rows.shape[0], c = rows.shape[1], i, j
    cdef long long best, lv, a
    cdef bint pow2 = p == 2
    out = np.empty(n, dtype=np.int64)
    cdef long long[:] o = out
    with nogil:
        for i in range(n):
            best = -1
            if monotone:
                for j in range(c - 1, -1, -1):
                    a = _reduce(mult * rows[i, j] + shift[j], moduli[j], pow2)
                    if a != 0:
                        best = _coord_level(a, p, depth[j], need, offs[j])
                        break
            else:
                for j in range(c):
                    a = _reduce(mult * rows[i, j] + shift[j], moduli[j], pow2)
                    lv = _coord_level(a, p, depth[j], need, offs[j])
                    if lv > best:
                        best = lv
            o[i] = best
    return out


cdef inline long long _combo_level(const long long[:, :] rows, Py_ssize_t i, Py_ssize_t k,
                                   long long si, long long sk, const long long[:] moduli,
                                   long long p, const long long[:] depth,
                                   const long long[:] need, const long long[:] offs,
                                   bint monotone) nogil:
    cdef Py_ssize_t j, c = rows.shape[1]
    cdef long long best = -1, lv, a
    cdef bint pow2 = p == 2
    if monotone:
        for j in range(c - 1, -1, -1):
            a = _reduce(si * rows[i, j] + sk * rows[k, j], moduli[j], pow2)
            if a != 0:
                return _coord_level(a, p, depth[j], need, offs[j])
        return -1
    for j in range(c):
        a = _reduce(si * rows[i, j] + sk * rows[k, j], moduli[j], pow2)
        lv = _coord_level(a, p, depth[j], need, offs[j])
        if lv > best:
            best = lv
    return best


def pair_scan(const long long[:, :] rows, const long long[:] moduli, long long p,
              const long long[:] depth, const long long[:] need, const long long[:] offs,
              bint monotone=False):
    """Exhaustive pairwise ultrametric checks.

    Returns (counts, witnesses): counts[0] axiom (2) failures, counts[1]
    equality-case failures, counts[2] failures of v(h) > v(g) => v(+-g+-h) = v(g).
    witnesses[t] is the first offending (i, k) or (-1, -1).
    """
    cdef Py_ssize_t n = rows.shape[0], i, k, t
    cdef long long ri, rk, rd, m, lv
    cdef long long sg, sh
    lv_arr = levels(rows, p, depth, need, offs, monotone)
    cdef long long[:] lvs = lv_arr
    counts = np.zeros(3, dtype=np.int64)
    wit = np.full((3, 2), -1, dtype=np.int64)
    cdef long long[:] cnt = counts
    cdef long long[:, :] w = wit
    with nogil:
        for i in range(n):
            ri = _rank(lvs[i])
            for k in range(n):
                rk = _rank(lvs[k])
                rd = _rank(_combo_level(rows, i, k, 1, -1, moduli, p, depth, need, offs,
                                        monotone))
                m = ri if ri < rk else rk
                if rd < m:
                    cnt[0] += 1
                    if w[0, 0] < 0:
                        w[0, 0] = i
                        w[0, 1] = k
                if ri != rk and rd != m:
                    cnt[1] += 1
                    if w[1, 0] < 0:
                        w[1, 0] = i
                        w[1, 1] = k
                if rk > ri:
                    for t in range(4):
                        sg = 1 if t < 2 else -1
                        sh = 1 if t % 2 == 0 else -1
                        if _rank(_combo_level(rows, i, k, sg, sh, moduli, p, depth,
                                              need, offs, monotone)) != ri:
                            cnt[2] += 1
                            if w[2, 0] < 0:
                                w[2, 0] = i
                                w[2, 1] = k
                            break
    return counts, wit


def implication_scan(const long long[:] a, const long long[:] b, const long long[:] c,
                     const long long[:] d, const unsigned char[:] flag, Py_ssize_t cap):
    """Count pairs (i, k) with a[i] < b[k] and not (c[i] < d[k] or flag[i])."""
    cdef Py_ssize_t n = a.shape[0], i, k, found = 0
    cdef long long total = 0
    wit = np.full((cap, 2), -1, dtype=np.int64)
    cdef long long[:, :] w = wit
    with nogil:
        for i in range(n):
            if flag[i]:
                continue
            for k in range(n):
                if a[i] < b[k] and not (c[i] < d[k]):
                    total += 1
                    if found < cap:
                        w[found, 0] = i
                        w[found, 1] = k
                        found += 1
    return total, wit[:found]
