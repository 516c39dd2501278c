"""numpy implementations of the compiled kernels (same signatures and results).

``monotone`` promises that coordinate levels never decrease along a row and
that every coordinate has depth 1, so the last nonzero coordinate decides.
"""
import numpy as np

BIG = 1 << 40


def _exponents(vals, p, depth):
    # exponent e of the order of each entry: depth - v_p(a), 0 where a == 0
    e = np.where(vals == 0, 0, depth[None, :])
    work = vals.copy()
    live = work != 0
    while True:
        step = live & (work % p == 0)
        if not step.any():
            break
        work = np.where(step, work // p, work)
        e = e - step
    return e


def _levels_of(vals, p, depth, need, offs, monotone=False):
    if vals.shape[1] == 0:
        return np.full(vals.shape[0], -1, dtype=np.int64)
    if monotone:
        # position + 1 of the last nonzero coordinate, 0 for the zero row
        last = ((vals != 0) * np.arange(1, vals.shape[1] + 1)).max(axis=1)
        col_level = np.concatenate(([-1], need[offs + 1]))
        return col_level[last].astype(np.int64)
    e = _exponents(vals, p, depth)
    return need[offs[None, :] + e].max(axis=1).astype(np.int64)


def levels(rows, p, depth, need, offs, monotone=False):
    return _levels_of(np.asarray(rows, dtype=np.int64), p, np.asarray(depth), np.asarray(need),
                      np.asarray(offs), monotone)


def affine_levels(rows, mult, shift, moduli, p, depth, need, offs, monotone=False):
    rows = np.asarray(rows, dtype=np.int64)
    vals = (mult * rows + np.asarray(shift)[None, :]) % np.asarray(moduli)[None, :]
    return _levels_of(vals, p, np.asarray(depth), np.asarray(need), np.asarray(offs), monotone)


def _rank(lv):
    return np.where(lv < 0, BIG, -lv)


def pair_scan(rows, moduli, p, depth, need, offs, monotone=False):
    rows = np.asarray(rows, dtype=np.int64)
    moduli = np.asarray(moduli)
    depth, need, offs = np.asarray(depth), np.asarray(need), np.asarray(offs)
    r = _rank(_levels_of(rows, p, depth, need, offs, monotone))
    counts = np.zeros(3, dtype=np.int64)
    wit = np.full((3, 2), -1, dtype=np.int64)

    def note(t, i, bad):
        idx = np.flatnonzero(bad)
        counts[t] += idx.size
        if idx.size and wit[t, 0] < 0:
            wit[t] = (i, idx[0])

    for i in range(rows.shape[0]):
        def rank_of(sg, sh):
            vals = (sg * rows[i][None, :] + sh * rows) % moduli[None, :]
            return _rank(_levels_of(vals, p, depth, need, offs, monotone))

        rd = rank_of(1, -1)
        m = np.minimum(r[i], r)
        note(0, i, rd < m)
        note(1, i, (r != r[i]) & (rd != m))
        deeper = r > r[i]
        bad = np.zeros(rows.shape[0], dtype=bool)
        for sg, sh in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
            bad |= deeper & (rank_of(sg, sh) != r[i])
        note(2, i, bad)
    return counts, wit


def implication_scan(a, b, c, d, flag, cap):
    a, b, c, d = (np.asarray(t) for t in (a, b, c, d))
    flag = np.asarray(flag).astype(bool)
    total = 0
    found = []
    for i in np.flatnonzero(~flag):
        bad = np.flatnonzero((a[i] < b) & ~(c[i] < d))
        total += bad.size
        for k in bad[: max(0, cap - len(found))]:
            found.append((i, k))
    wit = np.array(found, dtype=np.int64).reshape(-1, 2)
    return total, wit
