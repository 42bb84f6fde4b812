"""Compiled inner loops (numba).

Kept in one module so the JIT cache is shared and the pure-Python modules
stay readable.  Every kernel here has a slow reference implementation in the
test-suite.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _add_shifted(dst, src_l, src_r, sh, hp):
    lim = hp - sh
    for y in range(lim):
        dst[y] = src_l[y] + src_r[y + sh]
    for y in range(lim, hp):
        dst[y] = src_l[y] + src_r[y + sh - hp]


@njit(cache=True, nogil=True)
def fht_core(arr, out):
    """Dyadic line sums over a (n, hp) array, n a power of two.

    ``out[s, y0]`` receives the sum over x of ``arr[x, (y0 + off_s(x)) % hp]``
    where ``off_s`` is the dyadic pattern of total shift ``s`` across the n
    columns: the pattern of a block of width 2m and shift s is the pattern of
    shift s // 2 on the left half followed by the same pattern raised by
    s - s // 2 on the right half.  ``arr`` is used as scratch space.
    """
    n, hp = arr.shape
    levels = 0
    while (1 << levels) < n:
        levels += 1
    # ping-pong so that the last level lands in ``out``
    if levels % 2 == 0:
        a, b = out, arr
        a[:, :] = arr
    else:
        a, b = arr, out
    m = 1
    while m < n:
        for blk in range(n // (2 * m)):
            left = blk * 2 * m
            right = left + m
            for s in range(2 * m):
                h = s // 2
                _add_shifted(b[left + s], a[left + h], a[right + h], s - h, hp)
        a, b = b, a
        m *= 2
    return a


@njit(cache=True, nogil=True)
def local_maxima(acc, smax, thr):
    """Cells of ``acc[s, y]`` (s < smax) not smaller than any 8-neighbour.

    The y axis is cyclic, the s axis is not.  Cells that are zero or below
    ``thr`` are ignored.
    Returns (s, y, value) arrays.
    """
    n, hp = acc.shape
    cnt = 0
    ss = np.empty(n * hp, dtype=np.int32)
    ys = np.empty(n * hp, dtype=np.int32)
    for s in range(smax):
        for y in range(hp):
            v = acc[s, y]
            if v <= 0 or v < thr:
                continue
            ok = True
            for ds in range(-1, 2):
                t = s + ds
                if t < 0 or t >= smax:
                    continue
                for dy in range(-1, 2):
                    if ds == 0 and dy == 0:
                        continue
                    u = y + dy
                    if u < 0:
                        u += hp
                    elif u >= hp:
                        u -= hp
                    if acc[t, u] > v:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                ss[cnt] = s
                ys[cnt] = y
                cnt += 1
    vals = np.empty(cnt, dtype=np.float64)
    for i in range(cnt):
        vals[i] = acc[ss[i], ys[i]]
    return ss[:cnt], ys[:cnt], vals


@njit(cache=True, nogil=True)
def link_rows(mask):
    """Label chains with at most one pixel per row, 8-connected row to row.

    A pixel continues the chain of a pixel in the previous row directly
    above it if possible, otherwise of the upper-left, otherwise of the
    upper-right neighbour, provided that chain has not been continued yet.
    Returns (labels, count); background is -1.
    """
    h, w = mask.shape
    labels = np.full((h, w), -1, dtype=np.int32)
    used = np.zeros(w, dtype=np.uint8)
    count = 0
    for y in range(h):
        if y > 0:
            for x in range(w):
                used[x] = 0
        # pass 1: straight continuation
        for x in range(w):
            if mask[y, x] == 0:
                continue
            if y > 0 and mask[y - 1, x] != 0 and used[x] == 0:
                labels[y, x] = labels[y - 1, x]
                used[x] = 1
        # pass 2: diagonal continuation or new chain
        for x in range(w):
            if mask[y, x] == 0 or labels[y, x] >= 0:
                continue
            linked = False
            if y > 0:
                for dx in (-1, 1):
                    px = x + dx
                    if 0 <= px < w and mask[y - 1, px] != 0 and used[px] == 0:
                        labels[y, x] = labels[y - 1, px]
                        used[px] = 1
                        linked = True
                        break
            if not linked:
                labels[y, x] = count
                count += 1
    return labels, count


@njit(cache=True, nogil=True)
def _seg_err(px, py, sx, sy, sxx, syy, sxy, i, j, normalized):
    # squared distances of points strictly between i and j to the line (i, j)
    m = j - i - 1
    if m <= 0:
        return 0.0
    x0 = px[i]
    y0 = py[i]
    dx = px[j] - x0
    dy = py[j] - y0
    if normalized:
        ln = np.sqrt(dx * dx + dy * dy)
        nx = -dy / ln
        ny = dx / ln
    else:
        nx = -dy
        ny = dx
    ax = sx[j] - sx[i + 1]
    ay = sy[j] - sy[i + 1]
    axx = sxx[j] - sxx[i + 1]
    ayy = syy[j] - syy[i + 1]
    axy = sxy[j] - sxy[i + 1]
    cxx = axx - 2 * x0 * ax + m * x0 * x0
    cyy = ayy - 2 * y0 * ay + m * y0 * y0
    cxy = axy - x0 * ay - y0 * ax + m * x0 * y0
    e = nx * nx * cxx + 2 * nx * ny * cxy + ny * ny * cyy
    if e < 0:
        e = 0.0
    return e


@njit(cache=True, nogil=True)
def crease_table(px, py, eps_c, eps_o, normalized):
    """Per-start fracture candidates along an ordered chain of points.

    Row ``b`` of the result describes the polyline A*-B-C*-D* started at
    chain index B = b (see ``locate.crease``): (angle_deg, vx, vy, iA, iC,
    iD).  Rows without a candidate carry angle 180 and indices -1.
    """
    n = px.shape[0]
    out = np.empty((n, 6))
    for k in range(n):
        out[k, 0] = 180.0
        out[k, 1] = 0.0
        out[k, 2] = 0.0
        out[k, 3] = -1.0
        out[k, 4] = -1.0
        out[k, 5] = -1.0
    sx = np.zeros(n + 1)
    sy = np.zeros(n + 1)
    sxx = np.zeros(n + 1)
    syy = np.zeros(n + 1)
    sxy = np.zeros(n + 1)
    ox = px[0]
    oy = py[0]
    qx = px - ox
    qy = py - oy
    for k in range(n):
        sx[k + 1] = sx[k] + qx[k]
        sy[k + 1] = sy[k] + qy[k]
        sxx[k + 1] = sxx[k] + qx[k] * qx[k]
        syy[k + 1] = syy[k] + qy[k] * qy[k]
        sxy[k + 1] = sxy[k] + qx[k] * qy[k]
    for b in range(1, n - 2):
        cbar = -1
        for c in range(b + 2, n):
            if _seg_err(qx, qy, sx, sy, sxx, syy, sxy, b, c, normalized) >= eps_c:
                cbar = c
                break
        if cbar < 0:
            continue
        cs = cbar - 1
        if cs >= n - 1:
            continue
        a = b - 1
        while a - 1 >= 0 and _seg_err(qx, qy, sx, sy, sxx, syy, sxy, a - 1, b, normalized) <= eps_o:
            a -= 1
        d = cs + 1
        while d + 1 < n and _seg_err(qx, qy, sx, sy, sxx, syy, sxy, cs, d + 1, normalized) <= eps_o:
            d += 1
        ux = qx[b] - qx[a]
        uy = qy[b] - qy[a]
        vx = qx[d] - qx[cs]
        vy = qy[d] - qy[cs]
        nu = np.sqrt(ux * ux + uy * uy)
        nv = np.sqrt(vx * vx + vy * vy)
        if nu == 0 or nv == 0:
            continue
        cosang = (ux * vx + uy * vy) / (nu * nv)
        if cosang > 1.0:
            cosang = 1.0
        elif cosang < -1.0:
            cosang = -1.0
        # angle at the fracture between the two rays pointing away from it
        ang = 180.0 - np.degrees(np.arccos(cosang))
        cr = ux * vy - uy * vx
        if abs(cr) <= 1e-12 * nu * nv:
            wx = 0.5 * (qx[b] + qx[cs])
            wy = 0.5 * (qy[b] + qy[cs])
        else:
            t = ((qx[cs] - qx[a]) * vy - (qy[cs] - qy[a]) * vx) / cr
            wx = qx[a] + t * ux
            wy = qy[a] + t * uy
        if wy < qy[b] - 1.0 or wy > qy[cs] + 1.0:
            continue
        out[b, 0] = ang
        out[b, 1] = wx + ox
        out[b, 2] = wy + oy
        out[b, 3] = a
        out[b, 4] = cs
        out[b, 5] = d
    return out


@njit(cache=True, nogil=True)
def best_fracture(table, b_lo, b_hi):
    """Index of the sharpest candidate with start in [b_lo, b_hi] (first of ties), or -1."""
    best = 180.0
    bi = -1
    lo = max(b_lo, 0)
    hi = min(b_hi, table.shape[0] - 1)
    for b in range(lo, hi + 1):
        if table[b, 0] < best:
            best = table[b, 0]
            bi = b
    return bi


@njit(cache=True, nogil=True)
def crease_scan(px, py, eps_c, eps_o, b_lo, b_hi, normalized):
    """Boundary-fracture search along an ordered chain of points.

    For each start index B in [b_lo, b_hi] the chain is split into the
    polyline A*-B-C*-D* (see ``locate.crease``); returns the best one as
    (angle_deg, vx, vy, iA, iB, iC, iD), angle 180 if nothing was found.
    """
    table = crease_table(px, py, eps_c, eps_o, normalized)
    b = best_fracture(table, b_lo, b_hi)
    if b < 0:
        return 180.0, 0.0, 0.0, -1, -1, -1, -1
    r = table[b]
    return r[0], r[1], r[2], int(r[3]), b, int(r[4]), int(r[5])
