# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot kernels in ``_pykernels``.

Signatures and iteration rules match the numpy fallback exactly.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, log1p, pow

cnp.import_array()

DEF MAX_BRACKET = 2100
DEF MAX_BISECT = 200


cdef inline double _table(double t, const double[::1] tt, const double[::1] ta) noexcept nogil:
    cdef Py_ssize_t n = tt.shape[0]
    cdef Py_ssize_t lo = 0, hi = n - 1, mid
    if t >= tt[n - 1]:
        return ta[n - 1] + (ta[n - 1] - ta[n - 2]) / (tt[n - 1] - tt[n - 2]) * (t - tt[n - 1])
    if t <= tt[0]:
        return ta[0]
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if tt[mid] <= t:
            lo = mid
        else:
            hi = mid
    return ta[lo] + (ta[hi] - ta[lo]) * (t - tt[lo]) / (tt[hi] - tt[lo])


cdef inline double _young(double t, int code, double r, double delta, double knot,
                          double slope, double scale,
                          const double[::1] tt, const double[::1] ta) noexcept nogil:
    cdef double L, out
    if code == 0:
        out = pow(t, r)
    elif code == 3:
        out = _table(t, tt, ta)
    else:
        if knot > 0.0 and t < knot:
            out = slope * t
        elif t <= 0.0:
            out = 0.0
        else:
            L = log1p(t)
            if code == 1:
                out = pow(t, r) / pow(L, 1.0 + delta)
            else:
                out = pow(t, r) / (L * pow(log(L), 1.0 + delta))
    if scale != 1.0:
        out = out / scale
    return out


cdef inline double _phi(const double[::1] g, const double[::1] m, Py_ssize_t start,
                        Py_ssize_t width, double mu, double lam, int code, double r,
                        double delta, double knot, double slope, double scale,
                        const double[::1] tt, const double[::1] ta, double moment) noexcept nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t j
    if code == 0:
        return moment / pow(lam, r)
    for j in range(start, start + width):
        if g[j] > 0.0:
            acc += m[j] * _young(g[j] / lam, code, r, delta, knot, slope, scale, tt, ta)
    return acc / mu


def luxemburg_blocks(g, m, Py_ssize_t width, int code, params, tt, ta, double rtol):
    cdef const double[::1] gv = np.ascontiguousarray(g, dtype=np.float64)
    cdef const double[::1] mv = np.ascontiguousarray(m, dtype=np.float64)
    cdef const double[::1] pv = np.ascontiguousarray(params, dtype=np.float64)
    cdef const double[::1] ttv = np.ascontiguousarray(tt, dtype=np.float64)
    cdef const double[::1] tav = np.ascontiguousarray(ta, dtype=np.float64)
    cdef Py_ssize_t n = gv.shape[0]
    cdef Py_ssize_t nb = n // width
    out = np.zeros(nb, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double r = pv[0], delta = pv[1], knot = pv[2], slope = pv[3], scale = pv[4]
    cdef Py_ssize_t b, j, start, it
    cdef double mu, fmax, hi, lo, mid, moment
    with nogil:
        for b in range(nb):
            start = b * width
            mu = 0.0
            fmax = 0.0
            for j in range(start, start + width):
                mu += mv[j]
                if gv[j] > fmax:
                    fmax = gv[j]
            if fmax <= 0.0:
                continue
            moment = 0.0
            if code == 0:
                for j in range(start, start + width):
                    if gv[j] > 0.0:
                        moment += mv[j] * pow(gv[j], r)
                moment = moment / mu
            hi = fmax
            for it in range(MAX_BRACKET):
                if _phi(gv, mv, start, width, mu, hi, code, r, delta, knot, slope, scale, ttv, tav, moment) <= 1.0:
                    break
                hi *= 2.0
            lo = hi * 0.5
            for it in range(MAX_BRACKET):
                if _phi(gv, mv, start, width, mu, lo, code, r, delta, knot, slope, scale, ttv, tav, moment) > 1.0:
                    break
                hi = lo
                lo *= 0.5
            for it in range(MAX_BISECT):
                if hi - lo <= rtol * hi:
                    break
                mid = 0.5 * (lo + hi)
                if _phi(gv, mv, start, width, mu, mid, code, r, delta, knot, slope, scale, ttv, tav, moment) <= 1.0:
                    hi = mid
                else:
                    lo = mid
            ov[b] = hi
    return out


def heap_sums(leaf):
    cdef const double[::1] lv = np.ascontiguousarray(leaf, dtype=np.float64)
    cdef Py_ssize_t n = lv.shape[0]
    heap = np.empty(2 * n, dtype=np.float64)
    cdef double[::1] hv = heap
    cdef Py_ssize_t k
    hv[0] = 0.0
    for k in range(n):
        hv[n + k] = lv[k]
    for k in range(n - 1, 0, -1):
        hv[k] = hv[2 * k] + hv[2 * k + 1]
    return heap


cdef void _fold_max(double[::1] best, const double[::1] heap, Py_ssize_t n,
                    Py_ssize_t offset, double[::1] out) noexcept nogil:
    cdef Py_ssize_t k, cell
    best[1] = heap[1]
    for k in range(2, 2 * n):
        best[k] = best[k >> 1] if best[k >> 1] > heap[k] else heap[k]
    for k in range(n):
        cell = (k + offset) % n
        if best[n + k] > out[cell]:
            out[cell] = best[n + k]


def heap_to_cells_max(heap, Py_ssize_t offset, out):
    cdef const double[::1] hv = np.ascontiguousarray(heap, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t n = ov.shape[0]
    best = np.empty(2 * n, dtype=np.float64)
    _fold_max(best, hv, n, offset, ov)
    return out


def hl_maximal(f, mass, offsets):
    cdef const double[::1] fv = np.ascontiguousarray(f, dtype=np.float64)
    cdef const double[::1] mv = np.ascontiguousarray(mass, dtype=np.float64)
    cdef Py_ssize_t n = fv.shape[0]
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] ov = out
    s = np.empty(2 * n, dtype=np.float64)
    mu = np.empty(2 * n, dtype=np.float64)
    best = np.empty(2 * n, dtype=np.float64)
    cdef double[::1] sv = s
    cdef double[::1] muv = mu
    cdef double[::1] bv = best
    cdef Py_ssize_t k, cell, off
    for o in offsets:
        off = <Py_ssize_t> o
        with nogil:
            for k in range(n):
                cell = (k + off) % n
                sv[n + k] = fv[cell] * mv[cell]
                muv[n + k] = mv[cell]
            for k in range(n - 1, 0, -1):
                sv[k] = sv[2 * k] + sv[2 * k + 1]
                muv[k] = muv[2 * k] + muv[2 * k + 1]
            for k in range(1, 2 * n):
                sv[k] = sv[k] / muv[k]
            _fold_max(bv, sv, n, off, ov)
    return out
