"""Pure numpy implementations of the hot kernels.

Same signatures and iteration rules as the compiled ``_kernels`` module; used
when the extension is not built or when forced via ``TWOWEIGHT_BACKEND``.
Cubes are stored in heap order: the cube at level ``l`` with index ``i`` sits
at slot ``2**l + i`` of an array of length ``2*N`` (slot 0 unused).
"""
import numpy as np

MAX_BRACKET = 2100
MAX_BISECT = 200


def young_eval(t, code, params, tt, ta):
    r, delta, knot, slope, scale = params
    t = np.asarray(t, dtype=float)
    if code == 0:
        out = t**r
    elif code == 3:
        inside = np.interp(t, tt, ta)
        last = (ta[-1] - ta[-2]) / (tt[-1] - tt[-2])
        out = np.where(t > tt[-1], ta[-1] + last * (t - tt[-1]), inside)
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            base = np.maximum(t, knot) if knot > 0 else np.where(t > 0, t, 1.0)
            L = np.log1p(base)
            if code == 1:
                raw = base**r / L ** (1.0 + delta)
            else:
                raw = base**r / (L * np.log(L) ** (1.0 + delta))
            if knot > 0:
                out = np.where(t < knot, slope * t, raw)
            else:
                out = np.where(t > 0, raw, 0.0)
    if scale != 1.0:
        out = out / scale
    return out


def luxemburg_blocks(g, m, width, code, params, tt, ta, rtol):
    """Luxemburg norm of ``g`` on consecutive blocks of ``width`` cells.

    ``g`` and ``m`` hold values and cell masses in grid-position order.
    Returns the upper end of the final bisection bracket, so the averaged
    Young function at the returned value is at most 1.
    """
    G = np.asarray(g, float).reshape(-1, width)
    M = np.asarray(m, float).reshape(-1, width)
    mu = M.sum(axis=1)
    fmax = G.max(axis=1)
    out = np.zeros(G.shape[0])
    live = fmax > 0
    if not live.any():
        return out
    G, M, mu, fmax = G[live], M[live], mu[live], fmax[live]

    if code == 0:
        # homogeneous: avg (g/lam)^r = avg(g^r) / lam^r
        moment = (M * G ** params[0]).sum(axis=1) / mu

        def phi(lam, rows=slice(None)):
            return moment[rows] / lam ** params[0]
    else:
        def phi(lam, rows=slice(None)):
            return _phi(lam, rows)

    def _phi(lam, rows):
        return (M[rows] * young_eval(G[rows] / lam[:, None], code, params, tt, ta)).sum(axis=1) / mu[rows]

    hi = fmax.copy()
    idx = np.arange(hi.size)
    for _ in range(MAX_BRACKET):
        bad = phi(hi[idx], idx) > 1.0
        if not bad.any():
            break
        idx = idx[bad]
        hi[idx] *= 2.0
    lo = hi * 0.5
    idx = np.arange(hi.size)
    for _ in range(MAX_BRACKET):
        ok = phi(lo[idx], idx) <= 1.0
        if not ok.any():
            break
        idx = idx[ok]
        hi[idx] = lo[idx]
        lo[idx] *= 0.5
    idx = np.arange(hi.size)
    for _ in range(MAX_BISECT):
        idx = idx[hi[idx] - lo[idx] > rtol * hi[idx]]
        if idx.size == 0:
            break
        mid = 0.5 * (lo[idx] + hi[idx])
        ok = phi(mid, idx) <= 1.0
        hi[idx[ok]] = mid[ok]
        lo[idx[~ok]] = mid[~ok]
    out[live] = hi
    return out


def heap_sums(leaf):
    """Sum leaf values (position order) up the tree into a heap array."""
    n = leaf.size
    heap = np.empty(2 * n)
    heap[0] = 0.0
    heap[n:] = leaf
    width = n
    while width > 1:
        half = width // 2
        heap[half:width] = heap[width:2 * width].reshape(-1, 2).sum(axis=1)
        width = half
    return heap


def heap_to_cells_max(heap, offset, out):
    """Per-cell max over ancestors of a heap, folded into ``out`` in place."""
    n = out.size
    best = np.empty(2 * n)
    best[1] = heap[1]
    width = 1
    while width < n:
        best[2 * width:4 * width] = np.maximum(np.repeat(best[width:2 * width], 2),
                                               heap[2 * width:4 * width])
        width *= 2
    np.maximum(out, np.roll(best[n:], offset), out=out)
    return out


def hl_maximal(f, mass, offsets):
    """Dyadic Hardy-Littlewood maximal function over every shifted grid."""
    f = np.asarray(f, float)
    mass = np.asarray(mass, float)
    out = np.zeros(f.size)
    for off in offsets:
        off = int(off)
        s = heap_sums(np.roll(f * mass, -off))
        mu = heap_sums(np.roll(mass, -off))
        avg = np.zeros_like(s)
        avg[1:] = s[1:] / mu[1:]
        heap_to_cells_max(avg, off, out)
    return out
