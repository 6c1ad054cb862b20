"""Hot numeric kernels with two interchangeable backends.

The grid evaluators (conditioning maps over tens of thousands of candidate
target cells) and the Monte-Carlo batch locators are the only hot loops in
the package. Each exists twice:

- a numba ``@njit`` version (default when numba imports cleanly), and
- a pure-numpy vectorized version, selected by setting the environment
  variable ``TDOAKIT_DISABLE_NUMBA`` to a truthy value before import.

Both backends implement identical math; parity is covered by tests and the
cost difference by ``benchmarks/bench_backends.py``. Results are
deterministic for a fixed backend regardless of internal scheduling.

Index conventions match :mod:`tdoakit.geometry`: pairs and triples are
lexicographic over 0-based anchor indices.
"""

from __future__ import annotations

import math
import os

import numpy as np

from .geometry import RANK_RTOL, pair_indices, triple_indices

#: Absolute distance (m) below which a grid cell counts as sitting on an anchor.
COINCIDENT_EPS = 1e-12

#: Relative sigma_min threshold below which a map cell is masked as singular.
MASK_RTOL = 1e-12


def _env_disabled() -> bool:
    return os.environ.get("TDOAKIT_DISABLE_NUMBA", "").strip().lower() in (
        "1",
        "true",
        "yes",
        "on",
    )


# ---------------------------------------------------------------------------
# numpy backend (vectorized over cells / samples, chunked to bound memory)
# ---------------------------------------------------------------------------

_CHUNK = 4096


def _np_kappa_grid(xs, ys, axy):
    nx, ny = len(xs), len(ys)
    n = axy.shape[0]
    pairs = pair_indices(n)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    vals = np.full(nx * ny, np.nan)
    mask = np.zeros(nx * ny, dtype=bool)
    for lo in range(0, len(pts), _CHUNK):
        p = pts[lo : lo + _CHUNK]
        diff = p[:, None, :] - axy[None, :, :]  # (c, n, 2)
        d = np.hypot(diff[..., 0], diff[..., 1])
        bad = (d <= COINCIDENT_EPS).any(axis=1)
        d_safe = np.where(d <= COINCIDENT_EPS, 1.0, d)
        u = diff / d_safe[..., None]
        dm = u[:, pairs[:, 0], :] - u[:, pairs[:, 1], :]
        s = np.linalg.svd(dm, compute_uv=False)
        v = s[:, -1]
        vals[lo : lo + _CHUNK] = np.where(bad, np.nan, v)
        mask[lo : lo + _CHUNK] = bad
    return vals.reshape(nx, ny), mask.reshape(nx, ny)


def _np_central_cond_grid(xs, ys, txy):
    """Conditioning of the row-normalized central system; txy has the
    central anchor already translated to the origin."""
    nx, ny = len(xs), len(ys)
    k = txy.shape[0]
    r = np.hypot(txy[:, 0], txy[:, 1])
    pairs = pair_indices(k)
    ia, ib = pairs[:, 0], pairs[:, 1]
    scale = r[ia] * r[ib]
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    vals = np.full(nx * ny, np.nan)
    mask = np.zeros(nx * ny, dtype=bool)
    for lo in range(0, len(pts), _CHUNK):
        p = pts[lo : lo + _CHUNK]
        d0 = np.hypot(p[:, 0], p[:, 1])
        diff = p[:, None, :] - txy[None, :, :]
        dc = np.hypot(diff[..., 0], diff[..., 1]) - d0[:, None]  # (c, k)
        mx = (dc[:, ib] * txy[ia, 0] - dc[:, ia] * txy[ib, 0]) / scale
        my = (dc[:, ib] * txy[ia, 1] - dc[:, ia] * txy[ib, 1]) / scale
        m = np.stack([mx, my], axis=-1)
        s = np.linalg.svd(m, compute_uv=False)
        smax, smin = s[:, 0], s[:, -1]
        bad = (smax == 0.0) | (smin < MASK_RTOL * smax)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = smax / smin
        vals[lo : lo + _CHUNK] = np.where(bad, np.nan, v)
        mask[lo : lo + _CHUNK] = bad
    return vals.reshape(nx, ny), mask.reshape(nx, ny)


def _np_symmetric_cond_grid(xs, ys, axy):
    nx, ny = len(xs), len(ys)
    n = axy.shape[0]
    trip = triple_indices(n)
    ti, tj, tk = trip[:, 0], trip[:, 1], trip[:, 2]
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    vals = np.full(nx * ny, np.nan)
    mask = np.zeros(nx * ny, dtype=bool)
    for lo in range(0, len(pts), _CHUNK):
        p = pts[lo : lo + _CHUNK]
        diff = p[:, None, :] - axy[None, :, :]
        d = np.hypot(diff[..., 0], diff[..., 1])
        d_ij = d[:, ti] - d[:, tj]
        d_jk = d[:, tj] - d[:, tk]
        d_ki = d[:, tk] - d[:, ti]
        mx = 2.0 * (d_jk * axy[ti, 0] + d_ki * axy[tj, 0] + d_ij * axy[tk, 0])
        my = 2.0 * (d_jk * axy[ti, 1] + d_ki * axy[tj, 1] + d_ij * axy[tk, 1])
        m = np.stack([mx, my], axis=-1)
        s = np.linalg.svd(m, compute_uv=False)
        smax, smin = s[:, 0], s[:, -1]
        bad = (smax == 0.0) | (smin < MASK_RTOL * smax)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = smax / smin
        vals[lo : lo + _CHUNK] = np.where(bad, np.nan, v)
        mask[lo : lo + _CHUNK] = bad
    return vals.reshape(nx, ny), mask.reshape(nx, ny)


def _qr_solve_2col_stacked(m, f):
    """Least-squares solutions of stacked (N, k, 2) systems via QR."""
    q, r = np.linalg.qr(m)
    rhs = np.einsum("nkj,nk->nj", q, f)
    y = rhs[:, 1] / r[:, 1, 1]
    x = (rhs[:, 0] - r[:, 0, 1] * y) / r[:, 0, 0]
    return np.column_stack([x, y])


def _np_locate_central_batch(axy, central, dhat):
    n = axy.shape[0]
    others = np.array([i for i in range(n) if i != central], dtype=np.int64)
    origin = axy[central]
    txy = axy[others] - origin
    r2 = txy[:, 0] ** 2 + txy[:, 1] ** 2
    dc_rows, dc_signs, pr_rows, pr_signs, pa, pb = _central_index_plan(n, central)
    dc = dhat[:, dc_rows] * dc_signs  # (N, k)
    dji = -(dhat[:, pr_rows] * pr_signs)  # (N, P): d_ji = -d_ij
    mx = 2.0 * (dc[:, pb] * txy[pa, 0] - dc[:, pa] * txy[pb, 0])
    my = 2.0 * (dc[:, pb] * txy[pa, 1] - dc[:, pa] * txy[pb, 1])
    f = dc[:, pb] * r2[pa] - dc[:, pa] * r2[pb] + dc[:, pa] * dc[:, pb] * dji
    m = np.stack([mx, my], axis=-1)
    return _finish_linear_batch(m, f, origin)


def _np_locate_symmetric_batch(axy, dhat):
    n = axy.shape[0]
    r2 = axy[:, 0] ** 2 + axy[:, 1] ** 2
    trip = triple_indices(n)
    ti, tj, tk = trip[:, 0], trip[:, 1], trip[:, 2]
    rows_ij = np.array([_pr(n, i, j) for i, j in zip(ti, tj)])
    rows_jk = np.array([_pr(n, j, k) for j, k in zip(tj, tk)])
    rows_ik = np.array([_pr(n, i, k) for i, k in zip(ti, tk)])
    d_ij = dhat[:, rows_ij]
    d_jk = dhat[:, rows_jk]
    d_ki = -dhat[:, rows_ik]
    mx = 2.0 * (d_jk * axy[ti, 0] + d_ki * axy[tj, 0] + d_ij * axy[tk, 0])
    my = 2.0 * (d_jk * axy[ti, 1] + d_ki * axy[tj, 1] + d_ij * axy[tk, 1])
    f = d_jk * r2[ti] + d_ki * r2[tj] + d_ij * r2[tk] + d_ij * d_jk * d_ki
    m = np.stack([mx, my], axis=-1)
    return _finish_linear_batch(m, f, None)


def _finish_linear_batch(m, f, origin):
    s = np.linalg.svd(m, compute_uv=False)
    smax, smin = s[:, 0], s[:, -1]
    ok = (smax > 0.0) & (smin >= RANK_RTOL * smax)
    est = np.full((m.shape[0], 2), np.nan)
    if ok.any():
        sol = _qr_solve_2col_stacked(m[ok], f[ok])
        if origin is not None:
            sol = sol + origin
        est[ok] = sol
    return est, smin, smax, ok


def _np_locate_gn_batch(axy, dhat, init, tol, max_iter, guard):
    nsamp = dhat.shape[0]
    n = axy.shape[0]
    pairs = pair_indices(n)
    pi, pj = pairs[:, 0], pairs[:, 1]
    xy = np.tile(np.asarray(init, dtype=float), (nsamp, 1))
    iters = np.zeros(nsamp, dtype=np.int64)
    conv = np.zeros(nsamp, dtype=bool)
    ok = np.ones(nsamp, dtype=bool)
    smin_out = np.zeros(nsamp)
    active = np.arange(nsamp)
    for _ in range(max_iter):
        if len(active) == 0:
            break
        p = xy[active]
        diff = p[:, None, :] - axy[None, :, :]
        d = np.hypot(diff[..., 0], diff[..., 1])
        near = (d <= guard).any(axis=1)
        d_safe = np.where(d <= guard, 1.0, d)
        u = diff / d_safe[..., None]
        jac = u[:, pi, :] - u[:, pj, :]
        res = (d[:, pi] - d[:, pj]) - dhat[active]
        s = np.linalg.svd(jac, compute_uv=False)
        smax, smin = s[:, 0], s[:, -1]
        degen = (smax == 0.0) | (smin < RANK_RTOL * smax)
        failed = near | degen
        good = ~failed
        step = np.zeros((len(active), 2))
        if good.any():
            step[good] = _qr_solve_2col_stacked(jac[good], -res[good])
        idx = active
        ok[idx[failed]] = False
        smin_out[idx] = smin
        xy[idx[good]] += step[good]
        iters[idx[good]] += 1
        done = np.zeros(len(active), dtype=bool)
        done[good] = np.linalg.norm(step[good], axis=1) <= tol
        conv[idx[done]] = True
        active = idx[good & ~done]
    est = xy.copy()
    est[~ok] = np.nan
    return est, iters, conv, smin_out, ok


def _pr(n, i, j):
    return i * n - i * (i + 1) // 2 + (j - i - 1)


def _central_index_plan(n, central):
    """Index arrays mapping full pair vectors onto the central construction."""
    others = [i for i in range(n) if i != central]
    dc_rows = np.empty(len(others), dtype=np.int64)
    dc_signs = np.empty(len(others))
    for a, i in enumerate(others):
        if i < central:
            dc_rows[a] = _pr(n, i, central)
            dc_signs[a] = 1.0
        else:
            dc_rows[a] = _pr(n, central, i)
            dc_signs[a] = -1.0
    k = len(others)
    pa, pb, pr_rows, pr_signs = [], [], [], []
    for a in range(k):
        for b in range(a + 1, k):
            i, j = others[a], others[b]
            pa.append(a)
            pb.append(b)
            pr_rows.append(_pr(n, i, j))  # others list is increasing, so i < j
            pr_signs.append(1.0)
    return (
        dc_rows,
        dc_signs,
        np.array(pr_rows, dtype=np.int64),
        np.array(pr_signs),
        np.array(pa, dtype=np.int64),
        np.array(pb, dtype=np.int64),
    )


_NUMPY_IMPL = {
    "kappa_grid": _np_kappa_grid,
    "central_cond_grid": _np_central_cond_grid,
    "symmetric_cond_grid": _np_symmetric_cond_grid,
    "locate_central_batch": _np_locate_central_batch,
    "locate_symmetric_batch": _np_locate_symmetric_batch,
    "locate_gn_batch": _np_locate_gn_batch,
}


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------

_NUMBA_IMPL = None

if not _env_disabled():
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        njit = None

    if njit is not None:

        @njit(cache=True)
        def _sv2(m):
            """Singular values (max, min) of an (k, 2) matrix.

            One-sided Jacobi: a single column rotation orthogonalizes two
            columns exactly; the rotated column norms are the singular
            values. Pure arithmetic, LAPACK-equivalent absolute accuracy
            (~eps * sigma_max), which the mask threshold comfortably
            tolerates.
            """
            a0 = 0.0
            b0 = 0.0
            g = 0.0
            for t in range(m.shape[0]):
                a0 += m[t, 0] * m[t, 0]
                b0 += m[t, 1] * m[t, 1]
                g += m[t, 0] * m[t, 1]
            if g == 0.0:
                c, s = 1.0, 0.0
            else:
                tau = (b0 - a0) / (2.0 * g)
                if tau >= 0.0:
                    tt = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    tt = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + tt * tt)
                s = tt * c
            na = 0.0
            nb = 0.0
            for t in range(m.shape[0]):
                x = c * m[t, 0] - s * m[t, 1]
                y = s * m[t, 0] + c * m[t, 1]
                na += x * x
                nb += y * y
            sa = math.sqrt(na)
            sb = math.sqrt(nb)
            if sa >= sb:
                return sa, sb
            return sb, sa

        @njit(cache=True)
        def _ls2(m, f):
            """Least squares for an (k, 2) system via the same rotation.

            Returns (x0, x1, smax, smin, ok); ok is False (and the solution
            zeros) when the matrix is rank deficient at RANK_RTOL.
            """
            a0 = 0.0
            b0 = 0.0
            g = 0.0
            for t in range(m.shape[0]):
                a0 += m[t, 0] * m[t, 0]
                b0 += m[t, 1] * m[t, 1]
                g += m[t, 0] * m[t, 1]
            if g == 0.0:
                c, s = 1.0, 0.0
            else:
                tau = (b0 - a0) / (2.0 * g)
                if tau >= 0.0:
                    tt = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    tt = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + tt * tt)
                s = tt * c
            na = 0.0
            nb = 0.0
            fa = 0.0
            fb = 0.0
            for t in range(m.shape[0]):
                x = c * m[t, 0] - s * m[t, 1]
                y = s * m[t, 0] + c * m[t, 1]
                na += x * x
                nb += y * y
                fa += x * f[t]
                fb += y * f[t]
            sa = math.sqrt(na)
            sb = math.sqrt(nb)
            if sa >= sb:
                smax, smin = sa, sb
            else:
                smax, smin = sb, sa
            if smax == 0.0 or smin < RANK_RTOL * smax:
                return 0.0, 0.0, smax, smin, False
            xr0 = fa / na
            xr1 = fb / nb
            return c * xr0 + s * xr1, -s * xr0 + c * xr1, smax, smin, True

        @njit(cache=True)
        def _nb_kappa_grid(xs, ys, axy):
            nx, ny = len(xs), len(ys)
            n = axy.shape[0]
            npair = n * (n - 1) // 2
            vals = np.full((nx, ny), np.nan)
            mask = np.zeros((nx, ny), np.bool_)
            u = np.empty((n, 2))
            dm = np.empty((npair, 2))
            for cx in range(nx):
                for cy in range(ny):
                    x, y = xs[cx], ys[cy]
                    bad = False
                    for a in range(n):
                        dx = x - axy[a, 0]
                        dy = y - axy[a, 1]
                        dd = math.sqrt(dx * dx + dy * dy)
                        if dd <= COINCIDENT_EPS:
                            bad = True
                            break
                        u[a, 0] = dx / dd
                        u[a, 1] = dy / dd
                    if bad:
                        mask[cx, cy] = True
                        continue
                    k = 0
                    for a in range(n):
                        for b in range(a + 1, n):
                            dm[k, 0] = u[a, 0] - u[b, 0]
                            dm[k, 1] = u[a, 1] - u[b, 1]
                            k += 1
                    vals[cx, cy] = _sv2(dm)[1]
            return vals, mask

        @njit(cache=True)
        def _nb_central_cond_grid(xs, ys, txy):
            nx, ny = len(xs), len(ys)
            k = txy.shape[0]
            npair = k * (k - 1) // 2
            r = np.empty(k)
            for a in range(k):
                r[a] = math.sqrt(txy[a, 0] ** 2 + txy[a, 1] ** 2)
            vals = np.full((nx, ny), np.nan)
            mask = np.zeros((nx, ny), np.bool_)
            dc = np.empty(k)
            m = np.empty((npair, 2))
            for cx in range(nx):
                for cy in range(ny):
                    x, y = xs[cx], ys[cy]
                    d0 = math.sqrt(x * x + y * y)
                    for a in range(k):
                        dx = x - txy[a, 0]
                        dy = y - txy[a, 1]
                        dc[a] = math.sqrt(dx * dx + dy * dy) - d0
                    t = 0
                    for a in range(k):
                        for b in range(a + 1, k):
                            scale = r[a] * r[b]
                            m[t, 0] = (dc[b] * txy[a, 0] - dc[a] * txy[b, 0]) / scale
                            m[t, 1] = (dc[b] * txy[a, 1] - dc[a] * txy[b, 1]) / scale
                            t += 1
                    smax, smin = _sv2(m)
                    if smax == 0.0 or smin < MASK_RTOL * smax:
                        mask[cx, cy] = True
                    else:
                        vals[cx, cy] = smax / smin
            return vals, mask

        @njit(cache=True)
        def _nb_symmetric_cond_grid(xs, ys, axy):
            nx, ny = len(xs), len(ys)
            n = axy.shape[0]
            ntrip = n * (n - 1) * (n - 2) // 6
            vals = np.full((nx, ny), np.nan)
            mask = np.zeros((nx, ny), np.bool_)
            d = np.empty(n)
            m = np.empty((ntrip, 2))
            for cx in range(nx):
                for cy in range(ny):
                    x, y = xs[cx], ys[cy]
                    for a in range(n):
                        dx = x - axy[a, 0]
                        dy = y - axy[a, 1]
                        d[a] = math.sqrt(dx * dx + dy * dy)
                    t = 0
                    for i in range(n):
                        for j in range(i + 1, n):
                            for kk in range(j + 1, n):
                                d_ij = d[i] - d[j]
                                d_jk = d[j] - d[kk]
                                d_ki = d[kk] - d[i]
                                m[t, 0] = 2.0 * (
                                    d_jk * axy[i, 0] + d_ki * axy[j, 0] + d_ij * axy[kk, 0]
                                )
                                m[t, 1] = 2.0 * (
                                    d_jk * axy[i, 1] + d_ki * axy[j, 1] + d_ij * axy[kk, 1]
                                )
                                t += 1
                    smax, smin = _sv2(m)
                    if smax == 0.0 or smin < MASK_RTOL * smax:
                        mask[cx, cy] = True
                    else:
                        vals[cx, cy] = smax / smin
            return vals, mask

        @njit(cache=True)
        def _nb_linear_batch_core(m_all, f_all, origin, shift):
            nsamp = m_all.shape[0]
            est = np.full((nsamp, 2), np.nan)
            smin = np.zeros(nsamp)
            smax = np.zeros(nsamp)
            ok = np.zeros(nsamp, np.bool_)
            for s in range(nsamp):
                x, y, sma, smi, good = _ls2(m_all[s], f_all[s])
                smax[s] = sma
                smin[s] = smi
                if not good:
                    continue
                if shift:
                    x += origin[0]
                    y += origin[1]
                est[s, 0] = x
                est[s, 1] = y
                ok[s] = True
            return est, smin, smax, ok

        @njit(cache=True)
        def _nb_build_central(txy, r2, dc, dji, pa, pb):
            nsamp = dc.shape[0]
            npair = len(pa)
            m = np.empty((nsamp, npair, 2))
            f = np.empty((nsamp, npair))
            for s in range(nsamp):
                for t in range(npair):
                    a, b = pa[t], pb[t]
                    m[s, t, 0] = 2.0 * (dc[s, b] * txy[a, 0] - dc[s, a] * txy[b, 0])
                    m[s, t, 1] = 2.0 * (dc[s, b] * txy[a, 1] - dc[s, a] * txy[b, 1])
                    f[s, t] = (
                        dc[s, b] * r2[a] - dc[s, a] * r2[b] + dc[s, a] * dc[s, b] * dji[s, t]
                    )
            return m, f

        def _nb_locate_central_batch(axy, central, dhat):
            n = axy.shape[0]
            others = np.array([i for i in range(n) if i != central], dtype=np.int64)
            origin = axy[central]
            txy = np.ascontiguousarray(axy[others] - origin)
            r2 = txy[:, 0] ** 2 + txy[:, 1] ** 2
            dc_rows, dc_signs, pr_rows, pr_signs, pa, pb = _central_index_plan(n, central)
            dc = np.ascontiguousarray(dhat[:, dc_rows] * dc_signs)
            dji = np.ascontiguousarray(-(dhat[:, pr_rows] * pr_signs))
            m, f = _nb_build_central(txy, r2, dc, dji, pa, pb)
            return _nb_linear_batch_core(m, f, origin, True)

        @njit(cache=True)
        def _nb_build_symmetric(axy, dhat, rows_ij, rows_jk, rows_ik, ti, tj, tk):
            nsamp = dhat.shape[0]
            ntrip = len(ti)
            r2 = axy[:, 0] ** 2 + axy[:, 1] ** 2
            m = np.empty((nsamp, ntrip, 2))
            f = np.empty((nsamp, ntrip))
            for s in range(nsamp):
                for t in range(ntrip):
                    i, j, k = ti[t], tj[t], tk[t]
                    d_ij = dhat[s, rows_ij[t]]
                    d_jk = dhat[s, rows_jk[t]]
                    d_ki = -dhat[s, rows_ik[t]]
                    m[s, t, 0] = 2.0 * (d_jk * axy[i, 0] + d_ki * axy[j, 0] + d_ij * axy[k, 0])
                    m[s, t, 1] = 2.0 * (d_jk * axy[i, 1] + d_ki * axy[j, 1] + d_ij * axy[k, 1])
                    f[s, t] = (
                        d_jk * r2[i] + d_ki * r2[j] + d_ij * r2[k] + d_ij * d_jk * d_ki
                    )
            return m, f

        def _nb_locate_symmetric_batch(axy, dhat):
            n = axy.shape[0]
            trip = triple_indices(n)
            ti, tj, tk = trip[:, 0], trip[:, 1], trip[:, 2]
            rows_ij = np.array([_pr(n, i, j) for i, j in zip(ti, tj)], dtype=np.int64)
            rows_jk = np.array([_pr(n, j, k) for j, k in zip(tj, tk)], dtype=np.int64)
            rows_ik = np.array([_pr(n, i, k) for i, k in zip(ti, tk)], dtype=np.int64)
            m, f = _nb_build_symmetric(
                np.ascontiguousarray(axy),
                np.ascontiguousarray(dhat),
                rows_ij,
                rows_jk,
                rows_ik,
                np.ascontiguousarray(ti),
                np.ascontiguousarray(tj),
                np.ascontiguousarray(tk),
            )
            return _nb_linear_batch_core(m, f, np.zeros(2), False)

        @njit(cache=True)
        def _nb_locate_gn_batch(axy, dhat, init, tol, max_iter, guard):
            nsamp = dhat.shape[0]
            n = axy.shape[0]
            npair = n * (n - 1) // 2
            est = np.full((nsamp, 2), np.nan)
            iters = np.zeros(nsamp, np.int64)
            conv = np.zeros(nsamp, np.bool_)
            ok = np.ones(nsamp, np.bool_)
            smin_out = np.zeros(nsamp)
            d = np.empty(n)
            u = np.empty((n, 2))
            jac = np.empty((npair, 2))
            res = np.empty(npair)
            for s in range(nsamp):
                x, y = init[0], init[1]
                failed = False
                for _ in range(max_iter):
                    near = False
                    for a in range(n):
                        dx = x - axy[a, 0]
                        dy = y - axy[a, 1]
                        dd = math.sqrt(dx * dx + dy * dy)
                        if dd <= guard:
                            near = True
                            break
                        d[a] = dd
                        u[a, 0] = dx / dd
                        u[a, 1] = dy / dd
                    if near:
                        failed = True
                        break
                    k = 0
                    for a in range(n):
                        for b in range(a + 1, n):
                            jac[k, 0] = u[a, 0] - u[b, 0]
                            jac[k, 1] = u[a, 1] - u[b, 1]
                            res[k] = -((d[a] - d[b]) - dhat[s, k])
                            k += 1
                    sx, sy, _, smi, good = _ls2(jac, res)
                    smin_out[s] = smi
                    if not good:
                        failed = True
                        break
                    x += sx
                    y += sy
                    iters[s] += 1
                    if math.sqrt(sx * sx + sy * sy) <= tol:
                        conv[s] = True
                        break
                if failed:
                    ok[s] = False
                else:
                    est[s, 0] = x
                    est[s, 1] = y
            return est, iters, conv, smin_out, ok

        _NUMBA_IMPL = {
            "kappa_grid": _nb_kappa_grid,
            "central_cond_grid": _nb_central_cond_grid,
            "symmetric_cond_grid": _nb_symmetric_cond_grid,
            "locate_central_batch": _nb_locate_central_batch,
            "locate_symmetric_batch": _nb_locate_symmetric_batch,
            "locate_gn_batch": _nb_locate_gn_batch,
        }


_ACTIVE = _NUMBA_IMPL if _NUMBA_IMPL is not None else _NUMPY_IMPL


def active_backend() -> str:
    return "numba" if _ACTIVE is _NUMBA_IMPL else "numpy"


def backends() -> dict:
    """All available backends keyed by name (for parity tests and benchmarks)."""
    out = {"numpy": _NUMPY_IMPL}
    if _NUMBA_IMPL is not None:
        out["numba"] = _NUMBA_IMPL
    return out


def kappa_grid(xs, ys, axy):
    """Angular dispersion of anchor directions at each (x, y) cell."""
    return _ACTIVE["kappa_grid"](
        np.ascontiguousarray(xs, dtype=float),
        np.ascontiguousarray(ys, dtype=float),
        np.ascontiguousarray(axy, dtype=float),
    )


def central_cond_grid(xs, ys, txy):
    """cond of the normalized central-anchor system at each cell.

    ``txy`` holds the non-central anchors translated so the central anchor
    is the origin; xs/ys are in the same translated frame.
    """
    return _ACTIVE["central_cond_grid"](
        np.ascontiguousarray(xs, dtype=float),
        np.ascontiguousarray(ys, dtype=float),
        np.ascontiguousarray(txy, dtype=float),
    )


def symmetric_cond_grid(xs, ys, axy):
    """cond of the raw triple-based system at each cell."""
    return _ACTIVE["symmetric_cond_grid"](
        np.ascontiguousarray(xs, dtype=float),
        np.ascontiguousarray(ys, dtype=float),
        np.ascontiguousarray(axy, dtype=float),
    )


def locate_central_batch(axy, central, dhat):
    """Vectorized central-mode locate over a batch of measurement vectors.

    Returns (estimates (N,2), sigma_min, sigma_max, ok). Estimates of
    samples whose system is singular are NaN with ok False.
    """
    return _ACTIVE["locate_central_batch"](
        np.ascontiguousarray(axy, dtype=float), int(central),
        np.ascontiguousarray(dhat, dtype=float),
    )


def locate_symmetric_batch(axy, dhat):
    """Vectorized symmetric-mode locate; same returns as the central variant."""
    return _ACTIVE["locate_symmetric_batch"](
        np.ascontiguousarray(axy, dtype=float), np.ascontiguousarray(dhat, dtype=float)
    )


def locate_gn_batch(axy, dhat, init, tol=1e-9, max_iter=100, guard=1e-9):
    """Vectorized Gauss-Newton locate from one shared initial guess.

    Returns (estimates, iterations, converged, jacobian_sigma_min, ok); ok is
    False for samples that hit an anchor guard radius or degenerate geometry.
    """
    return _ACTIVE["locate_gn_batch"](
        np.ascontiguousarray(axy, dtype=float),
        np.ascontiguousarray(dhat, dtype=float),
        np.ascontiguousarray(init, dtype=float),
        float(tol),
        int(max_iter),
        float(guard),
    )
