"""Pure-numpy grid sweep kernels (fallback twin of the compiled module).

Semantics are shared with the Cython kernels bit-for-bit wherever the
arithmetic contains no transcendentals: identical candidate order,
first-found-smallest tie-breaking, identical bracket refinement.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def _interp1(prev: np.ndarray, feet: np.ndarray, x0: float, dx: float) -> np.ndarray:
    nx = prev.shape[0]
    pos = (feet - x0) / dx
    pos = np.clip(pos, 0.0, nx - 1.0)
    j = np.minimum(pos.astype(np.int64), nx - 2)
    w = pos - j
    return (1.0 - w) * prev[j] + w * prev[j + 1]


def sl_sweep_1d(terminal, sig, x0, dx, dt, nt, radii, n_refine):
    """Backward semi-Lagrangian sweep for the terminal-value form (1d).

    Each slice minimizes 0.5*dt*a^2 + interp(next slice)(x + dt*sigma(x)*a)
    over a = 0 and +-radii, then refines once between the winning level's
    neighbours.  Feet outside the domain clamp to the boundary node.
    """
    terminal = np.asarray(terminal, dtype=float)
    sig = np.asarray(sig, dtype=float)
    radii = np.asarray(radii, dtype=float)
    nx = terminal.shape[0]
    nk = radii.shape[0]
    xs = x0 + dx * np.arange(nx)
    move = dt * sig
    values = np.empty((nt + 1, nx))
    values[nt] = terminal
    for k in range(nt - 1, -1, -1):
        prev = values[k + 1]
        best = prev.copy()  # a = 0 candidate: foot at the node itself
        best_lo = np.full(nx, -radii[0] if nk else 0.0)
        best_hi = np.full(nx, radii[0] if nk else 0.0)
        for i in range(nk):
            r = radii[i]
            lo = radii[i - 1] if i > 0 else 0.0
            hi = radii[i + 1] if i < nk - 1 else radii[i]
            for sgn in (1.0, -1.0):
                a = sgn * r
                cand = 0.5 * dt * a * a + _interp1(prev, xs + move * a, x0, dx)
                mask = cand < best
                best = np.where(mask, cand, best)
                best_lo = np.where(mask, sgn * lo, best_lo)
                best_hi = np.where(mask, sgn * hi, best_hi)
        for j in range(n_refine):
            w = (j + 1) / (n_refine + 1)
            a = best_lo + (best_hi - best_lo) * w
            cand = 0.5 * dt * a * a + _interp1(prev, xs + move * a, x0, dx)
            best = np.minimum(best, cand)
        values[k] = best
    return values


def _interp2(prev, f1, f2, x10, x20, dx1, dx2):
    n1, n2 = prev.shape
    p1 = np.clip((f1 - x10) / dx1, 0.0, n1 - 1.0)
    p2 = np.clip((f2 - x20) / dx2, 0.0, n2 - 1.0)
    j1 = np.minimum(p1.astype(np.int64), n1 - 2)
    j2 = np.minimum(p2.astype(np.int64), n2 - 2)
    w1 = p1 - j1
    w2 = p2 - j2
    flat = prev.ravel()
    base = j1 * n2 + j2
    v00 = flat[base]
    v01 = flat[base + 1]
    v10 = flat[base + n2]
    v11 = flat[base + n2 + 1]
    return (1.0 - w1) * ((1.0 - w2) * v00 + w2 * v01) + w1 * ((1.0 - w2) * v10 + w2 * v11)


def sl_sweep_2d(
    terminal, s11, s12, s22, x10, x20, dx1, dx2, dt, nt,
    radii, angles, n_ref_r, n_ref_a,
):
    """Backward semi-Lagrangian sweep (2d) over a polar control sample set."""
    terminal = np.asarray(terminal, dtype=float)
    radii = np.asarray(radii, dtype=float)
    angles = np.asarray(angles, dtype=float)
    n1, n2 = terminal.shape
    nk = radii.shape[0]
    na = angles.shape[0]
    dth = (angles[1] - angles[0]) if na > 1 else np.pi
    X1 = x10 + dx1 * np.arange(n1)[:, None] + np.zeros((1, n2))
    X2 = x20 + dx2 * np.arange(n2)[None, :] + np.zeros((n1, 1))
    m11 = dt * np.asarray(s11, dtype=float)
    m12 = dt * np.asarray(s12, dtype=float)
    m22 = dt * np.asarray(s22, dtype=float)
    values = np.empty((nt + 1, n1, n2))
    values[nt] = terminal
    cth = np.cos(angles)
    sth = np.sin(angles)
    for k in range(nt - 1, -1, -1):
        prev = values[k + 1]
        best = prev.copy()  # a = 0
        best_r_lo = np.zeros((n1, n2))
        best_r_hi = np.zeros((n1, n2))
        best_th = np.zeros((n1, n2))
        for i in range(nk):
            r = radii[i]
            r_lo = radii[i - 1] if i > 0 else 0.0
            r_hi = radii[i + 1] if i < nk - 1 else radii[i]
            half = 0.5 * dt * r * r
            for j in range(na):
                a1 = r * cth[j]
                a2 = r * sth[j]
                f1 = X1 + m11 * a1 + m12 * a2
                f2 = X2 + m12 * a1 + m22 * a2
                cand = half + _interp2(prev, f1, f2, x10, x20, dx1, dx2)
                mask = cand < best
                best = np.where(mask, cand, best)
                best_r_lo = np.where(mask, r_lo, best_r_lo)
                best_r_hi = np.where(mask, r_hi, best_r_hi)
                best_th = np.where(mask, angles[j], best_th)
        for m in range(n_ref_r):
            wr = (m + 1) / (n_ref_r + 1)
            rr = best_r_lo + (best_r_hi - best_r_lo) * wr
            for l in range(n_ref_a):
                wa = (l + 1) / (n_ref_a + 1)
                th = best_th - dth + 2.0 * dth * wa
                a1 = rr * np.cos(th)
                a2 = rr * np.sin(th)
                f1 = X1 + m11 * a1 + m12 * a2
                f2 = X2 + m12 * a1 + m22 * a2
                cand = 0.5 * dt * rr * rr + _interp2(prev, f1, f2, x10, x20, dx1, dx2)
                best = np.minimum(best, cand)
        values[k] = best
    return values


def lf_sweep_1d(initial, m, dx, dt, nt):
    """Forward local Lax-Friedrichs sweep for u_t + m(x) |u_x|^2 / 2 = 0.

    Dissipation per node is m * max(|D-u|, |D+u|).  Returns the field,
    the worst CFL number dt*theta/dx seen, and the number of completed
    steps (fewer than nt when a step would break monotonicity).
    """
    initial = np.asarray(initial, dtype=float)
    m = np.asarray(m, dtype=float)
    nx = initial.shape[0]
    values = np.empty((nt + 1, nx))
    values[0] = initial
    cfl_max = 0.0
    for k in range(nt):
        u = values[k]
        du = np.diff(u) / dx
        p_minus = np.concatenate(([0.0], du))
        p_plus = np.concatenate((du, [0.0]))
        pbar = 0.5 * (p_minus + p_plus)
        theta = m * np.maximum(np.abs(p_minus), np.abs(p_plus))
        cfl = dt * float(theta.max()) / dx
        if cfl > cfl_max:
            cfl_max = cfl
        if cfl > 1.0 + 1e-12:
            return values, cfl_max, k
        ham = 0.5 * m * pbar * pbar
        values[k + 1] = u - dt * (ham - 0.5 * theta * (p_plus - p_minus))
    return values, cfl_max, nt


def lf_sweep_2d(initial, m11, m12, m22, dx1, dx2, dt, nt):
    initial = np.asarray(initial, dtype=float)
    m11 = np.asarray(m11, dtype=float)
    m12 = np.asarray(m12, dtype=float)
    m22 = np.asarray(m22, dtype=float)
    n1, n2 = initial.shape
    values = np.empty((nt + 1, n1, n2))
    values[0] = initial
    cfl_max = 0.0
    for k in range(nt):
        u = values[k]
        d1 = np.diff(u, axis=0) / dx1
        p1m = np.concatenate((np.zeros((1, n2)), d1), axis=0)
        p1p = np.concatenate((d1, np.zeros((1, n2))), axis=0)
        d2 = np.diff(u, axis=1) / dx2
        p2m = np.concatenate((np.zeros((n1, 1)), d2), axis=1)
        p2p = np.concatenate((d2, np.zeros((n1, 1))), axis=1)
        pb1 = 0.5 * (p1m + p1p)
        pb2 = 0.5 * (p2m + p2p)
        a1 = np.maximum(np.abs(p1m), np.abs(p1p))
        a2 = np.maximum(np.abs(p2m), np.abs(p2p))
        th1 = np.abs(m11) * a1 + np.abs(m12) * a2
        th2 = np.abs(m12) * a1 + np.abs(m22) * a2
        cfl = dt * float((th1 / dx1 + th2 / dx2).max())
        if cfl > cfl_max:
            cfl_max = cfl
        if cfl > 1.0 + 1e-12:
            return values, cfl_max, k
        ham = 0.5 * (m11 * pb1 * pb1 + 2.0 * m12 * pb1 * pb2 + m22 * pb2 * pb2)
        values[k + 1] = u - dt * (
            ham - 0.5 * th1 * (p1p - p1m) - 0.5 * th2 * (p2p - p2m)
        )
    return values, cfl_max, nt
