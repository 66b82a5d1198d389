# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled grid sweep kernels; semantics mirror _kernels_py exactly."""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, fabs, floor, sin

BACKEND = "cython"


cdef inline double _interp1(double[::1] prev, double pos, Py_ssize_t nx) nogil:
    cdef Py_ssize_t j
    cdef double w
    if pos <= 0.0:
        pos = 0.0
    elif pos >= nx - 1.0:
        pos = nx - 1.0
    j = <Py_ssize_t> floor(pos)
    if j > nx - 2:
        j = nx - 2
    w = pos - j
    return (1.0 - w) * prev[j] + w * prev[j + 1]


def sl_sweep_1d(object terminal, object sig, double x0, double dx, double dt,
                int nt, object radii, int n_refine):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] term = np.ascontiguousarray(terminal, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sig_arr = np.ascontiguousarray(sig, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rad = np.ascontiguousarray(radii, dtype=np.float64)
    cdef Py_ssize_t nx = term.shape[0]
    cdef Py_ssize_t nk = rad.shape[0]
    out_arr = np.empty((nt + 1, nx), dtype=np.float64)
    cdef double[:, ::1] values = out_arr
    cdef double[::1] sg = sig_arr
    cdef double[::1] rr = rad
    cdef double[::1] prev
    cdef Py_ssize_t k, i, ci, j
    cdef double y, mv, a, cand, best, lo, hi, r, blo, bhi, sgn, w
    values[nt, :] = term
    for k in range(nt - 1, -1, -1):
        prev = values[k + 1]
        for i in range(nx):
            y = x0 + i * dx
            mv = dt * sg[i]
            best = prev[i]  # a = 0
            blo = -rr[0] if nk > 0 else 0.0
            bhi = rr[0] if nk > 0 else 0.0
            for ci in range(nk):
                r = rr[ci]
                lo = rr[ci - 1] if ci > 0 else 0.0
                hi = rr[ci + 1] if ci < nk - 1 else rr[ci]
                sgn = 1.0
                while True:
                    a = sgn * r
                    cand = 0.5 * dt * a * a + _interp1(prev, (y + mv * a - x0) / dx, nx)
                    if cand < best:
                        best = cand
                        blo = sgn * lo
                        bhi = sgn * hi
                    if sgn < 0.0:
                        break
                    sgn = -1.0
            for j in range(n_refine):
                w = (j + 1.0) / (n_refine + 1.0)
                a = blo + (bhi - blo) * w
                cand = 0.5 * dt * a * a + _interp1(prev, (y + mv * a - x0) / dx, nx)
                if cand < best:
                    best = cand
            values[k, i] = best
    return out_arr


cdef inline double _interp2(double[:, ::1] prev, double p1, double p2,
                            Py_ssize_t n1, Py_ssize_t n2) nogil:
    cdef Py_ssize_t j1, j2
    cdef double w1, w2
    if p1 <= 0.0:
        p1 = 0.0
    elif p1 >= n1 - 1.0:
        p1 = n1 - 1.0
    if p2 <= 0.0:
        p2 = 0.0
    elif p2 >= n2 - 1.0:
        p2 = n2 - 1.0
    j1 = <Py_ssize_t> floor(p1)
    if j1 > n1 - 2:
        j1 = n1 - 2
    j2 = <Py_ssize_t> floor(p2)
    if j2 > n2 - 2:
        j2 = n2 - 2
    w1 = p1 - j1
    w2 = p2 - j2
    return (1.0 - w1) * ((1.0 - w2) * prev[j1, j2] + w2 * prev[j1, j2 + 1]) \
        + w1 * ((1.0 - w2) * prev[j1 + 1, j2] + w2 * prev[j1 + 1, j2 + 1])


def sl_sweep_2d(object terminal, object s11, object s12, object s22,
                double x10, double x20, double dx1, double dx2, double dt,
                int nt, object radii, object angles, int n_ref_r, int n_ref_a):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] term = np.ascontiguousarray(terminal, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a11 = np.ascontiguousarray(s11, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a12 = np.ascontiguousarray(s12, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a22 = np.ascontiguousarray(s22, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rad = np.ascontiguousarray(radii, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ang = np.ascontiguousarray(angles, dtype=np.float64)
    cdef Py_ssize_t n1 = term.shape[0]
    cdef Py_ssize_t n2 = term.shape[1]
    cdef Py_ssize_t nk = rad.shape[0]
    cdef Py_ssize_t na = ang.shape[0]
    out_arr = np.empty((nt + 1, n1, n2), dtype=np.float64)
    cdef double[:, :, ::1] values = out_arr
    cdef double[:, ::1] prev
    cdef double[:, ::1] v11 = a11, v12 = a12, v22 = a22
    cdef double[::1] rr = rad
    cdef double[::1] aa = ang
    cdef double dth = (aa[1] - aa[0]) if na > 1 else 3.141592653589793
    cdef Py_ssize_t k, i1, i2, ci, cj, m, l
    cdef double y1, y2, m11, m12, m22, r, r_lo, r_hi, th, a1, a2
    cdef double cand, best, blo, bhi, bth, half, wr, wa, rrr
    values[nt, :, :] = term
    for k in range(nt - 1, -1, -1):
        prev = values[k + 1]
        for i1 in range(n1):
            y1 = x10 + i1 * dx1
            for i2 in range(n2):
                y2 = x20 + i2 * dx2
                m11 = dt * v11[i1, i2]
                m12 = dt * v12[i1, i2]
                m22 = dt * v22[i1, i2]
                best = prev[i1, i2]  # a = 0
                blo = 0.0
                bhi = 0.0
                bth = 0.0
                for ci in range(nk):
                    r = rr[ci]
                    r_lo = rr[ci - 1] if ci > 0 else 0.0
                    r_hi = rr[ci + 1] if ci < nk - 1 else rr[ci]
                    half = 0.5 * dt * r * r
                    for cj in range(na):
                        a1 = r * cos(aa[cj])
                        a2 = r * sin(aa[cj])
                        cand = half + _interp2(
                            prev,
                            (y1 + m11 * a1 + m12 * a2 - x10) / dx1,
                            (y2 + m12 * a1 + m22 * a2 - x20) / dx2,
                            n1, n2)
                        if cand < best:
                            best = cand
                            blo = r_lo
                            bhi = r_hi
                            bth = aa[cj]
                for m in range(n_ref_r):
                    wr = (m + 1.0) / (n_ref_r + 1.0)
                    rrr = blo + (bhi - blo) * wr
                    for l in range(n_ref_a):
                        wa = (l + 1.0) / (n_ref_a + 1.0)
                        th = bth - dth + 2.0 * dth * wa
                        a1 = rrr * cos(th)
                        a2 = rrr * sin(th)
                        cand = 0.5 * dt * rrr * rrr + _interp2(
                            prev,
                            (y1 + m11 * a1 + m12 * a2 - x10) / dx1,
                            (y2 + m12 * a1 + m22 * a2 - x20) / dx2,
                            n1, n2)
                        if cand < best:
                            best = cand
                values[k, i1, i2] = best
    return out_arr


def lf_sweep_1d(object initial, object m, double dx, double dt, int nt):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] init = np.ascontiguousarray(initial, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] mm = np.ascontiguousarray(m, dtype=np.float64)
    cdef Py_ssize_t nx = init.shape[0]
    out_arr = np.empty((nt + 1, nx), dtype=np.float64)
    cdef double[:, ::1] values = out_arr
    cdef double[::1] mv = mm
    cdef double[::1] u
    cdef Py_ssize_t k, i
    cdef double cfl_max = 0.0, theta_max, pm, pp, pbar, theta, cfl
    values[0, :] = init
    for k in range(nt):
        u = values[k]
        theta_max = 0.0
        for i in range(nx):
            pm = (u[i] - u[i - 1]) / dx if i > 0 else 0.0
            pp = (u[i + 1] - u[i]) / dx if i < nx - 1 else 0.0
            theta = mv[i] * (fabs(pm) if fabs(pm) > fabs(pp) else fabs(pp))
            if theta > theta_max:
                theta_max = theta
            pbar = 0.5 * (pm + pp)
            values[k + 1, i] = u[i] - dt * (
                0.5 * mv[i] * pbar * pbar - 0.5 * theta * (pp - pm))
        cfl = dt * theta_max / dx
        if cfl > cfl_max:
            cfl_max = cfl
        if cfl > 1.0 + 1e-12:
            return out_arr, cfl_max, k
    return out_arr, cfl_max, nt


def lf_sweep_2d(object initial, object m11, object m12, object m22,
                double dx1, double dx2, double dt, int nt):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] init = np.ascontiguousarray(initial, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a11 = np.ascontiguousarray(m11, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a12 = np.ascontiguousarray(m12, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a22 = np.ascontiguousarray(m22, dtype=np.float64)
    cdef Py_ssize_t n1 = init.shape[0]
    cdef Py_ssize_t n2 = init.shape[1]
    out_arr = np.empty((nt + 1, n1, n2), dtype=np.float64)
    cdef double[:, :, ::1] values = out_arr
    cdef double[:, ::1] v11 = a11, v12 = a12, v22 = a22
    cdef double[:, ::1] u
    cdef Py_ssize_t k, i, j
    cdef double cfl_max = 0.0, cfl_slice, p1m, p1p, p2m, p2p, pb1, pb2
    cdef double aa1, aa2, th1, th2, cfl, ham
    values[0, :, :] = init
    for k in range(nt):
        u = values[k]
        cfl_slice = 0.0
        for i in range(n1):
            for j in range(n2):
                p1m = (u[i, j] - u[i - 1, j]) / dx1 if i > 0 else 0.0
                p1p = (u[i + 1, j] - u[i, j]) / dx1 if i < n1 - 1 else 0.0
                p2m = (u[i, j] - u[i, j - 1]) / dx2 if j > 0 else 0.0
                p2p = (u[i, j + 1] - u[i, j]) / dx2 if j < n2 - 1 else 0.0
                aa1 = fabs(p1m) if fabs(p1m) > fabs(p1p) else fabs(p1p)
                aa2 = fabs(p2m) if fabs(p2m) > fabs(p2p) else fabs(p2p)
                th1 = fabs(v11[i, j]) * aa1 + fabs(v12[i, j]) * aa2
                th2 = fabs(v12[i, j]) * aa1 + fabs(v22[i, j]) * aa2
                cfl = dt * (th1 / dx1 + th2 / dx2)
                if cfl > cfl_slice:
                    cfl_slice = cfl
                pb1 = 0.5 * (p1m + p1p)
                pb2 = 0.5 * (p2m + p2p)
                ham = 0.5 * (v11[i, j] * pb1 * pb1 + 2.0 * v12[i, j] * pb1 * pb2
                             + v22[i, j] * pb2 * pb2)
                values[k + 1, i, j] = u[i, j] - dt * (
                    ham - 0.5 * th1 * (p1p - p1m) - 0.5 * th2 * (p2p - p2m))
        if cfl_slice > cfl_max:
            cfl_max = cfl_slice
        if cfl_slice > 1.0 + 1e-12:
            return out_arr, cfl_max, k
    return out_arr, cfl_max, nt
