# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled RK4 kernel. Mirrors ``_kernel_py.integrate`` operation for operation."""

import numpy as np

from libc.math cimport fabs, isfinite

DEF NP = 15

cdef enum:
    OK = 0
    DIVERGED = 1
    NONFINITE = 2
    PRUNED = 3


cdef inline double _force_at(const double* f_t, const double* f_v, Py_ssize_t nf, double t) noexcept nogil:
    cdef double val = 0.0
    cdef Py_ssize_t i
    for i in range(nf):
        if f_t[i] <= t:
            val = f_v[i]
        else:
            break
    return val


cdef inline void _project(const double* p, double* x, double fext) noexcept nogil:
    cdef double k1 = p[2], c1 = p[3], k2 = p[4], c2 = p[5]
    if c1 + c2 > 0.0:
        x[3] = (fext - k1 * (x[2] - x[0]) + c1 * x[1] - k2 * x[2]) / (c1 + c2)
    else:
        x[2] = (fext + k1 * x[0]) / (k1 + k2)
        x[3] = k1 * x[1] / (k1 + k2)


cdef inline void _deriv(const double* p, const double* x, double fext, double* out) noexcept nogil:
    cdef double m = p[0], b = p[1], k1 = p[2], c1 = p[3], k2 = p[4], c2 = p[5]
    cdef double ml = p[14]
    cdef double xa = x[0], va = x[1], xl = x[2], vl = x[3], ia = x[4], il = x[5]
    cdef double ea, el, fa, f1, fl
    if ml == 0.0:
        if c1 + c2 > 0.0:
            vl = (fext - k1 * (xl - xa) + c1 * va - k2 * xl) / (c1 + c2)
        else:
            xl = (fext + k1 * xa) / (k1 + k2)
            vl = k1 * va / (k1 + k2)
    ea = p[12] - xa
    el = p[13] - xl
    fa = (p[6] * ea - p[7] * va + p[8] * ia
          + p[9] * el - p[10] * vl + p[11] * il)
    f1 = k1 * (xl - xa) + c1 * (vl - va)
    fl = f1 + k2 * xl + c2 * vl
    out[0] = va
    out[2] = vl
    out[4] = ea
    out[5] = el
    if ml == 0.0:
        out[1] = (fa - b * va + fext) / m
        out[3] = 0.0
    else:
        out[1] = (fa - b * va + fl) / m
        out[3] = (fext - fl) / ml


cdef inline void _forces(const double* p, const double* x, double* row) noexcept nogil:
    cdef double ea = p[12] - x[0]
    cdef double el = p[13] - x[2]
    row[0] = (p[6] * ea - p[7] * x[1] + p[8] * x[4]
              + p[9] * el - p[10] * x[3] + p[11] * x[5])
    row[1] = (p[2] * (x[2] - x[0]) + p[3] * (x[3] - x[1])
              + p[4] * x[2] + p[5] * x[3])


def integrate(params, x0, f_t, f_v, double dt, long n_steps, double div_limit=1e6,
              double prune_ref=0.0, double prune_band=0.0, double prune_after=-1.0):
    cdef double[::1] pv = np.ascontiguousarray(params, dtype=np.float64)
    cdef const double[::1] ft = np.ascontiguousarray(f_t, dtype=np.float64)
    cdef const double[::1] fv = np.ascontiguousarray(f_v, dtype=np.float64)
    if pv.shape[0] != NP:
        raise ValueError("expected 15 parameters")
    if ft.shape[0] == 0 or ft.shape[0] != fv.shape[0]:
        raise ValueError("force breakpoints must be nonempty and paired")
    states_arr = np.empty((n_steps + 1, 6))
    forces_arr = np.empty((n_steps + 1, 2))
    cdef double[:, ::1] states = states_arr
    cdef double[:, ::1] forces = forces_arr
    cdef double p[NP]
    cdef double x[6]
    cdef double k1[6]
    cdef double k2[6]
    cdef double k3[6]
    cdef double k4[6]
    cdef double tmp[6]
    cdef double row[2]
    cdef Py_ssize_t i
    cdef long n
    cdef double h = dt, half = 0.5 * dt, sixth = dt / 6.0
    cdef double t, f0, fm, f1, v
    cdef int status = OK
    cdef bint massless
    cdef long done = n_steps
    cdef Py_ssize_t nf = ft.shape[0]
    cdef const double* tp = &ft[0]
    cdef const double* vp = &fv[0]

    for i in range(NP):
        p[i] = pv[i]
    for i in range(6):
        x[i] = float(x0[i])
    massless = p[14] == 0.0
    with nogil:
        if massless:
            _project(p, x, _force_at(tp, vp, nf, 0.0))
        for i in range(6):
            states[0, i] = x[i]
        _forces(p, x, row)
        forces[0, 0] = row[0]
        forces[0, 1] = row[1]
        for n in range(n_steps):
            t = n * h
            f0 = _force_at(tp, vp, nf, t)
            fm = _force_at(tp, vp, nf, t + half)
            f1 = _force_at(tp, vp, nf, t + h)
            _deriv(p, x, f0, k1)
            for i in range(6):
                tmp[i] = x[i] + half * k1[i]
            _deriv(p, tmp, fm, k2)
            for i in range(6):
                tmp[i] = x[i] + half * k2[i]
            _deriv(p, tmp, fm, k3)
            for i in range(6):
                tmp[i] = x[i] + h * k3[i]
            _deriv(p, tmp, f1, k4)
            for i in range(6):
                x[i] = x[i] + sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            if massless:
                _project(p, x, f1)
            for i in range(6):
                v = x[i]
                if not isfinite(v):
                    status = NONFINITE
                    break
                if fabs(v) > div_limit:
                    status = DIVERGED
            for i in range(6):
                states[n + 1, i] = x[i]
            _forces(p, x, row)
            forces[n + 1, 0] = row[0]
            forces[n + 1, 1] = row[1]
            if status != OK:
                done = n + 1
                break
            if prune_after >= 0.0 and (n + 1) * h > prune_after and fabs(x[2] - prune_ref) > prune_band:
                status = PRUNED
                done = n + 1
                break
    return states_arr, forces_arr, done, status
