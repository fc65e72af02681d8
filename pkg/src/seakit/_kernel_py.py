"""Pure-Python RK4 kernel; reference implementation and import-time fallback.

Must stay operation-for-operation identical to ``_kernel.pyx``.
"""

import math

import numpy as np

OK, DIVERGED, NONFINITE, PRUNED = 0, 1, 2, 3

# parameter vector layout shared with the compiled kernel
(P_M, P_B, P_K1, P_C1, P_K2, P_C2, P_KPA, P_KVA, P_KIA,
 P_KPL, P_KVL, P_KIL, P_THA, P_THL, P_ML) = range(15)
N_PARAMS = 15


def _force_at(f_t, f_v, t):
    val = 0.0
    for i in range(len(f_t)):
        if f_t[i] <= t:
            val = f_v[i]
        else:
            break
    return val


def _project(p, x, fext):
    """Massless load: overwrite x_L/v_L with their algebraic values."""
    k1, c1, k2, c2 = p[P_K1], p[P_C1], p[P_K2], p[P_C2]
    if c1 + c2 > 0.0:
        x[3] = (fext - k1 * (x[2] - x[0]) + c1 * x[1] - k2 * x[2]) / (c1 + c2)
    else:
        x[2] = (fext + k1 * x[0]) / (k1 + k2)
        x[3] = k1 * x[1] / (k1 + k2)


def _deriv(p, x, fext, out):
    m, b, k1, c1, k2, c2 = p[P_M], p[P_B], p[P_K1], p[P_C1], p[P_K2], p[P_C2]
    ml = p[P_ML]
    xa, va, xl, vl, ia, il = x[0], x[1], x[2], x[3], x[4], x[5]
    if ml == 0.0:
        if c1 + c2 > 0.0:
            vl = (fext - k1 * (xl - xa) + c1 * va - k2 * xl) / (c1 + c2)
        else:
            xl = (fext + k1 * xa) / (k1 + k2)
            vl = k1 * va / (k1 + k2)
    ea = p[P_THA] - xa
    el = p[P_THL] - xl
    fa = (p[P_KPA] * ea - p[P_KVA] * va + p[P_KIA] * ia
          + p[P_KPL] * el - p[P_KVL] * vl + p[P_KIL] * il)
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


def _forces(p, x, out_row):
    ea = p[P_THA] - x[0]
    el = p[P_THL] - x[2]
    out_row[0] = (p[P_KPA] * ea - p[P_KVA] * x[1] + p[P_KIA] * x[4]
                  + p[P_KPL] * el - p[P_KVL] * x[3] + p[P_KIL] * x[5])
    out_row[1] = (p[P_K1] * (x[2] - x[0]) + p[P_C1] * (x[3] - x[1])
                  + p[P_K2] * x[2] + p[P_C2] * x[3])


def integrate(params, x0, f_t, f_v, dt, n_steps, div_limit=1e6,
              prune_ref=0.0, prune_band=0.0, prune_after=-1.0):
    """Fixed-step classical RK4 over ``n_steps`` steps of size ``dt``.

    Returns ``(states, forces, n_done, status)``; rows past ``n_done`` are
    uninitialized when integration stops early.
    """
    p = [float(v) for v in params]
    f_t = [float(v) for v in f_t]
    f_v = [float(v) for v in f_v]
    n_steps = int(n_steps)
    states = np.empty((n_steps + 1, 6))
    forces = np.empty((n_steps + 1, 2))
    x = [float(v) for v in x0]
    massless = p[P_ML] == 0.0
    if massless:
        _project(p, x, _force_at(f_t, f_v, 0.0))
    states[0] = x
    row = [0.0, 0.0]
    _forces(p, x, row)
    forces[0] = row
    k1 = [0.0] * 6
    k2 = [0.0] * 6
    k3 = [0.0] * 6
    k4 = [0.0] * 6
    tmp = [0.0] * 6
    h = float(dt)
    half = 0.5 * h
    sixth = h / 6.0
    for n in range(n_steps):
        t = n * h
        f0 = _force_at(f_t, f_v, t)
        fm = _force_at(f_t, f_v, t + half)
        f1 = _force_at(f_t, f_v, t + h)
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
        status = OK
        for i in range(6):
            v = x[i]
            if not math.isfinite(v):
                status = NONFINITE
                break
            if abs(v) > div_limit:
                status = DIVERGED
        states[n + 1] = x
        _forces(p, x, row)
        forces[n + 1] = row
        if status != OK:
            return states, forces, n + 1, status
        if prune_after >= 0.0 and (n + 1) * h > prune_after and abs(x[2] - prune_ref) > prune_band:
            return states, forces, n + 1, PRUNED
    return states, forces, n_steps, OK
