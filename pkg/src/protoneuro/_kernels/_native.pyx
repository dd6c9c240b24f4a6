# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same contracts as the ``pure`` module."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, tanh

cnp.import_array()


def local_maxima(values):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0]
    out = []
    if n < 3:
        return np.empty(0, dtype=np.int64)
    cdef Py_ssize_t i = 1, j
    while i < n - 1:
        if v[i] > v[i - 1]:
            j = i
            while j + 1 < n and v[j + 1] == v[i]:
                j += 1
            if j + 1 < n and v[j + 1] < v[i]:
                out.append(i)
            i = j + 1
        else:
            i += 1
    return np.asarray(out, dtype=np.int64)


def prune_min_distance(times, amplitudes, double min_distance):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] t = np.ascontiguousarray(times, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a = np.ascontiguousarray(amplitudes, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] order = np.lexsort((t, -a)).astype(np.int64)
    cdef Py_ssize_t m = t.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] keep = np.zeros(m, dtype=np.uint8)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] kept = np.empty(m, dtype=np.float64)
    cdef Py_ssize_t nkept = 0
    cdef Py_ssize_t r, idx, lo, hi, mid, pos, q
    cdef double ti
    for r in range(m):
        idx = order[r]
        ti = t[idx]
        # binary search for the insertion point in the kept times
        lo = 0
        hi = nkept
        while lo < hi:
            mid = (lo + hi) // 2
            if kept[mid] < ti:
                lo = mid + 1
            else:
                hi = mid
        pos = lo
        if pos > 0 and ti - kept[pos - 1] < min_distance:
            continue
        if pos < nkept and kept[pos] - ti < min_distance:
            continue
        for q in range(nkept, pos, -1):
            kept[q] = kept[q - 1]
        kept[pos] = ti
        nkept += 1
        keep[idx] = 1
    return np.flatnonzero(keep).astype(np.int64)


def lif_run(v0, drive, weights, double tau_m, double v_rest, double v_th,
            double v_reset, double refractory, double dt, double tau_syn,
            bint record_potentials=True):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] d = np.ascontiguousarray(drive, dtype=np.float64)
    cdef Py_ssize_t N = d.shape[0]
    cdef Py_ssize_t steps = d.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v = np.array(v0, dtype=np.float64, copy=True)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] refr = np.zeros(N, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] syn = np.zeros(N, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] spikes_prev = np.zeros(N, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] w
    cdef bint has_w = weights is not None
    if has_w:
        w = np.ascontiguousarray(weights, dtype=np.float64)

    cdef cnp.ndarray[cnp.float64_t, ndim=2] pot
    if record_potentials:
        pot = np.empty((N, steps), dtype=np.float64)
    else:
        pot = np.empty((0, 0), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] filt = np.empty((N, steps), dtype=np.float64)

    cdef cnp.ndarray[cnp.uint8_t, ndim=1] active = np.zeros(N, dtype=np.uint8)
    cdef double leak = dt / tau_m
    cdef double syn_decay = exp(-dt / tau_syn)
    cdef double syn_jump = 1.0 / tau_syn
    cdef double dv, rec
    cdef Py_ssize_t k, j, i
    spike_steps = []
    spike_neurons = []

    for k in range(steps):
        for j in range(N):
            active[j] = refr[j] <= 0.0
            if active[j]:
                dv = leak * (v_rest - v[j]) + dt * d[j, k]
                if has_w:
                    rec = 0.0
                    for i in range(N):
                        if spikes_prev[i] != 0.0:
                            rec += w[j, i]
                    dv += rec
                v[j] = v[j] + dv
            else:
                v[j] = v_reset
            refr[j] = refr[j] - dt
            if refr[j] < 0.0:
                refr[j] = 0.0
        for j in range(N):
            if active[j] and v[j] > v_th:
                spikes_prev[j] = 1.0
                v[j] = v_reset
                refr[j] = refractory
                spike_steps.append(k)
                spike_neurons.append(j)
            else:
                spikes_prev[j] = 0.0
            syn[j] = syn[j] * syn_decay + spikes_prev[j] * syn_jump
            if record_potentials:
                pot[j, k] = v[j]
            filt[j, k] = syn[j]

    return ((pot if record_potentials else None), filt,
            np.asarray(spike_steps, dtype=np.int64),
            np.asarray(spike_neurons, dtype=np.int64))


def rate_run(x0, drive, weights, double tau, double dt):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] d = np.ascontiguousarray(drive, dtype=np.float64)
    cdef Py_ssize_t N = d.shape[0]
    cdef Py_ssize_t steps = d.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.array(x0, dtype=np.float64, copy=True)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] r = np.tanh(x)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xn = np.empty(N, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] w
    cdef bint has_w = weights is not None
    if has_w:
        w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] state = np.empty((N, steps), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] act = np.empty((N, steps), dtype=np.float64)
    cdef double a = dt / tau
    cdef double rec
    cdef Py_ssize_t k, j, i
    for k in range(steps):
        for j in range(N):
            if has_w:
                rec = 0.0
                for i in range(N):
                    rec += w[j, i] * r[i]
                xn[j] = x[j] + a * (-x[j] + rec + d[j, k])
            else:
                xn[j] = x[j] + a * (-x[j] + d[j, k])
        for j in range(N):
            x[j] = xn[j]
            r[j] = tanh(x[j])
            state[j, k] = x[j]
            act[j, k] = r[j]
    return state, act
