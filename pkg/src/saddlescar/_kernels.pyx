# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Mirrors ``_kernels_py`` function for function."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def tangent_flow(double[:, :, ::1] hessians, double[::1] kick_w, double[::1] drift_w,
                 double[::1] inv_mass, double dt):
    """Linearized kick/drift flow started from the identity; returns the 2k x 2k map."""
    cdef Py_ssize_t nk = hessians.shape[0]
    cdef Py_ssize_t k = hessians.shape[1]
    cdef Py_ssize_t n2 = 2 * k
    cdef Py_ssize_t s, i, j, c
    cdef double a, acc
    out = np.zeros((n2, n2), dtype=np.float64)
    cdef double[:, ::1] phi = out
    for i in range(n2):
        phi[i, i] = 1.0
    # rows 0..k-1 are dq, rows k..2k-1 are dp; columns index the initial condition
    for s in range(nk):
        a = kick_w[s] * dt
        if a != 0.0:
            for c in range(n2):
                for i in range(k):
                    acc = 0.0
                    for j in range(k):
                        acc += hessians[s, i, j] * phi[j, c]
                    phi[k + i, c] -= a * acc
        a = drift_w[s] * dt
        if a != 0.0:
            for c in range(n2):
                for i in range(k):
                    phi[i, c] += a * inv_mass[i] * phi[k + i, c]
    return out


def kdk_linear(double[:, ::1] hessian, double[::1] q0, double[::1] p0, double[::1] kick_w,
               double[::1] drift_w, double[::1] inv_mass, double dt, Py_ssize_t n_steps):
    """Kick/drift integration of a linear force ``-H q`` (fixed Hessian); returns (q, p) per step."""
    cdef Py_ssize_t d = q0.shape[0]
    cdef Py_ssize_t m = kick_w.shape[0]
    cdef Py_ssize_t s, j, i, l
    cdef double a, acc
    qs = np.empty((n_steps + 1, d), dtype=np.float64)
    ps = np.empty((n_steps + 1, d), dtype=np.float64)
    cdef double[:, ::1] Q = qs
    cdef double[:, ::1] P = ps
    q_arr = np.array(q0, dtype=np.float64)
    p_arr = np.array(p0, dtype=np.float64)
    cdef double[::1] q = q_arr
    cdef double[::1] p = p_arr
    for i in range(d):
        Q[0, i] = q[i]
        P[0, i] = p[i]
    for s in range(n_steps):
        for j in range(m):
            a = kick_w[j] * dt
            if a != 0.0:
                for i in range(d):
                    acc = 0.0
                    for l in range(d):
                        acc += hessian[i, l] * q[l]
                    p[i] -= a * acc
            a = drift_w[j] * dt
            if a != 0.0:
                for i in range(d):
                    q[i] += a * inv_mass[i] * p[i]
        for i in range(d):
            Q[s + 1, i] = q[i]
            P[s + 1, i] = p[i]
    return qs, ps
