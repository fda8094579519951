# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled heat time-stepping kernel.

Mirrors cascadecomp._heat_kernel_py.heat_march step for step; the Python
driver selects whichever of the two imported successfully.
"""

import numpy as np

BACKEND = "compiled"


cdef inline void _rhs(double[:, ::1] a2, double[::1] x, double[::1] b2,
                      double u, double[::1] out, Py_ssize_t m) noexcept:
    cdef Py_ssize_t i, k
    cdef double acc
    for i in range(m):
        acc = b2[i] * u
        for k in range(m):
            acc += a2[i, k] * x[k]
        out[i] = acc


def heat_march(double[::1] w, double[::1] x2, double[::1] gw, double[::1] cpsi,
               double[:, ::1] a2, double[::1] b2, double[::1] c2,
               double mu, double dx, double dt, Py_ssize_t nsteps):
    """Advance ``nsteps`` steps in place; see the fallback for semantics."""
    cdef Py_ssize_t j = w.shape[0] - 1
    cdef Py_ssize_t m = x2.shape[0]
    cdef double r = dt / (dx * dx)
    cdef double[::1] wn = np.empty(j + 1)
    cdef double[::1] k1 = np.empty(m)
    cdef double[::1] k2 = np.empty(m)
    cdef double[::1] k3 = np.empty(m)
    cdef double[::1] k4 = np.empty(m)
    cdef double[::1] tmp = np.empty(m)
    cdef Py_ssize_t i, jj, a
    cdef double u, ghost, acc

    for i in range(nsteps):
        u = 0.0
        for a in range(m):
            u += cpsi[a] * x2[a]
        for jj in range(j + 1):
            u += gw[jj] * w[jj]

        acc = 0.0
        for a in range(m):
            acc += c2[a] * x2[a]
        ghost = w[j - 1] + 2.0 * dx * acc

        wn[0] = 0.0
        for jj in range(1, j):
            wn[jj] = w[jj] + r * (w[jj + 1] - 2.0 * w[jj] + w[jj - 1]) + dt * mu * w[jj]
        wn[j] = w[j] + r * (ghost - 2.0 * w[j] + w[j - 1]) + dt * mu * w[j]
        for jj in range(j + 1):
            w[jj] = wn[jj]

        _rhs(a2, x2, b2, u, k1, m)
        for a in range(m):
            tmp[a] = x2[a] + 0.5 * dt * k1[a]
        _rhs(a2, tmp, b2, u, k2, m)
        for a in range(m):
            tmp[a] = x2[a] + 0.5 * dt * k2[a]
        _rhs(a2, tmp, b2, u, k3, m)
        for a in range(m):
            tmp[a] = x2[a] + dt * k3[a]
        _rhs(a2, tmp, b2, u, k4, m)
        for a in range(m):
            x2[a] = x2[a] + dt / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a])
