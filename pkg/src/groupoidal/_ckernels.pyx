# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_pykernels``."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def convolve(const double complex[::1] f, const double complex[::1] g,
             const cnp.intp_t[::1] ii, const cnp.intp_t[::1] jj,
             const cnp.intp_t[::1] kk, Py_ssize_t n):
    out = np.zeros(n, dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef Py_ssize_t p, m = ii.shape[0]
    cdef double complex x
    for p in range(m):
        x = f[ii[p]]
        if x != 0:
            o[kk[p]] += x * g[jj[p]]
    return out


def gram(const double complex[::1] phi, const cnp.intp_t[::1] inv,
         const cnp.intp_t[:, ::1] comp):
    cdef Py_ssize_t n = comp.shape[0], i, j
    cdef cnp.intp_t k
    out = np.zeros((n, n), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    for i in range(n):
        for j in range(n):
            k = comp[inv[i], j]
            if k >= 0:
                o[i, j] = phi[k]
    return out


def decoherence_sum(const double complex[::1] phi, const cnp.intp_t[::1] inv,
                    const cnp.intp_t[:, ::1] comp,
                    const cnp.intp_t[::1] a_pos, const cnp.intp_t[::1] b_pos):
    cdef Py_ssize_t p, q
    cdef cnp.intp_t k, ia
    cdef double complex total = 0
    for p in range(a_pos.shape[0]):
        ia = inv[a_pos[p]]
        for q in range(b_pos.shape[0]):
            k = comp[ia, b_pos[q]]
            if k >= 0:
                total += phi[k]
    return complex(total)


def convolve_many(const double complex[:, ::1] f, const double complex[:, ::1] g,
                  const cnp.intp_t[::1] ii, const cnp.intp_t[::1] jj,
                  const cnp.intp_t[::1] kk, Py_ssize_t n):
    cdef Py_ssize_t r, p, rows = f.shape[0], m = ii.shape[0]
    out = np.zeros((rows, n), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    with nogil:
        for r in range(rows):
            for p in range(m):
                o[r, kk[p]] += f[r, ii[p]] * g[r, jj[p]]
    return out
