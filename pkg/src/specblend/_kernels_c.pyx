# cython: language_level=3
"""Compiled banded attention kernel.

Same contract as ``_kernels_py.banded_attention``. The batch axis is split
across OpenMP threads; each row is reduced in a fixed order so results do not
depend on the thread count.
"""
import numpy as np

cimport cython
from cython.parallel cimport parallel, prange
from libc.math cimport exp, INFINITY
from libc.stdlib cimport free, malloc


def banded_attention(const double[:, :, ::1] q, const double[:, :, ::1] k,
                     const double[:, :, ::1] v, Py_ssize_t alpha, double scale,
                     bint want_maps=False, int num_threads=0):
    cdef Py_ssize_t B = q.shape[0], N = q.shape[1], D = q.shape[2]
    cdef Py_ssize_t DV = v.shape[2]
    cdef Py_ssize_t b, i, j, c, lo, hi
    cdef double m, s, acc, p
    cdef double *buf
    if alpha > N - 1:
        alpha = N - 1
    out_arr = np.zeros((B, N, DV))
    cdef double[:, :, ::1] out = out_arr
    maps_arr = np.zeros((B, N, N)) if want_maps else np.zeros((1, 1, 1))
    cdef double[:, :, ::1] maps = maps_arr
    if num_threads <= 0:
        num_threads = 1
    with nogil, parallel(num_threads=num_threads):
        buf = <double *> malloc(sizeof(double) * (2 * alpha + 1))
        for b in prange(B, schedule="static"):
            for i in range(N):
                lo = i - alpha if i > alpha else 0
                hi = i + alpha + 1 if i + alpha + 1 < N else N
                m = -INFINITY
                for j in range(lo, hi):
                    acc = 0.0
                    for c in range(D):
                        acc = acc + q[b, i, c] * k[b, j, c]
                    acc = acc * scale
                    buf[j - lo] = acc
                    if acc > m:
                        m = acc
                s = 0.0
                for j in range(lo, hi):
                    buf[j - lo] = exp(buf[j - lo] - m)
                    s = s + buf[j - lo]
                for j in range(lo, hi):
                    p = buf[j - lo] / s
                    if want_maps:
                        maps[b, i, j] = p
                    for c in range(DV):
                        out[b, i, c] = out[b, i, c] + p * v[b, j, c]
        free(buf)
    return out_arr, (maps_arr if want_maps else None)
