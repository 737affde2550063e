# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot kernels (see _py.py for semantics)."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def frame_signal(const double[::1] x, const double[::1] window, Py_ssize_t hop, Py_ssize_t fft_size):
    cdef Py_ssize_t win = window.shape[0]
    cdef Py_ssize_t n_frames = 1 + (x.shape[0] - win) // hop
    out = np.zeros((n_frames, fft_size), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t t, i, start
    for t in range(n_frames):
        start = t * hop
        for i in range(win):
            o[t, i] = x[start + i] * window[i]
    return out


def overlap_add(const double[:, ::1] frames, const double[::1] window, Py_ssize_t hop, Py_ssize_t length):
    cdef Py_ssize_t n_frames = frames.shape[0]
    cdef Py_ssize_t win = window.shape[0]
    num = np.zeros(length, dtype=np.float64)
    wss = np.zeros(length, dtype=np.float64)
    cdef double[::1] nv = num
    cdef double[::1] wv = wss
    cdef Py_ssize_t t, i, start
    cdef double w
    for t in range(n_frames):
        start = t * hop
        for i in range(win):
            w = window[i]
            nv[start + i] += frames[t, i] * w
            wv[start + i] += w * w
    return num, wss


def resample_apply(const double[::1] x_padded, const double[:, ::1] hpoly,
                   Py_ssize_t up, Py_ssize_t down, Py_ssize_t n_out, long long base):
    cdef Py_ssize_t tpp = hpoly.shape[1]
    out = np.empty(n_out, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t j, q, row, phase
    cdef long long t
    cdef double acc
    for j in range(n_out):
        t = base + (<long long> j) * down
        row = <Py_ssize_t> (t // up)
        phase = <Py_ssize_t> (t % up)
        acc = 0.0
        for q in range(tpp):
            acc += hpoly[phase, q] * x_padded[row - q]
        o[j] = acc
    return out
