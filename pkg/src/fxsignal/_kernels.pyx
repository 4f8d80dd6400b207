# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled LSTM time-loop kernels.

Same contract as ``_kernels_py``: the driver supplies pre-activations and
consumes activated-gate caches; these loops fuse the per-timestep gate math
and use BLAS dgemm for the recurrent products.  Gate layout along the last
axis is [input, forget, cell-candidate, output] in blocks of H.

The element-wise passes are written as flat, branch-free loops over
contiguous rows so the C compiler can vectorise exp/tanh (libmvec).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, tanh
from scipy.linalg.cython_blas cimport dgemm


def lstm_forward_loop(double[:, :, ::1] pre, double[:, ::1] wh,
                      double[:, :, ::1] h_out, double[:, :, ::1] c_out):
    """In-place recurrent forward pass; see _kernels_py.lstm_forward_loop."""
    cdef int T = pre.shape[0]
    cdef int B = pre.shape[1]
    cdef int H4 = pre.shape[2]
    cdef int H = H4 // 4
    cdef int t, b, j, q
    cdef double alpha = 1.0, beta = 1.0
    cdef double *row
    cdef double *crow
    cdef double *hrow
    cdef double *cprev
    cdef double *h_prev
    cdef cnp.ndarray[cnp.float64_t, ndim=2] zeros = np.zeros((B, H))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] scratch = np.empty(H)
    cdef double[:, ::1] zview = zeros
    cdef double[::1] tmp = scratch

    with nogil:
        for t in range(T):
            if t == 0:
                h_prev = &zview[0, 0]
            else:
                h_prev = &h_out[t - 1, 0, 0]
            # pre[t] += h_prev @ wh  (row-major via column-major transpose trick)
            dgemm("N", "N", &H4, &B, &H, &alpha, &wh[0, 0], &H4,
                  h_prev, &H, &beta, &pre[t, 0, 0], &H4)
            for b in range(B):
                row = &pre[t, b, 0]
                crow = &c_out[t, b, 0]
                hrow = &h_out[t, b, 0]
                if t == 0:
                    cprev = &zview[0, 0]
                else:
                    cprev = &c_out[t - 1, b, 0]
                for j in range(H):
                    tmp[j] = row[2 * H + j]
                for q in range(H4):
                    row[q] = 1.0 / (1.0 + exp(-row[q]))
                for j in range(H):
                    row[2 * H + j] = tanh(tmp[j])
                for j in range(H):
                    crow[j] = row[H + j] * cprev[j] + row[j] * row[2 * H + j]
                for j in range(H):
                    tmp[j] = tanh(crow[j])
                for j in range(H):
                    hrow[j] = row[3 * H + j] * tmp[j]


def lstm_backward_loop(double[:, :, ::1] gates, double[:, :, ::1] c_all,
                       double[:, ::1] wh_t, double[:, :, ::1] dh_up,
                       double[:, :, ::1] da_out):
    """Recurrent backward pass; see _kernels_py.lstm_backward_loop."""
    cdef int T = gates.shape[0]
    cdef int B = gates.shape[1]
    cdef int H4 = gates.shape[2]
    cdef int H = H4 // 4
    cdef int t, b, j
    cdef double dhv, dcv
    cdef double alpha = 1.0, beta = 0.0
    cdef double *row
    cdef double *da
    cdef double *cprev
    cdef cnp.ndarray[cnp.float64_t, ndim=2] dh_buf = np.zeros((B, H))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] dc_buf = np.zeros((B, H))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] zeros = np.zeros((1, H))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] scratch = np.empty(H)
    cdef double[:, ::1] dh = dh_buf
    cdef double[:, ::1] dc = dc_buf
    cdef double[:, ::1] zview = zeros
    cdef double[::1] tmp = scratch

    with nogil:
        for t in range(T - 1, -1, -1):
            for b in range(B):
                row = &gates[t, b, 0]
                da = &da_out[t, b, 0]
                if t == 0:
                    cprev = &zview[0, 0]
                else:
                    cprev = &c_all[t - 1, b, 0]
                for j in range(H):
                    tmp[j] = tanh(c_all[t, b, j])
                for j in range(H):
                    dhv = dh[b, j] + dh_up[t, b, j]
                    dcv = dc[b, j] + dhv * row[3 * H + j] * (1.0 - tmp[j] * tmp[j])
                    da[j] = dcv * row[2 * H + j] * row[j] * (1.0 - row[j])
                    da[H + j] = dcv * cprev[j] * row[H + j] * (1.0 - row[H + j])
                    da[2 * H + j] = dcv * row[j] * (1.0 - row[2 * H + j] * row[2 * H + j])
                    da[3 * H + j] = dhv * tmp[j] * row[3 * H + j] * (1.0 - row[3 * H + j])
                    dc[b, j] = dcv * row[H + j]
            # dh = da_out[t] @ wh_t  (row-major product, column-major call)
            dgemm("N", "N", &H, &B, &H4, &alpha, &wh_t[0, 0], &H,
                  &da_out[t, 0, 0], &H4, &beta, &dh[0, 0], &H)
