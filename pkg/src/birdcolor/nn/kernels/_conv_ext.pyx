# cython: boundscheck=False, wraparound=False, cdivision=True
# Compiled conv kernels: C-level im2col gather feeding BLAS dgemm.
#
# Row-major GEMM through a column-major BLAS: to get C = A @ B with
# row-major data, call dgemm on swapped operands so it computes
# C^T = B^T @ A^T in column-major, which lands C in row-major memory.

import numpy as np

cimport numpy as cnp
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()

BACKEND = "ext"


cdef void _gemm_rm(int m, int n, int k,
                   double* a, double* b, double* c,
                   double beta) noexcept nogil:
    # c[m,n] = a[m,k] @ b[k,n] + beta * c, all row-major contiguous
    cdef char trans = b'N'
    cdef double alpha = 1.0
    dgemm(&trans, &trans, &n, &m, &k, &alpha, b, &n, a, &k, &beta, c, &n)


cdef void _gemm_rm_abt(int m, int n, int k,
                       double* a, double* b, double* c,
                       double beta) noexcept nogil:
    # c[m,n] = a[m,k] @ b[n,k]^T + beta * c, row-major
    cdef char tn = b'N'
    cdef char tt = b'T'
    cdef double alpha = 1.0
    dgemm(&tt, &tn, &n, &m, &k, &alpha, b, &k, a, &k, &beta, c, &n)


cdef void _gemm_rm_atb(int m, int n, int k,
                       double* a, double* b, double* c,
                       double beta) noexcept nogil:
    # c[m,n] = a[k,m]^T @ b[k,n] + beta * c, row-major
    cdef char tn = b'N'
    cdef char tt = b'T'
    cdef double alpha = 1.0
    dgemm(&tn, &tt, &n, &m, &k, &alpha, b, &n, a, &m, &beta, c, &n)


cdef void _im2col(const double[:, :, ::1] xp, double[:, ::1] cols,
                  int kh, int kw, int ho, int wo) noexcept nogil:
    cdef int c, i, j, r, s, row
    cdef int nc = xp.shape[0]
    for c in range(nc):
        for i in range(kh):
            for j in range(kw):
                row = (c * kh + i) * kw + j
                for r in range(ho):
                    for s in range(wo):
                        cols[row, r * wo + s] = xp[c, r + i, s + j]


cdef void _col2im(const double[:, ::1] cols, double[:, :, ::1] xp,
                  int kh, int kw, int ho, int wo) noexcept nogil:
    cdef int c, i, j, r, s, row
    cdef int nc = xp.shape[0]
    for c in range(nc):
        for i in range(kh):
            for j in range(kw):
                row = (c * kh + i) * kw + j
                for r in range(ho):
                    for s in range(wo):
                        xp[c, r + i, s + j] += cols[row, r * wo + s]


def _pad(cnp.ndarray x, int pad):
    if pad == 0:
        return np.ascontiguousarray(x, dtype=np.float64)
    return np.pad(np.asarray(x, dtype=np.float64), ((0, 0), (0, 0), (pad, pad), (pad, pad)))


def conv2d_forward(x, w, b, int pad=1):
    cdef cnp.ndarray[double, ndim=4] xp = _pad(x, pad)
    cdef cnp.ndarray[double, ndim=4] wc = np.ascontiguousarray(w, dtype=np.float64)
    cdef int bs = xp.shape[0], nc = xp.shape[1]
    cdef int kh = wc.shape[2], kw = wc.shape[3], nf = wc.shape[0]
    cdef int ho = xp.shape[2] - kh + 1, wo = xp.shape[3] - kw + 1
    cdef int ck = nc * kh * kw, hw = ho * wo

    y = np.empty((bs, nf, ho, wo), dtype=np.float64)
    cdef double[:, :, :, ::1] yv = y
    cdef double[:, :, :, ::1] xv = xp
    cdef double[:, ::1] cols = np.empty((ck, hw), dtype=np.float64)
    cdef double* wptr = <double*> wc.data
    cdef int i
    with nogil:
        for i in range(bs):
            _im2col(xv[i], cols, kh, kw, ho, wo)
            _gemm_rm(nf, hw, ck, wptr, &cols[0, 0], &yv[i, 0, 0, 0], 0.0)
    return y + np.asarray(b, dtype=np.float64)[None, :, None, None]


def conv2d_backward_input(gy, w, int pad=1):
    cdef cnp.ndarray[double, ndim=4] gc = np.ascontiguousarray(gy, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=4] wc = np.ascontiguousarray(w, dtype=np.float64)
    cdef int bs = gc.shape[0], nf = wc.shape[0], nc = wc.shape[1]
    cdef int kh = wc.shape[2], kw = wc.shape[3]
    cdef int ho = gc.shape[2], wo = gc.shape[3]
    cdef int h = ho + kh - 1 - 2 * pad, wdt = wo + kw - 1 - 2 * pad
    cdef int ck = nc * kh * kw, hw = ho * wo

    gxp = np.zeros((bs, nc, h + 2 * pad, wdt + 2 * pad), dtype=np.float64)
    cdef double[:, :, :, ::1] gxv = gxp
    cdef double[:, ::1] cols = np.empty((ck, hw), dtype=np.float64)
    cdef double* wptr = <double*> wc.data
    cdef double[:, :, :, ::1] gv = gc
    cdef int i
    with nogil:
        for i in range(bs):
            # cols = W^T [ck,nf] @ gy_i [nf,hw]
            _gemm_rm_atb(ck, hw, nf, wptr, &gv[i, 0, 0, 0], &cols[0, 0], 0.0)
            _col2im(cols, gxv[i], kh, kw, ho, wo)
    if pad:
        return np.ascontiguousarray(gxp[:, :, pad:-pad, pad:-pad])
    return gxp


def conv2d_backward_weights(x, gy, int pad=1, int kh=3, int kw=3):
    cdef cnp.ndarray[double, ndim=4] xp = _pad(x, pad)
    cdef cnp.ndarray[double, ndim=4] gc = np.ascontiguousarray(gy, dtype=np.float64)
    cdef int bs = xp.shape[0], nc = xp.shape[1], nf = gc.shape[1]
    cdef int ho = gc.shape[2], wo = gc.shape[3]
    cdef int ck = nc * kh * kw, hw = ho * wo

    gw = np.zeros((nf, ck), dtype=np.float64)
    cdef double[:, ::1] gwv = gw
    cdef double[:, :, :, ::1] xv = xp
    cdef double[:, :, :, ::1] gv = gc
    cdef double[:, ::1] cols = np.empty((ck, hw), dtype=np.float64)
    cdef int i
    with nogil:
        for i in range(bs):
            _im2col(xv[i], cols, kh, kw, ho, wo)
            # gw += gy_i [nf,hw] @ cols^T [hw,ck]
            _gemm_rm_abt(nf, ck, hw, &gv[i, 0, 0, 0], &cols[0, 0], &gwv[0, 0], 1.0)
    gb = np.asarray(gy).sum(axis=(0, 2, 3))
    return gw.reshape(nf, nc, kh, kw), gb
