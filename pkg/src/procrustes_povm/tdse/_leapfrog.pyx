# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled staggered leapfrog half-updates; same contract as ``_leapfrog_py``."""
import numpy as np

cdef inline void _kernel(double[:, :, ::1] tgt, const double[:, :, ::1] src,
                         const double[:, :, ::1] vd, const double[:, ::1] wr,
                         const double[:, ::1] wi, bint has_wr, bint has_wi,
                         double cx, double cy, double ah, double a) noexcept nogil:
    cdef Py_ssize_t nx = src.shape[0], ny = src.shape[1]
    cdef Py_ssize_t k, l
    cdef double h0, h1, s0, s1, r0, r1, b, den, w
    for k in range(1, nx - 1):
        for l in range(1, ny - 1):
            s0 = src[k, l, 0]
            s1 = src[k, l, 1]
            h0 = (cx * (2.0 * s0 - src[k + 1, l, 0] - src[k - 1, l, 0])
                  + cy * (2.0 * s0 - src[k, l + 1, 0] - src[k, l - 1, 0])
                  + vd[k, l, 0] * s0)
            h1 = (cx * (2.0 * s1 - src[k + 1, l, 1] - src[k - 1, l, 1])
                  + cy * (2.0 * s1 - src[k, l + 1, 1] - src[k, l - 1, 1])
                  + vd[k, l, 1] * s1)
            if has_wr:
                w = wr[k, l]
                h0 = h0 + w * s1
                h1 = h1 + w * s0
            if has_wi:
                b = 0.5 * a * wi[k, l]
                r0 = tgt[k, l, 0] + ah * h0 + b * tgt[k, l, 1]
                r1 = tgt[k, l, 1] + ah * h1 - b * tgt[k, l, 0]
                den = 1.0 + b * b
                tgt[k, l, 0] = (r0 + b * r1) / den
                tgt[k, l, 1] = (r1 - b * r0) / den
            else:
                tgt[k, l, 0] = tgt[k, l, 0] + ah * h0
                tgt[k, l, 1] = tgt[k, l, 1] + ah * h1


_DUMMY = np.zeros((1, 1))


def _prep(wr, wi):
    return (_DUMMY if wr is None else wr), (_DUMMY if wi is None else wi)


def update_u(double[:, :, ::1] u, const double[:, :, ::1] v, const double[:, :, ::1] vd,
             wr, wi, double cx, double cy, double a):
    cdef bint has_wr = wr is not None
    cdef bint has_wi = wi is not None
    wr_, wi_ = _prep(wr, wi)
    cdef const double[:, ::1] wrv = wr_
    cdef const double[:, ::1] wiv = wi_
    with nogil:
        _kernel(u, v, vd, wrv, wiv, has_wr, has_wi, cx, cy, a, a)


def update_v(const double[:, :, ::1] u, double[:, :, ::1] v, const double[:, :, ::1] vd,
             wr, wi, double cx, double cy, double a):
    cdef bint has_wr = wr is not None
    cdef bint has_wi = wi is not None
    wr_, wi_ = _prep(wr, wi)
    cdef const double[:, ::1] wrv = wr_
    cdef const double[:, ::1] wiv = wi_
    with nogil:
        _kernel(v, u, vd, wrv, wiv, has_wr, has_wi, cx, cy, -a, a)
