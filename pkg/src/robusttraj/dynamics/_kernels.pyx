# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled rigid-body kernels (drop-in replacement for ``_kernels_py``).

Fused-typed over double / double complex so that complex-step
differentiation also runs through the compiled code path.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin

cnp.import_array()

ctypedef double complex cplx

ctypedef fused real_t:
    double
    cplx

cdef extern from "complex.h" nogil:
    double complex ccos "ccos" (double complex)
    double complex csin "csin" (double complex)


cdef inline void _cross(real_t* a, real_t* b, real_t* out) noexcept nogil:
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]


cdef inline void _mrp_rotation(real_t* psi, real_t* R) noexcept nogil:
    cdef real_t s2 = psi[0] * psi[0] + psi[1] * psi[1] + psi[2] * psi[2]
    cdef real_t den = (1.0 + s2) * (1.0 + s2)
    cdef real_t a = 4.0 * (1.0 - s2) / den
    cdef real_t b = 8.0 / den
    # R = I + a*skew(psi) + b*skew(psi)^2
    cdef real_t xx = psi[0] * psi[0], yy = psi[1] * psi[1], zz = psi[2] * psi[2]
    cdef real_t xy = psi[0] * psi[1], xz = psi[0] * psi[2], yz = psi[1] * psi[2]
    R[0] = 1.0 + b * (-yy - zz); R[1] = -a * psi[2] + b * xy; R[2] = a * psi[1] + b * xz
    R[3] = a * psi[2] + b * xy;  R[4] = 1.0 + b * (-xx - zz); R[5] = -a * psi[0] + b * yz
    R[6] = -a * psi[1] + b * xz; R[7] = a * psi[0] + b * yz;  R[8] = 1.0 + b * (-xx - yy)


cdef void _fk_impl(const long long[::1] parent,
                   const double[:, :, ::1] off_R, const double[:, ::1] off_p,
                   const double[:, ::1] axis, bint floating,
                   real_t[::1] q,
                   real_t[:, :, ::1] R_w, real_t[:, ::1] p_w,
                   real_t[:, ::1] s_w, real_t[:, ::1] anch_w) noexcept nogil:
    cdef Py_ssize_t n_b = parent.shape[0]
    cdef Py_ssize_t i, r, c, k, par
    cdef Py_ssize_t off = 6 if floating else 0
    cdef real_t Rj[9]
    cdef real_t Ra[9]
    cdef real_t psi[3]
    cdef real_t th, cth, sth, v
    cdef double ax0, ax1, ax2

    if floating:
        for r in range(3):
            p_w[0, r] = q[r]
            psi[r] = q[3 + r]
        _mrp_rotation(psi, Rj)
        for r in range(3):
            for c in range(3):
                R_w[0, r, c] = Rj[3 * r + c]
    else:
        for r in range(3):
            for c in range(3):
                R_w[0, r, c] = 1.0 if r == c else 0.0
            p_w[0, r] = 0.0

    for i in range(1, n_b):
        par = parent[i]
        # joint frame: R_j = R_w[par] @ off_R[i]; p_j = p_w[par] + R_w[par] @ off_p[i]
        for r in range(3):
            for c in range(3):
                v = 0.0
                for k in range(3):
                    v = v + R_w[par, r, k] * off_R[i, k, c]
                Rj[3 * r + c] = v
        for r in range(3):
            v = p_w[par, r]
            for k in range(3):
                v = v + R_w[par, r, k] * off_p[i, k]
            p_w[i, r] = v
            anch_w[i, r] = v
        ax0 = axis[i, 0]; ax1 = axis[i, 1]; ax2 = axis[i, 2]
        th = q[off + i - 1]
        if real_t is double:
            cth = cos(th); sth = sin(th)
        else:
            cth = ccos(th); sth = csin(th)
        # Rodrigues rotation about the (unit) joint axis
        Ra[0] = cth + (1.0 - cth) * ax0 * ax0
        Ra[1] = (1.0 - cth) * ax0 * ax1 - sth * ax2
        Ra[2] = (1.0 - cth) * ax0 * ax2 + sth * ax1
        Ra[3] = (1.0 - cth) * ax1 * ax0 + sth * ax2
        Ra[4] = cth + (1.0 - cth) * ax1 * ax1
        Ra[5] = (1.0 - cth) * ax1 * ax2 - sth * ax0
        Ra[6] = (1.0 - cth) * ax2 * ax0 - sth * ax1
        Ra[7] = (1.0 - cth) * ax2 * ax1 + sth * ax0
        Ra[8] = cth + (1.0 - cth) * ax2 * ax2
        for r in range(3):
            for c in range(3):
                v = 0.0
                for k in range(3):
                    v = v + Rj[3 * r + k] * Ra[3 * k + c]
                R_w[i, r, c] = v
            v = 0.0
            for k in range(3):
                v = v + Rj[3 * r + k] * axis[i, k]
            s_w[i, r] = v


def fk_pass(parent, off_R, off_p, axis, floating, q):
    q = np.ascontiguousarray(q)
    n_b = parent.shape[0]
    cdef bint fl = bool(floating)
    if q.dtype == np.complex128:
        R_w = np.zeros((n_b, 3, 3), dtype=np.complex128)
        p_w = np.zeros((n_b, 3), dtype=np.complex128)
        s_w = np.zeros((n_b, 3), dtype=np.complex128)
        anch_w = np.zeros((n_b, 3), dtype=np.complex128)
        _fk_impl[cplx](parent, off_R, off_p, axis, fl, q, R_w, p_w, s_w, anch_w)
    else:
        q = q.astype(np.float64, copy=False)
        R_w = np.zeros((n_b, 3, 3))
        p_w = np.zeros((n_b, 3))
        s_w = np.zeros((n_b, 3))
        anch_w = np.zeros((n_b, 3))
        _fk_impl[double](parent, off_R, off_p, axis, fl, q, R_w, p_w, s_w, anch_w)
    return R_w, p_w, s_w, anch_w


def point_position(R_w, p_w, body, offset):
    return p_w[body] + R_w[body] @ offset


cdef void _point_jac_impl(const long long[::1] parent, bint floating,
                          real_t[:, :, ::1] R_w, real_t[:, ::1] p_w,
                          real_t[:, ::1] s_w, real_t[:, ::1] anch_w,
                          Py_ssize_t body, const double[::1] offset,
                          real_t[:, ::1] J) noexcept nogil:
    cdef Py_ssize_t base = 6 if floating else 0
    cdef Py_ssize_t i, r, k
    cdef real_t x[3]
    cdef real_t d[3]
    cdef real_t s[3]
    cdef real_t cr[3]
    for r in range(3):
        x[r] = p_w[body, r]
        for k in range(3):
            x[r] = x[r] + R_w[body, r, k] * offset[k]
    if floating:
        for r in range(3):
            J[r, r] = 1.0
        # -skew(x - p0) @ R0, column by column
        for r in range(3):
            d[r] = x[r] - p_w[0, r]
        for k in range(3):
            s[0] = R_w[0, 0, k]; s[1] = R_w[0, 1, k]; s[2] = R_w[0, 2, k]
            _cross(d, s, cr)
            for r in range(3):
                J[r, 3 + k] = -cr[r]
    i = body
    while i > 0:
        for r in range(3):
            s[r] = s_w[i, r]
            d[r] = x[r] - anch_w[i, r]
        _cross(s, d, cr)
        for r in range(3):
            J[r, base + i - 1] = cr[r]
        i = parent[i]


def point_jacobian(parent, floating, R_w, p_w, s_w, anch_w, body, offset):
    cdef bint fl = bool(floating)
    n_v = (6 if fl else 0) + parent.shape[0] - 1
    offset = np.ascontiguousarray(offset, dtype=np.float64)
    cdef Py_ssize_t b = int(body)
    if R_w.dtype == np.complex128:
        J = np.zeros((3, n_v), dtype=np.complex128)
        _point_jac_impl[cplx](parent, fl, R_w, p_w, s_w, anch_w, b, offset, J)
    else:
        J = np.zeros((3, n_v))
        _point_jac_impl[double](parent, fl, R_w, p_w, s_w, anch_w, b, offset, J)
    return J


def rotation_jacobian(parent, floating, R_w, s_w, body):
    n_b = parent.shape[0]
    n_v = (6 if floating else 0) + n_b - 1
    J = np.zeros((3, n_v), dtype=R_w.dtype)
    base = 0
    if floating:
        J[:, 3:6] = np.asarray(R_w)[0]
        base = 6
    i = int(body)
    while i > 0:
        J[:, base + i - 1] = np.asarray(s_w)[i]
        i = parent[i]
    return J


cdef void _crba_impl(const long long[::1] parent, const double[::1] mass,
                     const double[:, ::1] com, const double[:, :, ::1] inertia,
                     bint floating,
                     real_t[:, :, ::1] R_w, real_t[:, ::1] p_w,
                     real_t[:, ::1] s_w, real_t[:, ::1] anch_w,
                     real_t[:, ::1] cc, real_t[:, :, ::1] cI, double[::1] cm,
                     real_t[:, ::1] M) noexcept nogil:
    cdef Py_ssize_t n_b = parent.shape[0]
    cdef Py_ssize_t base = 6 if floating else 0
    cdef Py_ssize_t i, r, c, k, kk, par, col
    cdef real_t v, mt
    cdef double m1, m2
    cdef real_t d1[3]
    cdef real_t d2[3]
    cdef real_t tmp[9]
    cdef real_t s[3]
    cdef real_t rr[3]
    cdef real_t F[3]
    cdef real_t N[3]
    cdef real_t Nk[3]
    cdef real_t cr[3]

    # world COMs and COM inertias
    for i in range(n_b):
        cm[i] = mass[i]
        for r in range(3):
            v = p_w[i, r]
            for k in range(3):
                v = v + R_w[i, r, k] * com[i, k]
            cc[i, r] = v
        for r in range(3):
            for c in range(3):
                v = 0.0
                for k in range(3):
                    v = v + R_w[i, r, k] * inertia[i, k, c]
                tmp[3 * r + c] = v
        for r in range(3):
            for c in range(3):
                v = 0.0
                for k in range(3):
                    v = v + tmp[3 * r + k] * R_w[i, c, k]
                cI[i, r, c] = v

    # composite accumulation, leaves to root
    for i in range(n_b - 1, 0, -1):
        par = parent[i]
        m1 = cm[par]
        m2 = cm[i]
        for r in range(3):
            d1[r] = (m1 * cc[par, r] + m2 * cc[i, r]) / (m1 + m2)
        for r in range(3):
            d2[r] = cc[i, r] - d1[r]
            rr[r] = cc[par, r] - d1[r]
        for r in range(3):
            for c in range(3):
                v = cI[par, r, c] + cI[i, r, c]
                v = v - m1 * rr[r] * rr[c] - m2 * d2[r] * d2[c]
                if r == c:
                    v = v + m1 * (rr[0] * rr[0] + rr[1] * rr[1] + rr[2] * rr[2])
                    v = v + m2 * (d2[0] * d2[0] + d2[1] * d2[1] + d2[2] * d2[2])
                cI[par, r, c] = v
        cm[par] = m1 + m2
        for r in range(3):
            cc[par, r] = d1[r]

    # joint columns
    for i in range(1, n_b):
        col = base + i - 1
        for r in range(3):
            s[r] = s_w[i, r]
            rr[r] = cc[i, r] - anch_w[i, r]
        _cross(s, rr, cr)
        for r in range(3):
            F[r] = cm[i] * cr[r]
        for r in range(3):
            v = 0.0
            for k in range(3):
                v = v + cI[i, r, k] * s[k]
            N[r] = v
        _cross(rr, F, cr)
        for r in range(3):
            N[r] = N[r] + cr[r]  # moment about the joint anchor
        k = i
        while k > 0:
            for r in range(3):
                d1[r] = anch_w[i, r] - anch_w[k, r]
            _cross(d1, F, cr)
            for r in range(3):
                Nk[r] = N[r] + cr[r]
            v = s_w[k, 0] * Nk[0] + s_w[k, 1] * Nk[1] + s_w[k, 2] * Nk[2]
            M[base + k - 1, col] = v
            M[col, base + k - 1] = v
            k = parent[k]
        if floating:
            for r in range(3):
                d1[r] = anch_w[i, r] - p_w[0, r]
            _cross(d1, F, cr)
            for r in range(3):
                Nk[r] = N[r] + cr[r]
                M[r, col] = F[r]
                M[col, r] = F[r]
            for r in range(3):
                v = 0.0
                for k in range(3):
                    v = v + R_w[0, k, r] * Nk[k]
                M[3 + r, col] = v
                M[col, 3 + r] = v

    if floating:
        mt = cm[0]
        for r in range(3):
            d1[r] = cc[0, r] - p_w[0, r]
            M[r, r] = mt
        # lin-ang block: -m skew(d) R0
        for c in range(3):
            s[0] = R_w[0, 0, c]; s[1] = R_w[0, 1, c]; s[2] = R_w[0, 2, c]
            _cross(d1, s, cr)
            for r in range(3):
                M[r, 3 + c] = -mt * cr[r]
                M[3 + c, r] = -mt * cr[r]
        # ang-ang: R0^T (I_t + m (d.d I - d d^T)) R0
        v = d1[0] * d1[0] + d1[1] * d1[1] + d1[2] * d1[2]
        for r in range(3):
            for c in range(3):
                tmp[3 * r + c] = cI[0, r, c] - mt * d1[r] * d1[c]
                if r == c:
                    tmp[3 * r + c] = tmp[3 * r + c] + mt * v
        for r in range(3):
            for c in range(3):
                v = 0.0
                for k in range(3):
                    for kk in range(3):
                        v = v + R_w[0, k, r] * tmp[3 * k + kk] * R_w[0, kk, c]
                M[3 + r, 3 + c] = v


def crba(parent, mass, com, inertia, floating, R_w, p_w, s_w, anch_w):
    cdef bint fl = bool(floating)
    n_b = parent.shape[0]
    n_v = (6 if fl else 0) + n_b - 1
    cm = np.zeros(n_b)
    if R_w.dtype == np.complex128:
        M = np.zeros((n_v, n_v), dtype=np.complex128)
        cc = np.zeros((n_b, 3), dtype=np.complex128)
        cI = np.zeros((n_b, 3, 3), dtype=np.complex128)
        _crba_impl[cplx](parent, mass, com, inertia, fl, R_w, p_w, s_w,
                                   anch_w, cc, cI, cm, M)
    else:
        M = np.zeros((n_v, n_v))
        cc = np.zeros((n_b, 3))
        cI = np.zeros((n_b, 3, 3))
        _crba_impl[double](parent, mass, com, inertia, fl, R_w, p_w, s_w,
                           anch_w, cc, cI, cm, M)
    return M


cdef void _rnea_impl(const long long[::1] parent, const double[::1] mass,
                     const double[:, ::1] com, const double[:, :, ::1] inertia,
                     bint floating,
                     real_t[:, :, ::1] R_w, real_t[:, ::1] p_w,
                     real_t[:, ::1] s_w, real_t[:, ::1] anch_w,
                     real_t[::1] v, real_t[::1] a, const double[::1] gravity,
                     real_t[:, ::1] om, real_t[:, ::1] al,
                     real_t[:, ::1] vo, real_t[:, ::1] ao,
                     real_t[:, ::1] f, real_t[:, ::1] n,
                     real_t[::1] out) noexcept nogil:
    cdef Py_ssize_t n_b = parent.shape[0]
    cdef Py_ssize_t base = 6 if floating else 0
    cdef Py_ssize_t i, r, c, k, par
    cdef real_t val, qd, qdd
    cdef real_t rr[3]
    cdef real_t cr[3]
    cdef real_t cr2[3]
    cdef real_t cr3[3]
    cdef real_t tmp[3]
    cdef real_t d[3]
    cdef real_t Iw[9]
    cdef real_t mm[9]
    cdef real_t F[3]
    cdef real_t N[3]

    if floating:
        for r in range(3):
            val = 0.0
            for k in range(3):
                val = val + R_w[0, r, k] * v[3 + k]
            om[0, r] = val
            val = 0.0
            for k in range(3):
                val = val + R_w[0, r, k] * a[3 + k]
            al[0, r] = val
            vo[0, r] = v[r]
            ao[0, r] = a[r]

    for i in range(1, n_b):
        par = parent[i]
        qd = v[base + i - 1]
        qdd = a[base + i - 1]
        for r in range(3):
            rr[r] = p_w[i, r] - p_w[par, r]
            tmp[r] = om[par, r]
        _cross(tmp, rr, cr)
        for r in range(3):
            vo[i, r] = vo[par, r] + cr[r]
        _cross(tmp, cr, cr2)  # om x (om x r)
        for r in range(3):
            d[r] = al[par, r]
        _cross(d, rr, cr)
        for r in range(3):
            ao[i, r] = ao[par, r] + cr[r] + cr2[r]
        for r in range(3):
            d[r] = s_w[i, r]
        _cross(tmp, d, cr)  # om_par x s
        for r in range(3):
            om[i, r] = om[par, r] + d[r] * qd
            al[i, r] = al[par, r] + d[r] * qdd + cr[r] * qd

    for i in range(n_b):
        for r in range(3):
            val = 0.0
            for k in range(3):
                val = val + R_w[i, r, k] * com[i, k]
            d[r] = val
        for r in range(3):
            for c in range(3):
                val = 0.0
                for k in range(3):
                    val = val + R_w[i, r, k] * inertia[i, k, c]
                mm[3 * r + c] = val
        for r in range(3):
            for c in range(3):
                val = 0.0
                for k in range(3):
                    val = val + mm[3 * r + k] * R_w[i, c, k]
                Iw[3 * r + c] = val
        for r in range(3):
            tmp[r] = al[i, r]
        _cross(tmp, d, cr)
        for r in range(3):
            rr[r] = om[i, r]
        _cross(rr, d, cr3)
        _cross(rr, cr3, cr2)  # om x (om x d)
        for r in range(3):
            F[r] = mass[i] * (ao[i, r] + cr[r] + cr2[r] - gravity[r])
        for r in range(3):
            val = 0.0
            for k in range(3):
                val = val + Iw[3 * r + k] * al[i, k]
            N[r] = val
        for r in range(3):
            val = 0.0
            for k in range(3):
                val = val + Iw[3 * r + k] * om[i, k]
            tmp[r] = val
        _cross(rr, tmp, cr)
        for r in range(3):
            N[r] = N[r] + cr[r]
        _cross(d, F, cr)
        for r in range(3):
            f[i, r] = F[r]
            n[i, r] = N[r] + cr[r]

    for i in range(n_b - 1, 0, -1):
        par = parent[i]
        val = 0.0
        for r in range(3):
            val = val + s_w[i, r] * n[i, r]
        out[base + i - 1] = val
        for r in range(3):
            rr[r] = p_w[i, r] - p_w[par, r]
            tmp[r] = f[i, r]
        _cross(rr, tmp, cr)
        for r in range(3):
            f[par, r] = f[par, r] + f[i, r]
            n[par, r] = n[par, r] + n[i, r] + cr[r]
    if floating:
        for r in range(3):
            out[r] = f[0, r]
        for r in range(3):
            val = 0.0
            for k in range(3):
                val = val + R_w[0, k, r] * n[0, k]
            out[3 + r] = val


def rnea(parent, mass, com, inertia, floating, R_w, p_w, s_w, anch_w, v, a, gravity):
    cdef bint fl = bool(floating)
    n_b = parent.shape[0]
    n_v = (6 if fl else 0) + n_b - 1
    gravity = np.ascontiguousarray(gravity, dtype=np.float64)
    dtype = np.result_type(R_w.dtype, np.asarray(v).dtype, np.asarray(a).dtype)
    if dtype == np.complex128:
        Rc = np.ascontiguousarray(R_w, dtype=np.complex128)
        pc = np.ascontiguousarray(p_w, dtype=np.complex128)
        sc = np.ascontiguousarray(s_w, dtype=np.complex128)
        anc = np.ascontiguousarray(anch_w, dtype=np.complex128)
        vc = np.ascontiguousarray(v, dtype=np.complex128)
        acc = np.ascontiguousarray(a, dtype=np.complex128)
        w = [np.zeros((n_b, 3), dtype=np.complex128) for _ in range(6)]
        out = np.zeros(n_v, dtype=np.complex128)
        _rnea_impl[cplx](parent, mass, com, inertia, fl, Rc, pc, sc, anc,
                                   vc, acc, gravity, w[0], w[1], w[2], w[3], w[4], w[5], out)
    else:
        vd = np.ascontiguousarray(v, dtype=np.float64)
        ad = np.ascontiguousarray(a, dtype=np.float64)
        w = [np.zeros((n_b, 3)) for _ in range(6)]
        out = np.zeros(n_v)
        _rnea_impl[double](parent, mass, com, inertia, fl, R_w, p_w, s_w, anch_w,
                           vd, ad, gravity, w[0], w[1], w[2], w[3], w[4], w[5], out)
    return out
