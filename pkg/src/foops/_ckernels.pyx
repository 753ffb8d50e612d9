# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loop for well-family objectives.

Runs ``max_iter`` oracle steps on ``y -> h_{l,tau}(x, y)`` without returning
to Python.  Mirrors ``foops._pykernels.inner_loop`` step for step.
"""

from libc.math cimport exp, log, sqrt, pow, fabs
from libc.stdlib cimport malloc, free

cdef enum:
    WELL_EXP = 0
    WELL_QUAD = 1
    WELL_POW = 2

cdef enum:
    PGD = 0
    MOMENTUM = 1
    NESTEROV = 2
    ADAM = 3


cdef inline double _phi(int family, double d, double offset, double power) nogil:
    if family == WELL_EXP:
        return 1.0 - exp(-d)
    elif family == WELL_QUAD:
        return d
    return pow(d + offset, power)


cdef inline double _dphi(int family, double d, double offset, double power) nogil:
    if family == WELL_EXP:
        return exp(-d)
    elif family == WELL_QUAD:
        return 1.0
    return power * pow(d + offset, power - 1.0)


cdef void _values(int family, const double[:, ::1] centers, double offset, double power,
                  const double* z, Py_ssize_t m_obj, Py_ssize_t q,
                  double* fout, double* dout) nogil:
    cdef Py_ssize_t m, i
    cdef double d, u
    for m in range(m_obj):
        d = 0.0
        for i in range(q):
            u = z[i] - centers[m, i]
            d += u * u
        fout[m] = _phi(family, d, offset, power)
        if dout != NULL:
            dout[m] = _dphi(family, d, offset, power)


cdef double _grad_y(int family, const double[:, ::1] centers, double offset, double power,
                    const double* x, const double* y, const double* fx,
                    double l, double tau, Py_ssize_t m_obj, Py_ssize_t q,
                    double* fy, double* dphi, double* pi, double* g) nogil:
    """Fill ``g`` with grad_y h and ``pi`` with the softmax weights; return h."""
    cdef Py_ssize_t m, i
    cdef double amax, s, a, prox, u
    _values(family, centers, offset, power, y, m_obj, q, fy, dphi)
    amax = (fy[0] - fx[0]) / tau
    for m in range(1, m_obj):
        a = (fy[m] - fx[m]) / tau
        if a > amax:
            amax = a
    s = 0.0
    for m in range(m_obj):
        pi[m] = exp((fy[m] - fx[m]) / tau - amax)
        s += pi[m]
    for m in range(m_obj):
        pi[m] /= s
    prox = 0.0
    for i in range(q):
        u = y[i] - x[i]
        prox += u * u
        g[i] = l * u
    for m in range(m_obj):
        for i in range(q):
            g[i] += pi[m] * 2.0 * dphi[m] * (y[i] - centers[m, i])
    return tau * (amax + log(s)) + 0.5 * l * prox


cdef inline double _clamp(double v, bint has_box, const double* lo, const double* hi, Py_ssize_t i) nogil:
    if has_box:
        if v < lo[i]:
            return lo[i]
        if v > hi[i]:
            return hi[i]
    return v


def inner_loop(int family, const double[:, ::1] centers, double offset, double power,
               const double[::1] x, double[::1] y,
               double l, double tau, double beta, long max_iter, double tol,
               int oracle, double c1, double c2, double c3,
               double[::1] s1, double[::1] s2, long count,
               bint has_box, const double[::1] lower, const double[::1] upper):
    """Run the inner loop in place on ``y``, ``s1``, ``s2``.

    Returns ``(iters, residual, count)`` where ``residual`` is the projected
    gradient-mapping norm at the returned ``y``.
    """
    cdef Py_ssize_t m_obj = centers.shape[0]
    cdef Py_ssize_t q = centers.shape[1]
    cdef Py_ssize_t i
    cdef long it = 0
    cdef double res, diff, step, vnext, mhat, vhat, b1t, b2t
    cdef const double* lo = NULL
    cdef const double* hi = NULL
    if has_box:
        lo = &lower[0]
        hi = &upper[0]

    cdef double* fx = <double*> malloc(m_obj * sizeof(double))
    cdef double* fy = <double*> malloc(m_obj * sizeof(double))
    cdef double* dphi = <double*> malloc(m_obj * sizeof(double))
    cdef double* pi = <double*> malloc(m_obj * sizeof(double))
    cdef double* g = <double*> malloc(q * sizeof(double))
    if fx == NULL or fy == NULL or dphi == NULL or pi == NULL or g == NULL:
        free(fx); free(fy); free(dphi); free(pi); free(g)
        raise MemoryError()

    try:
        with nogil:
            _values(family, centers, offset, power, &x[0], m_obj, q, fx, NULL)
            while True:
                _grad_y(family, centers, offset, power, &x[0], &y[0], fx,
                        l, tau, m_obj, q, fy, dphi, pi, g)
                res = 0.0
                for i in range(q):
                    diff = y[i] - _clamp(y[i] - beta * g[i], has_box, lo, hi, i)
                    res += diff * diff
                res = sqrt(res) / beta
                if it >= max_iter or (tol > 0.0 and res <= tol):
                    break
                count += 1
                if oracle == PGD:
                    for i in range(q):
                        y[i] = _clamp(y[i] - beta * g[i], has_box, lo, hi, i)
                elif oracle == MOMENTUM:
                    for i in range(q):
                        s1[i] = c1 * s1[i] + g[i]
                        y[i] = _clamp(y[i] - beta * s1[i], has_box, lo, hi, i)
                elif oracle == NESTEROV:
                    if count == 1:
                        for i in range(q):
                            s1[i] = y[i]
                    for i in range(q):
                        vnext = y[i] - beta * g[i]
                        step = vnext + c1 * (vnext - s1[i])
                        s1[i] = vnext
                        y[i] = _clamp(step, has_box, lo, hi, i)
                else:
                    b1t = 1.0 - pow(c1, <double> count)
                    b2t = 1.0 - pow(c2, <double> count)
                    for i in range(q):
                        s1[i] = c1 * s1[i] + (1.0 - c1) * g[i]
                        s2[i] = c2 * s2[i] + (1.0 - c2) * g[i] * g[i]
                        mhat = s1[i] / b1t
                        vhat = s2[i] / b2t
                        y[i] = _clamp(y[i] - beta * mhat / (sqrt(vhat) + c3), has_box, lo, hi, i)
                it += 1
    finally:
        free(fx); free(fy); free(dphi); free(pi); free(g)
    return it, res, count
