# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Dormand-Prince 5(4) flow kernel.

Port of ``_flow_py.py``; same arguments, same return tuple, same status codes.
"""

from libc.math cimport sqrt, hypot, isfinite, fabs, pow, NAN
from libc.stdlib cimport malloc, realloc, free

cdef enum:
    TIME = 0
    STEPS = 1
    ESCAPED = 2
    OVERFLOW = 3
    CONVERGED = 4
    SECTION = 5

cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0, A53 = 64448.0 / 6561.0
cdef double A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0
cdef double A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0
cdef double B1 = 35.0 / 384.0, B3 = 500.0 / 1113.0, B4 = 125.0 / 192.0
cdef double B5 = -2187.0 / 6784.0, B6 = 11.0 / 84.0
cdef double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0, E4 = 71.0 / 1920.0
cdef double E5 = -17253.0 / 339200.0, E6 = 22.0 / 525.0, E7 = -1.0 / 40.0

cdef double[6][4] DENSE = [
    [1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0,
     -12715105075.0 / 11282082432.0],
    [0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0,
     87487479700.0 / 32700410799.0],
    [0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0,
     -10690763975.0 / 1880347072.0],
    [0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0,
     701980252875.0 / 199316789632.0],
    [0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0,
     -1453857185.0 / 822651844.0],
    [0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0,
     69997945.0 / 29380423.0],
]

cdef double SAFE = 0.9
cdef double FAC_MIN = 0.2
cdef double FAC_MAX = 10.0
cdef double EXPO1 = 0.17
cdef double BETA = 0.04


cdef struct Model:
    double a
    double b
    double sgn


cdef struct Stages:
    # k1, k3..k7 for x, y and the divergence component
    double kx[6]
    double ky[6]
    double kw[6]


cdef inline void rhs(Model* m, double x, double y, double* fx, double* fy, double* fw) noexcept nogil:
    cdef double x2 = x * x
    fx[0] = m.sgn * ((m.a - x) * (1.0 + x2) - 4.0 * x * y)
    fy[0] = m.sgn * (m.b * x * (1.0 + x2 - y))
    fw[0] = m.sgn * (2.0 * m.a * x - 1.0 - 3.0 * x2 - 4.0 * y - m.b * x)


cdef void step(Model* m, double x, double y, double k1x, double k1y, double k1w, double h,
               double* xn, double* yn, double* dw, Stages* st,
               double* ex, double* ey) noexcept nogil:
    cdef double k2x, k2y, k2w, k3x, k3y, k3w, k4x, k4y, k4w
    cdef double k5x, k5y, k5w, k6x, k6y, k6w, k7x, k7y, k7w
    rhs(m, x + h * A21 * k1x, y + h * A21 * k1y, &k2x, &k2y, &k2w)
    rhs(m, x + h * (A31 * k1x + A32 * k2x),
        y + h * (A31 * k1y + A32 * k2y), &k3x, &k3y, &k3w)
    rhs(m, x + h * (A41 * k1x + A42 * k2x + A43 * k3x),
        y + h * (A41 * k1y + A42 * k2y + A43 * k3y), &k4x, &k4y, &k4w)
    rhs(m, x + h * (A51 * k1x + A52 * k2x + A53 * k3x + A54 * k4x),
        y + h * (A51 * k1y + A52 * k2y + A53 * k3y + A54 * k4y), &k5x, &k5y, &k5w)
    rhs(m, x + h * (A61 * k1x + A62 * k2x + A63 * k3x + A64 * k4x + A65 * k5x),
        y + h * (A61 * k1y + A62 * k2y + A63 * k3y + A64 * k4y + A65 * k5y),
        &k6x, &k6y, &k6w)
    xn[0] = x + h * (B1 * k1x + B3 * k3x + B4 * k4x + B5 * k5x + B6 * k6x)
    yn[0] = y + h * (B1 * k1y + B3 * k3y + B4 * k4y + B5 * k5y + B6 * k6y)
    dw[0] = h * (B1 * k1w + B3 * k3w + B4 * k4w + B5 * k5w + B6 * k6w)
    rhs(m, xn[0], yn[0], &k7x, &k7y, &k7w)
    ex[0] = h * (E1 * k1x + E3 * k3x + E4 * k4x + E5 * k5x + E6 * k6x + E7 * k7x)
    ey[0] = h * (E1 * k1y + E3 * k3y + E4 * k4y + E5 * k5y + E6 * k6y + E7 * k7y)
    st.kx[0] = k1x; st.kx[1] = k3x; st.kx[2] = k4x; st.kx[3] = k5x; st.kx[4] = k6x; st.kx[5] = k7x
    st.ky[0] = k1y; st.ky[1] = k3y; st.ky[2] = k4y; st.ky[3] = k5y; st.ky[4] = k6y; st.ky[5] = k7y
    st.kw[0] = k1w; st.kw[1] = k3w; st.kw[2] = k4w; st.kw[3] = k5w; st.kw[4] = k6w; st.kw[5] = k7w


cdef inline double dense(double x, double h, double* k, double th) noexcept nogil:
    cdef double t2 = th * th
    cdef double t3 = t2 * th
    cdef double t4 = t3 * th
    cdef double acc = 0.0
    cdef int i
    for i in range(6):
        acc += k[i] * (DENSE[i][0] * th + DENSE[i][1] * t2 + DENSE[i][2] * t3 + DENSE[i][3] * t4)
    return x + h * acc


cdef double initial_step(Model* m, double x, double y, double cx, double cy, double fx, double fy,
                         double rtol, double atol, double hmax) noexcept nogil:
    cdef double sc = atol + rtol * hypot(x - cx, y - cy)
    cdef double dnf = hypot(fx, fy) / sc
    cdef double dny = hypot(x - cx, y - cy) / sc
    cdef double h, h1, der2, der12, f1x, f1y, f1w
    if dnf <= 1e-10 or dny <= 1e-10:
        h = 1e-6
    else:
        h = 0.01 * dny / dnf
    if h > hmax:
        h = hmax
    rhs(m, x + h * fx, y + h * fy, &f1x, &f1y, &f1w)
    der2 = hypot(f1x - fx, f1y - fy) / sc / h
    der12 = der2 if der2 > sqrt(dnf) else sqrt(dnf)
    if der12 <= 1e-15:
        h1 = h * 1e-3 if h * 1e-3 > 1e-6 else 1e-6
    else:
        h1 = pow(0.01 / der12, 0.2)
    if 100.0 * h < h1:
        h1 = 100.0 * h
    if hmax < h1:
        h1 = hmax
    return h1


cdef class _Samples:
    cdef double* buf
    cdef Py_ssize_t n, cap

    def __cinit__(self):
        self.cap = 3 * 1024
        self.n = 0
        self.buf = <double*> malloc(self.cap * sizeof(double))
        if self.buf == NULL:
            raise MemoryError()

    def __dealloc__(self):
        free(self.buf)

    cdef int push(self, double t, double x, double y) except -1:
        cdef double* nb
        if self.n + 3 > self.cap:
            nb = <double*> realloc(self.buf, 2 * self.cap * sizeof(double))
            if nb == NULL:
                raise MemoryError()
            self.buf = nb
            self.cap *= 2
        self.buf[self.n] = t
        self.buf[self.n + 1] = x
        self.buf[self.n + 2] = y
        self.n += 3
        return 0

    cdef list tolist(self):
        cdef Py_ssize_t i
        return [self.buf[i] for i in range(self.n)]


def flow(double a, double b, double x0, double y0, double tau_max, double rtol, double atol,
         long max_steps, double r_escape, double cx, double cy, double tol_conv, double dwell,
         double spx, double spy, double sdx, double sdy, long sec_count, double sgn, bint record):
    cdef Model m
    m.a = a
    m.b = b
    m.sgn = sgn
    cdef double x = x0, y = y0, w = 0.0, tau = 0.0
    cdef long n_acc = 0, n_rej = 0, n_cross = 0
    cdef double s_last = NAN, s_prev = NAN
    cdef _Samples samples = _Samples() if record else None
    cdef bint watch = sdx != 0.0 or sdy != 0.0
    cdef double fx, fy, fw, xn, yn, dw, ex, ey
    cdef Stages st, st2
    cdef bint inside = False, last_rejected = False
    cdef double tau_in = 0.0, hmax = tau_max, h, hnew = 0.0, errold = 1e-4
    cdef double remaining, sc, err, fac11, fac, g_old, g_new
    cdef double lo, hi, glo, ghi, th, gx, gy, gm, xs, ys, s, frac
    cdef double xc, yc, wc, dwc, ex2, ey2, gc, vx, vy, vw, gdot, dth, hs, tau_c
    cdef int side, it

    if record:
        samples.push(0.0, x, y)
    rhs(&m, x, y, &fx, &fy, &fw)
    if not (isfinite(fx) and isfinite(fy)):
        return OVERFLOW, tau, x, y, w, 0, 0, 0, s_last, s_prev, _out(samples)
    if hypot(x, y) >= r_escape:
        return ESCAPED, tau, x, y, w, 0, 0, 0, s_last, s_prev, _out(samples)

    if tol_conv > 0.0 and hypot(x - cx, y - cy) < tol_conv:
        inside = True

    h = initial_step(&m, x, y, cx, cy, fx, fy, rtol, atol, hmax)
    g_old = sdx * (y - spy) - sdy * (x - spx)

    while True:
        if n_acc + n_rej >= max_steps:
            return STEPS, tau, x, y, w, n_acc, n_rej, n_cross, s_last, s_prev, _out(samples)
        remaining = tau_max - tau
        if remaining <= 1e-14 * (tau if tau > 1.0 else 1.0):
            return TIME, tau, x, y, w, n_acc, n_rej, n_cross, s_last, s_prev, _out(samples)
        if h >= remaining:
            h = remaining
        if h <= 1e-15 * (tau if tau > 1.0 else 1.0):
            return OVERFLOW, tau, x, y, w, n_acc, n_rej, n_cross, s_last, s_prev, _out(samples)

        step(&m, x, y, fx, fy, fw, h, &xn, &yn, &dw, &st, &ex, &ey)
        if not (isfinite(xn) and isfinite(yn) and isfinite(st.kx[5]) and isfinite(st.ky[5])
                and isfinite(ex) and isfinite(ey)):
            n_rej += 1
            h *= 0.1
            last_rejected = True
            continue

        sc = atol + rtol * max(hypot(x - cx, y - cy), hypot(xn - cx, yn - cy))
        err = hypot(ex, ey) / sc
        fac11 = pow(err, EXPO1)
        if err <= 1.0:
            fac = fac11 / pow(errold, BETA)
            fac = max(1.0 / FAC_MAX, min(1.0 / FAC_MIN, fac / SAFE))
            hnew = h / fac
            if last_rejected:
                hnew = min(hnew, h)
            errold = max(err, 1e-4)
            last_rejected = False
        else:
            n_rej += 1
            h = h / min(1.0 / FAC_MIN, fac11 / SAFE)
            last_rejected = True
            continue

        n_acc += 1
        g_new = sdx * (yn - spy) - sdy * (xn - spx)
        if watch and g_old < 0.0 <= g_new:
            if sec_count > 0:
                lo = 0.0
                hi = 1.0
                glo = g_old
                ghi = g_new
                th = 1.0
                side = 0
                for it in range(100):
                    if ghi == 0.0:
                        th = hi
                        break
                    th = (lo * ghi - hi * glo) / (ghi - glo)
                    if not (lo < th < hi):
                        th = 0.5 * (lo + hi)
                    gx = dense(x, h, st.kx, th)
                    gy = dense(y, h, st.ky, th)
                    gm = sdx * (gy - spy) - sdy * (gx - spx)
                    if gm < 0.0:
                        lo = th
                        glo = gm
                        if side == -1:
                            ghi *= 0.5
                        side = -1
                    elif gm > 0.0:
                        hi = th
                        ghi = gm
                        if side == 1:
                            glo *= 0.5
                        side = 1
                    else:
                        break
                    if hi - lo < 1e-15:
                        break
                xs = dense(x, h, st.kx, th)
                ys = dense(y, h, st.ky, th)
                s = sdx * (xs - spx) + sdy * (ys - spy)
                if s > 0.0:
                    n_cross += 1
                    s_prev = s_last
                    s_last = s
                    if n_cross == sec_count:
                        for it in range(4):
                            hs = th * h
                            step(&m, x, y, fx, fy, fw, hs, &xc, &yc, &dwc, &st2, &ex2, &ey2)
                            gc = sdx * (yc - spy) - sdy * (xc - spx)
                            rhs(&m, xc, yc, &vx, &vy, &vw)
                            gdot = sdx * vy - sdy * vx
                            if gdot == 0.0 or gc == 0.0:
                                break
                            dth = gc / (gdot * h)
                            th -= dth
                            if fabs(dth) <= 1e-16:
                                break
                        hs = th * h
                        step(&m, x, y, fx, fy, fw, hs, &xc, &yc, &dwc, &st2, &ex2, &ey2)
                        wc = w + dwc
                        s_last = sdx * (xc - spx) + sdy * (yc - spy)
                        tau_c = tau + hs
                        if record:
                            samples.push(tau_c, xc, yc)
                        return (SECTION, tau_c, xc, yc, wc, n_acc, n_rej, n_cross,
                                s_last, s_prev, _out(samples))
            else:
                frac = g_old / (g_old - g_new)
                xs = x + frac * (xn - x)
                ys = y + frac * (yn - y)
                s = sdx * (xs - spx) + sdy * (ys - spy)
                if s > 0.0:
                    n_cross += 1
                    s_prev = s_last
                    s_last = s
        g_old = g_new

        tau += h
        x = xn
        y = yn
        w += dw
        fx = st.kx[5]
        fy = st.ky[5]
        fw = st.kw[5]
        if record:
            samples.push(tau, x, y)

        if hypot(x, y) >= r_escape:
            return ESCAPED, tau, x, y, w, n_acc, n_rej, n_cross, s_last, s_prev, _out(samples)
        if tol_conv > 0.0:
            if hypot(x - cx, y - cy) < tol_conv:
                if not inside:
                    inside = True
                    tau_in = tau
                elif tau - tau_in >= dwell:
                    return (CONVERGED, tau, x, y, w, n_acc, n_rej, n_cross, s_last, s_prev,
                            _out(samples))
            else:
                inside = False
        if tau >= tau_max:
            return TIME, tau, x, y, w, n_acc, n_rej, n_cross, s_last, s_prev, _out(samples)
        h = hnew


cdef object _out(_Samples samples):
    if samples is None:
        return None
    return samples.tolist()
