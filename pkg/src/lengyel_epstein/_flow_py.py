"""Pure-Python Dormand-Prince 5(4) flow kernel.

Reference implementation of the integration loop; ``_flow.pyx`` is a
line-by-line port of this file and both must stay in sync.  The state is
augmented with a third component that accumulates the divergence of the
field along the orbit (used for Floquet multipliers); that component is
excluded from error control.  The relative tolerance is measured on the
displacement from ``(cx, cy)`` (the equilibrium), so orbits near it keep
proportional accuracy instead of hitting a noise floor of ``rtol * |P|``.
"""

from math import hypot, isfinite, sqrt

# status codes shared with the compiled kernel
TIME = 0
STEPS = 1
ESCAPED = 2
OVERFLOW = 3
CONVERGED = 4
SECTION = 5

A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0,
                           49.0 / 176.0, -5103.0 / 18656.0)
B1, B3, B4, B5, B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
E1, E3, E4, E5, E6, E7 = (71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0,
                          -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)

# Shampine's quartic continuous extension: rows k1,k3..k7, columns theta^1..theta^4
D1 = (1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0,
      -12715105075.0 / 11282082432.0)
D3 = (0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0,
      87487479700.0 / 32700410799.0)
D4 = (0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0,
      -10690763975.0 / 1880347072.0)
D5 = (0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0,
      701980252875.0 / 199316789632.0)
D6 = (0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0,
      -1453857185.0 / 822651844.0)
D7 = (0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0, 69997945.0 / 29380423.0)

SAFE = 0.9
FAC_MIN = 0.2
FAC_MAX = 10.0
EXPO1 = 0.17
BETA = 0.04


def _rhs(a, b, sgn, x, y):
    x2 = x * x
    fx = (a - x) * (1.0 + x2) - 4.0 * x * y
    fy = b * x * (1.0 + x2 - y)
    div = 2.0 * a * x - 1.0 - 3.0 * x2 - 4.0 * y - b * x
    return sgn * fx, sgn * fy, sgn * div


def _step(a, b, sgn, x, y, k1x, k1y, k1w, h):
    """One DOPRI5 step.  Returns new state, the seven stages and the error vector."""
    k2x, k2y, k2w = _rhs(a, b, sgn, x + h * A21 * k1x, y + h * A21 * k1y)
    k3x, k3y, k3w = _rhs(a, b, sgn,
                         x + h * (A31 * k1x + A32 * k2x),
                         y + h * (A31 * k1y + A32 * k2y))
    k4x, k4y, k4w = _rhs(a, b, sgn,
                         x + h * (A41 * k1x + A42 * k2x + A43 * k3x),
                         y + h * (A41 * k1y + A42 * k2y + A43 * k3y))
    k5x, k5y, k5w = _rhs(a, b, sgn,
                         x + h * (A51 * k1x + A52 * k2x + A53 * k3x + A54 * k4x),
                         y + h * (A51 * k1y + A52 * k2y + A53 * k3y + A54 * k4y))
    k6x, k6y, k6w = _rhs(a, b, sgn,
                         x + h * (A61 * k1x + A62 * k2x + A63 * k3x + A64 * k4x + A65 * k5x),
                         y + h * (A61 * k1y + A62 * k2y + A63 * k3y + A64 * k4y + A65 * k5y))
    xn = x + h * (B1 * k1x + B3 * k3x + B4 * k4x + B5 * k5x + B6 * k6x)
    yn = y + h * (B1 * k1y + B3 * k3y + B4 * k4y + B5 * k5y + B6 * k6y)
    dw = h * (B1 * k1w + B3 * k3w + B4 * k4w + B5 * k5w + B6 * k6w)
    k7x, k7y, k7w = _rhs(a, b, sgn, xn, yn)
    ex = h * (E1 * k1x + E3 * k3x + E4 * k4x + E5 * k5x + E6 * k6x + E7 * k7x)
    ey = h * (E1 * k1y + E3 * k3y + E4 * k4y + E5 * k5y + E6 * k6y + E7 * k7y)
    kx = (k1x, k3x, k4x, k5x, k6x, k7x)
    ky = (k1y, k3y, k4y, k5y, k6y, k7y)
    kw = (k1w, k3w, k4w, k5w, k6w, k7w)
    return xn, yn, dw, kx, ky, kw, ex, ey


def _dense(x, h, k, th):
    t2 = th * th
    t3 = t2 * th
    t4 = t3 * th
    acc = 0.0
    for d, ki in zip((D1, D3, D4, D5, D6, D7), k):
        acc += ki * (d[0] * th + d[1] * t2 + d[2] * t3 + d[3] * t4)
    return x + h * acc


def _initial_step(a, b, sgn, x, y, cx, cy, fx, fy, rtol, atol, hmax):
    sc = atol + rtol * hypot(x - cx, y - cy)
    dnf = hypot(fx, fy) / sc
    dny = hypot(x - cx, y - cy) / sc
    if dnf <= 1e-10 or dny <= 1e-10:
        h = 1e-6
    else:
        h = 0.01 * dny / dnf
    h = min(h, hmax)
    f1x, f1y, _ = _rhs(a, b, sgn, x + h * fx, y + h * fy)
    der2 = hypot(f1x - fx, f1y - fy) / sc / h
    der12 = max(der2, sqrt(dnf))
    if der12 <= 1e-15:
        h1 = max(1e-6, h * 1e-3)
    else:
        h1 = (0.01 / der12) ** 0.2
    return min(100.0 * h, h1, hmax)


def flow(a, b, x0, y0, tau_max, rtol, atol, max_steps, r_escape,
         cx, cy, tol_conv, dwell, spx, spy, sdx, sdy, sec_count, sgn, record):
    """Integrate ``sgn * F`` from ``(x0, y0)`` for at most ``tau_max`` time units.

    Stops on escape (``hypot(x, y) >= r_escape``), on convergence (the orbit
    stays within ``tol_conv`` of ``(cx, cy)`` for ``dwell`` time; disabled when
    ``tol_conv <= 0``), on the ``sec_count``-th counterclockwise crossing of
    the ray from ``(spx, spy)`` along ``(sdx, sdy)`` (``sec_count == 0`` only
    tracks crossings), or on budget.

    Returns ``(status, tau, x, y, div_integral, n_accepted, n_rejected,
    n_crossings, s_last, s_prev, samples)`` where ``samples`` is a flat list
    ``[t0, x0, y0, t1, x1, y1, ...]`` or ``None``.
    """
    x, y, w = x0, y0, 0.0
    tau = 0.0
    n_acc = n_rej = 0
    n_cross = 0
    s_last = s_prev = float("nan")
    samples = [0.0, x, y] if record else None
    watch = sdx != 0.0 or sdy != 0.0

    fx, fy, fw = _rhs(a, b, sgn, x, y)
    if not (isfinite(fx) and isfinite(fy)):
        return OVERFLOW, tau, x, y, w, 0, 0, 0, s_last, s_prev, samples
    if hypot(x, y) >= r_escape:
        return ESCAPED, tau, x, y, w, 0, 0, 0, s_last, s_prev, samples

    inside = False
    tau_in = 0.0
    if tol_conv > 0.0 and hypot(x - cx, y - cy) < tol_conv:
        inside = True

    hmax = tau_max
    h = _initial_step(a, b, sgn, x, y, cx, cy, fx, fy, rtol, atol, hmax)
    errold = 1e-4
    last_rejected = False
    g_old = sdx * (y - spy) - sdy * (x - spx)

    while True:
        if n_acc + n_rej >= max_steps:
            return STEPS, tau, x, y, w, n_acc, n_rej, n_cross, s_last, s_prev, samples
        remaining = tau_max - tau
        if remaining <= 1e-14 * max(1.0, tau):
            return TIME, tau, x, y, w, n_acc, n_rej, n_cross, s_last, s_prev, samples
        if h >= remaining:
            h = remaining
        if h <= 1e-15 * max(1.0, tau):
            # step size collapsed: finite-time blow-up
            return OVERFLOW, tau, x, y, w, n_acc, n_rej, n_cross, s_last, s_prev, samples

        xn, yn, dw, kx, ky, kw, ex, ey = _step(a, b, sgn, x, y, fx, fy, fw, h)
        if not (isfinite(xn) and isfinite(yn) and isfinite(kx[5]) and isfinite(ky[5])
                and isfinite(ex) and isfinite(ey)):
            n_rej += 1
            h *= 0.1
            last_rejected = True
            continue

        sc = atol + rtol * max(hypot(x - cx, y - cy), hypot(xn - cx, yn - cy))
        err = hypot(ex, ey) / sc
        fac11 = err ** EXPO1
        if err <= 1.0:
            fac = fac11 / errold ** BETA
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

        # accepted step [tau, tau + h]
        n_acc += 1
        g_new = sdx * (yn - spy) - sdy * (xn - spx)
        if watch and g_old < 0.0 <= g_new:
            if sec_count > 0:
                # localize on the dense output, then polish with exact partial steps
                # Illinois regula falsi on the interpolant
                lo, hi = 0.0, 1.0
                glo, ghi = g_old, g_new
                th = 1.0
                side = 0
                for _ in range(100):
                    if ghi == 0.0:
                        th = hi
                        break
                    th = (lo * ghi - hi * glo) / (ghi - glo)
                    if not (lo < th < hi):
                        th = 0.5 * (lo + hi)
                    gx = _dense(x, h, kx, th)
                    gy = _dense(y, h, ky, th)
                    gm = sdx * (gy - spy) - sdy * (gx - spx)
                    if gm < 0.0:
                        lo, glo = th, gm
                        if side == -1:
                            ghi *= 0.5
                        side = -1
                    elif gm > 0.0:
                        hi, ghi = th, gm
                        if side == 1:
                            glo *= 0.5
                        side = 1
                    else:
                        break
                    if hi - lo < 1e-15:
                        break
                xs = _dense(x, h, kx, th)
                ys = _dense(y, h, ky, th)
                s = sdx * (xs - spx) + sdy * (ys - spy)
                if s > 0.0:
                    n_cross += 1
                    s_prev = s_last
                    s_last = s
                    if n_cross == sec_count:
                        xc, yc, wc = xs, ys, w + _dense(0.0, h, kw, th)
                        for _ in range(4):
                            hs = th * h
                            xc, yc, dwc, _kx, _ky, _kw, _ex, _ey = _step(
                                a, b, sgn, x, y, fx, fy, fw, hs)
                            wc = w + dwc
                            gc = sdx * (yc - spy) - sdy * (xc - spx)
                            vx, vy, _ = _rhs(a, b, sgn, xc, yc)
                            gdot = sdx * vy - sdy * vx
                            if gdot == 0.0 or gc == 0.0:
                                break
                            dth = gc / (gdot * h)
                            th -= dth
                            if abs(dth) <= 1e-16:
                                break
                        hs = th * h
                        xc, yc, dwc, _kx, _ky, _kw, _ex, _ey = _step(
                            a, b, sgn, x, y, fx, fy, fw, hs)
                        wc = w + dwc
                        s = sdx * (xc - spx) + sdy * (yc - spy)
                        s_last = s
                        tau_c = tau + hs
                        if record:
                            samples.extend((tau_c, xc, yc))
                        return (SECTION, tau_c, xc, yc, wc, n_acc, n_rej, n_cross,
                                s_last, s_prev, samples)
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
        x, y, w = xn, yn, w + dw
        fx, fy, fw = kx[5], ky[5], kw[5]
        if record:
            samples.extend((tau, x, y))

        if hypot(x, y) >= r_escape:
            return ESCAPED, tau, x, y, w, n_acc, n_rej, n_cross, s_last, s_prev, samples
        if tol_conv > 0.0:
            if hypot(x - cx, y - cy) < tol_conv:
                if not inside:
                    inside = True
                    tau_in = tau
                elif tau - tau_in >= dwell:
                    return CONVERGED, tau, x, y, w, n_acc, n_rej, n_cross, s_last, s_prev, samples
            else:
                inside = False
        if tau >= tau_max:
            return TIME, tau, x, y, w, n_acc, n_rej, n_cross, s_last, s_prev, samples
        h = hnew
