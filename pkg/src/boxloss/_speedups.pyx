# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled loss kernels.

Line-for-line transcription of boxloss._kernels_py; see that module for the
semantics and conventions.  The two backends must produce bit-identical
results: keep the order of floating-point operations in sync and build with
-ffp-contract=off (see setup.py).
"""

import numpy as np

from libc.math cimport asin, atan, exp, fabs, pow, sin, sqrt

BACKEND_NAME = "compiled"

KIND_IOU = 0
KIND_GIOU = 1
KIND_DIOU = 2
KIND_CIOU = 3
KIND_SIOU = 4
KIND_SMOOTH = 5

MIN_SIDE = 1e-6

cdef double _MIN_SIDE = 1e-6
cdef double _EXPAND = 1e-6
cdef double _SIGMA_EPS = 1e-9
cdef double _PI = 3.141592653589793
cdef double _PI_OVER_4 = _PI / 4.0
cdef double _FOUR_OVER_PI2 = 4.0 / (_PI * _PI)


cdef inline double _dmin(double a, double b) nogil:
    if b < a:
        return 1.0
    if b == a:
        return 0.5
    return 0.0


cdef inline double _dmax(double a, double b) nogil:
    if b > a:
        return 1.0
    if b == a:
        return 0.5
    return 0.0


cdef inline void _smooth_axis_core(double g0, double g1, double p0, double p1,
                                   double* ell, double* dell0, double* dell1) nogil:
    cdef double up_r, up, vp_r, vp, un_r, un, vn_r, vn
    cdef double dpos, dneg, gc, dc, inv2dc, wpos, wneg
    cdef double rup0, rvp1, run0, rvn1
    up_r = p0 - g1
    up = up_r if up_r > 0.0 else 0.0
    vp_r = p1 - g1
    vp = vp_r if vp_r > 0.0 else 0.0
    un_r = g0 - p0
    un = un_r if un_r > 0.0 else 0.0
    vn_r = g0 - p1
    vn = vn_r if vn_r > 0.0 else 0.0
    dpos = vp - up
    dneg = un - vn
    gc = (g0 + g1) * 0.5
    dc = gc if gc > 1.0 - gc else 1.0 - gc
    inv2dc = 1.0 / (2.0 * dc)
    wpos = 1.0 - (up + vp) * inv2dc
    wneg = 1.0 - (un + vn) * inv2dc
    ell[0] = (1.0 - dpos) * wpos + (1.0 - dneg) * wneg
    rup0 = 1.0 if up_r > 0.0 else 0.0
    rvp1 = 1.0 if vp_r > 0.0 else 0.0
    run0 = 1.0 if un_r > 0.0 else 0.0
    rvn1 = 1.0 if vn_r > 0.0 else 0.0
    dell0[0] = rup0 * (wpos - (1.0 - dpos) * inv2dc) + run0 * (wneg + (1.0 - dneg) * inv2dc)
    dell1[0] = -rvp1 * (wpos + (1.0 - dpos) * inv2dc) - rvn1 * (wneg - (1.0 - dneg) * inv2dc)


cdef inline double _iou_core(double ax0, double ay0, double ax1, double ay1,
                             double bx0, double by0, double bx1, double by1) nogil:
    cdef double ox, oy, inter, union_
    ox = (ax1 if ax1 < bx1 else bx1) - (ax0 if ax0 > bx0 else bx0)
    oy = (ay1 if ay1 < by1 else by1) - (ay0 if ay0 > by0 else by0)
    if ox <= 0.0 or oy <= 0.0:
        return 0.0
    inter = ox * oy
    union_ = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    return inter / union_


cdef inline double _smooth_penalty_core(double gx0, double gy0, double gx1, double gy1,
                                        double px0, double py0, double px1, double py1) nogil:
    cdef double ellx, elly, t0, t1
    _smooth_axis_core(gx0, gx1, px0, px1, &ellx, &t0, &t1)
    _smooth_axis_core(gy0, gy1, py0, py1, &elly, &t0, &t1)
    return 1.0 - ellx * elly * 0.25


cdef int _eval_core(int kind,
                    double gx0, double gy0, double gx1, double gy1,
                    double px0, double py0, double px1, double py1,
                    double theta, double alpha_override, double* out) nogil:
    cdef double wg, hg, wp, hp, ag, ap
    cdef double oxr, oyr, ox, oy, inter, union_, iou_v
    cdef double di0, di1, di2, di3, du0, du1, du2, du3, uu
    cdef double value, d0, d1, d2, d3
    cdef double ellx, elly, dex0, dex2, dey1, dey3
    cdef double cw, ch, dcw0, dcw2, dch1, dch3, carea, cc
    cdef double pcx, pcy, gcx, gcy, ddx, ddy, rho2, c2, c4
    cdef double whg, whp, q, v, denom, alpha, k, inv_hp, t
    cdef double sigma2, sigma, adx, ady, z, st, lam, sx, sy, lam_alg, dl0, dl1, gam
    cdef double inv_cw, inv_ch, rx, ry, rho_x, rho_y, ex, ey
    cdef double drx0, drx2, dry1, dry3, dd0, dd1, dd2, dd3
    cdef double dw, adw, mw, omw, dh, adh, mh, omh
    cdef double eow, eoh, bow, boh, omega, swp, shp, domw, domh, cow, coh, delta

    if kind < 0 or kind > 5:
        return 1

    wg = gx1 - gx0
    hg = gy1 - gy0
    wp = px1 - px0
    hp = py1 - py0
    ag = wg * hg
    ap = wp * hp

    oxr = (gx1 if gx1 < px1 else px1) - (gx0 if gx0 > px0 else px0)
    oyr = (gy1 if gy1 < py1 else py1) - (gy0 if gy0 > py0 else py0)
    ox = oxr if oxr > 0.0 else 0.0
    oy = oyr if oyr > 0.0 else 0.0
    inter = ox * oy
    union_ = ag + ap - inter
    iou_v = inter / union_

    if oxr > 0.0 and oyr > 0.0:
        di0 = -_dmax(gx0, px0) * oy
        di1 = ox * -_dmax(gy0, py0)
        di2 = _dmin(gx1, px1) * oy
        di3 = ox * _dmin(gy1, py1)
    else:
        di0 = 0.0
        di1 = 0.0
        di2 = 0.0
        di3 = 0.0

    du0 = -hp - di0
    du1 = -wp - di1
    du2 = hp - di2
    du3 = wp - di3
    uu = union_ * union_
    value = 1.0 - iou_v
    d0 = -(di0 * union_ - inter * du0) / uu
    d1 = -(di1 * union_ - inter * du1) / uu
    d2 = -(di2 * union_ - inter * du2) / uu
    d3 = -(di3 * union_ - inter * du3) / uu

    if kind == 0:  # plain IoU
        out[0] = value
        out[1] = d0
        out[2] = d1
        out[3] = d2
        out[4] = d3
        return 0

    if kind == 5:  # smoothing IoU
        _smooth_axis_core(gx0, gx1, px0, px1, &ellx, &dex0, &dex2)
        _smooth_axis_core(gy0, gy1, py0, py1, &elly, &dey1, &dey3)
        value += 1.0 - ellx * elly * 0.25
        d0 += -0.25 * elly * dex0
        d1 += -0.25 * ellx * dey1
        d2 += -0.25 * elly * dex2
        d3 += -0.25 * ellx * dey3
        out[0] = value
        out[1] = d0
        out[2] = d1
        out[3] = d2
        out[4] = d3
        return 0

    cw = (gx1 if gx1 > px1 else px1) - (gx0 if gx0 < px0 else px0)
    ch = (gy1 if gy1 > py1 else py1) - (gy0 if gy0 < py0 else py0)
    dcw0 = -_dmin(gx0, px0)
    dcw2 = _dmax(gx1, px1)
    dch1 = -_dmin(gy0, py0)
    dch3 = _dmax(gy1, py1)

    if kind == 1:  # generalized IoU
        carea = cw * ch
        cc = carea * carea
        value += (carea - union_) / carea
        d0 += -(du0 * carea - union_ * (dcw0 * ch)) / cc
        d1 += -(du1 * carea - union_ * (cw * dch1)) / cc
        d2 += -(du2 * carea - union_ * (dcw2 * ch)) / cc
        d3 += -(du3 * carea - union_ * (cw * dch3)) / cc
        out[0] = value
        out[1] = d0
        out[2] = d1
        out[3] = d2
        out[4] = d3
        return 0

    pcx = (px0 + px1) * 0.5
    pcy = (py0 + py1) * 0.5
    gcx = (gx0 + gx1) * 0.5
    gcy = (gy0 + gy1) * 0.5
    ddx = pcx - gcx
    ddy = pcy - gcy

    if kind == 2 or kind == 3:  # distance / complete IoU
        rho2 = ddx * ddx + ddy * ddy
        c2 = cw * cw + ch * ch
        c4 = c2 * c2
        value += rho2 / c2
        d0 += (ddx * c2 - rho2 * (2.0 * cw * dcw0)) / c4
        d1 += (ddy * c2 - rho2 * (2.0 * ch * dch1)) / c4
        d2 += (ddx * c2 - rho2 * (2.0 * cw * dcw2)) / c4
        d3 += (ddy * c2 - rho2 * (2.0 * ch * dch3)) / c4
        if kind == 2:
            out[0] = value
            out[1] = d0
            out[2] = d1
            out[3] = d2
            out[4] = d3
            return 0

        whg = wg / hg
        whp = wp / hp
        q = atan(whg) - atan(whp)
        v = _FOUR_OVER_PI2 * q * q
        if alpha_override >= 0.0:
            alpha = alpha_override
        else:
            denom = (1.0 - iou_v) + v
            alpha = v / denom if denom > 0.0 else 0.0
        value += alpha * v
        k = -2.0 * _FOUR_OVER_PI2 * q / (1.0 + whp * whp)
        inv_hp = 1.0 / hp
        t = wp * inv_hp * inv_hp
        d0 += alpha * (k * -inv_hp)
        d1 += alpha * (k * t)
        d2 += alpha * (k * inv_hp)
        d3 += alpha * (k * -t)
        out[0] = value
        out[1] = d0
        out[2] = d1
        out[3] = d2
        out[4] = d3
        return 0

    # kind == 4: scylla IoU
    sigma2 = ddx * ddx + ddy * ddy
    sigma = sqrt(sigma2)
    adx = fabs(ddx)
    ady = fabs(ddy)
    if sigma < _SIGMA_EPS:
        lam = 0.0
        dl0 = 0.0
        dl1 = 0.0
    else:
        z = ady / sigma
        if z > 1.0:
            z = 1.0
        st = sin(asin(z) - _PI_OVER_4)
        lam = 1.0 - 2.0 * st * st
        sx = 1.0 if ddx > 0.0 else (-1.0 if ddx < 0.0 else 0.0)
        sy = 1.0 if ddy > 0.0 else (-1.0 if ddy < 0.0 else 0.0)
        lam_alg = 2.0 * adx * ady / sigma2
        dl0 = (sx * ady - lam_alg * ddx) / sigma2
        dl1 = (sy * adx - lam_alg * ddy) / sigma2
    gam = 2.0 - lam

    inv_cw = 1.0 / cw
    inv_ch = 1.0 / ch
    rx = ddx * inv_cw
    ry = ddy * inv_ch
    rho_x = rx * rx
    rho_y = ry * ry
    ex = exp(-gam * rho_x)
    ey = exp(-gam * rho_y)
    drx0 = 2.0 * rx * ((0.5 * cw - ddx * dcw0) * (inv_cw * inv_cw))
    drx2 = 2.0 * rx * ((0.5 * cw - ddx * dcw2) * (inv_cw * inv_cw))
    dry1 = 2.0 * ry * ((0.5 * ch - ddy * dch1) * (inv_ch * inv_ch))
    dry3 = 2.0 * ry * ((0.5 * ch - ddy * dch3) * (inv_ch * inv_ch))
    dd0 = ex * (gam * drx0 - rho_x * dl0) - ey * (rho_y * dl0)
    dd1 = ey * (gam * dry1 - rho_y * dl1) - ex * (rho_x * dl1)
    dd2 = ex * (gam * drx2 - rho_x * dl0) - ey * (rho_y * dl0)
    dd3 = ey * (gam * dry3 - rho_y * dl1) - ex * (rho_x * dl1)

    dw = wp - wg
    adw = fabs(dw)
    mw = wp if wp > wg else wg
    omw = adw / mw
    dh = hp - hg
    adh = fabs(dh)
    mh = hp if hp > hg else hg
    omh = adh / mh
    eow = exp(-omw)
    eoh = exp(-omh)
    bow = 1.0 - eow
    boh = 1.0 - eoh
    omega = pow(bow, theta) + pow(boh, theta)
    swp = 1.0 if dw > 0.0 else (-1.0 if dw < 0.0 else 0.0)
    shp = 1.0 if dh > 0.0 else (-1.0 if dh < 0.0 else 0.0)
    domw = (swp * mw - adw * _dmax(wg, wp)) / (mw * mw)
    domh = (shp * mh - adh * _dmax(hg, hp)) / (mh * mh)
    cow = theta * pow(bow, theta - 1.0) * eow
    coh = theta * pow(boh, theta - 1.0) * eoh

    delta = (1.0 - ex) + (1.0 - ey)
    value += (delta + omega) * 0.5
    d0 += (dd0 + cow * -domw) * 0.5
    d1 += (dd1 + coh * -domh) * 0.5
    d2 += (dd2 + cow * domw) * 0.5
    d3 += (dd3 + coh * domh) * 0.5
    out[0] = value
    out[1] = d0
    out[2] = d1
    out[3] = d2
    out[4] = d3
    return 0


cdef inline void _repair_axis_c(double* lo, double* hi) nogil:
    cdef double l = lo[0]
    cdef double h = hi[0]
    cdef double tmp, c
    if l < 0.0:
        l = 0.0
    elif l > 1.0:
        l = 1.0
    if h < 0.0:
        h = 0.0
    elif h > 1.0:
        h = 1.0
    if l > h:
        tmp = l
        l = h
        h = tmp
    if h - l < _MIN_SIDE:
        c = (l + h) * 0.5
        l = c - _EXPAND
        h = c + _EXPAND
        if l < 0.0:
            h = h - l
            l = 0.0
        elif h > 1.0:
            l = l - (h - 1.0)
            h = 1.0
    lo[0] = l
    hi[0] = h


cdef inline void _project_axis_c(double* lo, double* hi) nogil:
    cdef double l = lo[0]
    cdef double h = hi[0]
    cdef double c
    if l < 0.0:
        l = 0.0
    elif l > 1.0:
        l = 1.0
    if h < 0.0:
        h = 0.0
    elif h > 1.0:
        h = 1.0
    if h - l < _MIN_SIDE:
        c = (l + h) * 0.5
        l = c - _EXPAND
        h = c + _EXPAND
        if l < 0.0:
            h = h - l
            l = 0.0
        elif h > 1.0:
            l = l - (h - 1.0)
            h = 1.0
    lo[0] = l
    hi[0] = h


def eval_one(int kind, double gx0, double gy0, double gx1, double gy1,
             double px0, double py0, double px1, double py1,
             double theta, double alpha_override):
    """Loss value and gradient for one (truth, prediction) pair."""
    cdef double out[5]
    if _eval_core(kind, gx0, gy0, gx1, gy1, px0, py0, px1, py1,
                  theta, alpha_override, out) != 0:
        raise ValueError(f"unknown loss kind code {kind}")
    return out[0], out[1], out[2], out[3], out[4]


def smooth_axis_terms(double g0, double g1, double p0, double p1):
    """All intermediate quantities of the smoothing penalty on one axis."""
    cdef double up_r, up, vp_r, vp, un_r, un, vn_r, vn
    cdef double dpos, dneg, gc, dc, inv2dc, wpos, wneg, ell
    up_r = p0 - g1
    up = up_r if up_r > 0.0 else 0.0
    vp_r = p1 - g1
    vp = vp_r if vp_r > 0.0 else 0.0
    un_r = g0 - p0
    un = un_r if un_r > 0.0 else 0.0
    vn_r = g0 - p1
    vn = vn_r if vn_r > 0.0 else 0.0
    dpos = vp - up
    dneg = un - vn
    gc = (g0 + g1) * 0.5
    dc = gc if gc > 1.0 - gc else 1.0 - gc
    inv2dc = 1.0 / (2.0 * dc)
    wpos = 1.0 - (up + vp) * inv2dc
    wneg = 1.0 - (un + vn) * inv2dc
    ell = (1.0 - dpos) * wpos + (1.0 - dneg) * wneg
    return (up, vp, dpos, un, vn, dneg, dc, wpos, wneg, ell)


def iou_one(double ax0, double ay0, double ax1, double ay1,
            double bx0, double by0, double bx1, double by1):
    """Plain intersection-over-union of two boxes."""
    return _iou_core(ax0, ay0, ax1, ay1, bx0, by0, bx1, by1)


def smooth_penalty_one(double gx0, double gy0, double gx1, double gy1,
                       double px0, double py0, double px1, double py1):
    """Smoothing penalty value: 1 - ell_x * ell_y / 4."""
    return _smooth_penalty_core(gx0, gy0, gx1, gy1, px0, py0, px1, py1)


def ciou_alpha(double gx0, double gy0, double gx1, double gy1,
               double px0, double py0, double px1, double py1):
    """The aspect-ratio tradeoff coefficient used by the complete-IoU loss."""
    cdef double iou_v, whg, whp, q, v, denom
    iou_v = _iou_core(gx0, gy0, gx1, gy1, px0, py0, px1, py1)
    whg = (gx1 - gx0) / (gy1 - gy0)
    whp = (px1 - px0) / (py1 - py0)
    q = atan(whg) - atan(whp)
    v = _FOUR_OVER_PI2 * q * q
    denom = (1.0 - iou_v) + v
    if denom > 0.0:
        return v / denom
    return 0.0


def siou_parts(double gx0, double gy0, double gx1, double gy1,
               double px0, double py0, double px1, double py1, double theta):
    """Diagnostic decomposition of the scylla-IoU penalty."""
    cdef double pcx, pcy, gcx, gcy, ddx, ddy, sigma, z, st, lam, gam
    cdef double ecw, ech, rx, ry, delta, wg, hg, wp, hp, omw, omh, omega
    pcx = (px0 + px1) * 0.5
    pcy = (py0 + py1) * 0.5
    gcx = (gx0 + gx1) * 0.5
    gcy = (gy0 + gy1) * 0.5
    ddx = pcx - gcx
    ddy = pcy - gcy
    sigma = sqrt(ddx * ddx + ddy * ddy)
    if sigma < _SIGMA_EPS:
        lam = 0.0
    else:
        z = fabs(ddy) / sigma
        if z > 1.0:
            z = 1.0
        st = sin(asin(z) - _PI_OVER_4)
        lam = 1.0 - 2.0 * st * st
    gam = 2.0 - lam
    ecw = (gx1 if gx1 > px1 else px1) - (gx0 if gx0 < px0 else px0)
    ech = (gy1 if gy1 > py1 else py1) - (gy0 if gy0 < py0 else py0)
    rx = ddx / ecw
    ry = ddy / ech
    delta = (1.0 - exp(-gam * (rx * rx))) + (1.0 - exp(-gam * (ry * ry)))
    wg = gx1 - gx0
    hg = gy1 - gy0
    wp = px1 - px0
    hp = py1 - py0
    omw = fabs(wp - wg) / (wp if wp > wg else wg)
    omh = fabs(hp - hg) / (hp if hp > hg else hg)
    omega = pow(1.0 - exp(-omw), theta) + pow(1.0 - exp(-omh), theta)
    return lam, gam, delta, omega, sigma


def perturb_repair(double bx0, double by0, double bx1, double by1, double mu,
                   double u0, double u1, double u2, double u3):
    """Jitter each corner by uniform noise scaled by the matching side."""
    cdef double w = bx1 - bx0
    cdef double h = by1 - by0
    cdef double nx0 = bx0 + (2.0 * u0 - 1.0) * (mu * w)
    cdef double ny0 = by0 + (2.0 * u1 - 1.0) * (mu * h)
    cdef double nx1 = bx1 + (2.0 * u2 - 1.0) * (mu * w)
    cdef double ny1 = by1 + (2.0 * u3 - 1.0) * (mu * h)
    _repair_axis_c(&nx0, &nx1)
    _repair_axis_c(&ny0, &ny1)
    return nx0, ny0, nx1, ny1


def project_box(double x0, double y0, double x1, double y1):
    """Restore box invariants after a gradient step."""
    _project_axis_c(&x0, &x1)
    _project_axis_c(&y0, &y1)
    return x0, y0, x1, y1


def noisy_mean_eval(int kind, double gx0, double gy0, double gx1, double gy1,
                    double px0, double py0, double px1, double py1,
                    double theta, double mu, double[:, ::1] raws):
    """Average loss value/gradient over noisy replicas of the truth box."""
    cdef Py_ssize_t n = raws.shape[0]
    cdef Py_ssize_t i
    cdef double acc_v = 0.0
    cdef double acc0 = 0.0
    cdef double acc1 = 0.0
    cdef double acc2 = 0.0
    cdef double acc3 = 0.0
    cdef double w, h, qx0, qy0, qx1, qy1, inv
    cdef double out[5]
    cdef int bad = 0
    if kind < 0 or kind > 5:
        raise ValueError(f"unknown loss kind code {kind}")
    if n <= 0:
        raise ValueError("need at least one noise replica")
    with nogil:
        w = gx1 - gx0
        h = gy1 - gy0
        for i in range(n):
            qx0 = gx0 + (2.0 * raws[i, 0] - 1.0) * (mu * w)
            qy0 = gy0 + (2.0 * raws[i, 1] - 1.0) * (mu * h)
            qx1 = gx1 + (2.0 * raws[i, 2] - 1.0) * (mu * w)
            qy1 = gy1 + (2.0 * raws[i, 3] - 1.0) * (mu * h)
            _repair_axis_c(&qx0, &qx1)
            _repair_axis_c(&qy0, &qy1)
            bad += _eval_core(kind, qx0, qy0, qx1, qy1, px0, py0, px1, py1,
                              theta, -1.0, out)
            acc_v += out[0]
            acc0 += out[1]
            acc1 += out[2]
            acc2 += out[3]
            acc3 += out[4]
        inv = 1.0 / n
    return acc_v * inv, acc0 * inv, acc1 * inv, acc2 * inv, acc3 * inv


def values_batch(int kind, gts, preds, double theta):
    """Loss values for aligned (n, 4) arrays of truth and prediction boxes."""
    cdef double[:, ::1] g = np.ascontiguousarray(gts, dtype=np.float64)
    cdef double[:, ::1] p = np.ascontiguousarray(preds, dtype=np.float64)
    cdef Py_ssize_t n = g.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double buf[5]
    cdef Py_ssize_t i
    if kind < 0 or kind > 5:
        raise ValueError(f"unknown loss kind code {kind}")
    with nogil:
        for i in range(n):
            _eval_core(kind, g[i, 0], g[i, 1], g[i, 2], g[i, 3],
                       p[i, 0], p[i, 1], p[i, 2], p[i, 3], theta, -1.0, buf)
            out[i] = buf[0]
    return out_arr


def grads_batch(int kind, gts, preds, double theta):
    """Loss values and gradients for aligned (n, 4) arrays of boxes."""
    cdef double[:, ::1] g = np.ascontiguousarray(gts, dtype=np.float64)
    cdef double[:, ::1] p = np.ascontiguousarray(preds, dtype=np.float64)
    cdef Py_ssize_t n = g.shape[0]
    values_arr = np.empty(n, dtype=np.float64)
    grads_arr = np.empty((n, 4), dtype=np.float64)
    cdef double[::1] values = values_arr
    cdef double[:, ::1] grads = grads_arr
    cdef double buf[5]
    cdef Py_ssize_t i
    if kind < 0 or kind > 5:
        raise ValueError(f"unknown loss kind code {kind}")
    with nogil:
        for i in range(n):
            _eval_core(kind, g[i, 0], g[i, 1], g[i, 2], g[i, 3],
                       p[i, 0], p[i, 1], p[i, 2], p[i, 3], theta, -1.0, buf)
            values[i] = buf[0]
            grads[i, 0] = buf[1]
            grads[i, 1] = buf[2]
            grads[i, 2] = buf[3]
            grads[i, 3] = buf[4]
    return values_arr, grads_arr


def smooth_penalty_batch(gts, preds):
    """Smoothing penalty values for aligned (n, 4) arrays of boxes."""
    cdef double[:, ::1] g = np.ascontiguousarray(gts, dtype=np.float64)
    cdef double[:, ::1] p = np.ascontiguousarray(preds, dtype=np.float64)
    cdef Py_ssize_t n = g.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            out[i] = _smooth_penalty_core(g[i, 0], g[i, 1], g[i, 2], g[i, 3],
                                          p[i, 0], p[i, 1], p[i, 2], p[i, 3])
    return out_arr


def iou_batch(a, b):
    """Plain IoU for aligned (n, 4) arrays of boxes."""
    cdef double[:, ::1] aa = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[:, ::1] bb = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t n = aa.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            out[i] = _iou_core(aa[i, 0], aa[i, 1], aa[i, 2], aa[i, 3],
                               bb[i, 0], bb[i, 1], bb[i, 2], bb[i, 3])
    return out_arr
