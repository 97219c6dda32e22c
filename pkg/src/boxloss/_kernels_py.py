"""Pure-Python loss kernels.

Reference implementation of the evaluation kernels behind the public loss
API.  ``boxloss._speedups`` is a line-for-line Cython transcription of this
module; the two must stay semantically identical, including the order of
floating-point operations, so that results are bit-identical regardless of
which backend is active (the extension is compiled with -ffp-contract=off
for this reason).

Conventions baked into every kernel:

* A box is four scalars (x_lo, y_lo, x_hi, y_hi) on the unit square.
* Gradients are with respect to the predicted box's four corners, in that
  same order.
* d/dz max(z, 0) is 0 at z == 0 (inactive branch).
* The derivative of min(a, b) / max(a, b) at an exact tie is split 0.5 to
  each argument.  This makes every loss gradient exactly zero when the
  boxes coincide, so a descent started at the optimum stays there.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "python"

KIND_IOU = 0
KIND_GIOU = 1
KIND_DIOU = 2
KIND_CIOU = 3
KIND_SIOU = 4
KIND_SMOOTH = 5

MIN_SIDE = 1e-6
_EXPAND = 1e-6  # half-width used when repairing a collapsed axis
_SIGMA_EPS = 1e-9  # below this center distance the angle cost is defined as 0

_PI_OVER_4 = math.pi / 4.0
_FOUR_OVER_PI2 = 4.0 / (math.pi * math.pi)


def _dmin(a: float, b: float) -> float:
    # d min(a, b) / d b; ties split evenly
    if b < a:
        return 1.0
    if b == a:
        return 0.5
    return 0.0


def _dmax(a: float, b: float) -> float:
    # d max(a, b) / d b; ties split evenly
    if b > a:
        return 1.0
    if b == a:
        return 0.5
    return 0.0


def _smooth_axis_grad(g0, g1, p0, p1):
    """One axis of the smoothing penalty: aggregate ell and d ell/d(p0, p1).

    The positive side measures how far the prediction overshoots the truth's
    upper edge, the negative side how far it undershoots the lower edge; both
    are discounted by how much room is left before the domain border.
    """
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
    rup0 = 1.0 if up_r > 0.0 else 0.0
    rvp1 = 1.0 if vp_r > 0.0 else 0.0
    run0 = 1.0 if un_r > 0.0 else 0.0
    rvn1 = 1.0 if vn_r > 0.0 else 0.0
    dell0 = rup0 * (wpos - (1.0 - dpos) * inv2dc) + run0 * (wneg + (1.0 - dneg) * inv2dc)
    dell1 = -rvp1 * (wpos + (1.0 - dpos) * inv2dc) - rvn1 * (wneg - (1.0 - dneg) * inv2dc)
    return ell, dell0, dell1


def smooth_axis_terms(g0: float, g1: float, p0: float, p1: float):
    """All intermediate quantities of the smoothing penalty on one axis.

    Returns (u_pos, v_pos, d_pos, u_neg, v_neg, d_neg, d_c, w_pos, w_neg, ell).
    """
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


def iou_one(ax0, ay0, ax1, ay1, bx0, by0, bx1, by1) -> float:
    """Plain intersection-over-union of two boxes."""
    ox = (ax1 if ax1 < bx1 else bx1) - (ax0 if ax0 > bx0 else bx0)
    oy = (ay1 if ay1 < by1 else by1) - (ay0 if ay0 > by0 else by0)
    if ox <= 0.0 or oy <= 0.0:
        return 0.0
    inter = ox * oy
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    return inter / union


def smooth_penalty_one(gx0, gy0, gx1, gy1, px0, py0, px1, py1) -> float:
    """Smoothing penalty value: 1 - ell_x * ell_y / 4."""
    ellx, _, _ = _smooth_axis_grad(gx0, gx1, px0, px1)
    elly, _, _ = _smooth_axis_grad(gy0, gy1, py0, py1)
    return 1.0 - ellx * elly * 0.25


def ciou_alpha(gx0, gy0, gx1, gy1, px0, py0, px1, py1) -> float:
    """The aspect-ratio tradeoff coefficient used by the complete-IoU loss."""
    iou_v = iou_one(gx0, gy0, gx1, gy1, px0, py0, px1, py1)
    whg = (gx1 - gx0) / (gy1 - gy0)
    whp = (px1 - px0) / (py1 - py0)
    q = math.atan(whg) - math.atan(whp)
    v = _FOUR_OVER_PI2 * q * q
    denom = (1.0 - iou_v) + v
    if denom > 0.0:
        return v / denom
    return 0.0


def siou_parts(gx0, gy0, gx1, gy1, px0, py0, px1, py1, theta):
    """Diagnostic decomposition of the scylla-IoU penalty.

    Returns (angle_cost, gamma, distance_cost, shape_cost, center_distance).
    """
    pcx = (px0 + px1) * 0.5
    pcy = (py0 + py1) * 0.5
    gcx = (gx0 + gx1) * 0.5
    gcy = (gy0 + gy1) * 0.5
    ddx = pcx - gcx
    ddy = pcy - gcy
    sigma = math.sqrt(ddx * ddx + ddy * ddy)
    if sigma < _SIGMA_EPS:
        lam = 0.0
    else:
        z = math.fabs(ddy) / sigma
        if z > 1.0:
            z = 1.0
        st = math.sin(math.asin(z) - _PI_OVER_4)
        lam = 1.0 - 2.0 * st * st
    gam = 2.0 - lam
    ecw = (gx1 if gx1 > px1 else px1) - (gx0 if gx0 < px0 else px0)
    ech = (gy1 if gy1 > py1 else py1) - (gy0 if gy0 < py0 else py0)
    rx = ddx / ecw
    ry = ddy / ech
    delta = (1.0 - math.exp(-gam * (rx * rx))) + (1.0 - math.exp(-gam * (ry * ry)))
    wg = gx1 - gx0
    hg = gy1 - gy0
    wp = px1 - px0
    hp = py1 - py0
    omw = math.fabs(wp - wg) / (wp if wp > wg else wg)
    omh = math.fabs(hp - hg) / (hp if hp > hg else hg)
    omega = math.pow(1.0 - math.exp(-omw), theta) + math.pow(1.0 - math.exp(-omh), theta)
    return lam, gam, delta, omega, sigma


def eval_one(kind, gx0, gy0, gx1, gy1, px0, py0, px1, py1, theta, alpha_override):
    """Loss value and gradient for one (truth, prediction) pair.

    Returns (value, d0, d1, d2, d3) with the gradient taken with respect to
    the prediction's (x_lo, y_lo, x_hi, y_hi).  ``alpha_override`` >= 0
    pins the complete-IoU tradeoff coefficient (used by the finite-difference
    checker, which must difference the same function the gradient defines);
    pass -1.0 for normal evaluation.
    """
    if kind < KIND_IOU or kind > KIND_SMOOTH:
        raise ValueError(f"unknown loss kind code {kind}")
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
    union = ag + ap - inter
    iou_v = inter / union

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
    uu = union * union
    value = 1.0 - iou_v
    d0 = -(di0 * union - inter * du0) / uu
    d1 = -(di1 * union - inter * du1) / uu
    d2 = -(di2 * union - inter * du2) / uu
    d3 = -(di3 * union - inter * du3) / uu

    if kind == KIND_IOU:
        return value, d0, d1, d2, d3

    if kind == KIND_SMOOTH:
        ellx, dex0, dex2 = _smooth_axis_grad(gx0, gx1, px0, px1)
        elly, dey1, dey3 = _smooth_axis_grad(gy0, gy1, py0, py1)
        value += 1.0 - ellx * elly * 0.25
        d0 += -0.25 * elly * dex0
        d1 += -0.25 * ellx * dey1
        d2 += -0.25 * elly * dex2
        d3 += -0.25 * ellx * dey3
        return value, d0, d1, d2, d3

    # remaining kinds all use the enclosing box
    cw = (gx1 if gx1 > px1 else px1) - (gx0 if gx0 < px0 else px0)
    ch = (gy1 if gy1 > py1 else py1) - (gy0 if gy0 < py0 else py0)
    dcw0 = -_dmin(gx0, px0)
    dcw2 = _dmax(gx1, px1)
    dch1 = -_dmin(gy0, py0)
    dch3 = _dmax(gy1, py1)

    if kind == KIND_GIOU:
        carea = cw * ch
        cc = carea * carea
        value += (carea - union) / carea
        d0 += -(du0 * carea - union * (dcw0 * ch)) / cc
        d1 += -(du1 * carea - union * (cw * dch1)) / cc
        d2 += -(du2 * carea - union * (dcw2 * ch)) / cc
        d3 += -(du3 * carea - union * (cw * dch3)) / cc
        return value, d0, d1, d2, d3

    pcx = (px0 + px1) * 0.5
    pcy = (py0 + py1) * 0.5
    gcx = (gx0 + gx1) * 0.5
    gcy = (gy0 + gy1) * 0.5
    ddx = pcx - gcx
    ddy = pcy - gcy

    if kind == KIND_DIOU or kind == KIND_CIOU:
        rho2 = ddx * ddx + ddy * ddy
        c2 = cw * cw + ch * ch
        c4 = c2 * c2
        value += rho2 / c2
        d0 += (ddx * c2 - rho2 * (2.0 * cw * dcw0)) / c4
        d1 += (ddy * c2 - rho2 * (2.0 * ch * dch1)) / c4
        d2 += (ddx * c2 - rho2 * (2.0 * cw * dcw2)) / c4
        d3 += (ddy * c2 - rho2 * (2.0 * ch * dch3)) / c4
        if kind == KIND_DIOU:
            return value, d0, d1, d2, d3

        whg = wg / hg
        whp = wp / hp
        q = math.atan(whg) - math.atan(whp)
        v = _FOUR_OVER_PI2 * q * q
        if alpha_override >= 0.0:
            alpha = alpha_override
        else:
            denom = (1.0 - iou_v) + v
            alpha = v / denom if denom > 0.0 else 0.0
        value += alpha * v
        # dv/d(pred) through the prediction's aspect ratio only; alpha is
        # held constant in the derivative.
        k = -2.0 * _FOUR_OVER_PI2 * q / (1.0 + whp * whp)
        inv_hp = 1.0 / hp
        t = wp * inv_hp * inv_hp
        d0 += alpha * (k * -inv_hp)
        d1 += alpha * (k * t)
        d2 += alpha * (k * inv_hp)
        d3 += alpha * (k * -t)
        return value, d0, d1, d2, d3

    # scylla IoU: angle, distance and shape costs
    sigma2 = ddx * ddx + ddy * ddy
    sigma = math.sqrt(sigma2)
    adx = math.fabs(ddx)
    ady = math.fabs(ddy)
    if sigma < _SIGMA_EPS:
        lam = 0.0
        dl0 = 0.0
        dl1 = 0.0
    else:
        z = ady / sigma
        if z > 1.0:
            z = 1.0
        st = math.sin(math.asin(z) - _PI_OVER_4)
        lam = 1.0 - 2.0 * st * st
        # identical derivative via lam = 2*|dx|*|dy|/sigma^2, which stays
        # bounded where the arcsin form does not
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
    ex = math.exp(-gam * rho_x)
    ey = math.exp(-gam * rho_y)
    drx0 = 2.0 * rx * ((0.5 * cw - ddx * dcw0) * (inv_cw * inv_cw))
    drx2 = 2.0 * rx * ((0.5 * cw - ddx * dcw2) * (inv_cw * inv_cw))
    dry1 = 2.0 * ry * ((0.5 * ch - ddy * dch1) * (inv_ch * inv_ch))
    dry3 = 2.0 * ry * ((0.5 * ch - ddy * dch3) * (inv_ch * inv_ch))
    dd0 = ex * (gam * drx0 - rho_x * dl0) - ey * (rho_y * dl0)
    dd1 = ey * (gam * dry1 - rho_y * dl1) - ex * (rho_x * dl1)
    dd2 = ex * (gam * drx2 - rho_x * dl0) - ey * (rho_y * dl0)
    dd3 = ey * (gam * dry3 - rho_y * dl1) - ex * (rho_x * dl1)

    dw = wp - wg
    adw = math.fabs(dw)
    mw = wp if wp > wg else wg
    omw = adw / mw
    dh = hp - hg
    adh = math.fabs(dh)
    mh = hp if hp > hg else hg
    omh = adh / mh
    eow = math.exp(-omw)
    eoh = math.exp(-omh)
    bow = 1.0 - eow
    boh = 1.0 - eoh
    omega = math.pow(bow, theta) + math.pow(boh, theta)
    swp = 1.0 if dw > 0.0 else (-1.0 if dw < 0.0 else 0.0)
    shp = 1.0 if dh > 0.0 else (-1.0 if dh < 0.0 else 0.0)
    domw = (swp * mw - adw * _dmax(wg, wp)) / (mw * mw)
    domh = (shp * mh - adh * _dmax(hg, hp)) / (mh * mh)
    cow = theta * math.pow(bow, theta - 1.0) * eow
    coh = theta * math.pow(boh, theta - 1.0) * eoh

    delta = (1.0 - ex) + (1.0 - ey)
    value += (delta + omega) * 0.5
    d0 += (dd0 + cow * -domw) * 0.5
    d1 += (dd1 + coh * -domh) * 0.5
    d2 += (dd2 + cow * domw) * 0.5
    d3 += (dd3 + coh * domh) * 0.5
    return value, d0, d1, d2, d3


def _repair_axis(lo, hi):
    # clamp, swap if inverted, then restore a minimal side symmetrically
    if lo < 0.0:
        lo = 0.0
    elif lo > 1.0:
        lo = 1.0
    if hi < 0.0:
        hi = 0.0
    elif hi > 1.0:
        hi = 1.0
    if lo > hi:
        lo, hi = hi, lo
    if hi - lo < MIN_SIDE:
        c = (lo + hi) * 0.5
        lo = c - _EXPAND
        hi = c + _EXPAND
        if lo < 0.0:
            hi = hi - lo
            lo = 0.0
        elif hi > 1.0:
            lo = lo - (hi - 1.0)
            hi = 1.0
    return lo, hi


def _project_axis(lo, hi):
    # clamp, then restore a minimal side symmetrically (no swap: an inverted
    # axis collapses to a minimal box around its midpoint)
    if lo < 0.0:
        lo = 0.0
    elif lo > 1.0:
        lo = 1.0
    if hi < 0.0:
        hi = 0.0
    elif hi > 1.0:
        hi = 1.0
    if hi - lo < MIN_SIDE:
        c = (lo + hi) * 0.5
        lo = c - _EXPAND
        hi = c + _EXPAND
        if lo < 0.0:
            hi = hi - lo
            lo = 0.0
        elif hi > 1.0:
            lo = lo - (hi - 1.0)
            hi = 1.0
    return lo, hi


def perturb_repair(bx0, by0, bx1, by1, mu, u0, u1, u2, u3):
    """Jitter each corner by uniform noise scaled by the matching side.

    u0..u3 are uniform draws on [0, 1) for (x_lo, y_lo, x_hi, y_hi); each
    coordinate moves by (2u - 1) * mu * side where side is the width for x
    coordinates and the height for y coordinates.  The result is repaired to
    a valid box (clamp, swap, minimal-side expansion).
    """
    w = bx1 - bx0
    h = by1 - by0
    nx0 = bx0 + (2.0 * u0 - 1.0) * (mu * w)
    ny0 = by0 + (2.0 * u1 - 1.0) * (mu * h)
    nx1 = bx1 + (2.0 * u2 - 1.0) * (mu * w)
    ny1 = by1 + (2.0 * u3 - 1.0) * (mu * h)
    x0, x1 = _repair_axis(nx0, nx1)
    y0, y1 = _repair_axis(ny0, ny1)
    return x0, y0, x1, y1


def project_box(x0, y0, x1, y1):
    """Restore box invariants after a gradient step."""
    x0, x1 = _project_axis(x0, x1)
    y0, y1 = _project_axis(y0, y1)
    return x0, y0, x1, y1


def noisy_mean_eval(kind, gx0, gy0, gx1, gy1, px0, py0, px1, py1, theta, mu, raws):
    """Average loss value/gradient over noisy replicas of the truth box.

    ``raws`` is an (n, 4) array of uniform draws on [0, 1); row i produces
    one perturbed-and-repaired replica of the truth box via
    :func:`perturb_repair`, and the value and gradient are averaged over
    replicas in row order.
    """
    rows = raws.tolist()
    acc_v = 0.0
    acc0 = 0.0
    acc1 = 0.0
    acc2 = 0.0
    acc3 = 0.0
    for u0, u1, u2, u3 in rows:
        qx0, qy0, qx1, qy1 = perturb_repair(gx0, gy0, gx1, gy1, mu, u0, u1, u2, u3)
        v, d0, d1, d2, d3 = eval_one(
            kind, qx0, qy0, qx1, qy1, px0, py0, px1, py1, theta, -1.0
        )
        acc_v += v
        acc0 += d0
        acc1 += d1
        acc2 += d2
        acc3 += d3
    inv = 1.0 / len(rows)
    return acc_v * inv, acc0 * inv, acc1 * inv, acc2 * inv, acc3 * inv


def values_batch(kind, gts, preds, theta):
    """Loss values for aligned (n, 4) arrays of truth and prediction boxes."""
    g = np.ascontiguousarray(gts, dtype=np.float64)
    p = np.ascontiguousarray(preds, dtype=np.float64)
    n = g.shape[0]
    out = np.empty(n, dtype=np.float64)
    gl = g.tolist()
    pl = p.tolist()
    for i in range(n):
        gx0, gy0, gx1, gy1 = gl[i]
        px0, py0, px1, py1 = pl[i]
        out[i] = eval_one(kind, gx0, gy0, gx1, gy1, px0, py0, px1, py1, theta, -1.0)[0]
    return out


def grads_batch(kind, gts, preds, theta):
    """Loss values and gradients for aligned (n, 4) arrays of boxes."""
    g = np.ascontiguousarray(gts, dtype=np.float64)
    p = np.ascontiguousarray(preds, dtype=np.float64)
    n = g.shape[0]
    values = np.empty(n, dtype=np.float64)
    grads = np.empty((n, 4), dtype=np.float64)
    gl = g.tolist()
    pl = p.tolist()
    for i in range(n):
        gx0, gy0, gx1, gy1 = gl[i]
        px0, py0, px1, py1 = pl[i]
        v, d0, d1, d2, d3 = eval_one(
            kind, gx0, gy0, gx1, gy1, px0, py0, px1, py1, theta, -1.0
        )
        values[i] = v
        grads[i, 0] = d0
        grads[i, 1] = d1
        grads[i, 2] = d2
        grads[i, 3] = d3
    return values, grads


def smooth_penalty_batch(gts, preds):
    """Smoothing penalty values for aligned (n, 4) arrays of boxes."""
    g = np.ascontiguousarray(gts, dtype=np.float64)
    p = np.ascontiguousarray(preds, dtype=np.float64)
    n = g.shape[0]
    out = np.empty(n, dtype=np.float64)
    gl = g.tolist()
    pl = p.tolist()
    for i in range(n):
        gx0, gy0, gx1, gy1 = gl[i]
        px0, py0, px1, py1 = pl[i]
        out[i] = smooth_penalty_one(gx0, gy0, gx1, gy1, px0, py0, px1, py1)
    return out


def iou_batch(a, b):
    """Plain IoU for aligned (n, 4) arrays of boxes."""
    aa = np.ascontiguousarray(a, dtype=np.float64)
    bb = np.ascontiguousarray(b, dtype=np.float64)
    n = aa.shape[0]
    out = np.empty(n, dtype=np.float64)
    al = aa.tolist()
    bl = bb.tolist()
    for i in range(n):
        ax0, ay0, ax1, ay1 = al[i]
        bx0, by0, bx1, by1 = bl[i]
        out[i] = iou_one(ax0, ay0, ax1, ay1, bx0, by0, bx1, by1)
    return out
