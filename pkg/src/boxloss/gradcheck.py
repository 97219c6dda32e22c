"""Independent finite-difference oracle certifying the analytic gradients.

Central differences over the loss value are compared against the analytic
gradient on seeded random pairs.  Pairs sitting within :data:`KINK_RADIUS`
of a nondifferentiable point (any clamped-offset argument, min/max tie,
overlap boundary, or branch variable) are skipped and counted: one-sided
subgradient conventions make the comparison meaningless there.

For the complete-IoU loss the difference quotient is taken with the
aspect-ratio coefficient frozen at the unperturbed point, because that
coefficient is held constant in the defined gradient; differencing the
refitted value would measure a different function.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from boxloss.backend import kernels as _k
from boxloss.geom import BBox, random_box
from boxloss.losses import LossKind, SIoUParams

__all__ = [
    "DEFAULT_STEP",
    "DEFAULT_TOL",
    "KINK_RADIUS",
    "GradCheckFailure",
    "GradCheckReport",
    "finite_diff_grad",
    "kink_margin",
    "run_gradcheck",
]

DEFAULT_STEP = 1e-6
DEFAULT_TOL = 1e-4
KINK_RADIUS = 1e-5

# relative error floor: |a - n| / max(|a|, |n|, _REL_FLOOR)
_REL_FLOOR = 1e-8

_DEFAULT_SIOU = SIoUParams()


@dataclass(frozen=True)
class GradCheckFailure:
    gt: BBox
    pred: BBox
    component: int
    analytic: float
    numeric: float
    rel_err: float


@dataclass
class GradCheckReport:
    """Outcome of one certification run; failures empty iff it passed."""

    kind: LossKind
    samples: int
    seed: int
    tol: float
    step: float
    max_rel_err: float = 0.0
    compared: int = 0
    skipped_kink_count: int = 0
    failures: list[GradCheckFailure] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def finite_diff_grad(
    kind: LossKind,
    gt: BBox,
    pred: BBox,
    h: float = DEFAULT_STEP,
    siou_params: SIoUParams = _DEFAULT_SIOU,
) -> tuple[float, float, float, float]:
    """Central-difference gradient of the loss value at (gt, pred).

    Raises ValueError when a perturbed prediction violates the box
    invariants; callers resample.
    """
    g = gt.as_tuple()
    p = list(pred.as_tuple())
    alpha = -1.0
    if kind is LossKind.CIOU:
        alpha = _k.ciou_alpha(*g, *pred.as_tuple())
    code = kind.kernel_code
    theta = siou_params.theta
    out = []
    for j in range(4):
        plus = list(p)
        minus = list(p)
        plus[j] += h
        minus[j] -= h
        BBox(*plus)  # raises if the perturbation leaves the valid domain
        BBox(*minus)
        f_plus = _k.eval_one(code, *g, *plus, theta, alpha)[0]
        f_minus = _k.eval_one(code, *g, *minus, theta, alpha)[0]
        out.append((f_plus - f_minus) / (2.0 * h))
    return tuple(out)


def kink_margin(kind: LossKind, gt: BBox, pred: BBox) -> float:
    """Distance of the pair to the nearest nondifferentiable configuration.

    Conservative: returns the minimum over every quantity whose sign or
    order controls a branch in the loss of the given kind.
    """
    gx0, gy0, gx1, gy1 = gt.as_tuple()
    px0, py0, px1, py1 = pred.as_tuple()
    vals = [
        # overlap boundaries
        abs(min(gx1, px1) - max(gx0, px0)),
        abs(min(gy1, py1) - max(gy0, py0)),
        # min/max ties in intersection and enclosing box
        abs(px0 - gx0),
        abs(px1 - gx1),
        abs(py0 - gy0),
        abs(py1 - gy1),
    ]
    if kind is LossKind.SMOOTH_IOU:
        # the remaining clamped-offset arguments
        vals += [
            abs(px0 - gx1),
            abs(px1 - gx0),
            abs(py0 - gy1),
            abs(py1 - gy0),
        ]
    elif kind is LossKind.SIOU:
        ddx = (px0 + px1) * 0.5 - (gx0 + gx1) * 0.5
        ddy = (py0 + py1) * 0.5 - (gy0 + gy1) * 0.5
        vals += [
            abs(ddx),
            abs(ddy),
            math.hypot(ddx, ddy),
            abs((px1 - px0) - (gx1 - gx0)),
            abs((py1 - py0) - (gy1 - gy0)),
        ]
    return min(vals)


def run_gradcheck(
    kind: LossKind,
    n: int,
    seed: int,
    tol: float = DEFAULT_TOL,
    h: float = DEFAULT_STEP,
    siou_params: SIoUParams = _DEFAULT_SIOU,
) -> GradCheckReport:
    """Compare analytic and numeric gradients on n seeded random pairs.

    Deterministic given the seed, including the exact sample sequence.
    Pairs within KINK_RADIUS of a kink are skipped and counted.
    """
    if n < 0:
        raise ValueError("sample count must be non-negative")
    report = GradCheckReport(kind=kind, samples=n, seed=seed, tol=tol, step=h)
    rng = random.Random(seed)
    code = kind.kernel_code
    theta = siou_params.theta
    margin = 4.0 * h  # keep every perturbed box inside the valid domain
    for _ in range(n):
        gt = random_box(rng, min_side=0.05, max_side=0.8, margin=margin)
        pred = random_box(rng, min_side=0.05, max_side=0.8, margin=margin)
        if kink_margin(kind, gt, pred) < KINK_RADIUS:
            report.skipped_kink_count += 1
            continue
        analytic = _k.eval_one(code, *gt.as_tuple(), *pred.as_tuple(), theta, -1.0)[1:]
        numeric = finite_diff_grad(kind, gt, pred, h=h, siou_params=siou_params)
        for j in range(4):
            a = analytic[j]
            m = numeric[j]
            rel = abs(a - m) / max(abs(a), abs(m), _REL_FLOOR)
            report.compared += 1
            if rel > report.max_rel_err:
                report.max_rel_err = rel
            if rel > tol:
                report.failures.append(
                    GradCheckFailure(
                        gt=gt, pred=pred, component=j, analytic=a, numeric=m, rel_err=rel
                    )
                )
    return report
