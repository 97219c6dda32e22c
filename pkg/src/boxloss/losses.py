"""The six box-regression losses with exact analytic gradients.

Every loss has the shape ``(1 - IoU) + penalty`` and returns a
:class:`LossEval` holding the scalar value and the gradient with respect to
the predicted box's corners (x_lo, y_lo, x_hi, y_hi).  The penalties:

* ``IOU``        - none.  Zero gradient wherever the boxes do not overlap.
* ``GIOU``       - (|C| - |union|) / |C| with C the enclosing box.
* ``DIOU``       - squared center distance over squared enclosing diagonal.
* ``CIOU``       - the distance penalty plus an aspect-ratio term alpha * v;
                   alpha is held constant during differentiation.
* ``SIOU``       - angle, distance and shape costs, (delta + omega) / 2.
* ``SMOOTH_IOU`` - a weighted aggregate of the per-axis offsets between the
                   boxes that grows toward the image border, 1 - ell_x*ell_y/4.
                   Nonzero gradient over the whole domain.

Gradient conventions (shared with the finite-difference checker):
``d/dz max(z, 0)`` is 0 at z == 0; min/max ties split their derivative
evenly, which makes every gradient exactly zero at a perfect match.

All functions are pure and thread-safe; heavy lifting happens in the
selected kernel backend.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from boxloss.backend import kernels as _k
from boxloss.geom import AxisInterval, BBox

__all__ = [
    "LossKind",
    "AxisSmoothTerms",
    "SIoUParams",
    "LossEval",
    "axis_smooth_terms",
    "smooth_penalty",
    "smooth_loss",
    "iou_loss",
    "giou_loss",
    "diou_loss",
    "ciou_loss",
    "siou_loss",
    "loss_eval",
    "loss_values",
    "loss_grads",
    "smooth_penalty_values",
]


class LossKind(enum.Enum):
    """The closed set of benchmarked losses."""

    IOU = "iou"
    GIOU = "giou"
    DIOU = "diou"
    CIOU = "ciou"
    SIOU = "siou"
    SMOOTH_IOU = "smooth"

    @property
    def kernel_code(self) -> int:
        return _KERNEL_CODE[self]

    @classmethod
    def parse(cls, name: str) -> "LossKind":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown loss {name!r}; expected one of: {valid}") from None


_KERNEL_CODE = {
    LossKind.IOU: 0,
    LossKind.GIOU: 1,
    LossKind.DIOU: 2,
    LossKind.CIOU: 3,
    LossKind.SIOU: 4,
    LossKind.SMOOTH_IOU: 5,
}


@dataclass(frozen=True)
class AxisSmoothTerms:
    """Intermediate quantities of the smoothing penalty on one axis.

    Offsets are clamped signed distances between prediction edges and the
    truth's edges: the positive side measures overshoot past the upper truth
    edge, the negative side undershoot below the lower one.  ``d_c`` is the
    truth center's distance to the farther domain border, and the weights
    discount each side's offsets by the room left before that border.
    """

    u_pos: float
    v_pos: float
    d_pos: float
    u_neg: float
    v_neg: float
    d_neg: float
    d_c: float
    w_pos: float
    w_neg: float
    ell: float


@dataclass(frozen=True)
class SIoUParams:
    """Tunables of the scylla-IoU loss; theta weights the shape cost."""

    theta: float = 4.0

    def __post_init__(self) -> None:
        if not (2.0 <= self.theta <= 6.0):
            raise ValueError(f"theta={self.theta} outside the admissible range [2, 6]")


_DEFAULT_SIOU = SIoUParams()


@dataclass(frozen=True)
class LossEval:
    """Loss value plus gradient for one (truth, prediction) pair.

    ``grad`` is d(value)/d(x_lo, y_lo, x_hi, y_hi) of the predicted box.
    ``terms`` carries the per-axis smoothing quantities and is populated by
    the smoothing loss only.
    """

    value: float
    grad: tuple[float, float, float, float]
    terms: tuple[AxisSmoothTerms, AxisSmoothTerms] | None = None


def axis_smooth_terms(g: AxisInterval, p: AxisInterval) -> AxisSmoothTerms:
    """Smoothing-penalty quantities for one axis of a (truth, pred) pair."""
    return AxisSmoothTerms(*_k.smooth_axis_terms(g.lo, g.hi, p.lo, p.hi))


def _terms_pair(gt: BBox, pred: BBox) -> tuple[AxisSmoothTerms, AxisSmoothTerms]:
    return (
        AxisSmoothTerms(*_k.smooth_axis_terms(gt.x_lo, gt.x_hi, pred.x_lo, pred.x_hi)),
        AxisSmoothTerms(*_k.smooth_axis_terms(gt.y_lo, gt.y_hi, pred.y_lo, pred.y_hi)),
    )


def smooth_penalty(gt: BBox, pred: BBox) -> tuple[float, tuple[AxisSmoothTerms, AxisSmoothTerms]]:
    """Smoothing penalty value 1 - ell_x*ell_y/4, with the per-axis terms.

    Zero at a perfect match, growing toward 1 as the prediction degrades;
    always in [0, 1].
    """
    value = _k.smooth_penalty_one(*gt.as_tuple(), *pred.as_tuple())
    return value, _terms_pair(gt, pred)


def _eval(kind: LossKind, gt: BBox, pred: BBox, theta: float) -> LossEval:
    v, d0, d1, d2, d3 = _k.eval_one(
        kind.kernel_code, *gt.as_tuple(), *pred.as_tuple(), theta, -1.0
    )
    terms = _terms_pair(gt, pred) if kind is LossKind.SMOOTH_IOU else None
    return LossEval(value=v, grad=(d0, d1, d2, d3), terms=terms)


def iou_loss(gt: BBox, pred: BBox) -> LossEval:
    """1 - IoU.  The gradient is exactly zero for disjoint boxes."""
    return _eval(LossKind.IOU, gt, pred, _DEFAULT_SIOU.theta)


def giou_loss(gt: BBox, pred: BBox) -> LossEval:
    """Generalized IoU loss; value in [0, 2)."""
    return _eval(LossKind.GIOU, gt, pred, _DEFAULT_SIOU.theta)


def diou_loss(gt: BBox, pred: BBox) -> LossEval:
    """Distance IoU loss; value in [0, 2)."""
    return _eval(LossKind.DIOU, gt, pred, _DEFAULT_SIOU.theta)


def ciou_loss(gt: BBox, pred: BBox) -> LossEval:
    """Complete IoU loss (distance penalty plus aspect-ratio term)."""
    return _eval(LossKind.CIOU, gt, pred, _DEFAULT_SIOU.theta)


def siou_loss(gt: BBox, pred: BBox, params: SIoUParams = _DEFAULT_SIOU) -> LossEval:
    """Scylla IoU loss with angle, distance and shape costs."""
    return _eval(LossKind.SIOU, gt, pred, params.theta)


def smooth_loss(gt: BBox, pred: BBox) -> LossEval:
    """IoU loss plus the smoothing penalty; terms populated.

    The penalty keeps the gradient nonzero over the whole domain, so descent
    makes progress even from boxes that do not overlap the truth.
    """
    return _eval(LossKind.SMOOTH_IOU, gt, pred, _DEFAULT_SIOU.theta)


def loss_eval(
    kind: LossKind, gt: BBox, pred: BBox, siou_params: SIoUParams = _DEFAULT_SIOU
) -> LossEval:
    """Uniform dispatch over the loss family."""
    return _eval(kind, gt, pred, siou_params.theta)


def loss_values(
    kind: LossKind,
    gts: np.ndarray,
    preds: np.ndarray,
    siou_params: SIoUParams = _DEFAULT_SIOU,
) -> np.ndarray:
    """Bulk loss values for aligned (n, 4) coordinate arrays.

    Row layout is (x_lo, y_lo, x_hi, y_hi); rows must satisfy the box
    invariants (not re-validated here).  Bit-identical to calling
    :func:`loss_eval` row by row.
    """
    return _k.values_batch(kind.kernel_code, gts, preds, siou_params.theta)


def loss_grads(
    kind: LossKind,
    gts: np.ndarray,
    preds: np.ndarray,
    siou_params: SIoUParams = _DEFAULT_SIOU,
) -> tuple[np.ndarray, np.ndarray]:
    """Bulk loss values and gradients: arrays of shape (n,) and (n, 4)."""
    return _k.grads_batch(kind.kernel_code, gts, preds, siou_params.theta)


def smooth_penalty_values(gts: np.ndarray, preds: np.ndarray) -> np.ndarray:
    """Bulk smoothing-penalty values for aligned (n, 4) coordinate arrays."""
    return _k.smooth_penalty_batch(gts, preds)
