"""Bounding-box regression loss laboratory.

Six IoU-family losses (plain, generalized, distance, complete, scylla and
smoothing IoU) with exact analytic gradients, a finite-difference gradient
certifier, a direct gradient-descent regression harness with label-noise
injection, and deterministic report emission.

The evaluation kernels run on a compiled Cython backend when available and
fall back to a bit-identical pure-Python implementation otherwise; see
:mod:`boxloss.backend`.
"""

from boxloss.backend import BACKEND, compiled_available
from boxloss.geom import MIN_SIDE, AxisInterval, BBox, enclosing_box, intersection_area, iou
from boxloss.losses import (
    AxisSmoothTerms,
    LossEval,
    LossKind,
    SIoUParams,
    axis_smooth_terms,
    ciou_loss,
    diou_loss,
    giou_loss,
    iou_loss,
    loss_eval,
    siou_loss,
    smooth_loss,
    smooth_penalty,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "compiled_available",
    "MIN_SIDE",
    "BBox",
    "AxisInterval",
    "intersection_area",
    "iou",
    "enclosing_box",
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
    "__version__",
]
