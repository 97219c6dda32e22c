"""Axis-aligned boxes on the normalized unit square.

Every box in this package lives on [0, 1] x [0, 1] with corner coordinates
stored as (x_lo, y_lo, x_hi, y_hi), lo <= hi on each axis.  Pixel-space
inputs must be divided by the image width/height at ingestion
(:meth:`BBox.from_pixels`).  Degenerate boxes are rejected at construction:
both sides must be at least :data:`MIN_SIDE`, which keeps unions, widths,
heights and aspect ratios well-defined everywhere downstream.

All operations here are pure functions of immutable values and are safe to
call from any number of threads.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

__all__ = [
    "MIN_SIDE",
    "BBox",
    "AxisInterval",
    "intersection_area",
    "iou",
    "enclosing_box",
    "random_box",
]

#: Smallest admissible side length.  Forbids zero-area boxes.
MIN_SIDE = 1e-6


@dataclass(frozen=True)
class AxisInterval:
    """One axis of a box: [lo, hi] with 0 <= lo <= hi <= 1."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.lo <= self.hi <= 1.0):
            raise ValueError(
                f"interval [{self.lo}, {self.hi}] violates 0 <= lo <= hi <= 1"
            )

    @property
    def center(self) -> float:
        return (self.lo + self.hi) * 0.5

    @property
    def length(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in normalized coordinates.

    Invariants (checked at construction):
      * 0 <= x_lo <= x_hi <= 1 and 0 <= y_lo <= y_hi <= 1
      * x_hi - x_lo >= MIN_SIDE and y_hi - y_lo >= MIN_SIDE
    """

    x_lo: float
    y_lo: float
    x_hi: float
    y_hi: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.x_lo <= self.x_hi <= 1.0):
            raise ValueError(
                f"x coordinates ({self.x_lo}, {self.x_hi}) violate 0 <= x_lo <= x_hi <= 1"
            )
        if not (0.0 <= self.y_lo <= self.y_hi <= 1.0):
            raise ValueError(
                f"y coordinates ({self.y_lo}, {self.y_hi}) violate 0 <= y_lo <= y_hi <= 1"
            )
        if self.x_hi - self.x_lo < MIN_SIDE:
            raise ValueError(
                f"width {self.x_hi - self.x_lo} is below MIN_SIDE={MIN_SIDE}"
            )
        if self.y_hi - self.y_lo < MIN_SIDE:
            raise ValueError(
                f"height {self.y_hi - self.y_lo} is below MIN_SIDE={MIN_SIDE}"
            )

    @classmethod
    def from_pixels(
        cls, x_lo: float, y_lo: float, x_hi: float, y_hi: float,
        image_w: float, image_h: float,
    ) -> "BBox":
        """Normalize pixel-space corners by the image dimensions."""
        if image_w <= 0 or image_h <= 0:
            raise ValueError("image dimensions must be positive")
        return cls(x_lo / image_w, y_lo / image_h, x_hi / image_w, y_hi / image_h)

    @property
    def width(self) -> float:
        return self.x_hi - self.x_lo

    @property
    def height(self) -> float:
        return self.y_hi - self.y_lo

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x_lo + self.x_hi) * 0.5, (self.y_lo + self.y_hi) * 0.5)

    @property
    def x_axis(self) -> AxisInterval:
        return AxisInterval(self.x_lo, self.x_hi)

    @property
    def y_axis(self) -> AxisInterval:
        return AxisInterval(self.y_lo, self.y_hi)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x_lo, self.y_lo, self.x_hi, self.y_hi)


def intersection_area(a: BBox, b: BBox) -> float:
    """Area of the overlap of two boxes; 0 when they are disjoint."""
    ox = min(a.x_hi, b.x_hi) - max(a.x_lo, b.x_lo)
    oy = min(a.y_hi, b.y_hi) - max(a.y_lo, b.y_lo)
    if ox <= 0.0 or oy <= 0.0:
        return 0.0
    return ox * oy


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union.  Symmetric; 1 iff the boxes coincide.

    The union is strictly positive for valid boxes (MIN_SIDE forbids
    zero-area boxes), so this is a total function.
    """
    inter = intersection_area(a, b)
    union = a.area + b.area - inter
    return inter / union


def enclosing_box(a: BBox, b: BBox) -> BBox:
    """Smallest axis-aligned box containing both inputs."""
    return BBox(
        min(a.x_lo, b.x_lo),
        min(a.y_lo, b.y_lo),
        max(a.x_hi, b.x_hi),
        max(a.y_hi, b.y_hi),
    )


def random_box(
    rng: random.Random,
    min_side: float = 0.05,
    max_side: float = 0.8,
    margin: float = 1e-3,
) -> BBox:
    """Draw a valid box with sides in [min_side, max_side].

    The box is kept `margin` away from the borders so small coordinate
    perturbations (finite differences, noise) cannot invalidate it.
    """
    if not (MIN_SIDE <= min_side <= max_side <= 1.0 - 2.0 * margin):
        raise ValueError("infeasible side range for random_box")
    w = rng.uniform(min_side, max_side)
    h = rng.uniform(min_side, max_side)
    x_lo = rng.uniform(margin, 1.0 - margin - w)
    y_lo = rng.uniform(margin, 1.0 - margin - h)
    return BBox(x_lo, y_lo, x_lo + w, y_lo + h)
