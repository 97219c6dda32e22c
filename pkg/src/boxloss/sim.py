"""Direct bounding-box regression harness.

Projected gradient descent on the four box coordinates, from a grid of
anchor boxes toward target boxes, under any of the six losses.  This is the
desk-scale stand-in for training a detector: no network, just the loss
surface itself, which is exactly the object the losses differ on.

When a noise spec is attached, each step draws a fresh batch of noisy
replicas of the target and averages their gradients, which reproduces the
mechanism by which a loss's shape interacts with label noise during
mini-batch training.

Determinism: every trajectory derives its noise stream from
(seed, anchor_id, target_id), and aggregation is an ordered reduction, so a
SimResult depends only on its SimConfig, never on thread count.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from boxloss import rng
from boxloss.backend import kernels as _k
from boxloss.geom import BBox
from boxloss.losses import LossKind, SIoUParams
from boxloss.noise import NoiseSpec

__all__ = [
    "AnchorSpec",
    "Parameterization",
    "SimConfig",
    "Trajectory",
    "SimSummary",
    "SimResult",
    "default_schedule",
    "make_anchor_grid",
    "descend",
    "run_sim",
    "summarize",
    "CONVERGED_IOU",
]

#: Final-IoU threshold counted as a converged trajectory.
CONVERGED_IOU = 0.9


class Parameterization(enum.Enum):
    """Descent coordinates: raw corners, or center/size via the chain rule."""

    CORNERS = "corners"
    CENTER_SIZE = "center_size"


@dataclass(frozen=True)
class AnchorSpec:
    """Anchor construction: k x k grid of centers times sizes times aspects."""

    grid: int = 7
    sizes: tuple[float, ...] = (0.1, 0.2)
    aspects: tuple[float, ...] = (0.5, 1.0, 2.0)

    def __post_init__(self) -> None:
        if self.grid < 1:
            raise ValueError("anchor grid density must be at least 1")
        if not self.sizes or any(s <= 0 for s in self.sizes):
            raise ValueError("anchor sizes must be positive")
        if not self.aspects or any(a <= 0 for a in self.aspects):
            raise ValueError("anchor aspects must be positive")


def default_schedule(steps: int) -> tuple[tuple[int, float], ...]:
    """Step-size multipliers 0.4 and 0.1 at 50% and 75% of the budget."""
    return ((steps // 2, 0.4), ((3 * steps) // 4, 0.1))


@dataclass(frozen=True)
class SimConfig:
    """Declarative benchmark scenario.

    ``schedule`` entries are (iteration, multiplier): from that iteration on,
    the effective step size is step_size * multiplier.  None means the
    default two-drop schedule.  ``eval_refs`` optionally replaces the boxes
    used as the measurement reference in the summary (for example fixed noisy
    labels on the train split); trajectories always record IoU against the
    clean target.
    """

    loss: LossKind
    targets: tuple[BBox, ...]
    anchors: AnchorSpec = AnchorSpec()
    steps: int = 2000
    # calibrated once on the standard grid so the smoothing loss converges
    # from every anchor within the default budget, then frozen
    step_size: float = 0.005
    schedule: tuple[tuple[int, float], ...] | None = None
    parameterization: Parameterization = Parameterization.CORNERS
    seed: int = 0
    noise: NoiseSpec | None = None
    batch: int = 16
    threads: int = 1
    siou_params: SIoUParams = SIoUParams()
    target_ids: tuple[str, ...] | None = None
    target_split: tuple[str, ...] | None = None
    eval_refs: tuple[BBox, ...] | None = None

    def __post_init__(self) -> None:
        if not self.targets:
            raise ValueError("targets must be non-empty")
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        if self.step_size <= 0:
            raise ValueError("step_size must be positive")
        if self.batch < 1:
            raise ValueError("batch must be at least 1")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        if self.schedule is not None:
            its = [it for it, _ in self.schedule]
            if its != sorted(set(its)):
                raise ValueError("schedule iterations must be strictly increasing")
            if any(m <= 0 for _, m in self.schedule):
                raise ValueError("schedule multipliers must be positive")
        for name in ("target_ids", "target_split", "eval_refs"):
            seq = getattr(self, name)
            if seq is not None and len(seq) != len(self.targets):
                raise ValueError(f"{name} length must match targets")
        if self.target_split is not None and not set(self.target_split) <= {"train", "test"}:
            raise ValueError("target_split entries must be 'train' or 'test'")

    def resolved_schedule(self) -> tuple[tuple[int, float], ...]:
        return self.schedule if self.schedule is not None else default_schedule(self.steps)


@dataclass
class Trajectory:
    """One descent run: per-iteration records plus the final box.

    loss_values and ious have one entry per recorded iteration (at most
    steps + 1); multipliers holds the effective schedule multiplier of each
    applied step.  ``aborted`` flags a non-finite gradient, which signals a
    loss-implementation bug rather than a benchmark outcome.
    """

    anchor_id: int
    target_id: int
    loss_values: np.ndarray
    ious: np.ndarray
    multipliers: np.ndarray
    final: BBox
    aborted: bool = False

    @property
    def final_iou(self) -> float:
        return float(self.ious[-1])


@dataclass(frozen=True)
class SimSummary:
    """Aggregate statistics; recomputable from the trajectories."""

    n_trajectories: int
    mean_final_iou: float
    best_final_iou: float
    min_final_iou: float
    frac_converged: float
    train_avg: float | None = None
    test_avg: float | None = None


@dataclass
class SimResult:
    config: SimConfig
    trajectories: list[Trajectory]
    summary: SimSummary


def make_anchor_grid(spec: AnchorSpec) -> list[BBox]:
    """Deterministic anchor list: row-major grid centers, then size, then aspect.

    Combinations whose box would leave the unit square (or collapse below the
    minimal side) are skipped.
    """
    out = []
    k = spec.grid
    for iy in range(k):
        cy = (iy + 1) / (k + 1)
        for ix in range(k):
            cx = (ix + 1) / (k + 1)
            for size in spec.sizes:
                for aspect in spec.aspects:
                    w = size * math.sqrt(aspect)
                    h = size / math.sqrt(aspect)
                    try:
                        out.append(
                            BBox(cx - w * 0.5, cy - h * 0.5, cx + w * 0.5, cy + h * 0.5)
                        )
                    except ValueError:
                        continue
    return out


def descend(
    loss: LossKind,
    target: BBox,
    start: BBox,
    cfg: SimConfig,
    stream: np.random.Generator | None = None,
    anchor_id: int = 0,
    target_id: int = 0,
    _eval_override=None,
) -> Trajectory:
    """Projected gradient descent from start toward target.

    Records the loss value and the IoU against the clean target at every
    iteration (before each step, plus the final state).  With cfg.noise set,
    the gradient of each step is averaged over cfg.batch fresh noisy replicas
    of the target drawn from ``stream``.
    """
    code = loss.kernel_code
    theta = cfg.siou_params.theta
    schedule = cfg.resolved_schedule()
    steps = cfg.steps
    noisy = cfg.noise is not None and cfg.noise.mu > 0.0
    if noisy and stream is None:
        stream = rng.stream(cfg.seed, "traj", anchor_id, target_id)
    mu = cfg.noise.mu if cfg.noise is not None else 0.0
    center_size = cfg.parameterization is Parameterization.CENTER_SIZE

    g = target.as_tuple()
    b0, b1, b2, b3 = start.as_tuple()
    loss_values = np.empty(steps + 1, dtype=np.float64)
    ious = np.empty(steps + 1, dtype=np.float64)
    multipliers = np.empty(steps, dtype=np.float64)
    mult = 1.0
    si = 0
    aborted = False
    it = 0
    while True:
        if _eval_override is not None:
            v, d0, d1, d2, d3 = _eval_override(code, g, (b0, b1, b2, b3))
        elif noisy:
            raws = stream.random((cfg.batch, 4))
            v, d0, d1, d2, d3 = _k.noisy_mean_eval(
                code, *g, b0, b1, b2, b3, theta, mu, raws
            )
        else:
            v, d0, d1, d2, d3 = _k.eval_one(code, *g, b0, b1, b2, b3, theta, -1.0)
        loss_values[it] = v
        ious[it] = _k.iou_one(*g, b0, b1, b2, b3)
        if it == steps:
            break
        if not (
            math.isfinite(v)
            and math.isfinite(d0)
            and math.isfinite(d1)
            and math.isfinite(d2)
            and math.isfinite(d3)
        ):
            aborted = True
            loss_values = loss_values[: it + 1]
            ious = ious[: it + 1]
            multipliers = multipliers[:it]
            break
        while si < len(schedule) and it >= schedule[si][0]:
            mult = schedule[si][1]
            si += 1
        multipliers[it] = mult
        step = cfg.step_size * mult
        if center_size:
            # chain rule into (cx, cy, w, h): corners = (cx -/+ w/2, cy -/+ h/2)
            gcx = d0 + d2
            gcy = d1 + d3
            gw = (d2 - d0) * 0.5
            gh = (d3 - d1) * 0.5
            cx = (b0 + b2) * 0.5 - step * gcx
            cy = (b1 + b3) * 0.5 - step * gcy
            w = (b2 - b0) - step * gw
            h = (b3 - b1) - step * gh
            b0, b1, b2, b3 = _k.project_box(
                cx - w * 0.5, cy - h * 0.5, cx + w * 0.5, cy + h * 0.5
            )
        else:
            b0, b1, b2, b3 = _k.project_box(
                b0 - step * d0, b1 - step * d1, b2 - step * d2, b3 - step * d3
            )
        it += 1
    return Trajectory(
        anchor_id=anchor_id,
        target_id=target_id,
        loss_values=loss_values,
        ious=ious,
        multipliers=multipliers,
        final=BBox(b0, b1, b2, b3),
        aborted=aborted,
    )


def summarize(trajectories: list[Trajectory], cfg: SimConfig) -> SimSummary:
    """Recompute the summary statistics from raw trajectories."""
    finals = [t.final_iou for t in trajectories]
    n = len(finals)
    train_avg = None
    test_avg = None
    if cfg.target_split is not None:
        refs = cfg.eval_refs if cfg.eval_refs is not None else cfg.targets
        by_split: dict[str, list[float]] = {"train": [], "test": []}
        for t in trajectories:
            ref = refs[t.target_id]
            by_split[cfg.target_split[t.target_id]].append(
                _k.iou_one(*ref.as_tuple(), *t.final.as_tuple())
            )
        if by_split["train"]:
            train_avg = float(np.mean(by_split["train"]))
        if by_split["test"]:
            test_avg = float(np.mean(by_split["test"]))
    return SimSummary(
        n_trajectories=n,
        mean_final_iou=float(np.mean(finals)),
        best_final_iou=float(np.max(finals)),
        min_final_iou=float(np.min(finals)),
        frac_converged=float(np.mean([f >= CONVERGED_IOU for f in finals])),
        train_avg=train_avg,
        test_avg=test_avg,
    )


def run_sim(cfg: SimConfig) -> SimResult:
    """Descend every (anchor, target) pair and aggregate.

    Trajectories are independent; with cfg.threads > 1 they are evaluated by
    a thread pool, collected in task order, so the result is identical to the
    sequential run.
    """
    anchors = make_anchor_grid(cfg.anchors)
    if not anchors:
        raise ValueError("anchor spec produced no valid boxes")
    tasks = [
        (a_id, t_id)
        for t_id in range(len(cfg.targets))
        for a_id in range(len(anchors))
    ]

    def one(task: tuple[int, int]) -> Trajectory:
        a_id, t_id = task
        return descend(
            cfg.loss,
            cfg.targets[t_id],
            anchors[a_id],
            cfg,
            anchor_id=a_id,
            target_id=t_id,
        )

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            trajectories = list(pool.map(one, tasks))
    else:
        trajectories = [one(t) for t in tasks]
    return SimResult(config=cfg, trajectories=trajectories, summary=summarize(trajectories, cfg))
