"""Label-noise model and synthetic dataset generation/persistence.

Noise model: each of the four box coordinates is independently shifted by a
uniform draw on [-mu*s, +mu*s], where s is the clean box's width for x
coordinates and its height for y coordinates.  Out-of-domain results are
repaired deterministically (clamp to [0, 1]; swap an inverted axis; restore
a minimal side by symmetric expansion), so every perturbed label is a valid
box.

Datasets are plain JSON-lines, one sample per line:

    {"id": "s0000", "gt": [x_lo, y_lo, x_hi, y_hi], "noisy_gt": [...] | null}
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from boxloss import rng
from boxloss.backend import kernels as _k
from boxloss.geom import MIN_SIDE, BBox

__all__ = [
    "NoiseSpec",
    "Sample",
    "perturb_box",
    "perturb_dataset",
    "generate_dataset",
    "train_test_split",
    "save_jsonl",
    "load_jsonl",
]

DEFAULT_SIZE_RANGE = (0.08, 0.45)
DEFAULT_ASPECT_RANGE = (0.5, 2.0)


@dataclass(frozen=True)
class NoiseSpec:
    """Noise level mu in [0, 1] plus the seed anchoring label streams."""

    mu: float
    seed: int = 0

    def __post_init__(self) -> None:
        if not (0.0 <= self.mu <= 1.0):
            raise ValueError(f"noise level mu={self.mu} outside [0, 1]")


@dataclass
class Sample:
    """One synthetic annotation: a clean box and, optionally, a noisy one."""

    id: str
    gt: BBox
    noisy_gt: BBox | None = None


def perturb_box(b: BBox, spec: NoiseSpec, stream: np.random.Generator) -> BBox:
    """One noisy replica of a box; mu = 0 returns the input unchanged.

    Consumes exactly four uniform draws (x_lo, y_lo, x_hi, y_hi order) from
    the stream; the noise scale uses the clean box's sides, before any
    repair.
    """
    if spec.mu == 0.0:
        return b
    u = stream.random(4)
    coords = _k.perturb_repair(*b.as_tuple(), spec.mu, u[0], u[1], u[2], u[3])
    return BBox(*coords)


def perturb_dataset(samples: list[Sample], spec: NoiseSpec) -> list[Sample]:
    """Fill noisy_gt for every sample, one independent stream per id."""
    out = []
    for s in samples:
        noisy = perturb_box(s.gt, spec, rng.stream(spec.seed, "label", s.id))
        out.append(Sample(id=s.id, gt=s.gt, noisy_gt=noisy))
    return out


def _check_ranges(size_range: tuple[float, float], aspect_range: tuple[float, float]) -> None:
    s_lo, s_hi = size_range
    a_lo, a_hi = aspect_range
    if not (0.0 < s_lo <= s_hi):
        raise ValueError(f"size range {size_range} must be positive and ordered")
    if not (0.0 < a_lo <= a_hi):
        raise ValueError(f"aspect range {aspect_range} must be positive and ordered")
    w_max = s_hi * math.sqrt(a_hi)
    h_max = s_hi / math.sqrt(a_lo)
    if w_max > 1.0 or h_max > 1.0:
        raise ValueError(
            f"infeasible ranges: extreme box {w_max:.3g} x {h_max:.3g} exceeds the unit square"
        )
    if s_lo * math.sqrt(a_lo) < MIN_SIDE or s_lo / math.sqrt(a_hi) < MIN_SIDE:
        raise ValueError("infeasible ranges: smallest box side falls below MIN_SIDE")


def generate_dataset(
    n: int,
    seed: int,
    size_range: tuple[float, float] = DEFAULT_SIZE_RANGE,
    aspect_range: tuple[float, float] = DEFAULT_ASPECT_RANGE,
) -> list[Sample]:
    """n samples with uniform centers, sizes and aspect ratios.

    A sample's box has area size^2 and width/height ratio equal to its
    aspect; the center is drawn so the box fits in the unit square.  Each
    sample is a pure function of (seed, id), so generation order and
    parallelism cannot change the output.
    """
    if n < 1:
        raise ValueError("dataset size must be at least 1")
    _check_ranges(size_range, aspect_range)
    samples = []
    for i in range(n):
        sid = f"s{i:04d}"
        g = rng.stream(seed, "sample", sid)
        size = g.uniform(size_range[0], size_range[1])
        aspect = g.uniform(aspect_range[0], aspect_range[1])
        w = size * math.sqrt(aspect)
        h = size / math.sqrt(aspect)
        cx = g.uniform(w * 0.5, 1.0 - w * 0.5)
        cy = g.uniform(h * 0.5, 1.0 - h * 0.5)
        # guard the corners against rounding past the domain edge
        x_lo = max(cx - w * 0.5, 0.0)
        y_lo = max(cy - h * 0.5, 0.0)
        x_hi = min(cx + w * 0.5, 1.0)
        y_hi = min(cy + h * 0.5, 1.0)
        samples.append(Sample(id=sid, gt=BBox(x_lo, y_lo, x_hi, y_hi)))
    return samples


def train_test_split(samples: list[Sample]) -> tuple[list[str], list[str]]:
    """Fixed 50/50 split by alternating sample index (even: train, odd: test)."""
    ids = [s.id for s in samples]
    return ids[0::2], ids[1::2]


def _sample_to_json(s: Sample) -> str:
    rec = {
        "id": s.id,
        "gt": list(s.gt.as_tuple()),
        "noisy_gt": list(s.noisy_gt.as_tuple()) if s.noisy_gt is not None else None,
    }
    return json.dumps(rec, separators=(",", ":"))


def save_jsonl(samples: list[Sample], path: str | Path) -> None:
    """Write samples as JSON-lines with full double precision."""
    path = Path(path)
    text = "".join(_sample_to_json(s) + "\n" for s in samples)
    path.write_text(text, encoding="utf-8")


def load_jsonl(path: str | Path) -> list[Sample]:
    """Read a JSON-lines dataset back into samples (validating every box)."""
    out = []
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            gt = BBox(*rec["gt"])
            noisy = BBox(*rec["noisy_gt"]) if rec.get("noisy_gt") is not None else None
            out.append(Sample(id=str(rec["id"]), gt=gt, noisy_gt=noisy))
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise ValueError(f"{path}:{line_no}: malformed dataset record: {exc}") from exc
    return out
