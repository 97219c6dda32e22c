"""Command-line interface.

Subcommands: ``eval`` (one loss evaluation to stdout as JSON), ``gradcheck``
(finite-difference certification, CI-gate exit code), ``simulate`` (anchor
grid descent, trajectories + summary files), ``noise-sweep`` (the full
noise-level benchmark emitting one report CSV per level) and ``dataset``
(synthetic dataset generation and label perturbation).

File outputs land under --out with fixed names (see README).  Every command
is deterministic under a fixed --seed and independent of --threads; the seed
falls back to the BOXLOSS_SEED environment variable, then 0.

Exit codes: 0 success, 1 verification failure (gradcheck), 2 usage or
validation error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from boxloss import rng
from boxloss.geom import BBox
from boxloss.gradcheck import DEFAULT_STEP, DEFAULT_TOL, run_gradcheck
from boxloss.losses import LossKind, loss_eval
from boxloss.noise import (
    DEFAULT_ASPECT_RANGE,
    DEFAULT_SIZE_RANGE,
    NoiseSpec,
    Sample,
    generate_dataset,
    load_jsonl,
    perturb_dataset,
    save_jsonl,
    train_test_split,
)
from boxloss.report import aggregate, emit
from boxloss.sim import AnchorSpec, SimConfig, SimResult, run_sim

__all__ = ["main"]

ALL_LOSSES = ",".join(k.value for k in LossKind)

# fixed output file names
TRAJECTORIES_CSV = "trajectories.csv"
SUMMARY_JSON = "summary.json"
REPORT_CSV = "report.csv"
DATASET_JSONL = "dataset.jsonl"
SPLIT_JSON = "split.json"
DATASET_NOISY_JSONL = "dataset_noisy.jsonl"
SWEEP_SUMMARY_JSON = "sweep_summary.json"


def _mu_tag(mu: float) -> str:
    return f"{int(round(mu * 100)):03d}"


def sweep_report_name(mu: float) -> str:
    return f"report_mu{_mu_tag(mu)}.csv"


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(p) for p in text.split(",") if p.strip() != "")
    except ValueError:
        raise ValueError(f"cannot parse {text!r} as a comma-separated float list") from None


def _parse_box(text: str, pixel_space: tuple[float, float] | None) -> BBox:
    parts = _parse_floats(text)
    if len(parts) != 4:
        raise ValueError(f"a box needs 4 comma-separated coordinates, got {len(parts)}")
    if pixel_space is not None:
        return BBox.from_pixels(*parts, pixel_space[0], pixel_space[1])
    return BBox(*parts)


def _parse_losses(text: str) -> list[LossKind]:
    kinds = [LossKind.parse(p) for p in text.split(",") if p.strip()]
    if not kinds:
        raise ValueError("no losses given")
    return kinds


def _default_seed() -> int:
    env = os.environ.get("BOXLOSS_SEED", "").strip()
    return int(env) if env else 0


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _run_seed(seed: int, mu: float, kind: LossKind, run: int) -> int:
    return rng.derive_seed(seed, "run", _mu_tag(mu), kind.value, run)


def _json_dump(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="")


def _load_targets(path: str) -> list[Sample]:
    samples = load_jsonl(path)
    if not samples:
        raise ValueError(f"{path}: dataset is empty")
    return samples


def _run_cell(
    kind: LossKind,
    samples: list[Sample],
    noisy_refs: dict[str, BBox] | None,
    args: argparse.Namespace,
    mu: float,
    run: int,
    with_split: bool,
) -> SimResult:
    """One (loss, noise level, run) simulation cell, shared by the
    simulate and noise-sweep commands so their seeds line up."""
    anchors = AnchorSpec(
        grid=args.grid, sizes=_parse_floats(args.sizes), aspects=_parse_floats(args.aspects)
    )
    targets = tuple(s.gt for s in samples)
    target_ids = tuple(s.id for s in samples)
    target_split = None
    eval_refs = None
    if with_split:
        train_ids = set(train_test_split(samples)[0])
        target_split = tuple("train" if s.id in train_ids else "test" for s in samples)
        refs = noisy_refs or {}
        eval_refs = tuple(
            refs.get(s.id, s.gt) if target_split[i] == "train" else s.gt
            for i, s in enumerate(samples)
        )
    cfg = SimConfig(
        loss=kind,
        targets=targets,
        anchors=anchors,
        steps=args.steps,
        step_size=args.step_size,
        seed=_run_seed(args.seed, mu, kind, run),
        noise=NoiseSpec(mu) if mu > 0.0 else None,
        batch=args.batch,
        threads=args.threads,
        target_ids=target_ids,
        target_split=target_split,
        eval_refs=eval_refs,
    )
    return run_sim(cfg)


def _summary_dict(res: SimResult) -> dict:
    s = res.summary
    d = {
        "n_trajectories": s.n_trajectories,
        "mean_final_iou": s.mean_final_iou,
        "best_final_iou": s.best_final_iou,
        "min_final_iou": s.min_final_iou,
        "frac_converged": s.frac_converged,
    }
    if s.train_avg is not None:
        d["train_avg"] = s.train_avg
    if s.test_avg is not None:
        d["test_avg"] = s.test_avg
    return d


def cmd_eval(args: argparse.Namespace) -> int:
    pixel = tuple(args.pixel_space) if args.pixel_space else None
    kind = LossKind.parse(args.loss)
    gt = _parse_box(args.gt, pixel)
    pred = _parse_box(args.pred, pixel)
    ev = loss_eval(kind, gt, pred)
    payload: dict = {"value": ev.value}
    if args.grad:
        payload["grad"] = list(ev.grad)
    if ev.terms is not None:
        payload["terms"] = {
            axis: vars(t) for axis, t in zip(("x", "y"), ev.terms)
        }
    print(json.dumps(payload))
    return 0


def cmd_gradcheck(args: argparse.Namespace) -> int:
    kind = LossKind.parse(args.loss)
    report = run_gradcheck(kind, args.samples, args.seed, tol=args.tol, h=args.step)
    out = _out_dir(args)
    payload = {
        "loss": kind.value,
        "samples": report.samples,
        "seed": report.seed,
        "tol": report.tol,
        "step": report.step,
        "compared": report.compared,
        "skipped_kink_count": report.skipped_kink_count,
        "max_rel_err": report.max_rel_err,
        "failures": [
            {
                "gt": list(f.gt.as_tuple()),
                "pred": list(f.pred.as_tuple()),
                "component": f.component,
                "analytic": f.analytic,
                "numeric": f.numeric,
                "rel_err": f.rel_err,
            }
            for f in report.failures
        ],
    }
    _json_dump(payload, out / f"gradcheck_{kind.value}.json")
    status = "PASS" if report.passed else "FAIL"
    print(
        f"gradcheck {kind.value}: {status} "
        f"(samples={report.samples}, skipped={report.skipped_kink_count}, "
        f"max_rel_err={report.max_rel_err:.3e})"
    )
    return 0 if report.passed else 1


def _write_trajectories(results: list[SimResult], path: Path) -> None:
    lines = ["run,anchor_id,target_id,iteration,loss_value,iou"]
    for run, res in enumerate(results):
        for t in res.trajectories:
            for i in range(len(t.loss_values)):
                lines.append(
                    f"{run},{t.anchor_id},{t.target_id},{i},{t.loss_values[i]!r},{t.ious[i]!r}"
                )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="")


def cmd_simulate(args: argparse.Namespace) -> int:
    kind = LossKind.parse(args.loss)
    if args.targets_file:
        samples = _load_targets(args.targets_file)
    else:
        samples = [Sample(id="target", gt=_parse_box(args.target, None))]
    out = _out_dir(args)
    results = [
        _run_cell(kind, samples, None, args, mu=0.0, run=r, with_split=False)
        for r in range(args.runs)
    ]
    _write_trajectories(results, out / TRAJECTORIES_CSV)
    summary = {
        "command": "simulate",
        "loss": kind.value,
        "seed": args.seed,
        "steps": args.steps,
        "step_size": args.step_size,
        "grid": args.grid,
        "sizes": list(_parse_floats(args.sizes)),
        "aspects": list(_parse_floats(args.aspects)),
        "n_targets": len(samples),
        "runs": [
            {"run": r, "summary": _summary_dict(res)} for r, res in enumerate(results)
        ],
    }
    _json_dump(summary, out / SUMMARY_JSON)
    emit(aggregate(results, args.runs), "csv", out / REPORT_CSV)
    for r, res in enumerate(results):
        print(
            f"simulate {kind.value} run {r}: mean_final_iou={res.summary.mean_final_iou:.6g} "
            f"frac@{0.9}={res.summary.frac_converged:.6g}"
        )
    return 0


def cmd_noise_sweep(args: argparse.Namespace) -> int:
    kinds = _parse_losses(args.losses)
    mus = _parse_floats(args.mu_list)
    if not mus:
        raise ValueError("empty --mu-list")
    if list(mus) != sorted(set(mus)):
        raise ValueError("--mu-list must be strictly increasing")
    if any(not 0.0 <= m <= 1.0 for m in mus):
        raise ValueError("noise levels must lie in [0, 1]")
    if args.targets_file:
        samples = _load_targets(args.targets_file)
    else:
        samples = generate_dataset(args.samples, rng.derive_seed(args.seed, "dataset"))
    out = _out_dir(args)
    train_ids = train_test_split(samples)[0]
    cells = []
    for mu in mus:
        # fixed noisy labels for the train split, shared by all losses/runs
        noisy_refs: dict[str, BBox] = {}
        if mu > 0.0:
            labeled = perturb_dataset(
                [s for s in samples if s.id in set(train_ids)],
                NoiseSpec(mu, seed=rng.derive_seed(args.seed, "labels", _mu_tag(mu))),
            )
            noisy_refs = {s.id: s.noisy_gt for s in labeled}
        per_loss_results: dict[LossKind, list[SimResult]] = {}
        for kind in kinds:
            for run in range(args.runs):
                res = _run_cell(kind, samples, noisy_refs, args, mu=mu, run=run, with_split=True)
                per_loss_results.setdefault(kind, []).append(res)
                cells.append(
                    {
                        "mu": mu,
                        "loss": kind.value,
                        "run": run,
                        **_summary_dict(res),
                    }
                )
        rows = aggregate([r for rs in per_loss_results.values() for r in rs], args.runs)
        emit(rows, "csv", out / sweep_report_name(mu))
        ranking = sorted(rows, key=lambda r: -r.test_avg)
        order = " > ".join(f"{r.loss.value}({r.test_avg:.3f})" for r in ranking)
        print(f"mu={mu:g}: test_avg ranking: {order}")
    _json_dump(
        {
            "command": "noise-sweep",
            "seed": args.seed,
            "mus": list(mus),
            "losses": [k.value for k in kinds],
            "runs": args.runs,
            "n_targets": len(samples),
            "steps": args.steps,
            "step_size": args.step_size,
            "grid": args.grid,
            "batch": args.batch,
            "cells": cells,
        },
        out / SWEEP_SUMMARY_JSON,
    )
    return 0


def cmd_dataset(args: argparse.Namespace) -> int:
    out = _out_dir(args)
    if args.dataset_cmd == "gen":
        size_range = _parse_floats(args.size_range)
        aspect_range = _parse_floats(args.aspect_range)
        if len(size_range) != 2 or len(aspect_range) != 2:
            raise ValueError("--size-range and --aspect-range need exactly two values")
        samples = generate_dataset(args.n, args.seed, size_range, aspect_range)
        save_jsonl(samples, out / DATASET_JSONL)
        train, test = train_test_split(samples)
        _json_dump({"train": train, "test": test}, out / SPLIT_JSON)
        print(f"dataset gen: wrote {len(samples)} samples to {out / DATASET_JSONL}")
        return 0
    if args.dataset_cmd == "perturb":
        samples = _load_targets(args.input)
        noisy = perturb_dataset(samples, NoiseSpec(args.mu, seed=args.seed))
        save_jsonl(noisy, out / DATASET_NOISY_JSONL)
        print(f"dataset perturb: wrote {len(noisy)} samples to {out / DATASET_NOISY_JSONL}")
        return 0
    raise ValueError(f"unknown dataset subcommand {args.dataset_cmd!r}")


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--seed", type=int, default=_default_seed(),
        help="global seed (default: BOXLOSS_SEED env var, else 0)",
    )
    common.add_argument("--threads", type=int, default=1, help="worker threads for simulation")
    common.add_argument("--out", default="out", help="output directory (fixed file names inside)")

    sim_common = argparse.ArgumentParser(add_help=False)
    sim_common.add_argument("--steps", type=int, default=2000, help="descent iteration budget")
    sim_common.add_argument("--step-size", type=float, default=0.005, help="base step size")
    sim_common.add_argument("--batch", type=int, default=16, help="noisy replicas per step")

    p = argparse.ArgumentParser(
        prog="boxloss",
        description="Bounding-box regression loss laboratory",
    )
    sub = p.add_subparsers(dest="command", required=True)

    pe = sub.add_parser("eval", parents=[common], help="evaluate one loss on a box pair")
    pe.add_argument("--loss", required=True, help=f"one of: {ALL_LOSSES}")
    pe.add_argument("--gt", required=True, help="ground truth box x_lo,y_lo,x_hi,y_hi")
    pe.add_argument("--pred", required=True, help="predicted box x_lo,y_lo,x_hi,y_hi")
    pe.add_argument("--grad", action="store_true", help="include the gradient in the output")
    pe.add_argument(
        "--pixel-space", nargs=2, type=float, metavar=("W", "H"),
        help="treat box coordinates as pixels of a W x H image",
    )
    pe.set_defaults(func=cmd_eval)

    pg = sub.add_parser("gradcheck", parents=[common], help="finite-difference certification")
    pg.add_argument("--loss", required=True, help=f"one of: {ALL_LOSSES}")
    pg.add_argument("--samples", type=int, default=1000)
    pg.add_argument("--tol", type=float, default=DEFAULT_TOL, help="relative tolerance")
    pg.add_argument("--step", type=float, default=DEFAULT_STEP, help="difference step")
    pg.set_defaults(func=cmd_gradcheck)

    ps = sub.add_parser(
        "simulate", parents=[common, sim_common], help="anchor-grid descent benchmark"
    )
    ps.add_argument("--loss", required=True, help=f"one of: {ALL_LOSSES}")
    ps.add_argument("--grid", type=int, default=7, help="anchor grid density")
    ps.add_argument("--sizes", default="0.1,0.2", help="anchor sizes")
    ps.add_argument("--aspects", default="0.5,1,2", help="anchor aspect ratios")
    ps.add_argument("--targets-file", help="JSONL dataset of targets (default: one centered box)")
    ps.add_argument("--target", default="0.4,0.4,0.6,0.6", help="single target box")
    ps.add_argument("--runs", type=int, default=1)
    ps.set_defaults(func=cmd_simulate)

    pn = sub.add_parser(
        "noise-sweep", parents=[common, sim_common],
        help="benchmark all losses over increasing label noise",
    )
    pn.add_argument("--losses", default=ALL_LOSSES, help="comma-separated losses")
    pn.add_argument("--mu-list", default="0.0,0.2,0.4,0.6", help="increasing noise levels")
    pn.add_argument("--runs", type=int, default=3)
    pn.add_argument("--samples", type=int, default=24, help="synthetic dataset size")
    pn.add_argument("--grid", type=int, default=2, help="anchor grid density")
    pn.add_argument("--sizes", default="0.25", help="anchor sizes")
    pn.add_argument("--aspects", default="1.0", help="anchor aspect ratios")
    pn.add_argument("--targets-file", help="JSONL dataset (default: generated from --seed)")
    pn.set_defaults(func=cmd_noise_sweep, steps=400)

    pd = sub.add_parser("dataset", parents=[common], help="synthetic dataset tools")
    dsub = pd.add_subparsers(dest="dataset_cmd", required=True)
    pdg = dsub.add_parser("gen", parents=[common], help="generate a clean dataset")
    pdg.add_argument("--n", type=int, default=304, help="number of samples")
    pdg.add_argument("--size-range", default=f"{DEFAULT_SIZE_RANGE[0]},{DEFAULT_SIZE_RANGE[1]}")
    pdg.add_argument("--aspect-range", default=f"{DEFAULT_ASPECT_RANGE[0]},{DEFAULT_ASPECT_RANGE[1]}")
    pdg.set_defaults(func=cmd_dataset)
    pdp = dsub.add_parser("perturb", parents=[common], help="add noisy labels to a dataset")
    pdp.add_argument("--input", required=True, help="input dataset JSONL")
    pdp.add_argument("--mu", type=float, required=True, help="noise level in [0, 1]")
    pdp.set_defaults(func=cmd_dataset)

    return p


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
