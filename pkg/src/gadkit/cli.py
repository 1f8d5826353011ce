"""Command-line front end.

Subcommands: gad, cleanse, merge, refine, eval, synth, bench.  Every
invocation that writes outputs also writes a JSON run manifest beside
its primary output, recording the resolved parameters, paths, seed, and
per-stage wall-clock timings, so any run can be reproduced exactly.

Exit codes: 0 success, 1 I/O or data errors, 2 usage/validation errors.
"""

from __future__ import annotations

import hashlib
import json
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import __version__
from .diffusion import (
    DEFAULT_CONTRAST_UNIT,
    DEFAULT_ITERATIONS,
    DEFAULT_STEP,
    MAX_STABLE_STEP,
    GadParams,
    gad_filter,
)
from .errors import RasterFormatError, ShapeError, UndefinedMetricError
from .fields import as_stack
from .io import (
    check_same_shape,
    read_labels,
    read_raster,
    write_float_map,
    write_labels,
    write_raster,
)
from .labels import DEFAULT_IGNORE_ID, MergeStrategy, binarize, cleanse, merge
from .metrics import boundary_mask, confusion, dice, global_accuracy
from .synth import disk_scenario, square_scenario
from .upsample import RefinePipelineConfig, refine_upsampled, simulate_low_res

STRATEGY_NAMES = [s.value for s in MergeStrategy]


def _fail_io(err) -> "sys.NoReturn":
    click.echo(f"error: {err}", err=True)
    sys.exit(1)


def _check_step(step: float) -> None:
    if not 0 < step <= MAX_STABLE_STEP:
        raise click.UsageError(
            f"--lambda {step} rejected: the explicit scheme is unstable for "
            f"step sizes above {MAX_STABLE_STEP} on 4-neighborhoods"
        )


def _gad_params(contrast: float, step: float, iters: int) -> GadParams:
    _check_step(step)
    try:
        return GadParams(contrast=contrast, step=step, iterations=iters)
    except ValueError as err:
        raise click.UsageError(str(err)) from None


def _write_manifest(primary_out, command, params, inputs, outputs, timings, seed=None):
    manifest = {
        "command": command,
        "params": params,
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
        "timings_s": {k: round(v, 6) for k, v in timings.items()},
    }
    if seed is not None:
        manifest["seed"] = seed
    path = Path(str(primary_out) + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def gad_option(*names, **kwargs):
    return click.option(*names, **kwargs)


@click.group()
@click.version_option(__version__)
def main():
    """Guided anisotropic diffusion toolkit."""


@main.command("gad")
@click.argument("target", type=click.Path(exists=True, dir_okay=False))
@click.argument("guides", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--K", "contrast", type=float, default=DEFAULT_CONTRAST_UNIT, show_default=True, help="Contrast scale (use 5 for raw 0-255 intensities).")
@click.option("--lambda", "step", type=float, default=DEFAULT_STEP, show_default=True, help="Diffusion step size; must be <= 0.25.")
@click.option("--iters", type=int, default=DEFAULT_ITERATIONS, show_default=True, help="Number of diffusion iterations.")
@click.option("--threads", type=int, default=0, show_default=True, help="Worker threads (0 = auto); never changes numeric results.")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def cmd_gad(target, guides, contrast, step, iters, threads, out):
    """Filter TARGET with guided diffusion against one or more GUIDES."""
    params = _gad_params(contrast, step, iters)
    t0 = time.perf_counter()
    try:
        tgt = read_raster(target)
        gds = [read_raster(g) for g in guides]
        check_same_shape([tgt] + gds)
        t_read = time.perf_counter()
        result = gad_filter(tgt, gds, params)
        t_filter = time.perf_counter()
        write_raster(out, result)
    except (OSError, RasterFormatError, ShapeError, ValueError) as err:
        _fail_io(err)
    t_write = time.perf_counter()
    _write_manifest(
        out,
        "gad",
        {"K": contrast, "lambda": step, "iters": iters, "threads": threads},
        [target, *guides],
        [out],
        {"read": t_read - t0, "filter": t_filter - t_read, "write": t_write - t_filter},
    )
    click.echo(f"wrote {out}")


@main.command("cleanse")
@click.argument("gt", type=click.Path(exists=True, dir_okay=False))
@click.argument("prob", type=click.Path(exists=True, dir_okay=False))
@click.argument("guides", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--strategy", type=click.Choice(STRATEGY_NAMES), default="intersection", show_default=True)
@click.option("--threshold", type=float, default=0.5, show_default=True)
@click.option("--K", "contrast", type=float, default=DEFAULT_CONTRAST_UNIT, show_default=True)
@click.option("--lambda", "step", type=float, default=DEFAULT_STEP, show_default=True)
@click.option("--iters", type=int, default=DEFAULT_ITERATIONS, show_default=True)
@click.option("--ignore-id", type=int, default=DEFAULT_IGNORE_ID, show_default=True)
@click.option("--truth", type=click.Path(exists=True, dir_okay=False), default=None, help="Optional clean truth labels; prints a Dice-improvement report.")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def cmd_cleanse(gt, prob, guides, strategy, threshold, contrast, step, iters, ignore_id, truth, out):
    """One hyperepoch of label cleansing: filter PROB against GUIDES,
    threshold, and merge with the original GT labels."""
    params = _gad_params(contrast, step, iters)
    t0 = time.perf_counter()
    try:
        original = read_labels(gt, num_classes=2, ignore_id=ignore_id)
        prob_field = read_raster(prob)[0]
        gds = [read_raster(g) for g in guides]
        check_same_shape([prob_field[np.newaxis]] + gds)
        t_read = time.perf_counter()
        merged = cleanse(
            original, prob_field, gds, params, MergeStrategy(strategy), threshold
        )
        t_run = time.perf_counter()
        write_labels(out, merged)
        if truth is not None:
            truth_map = read_labels(truth, num_classes=2, ignore_id=ignore_id)
            before = dice(confusion(binarize(prob_field, threshold, ignore_id), truth_map), 1)
            after = dice(confusion(merged, truth_map), 1)
            click.echo(f"dice_before={before:.6f}")
            click.echo(f"dice_after={after:.6f}")
    except (OSError, RasterFormatError, ShapeError, UndefinedMetricError, ValueError) as err:
        _fail_io(err)
    t_write = time.perf_counter()
    _write_manifest(
        out,
        "cleanse",
        {
            "K": contrast,
            "lambda": step,
            "iters": iters,
            "strategy": strategy,
            "threshold": threshold,
            "ignore_id": ignore_id,
        },
        [gt, prob, *guides],
        [out],
        {"read": t_read - t0, "cleanse": t_run - t_read, "write": t_write - t_run},
    )
    click.echo(f"wrote {out}")


@main.command("merge")
@click.argument("original", type=click.Path(exists=True, dir_okay=False))
@click.argument("prediction", type=click.Path(exists=True, dir_okay=False))
@click.option("--strategy", type=click.Choice(STRATEGY_NAMES), default="intersection", show_default=True)
@click.option("--ignore-id", type=int, default=DEFAULT_IGNORE_ID, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def cmd_merge(original, prediction, strategy, ignore_id, out):
    """Merge ORIGINAL binary labels with a binary PREDICTION map."""
    t0 = time.perf_counter()
    try:
        orig = read_labels(original, num_classes=2, ignore_id=ignore_id)
        pred = read_labels(prediction, num_classes=2, ignore_id=ignore_id)
        merged = merge(orig, pred, MergeStrategy(strategy))
        write_labels(out, merged)
    except (OSError, RasterFormatError, ShapeError, ValueError) as err:
        _fail_io(err)
    _write_manifest(
        out,
        "merge",
        {"strategy": strategy, "ignore_id": ignore_id},
        [original, prediction],
        [out],
        {"total": time.perf_counter() - t0},
    )
    click.echo(f"wrote {out}")


@main.command("refine")
@click.argument("guide", type=click.Path(exists=True, dir_okay=False))
@click.option("--probs", "probs_paths", multiple=True, required=True, type=click.Path(exists=True, dir_okay=False), help="Class-probability raster(s): one multi-channel float map or one single-channel map per class.")
@click.option("--ss", type=int, default=1, show_default=True, help="Subsampling factor between probabilities and guide.")
@click.option("--K", "contrast", type=float, default=DEFAULT_CONTRAST_UNIT, show_default=True)
@click.option("--lambda", "step", type=float, default=DEFAULT_STEP, show_default=True)
@click.option("--iters", type=int, default=DEFAULT_ITERATIONS, show_default=True)
@click.option("--out-labels", required=True, type=click.Path(dir_okay=False))
@click.option("--out-probs", type=click.Path(dir_okay=False), default=None, help="Optional refined-probability float map (1- or 3-class).")
def cmd_refine(guide, probs_paths, ss, contrast, step, iters, out_labels, out_probs):
    """Upsample low-resolution class probabilities and restore region
    boundaries using the high-resolution GUIDE image."""
    params = _gad_params(contrast, step, iters)
    if ss < 1:
        raise click.UsageError(f"--ss must be >= 1, got {ss}")
    t0 = time.perf_counter()
    try:
        guide_stack = read_raster(guide)
        parts = [read_raster(p) for p in probs_paths]
        if len(parts) == 1:
            probs = parts[0]
        else:
            for p in parts:
                if p.shape[0] != 1:
                    raise ShapeError(
                        "per-class probability files must be single-channel"
                    )
            check_same_shape(parts)
            probs = np.concatenate(parts, axis=0)
        t_read = time.perf_counter()
        config = RefinePipelineConfig(scale=ss, gad=params)
        refined, labels = refine_upsampled(probs, guide_stack, config)
        t_run = time.perf_counter()
        write_labels(out_labels, labels)
        outputs = [out_labels]
        if out_probs is not None:
            write_float_map(out_probs, refined)
            outputs.append(out_probs)
    except (OSError, RasterFormatError, ShapeError, ValueError) as err:
        _fail_io(err)
    t_write = time.perf_counter()
    _write_manifest(
        out_labels,
        "refine",
        {"K": contrast, "lambda": step, "iters": iters, "ss": ss},
        [guide, *probs_paths],
        outputs,
        {"read": t_read - t0, "refine": t_run - t_read, "write": t_write - t_run},
    )
    click.echo(f"wrote {out_labels}")


@main.command("eval")
@click.argument("pred", type=click.Path(exists=True, dir_okay=False))
@click.argument("truth", type=click.Path(exists=True, dir_okay=False))
@click.option("--num-classes", type=int, default=2, show_default=True)
@click.option("--ignore-id", type=int, default=DEFAULT_IGNORE_ID, show_default=True)
@click.option("--boundary-radius", type=int, default=3, show_default=True, help="Band half-width for the boundary-restricted metrics.")
@click.option("--json", "json_out", type=click.Path(dir_okay=False), default=None, help="Also write metrics as a JSON document.")
def cmd_eval(pred, truth, num_classes, ignore_id, boundary_radius, json_out):
    """Evaluate PRED against TRUTH: per-class Dice, global accuracy, and
    the same metrics restricted to a band around class boundaries."""
    try:
        p = read_labels(pred, num_classes=num_classes, ignore_id=ignore_id)
        t = read_labels(truth, num_classes=num_classes, ignore_id=ignore_id)
        results = {}
        counts = confusion(p, t)
        results["accuracy"] = global_accuracy(counts)
        for c in range(num_classes):
            try:
                results[f"dice_{c}"] = dice(counts, c)
            except UndefinedMetricError:
                pass
        band = boundary_mask(t, boundary_radius)
        if (band.ids == 1).any():
            bcounts = confusion(p, t, eval_mask=band)
            results["boundary_accuracy"] = global_accuracy(bcounts)
            for c in range(num_classes):
                try:
                    results[f"boundary_dice_{c}"] = dice(bcounts, c)
                except UndefinedMetricError:
                    pass
    except (OSError, RasterFormatError, ShapeError, UndefinedMetricError, ValueError) as err:
        _fail_io(err)
    for key, value in results.items():
        click.echo(f"{key}={value:.6f}")
    if json_out is not None:
        Path(json_out).write_text(json.dumps(results, indent=2, sort_keys=True) + "\n")


@main.command("synth")
@click.argument("scenario", type=click.Choice(["square", "disk"]))
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--size", type=int, default=None, help="Raster size (default: 64 square, 192 disk).")
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
def cmd_synth(scenario, seed, size, out_dir):
    """Generate a seeded synthetic scenario: a guide image plus noisy
    labels (square) or a one-hot truth stack (disk)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    try:
        if scenario == "square":
            sc = square_scenario(seed=seed, size=size or 64)
            write_float_map(out / "guide.pfm", sc.guide)
            write_labels(out / "truth.png", sc.truth)
            write_labels(out / "labels.png", sc.noisy)
            write_float_map(out / "prob.pfm", sc.noisy_prob[np.newaxis])
            outputs = ["guide.pfm", "truth.png", "labels.png", "prob.pfm"]
        else:
            sc = disk_scenario(seed=seed, size=size or 192)
            write_float_map(out / "guide.pfm", sc.guide)
            write_labels(out / "truth.png", sc.truth)
            for c in range(sc.onehot.shape[0]):
                write_float_map(out / f"onehot_{c}.pfm", sc.onehot[c][np.newaxis])
            outputs = ["guide.pfm", "truth.png", "onehot_0.pfm", "onehot_1.pfm"]
    except OSError as err:
        _fail_io(err)
    _write_manifest(
        out / "scenario",
        "synth",
        {"scenario": scenario, "size": size},
        [],
        [str(out / name) for name in outputs],
        {"total": time.perf_counter() - t0},
        seed=seed,
    )
    click.echo(f"wrote {len(outputs)} files to {out}")


@main.command("bench")
@click.option("--size", type=int, default=512, show_default=True)
@click.option("--iters", type=int, default=100, show_default=True)
@click.option("--threads", type=int, default=0, show_default=True, help="Worker threads (0 = auto); never changes numeric results.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--check/--no-check", default=True, show_default=True, help="Also run the naive reference kernel and report the max deviation.")
def cmd_bench(size, iters, threads, seed, check):
    """Benchmark the optimized kernel on a random image and verify it
    against the naive reference kernel."""
    rng = np.random.default_rng(seed)
    guide = as_stack(rng.random((3, size, size)))
    target = as_stack(rng.random((1, size, size)))
    params = GadParams(contrast=0.1, step=0.24, iterations=iters)
    t0 = time.perf_counter()
    result = gad_filter(target, [guide], params)
    elapsed = time.perf_counter() - t0
    mpix = size * size * iters / elapsed / 1e6
    digest = hashlib.sha256(np.ascontiguousarray(result).tobytes()).hexdigest()
    click.echo(f"size={size}")
    click.echo(f"iters={iters}")
    click.echo(f"threads={threads}")
    click.echo(f"seconds_optimized={elapsed:.3f}")
    click.echo(f"mpix_per_s={mpix:.1f}")
    click.echo(f"result_sha256={digest}")
    if check:
        reference = gad_filter(target, [guide], params, kernel="reference")
        diff = float(np.abs(result - reference).max())
        click.echo(f"max_abs_diff_vs_reference={diff:.3e}")
        if diff > 1e-9:
            click.echo("error: kernels disagree beyond 1e-9", err=True)
            sys.exit(1)


if __name__ == "__main__":
    main()
