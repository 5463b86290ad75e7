"""Command-line entry points: synth, prepare, evaluate, bench.

Every subcommand exits 0 on success; failures print one JSON error line to
stderr and exit 1. A --config JSON file, when given, overrides any flags
it names so a run is reproducible from a single artifact.
"""

from __future__ import annotations

import functools
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

import click

from . import io as dio
from .bench import BenchRecord, fit_time_model, time_stage
from .pipeline import (
    PipelineConfig,
    dataset_background_values,
    ensure_definition,
    evaluate_prediction,
    find_sample_dirs,
    prepare_dir,
    prepare_sample,
)
from .prep import classify_holes, downsample, fill_depth
from .scene import ground_plane, object_map
from .synth import randomized_config, generate_scene, gt_object_mask
from .upsample import remask


def _fail(exc: Exception) -> None:
    sys.stderr.write(json.dumps({"error": str(exc)}) + "\n")
    sys.exit(1)


def guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (click.ClickException, SystemExit):
            raise
        except Exception as exc:  # pipeline errors become exit code 1
            _fail(exc)

    return wrapper


def _apply_config(cfg: PipelineConfig, config_path: str | None) -> PipelineConfig:
    if config_path is None:
        return cfg
    with open(config_path, encoding="utf-8") as f:
        return cfg.with_overrides(json.load(f))


@click.group()
def main() -> None:
    """Depth-map super-resolution data pipeline."""


def _synth_one(args: tuple) -> dict:
    (out_dir, seed, width, height, ground_depth, kind, noise_sigma, margin,
     ground_tilt) = args
    cfg = randomized_config(
        seed=seed,
        width=width,
        height=height,
        ground_depth=ground_depth,
        object_kind=kind,
        noise_sigma=noise_sigma,
        border_margin=margin,
        ground_tilt=ground_tilt,
    )
    sample = generate_scene(cfg)
    dio.write_sample(sample, out_dir)
    dio.write_object_png(Path(out_dir) / "gt_object.png", gt_object_mask(cfg))
    return {
        "dir": Path(out_dir).name,
        "seed": seed,
        "kind": cfg.object_kind,
        "object_size": list(cfg.object_size),
    }


@main.command()
@click.option("--count", type=int, required=True, help="number of samples")
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--width", type=int, default=320, show_default=True)
@click.option("--height", type=int, default=240, show_default=True)
@click.option("--ground-depth", type=float, default=1000.0, show_default=True)
@click.option("--kind", type=click.Choice(["box", "sphere", "superellipsoid"]),
              default=None, help="fix the object kind (default: varied)")
@click.option("--noise-sigma", type=float, default=0.3, show_default=True)
@click.option("--border-margin", type=int, default=4, show_default=True)
@click.option("--ground-tilt", type=float, default=0.12, show_default=True,
              help="ground plane slope dz/dy (depth grows toward image top)")
@click.option("--jobs", type=int, default=1, show_default=True)
@guarded
def synth(count, out_dir, seed, width, height, ground_depth, kind, noise_sigma,
          border_margin, ground_tilt, jobs) -> None:
    """Generate a synthetic corpus: sample directories plus manifest.json.

    Sample i is rendered from seed SEED+i, so reruns are byte-identical.
    """
    if count < 0:
        raise ValueError("--count must be >= 0")
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    tasks = [
        (
            str(root / f"sample_{i:05d}"), seed + i, width, height,
            ground_depth, kind, noise_sigma, border_margin, ground_tilt,
        )
        for i in range(count)
    ]
    if jobs > 1 and tasks:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            entries = list(pool.map(_synth_one, tasks))
    else:
        entries = [_synth_one(t) for t in tasks]
    manifest = {
        "seed": seed,
        "width": width,
        "height": height,
        "ground_depth": ground_depth,
        "ground_tilt": ground_tilt,
        "noise_sigma": noise_sigma,
        "border_margin": border_margin,
        "samples": entries,
    }
    with open(root / "manifest.json", "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    click.echo(json.dumps({"written": count, "manifest": str(root / "manifest.json")}))


def _prepare_one(args: tuple) -> str:
    dir_path, cfg_dict, bg_depth, bg_intensity = args
    cfg = PipelineConfig(**cfg_dict)
    prepare_dir(dir_path, cfg, bg_depth, bg_intensity)
    return str(dir_path)


@main.command()
@click.option("--in", "in_dir", type=click.Path(exists=True), required=True)
@click.option("--scale", type=int, default=4, show_default=True)
@click.option("--tau", type=float, default=5.0, show_default=True)
@click.option("--background", type=float, default=None,
              help="background fill depth b in mm (default: dataset max)")
@click.option("--background-intensity", type=float, default=None,
              help="background fill intensity (default: dataset max)")
@click.option("--connectivity", type=click.Choice(["4", "8"]), default="4",
              show_default=True)
@click.option("--epsilon", type=float, default=3.0, show_default=True,
              help="object margin above the ground plane in mm")
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="JSON pipeline config; overrides flags")
@guarded
def prepare(in_dir, scale, tau, background, background_intensity, connectivity,
            epsilon, jobs, config_path) -> None:
    """Fill holes, augment texture, downsample and extract object maps for
    every sample under --in. Idempotent: reruns rewrite identical bytes."""
    cfg = PipelineConfig(
        scale=scale,
        tau=tau,
        background_value_depth=background,
        background_value_intensity=background_intensity,
        connectivity=int(connectivity),
        epsilon=epsilon,
    )
    cfg = _apply_config(cfg, config_path)
    dirs = find_sample_dirs(in_dir)
    bg_depth = cfg.background_value_depth
    bg_intensity = cfg.background_value_intensity
    if bg_depth is None or bg_intensity is None:
        data_depth, data_intensity = dataset_background_values(dirs)
        bg_depth = data_depth if bg_depth is None else bg_depth
        bg_intensity = data_intensity if bg_intensity is None else bg_intensity
    tasks = [(str(d), asdict(cfg), bg_depth, bg_intensity) for d in dirs]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            done = list(pool.map(_prepare_one, tasks))
    else:
        done = [_prepare_one(t) for t in tasks]
    click.echo(
        json.dumps(
            {
                "prepared": len(done),
                "scale": cfg.scale,
                "background_value_depth": bg_depth,
                "background_value_intensity": bg_intensity,
            }
        )
    )


@main.command()
@click.option("--pred", "pred_path", type=click.Path(exists=True), required=True,
              help="prediction PFM at HR resolution")
@click.option("--sample", "sample_dir", type=click.Path(exists=True), required=True)
@click.option("--pcl", "pcl_path", type=click.Path(), default=None,
              help="write a distance-colored PLY of the prediction cloud")
@click.option("--distances", "distances_path", type=click.Path(), default=None,
              help="with --pcl: also write the per-point distances as JSON")
@click.option("--k", type=int, default=20, show_default=True,
              help="outlier removal neighbor count")
@click.option("--ratio", type=float, default=2.0, show_default=True,
              help="outlier removal std ratio")
@click.option("--threshold", type=float, default=2.0, show_default=True,
              help="color-mapping distance threshold in mm")
@click.option("--symmetric", is_flag=True, default=False,
              help="symmetric instead of one-sided distance statistics")
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="JSON pipeline config; overrides flags")
@guarded
def evaluate(pred_path, sample_dir, pcl_path, distances_path, k, ratio,
             threshold, symmetric, config_path) -> None:
    """Metrics (and optionally point-cloud distances) for a prediction."""
    cfg = PipelineConfig(k_neighbors=k, std_ratio=ratio, color_threshold=threshold)
    cfg = _apply_config(cfg, config_path)
    pred = dio.read_pfm(pred_path)
    sample = dio.read_sample(sample_dir)
    result = evaluate_prediction(
        pred, sample, cfg, pcl_path=pcl_path, distances_path=distances_path,
        symmetric=symmetric,
    )
    click.echo(json.dumps(result))


_BENCH_STAGES = ("fill", "downsample", "objectmap", "prepare")


def _bench_stage_fn(stage: str, sample, cfg: PipelineConfig, bg: tuple):
    fill_cfg = cfg.fill_config(*bg)
    masked = remask(sample.hr_depth, sample.definition)
    labeling = classify_holes(sample.definition, cfg.connectivity)
    filled = fill_depth(masked, labeling, fill_cfg)
    if stage == "fill":
        return lambda: fill_depth(
            masked, classify_holes(sample.definition, cfg.connectivity), fill_cfg
        )
    if stage == "downsample":
        return lambda: downsample(filled, cfg.scale, cfg.tau)
    if stage == "objectmap":
        def run():
            plane = ground_plane(filled, sample.intrinsics, cfg.plane_config())
            return object_map(
                filled, sample.definition, plane, sample.intrinsics, cfg.epsilon
            )

        return run
    if stage == "prepare":
        return lambda: prepare_sample(sample, cfg, *bg)
    raise ValueError(f"unknown stage {stage!r}; choose from {_BENCH_STAGES}")


@main.group(invoke_without_command=True)
@click.option("--in", "in_dir", type=click.Path(exists=True), required=False)
@click.option("--stages", default="fill,downsample,objectmap", show_default=True)
@click.option("--reps", type=int, default=5, show_default=True)
@click.option("--scale", type=int, default=4, show_default=True)
@click.option("--tau", type=float, default=5.0, show_default=True)
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="also write the records JSON to a file")
@click.pass_context
@guarded
def bench(ctx, in_dir, stages, reps, scale, tau, out_path) -> None:
    """Time pipeline stages on a sample (single-threaded), or extrapolate."""
    if ctx.invoked_subcommand is not None:
        return
    if in_dir is None:
        raise ValueError("--in is required when measuring stages")
    cfg = PipelineConfig(scale=scale, tau=tau)
    dirs = find_sample_dirs(in_dir)
    ensure_definition(dirs[0])
    sample = dio.read_sample(dirs[0])
    bg = dataset_background_values(dirs[:1])
    records: list[BenchRecord] = []
    for stage in [s.strip() for s in stages.split(",") if s.strip()]:
        fn = _bench_stage_fn(stage, sample, cfg, bg)
        records.append(
            time_stage(stage, sample.width, sample.height, fn, repetitions=reps)
        )
    payload = json.dumps([r.to_dict() for r in records])
    if out_path:
        Path(out_path).write_text(payload + "\n", encoding="utf-8")
    click.echo(payload)


@bench.command()
@click.option("--records", "records_path", type=click.Path(exists=True),
              required=True, help="JSON list of bench records (w, h, seconds)")
@click.option("--at", "at_res", required=True, help="target resolution WxH")
@guarded
def extrapolate(records_path, at_res) -> None:
    """Predict the stage time at an unmeasured resolution from a quadratic
    fit in pixel count."""
    with open(records_path, encoding="utf-8") as f:
        records = json.load(f)
    try:
        points = [(r["w"] * r["h"], r["seconds"]) for r in records]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"records must carry w, h and seconds: {exc}") from exc
    try:
        w, h = (int(v) for v in at_res.lower().split("x"))
    except ValueError as exc:
        raise ValueError(f"--at must look like 1680x1200, got {at_res!r}") from exc
    model = fit_time_model(points)
    click.echo(
        json.dumps(
            {
                "at": f"{w}x{h}",
                "pixels": w * h,
                "predicted_seconds": model.predict(w * h),
            }
        )
    )


if __name__ == "__main__":
    main()
